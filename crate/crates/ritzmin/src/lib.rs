//! Simultaneous variational computation of the lowest eigenstates of quantum
//! many-body Hamiltonians.
//!
//! A set of `ns` non-orthogonal parameterized states spans a trial subspace.
//! The training objective is the trace of the inverse overlap matrix times the
//! Hamiltonian matrix over that subspace, which equals the sum of the subspace
//! Ritz values; minimizing it drives the states onto the span of the `ns`
//! lowest eigenstates. Energies and orthonormal eigenstate approximations are
//! then extracted with a Cholesky-reduced generalized eigenvalue solve.
//!
//! Modules:
//! * [`linalg`] — small dense Hermitian kernels (Cholesky, GEVP, trace loss).
//! * [`hamiltonian`] — Pauli-sum and discretized-grid Hamiltonians.
//! * [`ansatz`] — parameterized state families with manual adjoints.
//! * [`subspace`] — matrix assembly, loss, state cotangents, Ritz post-process.
//! * [`optim`] — L-BFGS with a strong-Wolfe line search.
//! * [`oracle`] — exact diagonalization and diagnostics used as ground truth.

pub mod ansatz;
pub mod hamiltonian;
pub mod linalg;
pub mod optim;
pub mod oracle;
pub mod rng;
pub mod subspace;

pub use hamiltonian::{DenseState, Operator};
pub use num_complex::Complex64;
