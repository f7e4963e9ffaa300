//! Hamiltonians and dense states.
//!
//! Two operator representations cover the applications: weighted Pauli strings
//! on N qubits/spins (spin chains, Jordan-Wigner-mapped fermions) and a
//! discretized 1D Schrodinger operator on a power-of-two grid. Both apply to
//! dense states without materializing the full matrix.

mod fermion;
mod grid;
mod pauli;

pub use fermion::{build_hubbard, jordan_wigner, FermionOp, LadderOp, ModeOrdering};
pub use grid::{build_morse_grid, kinetic_constant, GridOperator, AMU_KG, HBAR_JS, JOULE_PER_CM};
pub use pauli::{build_heisenberg, Pauli, PauliString, PauliSum};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HamiltonianError {
    #[error("invalid system size: {0}")]
    InvalidSize(String),
    #[error("mode index {mode} out of range for {n_modes} modes")]
    ModeOutOfRange { mode: usize, n_modes: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("dimension mismatch: operator dim {expected}, state dim {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

/// Dense state vector of complex amplitudes.
///
/// States are not required to be normalized or mutually orthogonal; overlaps
/// are handled explicitly by the subspace matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    amplitudes: Vec<Complex64>,
}

impl DenseState {
    pub fn zeros(dim: usize) -> Self {
        Self {
            amplitudes: vec![Complex64::ZERO; dim],
        }
    }

    /// Wrap an amplitude vector; all entries must be finite.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, HamiltonianError> {
        if !amplitudes
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return Err(HamiltonianError::InvalidSize(
                "non-finite amplitude".to_string(),
            ));
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis state |index> in a `dim`-dimensional space.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut s = Self::zeros(dim);
        s.amplitudes[index] = Complex64::ONE;
        s
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    /// Inner product <self|other> (conjugate-linear in self).
    pub fn inner(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// self += coeff * other
    pub fn axpy(&mut self, coeff: Complex64, other: &Self) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.amplitudes.iter_mut().zip(&other.amplitudes) {
            *a += coeff * b;
        }
    }

    pub fn scale(&mut self, factor: Complex64) {
        for a in &mut self.amplitudes {
            *a *= factor;
        }
    }
}

/// A Hamiltonian that can act on dense states.
pub trait Operator: Sync {
    fn dim(&self) -> usize;

    /// H |psi>, without materializing the dense matrix.
    fn apply(&self, psi: &DenseState) -> Result<DenseState, HamiltonianError>;

    /// <bra| H |ket>
    fn matrix_element(
        &self,
        bra: &DenseState,
        ket: &DenseState,
    ) -> Result<Complex64, HamiltonianError> {
        if bra.dim() != self.dim() {
            return Err(HamiltonianError::DimensionMismatch {
                expected: self.dim(),
                found: bra.dim(),
            });
        }
        let h_ket = self.apply(ket)?;
        Ok(bra.inner(&h_ket))
    }
}
