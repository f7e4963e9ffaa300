//! Independent ground truth and diagnostics.
//!
//! Dense matrices here are built by Kronecker-product block walks (for Pauli
//! sums) or by occupation-number ladder action (for fermionic operators),
//! deliberately avoiding the bit-mask application path used by the operators
//! themselves, so spectra and matrix elements can be cross-checked between two
//! unrelated code paths. Grid operators are diagonalized through their
//! symmetric tridiagonal structure (Sturm bisection plus inverse iteration),
//! which stays exact well past the dense-matrix size limit.

use crate::hamiltonian::{
    kinetic_constant, DenseState, FermionOp, GridOperator, HamiltonianError, Operator, Pauli,
    PauliSum,
};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("dense diagonalization limited to dim <= {limit}, got {dim}")]
    TooLarge { dim: usize, limit: usize },
    #[error("level {n} is not a bound state of this potential")]
    NotBound { n: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}

/// Hard cap for dense exact diagonalization.
pub const DENSE_ED_LIMIT: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSource {
    DenseEd,
    MorseAnalytic,
}

/// The lowest part of an exact spectrum, ascending.
#[derive(Debug, Clone)]
pub struct ExactSpectrum {
    pub energies: Vec<f64>,
    pub source: SpectrumSource,
    pub dim: usize,
}

/// Either operator kind accepted by [`exact_spectrum`].
#[derive(Clone, Copy)]
pub enum OperatorKind<'a> {
    Pauli(&'a PauliSum),
    Grid(&'a GridOperator),
}

impl<'a> OperatorKind<'a> {
    pub fn dim(&self) -> usize {
        match self {
            OperatorKind::Pauli(h) => h.dim(),
            OperatorKind::Grid(g) => g.dim(),
        }
    }

    pub fn as_operator(&self) -> &'a dyn Operator {
        match self {
            OperatorKind::Pauli(h) => *h,
            OperatorKind::Grid(g) => *g,
        }
    }
}

fn pauli_nonzeros(p: Pauli) -> [(usize, usize, Complex64); 2] {
    let one = Complex64::ONE;
    let i = Complex64::I;
    match p {
        Pauli::I => [(0, 0, one), (1, 1, one)],
        Pauli::X => [(0, 1, one), (1, 0, one)],
        Pauli::Y => [(0, 1, -i), (1, 0, i)],
        Pauli::Z => [(0, 0, one), (1, 1, -one)],
    }
}

/// Dense matrix of a Pauli sum, assembled term by term as an explicit
/// Kronecker product (site 0 is the leftmost factor).
pub fn dense_pauli_matrix(h: &PauliSum) -> faer::Mat<Complex64> {
    let dim = h.dim();
    let mut acc = faer::Mat::<Complex64>::zeros(dim, dim);
    for term in h.terms() {
        add_kron(&mut acc, &term.ops, 0, 0, 0, term.coeff);
    }
    acc
}

fn add_kron(
    acc: &mut faer::Mat<Complex64>,
    ops: &[Pauli],
    site: usize,
    row: usize,
    col: usize,
    scale: Complex64,
) {
    if site == ops.len() {
        acc[(row, col)] += scale;
        return;
    }
    for (r, c, v) in pauli_nonzeros(ops[site]) {
        add_kron(acc, ops, site + 1, row * 2 + r, col * 2 + c, scale * v);
    }
}

/// Dense matrix of a fermionic operator in the occupation-number basis.
///
/// Mode `j` occupies bit `(n_modes - 1 - j)` of the basis index, matching the
/// qubit convention, and annihilation picks up the parity of all lower modes.
/// This path never touches Pauli algebra.
pub fn dense_fermion_matrix(op: &FermionOp) -> faer::Mat<Complex64> {
    let m = op.n_modes();
    let dim = 1usize << m;
    let mut acc = faer::Mat::<Complex64>::zeros(dim, dim);
    let bit = |mode: usize| 1usize << (m - 1 - mode);
    for (coeff, ladder) in op.terms() {
        for b in 0..dim {
            let mut state = b;
            let mut sign = 1.0f64;
            let mut alive = true;
            for l in ladder.iter().rev() {
                let occupied = state & bit(l.mode) != 0;
                if l.dagger == occupied {
                    alive = false;
                    break;
                }
                let lower_mask = !0usize << (m - l.mode);
                let parity = if l.mode == 0 {
                    0
                } else {
                    (state & lower_mask & (dim - 1)).count_ones() & 1
                };
                if parity == 1 {
                    sign = -sign;
                }
                state ^= bit(l.mode);
            }
            if alive {
                acc[(state, b)] += coeff * sign;
            }
        }
    }
    acc
}

/// Ascending eigenvalues of a Hermitian dense matrix; a real fast path is
/// taken when the imaginary parts are pure roundoff.
pub fn lowest_hermitian_eigenvalues(m: &faer::Mat<Complex64>, k: usize) -> Vec<f64> {
    let n = m.nrows();
    let scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)].norm())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let max_im = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)].im.abs())
        .fold(0.0f64, f64::max);
    let vals: Vec<f64> = if max_im <= 1e-12 * scale {
        let mr = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
        let evd = mr
            .self_adjoint_eigen(faer::Side::Lower)
            .expect("eigensolve failed");
        (0..n).map(|i| evd.S()[i]).collect()
    } else {
        let evd = m
            .self_adjoint_eigen(faer::Side::Lower)
            .expect("eigensolve failed");
        (0..n).map(|i| evd.S()[i].re).collect()
    };
    vals.into_iter().take(k).collect()
}

/// Full ascending spectrum of a Pauli sum (test-scale helper).
pub fn dense_eigenvalues(h: &PauliSum) -> Vec<f64> {
    let m = dense_pauli_matrix(h);
    lowest_hermitian_eigenvalues(&m, h.dim())
}

/// Lowest `k` exact eigenvalues.
///
/// Pauli sums go through dense ED (guarded by [`DENSE_ED_LIMIT`]); grid
/// operators go through the tridiagonal path at any supported size.
pub fn exact_spectrum(h: OperatorKind<'_>, k: usize) -> Result<ExactSpectrum, OracleError> {
    let dim = h.dim();
    let k = k.min(dim);
    let energies = match h {
        OperatorKind::Pauli(p) => {
            if dim > DENSE_ED_LIMIT {
                return Err(OracleError::TooLarge {
                    dim,
                    limit: DENSE_ED_LIMIT,
                });
            }
            let m = dense_pauli_matrix(p);
            lowest_hermitian_eigenvalues(&m, k)
        }
        OperatorKind::Grid(g) => grid_lowest_eigenvalues(g, k),
    };
    Ok(ExactSpectrum {
        energies,
        source: SpectrumSource::DenseEd,
        dim,
    })
}

/// Number of eigenvalues of the shifted tridiagonal strictly below `x`
/// (Sturm sequence count via the LDL^T recurrence).
fn sturm_count(diag: &[f64], off: f64, x: f64) -> usize {
    let pivmin = f64::MIN_POSITIVE.max(off * off * f64::EPSILON);
    let mut count = 0usize;
    let mut d = diag[0] - x;
    if d.abs() < pivmin {
        d = -pivmin;
    }
    if d < 0.0 {
        count += 1;
    }
    let b2 = off * off;
    for i in 1..diag.len() {
        d = (diag[i] - x) - b2 / d;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solve (T - sigma) x = rhs for a symmetric tridiagonal T with constant
/// off-diagonal, using banded elimination with partial pivoting.
fn solve_shifted_tridiag(diag: &[f64], off: f64, sigma: f64, rhs: &mut [f64]) {
    let n = diag.len();
    // pivot rows: (p at col i, q at col i+1, r at col i+2)
    let mut p = vec![0.0f64; n];
    let mut q = vec![0.0f64; n];
    let mut r = vec![0.0f64; n];
    let mut d0 = diag[0] - sigma;
    let mut s0 = off;
    let mut t0 = 0.0f64;
    for i in 0..n - 1 {
        let sub = off;
        let d1 = diag[i + 1] - sigma;
        let s1 = if i + 2 < n { off } else { 0.0 };
        if d0.abs() >= sub.abs() {
            let denom = if d0 == 0.0 { f64::MIN_POSITIVE } else { d0 };
            let m = sub / denom;
            p[i] = d0;
            q[i] = s0;
            r[i] = t0;
            rhs[i + 1] -= m * rhs[i];
            d0 = d1 - m * s0;
            s0 = s1 - m * t0;
            t0 = 0.0;
        } else {
            let m = d0 / sub;
            p[i] = sub;
            q[i] = d1;
            r[i] = s1;
            rhs.swap(i, i + 1);
            rhs[i + 1] -= m * rhs[i];
            d0 = s0 - m * d1;
            s0 = t0 - m * s1;
            t0 = 0.0;
        }
    }
    p[n - 1] = if d0 == 0.0 { f64::MIN_POSITIVE } else { d0 };
    q[n - 1] = 0.0;
    r[n - 1] = 0.0;
    // back substitution
    rhs[n - 1] /= p[n - 1];
    if n >= 2 {
        rhs[n - 2] = (rhs[n - 2] - q[n - 2] * rhs[n - 1]) / p[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        rhs[i] = (rhs[i] - q[i] * rhs[i + 1] - r[i] * rhs[i + 2]) / p[i];
    }
}

/// Rayleigh quotient of a grid-operator eigenvector candidate, evaluated in
/// the cancellation-free form kc * (sum of squared differences + boundary
/// terms) + potential average. Plain <y|T|y> loses all accuracy at fine grids
/// where kc is many orders above the eigenvalue.
fn stable_rayleigh_quotient(g: &GridOperator, y: &[f64]) -> f64 {
    let kc = g.kinetic_coeff();
    let v = g.potential();
    let n = y.len();
    let mut kin = y[0] * y[0] + y[n - 1] * y[n - 1];
    for i in 0..n - 1 {
        let d = y[i + 1] - y[i];
        kin += d * d;
    }
    let mut pot = 0.0f64;
    let mut nrm = 0.0f64;
    for i in 0..n {
        pot += v[i] * y[i] * y[i];
        nrm += y[i] * y[i];
    }
    (kc * kin + pot) / nrm
}

/// Lowest `k` eigenvalues of a grid operator: Sturm bisection isolates each
/// eigenvalue, inverse iteration builds the eigenvector, and the stable
/// Rayleigh quotient delivers the final value to full relative precision.
pub fn grid_lowest_eigenvalues(g: &GridOperator, k: usize) -> Vec<f64> {
    let (diag, off) = g.tridiagonal();
    let n = diag.len();
    let k = k.min(n);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let dmax = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut lo_all = dmin - 2.0 * off.abs();
    let hi_all = dmax + 2.0 * off.abs();
    let mut out = Vec::with_capacity(k);
    for idx in 0..k {
        // smallest x with count(x) >= idx + 1
        let (mut lo, mut hi) = (lo_all, hi_all);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(&diag, off, mid) >= idx + 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let sigma = 0.5 * (lo + hi);
        // inverse iteration from a deterministic seed vector
        let mut y = vec![0.0f64; n];
        let mut state = 0x2545_F491_4F6C_DD1Du64 ^ (idx as u64).wrapping_mul(0x9E37_79B9);
        for v in y.iter_mut() {
            state = state
                .wrapping_mul(6_364_136_223_846_793_005)
                .wrapping_add(1);
            *v = ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0;
        }
        for _ in 0..4 {
            solve_shifted_tridiag(&diag, off, sigma, &mut y);
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in y.iter_mut() {
                *v /= norm;
            }
        }
        out.push(stable_rayleigh_quotient(g, &y));
        // later eigenvalues sit above this one; tighten the lower bound
        lo_all = lo;
    }
    out
}

/// Analytic Morse level in 1/cm: E_n = w (n + 1/2) - (w (n + 1/2))^2 / (4 de)
/// with w = 2 am sqrt(C de / mu), the explicit-unit form of w = am sqrt(2 de).
pub fn morse_analytic(n: usize, de: f64, am: f64, mu: f64) -> Result<f64, OracleError> {
    let omega = 2.0 * am * (kinetic_constant() * de / mu).sqrt();
    let x = omega * (n as f64 + 0.5);
    // states past the dissociation edge of the formula are unbound; the edge
    // itself (E = de) is kept valid
    if x > 2.0 * de * (1.0 + 1e-12) {
        return Err(OracleError::NotBound { n });
    }
    Ok(x - x * x / (4.0 * de))
}

/// Energy variance and relative variance of a (freshly normalized) state.
#[derive(Debug, Clone, Copy)]
pub struct VarianceReport {
    pub variance: f64,
    pub relative: f64,
}

pub fn energy_variance(h: &dyn Operator, psi: &DenseState) -> Result<VarianceReport, OracleError> {
    let norm = psi.norm();
    if norm == 0.0 {
        return Err(OracleError::Hamiltonian(HamiltonianError::InvalidSize(
            "zero state".to_string(),
        )));
    }
    let mut normalized = psi.clone();
    normalized.scale(Complex64::new(1.0 / norm, 0.0));
    let h_psi = h.apply(&normalized)?;
    let e = normalized.inner(&h_psi);
    debug_assert!(e.im.abs() <= 1e-8 * e.re.abs().max(1.0));
    let e2 = h_psi.norm_sqr();
    let variance = e2 - e.re * e.re;
    let relative = if e.re != 0.0 {
        variance / (e.re * e.re)
    } else {
        f64::INFINITY
    };
    Ok(VarianceReport { variance, relative })
}

/// Upper-bound audit of Ritz values against exact levels.
#[derive(Debug, Clone)]
pub struct RitzAudit {
    /// ritz[k] - exact[k] per index; nonnegative up to tolerance when correct.
    pub margins: Vec<f64>,
    /// indices whose margin dropped below -tol: correctness violations.
    pub violations: Vec<usize>,
}

impl RitzAudit {
    pub fn clean(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn ritz_audit(ritz: &[f64], exact: &[f64], tol: f64) -> Result<RitzAudit, OracleError> {
    if ritz.len() > exact.len() {
        return Err(OracleError::LengthMismatch {
            left: ritz.len(),
            right: exact.len(),
        });
    }
    let margins: Vec<f64> = ritz.iter().zip(exact).map(|(r, e)| r - e).collect();
    let violations = margins
        .iter()
        .enumerate()
        .filter(|(_, &m)| m < -tol)
        .map(|(i, _)| i)
        .collect();
    Ok(RitzAudit {
        margins,
        violations,
    })
}

/// Ordinary least squares of `rel_errors[k]` against the 1-based level index.
#[derive(Debug, Clone, Copy)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn error_scaling_fit(rel_errors: &[f64]) -> Result<ScalingFit, OracleError> {
    let n = rel_errors.len();
    if n < 3 {
        return Err(OracleError::TooFewPoints { needed: 3, got: n });
    }
    let xs: Vec<f64> = (1..=n).map(|k| k as f64).collect();
    let xm = xs.iter().sum::<f64>() / n as f64;
    let ym = rel_errors.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(rel_errors)
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_res: f64 = xs
        .iter()
        .zip(rel_errors)
        .map(|(x, y)| {
            let fit = slope * x + intercept;
            (y - fit) * (y - fit)
        })
        .sum();
    let ss_tot: f64 = rel_errors.iter().map(|y| (y - ym) * (y - ym)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
    })
}
