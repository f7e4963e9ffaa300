//! Dense Hermitian linear algebra for the small subspace matrices.
//!
//! The overlap matrix is never inverted explicitly: every inverse-overlap
//! product goes through a Cholesky factorization and triangular solves, and
//! the generalized eigenvalue problem is reduced to a standard Hermitian one
//! through the same factor. Matrices here are `ns x ns` with `ns <= 64`, so
//! all kernels are straightforward dense loops; the Hermitian eigensolve
//! itself is delegated to faer.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    /// The matrix failed positive-definiteness at the given pivot. For overlap
    /// matrices this signals linearly dependent (collapsed) variational states.
    #[error("matrix not positive definite at pivot {pivot}")]
    NotPositiveDefinite { pivot: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

/// Dense Hermitian matrix, row-major.
///
/// Storage is complex even when the payload happens to be real; realness is a
/// property checked by tests, not a type split.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            entries: vec![Complex64::ZERO; dim * dim],
        }
    }

    /// Build from explicit entries; enforces Hermitian symmetry by averaging
    /// with the adjoint and zeroing the diagonal imaginary residue.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Self {
        assert_eq!(entries.len(), dim * dim);
        let mut m = Self { dim, entries };
        m.hermitize();
        m
    }

    /// Build a real diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * m.dim + i] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.dim + j] = v;
    }

    /// Symmetrize in place: M <- (M + M^H)/2 with a real diagonal.
    pub fn hermitize(&mut self) {
        let n = self.dim;
        for i in 0..n {
            let d = self.entries[i * n + i];
            self.entries[i * n + i] = Complex64::new(d.re, 0.0);
            for j in (i + 1)..n {
                let a = self.entries[i * n + j];
                let b = self.entries[j * n + i];
                let avg = 0.5 * (a + b.conj());
                self.entries[i * n + j] = avg;
                self.entries[j * n + i] = avg.conj();
            }
        }
    }

    /// Largest entry magnitude; the scale reference for relative tolerances.
    pub fn scale(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max deviation from Hermitian symmetry relative to the matrix scale.
    pub fn hermiticity_residue(&self) -> f64 {
        let n = self.dim;
        let scale = self.scale().max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..n {
            worst = worst.max(self.entries[i * n + i].im.abs());
            for j in (i + 1)..n {
                let d = (self.entries[i * n + j] - self.entries[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst / scale
    }

    pub(crate) fn to_faer(&self) -> faer::Mat<Complex64> {
        faer::Mat::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }
}

/// Lower-triangular Cholesky factor with a real, strictly positive diagonal.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    dim: usize,
    lower: Vec<Complex64>,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if j > i {
            Complex64::ZERO
        } else {
            self.lower[i * self.dim + j]
        }
    }

    /// Solve L y = b in place (forward substitution).
    pub fn solve_lower(&self, b: &mut [Complex64]) {
        let n = self.dim;
        debug_assert_eq!(b.len(), n);
        for i in 0..n {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.lower[i * n + j] * b[j];
            }
            b[i] = acc / self.lower[i * n + i];
        }
    }

    /// Solve L^H x = y in place (back substitution).
    pub fn solve_adjoint(&self, b: &mut [Complex64]) {
        let n = self.dim;
        debug_assert_eq!(b.len(), n);
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in (i + 1)..n {
                acc -= self.lower[j * n + i].conj() * b[j];
            }
            b[i] = acc / self.lower[i * n + i];
        }
    }

    /// Solve (L L^H) x = b in place.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        self.solve_lower(b);
        self.solve_adjoint(b);
    }

    /// Rebuild L L^H; used to validate the factorization.
    pub fn reconstruct(&self) -> HermitianMatrix {
        let n = self.dim;
        let mut m = HermitianMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::ZERO;
                for k in 0..=i.min(j) {
                    acc += self.get(i, k) * self.get(j, k).conj();
                }
                m.set(i, j, acc);
            }
        }
        m
    }
}

/// Ritz data extracted from one generalized eigenvalue solve.
///
/// `coeffs` column `alpha` holds the expansion coefficients of the `alpha`-th
/// approximate eigenstate in the non-orthogonal state basis; the columns are
/// S-orthonormal by construction of the Cholesky reduction.
#[derive(Debug, Clone)]
pub struct RitzSolution {
    pub energies: Vec<f64>,
    coeffs: Vec<Complex64>,
    dim: usize,
    pub condition_s: f64,
}

impl RitzSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficient of basis state `i` in assembled eigenstate `alpha`.
    #[inline]
    pub fn coeff(&self, i: usize, alpha: usize) -> Complex64 {
        self.coeffs[i * self.dim + alpha]
    }

    pub fn column(&self, alpha: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.coeff(i, alpha)).collect()
    }
}

/// Relative pivot floor: pivots at or below `dim * eps * max_diag` are treated
/// as loss of positive definiteness.
fn pivot_floor(dim: usize, max_diag: f64) -> f64 {
    dim as f64 * f64::EPSILON * max_diag.max(f64::MIN_POSITIVE)
}

/// Cholesky factorization S = L L^H of a Hermitian positive definite matrix.
pub fn cholesky(s: &HermitianMatrix) -> Result<CholeskyFactor, LinalgError> {
    let n = s.dim();
    let max_diag = (0..n).map(|i| s.get(i, i).re).fold(0.0, f64::max);
    let floor = pivot_floor(n, max_diag);
    let mut lower = vec![Complex64::ZERO; n * n];
    for j in 0..n {
        let mut d = s.get(j, j).re;
        for k in 0..j {
            d -= lower[j * n + k].norm_sqr();
        }
        if !(d > floor) || !d.is_finite() {
            return Err(LinalgError::NotPositiveDefinite { pivot: j });
        }
        let ljj = d.sqrt();
        lower[j * n + j] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut acc = s.get(i, j);
            for k in 0..j {
                acc -= lower[i * n + k] * lower[j * n + k].conj();
            }
            lower[i * n + j] = acc / ljj;
        }
    }
    Ok(CholeskyFactor { dim: n, lower })
}

/// Cholesky with one diagonal-jitter retry.
///
/// On failure and `eps > 0`, retries once on `S + eps * tr(S)/n * I`. The
/// returned flag records whether the jittered matrix was used so the caller
/// can log a warning; the default configuration keeps `eps = 0`.
pub fn cholesky_with_jitter(
    s: &HermitianMatrix,
    eps: f64,
) -> Result<(CholeskyFactor, bool), LinalgError> {
    match cholesky(s) {
        Ok(f) => Ok((f, false)),
        Err(e) if eps > 0.0 => {
            let n = s.dim();
            let trace: f64 = (0..n).map(|i| s.get(i, i).re).sum();
            let shift = eps * trace / n as f64;
            if !(shift > 0.0) {
                return Err(e);
            }
            let mut jittered = s.clone();
            for i in 0..n {
                let d = jittered.get(i, i);
                jittered.set(i, i, d + Complex64::new(shift, 0.0));
            }
            cholesky(&jittered).map(|f| (f, true))
        }
        Err(e) => Err(e),
    }
}

/// Tr(S^-1 H) via Cholesky solves: solve S X = H column-wise, sum the
/// diagonal of X. The exact result is real; the imaginary residue is checked
/// and discarded.
pub fn trace_inv_product(s: &HermitianMatrix, h: &HermitianMatrix) -> Result<f64, LinalgError> {
    let n = s.dim();
    if h.dim() != n {
        return Err(LinalgError::DimensionMismatch {
            left: n,
            right: h.dim(),
        });
    }
    let factor = cholesky(s)?;
    let mut trace = Complex64::ZERO;
    let mut col = vec![Complex64::ZERO; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = h.get(i, j);
        }
        factor.solve_in_place(&mut col);
        trace += col[j];
    }
    // For Hermitian inputs the residue is pure roundoff; a large residue means
    // the inputs themselves were not Hermitian.
    debug_assert!(
        trace.im.abs() <= 1e-6 * trace.re.abs().max(1.0),
        "non-real trace {trace}"
    );
    Ok(trace.re)
}

/// Ratio of extreme eigenvalues of a Hermitian positive semidefinite matrix;
/// infinity when the smallest eigenvalue is not strictly positive.
pub fn condition_number(s: &HermitianMatrix) -> f64 {
    let eigs = hermitian_eigenvalues(s);
    let min = eigs.first().copied().unwrap_or(0.0);
    let max = eigs.last().copied().unwrap_or(0.0);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &HermitianMatrix) -> Vec<f64> {
    let fm = m.to_faer();
    let evd = fm
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("hermitian eigensolve did not converge");
    (0..m.dim()).map(|i| evd.S()[i].re).collect()
}

/// Generalized eigenvalue solve H c = E S c through the Cholesky reduction.
///
/// Forms M = L^-1 H L^-H, solves the standard Hermitian problem M v = E v,
/// and back-substitutes c = L^-H v, so the coefficient columns come out
/// S-orthonormal. S is factored, never inverted.
pub fn gevp(h: &HermitianMatrix, s: &HermitianMatrix) -> Result<RitzSolution, LinalgError> {
    let n = s.dim();
    if h.dim() != n {
        return Err(LinalgError::DimensionMismatch {
            left: h.dim(),
            right: n,
        });
    }
    let factor = cholesky(s)?;

    // Y = L^-1 H, column by column.
    let mut y = vec![Complex64::ZERO; n * n];
    let mut col = vec![Complex64::ZERO; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = h.get(i, j);
        }
        factor.solve_lower(&mut col);
        for i in 0..n {
            y[i * n + j] = col[i];
        }
    }
    // M = (L^-1 Y^H)^H = Y L^-H, again via forward solves on columns of Y^H.
    let mut m = HermitianMatrix::zeros(n);
    for j in 0..n {
        for i in 0..n {
            col[i] = y[j * n + i].conj();
        }
        factor.solve_lower(&mut col);
        for i in 0..n {
            m.set(j, i, col[i].conj());
        }
    }
    m.hermitize();

    let fm = m.to_faer();
    let evd = fm
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("hermitian eigensolve did not converge");
    // faer returns eigenvalues ascending; ties keep the solver's stable order.
    let energies: Vec<f64> = (0..n).map(|i| evd.S()[i].re).collect();
    let u = evd.U();

    let mut coeffs = vec![Complex64::ZERO; n * n];
    for alpha in 0..n {
        for i in 0..n {
            col[i] = u[(i, alpha)];
        }
        factor.solve_adjoint(&mut col);
        for i in 0..n {
            coeffs[i * n + alpha] = col[i];
        }
    }

    Ok(RitzSolution {
        energies,
        coeffs,
        dim: n,
        condition_s: condition_number(s),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{subseed, NormalSampler};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        let mut g = NormalSampler::new(seed);
        let mut m = HermitianMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, c(g.next(1.0), g.next(1.0)));
            }
        }
        m.hermitize();
        m
    }

    /// Random Gram matrix A^H A + shift, guaranteed positive definite.
    fn random_spd(n: usize, seed: u64) -> HermitianMatrix {
        let mut g = NormalSampler::new(seed);
        let a: Vec<Complex64> = (0..n * n).map(|_| c(g.next(1.0), g.next(1.0))).collect();
        let mut m = HermitianMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::ZERO;
                for k in 0..n {
                    acc += a[k * n + i].conj() * a[k * n + j];
                }
                m.set(i, j, acc);
            }
        }
        for i in 0..n {
            let d = m.get(i, i);
            m.set(i, i, d + c(0.5, 0.0));
        }
        m.hermitize();
        m
    }

    #[test]
    fn cholesky_identity_is_identity() {
        let s = HermitianMatrix::identity(2);
        let f = cholesky(&s).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(f.get(i, j), c(expect, 0.0));
            }
        }
    }

    #[test]
    fn cholesky_diagonal_takes_square_roots() {
        let s = HermitianMatrix::diagonal(&[4.0, 9.0]);
        let f = cholesky(&s).unwrap();
        assert_eq!(f.get(0, 0), c(2.0, 0.0));
        assert_eq!(f.get(1, 1), c(3.0, 0.0));
    }

    #[test]
    fn cholesky_round_trip_2x2() {
        let s = HermitianMatrix::from_entries(2, vec![c(2., 0.), c(1., 0.), c(1., 0.), c(2., 0.)]);
        let f = cholesky(&s).unwrap();
        let r = f.reconstruct();
        for i in 0..2 {
            for j in 0..2 {
                assert!((r.get(i, j) - s.get(i, j)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_round_trip_random_spd_up_to_64() {
        for &n in &[3usize, 8, 17, 64] {
            let s = random_spd(n, subseed(11, n as u64));
            let f = cholesky(&s).unwrap();
            let r = f.reconstruct();
            let scale = s.scale();
            let mut err = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    err = err.max((r.get(i, j) - s.get(i, j)).norm());
                }
            }
            assert!(err / scale <= 1e-12, "n={n} err={err:e}");
            // diagonal of the factor is real and strictly positive
            for i in 0..n {
                let d = f.get(i, i);
                assert!(d.im == 0.0 && d.re > 0.0);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite_with_pivot_index() {
        let s = HermitianMatrix::diagonal(&[1.0, -1.0]);
        match cholesky(&s) {
            Err(LinalgError::NotPositiveDefinite { pivot }) => assert_eq!(pivot, 1),
            other => panic!("expected pivot failure, got {other:?}"),
        }
    }

    #[test]
    fn jitter_retry_recovers_singular_matrix() {
        let s = HermitianMatrix::from_entries(2, vec![c(1., 0.); 4]);
        assert!(cholesky(&s).is_err());
        let (f, jittered) = cholesky_with_jitter(&s, 1e-8).unwrap();
        assert!(jittered);
        assert_eq!(f.dim(), 2);
        // eps = 0 keeps the failure
        assert!(cholesky_with_jitter(&s, 0.0).is_err());
    }

    #[test]
    fn gevp_identity_overlap_is_plain_eigensolve() {
        let h = HermitianMatrix::diagonal(&[1.0, 2.0]);
        let s = HermitianMatrix::identity(2);
        let r = gevp(&h, &s).unwrap();
        assert_relative_eq!(r.energies[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(r.energies[1], 2.0, max_relative = 1e-14);
        for alpha in 0..2 {
            for i in 0..2 {
                let expect = if i == alpha { 1.0 } else { 0.0 };
                assert!((r.coeff(i, alpha).norm() - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gevp_pauli_x_spectrum() {
        let h = HermitianMatrix::from_entries(2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let s = HermitianMatrix::identity(2);
        let r = gevp(&h, &s).unwrap();
        assert_relative_eq!(r.energies[0], -1.0, max_relative = 1e-14);
        assert_relative_eq!(r.energies[1], 1.0, max_relative = 1e-14);
    }

    /// Independent oracle: eigenvalues of S^-1 H from a dense non-symmetric
    /// eigensolver (faer LU solve + general eigendecomposition).
    fn sinv_h_eigenvalues(s: &HermitianMatrix, h: &HermitianMatrix) -> Vec<f64> {
        use faer::prelude::Solve;
        let n = s.dim();
        let fs = s.to_faer();
        let fh = h.to_faer();
        let x = fs.partial_piv_lu().solve(&fh);
        let eigs: Vec<Complex64> = x.eigenvalues().expect("general eigensolve failed");
        let mut vals: Vec<f64> = eigs.iter().map(|z| z.re).collect();
        assert!(eigs.iter().all(|z| z.im.abs() < 1e-9));
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals.len(), n);
        vals
    }

    #[test]
    fn gevp_matches_direct_inverse_overlap_eigensolve() {
        let s = random_spd(4, 101);
        let h = random_hermitian(4, 202);
        let r = gevp(&h, &s).unwrap();
        let oracle = sinv_h_eigenvalues(&s, &h);
        for (a, b) in r.energies.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn gevp_coefficients_are_s_orthonormal_and_diagonalize_h() {
        let s = random_spd(5, 7);
        let h = random_hermitian(5, 8);
        let r = gevp(&h, &s).unwrap();
        let n = 5;
        for alpha in 0..n {
            for beta in 0..n {
                let mut gram = Complex64::ZERO;
                let mut hmat = Complex64::ZERO;
                for i in 0..n {
                    for j in 0..n {
                        let prod = r.coeff(i, alpha).conj() * r.coeff(j, beta);
                        gram += prod * s.get(i, j);
                        hmat += prod * h.get(i, j);
                    }
                }
                let expect_g = if alpha == beta { 1.0 } else { 0.0 };
                let expect_h = if alpha == beta {
                    r.energies[alpha]
                } else {
                    0.0
                };
                assert!((gram - c(expect_g, 0.0)).norm() < 1e-8);
                assert!((hmat - c(expect_h, 0.0)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn trace_identity_overlap_sums_diagonal() {
        let s = HermitianMatrix::identity(2);
        let h = HermitianMatrix::diagonal(&[3.0, 5.0]);
        assert_relative_eq!(
            trace_inv_product(&s, &h).unwrap(),
            8.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn trace_is_invariant_under_uniform_state_rescaling() {
        let s = random_spd(4, 31);
        let h = random_hermitian(4, 32);
        let base = trace_inv_product(&s, &h).unwrap();
        let scale = |m: &HermitianMatrix| {
            let mut out = m.clone();
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    out.set(i, j, 4.0 * m.get(i, j));
                }
            }
            out
        };
        let scaled = trace_inv_product(&scale(&s), &scale(&h)).unwrap();
        assert_relative_eq!(base, scaled, max_relative = 1e-12);
    }

    #[test]
    fn trace_equals_sum_of_ritz_energies() {
        let s = random_spd(5, 41);
        let h = random_hermitian(5, 42);
        let t = trace_inv_product(&s, &h).unwrap();
        let r = gevp(&h, &s).unwrap();
        let sum: f64 = r.energies.iter().sum();
        assert!((t - sum).abs() <= 1e-10 * sum.abs().max(1.0));
    }

    #[test]
    fn condition_number_examples() {
        assert_eq!(condition_number(&HermitianMatrix::identity(3)), 1.0);
        assert_relative_eq!(
            condition_number(&HermitianMatrix::diagonal(&[4.0, 1.0])),
            4.0,
            max_relative = 1e-12
        );
        // Gram matrix of two states with overlap 1 - 1e-6: eigenvalues 1 +- rho.
        let rho = 1.0 - 1e-6;
        let s =
            HermitianMatrix::from_entries(2, vec![c(1., 0.), c(rho, 0.), c(rho, 0.), c(1., 0.)]);
        assert!(condition_number(&s) >= 1e6);
        // singular input gets the infinity sentinel
        let s0 = HermitianMatrix::from_entries(2, vec![c(1., 0.); 4]);
        assert!(condition_number(&s0).is_infinite());
    }

    /// Apply a random invertible congruence M^H A M to both matrices.
    fn congruence(
        s: &HermitianMatrix,
        h: &HermitianMatrix,
        seed: u64,
    ) -> (HermitianMatrix, HermitianMatrix) {
        let n = s.dim();
        let mut g = NormalSampler::new(seed);
        // identity plus a modest random perturbation is invertible w.h.p.
        let m: Vec<Complex64> = (0..n * n)
            .map(|k| {
                let diag = if k % (n + 1) == 0 { 1.0 } else { 0.0 };
                c(diag + 0.3 * g.next(1.0), 0.3 * g.next(1.0))
            })
            .collect();
        let transform = |a: &HermitianMatrix| {
            let mut out = HermitianMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    let mut acc = Complex64::ZERO;
                    for p in 0..n {
                        for q in 0..n {
                            acc += m[p * n + i].conj() * a.get(p, q) * m[q * n + j];
                        }
                    }
                    out.set(i, j, acc);
                }
            }
            out.hermitize();
            out
        };
        (transform(s), transform(h))
    }

    #[test]
    fn ritz_energies_invariant_under_basis_change() {
        for trial in 0..20u64 {
            let n = 3 + (trial as usize % 4);
            let s = random_spd(n, subseed(501, trial));
            let h = random_hermitian(n, subseed(502, trial));
            let base = gevp(&h, &s).unwrap();
            let (s2, h2) = congruence(&s, &h, subseed(503, trial));
            let changed = gevp(&h2, &s2).unwrap();
            for (a, b) in base.energies.iter().zip(&changed.energies) {
                assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn trace_equals_energy_sum_across_random_instances() {
        for trial in 0..50u64 {
            let n = 2 + (trial as usize % 7);
            let s = random_spd(n, subseed(601, trial));
            let h = random_hermitian(n, subseed(602, trial));
            let t = trace_inv_product(&s, &h).unwrap();
            let sum: f64 = gevp(&h, &s).unwrap().energies.iter().sum();
            assert!((t - sum).abs() <= 1e-10 * sum.abs().max(1.0));
        }
    }
}
