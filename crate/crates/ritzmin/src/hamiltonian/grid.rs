//! Discretized 1D Schrodinger operator on a uniform power-of-two grid:
//! kinetic term by a 3-point central finite difference with Dirichlet (zero)
//! boundaries, plus a diagonal potential. Lengths are in Angstrom, masses in
//! amu, energies in 1/cm.

use super::{DenseState, HamiltonianError, Operator};
use num_complex::Complex64;

/// Reduced Planck constant, J s (CODATA 2018).
pub const HBAR_JS: f64 = 1.054_571_817e-34;
/// Atomic mass unit, kg (CODATA 2018).
pub const AMU_KG: f64 = 1.660_539_066_60e-27;
/// Energy of one wavenumber, J (h * c * 100).
pub const JOULE_PER_CM: f64 = 1.986_445_857e-23;

/// hbar^2 / (2 * amu) expressed in cm^-1 * Angstrom^2 * amu.
///
/// With this constant the kinetic prefactor for reduced mass `mu` (amu) on a
/// grid with spacing `dx` (Angstrom) is `kinetic_constant() / (mu * dx^2)` in
/// 1/cm.
pub fn kinetic_constant() -> f64 {
    HBAR_JS * HBAR_JS / (2.0 * AMU_KG) / JOULE_PER_CM * 1e20
}

/// H = -hbar^2/(2 mu) d^2/dx^2 + V(x) sampled on 2^n_bits uniform points.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOperator {
    n_bits: usize,
    x_min: f64,
    x_max: f64,
    potential: Vec<f64>,
    kinetic_coeff: f64,
}

impl GridOperator {
    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.dim() as f64
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn kinetic_coeff(&self) -> f64 {
        self.kinetic_coeff
    }

    /// Grid coordinate of point `k`.
    pub fn x(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.dx()
    }

    /// Tridiagonal data: diagonal and the constant off-diagonal entry.
    pub fn tridiagonal(&self) -> (Vec<f64>, f64) {
        let diag: Vec<f64> = self
            .potential
            .iter()
            .map(|v| v + 2.0 * self.kinetic_coeff)
            .collect();
        (diag, -self.kinetic_coeff)
    }
}

impl Operator for GridOperator {
    fn dim(&self) -> usize {
        1usize << self.n_bits
    }

    fn apply(&self, psi: &DenseState) -> Result<DenseState, HamiltonianError> {
        let dim = self.dim();
        if psi.dim() != dim {
            return Err(HamiltonianError::DimensionMismatch {
                expected: dim,
                found: psi.dim(),
            });
        }
        let amps = psi.amplitudes();
        let kc = self.kinetic_coeff;
        let mut out = DenseState::zeros(dim);
        let out_amps = out.amplitudes_mut();
        for k in 0..dim {
            let left = if k > 0 { amps[k - 1] } else { Complex64::ZERO };
            let right = if k + 1 < dim {
                amps[k + 1]
            } else {
                Complex64::ZERO
            };
            out_amps[k] = kc * (2.0 * amps[k] - left - right) + self.potential[k] * amps[k];
        }
        Ok(out)
    }
}

/// Morse-potential grid operator: V(x) = de (1 - exp(-am (x - re)))^2 on the
/// uniform grid x_k = x_min + k dx, dx = (x_max - x_min)/2^nd.
pub fn build_morse_grid(
    nd: usize,
    x_min: f64,
    x_max: f64,
    de: f64,
    am: f64,
    re: f64,
    mu: f64,
) -> Result<GridOperator, HamiltonianError> {
    if nd < 4 || nd > 24 {
        return Err(HamiltonianError::InvalidGrid(format!(
            "nd {nd} outside supported range 4..=24"
        )));
    }
    if !(x_max > x_min) {
        return Err(HamiltonianError::InvalidGrid(format!(
            "empty coordinate range [{x_min}, {x_max}]"
        )));
    }
    if !(de > 0.0 && am > 0.0 && mu > 0.0) {
        return Err(HamiltonianError::InvalidGrid(
            "physical parameters must be positive".to_string(),
        ));
    }
    let dim = 1usize << nd;
    let dx = (x_max - x_min) / dim as f64;
    let potential: Vec<f64> = (0..dim)
        .map(|k| {
            let x = x_min + k as f64 * dx;
            let f = 1.0 - (-am * (x - re)).exp();
            de * f * f
        })
        .collect();
    let kinetic_coeff = kinetic_constant() / (mu * dx * dx);
    Ok(GridOperator {
        n_bits: nd,
        x_min,
        x_max,
        potential,
        kinetic_coeff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // O-H stretch parameters used across the grid tests
    const DE: f64 = 42_301.0;
    const AM: f64 = 2.1440;
    const RE: f64 = 0.9575;
    const MU: f64 = 0.9527;

    #[test]
    fn kinetic_constant_matches_literature_value() {
        // hbar^2/(2 amu) in cm^-1 A^2 amu is 16.8576... in standard tables
        assert_relative_eq!(kinetic_constant(), 16.8576, max_relative = 1e-4);
    }

    #[test]
    fn potential_vanishes_at_equilibrium() {
        let g = build_morse_grid(12, 0.0, 10.0, DE, AM, RE, MU).unwrap();
        // r_e sits between grid points; evaluate the formula at the nearest one
        let k = ((RE - g.x_min()) / g.dx()).round() as usize;
        assert!(g.potential()[k] < DE * 1e-5);
        let exact_min = g.potential().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(exact_min >= 0.0);
    }

    #[test]
    fn potential_approaches_dissociation_from_below() {
        let g = build_morse_grid(10, 0.0, 10.0, DE, AM, RE, MU).unwrap();
        let dim = 1 << 10;
        let far = &g.potential()[dim * 3 / 4..];
        for v in far {
            assert!(*v < DE && *v > 0.9 * DE);
        }
        // monotone increase on the outer branch
        for w in far.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn grid_matrix_is_real_symmetric_with_gershgorin_bound() {
        let g = build_morse_grid(6, 0.0, 10.0, DE, AM, RE, MU).unwrap();
        let (diag, off) = g.tridiagonal();
        let vmin = g.potential().iter().cloned().fold(f64::INFINITY, f64::min);
        let bound = vmin - 2.0 * g.kinetic_coeff();
        // Rayleigh quotients of ad-hoc states respect the Gershgorin bound
        for trial in 0..5 {
            let dim = g.dim();
            let psi = DenseState::from_amplitudes(
                (0..dim)
                    .map(|k| Complex64::new(((k + trial) as f64 * 0.37).sin(), 0.0))
                    .collect(),
            )
            .unwrap();
            let rq = g.matrix_element(&psi, &psi).unwrap().re / psi.norm_sqr();
            assert!(rq >= bound);
        }
        // symmetric tridiagonal structure
        assert_eq!(diag.len(), g.dim());
        assert!(off < 0.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(build_morse_grid(2, 0.0, 10.0, DE, AM, RE, MU).is_err());
        assert!(build_morse_grid(10, 5.0, 5.0, DE, AM, RE, MU).is_err());
        assert!(build_morse_grid(10, 0.0, 10.0, -1.0, AM, RE, MU).is_err());
    }

    #[test]
    fn apply_rejects_dimension_mismatch() {
        let g = build_morse_grid(6, 0.0, 10.0, DE, AM, RE, MU).unwrap();
        let psi = DenseState::zeros(17);
        assert!(g.apply(&psi).is_err());
    }
}
