//! The fully expressive reference family: parameters are the real and
//! imaginary parts of every amplitude, so the Jacobian is the identity and
//! the family can represent any state exactly. Used to isolate optimization
//! quality from ansatz expressiveness.

use super::AnsatzError;
use crate::hamiltonian::DenseState;
use num_complex::Complex64;

pub fn param_count(dim: usize) -> usize {
    2 * dim
}

pub fn state(dim: usize, params: &[f64]) -> Result<DenseState, AnsatzError> {
    if params.len() != param_count(dim) {
        return Err(AnsatzError::ShapeMismatch(format!(
            "expected {} parameters, got {}",
            param_count(dim),
            params.len()
        )));
    }
    let amps = params
        .chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect();
    DenseState::from_amplitudes(amps).map_err(|e| AnsatzError::ShapeMismatch(e.to_string()))
}

pub fn vjp(dim: usize, cotangent: &DenseState) -> Result<Vec<f64>, AnsatzError> {
    if cotangent.dim() != dim {
        return Err(AnsatzError::ShapeMismatch(format!(
            "cotangent dim {} vs state dim {dim}",
            cotangent.dim()
        )));
    }
    let mut out = Vec::with_capacity(2 * dim);
    for c in cotangent.amplitudes() {
        out.push(2.0 * c.re);
        out.push(2.0 * c.im);
    }
    Ok(out)
}
