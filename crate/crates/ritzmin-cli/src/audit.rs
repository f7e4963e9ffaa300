//! Recompute the oracle checks from a parameter checkpoint: rebuild the
//! states, redo the Ritz extraction, and verify the upper-bound property
//! against dense exact diagonalization.

use crate::checkpoint::Checkpoint;
use crate::config::RunConfig;
use crate::RunError;
use ritzmin::hamiltonian::DenseState;
use ritzmin::oracle;
use ritzmin::subspace::{assemble_cached, ritz_postprocess};
use serde::Serialize;
use std::path::Path;

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub family: String,
    pub ns: usize,
    pub ritz_energies: Vec<f64>,
    pub exact_energies: Vec<f64>,
    pub margins: Vec<f64>,
    pub violations: Vec<usize>,
    pub clean: bool,
    pub rel_errors: Vec<f64>,
    pub variances: Vec<f64>,
    pub rel_variances: Vec<f64>,
}

pub fn audit(cfg: &RunConfig, ckpt_path: &Path) -> Result<AuditReport, RunError> {
    let h = cfg.build_hamiltonian()?;
    if h.dim() > oracle::DENSE_ED_LIMIT {
        return Err(RunError::Config(format!(
            "audit needs an exact spectrum; dim {} exceeds the dense limit {}",
            h.dim(),
            oracle::DENSE_ED_LIMIT
        )));
    }
    let family = cfg.build_family(&h)?;
    let ckpt = Checkpoint::read(ckpt_path)?;
    let params = ckpt.to_param_vectors(&family)?;
    let states: Vec<DenseState> = params
        .iter()
        .map(|p| family.state(p))
        .collect::<Result<_, _>>()
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let assembly = assemble_cached(&states, h.as_operator())
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let post = ritz_postprocess(&assembly.matrices, &states)
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let exact = oracle::exact_spectrum(h.oracle_kind(), states.len())
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let result = oracle::ritz_audit(post.energies(), &exact.energies, 1e-10)
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let mut variances = Vec::new();
    let mut rel_variances = Vec::new();
    for psi in &post.states {
        let rep = oracle::energy_variance(h.as_operator(), psi)
            .map_err(|e| RunError::Numerical(e.to_string()))?;
        variances.push(rep.variance);
        rel_variances.push(rep.relative);
    }
    let rel_errors = post
        .energies()
        .iter()
        .zip(&exact.energies)
        .map(|(r, e)| (r - e).abs() / e.abs().max(1e-300))
        .collect();
    Ok(AuditReport {
        family: family.id(),
        ns: states.len(),
        ritz_energies: post.energies().to_vec(),
        exact_energies: exact.energies,
        clean: result.clean(),
        margins: result.margins,
        violations: result.violations,
        rel_errors,
        variances,
        rel_variances,
    })
}
