//! Analytic-vs-finite-difference gradient audit on a sampled coordinate
//! subset, for both the trace loss and the shared-circuit baseline loss.

use crate::baseline::lowest_diagonal_inputs;
use crate::config::RunConfig;
use crate::RunError;
use ritzmin::ansatz::{AnsatzFamily, ParamVector};
use ritzmin::optim::Objective;
use ritzmin::rng::{subseed, SplitMix64};
use ritzmin::subspace::{subspace_vqe_loss_grad, TraceLossObjective};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckReport {
    pub family: String,
    pub baseline: bool,
    pub n_params: usize,
    pub n_sampled: usize,
    pub fd_step: f64,
    pub max_rel_deviation: f64,
}

/// Deterministic sample of `want` distinct indices from `0..len`.
fn sample_indices(len: usize, want: usize, seed: u64) -> Vec<usize> {
    if want >= len {
        return (0..len).collect();
    }
    let mut rng = SplitMix64::new(seed);
    let mut pool: Vec<usize> = (0..len).collect();
    for i in 0..want {
        let j = i + (rng.next_u64() as usize) % (len - i);
        pool.swap(i, j);
    }
    pool.truncate(want);
    pool.sort_unstable();
    pool
}

/// Compare the analytic gradient against central finite differences at a
/// seeded random point; returns the worst relative deviation over the sample.
pub fn gradcheck(
    cfg: &RunConfig,
    n_samples: usize,
    baseline: bool,
) -> Result<GradcheckReport, RunError> {
    let h = cfg.build_hamiltonian()?;
    if h.dim() > 1 << 10 {
        return Err(RunError::Config(format!(
            "gradcheck is limited to dim <= 1024, got {}",
            h.dim()
        )));
    }
    let family = cfg.build_family(&h)?;
    let fd_step = 1e-5;
    let trial_seed = subseed(cfg.seed, 0);

    let (point, analytic, loss_fn): (Vec<f64>, Vec<f64>, Box<dyn FnMut(&[f64]) -> f64>) =
        if baseline {
            let AnsatzFamily::Circuit(circuit) = family.clone() else {
                return Err(RunError::Config(
                    "baseline gradcheck needs the circuit family".to_string(),
                ));
            };
            let inputs = lowest_diagonal_inputs(&h, cfg.ns)?;
            let phi = family.init_params(cfg.init_sigma, trial_seed, 0);
            let (_, grad) = subspace_vqe_loss_grad(&circuit, &phi, &inputs, h.as_operator())
                .map_err(|e| RunError::Numerical(e.to_string()))?;
            let point = phi.values.clone();
            let circuit_f = circuit.clone();
            let inputs_f = inputs.clone();
            let h_f = cfg.build_hamiltonian()?;
            let f = move |x: &[f64]| {
                let p = ParamVector::new(x.to_vec(), String::new(), 0);
                subspace_vqe_loss_grad(&circuit_f, &p, &inputs_f, h_f.as_operator())
                    .map(|(l, _)| l)
                    .unwrap_or(f64::NAN)
            };
            (point, grad, Box::new(f))
        } else {
            let mut pooled = Vec::new();
            for i in 0..cfg.ns {
                pooled.extend(family.init_params(cfg.init_sigma, trial_seed, i).values);
            }
            let mut objective = TraceLossObjective::new(&family, h.as_operator(), cfg.ns);
            objective.jitter_eps = cfg.jitter;
            let eval = objective.eval(&pooled);
            if !eval.loss.is_finite() {
                return Err(RunError::Numerical(
                    "loss non-finite at the gradcheck point".to_string(),
                ));
            }
            let family_f = family.clone();
            let h_f = cfg.build_hamiltonian()?;
            let ns = cfg.ns;
            let jitter = cfg.jitter;
            let f = move |x: &[f64]| {
                let mut obj = TraceLossObjective::new(&family_f, h_f.as_operator(), ns);
                obj.jitter_eps = jitter;
                obj.eval(x).loss
            };
            (pooled, eval.grad, Box::new(f))
        };

    let mut f = loss_fn;
    let sample = sample_indices(point.len(), n_samples, subseed(cfg.seed, 0x6763));
    let mut work = point.clone();
    let mut max_rel = 0.0f64;
    for &k in &sample {
        work[k] = point[k] + fd_step;
        let up = f(&work);
        work[k] = point[k] - fd_step;
        let dn = f(&work);
        work[k] = point[k];
        let fd = (up - dn) / (2.0 * fd_step);
        let denom = analytic[k].abs().max(fd.abs()).max(1.0);
        max_rel = max_rel.max((analytic[k] - fd).abs() / denom);
    }

    Ok(GradcheckReport {
        family: family.id(),
        baseline,
        n_params: point.len(),
        n_sampled: sample.len(),
        fd_step,
        max_rel_deviation: max_rel,
    })
}
