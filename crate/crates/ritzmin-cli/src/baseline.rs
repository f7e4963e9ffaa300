//! Matched-seed comparison of trace-loss training against the shared-circuit
//! subspace baseline: same circuit structure, same step budget, same trial
//! seeds; paired convergence logs and best-trial relative-error tables.

use crate::config::{BuiltHamiltonian, Experiment, RunConfig};
use crate::RunError;
use ritzmin::ansatz::{shared_circuit_states, AnsatzFamily, CircuitAnsatz, ParamVector};
use ritzmin::hamiltonian::DenseState;
use ritzmin::optim::{minimize, Evaluation, Objective, OptTrace};
use ritzmin::oracle;
use ritzmin::rng::subseed;
use ritzmin::subspace::{
    assemble_cached, ritz_postprocess, subspace_vqe_loss_grad, TraceLossObjective,
};
use serde::Serialize;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

#[derive(Debug, Clone, Serialize)]
pub struct PairedTrial {
    pub trial: usize,
    pub seed: u64,
    pub trace_final_loss: f64,
    pub baseline_final_loss: f64,
    pub trace_termination: String,
    pub baseline_termination: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodBest {
    pub best_trial: usize,
    pub final_loss: f64,
    pub energies: Vec<f64>,
    pub rel_errors: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonSummary {
    pub version: &'static str,
    pub ns: usize,
    pub seed: u64,
    pub n_trials: usize,
    pub max_steps: usize,
    pub exact_energies: Option<Vec<f64>>,
    pub trials: Vec<PairedTrial>,
    pub trace: MethodBest,
    pub baseline: MethodBest,
    pub config_echo: String,
}

/// The ns basis states with the lowest diagonal Hamiltonian elements, in
/// stable index order; a deterministic, physically sensible baseline input.
pub fn lowest_diagonal_inputs(h: &BuiltHamiltonian, ns: usize) -> Result<Vec<Vec<u8>>, RunError> {
    let dim = h.dim();
    let n_bits = dim.trailing_zeros() as usize;
    if ns > dim {
        return Err(RunError::Config(format!(
            "ns {ns} exceeds the Hilbert space dimension {dim}"
        )));
    }
    let op = h.as_operator();
    let mut diag: Vec<(f64, usize)> = (0..dim)
        .map(|b| {
            let basis = DenseState::basis_state(dim, b);
            let e = op
                .matrix_element(&basis, &basis)
                .map(|z| z.re)
                .unwrap_or(f64::INFINITY);
            (e, b)
        })
        .collect();
    diag.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(diag[..ns]
        .iter()
        .map(|(_, b)| {
            (0..n_bits)
                .map(|k| ((b >> (n_bits - 1 - k)) & 1) as u8)
                .collect()
        })
        .collect())
}

struct BaselineObjective<'a> {
    circuit: &'a CircuitAnsatz,
    inputs: &'a [Vec<u8>],
    h: &'a dyn ritzmin::Operator,
}

impl Objective for BaselineObjective<'_> {
    fn eval(&mut self, x: &[f64]) -> Evaluation {
        let phi = ParamVector::new(x.to_vec(), String::new(), 0);
        match subspace_vqe_loss_grad(self.circuit, &phi, self.inputs, self.h) {
            Ok((loss, grad)) => Evaluation {
                loss,
                grad,
                aux: None,
            },
            Err(_) => Evaluation {
                loss: f64::NAN,
                grad: Vec::new(),
                aux: None,
            },
        }
    }
}

fn csv_of(trace: &OptTrace) -> String {
    let mut out = String::from("step,loss,grad_norm,wall_ms\n");
    for r in &trace.records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.step, r.loss, r.grad_norm, r.wall_ms
        ));
    }
    out
}

struct PairArtifacts {
    paired: PairedTrial,
    trace_csv: String,
    baseline_csv: String,
    trace_energies: Vec<f64>,
    baseline_energies: Vec<f64>,
}

fn run_pair(
    cfg: &RunConfig,
    h: &BuiltHamiltonian,
    family: &AnsatzFamily,
    circuit: &CircuitAnsatz,
    inputs: &[Vec<u8>],
    trial: usize,
) -> Result<PairArtifacts, RunError> {
    let trial_seed = subseed(cfg.seed, trial as u64);

    // our method: ns independently parameterized circuits
    let mut pooled = Vec::new();
    for i in 0..cfg.ns {
        pooled.extend(family.init_params(cfg.init_sigma, trial_seed, i).values);
    }
    let mut objective = TraceLossObjective::new(family, h.as_operator(), cfg.ns);
    objective.jitter_eps = cfg.jitter;
    let trace_run = minimize(&mut objective, &pooled, &cfg.optimizer)
        .map_err(|e| RunError::Numerical(format!("trial {trial} trace: {e}")))?;
    let final_params: Vec<ParamVector> = trace_run
        .final_params
        .chunks_exact(family.param_count())
        .enumerate()
        .map(|(i, c)| ParamVector::new(c.to_vec(), family.id(), i))
        .collect();
    let states: Vec<DenseState> = final_params
        .iter()
        .map(|p| family.state(p))
        .collect::<Result<_, _>>()
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let assembly = assemble_cached(&states, h.as_operator())
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let trace_post = ritz_postprocess(&assembly.matrices, &states)
        .map_err(|e| RunError::Numerical(e.to_string()))?;

    // baseline: one shared circuit over fixed orthonormal basis inputs
    let phi0 = family.init_params(cfg.init_sigma, trial_seed, 0);
    let mut baseline_obj = BaselineObjective {
        circuit,
        inputs,
        h: h.as_operator(),
    };
    let baseline_run = minimize(&mut baseline_obj, &phi0.values, &cfg.optimizer)
        .map_err(|e| RunError::Numerical(format!("trial {trial} baseline: {e}")))?;
    let phi_final = ParamVector::new(baseline_run.final_params.clone(), String::new(), 0);
    let b_states = shared_circuit_states(circuit, &phi_final.values, inputs)
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let b_assembly = assemble_cached(&b_states, h.as_operator())
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let b_post = ritz_postprocess(&b_assembly.matrices, &b_states)
        .map_err(|e| RunError::Numerical(e.to_string()))?;

    Ok(PairArtifacts {
        paired: PairedTrial {
            trial,
            seed: trial_seed,
            trace_final_loss: trace_run.final_loss,
            baseline_final_loss: baseline_run.final_loss,
            trace_termination: trace_run.termination.as_str().to_string(),
            baseline_termination: baseline_run.termination.as_str().to_string(),
        },
        trace_csv: csv_of(&trace_run),
        baseline_csv: csv_of(&baseline_run),
        trace_energies: trace_post.energies().to_vec(),
        baseline_energies: b_post.energies().to_vec(),
    })
}

pub fn compare_baseline(
    cfg: &RunConfig,
    out_dir: &Path,
    jobs: usize,
) -> Result<ComparisonSummary, RunError> {
    if !matches!(
        cfg.experiment,
        Experiment::Hubbard { .. } | Experiment::Heisenberg { .. }
    ) {
        return Err(RunError::Config(
            "compare-baseline supports the hubbard and heisenberg experiments".to_string(),
        ));
    }
    let h = cfg.build_hamiltonian()?;
    let family = cfg.build_family(&h)?;
    let AnsatzFamily::Circuit(circuit) = family.clone() else {
        return Err(RunError::Config(
            "compare-baseline requires the circuit family".to_string(),
        ));
    };
    let inputs = lowest_diagonal_inputs(&h, cfg.ns)?;
    let exact: Option<Vec<f64>> = if cfg.oracle && h.dim() <= oracle::DENSE_ED_LIMIT {
        Some(
            oracle::exact_spectrum(h.oracle_kind(), cfg.ns)
                .map_err(|e| RunError::Numerical(e.to_string()))?
                .energies,
        )
    } else {
        None
    };

    let jobs = jobs.max(1).min(cfg.trials);
    let results: Vec<Option<Result<PairArtifacts, RunError>>> =
        (0..cfg.trials).map(|_| None).collect();
    let results = Mutex::new(results);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let t = next.fetch_add(1, Ordering::Relaxed);
                if t >= cfg.trials {
                    break;
                }
                let r = run_pair(cfg, &h, &family, &circuit, &inputs, t);
                results.lock().unwrap()[t] = Some(r);
            });
        }
    });
    let mut artifacts = Vec::with_capacity(cfg.trials);
    for slot in results.into_inner().unwrap() {
        artifacts.push(slot.expect("trial skipped")?);
    }

    let best_of = |key: &dyn Fn(&PairArtifacts) -> f64| {
        artifacts
            .iter()
            .enumerate()
            .min_by(|a, b| key(a.1).total_cmp(&key(b.1)))
            .map(|(i, _)| i)
            .unwrap()
    };
    let trace_best = best_of(&|a: &PairArtifacts| a.paired.trace_final_loss);
    let baseline_best = best_of(&|a: &PairArtifacts| a.paired.baseline_final_loss);
    let rel = |energies: &[f64]| {
        exact.as_ref().map(|ev| {
            energies
                .iter()
                .zip(ev)
                .map(|(r, e)| (r - e).abs() / e.abs().max(1e-300))
                .collect::<Vec<f64>>()
        })
    };

    let summary = ComparisonSummary {
        version: env!("CARGO_PKG_VERSION"),
        ns: cfg.ns,
        seed: cfg.seed,
        n_trials: cfg.trials,
        max_steps: cfg.optimizer.max_steps,
        exact_energies: exact.clone(),
        trials: artifacts.iter().map(|a| a.paired.clone()).collect(),
        trace: MethodBest {
            best_trial: trace_best,
            final_loss: artifacts[trace_best].paired.trace_final_loss,
            energies: artifacts[trace_best].trace_energies.clone(),
            rel_errors: rel(&artifacts[trace_best].trace_energies),
        },
        baseline: MethodBest {
            best_trial: baseline_best,
            final_loss: artifacts[baseline_best].paired.baseline_final_loss,
            energies: artifacts[baseline_best].baseline_energies.clone(),
            rel_errors: rel(&artifacts[baseline_best].baseline_energies),
        },
        config_echo: cfg.echo.clone(),
    };

    std::fs::create_dir_all(out_dir)
        .map_err(|e| RunError::Io(format!("create {}: {e}", out_dir.display())))?;
    for (t, art) in artifacts.iter().enumerate() {
        std::fs::write(
            out_dir.join(format!("trace_trial_{t:02}.csv")),
            &art.trace_csv,
        )
        .map_err(|e| RunError::Io(e.to_string()))?;
        std::fs::write(
            out_dir.join(format!("baseline_trial_{t:02}.csv")),
            &art.baseline_csv,
        )
        .map_err(|e| RunError::Io(e.to_string()))?;
    }
    let mut json = serde_json::to_string_pretty(&summary).expect("comparison serialization");
    json.push('\n');
    std::fs::write(out_dir.join("comparison.json"), json)
        .map_err(|e| RunError::Io(e.to_string()))?;
    Ok(summary)
}
