//! End-to-end experiment runner: build the Hamiltonian, initialize ns
//! parameter vectors per trial, minimize the trace loss, run the Ritz
//! post-process and oracle audits, and write structured outputs.
//!
//! Everything a rerun needs is determined by (config, seed); wall-clock
//! timings are kept out of `summary.json` so reruns produce byte-identical
//! summaries at any `--jobs` setting.

use crate::checkpoint::Checkpoint;
use crate::config::{BuiltHamiltonian, RunConfig};
use crate::RunError;
use ritzmin::ansatz::{AnsatzFamily, ParamVector};
use ritzmin::hamiltonian::{kinetic_constant, DenseState, AMU_KG, HBAR_JS, JOULE_PER_CM};
use ritzmin::optim::{minimize_with_callback, StepRecord, Termination};
use ritzmin::oracle;
use ritzmin::rng::subseed;
use ritzmin::subspace::{assemble_cached, ritz_postprocess, TraceLossObjective};
use serde::Serialize;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

#[derive(Debug, Clone, Serialize)]
pub struct Constants {
    pub hbar_js: f64,
    pub amu_kg: f64,
    pub joule_per_cm: f64,
    pub kinetic_constant_cm_a2_amu: f64,
}

impl Constants {
    pub fn current() -> Self {
        Self {
            hbar_js: HBAR_JS,
            amu_kg: AMU_KG,
            joule_per_cm: JOULE_PER_CM,
            kinetic_constant_cm_a2_amu: kinetic_constant(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    pub qubit_order: &'static str,
    pub rotation: &'static str,
    pub entangler: &'static str,
    pub circuit_block: &'static str,
    pub rng: &'static str,
}

impl Conventions {
    pub fn current() -> Self {
        Self {
            qubit_order: "site 0 is the most significant amplitude-index bit",
            rotation: "R_a(t) = exp(-i t/2 a) for a in {x,y,z}",
            entangler: "exp(+i t P_j P_{j+1}) for P in {Z,X,Y}",
            circuit_block: "per qubit Ry,Rz,Rx then per adjacent pair ZZ,XX,YY",
            rng: "splitmix64 streams, Box-Muller normals",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditOutcome {
    pub clean: bool,
    pub worst_margin: f64,
    pub initial_clean: bool,
    pub initial_worst_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub final_loss: f64,
    pub final_loss_shifted: Option<f64>,
    pub termination: String,
    pub steps: usize,
    pub n_evals: usize,
    pub grad_norm_final: f64,
    pub ritz_energies: Vec<f64>,
    pub exact_energies: Option<Vec<f64>>,
    pub rel_errors: Option<Vec<f64>>,
    pub variances: Vec<f64>,
    pub rel_variances: Vec<f64>,
    pub cond_s_min: Option<f64>,
    pub cond_s_max: Option<f64>,
    pub jitter_retries: usize,
    pub audit: Option<AuditOutcome>,
}

/// Grid-operator metadata recorded for reproducibility of Morse runs.
#[derive(Debug, Clone, Serialize)]
pub struct GridMeta {
    pub n_bits: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub kinetic_coeff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub version: &'static str,
    pub constants: Constants,
    pub conventions: Conventions,
    pub experiment: String,
    pub dim: usize,
    pub ns: usize,
    pub seed: u64,
    pub n_trials: usize,
    pub oracle_ran: bool,
    pub family: String,
    pub grid: Option<GridMeta>,
    pub trials: Vec<TrialOutcome>,
    pub best_trial: usize,
    pub config_echo: String,
}

impl RunSummary {
    pub fn best(&self) -> &TrialOutcome {
        &self.trials[self.best_trial]
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serialization");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Serialize)]
struct Timing {
    total_ms: f64,
    trial_ms: Vec<f64>,
}

fn experiment_name(cfg: &RunConfig) -> String {
    use crate::config::Experiment::*;
    match &cfg.experiment {
        Heisenberg { .. } => "heisenberg".to_string(),
        Morse { .. } => "morse".to_string(),
        Hubbard { .. } => "hubbard".to_string(),
        Custom { .. } => "custom".to_string(),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

struct TrialArtifacts {
    outcome: TrialOutcome,
    energies_csv: String,
    checkpoint: Checkpoint,
    wall_ms: f64,
}

fn energies_csv(
    ritz: &[f64],
    exact: Option<&[f64]>,
    variances: &[f64],
    rel_variances: &[f64],
) -> String {
    let mut out = String::from("k,ritz,exact,rel_error,variance,rel_variance\n");
    for (k, e) in ritz.iter().enumerate() {
        let (ex, err) = match exact {
            Some(ev) => {
                let rel = (e - ev[k]).abs() / ev[k].abs().max(1e-300);
                (ev[k].to_string(), rel.to_string())
            }
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            k, e, ex, err, variances[k], rel_variances[k]
        ));
    }
    out
}

/// One independent trial: seeded init, minimize, post-process, audit.
fn run_trial(
    cfg: &RunConfig,
    h: &BuiltHamiltonian,
    family: &AnsatzFamily,
    exact: Option<&[f64]>,
    trial: usize,
    inner_threads: usize,
    trial_dir: &Path,
) -> Result<TrialArtifacts, RunError> {
    let t0 = std::time::Instant::now();
    let trial_seed = subseed(cfg.seed, trial as u64);
    let params: Vec<ParamVector> = (0..cfg.ns)
        .map(|i| family.init_params(cfg.init_sigma, trial_seed, i))
        .collect();
    let pooled: Vec<f64> = params
        .iter()
        .flat_map(|p| p.values.iter().copied())
        .collect();

    // initial-subspace audit (the Ritz bound must hold before any training)
    let initial_audit = if let Some(exact) = exact {
        let states: Vec<DenseState> = params
            .iter()
            .map(|p| family.state(p))
            .collect::<Result<_, _>>()
            .map_err(|e| RunError::Numerical(e.to_string()))?;
        let assembly = assemble_cached(&states, h.as_operator())
            .map_err(|e| RunError::Numerical(e.to_string()))?;
        let post = ritz_postprocess(&assembly.matrices, &states)
            .map_err(|e| RunError::Numerical(e.to_string()))?;
        let audit = oracle::ritz_audit(post.energies(), exact, 1e-10)
            .map_err(|e| RunError::Numerical(e.to_string()))?;
        Some(audit)
    } else {
        None
    };

    let shift: Option<f64> = exact.map(|ev| ev.iter().sum());
    let mut objective = TraceLossObjective::new(family, h.as_operator(), cfg.ns);
    objective.jitter_eps = cfg.jitter;
    objective.threads = inner_threads;

    // stream the per-step log so a crash still leaves a usable partial file
    let conv_path = trial_dir.join("convergence.csv");
    let conv_file = std::fs::File::create(&conv_path)
        .map_err(|e| RunError::Io(format!("create {}: {e}", conv_path.display())))?;
    let mut conv = std::io::BufWriter::new(conv_file);
    conv.write_all(b"step,loss,loss_shifted,grad_norm,cond_s,wall_ms\n")
        .map_err(|e| RunError::Io(e.to_string()))?;
    let mut io_err = None;
    let mut on_step = |r: &StepRecord| {
        let row = format!(
            "{},{},{},{},{},{}\n",
            r.step,
            r.loss,
            fmt_opt(shift.map(|s| r.loss - s)),
            r.grad_norm,
            fmt_opt(r.aux),
            r.wall_ms
        );
        if let Err(e) = conv.write_all(row.as_bytes()).and_then(|_| conv.flush()) {
            io_err.get_or_insert(e.to_string());
        }
    };
    let trace = minimize_with_callback(&mut objective, &pooled, &cfg.optimizer, &mut on_step)
        .map_err(|e| RunError::Numerical(format!("trial {trial}: {e}")))?;
    drop(conv);
    if let Some(e) = io_err {
        return Err(RunError::Io(e));
    }

    // rebuild the final states and extract energies/eigenstates
    let final_params: Vec<ParamVector> = trace
        .final_params
        .chunks_exact(family.param_count())
        .enumerate()
        .map(|(i, chunk)| ParamVector::new(chunk.to_vec(), family.id(), i))
        .collect();
    let states: Vec<DenseState> = final_params
        .iter()
        .map(|p| family.state(p))
        .collect::<Result<_, _>>()
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let assembly = assemble_cached(&states, h.as_operator())
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let post = ritz_postprocess(&assembly.matrices, &states)
        .map_err(|e| RunError::Numerical(format!("trial {trial} post-process: {e}")))?;

    let mut variances = Vec::with_capacity(cfg.ns);
    let mut rel_variances = Vec::with_capacity(cfg.ns);
    for psi in &post.states {
        let rep = oracle::energy_variance(h.as_operator(), psi)
            .map_err(|e| RunError::Numerical(e.to_string()))?;
        variances.push(rep.variance);
        rel_variances.push(rep.relative);
    }

    let (exact_energies, rel_errors, audit_outcome) = if let Some(exact) = exact {
        let final_audit = oracle::ritz_audit(post.energies(), exact, 1e-10)
            .map_err(|e| RunError::Numerical(e.to_string()))?;
        let initial = initial_audit.unwrap();
        let worst = |margins: &[f64]| margins.iter().cloned().fold(f64::INFINITY, f64::min);
        let rel: Vec<f64> = post
            .energies()
            .iter()
            .zip(exact)
            .map(|(r, e)| (r - e).abs() / e.abs().max(1e-300))
            .collect();
        (
            Some(exact.to_vec()),
            Some(rel),
            Some(AuditOutcome {
                clean: final_audit.clean(),
                worst_margin: worst(&final_audit.margins),
                initial_clean: initial.clean(),
                initial_worst_margin: worst(&initial.margins),
            }),
        )
    } else {
        (None, None, None)
    };

    let cond_values: Vec<f64> = trace.records.iter().filter_map(|r| r.aux).collect();
    let termination = match trace.termination {
        Termination::AuxGuard => "overlap_condition_explosion".to_string(),
        other => other.as_str().to_string(),
    };
    let outcome = TrialOutcome {
        trial,
        seed: trial_seed,
        final_loss: trace.final_loss,
        final_loss_shifted: shift.map(|s| trace.final_loss - s),
        termination,
        steps: trace.records.last().map(|r| r.step).unwrap_or(0),
        n_evals: trace.n_evals,
        grad_norm_final: trace
            .records
            .last()
            .map(|r| r.grad_norm)
            .unwrap_or(f64::NAN),
        ritz_energies: post.energies().to_vec(),
        exact_energies,
        rel_errors,
        variances: variances.clone(),
        rel_variances: rel_variances.clone(),
        cond_s_min: cond_values.iter().cloned().reduce(f64::min),
        cond_s_max: cond_values.iter().cloned().reduce(f64::max),
        jitter_retries: objective.jitter_events,
        audit: audit_outcome,
    };

    Ok(TrialArtifacts {
        energies_csv: energies_csv(
            &outcome.ritz_energies,
            outcome.exact_energies.as_deref(),
            &variances,
            &rel_variances,
        ),
        checkpoint: Checkpoint::new(family, trial_seed, &final_params),
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        outcome,
    })
}

/// Execute a full run: `trials` seeded repetitions (parallel up to `jobs`),
/// outputs under `out_dir`, best trial by final loss.
pub fn run(cfg: &RunConfig, out_dir: &Path, jobs: usize) -> Result<RunSummary, RunError> {
    let t0 = std::time::Instant::now();
    let h = cfg.build_hamiltonian()?;
    let family = cfg.build_family(&h)?;
    if family.param_count() == 0 {
        return Err(RunError::Config("family has no parameters".to_string()));
    }

    let exact: Option<Vec<f64>> = if cfg.oracle && h.dim() <= oracle::DENSE_ED_LIMIT {
        let spectrum = oracle::exact_spectrum(h.oracle_kind(), cfg.ns)
            .map_err(|e| RunError::Numerical(e.to_string()))?;
        Some(spectrum.energies)
    } else {
        None
    };

    let jobs = jobs.max(1).min(cfg.trials);
    let cores = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let inner_threads = (cores / jobs).max(1);

    // all validation that can fail on bad configuration is done; now the
    // output tree may be created (trial logs stream into it)
    let trial_dirs: Vec<std::path::PathBuf> = (0..cfg.trials)
        .map(|t| out_dir.join(format!("trial_{t:02}")))
        .collect();
    for dir in &trial_dirs {
        std::fs::create_dir_all(dir)
            .map_err(|e| RunError::Io(format!("create {}: {e}", dir.display())))?;
    }
    let results: Vec<Option<Result<TrialArtifacts, RunError>>> =
        (0..cfg.trials).map(|_| None).collect();
    let results = Mutex::new(results);
    let next = AtomicUsize::new(0);
    {
        let (h, family, exact) = (&h, &family, exact.as_deref());
        let (results, next, trial_dirs) = (&results, &next, &trial_dirs);
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(move || loop {
                    let t = next.fetch_add(1, Ordering::Relaxed);
                    if t >= cfg.trials {
                        break;
                    }
                    let r = run_trial(cfg, h, family, exact, t, inner_threads, &trial_dirs[t]);
                    results.lock().unwrap()[t] = Some(r);
                });
            }
        });
    }
    let mut artifacts = Vec::with_capacity(cfg.trials);
    for slot in results.into_inner().unwrap() {
        artifacts.push(slot.expect("trial skipped")?);
    }

    let best_trial = artifacts
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.outcome.final_loss.total_cmp(&b.1.outcome.final_loss))
        .map(|(i, _)| i)
        .unwrap();

    let grid = match &h {
        BuiltHamiltonian::Grid(g) => Some(GridMeta {
            n_bits: g.n_bits(),
            x_min: g.x_min(),
            x_max: g.x_max(),
            dx: g.dx(),
            kinetic_coeff: g.kinetic_coeff(),
        }),
        BuiltHamiltonian::Pauli(_) => None,
    };
    let summary = RunSummary {
        version: env!("CARGO_PKG_VERSION"),
        constants: Constants::current(),
        conventions: Conventions::current(),
        experiment: experiment_name(cfg),
        dim: h.dim(),
        ns: cfg.ns,
        seed: cfg.seed,
        n_trials: cfg.trials,
        oracle_ran: exact.is_some(),
        family: family.id(),
        grid,
        trials: artifacts.iter().map(|a| a.outcome.clone()).collect(),
        best_trial,
        config_echo: cfg.echo.clone(),
    };

    // remaining outputs: per-trial files plus best-trial copies at the root
    let write = |path: &Path, content: &str| -> Result<(), RunError> {
        std::fs::write(path, content)
            .map_err(|e| RunError::Io(format!("write {}: {e}", path.display())))
    };
    for (t, art) in artifacts.iter().enumerate() {
        let dir = &trial_dirs[t];
        write(&dir.join("energies.csv"), &art.energies_csv)?;
        art.checkpoint.write(&dir.join("params.ckpt"))?;
    }
    let best = &artifacts[best_trial];
    std::fs::copy(
        trial_dirs[best_trial].join("convergence.csv"),
        out_dir.join("convergence.csv"),
    )
    .map_err(|e| RunError::Io(e.to_string()))?;
    write(&out_dir.join("energies.csv"), &best.energies_csv)?;
    best.checkpoint.write(&out_dir.join("params.ckpt"))?;
    write(&out_dir.join("summary.json"), &summary.to_json())?;
    if let Some(p) = h.pauli() {
        write(&out_dir.join("hamiltonian.txt"), &p.to_text())?;
    }
    let timing = Timing {
        total_ms: t0.elapsed().as_secs_f64() * 1e3,
        trial_ms: artifacts.iter().map(|a| a.wall_ms).collect(),
    };
    let mut timing_json = serde_json::to_string_pretty(&timing).expect("timing serialization");
    timing_json.push('\n');
    write(&out_dir.join("timing.json"), &timing_json)?;

    Ok(summary)
}
