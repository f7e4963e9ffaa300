use ritzmin_cli::audit::audit;
use ritzmin_cli::baseline::compare_baseline;
use ritzmin_cli::config::RunConfig;
use ritzmin_cli::gradcheck::gradcheck;
use ritzmin_cli::runner::run;
use ritzmin_cli::RunError;
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "\
ritzmin - simultaneous variational solver for low-lying quantum eigenstates

USAGE:
    ritzmin run              --config FILE [--seed N] [--trials N] [--jobs N] [--output DIR]
    ritzmin gradcheck        --config FILE [--samples N] [--seed N] [--baseline] [--tol X]
    ritzmin compare-baseline --config FILE [--seed N] [--trials N] [--jobs N] [--output DIR]
    ritzmin audit            --config FILE --ckpt FILE

EXIT CODES:
    0  success
    2  configuration error
    3  numerical failure (including a gradcheck above tolerance)
    4  Ritz-bound violation detected by audit
";

struct Args {
    config: Option<PathBuf>,
    seed: Option<u64>,
    trials: Option<usize>,
    jobs: usize,
    output: Option<PathBuf>,
    samples: usize,
    baseline: bool,
    tol: f64,
    ckpt: Option<PathBuf>,
}

fn parse_args(mut argv: std::env::Args) -> Result<(String, Args), String> {
    let _ = argv.next();
    let sub = argv.next().ok_or_else(|| USAGE.to_string())?;
    let mut args = Args {
        config: None,
        seed: None,
        trials: None,
        jobs: 1,
        output: None,
        samples: 64,
        baseline: false,
        tol: 1e-6,
        ckpt: None,
    };
    let mut it = argv.peekable();
    while let Some(flag) = it.next() {
        let mut value = |name: &str| {
            it.next()
                .ok_or_else(|| format!("flag {name} needs a value"))
        };
        match flag.as_str() {
            "--config" => args.config = Some(PathBuf::from(value("--config")?)),
            "--seed" => {
                args.seed = Some(
                    value("--seed")?
                        .parse()
                        .map_err(|e| format!("--seed: {e}"))?,
                )
            }
            "--trials" => {
                args.trials = Some(
                    value("--trials")?
                        .parse()
                        .map_err(|e| format!("--trials: {e}"))?,
                )
            }
            "--jobs" => {
                args.jobs = value("--jobs")?
                    .parse()
                    .map_err(|e| format!("--jobs: {e}"))?
            }
            "--output" => args.output = Some(PathBuf::from(value("--output")?)),
            "--samples" => {
                args.samples = value("--samples")?
                    .parse()
                    .map_err(|e| format!("--samples: {e}"))?
            }
            "--baseline" => args.baseline = true,
            "--tol" => args.tol = value("--tol")?.parse().map_err(|e| format!("--tol: {e}"))?,
            "--ckpt" => args.ckpt = Some(PathBuf::from(value("--ckpt")?)),
            "-h" | "--help" => return Err(USAGE.to_string()),
            other => return Err(format!("unknown flag {other}\n\n{USAGE}")),
        }
    }
    Ok((sub, args))
}

fn load_config(args: &Args) -> Result<RunConfig, RunError> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| RunError::Config("--config is required".to_string()))?;
    let mut cfg = RunConfig::from_file(path)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        if trials == 0 {
            return Err(RunError::Config("trials must be >= 1".to_string()));
        }
        cfg.trials = trials;
    }
    Ok(cfg)
}

fn out_dir(args: &Args, cfg: &RunConfig) -> PathBuf {
    args.output
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("ritzmin_out"))
}

fn dispatch(sub: &str, args: &Args) -> Result<i32, RunError> {
    match sub {
        "run" => {
            let cfg = load_config(args)?;
            let dir = out_dir(args, &cfg);
            let summary = run(&cfg, &dir, args.jobs)?;
            let best = summary.best();
            println!(
                "run complete: {} trials, best trial {} (loss {:.12e}, {})",
                summary.n_trials, summary.best_trial, best.final_loss, best.termination
            );
            for (k, e) in best.ritz_energies.iter().enumerate() {
                match (&best.exact_energies, &best.rel_errors) {
                    (Some(ex), Some(rel)) => {
                        println!(
                            "  level {k}: {e:.12e}  exact {:.12e}  rel {:.3e}",
                            ex[k], rel[k]
                        )
                    }
                    _ => println!("  level {k}: {e:.12e}"),
                }
            }
            println!("outputs in {}", dir.display());
            let violated = summary.trials.iter().any(|t| {
                t.audit
                    .as_ref()
                    .is_some_and(|a| !a.clean || !a.initial_clean)
            });
            if violated {
                eprintln!("error: Ritz upper-bound violation detected during the run");
                return Ok(3);
            }
            Ok(0)
        }
        "gradcheck" => {
            let cfg = load_config(args)?;
            let report = gradcheck(&cfg, args.samples, args.baseline)?;
            println!(
                "gradcheck {}: {} of {} coordinates, max relative deviation {:.3e}",
                report.family, report.n_sampled, report.n_params, report.max_rel_deviation
            );
            if report.max_rel_deviation > args.tol {
                eprintln!("error: deviation above tolerance {:.1e}", args.tol);
                return Ok(3);
            }
            Ok(0)
        }
        "compare-baseline" => {
            let cfg = load_config(args)?;
            let dir = out_dir(args, &cfg);
            let summary = compare_baseline(&cfg, &dir, args.jobs)?;
            println!(
                "comparison over {} matched trials ({} steps each):",
                summary.n_trials, summary.max_steps
            );
            println!(
                "  trace loss    best {:.12e} (trial {})",
                summary.trace.final_loss, summary.trace.best_trial
            );
            println!(
                "  subspace VQE  best {:.12e} (trial {})",
                summary.baseline.final_loss, summary.baseline.best_trial
            );
            println!("outputs in {}", dir.display());
            Ok(0)
        }
        "audit" => {
            let cfg = load_config(args)?;
            let ckpt = args
                .ckpt
                .as_ref()
                .ok_or_else(|| RunError::Config("--ckpt is required".to_string()))?;
            let report = audit(&cfg, ckpt)?;
            let mut json = serde_json::to_string_pretty(&report).expect("report serialization");
            json.push('\n');
            print!("{json}");
            if !report.clean {
                eprintln!(
                    "error: Ritz upper-bound violated at levels {:?}",
                    report.violations
                );
                return Ok(4);
            }
            Ok(0)
        }
        other => Err(RunError::Config(format!(
            "unknown subcommand `{other}`\n\n{USAGE}"
        ))),
    }
}

fn main() -> ExitCode {
    let (sub, args) = match parse_args(std::env::args()) {
        Ok(x) => x,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    match dispatch(&sub, &args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
