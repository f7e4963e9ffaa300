//! Flat key = value configuration files with `[section]` headers.
//!
//! Every key is schema-validated up front and unknown keys are rejected, so a
//! typo fails the run before any compute starts. The raw file text is echoed
//! verbatim into the run summary for diff-able provenance.

use crate::RunError;
use ritzmin::ansatz::{AnsatzFamily, Boundary, CircuitAnsatz};
use ritzmin::hamiltonian::{
    build_heisenberg, build_hubbard, build_morse_grid, GridOperator, ModeOrdering, Operator,
    PauliSum,
};
use ritzmin::optim::OptimizerConfig;
use ritzmin::oracle::OperatorKind;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Heisenberg {
        n: usize,
        jx: f64,
        jy: f64,
        jz: f64,
        hz: f64,
        periodic: bool,
    },
    Morse {
        nd: usize,
        x_min: f64,
        x_max: f64,
        de: f64,
        am: f64,
        re: f64,
        mu: f64,
    },
    Hubbard {
        lx: usize,
        ly: usize,
        t: f64,
        u: f64,
        ordering: ModeOrdering,
    },
    Custom {
        hamiltonian_file: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnsatzSpec {
    DenseTable,
    OpenMps { chi: usize, complex: bool },
    PeriodicMps { chi: usize, complex: bool },
    QuanticsTt { chi: usize, complex: bool },
    Circuit { depth: usize },
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub ansatz: AnsatzSpec,
    pub ns: usize,
    pub init_sigma: f64,
    pub seed: u64,
    pub trials: usize,
    pub optimizer: OptimizerConfig,
    pub jitter: f64,
    pub oracle: bool,
    pub output_dir: Option<PathBuf>,
    /// Raw file text, echoed into the summary.
    pub echo: String,
}

/// A built Hamiltonian, keeping the concrete type for the oracle paths.
pub enum BuiltHamiltonian {
    Pauli(PauliSum),
    Grid(GridOperator),
}

impl BuiltHamiltonian {
    pub fn as_operator(&self) -> &dyn Operator {
        match self {
            BuiltHamiltonian::Pauli(h) => h,
            BuiltHamiltonian::Grid(g) => g,
        }
    }

    pub fn oracle_kind(&self) -> OperatorKind<'_> {
        match self {
            BuiltHamiltonian::Pauli(h) => OperatorKind::Pauli(h),
            BuiltHamiltonian::Grid(g) => OperatorKind::Grid(g),
        }
    }

    pub fn dim(&self) -> usize {
        self.as_operator().dim()
    }

    pub fn pauli(&self) -> Option<&PauliSum> {
        match self {
            BuiltHamiltonian::Pauli(h) => Some(h),
            BuiltHamiltonian::Grid(_) => None,
        }
    }
}

struct Section {
    values: BTreeMap<String, (String, bool)>, // key -> (value, consumed)
    name: String,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<String> {
        self.values.get_mut(key).map(|(v, used)| {
            *used = true;
            v.clone()
        })
    }

    fn require(&mut self, key: &str) -> Result<String, RunError> {
        self.take(key).ok_or_else(|| {
            RunError::Config(format!("missing key `{key}` in section [{}]", self.name))
        })
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, RunError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.require(key)?;
        raw.parse().map_err(|e| {
            RunError::Config(format!(
                "key `{key}` in [{}]: cannot parse {raw:?}: {e}",
                self.name
            ))
        })
    }

    fn parse_or<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T, RunError>
    where
        T::Err: std::fmt::Display,
    {
        match self.take(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|e| {
                RunError::Config(format!(
                    "key `{key}` in [{}]: cannot parse {raw:?}: {e}",
                    self.name
                ))
            }),
        }
    }

    fn reject_unknown(&self) -> Result<(), RunError> {
        for (k, (_, used)) in &self.values {
            if !used {
                return Err(RunError::Config(format!(
                    "unknown key `{k}` in section [{}]",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

fn parse_sections(text: &str) -> Result<BTreeMap<String, Section>, RunError> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim().to_string();
            if sections.contains_key(&name) {
                return Err(RunError::Config(format!(
                    "line {}: duplicate section [{name}]",
                    lineno + 1
                )));
            }
            sections.insert(
                name.clone(),
                Section {
                    values: BTreeMap::new(),
                    name: name.clone(),
                },
            );
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(RunError::Config(format!(
                "line {}: expected `key = value`, got {line:?}",
                lineno + 1
            )));
        };
        let Some(section) = current.as_ref() else {
            return Err(RunError::Config(format!(
                "line {}: key outside any [section]",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let section = sections.get_mut(section).unwrap();
        if section
            .values
            .insert(key.clone(), (value.trim().to_string(), false))
            .is_some()
        {
            return Err(RunError::Config(format!(
                "line {}: duplicate key `{key}`",
                lineno + 1
            )));
        }
    }
    Ok(sections)
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self, RunError> {
        let mut sections = parse_sections(text)?;
        let mut run = sections
            .remove("run")
            .ok_or_else(|| RunError::Config("missing [run] section".to_string()))?;
        let mut system = sections
            .remove("system")
            .ok_or_else(|| RunError::Config("missing [system] section".to_string()))?;
        let mut ansatz = sections
            .remove("ansatz")
            .ok_or_else(|| RunError::Config("missing [ansatz] section".to_string()))?;
        let mut optimizer = sections.remove("optimizer");
        if let Some(name) = sections.keys().next() {
            return Err(RunError::Config(format!("unknown section [{name}]")));
        }

        let experiment_name = run.require("experiment")?;
        let experiment = match experiment_name.as_str() {
            "heisenberg" => Experiment::Heisenberg {
                n: system.parse("n")?,
                jx: system.parse_or("jx", 1.0)?,
                jy: system.parse_or("jy", 1.0)?,
                jz: system.parse_or("jz", 1.0)?,
                hz: system.parse_or("hz", 0.0)?,
                periodic: system.parse_or("periodic", true)?,
            },
            "morse" => Experiment::Morse {
                nd: system.parse("nd")?,
                x_min: system.parse_or("x_min", 0.0)?,
                x_max: system.parse_or("x_max", 10.0)?,
                de: system.parse_or("de", 42_301.0)?,
                am: system.parse_or("am", 2.1440)?,
                re: system.parse_or("re", 0.9575)?,
                mu: system.parse_or("mu", 0.9527)?,
            },
            "hubbard" => Experiment::Hubbard {
                lx: system.parse("lx")?,
                ly: system.parse("ly")?,
                t: system.parse_or("t", 1.0)?,
                u: system.parse_or("u", 4.0)?,
                ordering: match system
                    .parse_or("ordering", "spin_major".to_string())?
                    .as_str()
                {
                    "spin_major" => ModeOrdering::SpinMajor,
                    "site_major" => ModeOrdering::SiteMajor,
                    other => return Err(RunError::Config(format!("unknown ordering `{other}`"))),
                },
            },
            "custom" => Experiment::Custom {
                hamiltonian_file: PathBuf::from(system.require("hamiltonian_file")?),
            },
            other => {
                return Err(RunError::Config(format!("unknown experiment `{other}`")));
            }
        };

        let family_name = ansatz.require("family")?;
        let ansatz_spec = match family_name.as_str() {
            "dense_table" => AnsatzSpec::DenseTable,
            "open_mps" | "periodic_mps" | "quantics_tt" => {
                let chi = ansatz.parse("chi")?;
                let complex = ansatz.parse_or("complex", false)?;
                match family_name.as_str() {
                    "open_mps" => AnsatzSpec::OpenMps { chi, complex },
                    "periodic_mps" => AnsatzSpec::PeriodicMps { chi, complex },
                    _ => AnsatzSpec::QuanticsTt { chi, complex },
                }
            }
            "circuit" => AnsatzSpec::Circuit {
                depth: ansatz.parse("depth")?,
            },
            other => return Err(RunError::Config(format!("unknown family `{other}`"))),
        };

        let opt_cfg = match optimizer.as_mut() {
            None => OptimizerConfig::default(),
            Some(sec) => {
                let cfg = OptimizerConfig {
                    memory: sec.parse_or("memory", 10usize)?,
                    max_steps: sec.parse_or("max_steps", 1000usize)?,
                    wolfe_c1: sec.parse_or("wolfe_c1", 1e-4)?,
                    wolfe_c2: sec.parse_or("wolfe_c2", 0.9)?,
                    grad_tol: sec.parse_or("grad_tol", 1e-9)?,
                    max_linesearch: sec.parse_or("max_linesearch", 40usize)?,
                    aux_abort_above: Some(1e12),
                };
                cfg
            }
        };
        let jitter = match optimizer.as_mut() {
            None => 0.0,
            Some(sec) => sec.parse_or("jitter", 0.0)?,
        };

        let cfg = RunConfig {
            experiment,
            ansatz: ansatz_spec,
            ns: run.parse("ns")?,
            init_sigma: run.parse_or("init_sigma", 1.0)?,
            seed: run.parse_or("seed", 0u64)?,
            trials: run.parse_or("trials", 1usize)?,
            optimizer: OptimizerConfig {
                aux_abort_above: Some(1e12),
                ..opt_cfg
            },
            jitter,
            oracle: match run.parse_or("oracle", "auto".to_string())?.as_str() {
                "auto" => true,
                "off" => false,
                other => {
                    return Err(RunError::Config(format!(
                        "oracle must be auto|off, got `{other}`"
                    )))
                }
            },
            output_dir: run.take("output_dir").map(PathBuf::from),
            echo: text.to_string(),
        };

        run.reject_unknown()?;
        system.reject_unknown()?;
        ansatz.reject_unknown()?;
        if let Some(sec) = optimizer {
            sec.reject_unknown()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), RunError> {
        if self.ns == 0 || self.ns > 64 {
            return Err(RunError::Config(format!(
                "ns must be in 1..=64, got {}",
                self.ns
            )));
        }
        if self.trials == 0 {
            return Err(RunError::Config("trials must be >= 1".to_string()));
        }
        if !(self.init_sigma > 0.0) {
            return Err(RunError::Config("init_sigma must be > 0".to_string()));
        }
        self.optimizer.validate().map_err(RunError::Config)?;
        Ok(())
    }

    pub fn build_hamiltonian(&self) -> Result<BuiltHamiltonian, RunError> {
        let built = match &self.experiment {
            Experiment::Heisenberg {
                n,
                jx,
                jy,
                jz,
                hz,
                periodic,
            } => BuiltHamiltonian::Pauli(
                build_heisenberg(*n, *jx, *jy, *jz, *hz, *periodic)
                    .map_err(|e| RunError::Config(e.to_string()))?,
            ),
            Experiment::Morse {
                nd,
                x_min,
                x_max,
                de,
                am,
                re,
                mu,
            } => BuiltHamiltonian::Grid(
                build_morse_grid(*nd, *x_min, *x_max, *de, *am, *re, *mu)
                    .map_err(|e| RunError::Config(e.to_string()))?,
            ),
            Experiment::Hubbard {
                lx,
                ly,
                t,
                u,
                ordering,
            } => BuiltHamiltonian::Pauli(
                build_hubbard(*lx, *ly, *t, *u, *ordering)
                    .map_err(|e| RunError::Config(e.to_string()))?,
            ),
            Experiment::Custom { hamiltonian_file } => {
                let text = std::fs::read_to_string(hamiltonian_file).map_err(|e| {
                    RunError::Config(format!("cannot read {}: {e}", hamiltonian_file.display()))
                })?;
                BuiltHamiltonian::Pauli(
                    PauliSum::from_text(&text).map_err(|e| RunError::Config(e.to_string()))?,
                )
            }
        };
        Ok(built)
    }

    /// Family for the built Hamiltonian; checks dimensional compatibility.
    pub fn build_family(&self, h: &BuiltHamiltonian) -> Result<AnsatzFamily, RunError> {
        let dim = h.dim();
        let n_sites = dim.trailing_zeros() as usize;
        if 1usize << n_sites != dim {
            return Err(RunError::Config(format!(
                "hamiltonian dimension {dim} is not a power of two"
            )));
        }
        let family = match &self.ansatz {
            AnsatzSpec::DenseTable => AnsatzFamily::DenseTable { dim },
            AnsatzSpec::OpenMps { chi, complex } => AnsatzFamily::Mps {
                n_sites,
                bond_dim: *chi,
                boundary: Boundary::Open,
                complex: *complex,
            },
            AnsatzSpec::PeriodicMps { chi, complex } => AnsatzFamily::Mps {
                n_sites,
                bond_dim: *chi,
                boundary: Boundary::Periodic,
                complex: *complex,
            },
            AnsatzSpec::QuanticsTt { chi, complex } => AnsatzFamily::QuanticsTt {
                n_bits: n_sites,
                bond_dim: *chi,
                complex: *complex,
            },
            AnsatzSpec::Circuit { depth } => AnsatzFamily::Circuit(
                CircuitAnsatz::new(n_sites, *depth, vec![0; n_sites])
                    .map_err(|e| RunError::Config(e.to_string()))?,
            ),
        };
        Ok(family)
    }
}
