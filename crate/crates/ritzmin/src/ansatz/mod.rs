//! Parameterized state families behind one uniform contract: build a dense
//! state from real parameters, and pull a state-space cotangent back to
//! parameter space (vector-Jacobian product, `g[k] = 2 Re <c | d psi / d t_k>`).
//!
//! Families: direct dense table, open/periodic MPS, quantics tensor train
//! (an open MPS over the bits of a grid coordinate, with rank-capped bonds),
//! and the hardware-efficient circuit. Finite differences never enter the
//! training path; they exist only as a test oracle.

pub mod circuit;
pub mod dense_table;
pub mod mps;

pub use circuit::{shared_circuit_states, CircuitAnsatz};
pub use mps::{bond_profile, mps_pair_overlap, Boundary, MpsTensors};

use crate::hamiltonian::DenseState;
use crate::rng::{subseed, NormalSampler};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnsatzError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid basis string: {0}")]
    InvalidBasisString(String),
}

/// Real parameter vector of one variational state.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub values: Vec<f64>,
    pub family_id: String,
    pub state_index: usize,
}

impl ParamVector {
    pub fn new(values: Vec<f64>, family_id: String, state_index: usize) -> Self {
        Self {
            values,
            family_id,
            state_index,
        }
    }
}

/// One parameterized family of states.
#[derive(Debug, Clone, PartialEq)]
pub enum AnsatzFamily {
    /// Amplitudes parameterized directly (re/im pairs).
    DenseTable { dim: usize },
    /// Matrix product state on `n_sites` spins.
    Mps {
        n_sites: usize,
        bond_dim: usize,
        boundary: Boundary,
        complex: bool,
    },
    /// Quantics tensor train over the bits of a 2^n_bits grid.
    QuanticsTt {
        n_bits: usize,
        bond_dim: usize,
        complex: bool,
    },
    /// Hardware-efficient circuit acting on its configured basis input.
    Circuit(CircuitAnsatz),
}

impl AnsatzFamily {
    pub fn id(&self) -> String {
        match self {
            AnsatzFamily::DenseTable { dim } => format!("dense_table(dim={dim})"),
            AnsatzFamily::Mps {
                n_sites,
                bond_dim,
                boundary,
                complex,
            } => format!(
                "{}_mps(n={n_sites},chi={bond_dim},{})",
                match boundary {
                    Boundary::Open => "open",
                    Boundary::Periodic => "periodic",
                },
                if *complex { "complex" } else { "real" }
            ),
            AnsatzFamily::QuanticsTt {
                n_bits,
                bond_dim,
                complex,
            } => format!(
                "quantics_tt(nd={n_bits},chi={bond_dim},{})",
                if *complex { "complex" } else { "real" }
            ),
            AnsatzFamily::Circuit(c) => {
                let input: String = c.input.iter().map(|b| (b + b'0') as char).collect();
                format!("circuit(n={},depth={},input={input})", c.n_qubits, c.depth)
            }
        }
    }

    pub fn state_dim(&self) -> usize {
        match self {
            AnsatzFamily::DenseTable { dim } => *dim,
            AnsatzFamily::Mps { n_sites, .. } => 1usize << n_sites,
            AnsatzFamily::QuanticsTt { n_bits, .. } => 1usize << n_bits,
            AnsatzFamily::Circuit(c) => c.dim(),
        }
    }

    fn mps_layout(&self) -> Option<(Vec<usize>, Boundary, bool)> {
        match self {
            AnsatzFamily::Mps {
                n_sites,
                bond_dim,
                boundary,
                complex,
            } => Some((
                bond_profile(*n_sites, *bond_dim, *boundary, false),
                *boundary,
                *complex,
            )),
            AnsatzFamily::QuanticsTt {
                n_bits,
                bond_dim,
                complex,
            } => Some((
                bond_profile(*n_bits, *bond_dim, Boundary::Open, true),
                Boundary::Open,
                *complex,
            )),
            _ => None,
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            AnsatzFamily::DenseTable { dim } => dense_table::param_count(*dim),
            AnsatzFamily::Circuit(c) => c.param_count(),
            _ => {
                let (bonds, _, complex) = self.mps_layout().unwrap();
                if complex {
                    mps::param_count::<Complex64>(&bonds)
                } else {
                    mps::param_count::<f64>(&bonds)
                }
            }
        }
    }

    fn check(&self, params: &ParamVector) -> Result<(), AnsatzError> {
        if params.values.len() != self.param_count() {
            return Err(AnsatzError::ShapeMismatch(format!(
                "family {} expects {} parameters, got {}",
                self.id(),
                self.param_count(),
                params.values.len()
            )));
        }
        if !params.values.iter().all(|v| v.is_finite()) {
            return Err(AnsatzError::ShapeMismatch(
                "non-finite parameter".to_string(),
            ));
        }
        Ok(())
    }

    /// Dense state for the given parameters.
    pub fn state(&self, params: &ParamVector) -> Result<DenseState, AnsatzError> {
        self.check(params)?;
        match self {
            AnsatzFamily::DenseTable { dim } => dense_table::state(*dim, &params.values),
            AnsatzFamily::Circuit(c) => c.state(&params.values),
            _ => {
                let (bonds, boundary, complex) = self.mps_layout().unwrap();
                let amps = if complex {
                    MpsTensors::<Complex64>::from_params(&bonds, boundary, &params.values)?
                        .contract()
                } else {
                    MpsTensors::<f64>::from_params(&bonds, boundary, &params.values)?.contract()
                };
                DenseState::from_amplitudes(amps)
                    .map_err(|e| AnsatzError::ShapeMismatch(e.to_string()))
            }
        }
    }

    /// Pull a state-space cotangent back to parameter space:
    /// `g[k] = 2 Re <cotangent | d state / d params[k]>`.
    pub fn vjp(
        &self,
        params: &ParamVector,
        cotangent: &DenseState,
    ) -> Result<Vec<f64>, AnsatzError> {
        self.check(params)?;
        if cotangent.dim() != self.state_dim() {
            return Err(AnsatzError::ShapeMismatch(format!(
                "cotangent dim {} vs state dim {}",
                cotangent.dim(),
                self.state_dim()
            )));
        }
        match self {
            AnsatzFamily::DenseTable { dim } => dense_table::vjp(*dim, cotangent),
            AnsatzFamily::Circuit(c) => c.vjp(&params.values, &c.input, cotangent),
            _ => {
                let (bonds, boundary, complex) = self.mps_layout().unwrap();
                if complex {
                    MpsTensors::<Complex64>::from_params(&bonds, boundary, &params.values)?
                        .vjp(cotangent)
                } else {
                    MpsTensors::<f64>::from_params(&bonds, boundary, &params.values)?.vjp(cotangent)
                }
            }
        }
    }

    /// Gaussian initialization; state `state_index` draws from the stream
    /// derived from `(rng_seed, state_index)`, so states are independent and
    /// any one of them is reproducible in isolation.
    pub fn init_params(&self, sigma: f64, rng_seed: u64, state_index: usize) -> ParamVector {
        let mut sampler = NormalSampler::new(subseed(rng_seed, state_index as u64));
        let values = (0..self.param_count())
            .map(|_| sampler.next(sigma))
            .collect();
        ParamVector::new(values, self.id(), state_index)
    }
}
