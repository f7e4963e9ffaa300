//! Subspace machinery over the variational states: overlap/Hamiltonian matrix
//! assembly, the trace loss, its exact differential as state-space cotangents,
//! the Ritz post-process, and the shared-circuit baseline loss.
//!
//! One evaluation applies the Hamiltonian once per state; the applied vectors
//! are cached in [`Assembly`] and shared between matrix assembly and the
//! cotangent build.

use crate::ansatz::{AnsatzError, AnsatzFamily, CircuitAnsatz, ParamVector};
use crate::hamiltonian::{DenseState, HamiltonianError, Operator};
use crate::linalg::{
    cholesky, cholesky_with_jitter, condition_number, gevp, trace_inv_product, HermitianMatrix,
    LinalgError, RitzSolution,
};
use crate::optim::{Evaluation, Objective};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SubspaceError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Ansatz(#[from] AnsatzError),
    #[error("empty state list")]
    Empty,
    #[error("state dims differ: {0} vs {1}")]
    MixedDims(usize, usize),
}

/// The ns x ns Hermitian pair over the current states.
#[derive(Debug, Clone)]
pub struct SubspaceMatrices {
    pub ns: usize,
    pub s: HermitianMatrix,
    pub h: HermitianMatrix,
    pub condition_s: f64,
}

/// Matrices plus the cached H|psi_j> vectors of the same evaluation.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub matrices: SubspaceMatrices,
    pub h_states: Vec<DenseState>,
}

/// Assemble S_ij = <psi_i|psi_j> and H_ij = <psi_i|H|psi_j>, keeping the
/// applied vectors. Upper triangles are computed and mirrored, so both
/// matrices are Hermitian by construction.
pub fn assemble_cached(states: &[DenseState], h: &dyn Operator) -> Result<Assembly, SubspaceError> {
    let ns = states.len();
    if ns == 0 {
        return Err(SubspaceError::Empty);
    }
    let dim = states[0].dim();
    for st in states {
        if st.dim() != dim {
            return Err(SubspaceError::MixedDims(dim, st.dim()));
        }
    }
    let h_states: Vec<DenseState> = states
        .iter()
        .map(|st| h.apply(st))
        .collect::<Result<_, _>>()?;
    let mut s = HermitianMatrix::zeros(ns);
    let mut hm = HermitianMatrix::zeros(ns);
    for i in 0..ns {
        for j in i..ns {
            let sij = states[i].inner(&states[j]);
            let hij = states[i].inner(&h_states[j]);
            s.set(i, j, sij);
            s.set(j, i, sij.conj());
            hm.set(i, j, hij);
            hm.set(j, i, hij.conj());
        }
    }
    s.hermitize();
    hm.hermitize();
    let condition_s = condition_number(&s);
    Ok(Assembly {
        matrices: SubspaceMatrices {
            ns,
            s,
            h: hm,
            condition_s,
        },
        h_states,
    })
}

/// Assemble without keeping the cache.
pub fn assemble(
    states: &[DenseState],
    h: &dyn Operator,
) -> Result<SubspaceMatrices, SubspaceError> {
    Ok(assemble_cached(states, h)?.matrices)
}

/// The training objective L = Tr(S^-1 H) = sum of the subspace Ritz values.
pub fn loss(m: &SubspaceMatrices) -> Result<f64, SubspaceError> {
    Ok(trace_inv_product(&m.s, &m.h)?)
}

/// Closed-form differential of the trace loss as state-space cotangents:
/// |chi_i> = sum_j (S^-1)_ji H|psi_j> - (S^-1 H S^-1)_ji |psi_j>, so that
/// dL = sum_i 2 Re <d psi_i | chi_i>. Everything goes through Cholesky solves
/// of S; the cached H|psi_j> vectors are reused.
pub fn state_cotangents_cached(
    assembly: &Assembly,
    states: &[DenseState],
) -> Result<Vec<DenseState>, SubspaceError> {
    let m = &assembly.matrices;
    let ns = m.ns;
    let factor = cholesky(&m.s)?;
    // columns of S^-1 (solve S X = I) and of B = S^-1 H (solve S X = H)
    let mut s_inv = vec![Complex64::ZERO; ns * ns];
    let mut b = vec![Complex64::ZERO; ns * ns];
    let mut col = vec![Complex64::ZERO; ns];
    for j in 0..ns {
        for i in 0..ns {
            col[i] = if i == j {
                Complex64::ONE
            } else {
                Complex64::ZERO
            };
        }
        factor.solve_in_place(&mut col);
        for i in 0..ns {
            s_inv[i * ns + j] = col[i];
        }
    }
    for j in 0..ns {
        for i in 0..ns {
            col[i] = m.h.get(i, j);
        }
        factor.solve_in_place(&mut col);
        for i in 0..ns {
            b[i * ns + j] = col[i];
        }
    }
    // D = B S^-1 = S^-1 H S^-1
    let mut d = vec![Complex64::ZERO; ns * ns];
    for i in 0..ns {
        for k in 0..ns {
            let bik = b[i * ns + k];
            if bik != Complex64::ZERO {
                for j in 0..ns {
                    d[i * ns + j] += bik * s_inv[k * ns + j];
                }
            }
        }
    }
    let dim = states[0].dim();
    let mut out = Vec::with_capacity(ns);
    for i in 0..ns {
        let mut chi = DenseState::zeros(dim);
        for j in 0..ns {
            chi.axpy(s_inv[j * ns + i], &assembly.h_states[j]);
            chi.axpy(-d[j * ns + i], &states[j]);
        }
        out.push(chi);
    }
    Ok(out)
}

/// Cotangents from scratch (applies the Hamiltonian itself).
pub fn state_cotangents(
    states: &[DenseState],
    h: &dyn Operator,
) -> Result<Vec<DenseState>, SubspaceError> {
    let assembly = assemble_cached(states, h)?;
    state_cotangents_cached(&assembly, states)
}

/// Orthonormal approximate eigenstates assembled from the Ritz coefficients.
#[derive(Debug, Clone)]
pub struct AssembledEigenstates {
    pub ritz: RitzSolution,
    pub states: Vec<DenseState>,
}

impl AssembledEigenstates {
    pub fn energies(&self) -> &[f64] {
        &self.ritz.energies
    }
}

/// Solve the generalized eigenvalue problem on the optimized matrices and
/// assemble |Psi_alpha> = sum_i c_{i alpha} |psi_i>.
pub fn ritz_postprocess(
    m: &SubspaceMatrices,
    states: &[DenseState],
) -> Result<AssembledEigenstates, SubspaceError> {
    let ritz = gevp(&m.h, &m.s)?;
    let dim = states[0].dim();
    let mut assembled = Vec::with_capacity(m.ns);
    for alpha in 0..m.ns {
        let mut psi = DenseState::zeros(dim);
        for (i, st) in states.iter().enumerate() {
            psi.axpy(ritz.coeff(i, alpha), st);
        }
        assembled.push(psi);
    }
    Ok(AssembledEigenstates {
        ritz,
        states: assembled,
    })
}

/// Baseline loss: uniform sum of energy expectations of one shared circuit
/// fed with distinct basis inputs (outputs orthonormal by unitarity).
pub fn subspace_vqe_loss(
    circuit: &CircuitAnsatz,
    phi: &ParamVector,
    inputs: &[Vec<u8>],
    h: &dyn Operator,
) -> Result<f64, SubspaceError> {
    Ok(subspace_vqe_loss_grad(circuit, phi, inputs, h)?.0)
}

/// Baseline loss with its gradient; the cotangent of output k is H V|s_k>,
/// pulled back through the shared parameters.
pub fn subspace_vqe_loss_grad(
    circuit: &CircuitAnsatz,
    phi: &ParamVector,
    inputs: &[Vec<u8>],
    h: &dyn Operator,
) -> Result<(f64, Vec<f64>), SubspaceError> {
    let mut total = 0.0;
    let mut grad = vec![0.0f64; circuit.param_count()];
    for bits in inputs {
        let out = circuit.state_from(&phi.values, bits)?;
        let h_out = h.apply(&out)?;
        let e = out.inner(&h_out);
        total += e.re;
        let g = circuit.vjp(&phi.values, bits, &h_out)?;
        for (acc, gi) in grad.iter_mut().zip(&g) {
            *acc += gi;
        }
    }
    Ok((total, grad))
}

/// Pooled trace-loss objective over ns independent parameter vectors of one
/// family. Evaluations are pure; states are built and differentiated in
/// parallel with per-state outputs, so the result is identical at any thread
/// count.
pub struct TraceLossObjective<'a> {
    pub family: &'a AnsatzFamily,
    pub h: &'a dyn Operator,
    pub ns: usize,
    /// Diagonal jitter scale: retried once on a failed factorization.
    pub jitter_eps: f64,
    /// Number of evaluations that needed the jitter retry.
    pub jitter_events: usize,
    /// Worker threads for per-state work.
    pub threads: usize,
}

impl<'a> TraceLossObjective<'a> {
    pub fn new(family: &'a AnsatzFamily, h: &'a dyn Operator, ns: usize) -> Self {
        Self {
            family,
            h,
            ns,
            jitter_eps: 0.0,
            jitter_events: 0,
            threads: 1,
        }
    }

    pub fn split<'x>(&self, x: &'x [f64]) -> Vec<&'x [f64]> {
        let per = self.family.param_count();
        assert_eq!(x.len(), per * self.ns, "pooled parameter length mismatch");
        x.chunks_exact(per).collect()
    }

    fn infeasible(&self, aux: Option<f64>) -> Evaluation {
        Evaluation {
            loss: f64::INFINITY,
            grad: Vec::new(),
            aux,
        }
    }

    /// Build all states and their H-images; parallel over states.
    fn build_states(
        &self,
        chunks: &[&[f64]],
    ) -> Result<(Vec<DenseState>, Vec<DenseState>), SubspaceError> {
        let ns = self.ns;
        let mut states: Vec<Option<DenseState>> = vec![None; ns];
        let mut h_states: Vec<Option<DenseState>> = vec![None; ns];
        let workers = self.threads.clamp(1, ns);
        let failed = std::sync::Mutex::new(None::<SubspaceError>);
        std::thread::scope(|scope| {
            let state_slots = states.chunks_mut(ns.div_ceil(workers));
            let h_slots = h_states.chunks_mut(ns.div_ceil(workers));
            for (w, (s_chunk, h_chunk)) in state_slots.zip(h_slots).enumerate() {
                let start = w * ns.div_ceil(workers);
                let failed = &failed;
                let chunks = &chunks;
                scope.spawn(move || {
                    for (off, (s_slot, h_slot)) in
                        s_chunk.iter_mut().zip(h_chunk.iter_mut()).enumerate()
                    {
                        let i = start + off;
                        let params = ParamVector::new(chunks[i].to_vec(), self.family.id(), i);
                        match self
                            .family
                            .state(&params)
                            .map_err(SubspaceError::from)
                            .and_then(|st| {
                                let hst = self.h.apply(&st)?;
                                Ok((st, hst))
                            }) {
                            Ok((st, hst)) => {
                                *s_slot = Some(st);
                                *h_slot = Some(hst);
                            }
                            Err(e) => {
                                *failed.lock().unwrap() = Some(e);
                                return;
                            }
                        }
                    }
                });
            }
        });
        if let Some(e) = failed.into_inner().unwrap() {
            return Err(e);
        }
        Ok((
            states.into_iter().map(Option::unwrap).collect(),
            h_states.into_iter().map(Option::unwrap).collect(),
        ))
    }
}

impl Objective for TraceLossObjective<'_> {
    fn eval(&mut self, x: &[f64]) -> Evaluation {
        let chunks = self.split(x);
        let Ok((states, h_states)) = self.build_states(&chunks) else {
            return self.infeasible(None);
        };
        let ns = self.ns;
        let mut s = HermitianMatrix::zeros(ns);
        let mut hm = HermitianMatrix::zeros(ns);
        for i in 0..ns {
            for j in i..ns {
                let sij = states[i].inner(&states[j]);
                let hij = states[i].inner(&h_states[j]);
                s.set(i, j, sij);
                s.set(j, i, sij.conj());
                hm.set(i, j, hij);
                hm.set(j, i, hij.conj());
            }
        }
        s.hermitize();
        hm.hermitize();
        let cond = condition_number(&s);

        let Ok((factor, jittered)) = cholesky_with_jitter(&s, self.jitter_eps) else {
            return self.infeasible(Some(cond));
        };
        if jittered {
            self.jitter_events += 1;
        }

        // B = S^-1 H (columns), loss = tr(B); S^-1 for the cotangent weights
        let mut b = vec![Complex64::ZERO; ns * ns];
        let mut s_inv = vec![Complex64::ZERO; ns * ns];
        let mut col = vec![Complex64::ZERO; ns];
        let mut trace = Complex64::ZERO;
        for j in 0..ns {
            for i in 0..ns {
                col[i] = hm.get(i, j);
            }
            factor.solve_in_place(&mut col);
            for i in 0..ns {
                b[i * ns + j] = col[i];
            }
            trace += col[j];
        }
        for j in 0..ns {
            for i in 0..ns {
                col[i] = if i == j {
                    Complex64::ONE
                } else {
                    Complex64::ZERO
                };
            }
            factor.solve_in_place(&mut col);
            for i in 0..ns {
                s_inv[i * ns + j] = col[i];
            }
        }
        let mut d = vec![Complex64::ZERO; ns * ns];
        for i in 0..ns {
            for k in 0..ns {
                let bik = b[i * ns + k];
                if bik != Complex64::ZERO {
                    for j in 0..ns {
                        d[i * ns + j] += bik * s_inv[k * ns + j];
                    }
                }
            }
        }

        let dim = states[0].dim();
        let family = self.family;
        let per = family.param_count();
        let mut grad = vec![0.0f64; per * ns];
        let workers = self.threads.clamp(1, ns);
        let failed = std::sync::Mutex::new(false);
        std::thread::scope(|scope| {
            for (w, g_chunk) in grad.chunks_mut(per * ns.div_ceil(workers)).enumerate() {
                let start = w * ns.div_ceil(workers);
                let states = &states;
                let h_states = &h_states;
                let s_inv = &s_inv;
                let d = &d;
                let chunks = &chunks;
                let failed = &failed;
                scope.spawn(move || {
                    for (off, g) in g_chunk.chunks_mut(per).enumerate() {
                        let i = start + off;
                        let mut chi = DenseState::zeros(dim);
                        for j in 0..ns {
                            chi.axpy(s_inv[j * ns + i], &h_states[j]);
                            chi.axpy(-d[j * ns + i], &states[j]);
                        }
                        let params = ParamVector::new(chunks[i].to_vec(), family.id(), i);
                        match family.vjp(&params, &chi) {
                            Ok(gi) => g.copy_from_slice(&gi),
                            Err(_) => *failed.lock().unwrap() = true,
                        }
                    }
                });
            }
        });
        if *failed.lock().unwrap() {
            return self.infeasible(Some(cond));
        }

        Evaluation {
            loss: trace.re,
            grad,
            aux: Some(cond),
        }
    }
}
