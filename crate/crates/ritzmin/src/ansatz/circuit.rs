//! Hardware-efficient layered circuit ansatz on a statevector simulator.
//!
//! Each of the `depth` blocks applies, qubit by qubit, the rotations
//! R_y, R_z, R_x (convention R_a(t) = exp(-i t/2 a)), followed by the
//! two-qubit entanglers exp(+i t Z_j Z_{j+1}), exp(+i t X_j X_{j+1}),
//! exp(+i t Y_j Y_{j+1}) on each adjacent pair. Parameters are consumed in
//! application order. Gradients come from an adjoint sweep: two extra gate
//! applications per gate, no parameter-shift sampling.

use super::AnsatzError;
use crate::hamiltonian::DenseState;
use num_complex::Complex64;

/// Circuit shape plus the basis input it prepares from.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitAnsatz {
    pub n_qubits: usize,
    pub depth: usize,
    /// Input computational basis state, one 0/1 per qubit.
    pub input: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum GateKind {
    Ry,
    Rz,
    Rx,
    Zz,
    Xx,
    Yy,
}

#[derive(Debug, Clone, Copy)]
struct Gate {
    kind: GateKind,
    qubit: usize,
    param: usize,
}

impl CircuitAnsatz {
    pub fn new(n_qubits: usize, depth: usize, input: Vec<u8>) -> Result<Self, AnsatzError> {
        if input.len() != n_qubits || input.iter().any(|b| *b > 1) {
            return Err(AnsatzError::InvalidBasisString(format!(
                "input must be {n_qubits} binary digits"
            )));
        }
        if n_qubits == 0 || n_qubits > 24 {
            return Err(AnsatzError::ShapeMismatch(format!(
                "n_qubits {n_qubits} outside supported range"
            )));
        }
        Ok(Self {
            n_qubits,
            depth,
            input,
        })
    }

    pub fn param_count(&self) -> usize {
        self.depth * (3 * self.n_qubits + 3 * (self.n_qubits - 1))
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    fn schedule(&self) -> Vec<Gate> {
        let n = self.n_qubits;
        let mut gates = Vec::with_capacity(self.param_count());
        let mut p = 0;
        for _ in 0..self.depth {
            for q in 0..n {
                for kind in [GateKind::Ry, GateKind::Rz, GateKind::Rx] {
                    gates.push(Gate {
                        kind,
                        qubit: q,
                        param: p,
                    });
                    p += 1;
                }
            }
            for q in 0..n - 1 {
                for kind in [GateKind::Zz, GateKind::Xx, GateKind::Yy] {
                    gates.push(Gate {
                        kind,
                        qubit: q,
                        param: p,
                    });
                    p += 1;
                }
            }
        }
        gates
    }

    fn basis_index(&self, bits: &[u8]) -> usize {
        bits.iter().fold(0usize, |acc, b| (acc << 1) | *b as usize)
    }

    /// Run the circuit on its configured input.
    pub fn state(&self, params: &[f64]) -> Result<DenseState, AnsatzError> {
        self.state_from(params, &self.input)
    }

    /// Run the circuit on an arbitrary basis input.
    pub fn state_from(&self, params: &[f64], input: &[u8]) -> Result<DenseState, AnsatzError> {
        if input.len() != self.n_qubits || input.iter().any(|b| *b > 1) {
            return Err(AnsatzError::InvalidBasisString(format!(
                "input must be {} binary digits",
                self.n_qubits
            )));
        }
        if params.len() != self.param_count() {
            return Err(AnsatzError::ShapeMismatch(format!(
                "expected {} circuit parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        let mut amps = vec![Complex64::ZERO; self.dim()];
        amps[self.basis_index(input)] = Complex64::ONE;
        for gate in self.schedule() {
            apply_gate(&mut amps, self.n_qubits, gate, params[gate.param]);
        }
        DenseState::from_amplitudes(amps).map_err(|e| AnsatzError::ShapeMismatch(e.to_string()))
    }

    /// Gradient of 2 Re(<cotangent|psi(params)>) via the adjoint sweep.
    pub fn vjp(
        &self,
        params: &[f64],
        input: &[u8],
        cotangent: &DenseState,
    ) -> Result<Vec<f64>, AnsatzError> {
        if cotangent.dim() != self.dim() {
            return Err(AnsatzError::ShapeMismatch(format!(
                "cotangent dim {} vs state dim {}",
                cotangent.dim(),
                self.dim()
            )));
        }
        let psi = self.state_from(params, input)?;
        let mut psi = psi.amplitudes().to_vec();
        let mut lambda = cotangent.amplitudes().to_vec();
        let mut grad = vec![0.0f64; self.param_count()];
        for gate in self.schedule().into_iter().rev() {
            // derivative factor acting on the post-gate state
            let inner = derivative_inner(&lambda, &psi, self.n_qubits, gate);
            grad[gate.param] = match gate.kind {
                // d/dt exp(-i t/2 P) psi = -(i/2) P psi: 2 Re(-(i/2) <l|P psi>) = Im(<l|P psi>)
                GateKind::Ry | GateKind::Rz | GateKind::Rx => inner.im,
                // d/dt exp(+i t PP) psi = +i PP psi: 2 Re(i <l|PP psi>) = -2 Im(<l|PP psi>)
                GateKind::Zz | GateKind::Xx | GateKind::Yy => -2.0 * inner.im,
            };
            // walk both vectors back through the inverse gate
            apply_gate(&mut psi, self.n_qubits, gate, -params[gate.param]);
            apply_gate(&mut lambda, self.n_qubits, gate, -params[gate.param]);
        }
        Ok(grad)
    }
}

/// Outputs of one shared circuit applied to several basis inputs; unitarity
/// keeps them exactly orthonormal.
pub fn shared_circuit_states(
    circuit: &CircuitAnsatz,
    phi: &[f64],
    inputs: &[Vec<u8>],
) -> Result<Vec<DenseState>, AnsatzError> {
    inputs
        .iter()
        .map(|bits| circuit.state_from(phi, bits))
        .collect()
}

fn apply_gate(amps: &mut [Complex64], n: usize, gate: Gate, theta: f64) {
    let dim = amps.len();
    let half = theta / 2.0;
    match gate.kind {
        GateKind::Ry => {
            let (s, c) = half.sin_cos();
            let mask = 1usize << (n - 1 - gate.qubit);
            for idx in 0..dim {
                if idx & mask == 0 {
                    let a = amps[idx];
                    let b = amps[idx | mask];
                    amps[idx] = c * a - s * b;
                    amps[idx | mask] = s * a + c * b;
                }
            }
        }
        GateKind::Rx => {
            let (s, c) = half.sin_cos();
            let is = Complex64::new(0.0, -s);
            let mask = 1usize << (n - 1 - gate.qubit);
            for idx in 0..dim {
                if idx & mask == 0 {
                    let a = amps[idx];
                    let b = amps[idx | mask];
                    amps[idx] = c * a + is * b;
                    amps[idx | mask] = is * a + c * b;
                }
            }
        }
        GateKind::Rz => {
            let phase0 = Complex64::new(half.cos(), -half.sin());
            let phase1 = phase0.conj();
            let mask = 1usize << (n - 1 - gate.qubit);
            for (idx, amp) in amps.iter_mut().enumerate() {
                *amp *= if idx & mask == 0 { phase0 } else { phase1 };
            }
        }
        GateKind::Zz => {
            // exp(i t ZZ): phase e^{it} when the two bits agree, e^{-it} otherwise
            let plus = Complex64::new(theta.cos(), theta.sin());
            let minus = plus.conj();
            let m0 = 1usize << (n - 1 - gate.qubit);
            let m1 = 1usize << (n - 2 - gate.qubit);
            for (idx, amp) in amps.iter_mut().enumerate() {
                let agree = ((idx & m0 != 0) as u8) == ((idx & m1 != 0) as u8);
                *amp *= if agree { plus } else { minus };
            }
        }
        GateKind::Xx => {
            // exp(i t XX) = cos t + i sin t XX
            let (s, c) = theta.sin_cos();
            let is = Complex64::new(0.0, s);
            let m0 = 1usize << (n - 1 - gate.qubit);
            let m1 = 1usize << (n - 2 - gate.qubit);
            let mask = m0 | m1;
            for idx in 0..dim {
                let flipped = idx ^ mask;
                if idx < flipped {
                    let a = amps[idx];
                    let b = amps[flipped];
                    amps[idx] = c * a + is * b;
                    amps[flipped] = is * a + c * b;
                }
            }
        }
        GateKind::Yy => {
            // exp(i t YY) = cos t + i sin t YY; YY flips both bits with sign
            // -1 when they agree, +1 when they differ
            let (s, c) = theta.sin_cos();
            let is = Complex64::new(0.0, s);
            let m0 = 1usize << (n - 1 - gate.qubit);
            let m1 = 1usize << (n - 2 - gate.qubit);
            let mask = m0 | m1;
            for idx in 0..dim {
                let flipped = idx ^ mask;
                if idx < flipped {
                    let agree = ((idx & m0 != 0) as u8) == ((idx & m1 != 0) as u8);
                    let sign = if agree { -1.0 } else { 1.0 };
                    let a = amps[idx];
                    let b = amps[flipped];
                    amps[idx] = c * a + sign * is * b;
                    amps[flipped] = sign * is * a + c * b;
                }
            }
        }
    }
}

/// <lambda | P psi> for the generator P of the given gate.
fn derivative_inner(lambda: &[Complex64], psi: &[Complex64], n: usize, gate: Gate) -> Complex64 {
    let dim = psi.len();
    let mut acc = Complex64::ZERO;
    match gate.kind {
        GateKind::Rz => {
            let mask = 1usize << (n - 1 - gate.qubit);
            for idx in 0..dim {
                let sign = if idx & mask == 0 { 1.0 } else { -1.0 };
                acc += lambda[idx].conj() * psi[idx] * sign;
            }
        }
        GateKind::Rx => {
            let mask = 1usize << (n - 1 - gate.qubit);
            for idx in 0..dim {
                acc += lambda[idx].conj() * psi[idx ^ mask];
            }
        }
        GateKind::Ry => {
            let mask = 1usize << (n - 1 - gate.qubit);
            for idx in 0..dim {
                // Y |b> = i (-1)^b |1-b>; here b is the bit of the source index
                let src = idx ^ mask;
                let factor = if src & mask == 0 {
                    Complex64::I
                } else {
                    -Complex64::I
                };
                acc += lambda[idx].conj() * factor * psi[src];
            }
        }
        GateKind::Zz => {
            let m0 = 1usize << (n - 1 - gate.qubit);
            let m1 = 1usize << (n - 2 - gate.qubit);
            for idx in 0..dim {
                let agree = ((idx & m0 != 0) as u8) == ((idx & m1 != 0) as u8);
                let sign = if agree { 1.0 } else { -1.0 };
                acc += lambda[idx].conj() * psi[idx] * sign;
            }
        }
        GateKind::Xx => {
            let mask = (1usize << (n - 1 - gate.qubit)) | (1usize << (n - 2 - gate.qubit));
            for idx in 0..dim {
                acc += lambda[idx].conj() * psi[idx ^ mask];
            }
        }
        GateKind::Yy => {
            let m0 = 1usize << (n - 1 - gate.qubit);
            let m1 = 1usize << (n - 2 - gate.qubit);
            let mask = m0 | m1;
            for idx in 0..dim {
                let src = idx ^ mask;
                let agree = ((src & m0 != 0) as u8) == ((src & m1 != 0) as u8);
                let sign = if agree { -1.0 } else { 1.0 };
                acc += lambda[idx].conj() * psi[src] * sign;
            }
        }
    }
    acc
}
