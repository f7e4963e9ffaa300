//! Fermionic operators and their qubit image under the Jordan-Wigner
//! transformation: c_j -> (prod_{k<j} Z_k)(X_j + i Y_j)/2, with mode index j
//! mapping to qubit j.

use super::pauli::{Pauli, PauliString, PauliSum};
use super::HamiltonianError;
use num_complex::Complex64;

/// A single creation or annihilation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LadderOp {
    pub mode: usize,
    pub dagger: bool,
}

impl LadderOp {
    pub fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self {
            mode,
            dagger: false,
        }
    }
}

/// Weighted sum of normal-ordered-or-not ladder monomials over `n_modes`.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionOp {
    n_modes: usize,
    terms: Vec<(Complex64, Vec<LadderOp>)>,
}

impl FermionOp {
    pub fn new(n_modes: usize) -> Self {
        Self {
            n_modes,
            terms: Vec::new(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn terms(&self) -> &[(Complex64, Vec<LadderOp>)] {
        &self.terms
    }

    pub fn add_term(
        &mut self,
        coeff: Complex64,
        ops: Vec<LadderOp>,
    ) -> Result<(), HamiltonianError> {
        for op in &ops {
            if op.mode >= self.n_modes {
                return Err(HamiltonianError::ModeOutOfRange {
                    mode: op.mode,
                    n_modes: self.n_modes,
                });
            }
        }
        self.terms.push((coeff, ops));
        Ok(())
    }
}

/// Elementwise product of two same-length Pauli words with phase tracking.
fn word_mul(left: &[Pauli], right: &[Pauli]) -> (Vec<Pauli>, Complex64) {
    let mut phase = Complex64::ONE;
    let word = left
        .iter()
        .zip(right)
        .map(|(&a, &b)| {
            let (p, ph) = Pauli::mul(a, b);
            phase *= ph;
            p
        })
        .collect();
    (word, phase)
}

/// Map a fermionic operator to its Pauli-sum image, canonicalized.
pub fn jordan_wigner(op: &FermionOp) -> Result<PauliSum, HamiltonianError> {
    let n = op.n_modes;
    if n == 0 {
        return Err(HamiltonianError::InvalidSize("zero modes".to_string()));
    }
    let mut out: Vec<PauliString> = Vec::new();
    for (coeff, ladder) in &op.terms {
        // expand the product of (X +- iY)/2 factors with Z tails
        let mut acc: Vec<(Vec<Pauli>, Complex64)> = vec![(vec![Pauli::I; n], *coeff)];
        for l in ladder {
            let mut x_word = vec![Pauli::I; n];
            let mut y_word = vec![Pauli::I; n];
            for k in 0..l.mode {
                x_word[k] = Pauli::Z;
                y_word[k] = Pauli::Z;
            }
            x_word[l.mode] = Pauli::X;
            y_word[l.mode] = Pauli::Y;
            let y_coeff = if l.dagger {
                Complex64::new(0.0, -0.5)
            } else {
                Complex64::new(0.0, 0.5)
            };
            let x_coeff = Complex64::new(0.5, 0.0);

            let mut next = Vec::with_capacity(acc.len() * 2);
            for (word, c) in &acc {
                let (w, ph) = word_mul(word, &x_word);
                next.push((w, c * x_coeff * ph));
                let (w, ph) = word_mul(word, &y_word);
                next.push((w, c * y_coeff * ph));
            }
            acc = next;
        }
        out.extend(acc.into_iter().map(|(word, c)| PauliString::new(c, word)));
    }
    PauliSum::from_terms(n, out)
}

/// Mode layout for mapped two-species lattices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeOrdering {
    /// All spin-up modes 0..L-1, then all spin-down modes L..2L-1.
    SpinMajor,
    /// Modes (2*site, 2*site+1) hold the up/down pair of each site.
    SiteMajor,
}

/// Fermi-Hubbard model on an open lx x ly lattice, in qubit form:
/// -t sum over bonds and spins of (c^dag_i c_j + h.c.)
/// + u sum over sites of (n_up - 1/2)(n_dn - 1/2),
/// Jordan-Wigner mapped under the chosen mode ordering (2*lx*ly qubits).
pub fn build_hubbard(
    lx: usize,
    ly: usize,
    t: f64,
    u: f64,
    ordering: ModeOrdering,
) -> Result<PauliSum, HamiltonianError> {
    if lx * ly == 0 {
        return Err(HamiltonianError::InvalidSize(format!(
            "empty lattice {lx}x{ly}"
        )));
    }
    let n_sites = lx * ly;
    let n_modes = 2 * n_sites;
    let mode = |site: usize, spin: usize| match ordering {
        ModeOrdering::SpinMajor => site + spin * n_sites,
        ModeOrdering::SiteMajor => 2 * site + spin,
    };
    let site = |x: usize, y: usize| y * lx + x;

    let mut bonds = Vec::new();
    for y in 0..ly {
        for x in 0..lx {
            if x + 1 < lx {
                bonds.push((site(x, y), site(x + 1, y)));
            }
            if y + 1 < ly {
                bonds.push((site(x, y), site(x, y + 1)));
            }
        }
    }

    let mut op = FermionOp::new(n_modes);
    for &(i, j) in &bonds {
        for spin in 0..2 {
            let (a, b) = (mode(i, spin), mode(j, spin));
            op.add_term(
                Complex64::new(-t, 0.0),
                vec![LadderOp::create(a), LadderOp::annihilate(b)],
            )?;
            op.add_term(
                Complex64::new(-t, 0.0),
                vec![LadderOp::create(b), LadderOp::annihilate(a)],
            )?;
        }
    }
    // u (n_up - 1/2)(n_dn - 1/2), expanded in ladder monomials
    for s in 0..n_sites {
        let (up, dn) = (mode(s, 0), mode(s, 1));
        let num = |m: usize| vec![LadderOp::create(m), LadderOp::annihilate(m)];
        op.add_term(Complex64::new(u, 0.0), [num(up), num(dn)].concat())?;
        op.add_term(Complex64::new(-0.5 * u, 0.0), num(up))?;
        op.add_term(Complex64::new(-0.5 * u, 0.0), num(dn))?;
        op.add_term(Complex64::new(0.25 * u, 0.0), vec![])?;
    }
    jordan_wigner(&op)
}
