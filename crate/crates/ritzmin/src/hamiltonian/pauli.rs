//! Pauli-string Hamiltonians.
//!
//! Convention used throughout: site index 0 is the most significant bit of
//! the amplitude index, so |s_0 s_1 ... s_{N-1}> maps to index
//! s_0 * 2^{N-1} + ... + s_{N-1}.

use super::{DenseState, HamiltonianError, Operator};
use num_complex::Complex64;
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Single-qubit product a * b = phase * out.
    pub fn mul(a: Pauli, b: Pauli) -> (Pauli, Complex64) {
        use Pauli::*;
        let one = Complex64::ONE;
        let i = Complex64::I;
        match (a, b) {
            (I, p) | (p, I) => (p, one),
            (X, X) | (Y, Y) | (Z, Z) => (I, one),
            (X, Y) => (Z, i),
            (Y, X) => (Z, -i),
            (Y, Z) => (X, i),
            (Z, Y) => (X, -i),
            (Z, X) => (Y, i),
            (X, Z) => (Y, -i),
        }
    }
}

/// One weighted Pauli word.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    pub coeff: Complex64,
    pub ops: Vec<Pauli>,
}

impl PauliString {
    pub fn new(coeff: Complex64, ops: Vec<Pauli>) -> Self {
        Self { coeff, ops }
    }

    /// Identity word on `n` sites with the given coefficient.
    pub fn identity(coeff: Complex64, n: usize) -> Self {
        Self::new(coeff, vec![Pauli::I; n])
    }

    /// Single-site word: `op` at `site`, identity elsewhere.
    pub fn single(coeff: Complex64, n: usize, site: usize, op: Pauli) -> Self {
        let mut ops = vec![Pauli::I; n];
        ops[site] = op;
        Self::new(coeff, ops)
    }

    /// Two-site word.
    pub fn pair(coeff: Complex64, n: usize, a: (usize, Pauli), b: (usize, Pauli)) -> Self {
        let mut ops = vec![Pauli::I; n];
        ops[a.0] = a.1;
        ops[b.0] = b.1;
        Self::new(coeff, ops)
    }
}

/// Sum of Pauli strings on a fixed number of sites.
///
/// The term list is canonical: duplicate words are merged in first-seen order
/// and exactly-zero coefficients dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_sites: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn from_terms(n_sites: usize, terms: Vec<PauliString>) -> Result<Self, HamiltonianError> {
        if n_sites == 0 || n_sites > 32 {
            return Err(HamiltonianError::InvalidSize(format!(
                "n_sites {n_sites} outside supported range 1..=32"
            )));
        }
        let mut index: HashMap<Vec<Pauli>, usize> = HashMap::new();
        let mut merged: Vec<PauliString> = Vec::new();
        for term in terms {
            if term.ops.len() != n_sites {
                return Err(HamiltonianError::InvalidSize(format!(
                    "term has {} ops, expected {n_sites}",
                    term.ops.len()
                )));
            }
            match index.get(&term.ops) {
                Some(&k) => merged[k].coeff += term.coeff,
                None => {
                    index.insert(term.ops.clone(), merged.len());
                    merged.push(term);
                }
            }
        }
        merged.retain(|t| t.coeff.norm_sqr() > 0.0);
        Ok(Self {
            n_sites,
            terms: merged,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    /// Plain-text serialization: one `coeff_re coeff_im word` line per term.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            let word: String = t.ops.iter().map(|p| p.as_char()).collect();
            out.push_str(&format!("{} {} {}\n", t.coeff.re, t.coeff.im, word));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, HamiltonianError> {
        let mut terms = Vec::new();
        let mut n_sites = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(HamiltonianError::Parse(format!(
                    "line {}: expected `re im word`, got {line:?}",
                    lineno + 1
                )));
            }
            let re: f64 = fields[0]
                .parse()
                .map_err(|e| HamiltonianError::Parse(format!("line {}: {e}", lineno + 1)))?;
            let im: f64 = fields[1]
                .parse()
                .map_err(|e| HamiltonianError::Parse(format!("line {}: {e}", lineno + 1)))?;
            let ops: Option<Vec<Pauli>> = fields[2].chars().map(Pauli::from_char).collect();
            let ops = ops.ok_or_else(|| {
                HamiltonianError::Parse(format!("line {}: bad pauli word", lineno + 1))
            })?;
            match n_sites {
                None => n_sites = Some(ops.len()),
                Some(n) if n != ops.len() => {
                    return Err(HamiltonianError::Parse(format!(
                        "line {}: word length {} != {n}",
                        lineno + 1,
                        ops.len()
                    )))
                }
                _ => {}
            }
            terms.push(PauliString::new(Complex64::new(re, im), ops));
        }
        let n = n_sites.ok_or_else(|| HamiltonianError::Parse("no terms".to_string()))?;
        Self::from_terms(n, terms)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Per-term action data for basis states: P|b> = base * (-1)^{popcount(b & phase_mask)} |b ^ flip_mask>.
struct TermAction {
    flip_mask: usize,
    phase_mask: usize,
    base: Complex64,
}

impl TermAction {
    fn new(term: &PauliString, n: usize) -> Self {
        let mut flip = 0usize;
        let mut phase = 0usize;
        let mut n_y = 0u32;
        for (site, op) in term.ops.iter().enumerate() {
            let bit = 1usize << (n - 1 - site);
            match op {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    phase |= bit;
                    n_y += 1;
                }
                Pauli::Z => phase |= bit,
            }
        }
        let i_pow = match n_y % 4 {
            0 => Complex64::ONE,
            1 => Complex64::I,
            2 => -Complex64::ONE,
            _ => -Complex64::I,
        };
        Self {
            flip_mask: flip,
            phase_mask: phase,
            base: term.coeff * i_pow,
        }
    }
}

impl Operator for PauliSum {
    fn dim(&self) -> usize {
        1usize << self.n_sites
    }

    fn apply(&self, psi: &DenseState) -> Result<DenseState, HamiltonianError> {
        let dim = self.dim();
        if psi.dim() != dim {
            return Err(HamiltonianError::DimensionMismatch {
                expected: dim,
                found: psi.dim(),
            });
        }
        let mut out = DenseState::zeros(dim);
        let amps = psi.amplitudes();
        for term in &self.terms {
            let action = TermAction::new(term, self.n_sites);
            let out_amps = out.amplitudes_mut();
            for b in 0..dim {
                let parity = (b & action.phase_mask).count_ones() & 1;
                let factor = if parity == 0 {
                    action.base
                } else {
                    -action.base
                };
                out_amps[b ^ action.flip_mask] += factor * amps[b];
            }
        }
        Ok(out)
    }
}

/// Spin-1/2 chain with nearest-neighbor exchange and a longitudinal field:
/// sum over bonds of (jx XX + jy YY + jz ZZ)/4 plus hz Z on every site.
/// The 1/4 multiplies only the exchange couplings, not the field.
pub fn build_heisenberg(
    n: usize,
    jx: f64,
    jy: f64,
    jz: f64,
    hz: f64,
    periodic: bool,
) -> Result<PauliSum, HamiltonianError> {
    if n < 2 {
        return Err(HamiltonianError::InvalidSize(format!(
            "heisenberg chain needs n >= 2, got {n}"
        )));
    }
    let mut terms = Vec::new();
    let n_bonds = if periodic { n } else { n - 1 };
    for bond in 0..n_bonds {
        let a = bond;
        let b = (bond + 1) % n;
        for (j, op) in [(jx, Pauli::X), (jy, Pauli::Y), (jz, Pauli::Z)] {
            if j != 0.0 {
                terms.push(PauliString::pair(
                    Complex64::new(0.25 * j, 0.0),
                    n,
                    (a, op),
                    (b, op),
                ));
            }
        }
    }
    if hz != 0.0 {
        for site in 0..n {
            terms.push(PauliString::single(
                Complex64::new(hz, 0.0),
                n,
                site,
                Pauli::Z,
            ));
        }
    }
    PauliSum::from_terms(n, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::rng::NormalSampler;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_site_zz_only() {
        let h = build_heisenberg(2, 0.0, 0.0, 1.0, 0.0, false).unwrap();
        assert_eq!(h.terms().len(), 1);
        let t = &h.terms()[0];
        assert_eq!(t.coeff, c(0.25, 0.0));
        assert_eq!(t.ops, vec![Pauli::Z, Pauli::Z]);
    }

    #[test]
    fn two_site_isotropic_spectrum_is_singlet_triplet() {
        let h = build_heisenberg(2, 1.0, 1.0, 1.0, 0.0, false).unwrap();
        let eigs = oracle::dense_eigenvalues(&h);
        let expected = [-0.75, 0.25, 0.25, 0.25];
        for (a, b) in eigs.iter().zip(expected) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn four_site_periodic_isotropic_ground_energy() {
        let h = build_heisenberg(4, 1.0, 1.0, 1.0, 0.0, true).unwrap();
        let eigs = oracle::dense_eigenvalues(&h);
        assert_relative_eq!(eigs[0], -2.0, epsilon = 1e-12);
    }

    #[test]
    fn field_term_carries_no_quarter_factor() {
        let h = build_heisenberg(3, 0.0, 0.0, 0.0, 0.015, false).unwrap();
        assert_eq!(h.terms().len(), 3);
        for t in h.terms() {
            assert_eq!(t.coeff, c(0.015, 0.0));
            assert_eq!(t.ops.iter().filter(|&&p| p == Pauli::Z).count(), 1);
        }
    }

    #[test]
    fn rejects_single_site_chain() {
        assert!(build_heisenberg(1, 1.0, 1.0, 1.0, 0.0, false).is_err());
    }

    #[test]
    fn identity_sum_applies_as_identity() {
        let h = PauliSum::from_terms(3, vec![PauliString::identity(c(1.0, 0.0), 3)]).unwrap();
        let mut g = NormalSampler::new(5);
        let psi =
            DenseState::from_amplitudes((0..8).map(|_| c(g.next(1.0), g.next(1.0))).collect())
                .unwrap();
        let out = h.apply(&psi).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn z_on_leftmost_site_flips_sign_of_high_bit_states() {
        // qubit 0 is the most significant bit: |1 0 0> has index 4
        let n = 3;
        let h = PauliSum::from_terms(n, vec![PauliString::single(c(1.0, 0.0), n, 0, Pauli::Z)])
            .unwrap();
        let psi = DenseState::basis_state(8, 4);
        let out = h.apply(&psi).unwrap();
        assert_eq!(out.amplitudes()[4], c(-1.0, 0.0));
    }

    #[test]
    fn apply_matches_dense_kronecker_oracle() {
        let n = 6;
        let mut g = NormalSampler::new(17);
        let mut terms = Vec::new();
        for _ in 0..8 {
            let ops: Vec<Pauli> = (0..n)
                .map(|_| match (g.next_standard().abs() * 4.0) as usize % 4 {
                    0 => Pauli::I,
                    1 => Pauli::X,
                    2 => Pauli::Y,
                    _ => Pauli::Z,
                })
                .collect();
            terms.push(PauliString::new(c(g.next(1.0), g.next(1.0)), ops));
        }
        let h = PauliSum::from_terms(n, terms).unwrap();
        let psi =
            DenseState::from_amplitudes((0..1 << n).map(|_| c(g.next(1.0), g.next(1.0))).collect())
                .unwrap();
        let fast = h.apply(&psi).unwrap();
        let dense = oracle::dense_pauli_matrix(&h);
        for row in 0..1 << n {
            let mut acc = Complex64::ZERO;
            for col in 0..1 << n {
                acc += dense[(row, col)] * psi.amplitudes()[col];
            }
            assert!((acc - fast.amplitudes()[row]).norm() < 1e-12);
        }
    }

    #[test]
    fn matrix_element_examples() {
        let n = 2;
        let h = build_heisenberg(n, 1.0, 1.0, 1.0, 0.0, false).unwrap();
        // the singlet (|01> - |10>)/sqrt(2) is an eigenstate at -0.75
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        let mut singlet = DenseState::zeros(4);
        singlet.amplitudes_mut()[1] = c(inv_sqrt2, 0.0);
        singlet.amplitudes_mut()[2] = c(-inv_sqrt2, 0.0);
        let e = h.matrix_element(&singlet, &singlet).unwrap();
        assert_relative_eq!(e.re, -0.75, epsilon = 1e-12);
        assert!(e.im.abs() < 1e-14);

        // orthogonal states under the identity give zero
        let id = PauliSum::from_terms(2, vec![PauliString::identity(c(1.0, 0.0), 2)]).unwrap();
        let a = DenseState::basis_state(4, 0);
        let b = DenseState::basis_state(4, 3);
        assert_eq!(id.matrix_element(&a, &b).unwrap(), Complex64::ZERO);
    }

    #[test]
    fn matrix_element_hermiticity_cross_check() {
        let n = 6;
        let h = build_heisenberg(n, 1.0, 0.7, 0.4, 0.1, true).unwrap();
        let mut g = NormalSampler::new(23);
        let rand_state = |g: &mut NormalSampler| {
            DenseState::from_amplitudes((0..1 << n).map(|_| c(g.next(1.0), g.next(1.0))).collect())
                .unwrap()
        };
        let bra = rand_state(&mut g);
        let ket = rand_state(&mut g);
        let fwd = h.matrix_element(&bra, &ket).unwrap();
        let bwd = h.matrix_element(&ket, &bra).unwrap();
        assert!((fwd - bwd.conj()).norm() < 1e-12);
    }

    #[test]
    fn builder_outputs_are_hermitian_as_dense_matrices() {
        for (n, periodic) in [(2usize, false), (5, true), (6, false)] {
            let h = build_heisenberg(n, 1.0, 0.95, 0.8, 0.015, periodic).unwrap();
            let dense = oracle::dense_pauli_matrix(&h);
            let dim = 1 << n;
            for i in 0..dim {
                for j in 0..dim {
                    assert!((dense[(i, j)] - dense[(j, i)].conj()).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn duplicate_terms_merge_and_zeros_drop() {
        let n = 2;
        let t = |coeff: f64| PauliString::pair(c(coeff, 0.0), n, (0, Pauli::X), (1, Pauli::X));
        let h = PauliSum::from_terms(n, vec![t(0.5), t(0.25)]).unwrap();
        assert_eq!(h.terms().len(), 1);
        assert_eq!(h.terms()[0].coeff, c(0.75, 0.0));
        let zero = PauliSum::from_terms(n, vec![t(0.5), t(-0.5)]).unwrap();
        assert!(zero.terms().is_empty());
    }

    #[test]
    fn text_round_trip_is_exact() {
        let h = build_heisenberg(5, 1.0, 0.95, 0.8, 0.015, true).unwrap();
        let text = h.to_text();
        let back = PauliSum::from_text(&text).unwrap();
        assert_eq!(h, back);
    }
}
