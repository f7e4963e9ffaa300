//! Matrix product states with open or periodic boundary, and their adjoints.
//!
//! The dense amplitude vector of a periodic MPS is built with a split
//! contraction: prefix products over the left half of the chain, suffix
//! products over the right half, and a trace pairing of the two halves. That
//! keeps the 2^N * chi^3 cost of the naive sweep down to 2^N * chi^2 plus
//! lower-order terms, and the reverse-mode pass reuses the stored stacks.
//!
//! Cores are real by default; the complex variant shares all code through the
//! [`CoreScalar`] trait with parameters stored as (re, im) pairs.

use super::AnsatzError;
use crate::hamiltonian::DenseState;
use num_complex::Complex64;

/// Scalar type of MPS cores: plain reals or complex numbers packed as two
/// real parameters per entry.
pub trait CoreScalar: Copy + Send + Sync + 'static {
    const ZERO: Self;
    const PARAMS_PER_ENTRY: usize;

    fn conj(self) -> Self;
    fn to_c64(self) -> Complex64;
    fn mul(self, other: Self) -> Self;
    fn add(self, other: Self) -> Self;
    fn read_param(p: &[f64]) -> Self;
    /// Map an accumulated adjoint entry to parameter-gradient entries,
    /// including the fold of the conjugate branch (factor 2).
    fn write_grad(self, out: &mut [f64]);
    /// Weight used by the adjoint pass for a state-space cotangent entry.
    fn weight(c: Complex64) -> Self;
}

impl CoreScalar for f64 {
    const ZERO: Self = 0.0;
    const PARAMS_PER_ENTRY: usize = 1;

    #[inline]
    fn conj(self) -> Self {
        self
    }

    #[inline]
    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }

    #[inline]
    fn mul(self, other: Self) -> Self {
        self * other
    }

    #[inline]
    fn add(self, other: Self) -> Self {
        self + other
    }

    #[inline]
    fn read_param(p: &[f64]) -> Self {
        p[0]
    }

    #[inline]
    fn write_grad(self, out: &mut [f64]) {
        out[0] = 2.0 * self;
    }

    #[inline]
    fn weight(c: Complex64) -> Self {
        c.re
    }
}

impl CoreScalar for Complex64 {
    const ZERO: Self = Complex64::ZERO;
    const PARAMS_PER_ENTRY: usize = 2;

    #[inline]
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }

    #[inline]
    fn to_c64(self) -> Complex64 {
        self
    }

    #[inline]
    fn mul(self, other: Self) -> Self {
        self * other
    }

    #[inline]
    fn add(self, other: Self) -> Self {
        self + other
    }

    #[inline]
    fn read_param(p: &[f64]) -> Self {
        Complex64::new(p[0], p[1])
    }

    #[inline]
    fn write_grad(self, out: &mut [f64]) {
        out[0] = 2.0 * self.re;
        out[1] = -2.0 * self.im;
    }

    #[inline]
    fn weight(c: Complex64) -> Self {
        c.conj()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

/// Rank-3 core tensors of one MPS. Core `k` has shape
/// (bonds[k], 2, bonds[k+1]) stored row-major as (left, phys, right).
#[derive(Debug, Clone)]
pub struct MpsTensors<T: CoreScalar> {
    n_sites: usize,
    bonds: Vec<usize>,
    boundary: Boundary,
    cores: Vec<Vec<T>>,
}

/// Bond dimension profile for the requested boundary and cap.
///
/// Open chains keep the full cap on interior bonds; the quantics profile caps
/// each bond additionally by the maximal useful rank at that cut.
pub fn bond_profile(n_sites: usize, chi: usize, boundary: Boundary, capped: bool) -> Vec<usize> {
    match boundary {
        Boundary::Periodic => vec![chi; n_sites + 1],
        Boundary::Open => {
            let mut bonds = Vec::with_capacity(n_sites + 1);
            for k in 0..=n_sites {
                if k == 0 || k == n_sites {
                    bonds.push(1);
                } else if capped {
                    let left = 1usize << k.min(48);
                    let right = 1usize << (n_sites - k).min(48);
                    bonds.push(chi.min(left).min(right));
                } else {
                    bonds.push(chi);
                }
            }
            bonds
        }
    }
}

pub fn param_count<T: CoreScalar>(bonds: &[usize]) -> usize {
    let n = bonds.len() - 1;
    (0..n).map(|k| bonds[k] * 2 * bonds[k + 1]).sum::<usize>() * T::PARAMS_PER_ENTRY
}

impl<T: CoreScalar> MpsTensors<T> {
    /// Unpack a flat parameter vector into core tensors.
    pub fn from_params(
        bonds: &[usize],
        boundary: Boundary,
        params: &[f64],
    ) -> Result<Self, AnsatzError> {
        let n = bonds.len() - 1;
        if params.len() != param_count::<T>(bonds) {
            return Err(AnsatzError::ShapeMismatch(format!(
                "expected {} parameters, got {}",
                param_count::<T>(bonds),
                params.len()
            )));
        }
        let mut cores = Vec::with_capacity(n);
        let mut offset = 0;
        for k in 0..n {
            let len = bonds[k] * 2 * bonds[k + 1];
            let mut core = Vec::with_capacity(len);
            for e in 0..len {
                core.push(T::read_param(&params[offset + e * T::PARAMS_PER_ENTRY..]));
            }
            offset += len * T::PARAMS_PER_ENTRY;
            cores.push(core);
        }
        Ok(Self {
            n_sites: n,
            bonds: bonds.to_vec(),
            boundary,
            cores,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn bonds(&self) -> &[usize] {
        &self.bonds
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn core(&self, k: usize) -> &[T] {
        &self.cores[k]
    }

    /// Dense amplitudes of the represented state.
    pub fn contract(&self) -> Vec<Complex64> {
        match self.boundary {
            Boundary::Open => self.contract_open().1,
            Boundary::Periodic => self.contract_periodic().2,
        }
    }

    /// Open-boundary forward sweep; returns the per-site stack and amplitudes.
    /// stack[k] holds the partial contraction over sites 0..=k with shape
    /// (2^{k+1}, bonds[k+1]).
    fn contract_open(&self) -> (Vec<Vec<T>>, Vec<Complex64>) {
        let n = self.n_sites;
        let mut stack: Vec<Vec<T>> = Vec::with_capacity(n);
        // site 0: (1, 2, b1) -> (2, b1)
        stack.push(self.cores[0].clone());
        for k in 1..n {
            let bl = self.bonds[k];
            let br = self.bonds[k + 1];
            let prev = &stack[k - 1];
            let rows = 1usize << k;
            let mut next = vec![T::ZERO; (rows * 2) * br];
            let core = &self.cores[k];
            for row in 0..rows {
                let t = &prev[row * bl..(row + 1) * bl];
                for s in 0..2 {
                    let out = &mut next[(row * 2 + s) * br..(row * 2 + s + 1) * br];
                    for i in 0..bl {
                        let ti = t[i];
                        let a_row = &core[(i * 2 + s) * br..(i * 2 + s + 1) * br];
                        for j in 0..br {
                            out[j] = out[j].add(ti.mul(a_row[j]));
                        }
                    }
                }
            }
            stack.push(next);
        }
        let amps = stack[n - 1].iter().map(|t| t.to_c64()).collect();
        (stack, amps)
    }

    /// Periodic forward: prefix matrices over sites 0..mid, suffix matrices
    /// over sites mid..n, amplitudes from the trace pairing.
    #[allow(clippy::type_complexity)]
    fn contract_periodic(&self) -> (Vec<Vec<T>>, Vec<Vec<T>>, Vec<Complex64>) {
        let n = self.n_sites;
        let chi = self.bonds[0];
        let mid = (n / 2).max(1);
        let m2 = chi * chi;

        // prefix[k] : (2^{k+1}, chi, chi) for k in 0..mid;
        // core 0 is (chi, 2, chi) = (i, s, j), reordered to per-s matrices
        let mut prefix: Vec<Vec<T>> = Vec::with_capacity(mid);
        {
            let core = &self.cores[0];
            let mut first = vec![T::ZERO; 2 * m2];
            for i in 0..chi {
                for s in 0..2 {
                    for j in 0..chi {
                        first[s * m2 + i * chi + j] = core[(i * 2 + s) * chi + j];
                    }
                }
            }
            prefix.push(first);
        }
        for k in 1..mid {
            let rows = 1usize << k;
            let prev = &prefix[k - 1];
            let core = &self.cores[k];
            let mut next = vec![T::ZERO; rows * 2 * m2];
            for row in 0..rows {
                let p = &prev[row * m2..(row + 1) * m2];
                for s in 0..2 {
                    let out = &mut next[(row * 2 + s) * m2..(row * 2 + s + 1) * m2];
                    // out = p * core(s)
                    for i in 0..chi {
                        for l in 0..chi {
                            let v = p[i * chi + l];
                            let a_row = &core[(l * 2 + s) * chi..(l * 2 + s + 1) * chi];
                            let o = &mut out[i * chi..(i + 1) * chi];
                            for j in 0..chi {
                                o[j] = o[j].add(v.mul(a_row[j]));
                            }
                        }
                    }
                }
            }
            prefix.push(next);
        }

        // suffix[idx] for sites mid..n, built right to left;
        // suffix[k - mid] : (2^{n-k}, chi, chi)
        let mut suffix: Vec<Vec<T>> = vec![Vec::new(); n - mid];
        {
            let core = &self.cores[n - 1];
            let mut last = vec![T::ZERO; 2 * m2];
            for i in 0..chi {
                for s in 0..2 {
                    for j in 0..chi {
                        last[s * m2 + i * chi + j] = core[(i * 2 + s) * chi + j];
                    }
                }
            }
            suffix[n - 1 - mid] = last;
        }
        for k in (mid..n - 1).rev() {
            let cols = 1usize << (n - 1 - k);
            let nxt = suffix[k + 1 - mid].clone();
            let core = &self.cores[k];
            let mut cur = vec![T::ZERO; 2 * cols * m2];
            for s in 0..2 {
                for b in 0..cols {
                    let r = &nxt[b * m2..(b + 1) * m2];
                    let out = &mut cur[(s * cols + b) * m2..(s * cols + b + 1) * m2];
                    // out = core(s) * r
                    for i in 0..chi {
                        for l in 0..chi {
                            let v = core[(i * 2 + s) * chi + l];
                            let r_row = &r[l * chi..(l + 1) * chi];
                            let o = &mut out[i * chi..(i + 1) * chi];
                            for j in 0..chi {
                                o[j] = o[j].add(v.mul(r_row[j]));
                            }
                        }
                    }
                }
            }
            suffix[k - mid] = cur;
        }

        // amplitudes: psi[(bl, br)] = tr(prefix[bl] * suffix[br])
        let left_rows = 1usize << mid;
        let right_rows = 1usize << (n - mid);
        let pre = &prefix[mid - 1];
        let suf = &suffix[0];
        let mut amps = vec![Complex64::ZERO; left_rows * right_rows];
        for bl in 0..left_rows {
            let l = &pre[bl * m2..(bl + 1) * m2];
            for br in 0..right_rows {
                let r = &suf[br * m2..(br + 1) * m2];
                let mut acc = T::ZERO;
                for i in 0..chi {
                    for j in 0..chi {
                        acc = acc.add(l[i * chi + j].mul(r[j * chi + i]));
                    }
                }
                amps[bl * right_rows + br] = acc.to_c64();
            }
        }
        (prefix, suffix, amps)
    }

    /// Reverse-mode pass: gradient of 2 Re(<cotangent| psi(cores)>) with
    /// respect to the flat parameter vector.
    pub fn vjp(&self, cotangent: &DenseState) -> Result<Vec<f64>, AnsatzError> {
        let n = self.n_sites;
        let dim = 1usize << n;
        if cotangent.dim() != dim {
            return Err(AnsatzError::ShapeMismatch(format!(
                "cotangent dim {} vs state dim {dim}",
                cotangent.dim()
            )));
        }
        let weights: Vec<T> = cotangent
            .amplitudes()
            .iter()
            .map(|&c| T::weight(c))
            .collect();
        let core_grads = match self.boundary {
            Boundary::Open => self.vjp_open(&weights),
            Boundary::Periodic => self.vjp_periodic(&weights),
        };
        let mut out = vec![0.0f64; param_count::<T>(&self.bonds)];
        let mut offset = 0;
        for g in &core_grads {
            for (e, val) in g.iter().enumerate() {
                val.write_grad(&mut out[offset + e * T::PARAMS_PER_ENTRY..]);
            }
            offset += g.len() * T::PARAMS_PER_ENTRY;
        }
        Ok(out)
    }

    fn vjp_open(&self, weights: &[T]) -> Vec<Vec<T>> {
        let n = self.n_sites;
        let (stack, _) = self.contract_open();
        let mut grads: Vec<Vec<T>> = self.cores.iter().map(|c| vec![T::ZERO; c.len()]).collect();
        // cotangent of stack[n-1] is the weight vector itself (bond dim 1)
        let mut tbar: Vec<T> = weights.to_vec();
        for k in (1..n).rev() {
            let bl = self.bonds[k];
            let br = self.bonds[k + 1];
            let rows = 1usize << k;
            let prev = &stack[k - 1];
            let core = &self.cores[k];
            let grad = &mut grads[k];
            let mut prev_bar = vec![T::ZERO; rows * bl];
            for row in 0..rows {
                let t = &prev[row * bl..(row + 1) * bl];
                let pb = &mut prev_bar[row * bl..(row + 1) * bl];
                for s in 0..2 {
                    let tb = &tbar[(row * 2 + s) * br..(row * 2 + s + 1) * br];
                    for i in 0..bl {
                        let g_row = &mut grad[(i * 2 + s) * br..(i * 2 + s + 1) * br];
                        let a_row = &core[(i * 2 + s) * br..(i * 2 + s + 1) * br];
                        let ti = t[i];
                        let mut acc = T::ZERO;
                        for j in 0..br {
                            g_row[j] = g_row[j].add(ti.mul(tb[j]));
                            acc = acc.add(tb[j].mul(a_row[j]));
                        }
                        pb[i] = pb[i].add(acc);
                    }
                }
            }
            tbar = prev_bar;
        }
        grads[0].copy_from_slice(&tbar);
        grads
    }

    fn vjp_periodic(&self, weights: &[T]) -> Vec<Vec<T>> {
        let n = self.n_sites;
        let chi = self.bonds[0];
        let m2 = chi * chi;
        let mid = (n / 2).max(1);
        let (prefix, suffix, _) = self.contract_periodic();
        let mut grads: Vec<Vec<T>> = self.cores.iter().map(|c| vec![T::ZERO; c.len()]).collect();

        let left_rows = 1usize << mid;
        let right_rows = 1usize << (n - mid);
        let pre = &prefix[mid - 1];
        let suf = &suffix[0];

        // d tr(L R)/dL = R^T, d tr(L R)/dR = L^T
        let mut lbar = vec![T::ZERO; left_rows * m2];
        let mut rbar = vec![T::ZERO; right_rows * m2];
        for bl in 0..left_rows {
            let lb = &mut lbar[bl * m2..(bl + 1) * m2];
            for br in 0..right_rows {
                let w = weights[bl * right_rows + br];
                let r = &suf[br * m2..(br + 1) * m2];
                for i in 0..chi {
                    for j in 0..chi {
                        lb[i * chi + j] = lb[i * chi + j].add(w.mul(r[j * chi + i]));
                    }
                }
            }
        }
        for br in 0..right_rows {
            let rb = &mut rbar[br * m2..(br + 1) * m2];
            for bl in 0..left_rows {
                let w = weights[bl * right_rows + br];
                let l = &pre[bl * m2..(bl + 1) * m2];
                for i in 0..chi {
                    for j in 0..chi {
                        rb[i * chi + j] = rb[i * chi + j].add(w.mul(l[j * chi + i]));
                    }
                }
            }
        }

        // backward through the prefix stack: prefix[k] = prefix[k-1] * core_k(s)
        for k in (1..mid).rev() {
            let rows = 1usize << k;
            let prev = &prefix[k - 1];
            let core = &self.cores[k];
            let grad = &mut grads[k];
            let mut prev_bar = vec![T::ZERO; rows * m2];
            for row in 0..rows {
                let p = &prev[row * m2..(row + 1) * m2];
                let pb = &mut prev_bar[row * m2..(row + 1) * m2];
                for s in 0..2 {
                    let ob = &lbar[(row * 2 + s) * m2..(row * 2 + s + 1) * m2];
                    // grad_core(s) += p^T * ob ; pb += ob * core(s)^T
                    for i in 0..chi {
                        for l in 0..chi {
                            let pv = p[i * chi + l];
                            let mut acc = T::ZERO;
                            let ob_row = &ob[i * chi..(i + 1) * chi];
                            let g_row = &mut grad[(l * 2 + s) * chi..(l * 2 + s + 1) * chi];
                            let a_row = &core[(l * 2 + s) * chi..(l * 2 + s + 1) * chi];
                            for j in 0..chi {
                                g_row[j] = g_row[j].add(pv.mul(ob_row[j]));
                                acc = acc.add(ob_row[j].mul(a_row[j]));
                            }
                            pb[i * chi + l] = pb[i * chi + l].add(acc);
                        }
                    }
                }
            }
            lbar = prev_bar;
        }
        // site 0 cotangent: lbar rows are per (s) matrices
        {
            let grad = &mut grads[0];
            for s in 0..2 {
                for i in 0..chi {
                    for j in 0..chi {
                        grad[(i * 2 + s) * chi + j] =
                            grad[(i * 2 + s) * chi + j].add(lbar[s * m2 + i * chi + j]);
                    }
                }
            }
        }

        // backward through the suffix stack: suffix[k] = core_k(s) * suffix[k+1]
        for k in mid..n - 1 {
            let cols = 1usize << (n - 1 - k);
            let nxt = &suffix[k + 1 - mid];
            let core = &self.cores[k];
            let grad = &mut grads[k];
            let mut next_bar = vec![T::ZERO; cols * m2];
            for s in 0..2 {
                for b in 0..cols {
                    let ob = &rbar[(s * cols + b) * m2..(s * cols + b + 1) * m2];
                    let r = &nxt[b * m2..(b + 1) * m2];
                    let nb = &mut next_bar[b * m2..(b + 1) * m2];
                    // grad_core(s) += ob * r^T ; nb += core(s)^T * ob
                    for i in 0..chi {
                        for l in 0..chi {
                            let ob_row = &ob[i * chi..(i + 1) * chi];
                            let r_row = &r[l * chi..(l + 1) * chi];
                            let mut acc = T::ZERO;
                            for j in 0..chi {
                                acc = acc.add(ob_row[j].mul(r_row[j]));
                            }
                            let gi = (i * 2 + s) * chi + l;
                            grad[gi] = grad[gi].add(acc);
                            let cv = core[(i * 2 + s) * chi + l];
                            let nb_row = &mut nb[l * chi..(l + 1) * chi];
                            for j in 0..chi {
                                nb_row[j] = nb_row[j].add(cv.mul(ob_row[j]));
                            }
                        }
                    }
                }
            }
            rbar = next_bar;
        }
        // last site cotangent: rbar rows are per (s) matrices
        {
            let grad = &mut grads[n - 1];
            for s in 0..2 {
                for i in 0..chi {
                    for j in 0..chi {
                        grad[(i * 2 + s) * chi + j] =
                            grad[(i * 2 + s) * chi + j].add(rbar[s * m2 + i * chi + j]);
                    }
                }
            }
        }
        grads
    }
}

/// <psi_a | psi_b> by transfer contraction: an environment sweep for open
/// boundaries, chi^2 x chi^2 transfer products for periodic ones. Equals the
/// dense inner product of the contracted states.
pub fn mps_pair_overlap<T: CoreScalar>(
    a: &MpsTensors<T>,
    b: &MpsTensors<T>,
) -> Result<Complex64, AnsatzError> {
    if a.n_sites != b.n_sites || a.boundary != b.boundary {
        return Err(AnsatzError::ShapeMismatch(format!(
            "incompatible pair: {} sites {:?} vs {} sites {:?}",
            a.n_sites, a.boundary, b.n_sites, b.boundary
        )));
    }
    let n = a.n_sites;
    match a.boundary {
        Boundary::Open => {
            // env[i, j] over (bond of a, bond of b)
            let mut env = vec![Complex64::ONE];
            let mut ba = 1usize;
            let mut bb = 1usize;
            for k in 0..n {
                let (ba2, bb2) = (a.bonds[k + 1], b.bonds[k + 1]);
                let ca = a.core(k);
                let cb = b.core(k);
                let mut next = vec![Complex64::ZERO; ba2 * bb2];
                for s in 0..2 {
                    // f = env * B(s): (ba, bb2)
                    let mut f = vec![Complex64::ZERO; ba * bb2];
                    for i in 0..ba {
                        for l in 0..bb {
                            let e = env[i * bb + l];
                            for j in 0..bb2 {
                                f[i * bb2 + j] += e * cb[(l * 2 + s) * bb2 + j].to_c64();
                            }
                        }
                    }
                    // next += A(s)^H f
                    for i in 0..ba {
                        for ip in 0..ba2 {
                            let av = ca[(i * 2 + s) * ba2 + ip].conj().to_c64();
                            for j in 0..bb2 {
                                next[ip * bb2 + j] += av * f[i * bb2 + j];
                            }
                        }
                    }
                }
                env = next;
                ba = ba2;
                bb = bb2;
            }
            Ok(env[0])
        }
        Boundary::Periodic => {
            let ca = a.bonds[0];
            let cb = b.bonds[0];
            let dim = ca * cb;
            let transfer = |k: usize| -> Vec<Complex64> {
                let mut t = vec![Complex64::ZERO; dim * dim];
                for s in 0..2 {
                    for i in 0..ca {
                        for ip in 0..ca {
                            let av = a.core(k)[(i * 2 + s) * ca + ip].conj().to_c64();
                            for j in 0..cb {
                                for jp in 0..cb {
                                    let bv = b.core(k)[(j * 2 + s) * cb + jp].to_c64();
                                    t[(i * cb + j) * dim + (ip * cb + jp)] += av * bv;
                                }
                            }
                        }
                    }
                }
                t
            };
            let mut acc = transfer(0);
            for k in 1..n {
                let t = transfer(k);
                let mut next = vec![Complex64::ZERO; dim * dim];
                for i in 0..dim {
                    for l in 0..dim {
                        let v = acc[i * dim + l];
                        if v != Complex64::ZERO {
                            for j in 0..dim {
                                next[i * dim + j] += v * t[l * dim + j];
                            }
                        }
                    }
                }
                acc = next;
            }
            let mut tr = Complex64::ZERO;
            for i in 0..dim {
                tr += acc[i * dim + i];
            }
            Ok(tr)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::NormalSampler;

    fn random_mps(
        n: usize,
        chi: usize,
        boundary: Boundary,
        seed: u64,
    ) -> (Vec<usize>, Vec<f64>, MpsTensors<f64>) {
        let bonds = bond_profile(n, chi, boundary, false);
        let count = param_count::<f64>(&bonds);
        let mut g = NormalSampler::new(seed);
        let params: Vec<f64> = (0..count).map(|_| g.next(1.0)).collect();
        let mps = MpsTensors::<f64>::from_params(&bonds, boundary, &params).unwrap();
        (bonds, params, mps)
    }

    /// Naive per-bitstring contraction, the independent oracle.
    fn naive_amplitudes(mps: &MpsTensors<f64>) -> Vec<Complex64> {
        let n = mps.n_sites();
        let dim = 1usize << n;
        let mut out = Vec::with_capacity(dim);
        for b in 0..dim {
            let bits: Vec<usize> = (0..n).map(|k| (b >> (n - 1 - k)) & 1).collect();
            // running matrix product
            let b0 = mps.bonds()[0];
            let b1 = mps.bonds()[1];
            let mut mat: Vec<f64> = (0..b0 * b1)
                .map(|e| {
                    let (i, j) = (e / b1, e % b1);
                    mps.core(0)[(i * 2 + bits[0]) * b1 + j]
                })
                .collect();
            let rows = b0;
            let mut cols = b1;
            for k in 1..n {
                let br = mps.bonds()[k + 1];
                let mut next = vec![0.0f64; rows * br];
                for i in 0..rows {
                    for l in 0..cols {
                        let v = mat[i * cols + l];
                        for j in 0..br {
                            next[i * br + j] += v * mps.core(k)[(l * 2 + bits[k]) * br + j];
                        }
                    }
                }
                mat = next;
                cols = br;
            }
            let amp = match mps.boundary() {
                Boundary::Open => mat[0],
                Boundary::Periodic => (0..rows).map(|i| mat[i * cols + i]).sum(),
            };
            out.push(Complex64::new(amp, 0.0));
        }
        out
    }

    #[test]
    fn product_state_mps_gives_basis_state() {
        // chi = 1 open cores all [1, 0] in the physical index -> |00...0>
        let n = 4;
        let bonds = bond_profile(n, 1, Boundary::Open, false);
        let params: Vec<f64> = (0..param_count::<f64>(&bonds))
            .map(|e| if e % 2 == 0 { 1.0 } else { 0.0 })
            .collect();
        let mps = MpsTensors::<f64>::from_params(&bonds, Boundary::Open, &params).unwrap();
        let amps = mps.contract();
        assert_eq!(amps[0], Complex64::ONE);
        assert!(amps[1..].iter().all(|a| *a == Complex64::ZERO));
    }

    #[test]
    fn periodic_contraction_matches_naive_trace_oracle() {
        let (_, _, mps) = random_mps(6, 3, Boundary::Periodic, 31);
        let fast = mps.contract();
        let slow = naive_amplitudes(&mps);
        for (f, s) in fast.iter().zip(&slow) {
            assert!((f - s).norm() < 1e-12, "{f} vs {s}");
        }
    }

    #[test]
    fn open_contraction_matches_naive_oracle() {
        let (_, _, mps) = random_mps(7, 3, Boundary::Open, 32);
        let fast = mps.contract();
        let slow = naive_amplitudes(&mps);
        for (f, s) in fast.iter().zip(&slow) {
            assert!((f - s).norm() < 1e-12);
        }
    }

    #[test]
    fn odd_and_even_chain_lengths_contract_consistently() {
        for n in [2usize, 3, 4, 5] {
            let (_, _, mps) = random_mps(n, 2, Boundary::Periodic, 100 + n as u64);
            let fast = mps.contract();
            let slow = naive_amplitudes(&mps);
            for (f, s) in fast.iter().zip(&slow) {
                assert!((f - s).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn overlap_matches_dense_inner_product() {
        for boundary in [Boundary::Open, Boundary::Periodic] {
            for trial in 0..50u64 {
                let n = 2 + (trial as usize % 7);
                let chi = 2 + (trial as usize % 3);
                let (_, _, a) = random_mps(n, chi, boundary, 7000 + trial);
                let (_, _, b) = random_mps(n, chi, boundary, 8000 + trial);
                let fast = mps_pair_overlap(&a, &b).unwrap();
                let da = a.contract();
                let db = b.contract();
                let dense: Complex64 = da.iter().zip(&db).map(|(x, y)| x.conj() * y).sum();
                assert!((fast - dense).norm() < 1e-12 * dense.norm().max(1.0));
            }
        }
    }

    #[test]
    fn self_overlap_is_real_nonnegative() {
        for trial in 0..10u64 {
            let (_, _, a) = random_mps(5, 3, Boundary::Periodic, 900 + trial);
            let o = mps_pair_overlap(&a, &a).unwrap();
            assert!(o.im.abs() < 1e-12 * o.re.max(1.0));
            assert!(o.re >= 0.0);
        }
    }

    #[test]
    fn basis_state_mps_self_overlap_is_one() {
        let n = 4;
        let bonds = bond_profile(n, 1, Boundary::Open, false);
        let params: Vec<f64> = (0..param_count::<f64>(&bonds))
            .map(|e| if e % 2 == 0 { 1.0 } else { 0.0 })
            .collect();
        let a = MpsTensors::<f64>::from_params(&bonds, Boundary::Open, &params).unwrap();
        let o = mps_pair_overlap(&a, &a).unwrap();
        assert!((o - Complex64::ONE).norm() < 1e-15);
    }

    #[test]
    fn product_state_overlap_factorizes() {
        // two chi = 1 open MPS: overlap is the product of per-site overlaps
        let n = 3;
        let bonds = bond_profile(n, 1, Boundary::Open, false);
        let pa = vec![1.0, 2.0, 0.5, -1.0, 0.3, 0.7];
        let pb = vec![0.2, 1.0, 1.5, 0.4, -0.6, 1.1];
        let a = MpsTensors::<f64>::from_params(&bonds, Boundary::Open, &pa).unwrap();
        let b = MpsTensors::<f64>::from_params(&bonds, Boundary::Open, &pb).unwrap();
        let o = mps_pair_overlap(&a, &b).unwrap();
        let mut expect = 1.0;
        for k in 0..n {
            expect *= pa[2 * k] * pb[2 * k] + pa[2 * k + 1] * pb[2 * k + 1];
        }
        assert!((o - Complex64::new(expect, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn mismatched_pairs_are_rejected() {
        let (_, _, a) = random_mps(4, 2, Boundary::Open, 1);
        let (_, _, b) = random_mps(5, 2, Boundary::Open, 2);
        assert!(mps_pair_overlap(&a, &b).is_err());
    }
}
