//! Exact statevector simulation of QAOA on small Ising instances.
//!
//! The state is `Π_j e^{-iβ_j/2 Σ_k X_k} e^{-iγ_j/2 H} |+⟩^n`, layer 0
//! acting first. Energies here are totals `⟨H⟩`, not per-vertex values.
//!
//! Hamiltonians made only of even-arity terms commute with the global
//! flip `X^{⊗n}`, and so does the mixer, which keeps the amplitudes
//! flip-symmetric. [`QaoaSimulator`] then stores half of the state.

use crate::bitstrings::AngleVector;
use crate::error::{Error, Result};
use crate::instances::{GraphInstance, SkInstance};
use crate::scalar::Real;
use num_complex::Complex;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Largest qubit count the simulator accepts.
pub const MAX_QUBITS: usize = 26;

/// Distinct diagonal values above which the phase lookup table is skipped.
const MAX_PHASE_LEVELS: usize = 1 << 12;
/// Low qubits mixed together inside one block of `2^BLOCK_QUBITS` amplitudes.
const BLOCK_QUBITS: usize = 9;

/// `H = Σ_terms J Π_{k∈subset} Z_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingHamiltonian {
    pub n: usize,
    pub terms: Vec<(Vec<usize>, f64)>,
}

impl IsingHamiltonian {
    pub fn new(n: usize, terms: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        let h = Self { n, terms };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (subset, j) in &self.terms {
            if !j.is_finite() {
                return Err(Error::validation("coupling must be finite"));
            }
            if subset.is_empty() || subset.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::validation(format!(
                    "term subset {subset:?} must be non-empty, sorted and repetition-free"
                )));
            }
            if subset.iter().any(|&k| k >= self.n) {
                return Err(Error::validation(format!("term {subset:?} exceeds {} qubits", self.n)));
            }
            if !seen.insert(subset.clone()) {
                return Err(Error::validation(format!("duplicate term {subset:?}")));
            }
        }
        Ok(())
    }

    /// MaxCut Hamiltonian `Σ_{edges} Z_i Z_j`.
    pub fn from_graph(g: &GraphInstance) -> Result<Self> {
        let terms = g
            .edges
            .iter()
            .map(|&(i, j)| (vec![i.min(j), i.max(j)], 1.0))
            .collect();
        Self::new(g.n, terms)
    }

    /// `Σ_{j<k} J_jk Z_j Z_k`.
    pub fn from_sk(inst: &SkInstance) -> Result<Self> {
        let mut terms = Vec::with_capacity(inst.n * (inst.n - 1) / 2);
        for j in 0..inst.n {
            for k in (j + 1)..inst.n {
                terms.push((vec![j, k], inst.coupling(j, k)));
            }
        }
        Self::new(inst.n, terms)
    }

    pub fn has_unit_couplings(&self) -> bool {
        self.terms.iter().all(|(_, j)| *j == 1.0)
    }

    /// Every term acts on an even number of qubits.
    pub fn is_flip_symmetric(&self) -> bool {
        self.terms.iter().all(|(s, _)| s.len() % 2 == 0)
    }

    /// Two-body terms with integer couplings, for which `γ` has period `2π`.
    pub fn is_integer_two_body(&self) -> bool {
        self.terms
            .iter()
            .all(|(s, j)| s.len() == 2 && j.fract() == 0.0)
    }

    /// `H(z)` for a computational basis state.
    pub fn value(&self, z: usize) -> f64 {
        self.terms
            .iter()
            .map(|(subset, j)| {
                let parity = subset.iter().fold(0usize, |acc, &k| acc ^ ((z >> k) & 1));
                if parity == 1 {
                    -j
                } else {
                    *j
                }
            })
            .sum()
    }

    fn check_size(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_QUBITS {
            return Err(Error::resource(format!(
                "simulator supports 1..={MAX_QUBITS} qubits, got {}",
                self.n
            )));
        }
        Ok(())
    }

    /// `H(z)` for every basis state.
    pub fn diagonal(&self) -> Result<Vec<f64>> {
        self.check_size()?;
        Ok((0..1usize << self.n).map(|z| self.value(z)).collect())
    }
}

/// Full `2^n` amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector<T: Real = f64> {
    pub amplitudes: Vec<Complex<T>>,
}

impl<T: Real> Statevector<T> {
    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Per-instance simulator with the diagonal precomputed.
#[derive(Debug, Clone)]
pub struct QaoaSimulator {
    n: usize,
    /// `H(z)` for the stored basis states (the lower half when `half`).
    diag: Vec<f64>,
    /// Index of `H(z)` into `level_values`, when the spectrum is small.
    level_index: Option<Vec<u16>>,
    level_values: Vec<f64>,
    half: bool,
}

impl QaoaSimulator {
    pub fn new(h: &IsingHamiltonian) -> Result<Self> {
        h.validate()?;
        h.check_size()?;
        let half = h.n >= 2 && h.is_flip_symmetric();
        let stored = if half { 1usize << (h.n - 1) } else { 1usize << h.n };
        let diag: Vec<f64> = (0..stored).map(|z| h.value(z)).collect();
        let mut levels: Vec<f64> = Vec::new();
        let mut level_index = None;
        if diag.iter().all(|v| v.fract() == 0.0) {
            let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let span = (hi - lo) as usize + 1;
            if span <= MAX_PHASE_LEVELS {
                levels = (0..span).map(|k| lo + k as f64).collect();
                level_index = Some(diag.iter().map(|v| (v - lo) as u16).collect());
            }
        }
        Ok(Self {
            n: h.n,
            diag,
            level_index,
            level_values: levels,
            half,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Evolves the stored amplitudes in place, real and imaginary parts
    /// kept in separate arrays so the butterflies vectorize.
    fn evolve<T: Real>(&self, angles: &AngleVector<T>, ws: &mut Workspace<T>) -> Result<()> {
        angles.validate()?;
        let stored = self.diag.len();
        let amp = T::one() / T::lit((1u64 << self.n) as f64).sqrt();
        let Workspace { re, im, table } = ws;
        re.clear();
        re.resize(stored, amp);
        im.clear();
        im.resize(stored, T::zero());
        let half = T::lit(0.5);
        for (beta, gamma) in angles.betas.iter().zip(&angles.gammas) {
            let g = *gamma * half;
            match &self.level_index {
                Some(index) => {
                    table.clear();
                    table.extend(self.level_values.iter().map(|&e| (-g * T::lit(e)).sin_cos()));
                    for ((r, i), &k) in re.iter_mut().zip(im.iter_mut()).zip(index) {
                        let (sn, cs) = table[k as usize];
                        let (x, y) = (*r, *i);
                        *r = x * cs - y * sn;
                        *i = x * sn + y * cs;
                    }
                }
                None => {
                    for ((r, i), &e) in re.iter_mut().zip(im.iter_mut()).zip(&self.diag) {
                        let (sn, cs) = (-g * T::lit(e)).sin_cos();
                        let (x, y) = (*r, *i);
                        *r = x * cs - y * sn;
                        *i = x * sn + y * cs;
                    }
                }
            }
            let (s, c) = (*beta * half).sin_cos();
            let free = if self.half { self.n - 1 } else { self.n };
            let mut k = 0;
            if free >= 2 {
                // Qubits below BLOCK_QUBITS are applied one cache-sized
                // block at a time.
                let low = free.min(BLOCK_QUBITS);
                let block = 1usize << low;
                for (rb, ib) in re.chunks_exact_mut(block).zip(im.chunks_exact_mut(block)) {
                    mix_low_pair(rb, ib, c, s);
                    for q in 2..low {
                        mix_qubit(rb, ib, q, c, s);
                    }
                }
                k = low;
            }
            for k in k..free {
                mix_qubit(re, im, k, c, s);
            }
            if self.half {
                // The stored top qubit is implicit: flipping it maps z to
                // the complement of z within the stored half, so z pairs
                // with mask ^ z, i.e. the lower half with the reversed
                // upper half.
                let (rl, rh) = re.split_at_mut(stored / 2);
                let (il, ih) = im.split_at_mut(stored / 2);
                let pairs = rl
                    .iter_mut()
                    .zip(il.iter_mut())
                    .zip(rh.iter_mut().rev().zip(ih.iter_mut().rev()));
                for ((xr, xi), (yr, yi)) in pairs {
                    let (a, b, u, v) = (*xr, *xi, *yr, *yi);
                    *xr = c * a + s * v;
                    *xi = c * b - s * u;
                    *yr = c * u + s * b;
                    *yi = c * v - s * a;
                }
            }
        }
        if re.iter().chain(im.iter()).any(|v| !v.is_finite()) {
            return Err(Error::numerical("non-finite amplitude"));
        }
        Ok(())
    }

    /// Full statevector.
    pub fn state<T: Real>(&self, angles: &AngleVector<T>) -> Result<Statevector<T>> {
        let mut ws = Workspace::default();
        self.evolve(angles, &mut ws)?;
        let mut psi: Vec<Complex<T>> = ws.re.iter().zip(&ws.im).map(|(&r, &i)| Complex::new(r, i)).collect();
        if self.half {
            let stored = psi.len();
            let upper: Vec<Complex<T>> = (0..stored).map(|z| psi[(stored - 1) ^ z]).collect();
            psi.extend(upper);
        }
        Ok(Statevector { amplitudes: psi })
    }

    /// `⟨H⟩`.
    pub fn energy<T: Real>(&self, angles: &AngleVector<T>) -> Result<T> {
        self.energy_with(angles, &mut Workspace::default())
    }

    /// `⟨H⟩`, reusing the buffers in `ws`.
    pub fn energy_with<T: Real>(&self, angles: &AngleVector<T>, ws: &mut Workspace<T>) -> Result<T> {
        self.evolve(angles, ws)?;
        let mut total = T::zero();
        for ((&r, &i), &e) in ws.re.iter().zip(&ws.im).zip(&self.diag) {
            total = total + (r * r + i * i) * T::lit(e);
        }
        Ok(if self.half { total * T::lit(2.0) } else { total })
    }
}

/// Scratch buffers for repeated evaluations on one simulator.
#[derive(Debug, Clone, Default)]
pub struct Workspace<T: Real = f64> {
    re: Vec<T>,
    im: Vec<T>,
    table: Vec<(T, T)>,
}

/// Mixer on qubit `k` of every amplitude in `re`, `im`.
#[inline(always)]
fn mix_qubit<T: Real>(re: &mut [T], im: &mut [T], k: usize, c: T, s: T) {
    let stride = 1usize << k;
    for (rb, ib) in re.chunks_exact_mut(2 * stride).zip(im.chunks_exact_mut(2 * stride)) {
        let (rl, rh) = rb.split_at_mut(stride);
        let (il, ih) = ib.split_at_mut(stride);
        mix_pairs(rl, il, rh, ih, c, s);
    }
}

/// Mixer on qubits 0 and 1 together, one block of four amplitudes at a time.
#[inline(always)]
fn mix_low_pair<T: Real>(re: &mut [T], im: &mut [T], c: T, s: T) {
    for (r, i) in re.chunks_exact_mut(4).zip(im.chunks_exact_mut(4)) {
        let rot = |xr: T, xi: T, yr: T, yi: T| (c * xr + s * yi, c * xi - s * yr, c * yr + s * xi, c * yi - s * xr);
        let (r0, i0, r1, i1) = rot(r[0], i[0], r[1], i[1]);
        let (r2, i2, r3, i3) = rot(r[2], i[2], r[3], i[3]);
        let (r0, i0, r2, i2) = rot(r0, i0, r2, i2);
        let (r1, i1, r3, i3) = rot(r1, i1, r3, i3);
        r.copy_from_slice(&[r0, r1, r2, r3]);
        i.copy_from_slice(&[i0, i1, i2, i3]);
    }
}

/// `x ← c x - i s y`, `y ← c y - i s x` elementwise.
#[inline(always)]
fn mix_pairs<T: Real>(rl: &mut [T], il: &mut [T], rh: &mut [T], ih: &mut [T], c: T, s: T) {
    let n = rl.len();
    let (il, rh, ih) = (&mut il[..n], &mut rh[..n], &mut ih[..n]);
    for j in 0..n {
        let (xr, xi, yr, yi) = (rl[j], il[j], rh[j], ih[j]);
        rl[j] = c * xr + s * yi;
        il[j] = c * xi - s * yr;
        rh[j] = c * yr + s * xi;
        ih[j] = c * yi - s * xr;
    }
}

/// QAOA statevector for `h` at `angles`.
pub fn qaoa_state<T: Real>(h: &IsingHamiltonian, angles: &AngleVector<T>) -> Result<Statevector<T>> {
    QaoaSimulator::new(h)?.state(angles)
}

/// `Σ_z |a_z|² H(z)`.
pub fn expected_energy<T: Real>(h: &IsingHamiltonian, angles: &AngleVector<T>) -> Result<T> {
    QaoaSimulator::new(h)?.energy(angles)
}

/// Cut-size summary for unit-coupling MaxCut Hamiltonians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutStatistics {
    pub expected_cut: f64,
    pub best_sampled_cut: usize,
    pub shots: usize,
}

/// Expected cut `(|E| - ⟨H⟩)/2` and the best cut among `shots` basis
/// measurements drawn with `seed`.
pub fn cut_statistics(
    h: &IsingHamiltonian,
    angles: &AngleVector<f64>,
    shots: usize,
    seed: u64,
) -> Result<CutStatistics> {
    if !h.has_unit_couplings() || h.terms.iter().any(|(s, _)| s.len() != 2) {
        return Err(Error::validation("cut statistics need unit two-body couplings"));
    }
    let edges = h.terms.len() as f64;
    let psi = qaoa_state(h, angles)?;
    let probs = psi.probabilities();
    let energy: f64 = probs.iter().enumerate().map(|(z, p)| p * h.value(z)).sum();
    let mut best = 0usize;
    if shots > 0 && !h.terms.is_empty() {
        let dist = WeightedIndex::new(&probs)
            .map_err(|e| Error::numerical(format!("invalid measurement distribution: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..shots {
            let z = dist.sample(&mut rng);
            let cut = ((edges - h.value(z)) / 2.0).round() as usize;
            best = best.max(cut);
        }
    }
    Ok(CutStatistics {
        expected_cut: (edges - energy) / 2.0,
        best_sampled_cut: best,
        shots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge() -> IsingHamiltonian {
        IsingHamiltonian::new(2, vec![(vec![0, 1], 1.0)]).unwrap()
    }

    #[test]
    fn zero_angles_leave_uniform_state() {
        let h = IsingHamiltonian::new(3, vec![(vec![0, 1], 1.0), (vec![0, 1, 2], 0.5)]).unwrap();
        let a = AngleVector::new(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        let psi = qaoa_state(&h, &a).unwrap();
        for amp in psi.amplitudes {
            assert!((amp - Complex::new(1.0 / 8f64.sqrt(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn single_qubit_rotation_by_hand() {
        let h = IsingHamiltonian::new(1, vec![]).unwrap();
        let b = 0.9f64;
        let a = AngleVector::new(vec![b], vec![0.3]).unwrap();
        let psi = qaoa_state(&h, &a).unwrap();
        // e^{-i b/2 X}|+⟩ = e^{-i b/2}|+⟩.
        let expect = Complex::new(0.0, -b / 2.0).exp() / 2f64.sqrt();
        for amp in psi.amplitudes {
            assert!((amp - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn single_edge_matches_closed_form() {
        // Direct 4×4 algebra: ⟨Z0 Z1⟩ = sin 2β sin γ for an isolated edge.
        for (b, g) in [(0.7f64, 0.9f64), (-1.2, 2.3)] {
            let a = AngleVector::new(vec![b], vec![g]).unwrap();
            let e = expected_energy(&edge(), &a).unwrap();
            assert!((e - (2.0 * b).sin() * g.sin()).abs() < 1e-14, "{e}");
        }
    }

    #[test]
    fn half_state_matches_full_state() {
        let h = IsingHamiltonian::new(
            5,
            vec![(vec![0, 1], 1.0), (vec![1, 3], -0.7), (vec![2, 4], 1.3), (vec![0, 4], 0.4)],
        )
        .unwrap();
        let mut odd = h.clone();
        odd.terms.push((vec![2], 1e-9));
        let a = AngleVector::new(vec![0.4, -1.1, 0.8], vec![0.9, 0.3, -0.6]).unwrap();
        let sym = QaoaSimulator::new(&h).unwrap();
        assert!(sym.half);
        let full = QaoaSimulator::new(&odd).unwrap();
        assert!(!full.half);
        let s1: Statevector<f64> = sym.state(&a).unwrap();
        let s2 = full.state(&a).unwrap();
        for (x, y) in s1.amplitudes.iter().zip(&s2.amplitudes) {
            assert!((x - y).norm() < 1e-8);
        }
        assert!((s1.norm_sqr() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn triangle_cut_statistics() {
        let h = IsingHamiltonian::new(
            3,
            vec![(vec![0, 1], 1.0), (vec![0, 2], 1.0), (vec![1, 2], 1.0)],
        )
        .unwrap();
        let zero = AngleVector::new(vec![0.0], vec![0.0]).unwrap();
        let st = cut_statistics(&h, &zero, 64, 1).unwrap();
        assert!((st.expected_cut - 1.5).abs() < 1e-14);
        assert_eq!(st.best_sampled_cut, 2);
        assert!(cut_statistics(
            &IsingHamiltonian::new(2, vec![(vec![0, 1], 2.0)]).unwrap(),
            &zero,
            1,
            0
        )
        .is_err());
    }

    #[test]
    fn rejects_malformed_terms_and_sizes() {
        assert!(IsingHamiltonian::new(2, vec![(vec![1, 0], 1.0)]).is_err());
        assert!(IsingHamiltonian::new(2, vec![(vec![0, 2], 1.0)]).is_err());
        assert!(IsingHamiltonian::new(2, vec![(vec![0, 1], 1.0), (vec![0, 1], 2.0)]).is_err());
        let big = IsingHamiltonian::new(27, vec![]).unwrap();
        assert!(matches!(big.diagonal(), Err(Error::Resource(_))));
    }
}
