//! Finite-size SK energies: an unbiased importance sampler, its
//! angle-only variance bound, and the exact depth-one configuration sum.
//!
//! All energies are intensive, `E⟨H⟩/n` with `J_jk ~ N(0, 1/n)`.
//!
//! One sample is a sum over ordered pairs `u < v` of strings. For each
//! pair the sampler walks the `{r, F(r)}` pairs of strings below the top
//! level, draws a Poisson occupation `m_r` with rate `|λ_r|` and
//! reweights by `e^{|λ_r|} (λ_r/|λ_r|)^{m_r}`. The closing factor
//! `(n-2)!/(K! n^{Σm}) (y/2)^K`, `K = n - 2 - Σm`, accounts for every
//! remaining vertex sitting on a top-level string.

use crate::bitstrings::{AngleVector, BitstringTable};
use crate::error::{Error, Result};
use crate::scalar::Real;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

/// Largest `n` accepted by [`exact_sk_energy_p1_enumerated`]; the term
/// count is `C(n+7, 7)`.
pub const MAX_ENUMERATED_N: usize = 40;

/// Size cap, in complex entries, of the per-`n` table of leading rates.
const MAX_CACHED_RATES: usize = 1 << 22;

/// Aggregated sampler output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    /// Per-sample variance bound, when finite.
    pub variance_bound: Option<f64>,
}

/// Angle-only bound on the per-sample variance, kept in log form because
/// it overflows `f64` from `p = 4` on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceBound {
    pub ln_variance: f64,
}

impl VarianceBound {
    pub fn variance(&self) -> f64 {
        self.ln_variance.exp()
    }

    pub fn std_dev(&self) -> f64 {
        (0.5 * self.ln_variance).exp()
    }

    pub fn log10_std_dev(&self) -> f64 {
        0.5 * self.ln_variance / std::f64::consts::LN_10
    }

    /// Bound on the standard deviation of a mean of `samples` draws.
    pub fn std_of_mean(&self, samples: usize) -> f64 {
        (0.5 * (self.ln_variance - (samples as f64).ln())).exp()
    }
}

/// Precomputed tables shared by all samples at fixed angles.
#[derive(Debug, Clone)]
pub struct SkSampler {
    p: usize,
    b: Vec<Complex64>,
    signed_b: Vec<Complex64>,
    phi: Vec<f64>,
    flip: Vec<u32>,
    observable_bit: Vec<bool>,
    chain: Vec<u32>,
    top: Vec<u32>,
    pairs: Vec<(u32, u32)>,
}

impl SkSampler {
    pub fn new(angles: &AngleVector<f64>) -> Result<Self> {
        let table = BitstringTable::new(angles)?;
        let p = table.p();
        let signed_b = table.signed_b();
        let n = table.len() as u32;
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if table.phi[(u ^ v) as usize] != 0.0
                    && signed_b[u as usize].norm_sqr() != 0.0
                    && signed_b[v as usize].norm_sqr() != 0.0
                {
                    pairs.push((u, v));
                }
            }
        }
        Ok(Self {
            p,
            observable_bit: (0..n).map(|s| (s >> p) & 1 == 1).collect(),
            chain: table.layout.odd_below_top(),
            top: table.layout.top_level(),
            flip: table.layout.flip.clone(),
            b: table.b,
            signed_b,
            phi: table.phi,
            pairs,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    fn rng_for(seed: u64, sample_index: u64, pair_index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((sample_index << 32) | pair_index as u64);
        rng
    }

    /// `λ_r` for every pair and chain string before any occupation, which
    /// is where most draws happen. `None` when the table would be large.
    fn leading_rates(&self, n: usize) -> Option<Vec<Complex64>> {
        let entries = self.pairs.len() * self.chain.len();
        if entries > MAX_CACHED_RATES {
            return None;
        }
        let mut out = Vec::with_capacity(entries);
        for &(u, v) in &self.pairs {
            for &r in &self.chain {
                out.push(self.rate(n, u, v, r, &[]));
            }
        }
        Some(out)
    }

    /// `(n B_r / 2)(e^{log_f} - e^{log_a})`, evaluated without cancellation.
    #[inline]
    fn rate(&self, n: usize, u: u32, v: u32, r: u32, occupations: &[(u32, u64)]) -> Complex64 {
        let nf = n as f64;
        let log_c = |x: u32| -self.phi[x as usize].powi(2) / (2.0 * nf);
        let fr = self.flip[r as usize];
        let mut log_a = log_c(r ^ u) + log_c(r ^ v);
        let mut log_f = log_c(fr ^ u) + log_c(fr ^ v);
        for &(q, m) in occupations {
            log_a += m as f64 * log_c(q ^ r);
            log_f += m as f64 * log_c(q ^ fr);
        }
        self.b[r as usize] * (0.5 * nf * log_a.exp() * (log_f - log_a).exp_m1())
    }

    /// Draw number `sample_index` of the stream keyed by `seed`.
    pub fn sample(&self, n: usize, seed: u64, sample_index: u64) -> Result<f64> {
        self.sample_cached(n, seed, sample_index, None)
    }

    fn sample_cached(&self, n: usize, seed: u64, sample_index: u64, leading: Option<&[Complex64]>) -> Result<f64> {
        if n < 2 {
            return Err(Error::validation(format!("sampler needs n >= 2, got {n}")));
        }
        let nf = n as f64;
        let log_c = |x: u32| -self.phi[x as usize].powi(2) / (2.0 * nf);
        let ln_fact_head = ln_gamma(nf - 1.0);
        let mut total = Complex64::new(0.0, 0.0);
        let mut occupations: Vec<(u32, u64)> = Vec::with_capacity(self.chain.len());
        for (pair_index, &(u, v)) in self.pairs.iter().enumerate() {
            let mut rng = Self::rng_for(seed, sample_index, pair_index);
            occupations.clear();
            let mut log_w = Complex64::new(0.0, 0.0);
            let mut total_m: u64 = 0;
            for (i, &r) in self.chain.iter().enumerate() {
                let lambda = match leading {
                    Some(table) if occupations.is_empty() => table[pair_index * self.chain.len() + i],
                    _ => self.rate(n, u, v, r, &occupations),
                };
                let rate = lambda.norm();
                if !rate.is_finite() {
                    return Err(Error::numerical(format!("sampler degenerated: rate {rate}")));
                }
                if rate == 0.0 {
                    continue;
                }
                let m = Poisson::new(rate)
                    .map_err(|e| Error::numerical(format!("sampler degenerated: {e}")))?
                    .sample(&mut rng) as u64;
                log_w += Complex64::new(rate, m as f64 * lambda.arg());
                if m > 0 {
                    occupations.push((r, m));
                    total_m += m;
                }
            }
            if total_m > (n - 2) as u64 {
                continue;
            }
            let k = (n - 2) as u64 - total_m;
            let y: Complex64 = self
                .top
                .iter()
                .map(|&t| {
                    let mut lc = log_c(t ^ u) + log_c(t ^ v);
                    for &(q, m) in &occupations {
                        lc += m as f64 * log_c(q ^ t);
                    }
                    self.signed_b[t as usize] * lc.exp()
                })
                .sum();
            let log_closing = ln_fact_head - ln_gamma(k as f64 + 1.0) - total_m as f64 * nf.ln();
            let closing = if k == 0 {
                (log_w + log_closing).exp()
            } else if y.norm_sqr() == 0.0 {
                continue;
            } else {
                (log_w + log_closing + (y * 0.5).ln() * k as f64).exp()
            };
            let sign = if self.observable_bit[u as usize] ^ self.observable_bit[v as usize] {
                -1.0
            } else {
                1.0
            };
            let weight = Complex64::new(0.0, 0.25 * sign * self.phi[(u ^ v) as usize] * (nf - 1.0) / nf)
                * self.signed_b[u as usize]
                * self.signed_b[v as usize]
                * log_c(u ^ v).exp();
            total += weight * closing;
        }
        if !total.re.is_finite() {
            return Err(Error::numerical("sampler produced a non-finite value"));
        }
        Ok(total.re)
    }

    /// `count` draws with indices `0..count`, evaluated in parallel and
    /// returned in index order.
    pub fn samples(&self, n: usize, seed: u64, count: usize) -> Result<Vec<f64>> {
        if n < 2 {
            return Err(Error::validation(format!("sampler needs n >= 2, got {n}")));
        }
        let leading = if count > 1 { self.leading_rates(n) } else { None };
        (0..count as u64)
            .into_par_iter()
            .map(|i| self.sample_cached(n, seed, i, leading.as_deref()))
            .collect()
    }
}

/// One sampler draw (index 0 of the stream keyed by `rng_seed`).
pub fn sample_sk_energy(n: usize, angles: &AngleVector<f64>, rng_seed: u64) -> Result<f64> {
    SkSampler::new(angles)?.sample(n, rng_seed, 0)
}

/// Mean and standard error over `n_samples` draws.
pub fn estimate_sk_energy(
    n: usize,
    angles: &AngleVector<f64>,
    n_samples: usize,
    seed: u64,
) -> Result<EnergyEstimate> {
    let values = SkSampler::new(angles)?.samples(n, seed, n_samples)?;
    let mut est = summarize(&values)?;
    let bound = variance_upper_bound(angles)?.variance();
    est.variance_bound = bound.is_finite().then_some(bound);
    Ok(est)
}

/// Mean and standard error of a sample vector (at least two values).
pub fn summarize(values: &[f64]) -> Result<EnergyEstimate> {
    if values.len() < 2 {
        return Err(Error::validation("need at least two samples"));
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    Ok(EnergyEstimate {
        mean,
        std_error: (var / k).sqrt(),
        n_samples: values.len(),
        variance_bound: None,
    })
}

/// Bound on the per-sample variance that depends on the angles only.
///
/// With `a(x, r) = |φ(x⊕r)² - φ(x⊕F(r))²|`, the chain is processed from
/// its end: `c_r = |B_r|(1 + e^{κ_r})/4`, then `κ_q += c_r a(q, r)` for
/// every earlier `q`. The multiplicative envelope is
/// `ln R̂(x) = Σ_r c_r a(x, r)` and the bound is
/// `(1/16) Σ_{u<v} φ(u⊕v)² |B_u| |B_v| R̂_u R̂_v`.
pub fn variance_upper_bound(angles: &AngleVector<f64>) -> Result<VarianceBound> {
    let table = BitstringTable::new(angles)?;
    let chain = table.layout.odd_below_top();
    let flip = &table.layout.flip;
    let sq = |x: u32| table.phi[x as usize].powi(2);
    let a = |x: u32, r: u32| (sq(x ^ r) - sq(x ^ flip[r as usize])).abs();
    // The envelope is doubly exponential in the chain length and can
    // overflow to +∞; a zero weight must then contribute nothing, not NaN.
    let scaled = |c: f64, w: f64| if w == 0.0 { 0.0 } else { c * w };
    let mut kappa = vec![0.0f64; chain.len()];
    let mut c = vec![0.0f64; chain.len()];
    for i in (0..chain.len()).rev() {
        let r = chain[i];
        c[i] = 0.25 * table.b[r as usize].norm() * (1.0 + kappa[i].exp());
        for j in 0..i {
            kappa[j] += scaled(c[i], a(chain[j], r));
        }
    }
    let n = table.len() as u32;
    let ln_r: Vec<f64> = (0..n)
        .map(|x| chain.iter().zip(&c).map(|(&r, &cr)| scaled(cr, a(x, r))).sum())
        .collect();
    let mut terms = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let w = sq(u ^ v) * table.b[u as usize].norm() * table.b[v as usize].norm();
            if w > 0.0 {
                terms.push(w.ln() + ln_r[u as usize] + ln_r[v as usize]);
            }
        }
    }
    let ln_variance = if terms.is_empty() {
        f64::NEG_INFINITY
    } else {
        let peak = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if peak.is_infinite() {
            peak
        } else {
            peak + terms.iter().map(|t| (t - peak).exp()).sum::<f64>().ln() - 16f64.ln()
        }
    };
    if ln_variance.is_nan() {
        return Err(Error::numerical("variance bound is NaN"));
    }
    Ok(VarianceBound { ln_variance })
}

fn require_depth_one<T: Real>(angles: &AngleVector<T>) -> Result<()> {
    angles.validate()?;
    if angles.p() != 1 {
        return Err(Error::validation("exact finite-n SK energy is only available at p = 1"));
    }
    Ok(())
}

/// Exact `E⟨H⟩/n` of depth-one QAOA on SK with `n` spins.
///
/// Grouping the eight strings by `(s_0, s_2)` collapses the configuration
/// sum: only pairs with one string in a class `s_0 = s_2` and the other in
/// a class `s_0 ≠ s_2` contribute, and the result is
/// `i S (n-1)/(4n) exp(-γ²(n-1)/(2n))` with
/// `S = Σ φ(c⊕m) v(c) v(m)` over such class pairs and
/// `v(class) = Σ_{s∈class} (-1)^{[s odd]} (-1)^{s_1} B_s`.
pub fn exact_sk_energy_p1(n: usize, angles: &AngleVector<f64>) -> Result<f64> {
    require_depth_one(angles)?;
    if n < 2 {
        return Err(Error::validation(format!("need n >= 2, got {n}")));
    }
    let table = BitstringTable::new(angles)?;
    let class_weight = |s0: u32, s2: u32| -> Complex64 {
        (0..8u32)
            .filter(|s| s & 1 == s0 && (s >> 2) & 1 == s2)
            .map(|s| table.b[s as usize] * table.layout.observable_sign::<f64>(s))
            .sum()
    };
    let mut s_sum = Complex64::new(0.0, 0.0);
    for c in [(0u32, 0u32), (1, 1)] {
        for m in [(0u32, 1u32), (1, 0)] {
            let x = (c.0 ^ m.0) | ((c.1 ^ m.1) << 2);
            s_sum += class_weight(c.0, c.1) * class_weight(m.0, m.1) * table.phi[x as usize];
        }
    }
    let nf = n as f64;
    let g = angles.gammas[0];
    let value = Complex64::new(0.0, 1.0) * s_sum * ((nf - 1.0) / (4.0 * nf))
        * (-g * g * (nf - 1.0) / (2.0 * nf)).exp();
    if value.im.abs() > f64::imag_guard() * value.re.abs().max(1.0) {
        return Err(Error::numerical(format!("imaginary residue {}", value.im)));
    }
    Ok(value.re)
}

/// The same energy by brute force over all compositions `(n_s)` of `n`
/// into the eight strings, each weighted by its multinomial, `Π B_s^{n_s}`,
/// the parity sign and the Gaussian pair factors. Limited to small `n`.
pub fn exact_sk_energy_p1_enumerated(n: usize, angles: &AngleVector<f64>) -> Result<f64> {
    require_depth_one(angles)?;
    if !(2..=MAX_ENUMERATED_N).contains(&n) {
        return Err(Error::resource(format!(
            "enumeration limited to 2 <= n <= {MAX_ENUMERATED_N}, got {n}"
        )));
    }
    let table = BitstringTable::new(angles)?;
    let nf = n as f64;
    let mut total = Complex64::new(0.0, 0.0);
    let mut counts = [0usize; 8];
    fn visit(
        idx: usize,
        left: usize,
        counts: &mut [usize; 8],
        f: &mut dyn FnMut(&[usize; 8]),
    ) {
        if idx == 7 {
            counts[7] = left;
            f(counts);
            return;
        }
        for k in 0..=left {
            counts[idx] = k;
            visit(idx + 1, left - k, counts, f);
        }
    }
    let mut body = |c: &[usize; 8]| {
        let ln_mult = ln_gamma(nf + 1.0) - c.iter().map(|&k| ln_gamma(k as f64 + 1.0)).sum::<f64>();
        let mut w = Complex64::new(ln_mult.exp() / 2f64.powi(n as i32), 0.0);
        for s in 0..8u32 {
            let k = c[s as usize];
            if k > 0 {
                w *= table.b[s as usize].powu(k as u32) * table.layout.parity_sign::<f64>(s).powi(k as i32);
            }
        }
        let mut gauss = 0.0;
        let mut obs = Complex64::new(0.0, 0.0);
        for s in 0..8u32 {
            for t in (s + 1)..8u32 {
                let pair = (c[s as usize] * c[t as usize]) as f64;
                let ph = table.phi[(s ^ t) as usize];
                gauss += ph * ph * pair / (2.0 * nf);
                let sign = if ((s >> 1) ^ (t >> 1)) & 1 == 1 { -1.0 } else { 1.0 };
                obs += Complex64::new(0.0, sign * ph * pair / nf);
            }
        }
        total += w * (-gauss).exp() * obs;
    };
    visit(0, n, &mut counts, &mut body);
    Ok(total.re / nf)
}
