//! Depth-one energies of diluted and dense `D`-spin models.
//!
//! `H = Σ_{|S|=D} J_S Π_{k∈S} Z_k`. Diluted: `J_S ∈ {0,1}` with mean
//! `nd / (D·C(n,D))`, so each spin sits in `d` terms on average. Dense:
//! `J_S ~ N(0, n^{1-D})`. Both energies are `lim E⟨H⟩/n`.

use crate::bitstrings::{b_coefficient, phi};
use crate::error::{Error, Result};
use crate::scalar::Real;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Largest interaction arity accepted. Enumeration visits `C(D+7, 7)` terms.
pub const MAX_ARITY: usize = 16;

/// Arity and degree parameter of a `D`-spin model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DSpinConfig {
    #[serde(rename = "D")]
    pub arity: usize,
    pub d: f64,
}

impl DSpinConfig {
    pub fn new(arity: usize, d: f64) -> Result<Self> {
        let cfg = Self { arity, d };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_arity(self.arity)?;
        if !self.d.is_finite() || self.d <= 0.0 {
            return Err(Error::validation(format!(
                "degree parameter must be finite and positive, got {}",
                self.d
            )));
        }
        Ok(())
    }
}

fn check_arity(arity: usize) -> Result<()> {
    if !(2..=MAX_ARITY).contains(&arity) {
        return Err(Error::validation(format!(
            "interaction arity must lie in 2..={MAX_ARITY}, got {arity}"
        )));
    }
    Ok(())
}

fn check_finite<T: Real>(beta: T, gamma: T) -> Result<()> {
    if !beta.is_finite() || !gamma.is_finite() {
        return Err(Error::validation("angles must be finite"));
    }
    Ok(())
}

/// `k!` exactly for `k ≤ 20`.
pub fn factorial(k: usize) -> u64 {
    assert!(k <= 20, "factorial overflows u64 beyond 20");
    (1..=k as u64).product()
}

/// All ordered 8-part compositions of `total` together with their
/// multinomial coefficient.
pub fn compositions8(total: usize) -> Vec<([usize; 8], u64)> {
    fn rec(idx: usize, left: usize, cur: &mut [usize; 8], out: &mut Vec<[usize; 8]>) {
        if idx == 7 {
            cur[7] = left;
            out.push(*cur);
            return;
        }
        for k in 0..=left {
            cur[idx] = k;
            rec(idx + 1, left - k, cur, out);
        }
    }
    let mut parts = Vec::new();
    rec(0, total, &mut [0; 8], &mut parts);
    let top = factorial(total);
    parts
        .into_iter()
        .map(|c| {
            let denom: u64 = c.iter().map(|&k| factorial(k)).product();
            (c, top / denom)
        })
        .collect()
}

fn real_or_error<T: Real>(z: Complex<T>, what: &str) -> Result<T> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::numerical(format!("{what}: non-finite value {z}")));
    }
    let scale = if z.re.abs() > T::one() { z.re.abs() } else { T::one() };
    if z.im.abs() > T::imag_guard() * scale {
        return Err(Error::numerical(format!("{what}: imaginary residue {}", z.im)));
    }
    Ok(z.re)
}

/// Depth-one energy `lim E⟨H⟩/n` of the diluted `D`-spin model.
///
/// Sums over how the `D` spins of a term distribute across the eight
/// three-bit strings. Strings with `s_0 ≠ s_2` feel the rest of the
/// graph through the Poisson damping `e^{-d(1 - cos γ)}`.
pub fn diluted_p1_energy<T: Real>(beta: T, gamma: T, cfg: &DSpinConfig) -> Result<T> {
    check_finite(beta, gamma)?;
    cfg.validate()?;
    let d = T::lit(cfg.d);
    let b: Vec<Complex<T>> = (0..8u32).map(|s| b_coefficient(s, &[beta])).collect();
    let damping = (-d * (T::one() - gamma.cos())).exp();
    let mut total = Complex::new(T::zero(), T::zero());
    for (c, mult) in compositions8(cfg.arity) {
        let mut x = 0u32;
        let mut flips = 0usize;
        let mut damped = 0usize;
        let mut weight = Complex::new(T::lit(mult as f64), T::zero());
        for s in 0..8u32 {
            let k = c[s as usize];
            if k == 0 {
                continue;
            }
            if k % 2 == 1 {
                x ^= s;
            }
            let (s0, s1, s2) = (s & 1, (s >> 1) & 1, (s >> 2) & 1);
            // (-1)^{s_p} from the observable and (-1) for each odd string.
            flips += k * (s1 as usize) + if s0 != s1 { k } else { 0 };
            if s0 != s2 {
                damped += k;
            }
            weight = weight * b[s as usize].powu(k as u32);
        }
        if flips % 2 == 1 {
            weight = -weight;
        }
        let phase = Complex::new(T::zero(), phi(x, &[gamma])).exp();
        total = total + weight * phase * damping.powi(damped as i32);
    }
    let prefactor = d / (T::lit(2f64.powi(cfg.arity as i32)) * T::lit(cfg.arity as f64));
    real_or_error(total * prefactor, "diluted energy")
}

/// Same energy normalized per interaction term, `lim E⟨H⟩/(nd/D)`.
pub fn diluted_p1_energy_per_term<T: Real>(beta: T, gamma: T, cfg: &DSpinConfig) -> Result<T> {
    Ok(diluted_p1_energy(beta, gamma, cfg)? * T::lit(cfg.arity as f64 / cfg.d))
}

/// Depth-one energy `lim E⟨H⟩/n` of the dense `D`-spin model:
/// `(iγ/(2·D!)) [(cos β - i sin β·e)^D - (cos β + i sin β·e)^D]` with
/// `e = exp(-γ²/(2(D-1)!))`.
pub fn dense_p1_energy<T: Real>(beta: T, gamma: T, arity: usize) -> Result<T> {
    check_finite(beta, gamma)?;
    check_arity(arity)?;
    let e = (-gamma * gamma / T::lit(2.0 * factorial(arity - 1) as f64)).exp();
    let (sin, cos) = beta.sin_cos();
    let minus = Complex::new(cos, -sin * e).powu(arity as u32);
    let plus = Complex::new(cos, sin * e).powu(arity as u32);
    let bracket = minus - plus;
    let value = Complex::new(T::zero(), gamma / T::lit(2.0 * factorial(arity) as f64)) * bracket;
    real_or_error(value, "dense energy")
}

/// Diluted energy at `(β, γ/√((D-1)! d))`, rescaled so that it tends to
/// [`dense_p1_energy`]`(β, γ, D)` as `d → ∞` with an `O(1/d)` gap.
pub fn diluted_dense_scaled<T: Real>(beta: T, gamma: T, cfg: &DSpinConfig) -> Result<T> {
    cfg.validate()?;
    let scale = T::lit((factorial(cfg.arity - 1) as f64 * cfg.d).sqrt());
    let per_term = diluted_p1_energy_per_term(beta, gamma / scale, cfg)?;
    Ok(per_term * scale / T::lit(factorial(cfg.arity) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_weights_sum_to_eight_power() {
        for d in 1..=7usize {
            let comps = compositions8(d);
            let binom = (1..=7).fold(1u64, |acc, k| acc * (d as u64 + k) / k);
            assert_eq!(comps.len() as u64, binom);
            assert_eq!(comps.iter().map(|(_, m)| m).sum::<u64>(), 8u64.pow(d as u32));
        }
    }

    #[test]
    fn vanishes_at_zero_angles() {
        for arity in 2..=5 {
            let cfg = DSpinConfig::new(arity, 3.0).unwrap();
            assert!(diluted_p1_energy(0.8f64, 0.0, &cfg).unwrap().abs() < 1e-14);
            assert!(diluted_p1_energy(0.0f64, 0.8, &cfg).unwrap().abs() < 1e-14);
            assert!(dense_p1_energy(0.8f64, 0.0, arity).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn two_spin_dense_is_sk_closed_form() {
        for (b, g) in [(0.7, 0.9), (-0.2, 1.7)] {
            let e = dense_p1_energy(b, g, 2).unwrap();
            let sk = g / 2.0 * (2.0f64 * b).sin() * (-g * g / 2.0f64).exp();
            assert!((e - sk).abs() < 1e-14);
        }
    }

    #[test]
    fn two_spin_diluted_is_tree_formula() {
        let cfg = DSpinConfig::new(2, 4.0).unwrap();
        let (b, g) = (0.7f64, 0.9f64);
        let tree = 2.0 * (2.0 * b).sin() * g.sin() * (-4.0 * (1.0 - g.cos())).exp();
        assert!((diluted_p1_energy(b, g, &cfg).unwrap() - tree).abs() < 1e-13);
    }

    #[test]
    fn three_spin_dense_by_hand() {
        // (c - i s e)^3 - (c + i s e)^3 = -2i(3c² s e - s³ e³).
        let (b, g) = (0.4f64, 1.3f64);
        let (s, c) = b.sin_cos();
        let e = (-g * g / 4.0).exp();
        let expect = g / 12.0 * 2.0 * (3.0 * c * c * s * e - s.powi(3) * e.powi(3));
        assert!((dense_p1_energy(b, g, 3).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(DSpinConfig::new(1, 3.0).is_err());
        assert!(DSpinConfig::new(3, 0.0).is_err());
        assert!(dense_p1_energy(f64::NAN, 0.1, 3).is_err());
    }
}
