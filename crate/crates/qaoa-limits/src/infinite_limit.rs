//! Infinite-size QAOA energies for MaxCut on Erdős–Rényi and pseudo
//! Chung-Lu graphs and for the Sherrington–Kirkpatrick model.
//!
//! Every energy is a quadratic form `Σ_{s,t} a_s a_t K(s ⊕ t)` over the
//! `2^{2p+1}` bitstrings, with `a_s = (-1)^{[s odd]} (-1)^{s_p} B_s R_s` and a
//! kernel depending only on the XOR. The `R_s` come from a recursion that
//! walks levels of symmetry downward and only looks at strictly higher
//! levels. Both the recursion sums and the final form are XOR convolutions,
//! so they are evaluated with Walsh–Hadamard transforms in `O(p·N log N)`.
//!
//! Exponents are accumulated and exponentiated once per string.
//!
//! Returned energies are intensive: `lim E⟨H⟩/n`, with `H = Σ_{j<k} J_jk Z_j Z_k`.

use crate::bitstrings::{kernel_hat, xor_convolve, xor_quadratic_form, AngleVector, BitstringTable};
use crate::error::{Error, Result};
use crate::scalar::Real;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Which recursion produced an [`RTable`].
#[derive(Debug, Clone, PartialEq)]
pub enum RKind<T = f64> {
    ErdosRenyi { d: T },
    SherringtonKirkpatrick,
    ChungLu { dist: DegreeDistribution },
}

/// Complex `R_s` values. For Chung-Lu tables the value of `(s, l)` lives at
/// index `l * 2^{2p+1} + s`.
#[derive(Debug, Clone)]
pub struct RTable<T: Real = f64> {
    pub p: usize,
    pub kind: RKind<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> RTable<T> {
    /// `R_s` (or `R_{(s,0)}` for Chung-Lu).
    pub fn get(&self, s: u32) -> Complex<T> {
        self.values[s as usize]
    }

    /// `R_{(s,l)}` for Chung-Lu tables.
    pub fn get_labelled(&self, s: u32, label: usize) -> Complex<T> {
        self.values[label * (1usize << (2 * self.p + 1)) + s as usize]
    }
}

/// Expected-degree mixture `{(d_l, q_l)}` for the pseudo Chung-Lu ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    pub degrees: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl DegreeDistribution {
    pub fn new(degrees: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        let dist = Self {
            degrees,
            probabilities,
        };
        dist.validate()?;
        Ok(dist)
    }

    /// Single-label distribution, which is the Erdős–Rényi ensemble.
    pub fn single(d: f64) -> Result<Self> {
        Self::new(vec![d], vec![1.0])
    }

    pub fn validate(&self) -> Result<()> {
        if self.degrees.is_empty() || self.degrees.len() != self.probabilities.len() {
            return Err(Error::validation(
                "degree distribution needs matching non-empty degree and probability lists",
            ));
        }
        if self.degrees.iter().any(|d| !d.is_finite() || *d <= 0.0) {
            return Err(Error::validation("expected degrees must be finite and positive"));
        }
        if self
            .probabilities
            .iter()
            .any(|q| !q.is_finite() || *q < 0.0 || *q > 1.0)
        {
            return Err(Error::validation("label probabilities must lie in [0, 1]"));
        }
        let total: f64 = self.probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::validation(format!(
                "label probabilities sum to {total}, expected 1"
            )));
        }
        Ok(())
    }

    pub fn labels(&self) -> usize {
        self.degrees.len()
    }

    /// `d̄ = Σ_l q_l d_l`.
    pub fn mean_degree(&self) -> f64 {
        self.degrees
            .iter()
            .zip(&self.probabilities)
            .map(|(d, q)| d * q)
            .sum()
    }
}

fn check_degree<T: Real>(d: T) -> Result<()> {
    if !d.is_finite() || d < T::zero() {
        return Err(Error::validation(format!("degree must be finite and non-negative, got {d}")));
    }
    Ok(())
}

/// Exponent contributed by the level-`p` strings, `Σ_{L(t)=p} (-1)^{[t odd]} B_t K(s⊕t)`,
/// for every `s`.
fn top_level_sums<T: Real>(table: &BitstringTable<T>, k_hat: &[Complex<T>]) -> Vec<Complex<T>> {
    let p = table.p();
    let signed = table.signed_b();
    let w: Vec<Complex<T>> = (0..table.len())
        .map(|t| {
            if table.layout.level[t] as usize == p {
                signed[t]
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
        .collect();
    xor_convolve(&w, k_hat)
}

/// Shared downward recursion for the ER and SK kinds:
/// `R_s = exp(base_s + mid · Σ_{L(s)<L(t)<p} (-1)^{[t odd]} B_t R_t K(s⊕t))`.
fn descend<T: Real>(
    table: &BitstringTable<T>,
    k_hat: &[Complex<T>],
    base: &[Complex<T>],
    mid: Complex<T>,
) -> Vec<Complex<T>> {
    let p = table.p();
    let n = table.len();
    let level = &table.layout.level;
    let signed = table.signed_b();
    let zero = Complex::new(T::zero(), T::zero());
    let mut r = vec![zero; n];
    let mut w = vec![zero; n];
    for l in (0..=p).rev() {
        let conv = if l + 2 <= p {
            Some(xor_convolve(&w, k_hat))
        } else {
            None
        };
        for s in 0..n {
            if level[s] as usize != l {
                continue;
            }
            let mut e = base[s];
            if let Some(c) = &conv {
                e = e + mid * c[s];
            }
            r[s] = e.exp();
        }
        if l < p {
            for t in 0..n {
                if level[t] as usize == l {
                    w[t] = signed[t] * r[t];
                }
            }
        }
    }
    r
}

/// `R_s` for MaxCut on Erdős–Rényi graphs of average degree `d`.
///
/// Runs in `O(p · N log N)` with `N = 2^{2p+1}`.
pub fn compute_r_er<T: Real>(angles: &AngleVector<T>, d: T) -> Result<RTable<T>> {
    check_degree(d)?;
    let table = BitstringTable::new(angles)?;
    Ok(r_er_from_table(&table, d))
}

fn exp_i_phi_hat<T: Real>(table: &BitstringTable<T>) -> Vec<Complex<T>> {
    let k: Vec<Complex<T>> = table.phi.iter().map(|&f| Complex::new(T::zero(), f).exp()).collect();
    kernel_hat(&k)
}

fn r_er_from_table<T: Real>(table: &BitstringTable<T>, d: T) -> RTable<T> {
    let k_hat = exp_i_phi_hat(table);
    let half = T::lit(0.5);
    let base: Vec<Complex<T>> = top_level_sums(table, &k_hat)
        .into_iter()
        .map(|top| (Complex::new(T::one(), T::zero()) - top * half) * (-d))
        .collect();
    let values = descend(table, &k_hat, &base, Complex::new(d * half, T::zero()));
    RTable {
        p: table.p(),
        kind: RKind::ErdosRenyi { d },
        values,
    }
}

/// `R̃_s` for the SK model: the recursion with the quadratic kernel `φ²`.
pub fn compute_r_sk<T: Real>(angles: &AngleVector<T>) -> Result<RTable<T>> {
    let table = BitstringTable::new(angles)?;
    Ok(r_sk_from_table(&table))
}

fn phi_squared_hat<T: Real>(table: &BitstringTable<T>) -> Vec<Complex<T>> {
    let k: Vec<Complex<T>> = table.phi.iter().map(|&f| Complex::new(f * f, T::zero())).collect();
    kernel_hat(&k)
}

fn r_sk_from_table<T: Real>(table: &BitstringTable<T>) -> RTable<T> {
    let k_hat = phi_squared_hat(table);
    let quarter = T::lit(-0.25);
    let base: Vec<Complex<T>> = top_level_sums(table, &k_hat)
        .into_iter()
        .map(|top| top * quarter)
        .collect();
    let values = descend(table, &k_hat, &base, Complex::new(quarter, T::zero()));
    RTable {
        p: table.p(),
        kind: RKind::SherringtonKirkpatrick,
        values,
    }
}

/// `a_s = (-1)^{[s odd]} (-1)^{s_p} B_s R_s`.
fn signed_amplitudes<T: Real>(table: &BitstringTable<T>, r: &[Complex<T>]) -> Vec<Complex<T>> {
    (0..table.len())
        .map(|s| table.b[s] * r[s] * table.layout.observable_sign::<T>(s as u32))
        .collect()
}

fn real_part<T: Real>(z: Complex<T>, what: &str) -> Result<T> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::numerical(format!("{what}: non-finite energy {z}")));
    }
    let scale = if z.re.abs() > T::one() { z.re.abs() } else { T::one() };
    if z.im.abs() > T::imag_guard() * scale {
        return Err(Error::numerical(format!(
            "{what}: imaginary residue {} exceeds guard",
            z.im
        )));
    }
    Ok(z.re)
}

/// `lim E⟨H⟩/n` for MaxCut-QAOA on `ER(n, d/(n-1))`:
/// `(d/8) Σ_{s,t} a_s a_t e^{iφ(s⊕t)}`.
pub fn er_energy_per_vertex<T: Real>(angles: &AngleVector<T>, d: T) -> Result<T> {
    check_degree(d)?;
    let table = BitstringTable::new(angles)?;
    let r = r_er_from_table(&table, d);
    let a = signed_amplitudes(&table, &r.values);
    let q = xor_quadratic_form(&a, &exp_i_phi_hat(&table));
    real_part(q * (d / T::lit(8.0)), "ER energy")
}

/// Energy per edge, `lim E⟨H⟩/(nd/2)`. Zero when `d = 0`.
pub fn er_energy_per_edge<T: Real>(angles: &AngleVector<T>, d: T) -> Result<T> {
    let e = er_energy_per_vertex(angles, d)?;
    if d == T::zero() {
        return Ok(T::zero());
    }
    Ok(e / (d / T::lit(2.0)))
}

/// `lim E⟨H⟩/n` for the SK model with `J_jk ~ N(0, 1/n)`:
/// `(1/8) Σ_{s,t} iφ(s⊕t) a_s a_t` built on `R̃`.
pub fn sk_energy_per_vertex<T: Real>(angles: &AngleVector<T>) -> Result<T> {
    let table = BitstringTable::new(angles)?;
    let r = r_sk_from_table(&table);
    let a = signed_amplitudes(&table, &r.values);
    let k: Vec<Complex<T>> = table.phi.iter().map(|&f| Complex::new(T::zero(), f)).collect();
    let q = xor_quadratic_form(&a, &kernel_hat(&k));
    real_part(q / T::lit(8.0), "SK energy")
}

/// Labelled `R_{(s,l)}` for the pseudo Chung-Lu ensemble.
///
/// A vertex of label `l` sees Poisson neighbours of label `l'` at rate
/// `d_l d_{l'} q_{l'} / d̄`, so the middle-level sum weights `R_{(t,l')}`
/// by `d_l d_{l'} q_{l'} / (2 d̄)`.
pub fn compute_r_chung_lu<T: Real>(
    angles: &AngleVector<T>,
    dist: &DegreeDistribution,
) -> Result<RTable<T>> {
    dist.validate()?;
    let table = BitstringTable::new(angles)?;
    Ok(r_chung_lu_from_table(&table, dist))
}

fn r_chung_lu_from_table<T: Real>(table: &BitstringTable<T>, dist: &DegreeDistribution) -> RTable<T> {
    let p = table.p();
    let n = table.len();
    let labels = dist.labels();
    let dbar = T::lit(dist.mean_degree());
    let degrees: Vec<T> = dist.degrees.iter().map(|&d| T::lit(d)).collect();
    let probs: Vec<T> = dist.probabilities.iter().map(|&q| T::lit(q)).collect();
    let k_hat = exp_i_phi_hat(table);
    let top = top_level_sums(table, &k_hat);
    let signed = table.signed_b();
    let level = &table.layout.level;
    let half = T::lit(0.5);
    let one = Complex::new(T::one(), T::zero());
    let zero = Complex::new(T::zero(), T::zero());

    let mut values = vec![one; labels * n];
    // Aggregated middle-level weights (-1)^{[t odd]} B_t Σ_l q_l d_l R_{(t,l)}.
    let mut w = vec![zero; n];
    for l in (0..p).rev() {
        let conv = if l + 2 <= p {
            Some(xor_convolve(&w, &k_hat))
        } else {
            None
        };
        for s in 0..n {
            if level[s] as usize != l {
                continue;
            }
            for (lab, &dl) in degrees.iter().enumerate() {
                let mut e = (one - top[s] * half) * (-dl);
                if let Some(c) = &conv {
                    e = e + c[s] * (dl / (dbar * T::lit(2.0)));
                }
                values[lab * n + s] = e.exp();
            }
        }
        for t in 0..n {
            if level[t] as usize == l {
                let agg = (0..labels).fold(zero, |acc, lab| {
                    acc + values[lab * n + t] * (probs[lab] * degrees[lab])
                });
                w[t] = signed[t] * agg;
            }
        }
    }
    RTable {
        p,
        kind: RKind::ChungLu { dist: dist.clone() },
        values,
    }
}

/// `lim E⟨H⟩/n` for MaxCut-QAOA on the pseudo Chung-Lu ensemble:
/// `(1/(8 d̄)) Σ_{s,t} A_s A_t e^{iφ(s⊕t)}` with
/// `A_s = (-1)^{[s odd]} (-1)^{s_p} B_s Σ_l q_l d_l R_{(s,l)}`.
pub fn chung_lu_energy_per_vertex<T: Real>(
    angles: &AngleVector<T>,
    dist: &DegreeDistribution,
) -> Result<T> {
    dist.validate()?;
    let table = BitstringTable::new(angles)?;
    let r = r_chung_lu_from_table(&table, dist);
    let n = table.len();
    let a: Vec<Complex<T>> = (0..n)
        .map(|s| {
            let agg = (0..dist.labels()).fold(Complex::new(T::zero(), T::zero()), |acc, lab| {
                acc + r.values[lab * n + s]
                    * T::lit(dist.probabilities[lab] * dist.degrees[lab])
            });
            table.b[s] * agg * table.layout.observable_sign::<T>(s as u32)
        })
        .collect();
    let q = xor_quadratic_form(&a, &exp_i_phi_hat(&table));
    real_part(q / (T::lit(8.0) * T::lit(dist.mean_degree())), "Chung-Lu energy")
}

/// Maps SK angles to MaxCut angles for degree `d`: `(β, γ/√d)`.
pub fn transfer_sk_to_er<T: Real>(sk_angles: &AngleVector<T>, d: T) -> Result<AngleVector<T>> {
    if !(d > T::zero()) || !d.is_finite() {
        return Err(Error::validation(format!("transfer degree must be positive, got {d}")));
    }
    sk_angles.validate()?;
    let root = d.sqrt();
    Ok(AngleVector {
        betas: sk_angles.betas.clone(),
        gammas: sk_angles.gammas.iter().map(|&g| g / root).collect(),
    })
}

/// ER energy at transferred angles, rescaled so that it tends to the SK
/// energy: `E_ER(β, γ/√d; d) / √d`, which equals
/// `√d · E_ER/(nd)` and converges to `sk_energy_per_vertex(β, γ)` with an
/// `O(1/√d)` gap.
pub fn er_energy_sk_scaled<T: Real>(sk_angles: &AngleVector<T>, d: T) -> Result<T> {
    let transferred = transfer_sk_to_er(sk_angles, d)?;
    Ok(er_energy_per_vertex(&transferred, d)? / d.sqrt())
}

/// `Σ_s (-1)^{[s odd]} (-1)^{s_p} B_s R_s`, which vanishes for the ER and
/// SK recursions.
pub fn antisymmetry_residual<T: Real>(angles: &AngleVector<T>, r: &RTable<T>) -> Result<Complex<T>> {
    let table = BitstringTable::new(angles)?;
    Ok(signed_amplitudes(&table, &r.values[..table.len()])
        .into_iter()
        .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b))
}
