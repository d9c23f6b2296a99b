//! Derivative-free angle optimization, multi-restart orchestration, and
//! symmetry-aware comparison of angle vectors.

use crate::bitstrings::AngleVector;
use crate::error::{Error, Result};
use crate::instances::derive_seed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Simplex-diameter convergence threshold.
pub const SIMPLEX_TOLERANCE: f64 = 1e-8;

/// Outcome of a local or multi-start search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_angles: AngleVector,
    pub best_value: f64,
    pub restarts_used: usize,
    /// `(restart index, final value)` in restart order.
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub restart: usize,
    pub iterations: usize,
    pub final_value: f64,
}

impl OptimizationResult {
    /// Number of restarts consumed before one reaches `reference - tol`
    /// (1-based); `None` if no restart does.
    pub fn attempts_to_beat(&self, reference: f64, tol: f64) -> Option<usize> {
        self.trace
            .iter()
            .position(|t| t.final_value < reference - tol)
            .map(|i| i + 1)
    }
}

/// Nelder–Mead minimization of `f` from `init`, with at most `budget`
/// function evaluations. Points are clamped to `[-π, π]^{2p}`.
pub fn minimize<F>(f: F, init: &AngleVector, budget: usize) -> Result<OptimizationResult>
where
    F: Fn(&AngleVector) -> Result<f64>,
{
    if budget == 0 {
        return Err(Error::validation("optimization budget must be at least 1"));
    }
    init.validate()?;
    let p = init.p();
    let eval = |x: &[f64]| -> Result<f64> {
        let v = f(&AngleVector::from_flat(x)?)?;
        if !v.is_finite() {
            return Err(Error::numerical(format!("objective returned {v}")));
        }
        Ok(v)
    };
    let (x, value, evals) = nelder_mead(eval, &clamp(&init.to_flat()), budget)?;
    Ok(OptimizationResult {
        best_angles: AngleVector::from_flat(&x)?,
        best_value: value,
        restarts_used: 1,
        trace: vec![TraceEntry {
            restart: 0,
            iterations: evals,
            final_value: value,
        }],
    })
    .map(|r| {
        debug_assert_eq!(r.best_angles.p(), p);
        r
    })
}

fn clamp(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.clamp(-PI, PI)).collect()
}

/// Returns `(argmin, min, evaluations)`.
fn nelder_mead<F>(f: F, x0: &[f64], budget: usize) -> Result<(Vec<f64>, f64, usize)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let dim = x0.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut evals = 0usize;
    let call = |x: &[f64], evals: &mut usize| -> Result<f64> {
        *evals += 1;
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = call(x0, &mut evals)?;
    simplex.push((x0.to_vec(), v0));
    for i in 0..dim {
        if evals >= budget {
            break;
        }
        let mut x = x0.to_vec();
        let step = if x[i] + 0.25 <= PI { 0.25 } else { -0.25 };
        x[i] += step;
        let v = call(&x, &mut evals)?;
        simplex.push((x, v));
    }
    if simplex.len() < dim + 1 {
        let best = simplex
            .into_iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty simplex");
        return Ok((best.0, best.1, evals));
    }
    while evals < budget {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diameter < SIMPLEX_TOLERANCE {
            break;
        }
        let worst = simplex[dim].clone();
        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            clamp(
                &centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect::<Vec<_>>(),
            )
        };
        let xr = along(alpha);
        let fr = call(&xr, &mut evals)?;
        if fr < simplex[0].1 {
            if evals >= budget {
                simplex[dim] = (xr, fr);
                break;
            }
            let xe = along(gamma);
            let fe = call(&xe, &mut evals)?;
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else {
            if evals >= budget {
                break;
            }
            let (xc, fc) = if fr < worst.1 {
                let xc = along(rho * alpha);
                let fc = call(&xc, &mut evals)?;
                (xc, fc)
            } else {
                let xc = along(-rho);
                let fc = call(&xc, &mut evals)?;
                (xc, fc)
            };
            if fc < fr.min(worst.1) {
                simplex[dim] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    if evals >= budget {
                        break;
                    }
                    let x: Vec<f64> = best
                        .iter()
                        .zip(&entry.0)
                        .map(|(b, v)| b + sigma * (v - b))
                        .collect();
                    let v = call(&x, &mut evals)?;
                    *entry = (x, v);
                }
            }
        }
    }
    let best = simplex
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty simplex");
    Ok((best.0, best.1, evals))
}

/// Uniform random angles in `[-π, π]^{2p}`.
pub fn random_angles<R: Rng>(p: usize, rng: &mut R) -> AngleVector {
    let mut draw = || (0..p).map(|_| rng.random_range(-PI..PI)).collect::<Vec<_>>();
    let betas = draw();
    let gammas = draw();
    AngleVector { betas, gammas }
}

/// Initial point of restart `index` for a run keyed by `seed`.
pub fn restart_init(p: usize, seed: u64, index: usize) -> AngleVector {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, index as u64));
    random_angles(p, &mut rng)
}

/// `n_restarts` independent [`minimize`] runs from uniform random starts,
/// run in parallel. The best value wins, ties going to the lower index.
pub fn multi_restart<F>(
    f: F,
    p: usize,
    n_restarts: usize,
    seed: u64,
    budget: usize,
) -> Result<OptimizationResult>
where
    F: Fn(&AngleVector) -> Result<f64> + Sync,
{
    if n_restarts == 0 {
        return Err(Error::validation("need at least one restart"));
    }
    let runs: Vec<OptimizationResult> = (0..n_restarts)
        .into_par_iter()
        .map(|i| minimize(&f, &restart_init(p, seed, i), budget))
        .collect::<Result<_>>()?;
    let mut trace = Vec::with_capacity(n_restarts);
    let mut best: Option<(usize, &OptimizationResult)> = None;
    for (i, r) in runs.iter().enumerate() {
        trace.push(TraceEntry {
            restart: i,
            iterations: r.trace[0].iterations,
            final_value: r.best_value,
        });
        if best.is_none_or(|(_, b)| r.best_value < b.best_value) {
            best = Some((i, r));
        }
    }
    let (_, b) = best.expect("at least one restart");
    Ok(OptimizationResult {
        best_angles: b.best_angles.clone(),
        best_value: b.best_value,
        restarts_used: n_restarts,
        trace,
    })
}

/// [`multi_restart`] in rescaled coordinates `(β, γ̃)` with `γ = γ̃ / scale`,
/// so the random starts cover `|γ| ≤ π/scale`. Suited to functionals
/// whose optimal `γ` shrinks like `1/scale`, such as MaxCut at mean degree
/// `d` with `scale = √d`. Returned angles and values are in the original
/// coordinates.
pub fn multi_restart_rescaled<F>(
    f: F,
    p: usize,
    scale: f64,
    n_restarts: usize,
    seed: u64,
    budget: usize,
) -> Result<OptimizationResult>
where
    F: Fn(&AngleVector) -> Result<f64> + Sync,
{
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::validation(format!("rescaling factor must be positive, got {scale}")));
    }
    let unscale = |a: &AngleVector| AngleVector {
        betas: a.betas.clone(),
        gammas: a.gammas.iter().map(|g| g / scale).collect(),
    };
    let mut r = multi_restart(|a: &AngleVector| f(&unscale(a)), p, n_restarts, seed, budget)?;
    r.best_angles = unscale(&r.best_angles);
    Ok(r)
}

/// Which symmetries the target energy is known to have.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum WeightParity {
    /// Two-body Hamiltonian with integer couplings (unweighted MaxCut):
    /// `β_j` has period `π` and `γ_j` period `2π`.
    #[default]
    UnweightedMaxCut,
    /// Any two-body Hamiltonian: `β_j` has period `π`, `γ_j` is free.
    Weighted,
}

/// Canonical representative of an angle vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedAngles {
    pub angles: AngleVector,
    pub parity: WeightParity,
}

fn wrap(x: f64, period: f64) -> f64 {
    // Representative in [-period/2, period/2).
    let half = period / 2.0;
    if (-half..half).contains(&x) {
        return x;
    }
    let r = (x + half).rem_euclid(period) - half;
    if r >= half {
        r - period
    } else {
        r
    }
}

fn reduce(a: &AngleVector, parity: WeightParity) -> AngleVector {
    AngleVector {
        betas: a.betas.iter().map(|&b| wrap(b, PI)).collect(),
        gammas: match parity {
            WeightParity::UnweightedMaxCut => a.gammas.iter().map(|&g| wrap(g, 2.0 * PI)).collect(),
            WeightParity::Weighted => a.gammas.clone(),
        },
    }
}

/// Reduces `β_j` mod `π` (and `γ_j` mod `2π` for unweighted MaxCut), then
/// applies the global sign flip `(β, γ) → (-β, -γ)` if the first nonzero
/// `γ_j` (or, failing that, `β_j`) is negative.
pub fn standardize(a: &AngleVector, parity: WeightParity) -> StandardizedAngles {
    let r = reduce(a, parity);
    let lead = r
        .gammas
        .iter()
        .chain(&r.betas)
        .copied()
        .find(|v| *v != 0.0)
        .unwrap_or(0.0);
    let angles = if lead < 0.0 {
        reduce(
            &AngleVector {
                betas: r.betas.iter().map(|b| -b).collect(),
                gammas: r.gammas.iter().map(|g| -g).collect(),
            },
            parity,
        )
    } else {
        r
    };
    StandardizedAngles { angles, parity }
}

/// Which coordinates enter [`angle_distance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngleSubset {
    All,
    Betas,
    Gammas,
}

/// Root-mean-square torus distance normalized to `[0, 1]`: each `β_j`
/// difference is taken mod `π` and divided by `π/2`, each `γ_j`
/// difference mod `2π` and divided by `π`.
pub fn torus_distance(a: &AngleVector, b: &AngleVector, subset: AngleSubset) -> Result<f64> {
    if a.p() != b.p() {
        return Err(Error::validation(format!("depth mismatch: {} vs {}", a.p(), b.p())));
    }
    let comp = |x: f64, y: f64, period: f64| wrap(x - y, period).abs() / (period / 2.0);
    let mut parts = Vec::new();
    if subset != AngleSubset::Gammas {
        parts.extend(a.betas.iter().zip(&b.betas).map(|(x, y)| comp(*x, *y, PI)));
    }
    if subset != AngleSubset::Betas {
        parts.extend(a.gammas.iter().zip(&b.gammas).map(|(x, y)| comp(*x, *y, 2.0 * PI)));
    }
    Ok((parts.iter().map(|u| u * u).sum::<f64>() / parts.len() as f64).sqrt())
}

/// [`torus_distance`] between standardized representatives.
pub fn angle_distance(
    a: &StandardizedAngles,
    b: &StandardizedAngles,
    subset: AngleSubset,
) -> Result<f64> {
    torus_distance(&a.angles, &b.angles, subset)
}
