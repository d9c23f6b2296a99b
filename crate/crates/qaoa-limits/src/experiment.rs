//! Warm-start experiments on small random graphs: angles predicted from an
//! infinite-size formula are compared against many random-start local
//! optimizations on exactly simulated instances.

use crate::angle_tools::{
    angle_distance, minimize, multi_restart, standardize, AngleSubset, OptimizationResult, WeightParity,
};
use crate::bitstrings::AngleVector;
use crate::error::{Error, Result};
use crate::infinite_limit::{sk_energy_per_vertex, transfer_sk_to_er, DegreeDistribution};
use crate::instances::{derive_seed, sample_chung_lu, sample_er, GraphInstance};
use crate::simulator::{IsingHamiltonian, QaoaSimulator, Workspace, MAX_QUBITS};
use serde::{Deserialize, Serialize};
use std::cell::RefCell;

/// Relative energy tolerance under which two local optima count as equal.
pub const MATCH_TOLERANCE: f64 = 1e-4;

/// Largest graph accepted by [`run_guessed_angles`].
pub const MAX_EXPERIMENT_VERTICES: usize = 20;

/// Random graph family the instances are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Ensemble {
    Er { d: f64 },
    ChungLu { distribution: DegreeDistribution },
}

impl Ensemble {
    pub fn mean_degree(&self) -> f64 {
        match self {
            Ensemble::Er { d } => *d,
            Ensemble::ChungLu { distribution } => distribution.mean_degree(),
        }
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<GraphInstance> {
        match self {
            Ensemble::Er { d } => sample_er(n, *d, seed),
            Ensemble::ChungLu { distribution } => sample_chung_lu(n, distribution, seed),
        }
    }
}

/// Parameters of a guessed-angles run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub ensemble: Ensemble,
    pub n: usize,
    pub p: usize,
    pub instances: usize,
    pub restarts: usize,
    /// Evaluation budget of every local optimization, warm or random.
    pub budget: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n > MAX_EXPERIMENT_VERTICES {
            return Err(Error::resource(format!(
                "experiment graphs must have 2..={MAX_EXPERIMENT_VERTICES} vertices, got {}",
                self.n
            )));
        }
        debug_assert!(MAX_EXPERIMENT_VERTICES <= MAX_QUBITS);
        if self.p == 0 || self.instances == 0 || self.restarts == 0 || self.budget == 0 {
            return Err(Error::validation("p, instances, restarts and budget must be positive"));
        }
        Ok(())
    }
}

/// Outcome on one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub index: usize,
    pub seed: u64,
    pub edges: usize,
    /// `⟨H⟩` at the guessed angles.
    pub guess_energy: f64,
    /// Local optimum reached from the guessed angles.
    pub warm_energy: f64,
    pub warm_angles: AngleVector,
    pub best_random_energy: f64,
    pub best_random_angles: AngleVector,
    /// First random restart (1-based) whose optimum matches or beats the
    /// warm start; `None` if none of them does.
    pub attempts_to_match: Option<usize>,
    pub warm_at_least_as_good: bool,
    /// Distances between the guess and the best angles found overall.
    pub distance_all: f64,
    pub distance_betas: f64,
    pub distance_gammas: f64,
    pub random_trace: OptimizationResult,
}

/// Aggregates over all instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub fraction_warm_at_least_as_good: f64,
    /// Mean of `attempts_to_match`, counting unmatched instances as
    /// `restarts + 1`.
    pub mean_attempts_to_match: f64,
    pub unmatched_instances: usize,
    pub mean_distance_all: f64,
    pub mean_distance_betas: f64,
    pub mean_distance_gammas: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub guess: AngleVector,
    pub instances: Vec<InstanceReport>,
    pub summary: ExperimentSummary,
}

/// SK-optimal angles at depth `p` from `restarts` random starts, rescaled
/// to mean degree `d`.
pub fn sk_transferred_guess(p: usize, d: f64, restarts: usize, seed: u64, budget: usize) -> Result<AngleVector> {
    let sk = multi_restart(sk_energy_per_vertex, p, restarts, seed, budget)?;
    transfer_sk_to_er(&sk.best_angles, d)
}

fn matches_or_beats(value: f64, reference: f64) -> bool {
    value <= reference + MATCH_TOLERANCE * reference.abs().max(1.0)
}

/// Runs the warm-start comparison on `cfg.instances` sampled graphs.
pub fn run_guessed_angles(cfg: &ExperimentConfig, guess: &AngleVector) -> Result<ExperimentReport> {
    cfg.validate()?;
    guess.validate()?;
    if guess.p() != cfg.p {
        return Err(Error::validation(format!("guess has depth {}, expected {}", guess.p(), cfg.p)));
    }
    thread_local! {
        static WORKSPACE: RefCell<Workspace<f64>> = RefCell::new(Workspace::default());
    }
    let mut reports = Vec::with_capacity(cfg.instances);
    for index in 0..cfg.instances {
        let seed = derive_seed(cfg.seed, index as u64);
        let graph = cfg.ensemble.sample(cfg.n, seed)?;
        let sim = QaoaSimulator::new(&IsingHamiltonian::from_graph(&graph)?)?;
        let energy = |a: &AngleVector| WORKSPACE.with(|ws| sim.energy_with(a, &mut ws.borrow_mut()));
        let guess_energy = energy(guess)?;
        let warm = minimize(energy, guess, cfg.budget)?;
        let random = multi_restart(energy, cfg.p, cfg.restarts, derive_seed(seed, 1), cfg.budget)?;
        let attempts_to_match = random
            .trace
            .iter()
            .position(|t| matches_or_beats(t.final_value, warm.best_value))
            .map(|i| i + 1);
        let optimum = if warm.best_value <= random.best_value {
            &warm.best_angles
        } else {
            &random.best_angles
        };
        let (g, o) = (
            standardize(guess, WeightParity::UnweightedMaxCut),
            standardize(optimum, WeightParity::UnweightedMaxCut),
        );
        reports.push(InstanceReport {
            index,
            seed,
            edges: graph.edges.len(),
            guess_energy,
            warm_energy: warm.best_value,
            warm_angles: warm.best_angles.clone(),
            best_random_energy: random.best_value,
            best_random_angles: random.best_angles.clone(),
            attempts_to_match,
            warm_at_least_as_good: matches_or_beats(warm.best_value, random.best_value),
            distance_all: angle_distance(&g, &o, AngleSubset::All)?,
            distance_betas: angle_distance(&g, &o, AngleSubset::Betas)?,
            distance_gammas: angle_distance(&g, &o, AngleSubset::Gammas)?,
            random_trace: random,
        });
    }
    let count = reports.len() as f64;
    let mean = |f: &dyn Fn(&InstanceReport) -> f64| reports.iter().map(f).sum::<f64>() / count;
    let summary = ExperimentSummary {
        fraction_warm_at_least_as_good: mean(&|r| if r.warm_at_least_as_good { 1.0 } else { 0.0 }),
        mean_attempts_to_match: mean(&|r| r.attempts_to_match.unwrap_or(cfg.restarts + 1) as f64),
        unmatched_instances: reports.iter().filter(|r| r.attempts_to_match.is_none()).count(),
        mean_distance_all: mean(&|r| r.distance_all),
        mean_distance_betas: mean(&|r| r.distance_betas),
        mean_distance_gammas: mean(&|r| r.distance_gammas),
    };
    Ok(ExperimentReport {
        guess: guess.clone(),
        instances: reports,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            ensemble: Ensemble::Er { d: 3.0 },
            n: 8,
            p: 1,
            instances: 2,
            restarts: 4,
            budget: 150,
            seed: 3,
        }
    }

    #[test]
    fn small_run_is_consistent_and_reproducible() {
        let cfg = small_config();
        let guess = sk_transferred_guess(1, 3.0, 4, 0, 500).unwrap();
        let a = run_guessed_angles(&cfg, &guess).unwrap();
        assert_eq!(a, run_guessed_angles(&cfg, &guess).unwrap());
        for r in &a.instances {
            assert!(r.warm_energy <= r.guess_energy + 1e-12);
            assert_eq!(r.random_trace.trace.len(), 4);
            assert!((0.0..=1.0).contains(&r.distance_all));
            if let Some(k) = r.attempts_to_match {
                assert!(matches_or_beats(r.random_trace.trace[k - 1].final_value, r.warm_energy));
            }
        }
    }

    #[test]
    fn rejects_oversized_and_mismatched() {
        let mut cfg = small_config();
        let guess = AngleVector::new(vec![0.1], vec![0.2]).unwrap();
        cfg.n = 21;
        assert!(matches!(run_guessed_angles(&cfg, &guess), Err(Error::Resource(_))));
        cfg.n = 8;
        cfg.p = 2;
        assert!(run_guessed_angles(&cfg, &guess).is_err());
    }
}
