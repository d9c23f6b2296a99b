//! Random instance generators: Erdős–Rényi and pseudo Chung-Lu graphs,
//! and SK coupling matrices. Every sampler is a pure function of its
//! parameters and seed.

use crate::error::{Error, Result};
use crate::infinite_limit::DegreeDistribution;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Undirected simple graph; `labels[v]` indexes a degree class when present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphInstance {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<usize>>,
}

impl GraphInstance {
    pub fn new(n: usize, edges: Vec<(usize, usize)>, labels: Option<Vec<usize>>) -> Result<Self> {
        let g = Self { n, edges, labels };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &(i, j) in &self.edges {
            if i == j {
                return Err(Error::validation(format!("self-loop at vertex {i}")));
            }
            if i >= self.n || j >= self.n {
                return Err(Error::validation(format!("edge ({i}, {j}) outside {} vertices", self.n)));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::validation(format!("duplicate edge ({i}, {j})")));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.n {
                return Err(Error::validation("one label per vertex required"));
            }
        }
        Ok(())
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }
}

/// Symmetric SK couplings with zero diagonal, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkInstance {
    pub n: usize,
    pub couplings: Vec<f64>,
}

impl SkInstance {
    pub fn coupling(&self, j: usize, k: usize) -> f64 {
        self.couplings[j * self.n + k]
    }
}

/// Independent 64-bit seed for item `index` of a run keyed by `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// `ER(n, d/(n-1))`: every pair is an edge independently with
/// probability `d/(n-1)`, so `d` is the expected degree.
pub fn sample_er(n: usize, d: f64, seed: u64) -> Result<GraphInstance> {
    if n < 2 {
        return Err(Error::validation(format!("need n >= 2, got {n}")));
    }
    if !d.is_finite() || d < 0.0 || d > (n - 1) as f64 {
        return Err(Error::validation(format!("degree {d} outside [0, {}]", n - 1)));
    }
    let prob = d / (n - 1) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < prob {
                edges.push((i, j));
            }
        }
    }
    Ok(GraphInstance {
        n,
        edges,
        labels: None,
    })
}

/// Sufficient size for the pseudo Chung-Lu ensemble to be well defined,
/// `1 + (max d)² / min d`. The sampler itself only requires every pair
/// probability to be at most one, i.e. `n ≥ 1 + (max d)² / d̄`.
pub fn chung_lu_min_size(dist: &DegreeDistribution) -> f64 {
    let max = dist.degrees.iter().cloned().fold(f64::MIN, f64::max);
    let min = dist.degrees.iter().cloned().fold(f64::MAX, f64::min);
    1.0 + max * max / min
}

/// Smallest admissible `n`: `1 + (max d)² / d̄`.
pub fn chung_lu_required_size(dist: &DegreeDistribution) -> f64 {
    let max = dist.degrees.iter().cloned().fold(f64::MIN, f64::max);
    1.0 + max * max / dist.mean_degree()
}

/// Pseudo Chung-Lu graph: labels drawn i.i.d. from `q`, then an edge
/// between labels `l, l'` with probability `d_l d_{l'} / ((n-1) d̄)`.
pub fn sample_chung_lu(n: usize, dist: &DegreeDistribution, seed: u64) -> Result<GraphInstance> {
    dist.validate()?;
    if n < 2 || (n as f64) < chung_lu_required_size(dist) {
        return Err(Error::validation(format!(
            "n = {n} too small: some pair probability would exceed one (need n >= {:.3})",
            chung_lu_required_size(dist)
        )));
    }
    let dbar = dist.mean_degree();
    let labels_dist = WeightedIndex::new(&dist.probabilities)
        .map_err(|e| Error::validation(format!("label probabilities: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = (0..n).map(|_| labels_dist.sample(&mut rng)).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let prob = dist.degrees[labels[i]] * dist.degrees[labels[j]] / ((n - 1) as f64 * dbar);
            if rng.random::<f64>() < prob {
                edges.push((i, j));
            }
        }
    }
    Ok(GraphInstance {
        n,
        edges,
        labels: Some(labels),
    })
}

/// SK couplings `J_jk = J_kj ~ N(0, 1/n)`.
pub fn sample_sk(n: usize, seed: u64) -> Result<SkInstance> {
    if n < 2 {
        return Err(Error::validation(format!("need n >= 2, got {n}")));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut couplings = vec![0.0; n * n];
    for j in 0..n {
        for k in (j + 1)..n {
            let x: f64 = rng.sample(StandardNormal);
            couplings[j * n + k] = x * scale;
            couplings[k * n + j] = x * scale;
        }
    }
    Ok(SkInstance { n, couplings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extreme_degrees() {
        assert!(sample_er(7, 0.0, 1).unwrap().edges.is_empty());
        assert_eq!(sample_er(7, 6.0, 1).unwrap().edges.len(), 21);
        assert!(sample_er(7, 6.5, 1).is_err());
        assert!(sample_er(1, 0.0, 1).is_err());
    }

    #[test]
    fn sk_is_symmetric_and_seeded() {
        let a = sample_sk(6, 3).unwrap();
        for j in 0..6 {
            assert_eq!(a.coupling(j, j), 0.0);
            for k in 0..6 {
                assert_eq!(a.coupling(j, k), a.coupling(k, j));
            }
        }
        assert_eq!(a, sample_sk(6, 3).unwrap());
        assert_ne!(a, sample_sk(6, 4).unwrap());
    }

    #[test]
    fn chung_lu_validity_bound() {
        let dist = DegreeDistribution::new(vec![4.0, 9.0], vec![2.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((chung_lu_min_size(&dist) - 21.25).abs() < 1e-12);
        // 81 / (15 · 17/3) < 1, so sixteen vertices are admissible.
        assert!((chung_lu_required_size(&dist) - (1.0 + 81.0 * 3.0 / 17.0)).abs() < 1e-12);
        assert!(sample_chung_lu(16, &dist, 0).is_ok());
        assert!(sample_chung_lu(15, &dist, 0).is_err());
        let g = sample_chung_lu(40, &dist, 0).unwrap();
        assert_eq!(g.labels.as_ref().unwrap().len(), 40);
        g.validate().unwrap();
    }

    #[test]
    fn graph_validation() {
        assert!(GraphInstance::new(3, vec![(0, 0)], None).is_err());
        assert!(GraphInstance::new(3, vec![(0, 1), (1, 0)], None).is_err());
        assert!(GraphInstance::new(3, vec![(0, 3)], None).is_err());
        assert_eq!(GraphInstance::new(3, vec![(0, 1), (1, 2)], None).unwrap().degrees(), vec![1, 2, 1]);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_eq!(derive_seed(5, 9), derive_seed(5, 9));
    }
}
