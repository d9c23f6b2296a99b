use approx::{assert_abs_diff_eq, assert_relative_eq};
use qaoa_limits::dspin_p1::{dense_p1_energy, diluted_dense_scaled, diluted_p1_energy, DSpinConfig};
use qaoa_limits::experiment::{run_guessed_angles, Ensemble, ExperimentConfig};
use qaoa_limits::infinite_limit::{
    chung_lu_energy_per_vertex, er_energy_per_vertex, er_energy_sk_scaled, sk_energy_per_vertex,
    DegreeDistribution,
};
use qaoa_limits::instances::{derive_seed, sample_sk};
use qaoa_limits::simulator::{expected_energy, IsingHamiltonian};
use qaoa_limits::sk_montecarlo::{exact_sk_energy_p1, summarize, SkSampler};
use qaoa_limits::{Angles, Angles32};

fn depth_two() -> Angles {
    Angles::new(vec![-0.7, -0.4], vec![0.5, 1.1]).unwrap()
}

#[test]
fn two_spin_models_reduce_to_maxcut_and_sk() {
    for &(beta, gamma) in &[(0.3, 0.4), (-0.7, 1.2), (1.1, -2.5)] {
        let a = Angles::new(vec![beta], vec![gamma]).unwrap();
        for d in [1.0, 3.0, 7.5] {
            let diluted = diluted_p1_energy(beta, gamma, &DSpinConfig::new(2, d).unwrap()).unwrap();
            assert_abs_diff_eq!(diluted, er_energy_per_vertex(&a, d).unwrap(), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(
            dense_p1_energy(beta, gamma, 2).unwrap(),
            sk_energy_per_vertex(&a).unwrap(),
            epsilon = 1e-12
        );
    }
}

#[test]
fn one_label_chung_lu_is_erdos_renyi() {
    let a = depth_two();
    for d in [2.0, 5.0] {
        let cl = chung_lu_energy_per_vertex(&a, &DegreeDistribution::single(d).unwrap()).unwrap();
        assert_relative_eq!(cl, er_energy_per_vertex(&a, d).unwrap(), max_relative = 1e-12);
    }
}

#[test]
fn rescaled_sparse_energies_approach_dense_limits() {
    let a = depth_two();
    let sk = sk_energy_per_vertex(&a).unwrap();
    let gaps: Vec<f64> = [50.0, 200.0, 800.0]
        .iter()
        .map(|&d| (er_energy_sk_scaled(&a, d).unwrap() - sk).abs())
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] < 1e-3, "{gaps:?}");

    let (beta, gamma) = (-0.5f64, 1.3f64);
    let dense = dense_p1_energy(beta, gamma, 3).unwrap();
    let gap = |d: f64| (diluted_dense_scaled(beta, gamma, &DSpinConfig::new(3, d).unwrap()).unwrap() - dense).abs();
    // An O(1/d) gap shrinks about fourfold when d grows fourfold.
    let ratio = gap(100.0) / gap(400.0);
    assert!((3.0..5.0).contains(&ratio), "gap ratio {ratio}");
}

#[test]
fn single_precision_limits_track_double_precision() {
    let a = depth_two();
    let a32: Angles32 = a.cast();
    assert_abs_diff_eq!(
        er_energy_per_vertex(&a32, 3.0f32).unwrap() as f64,
        er_energy_per_vertex(&a, 3.0).unwrap(),
        epsilon = 1e-5
    );
    assert_abs_diff_eq!(
        sk_energy_per_vertex(&a32).unwrap() as f64,
        sk_energy_per_vertex(&a).unwrap(),
        epsilon = 1e-5
    );
}

#[test]
fn simulated_sk_average_matches_exact_depth_one_energy() {
    let n = 6;
    let a = Angles::new(vec![-0.6], vec![0.9]).unwrap();
    let values: Vec<f64> = (0..4000)
        .map(|i| {
            let inst = sample_sk(n, derive_seed(31, i)).unwrap();
            let h = IsingHamiltonian::from_sk(&inst).unwrap();
            expected_energy(&h, &a).unwrap() / n as f64
        })
        .collect();
    let est = summarize(&values).unwrap();
    let exact = exact_sk_energy_p1(n, &a).unwrap();
    assert!((est.mean - exact).abs() < 4.0 * est.std_error, "{} ± {} vs {exact}", est.mean, est.std_error);
}

#[test]
fn sampler_agrees_with_exact_depth_one_energy() {
    let n = 20;
    let a = Angles::new(vec![-0.6], vec![0.9]).unwrap();
    let sampler = SkSampler::new(&a).unwrap();
    let est = summarize(&sampler.samples(n, 5, 4000).unwrap()).unwrap();
    let exact = exact_sk_energy_p1(n, &a).unwrap();
    assert!(
        (est.mean - exact).abs() < 4.0 * est.std_error.max(1e-12),
        "{} ± {} vs {exact}",
        est.mean,
        est.std_error
    );
}

#[test]
fn warm_start_never_loses_to_its_own_guess() {
    let cfg = ExperimentConfig {
        ensemble: Ensemble::Er { d: 3.0 },
        n: 8,
        p: 2,
        instances: 3,
        restarts: 4,
        budget: 60,
        seed: 7,
    };
    let guess = Angles::new(vec![-0.8, -0.4], vec![0.4, 0.7]).unwrap();
    let report = run_guessed_angles(&cfg, &guess).unwrap();
    assert_eq!(report.instances.len(), 3);
    for inst in &report.instances {
        assert!(inst.warm_energy <= inst.guess_energy + 1e-12);
        assert!((0.0..=1.0).contains(&inst.distance_all));
    }
}
