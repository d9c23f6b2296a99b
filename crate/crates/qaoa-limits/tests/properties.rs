use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qaoa_limits::angle_tools::{angle_distance, standardize, AngleSubset, WeightParity};
use qaoa_limits::infinite_limit::{compute_r_er, er_energy_per_vertex, sk_energy_per_vertex, transfer_sk_to_er};
use qaoa_limits::instances::sample_er;
use qaoa_limits::simulator::{IsingHamiltonian, QaoaSimulator};
use qaoa_limits::sk_montecarlo::variance_upper_bound;
use qaoa_limits::Angles;
use std::f64::consts::PI;

fn angles(max_p: usize) -> impl Strategy<Value = Angles> {
    (1..=max_p).prop_flat_map(|p| {
        (
            prop::collection::vec(-PI..PI, p),
            prop::collection::vec(-PI..PI, p),
        )
            .prop_map(|(b, g)| Angles::new(b, g).unwrap())
    })
}

/// An image of `a` under the unweighted MaxCut symmetries: shifts of one
/// `β_j` by `π`, of one `γ_j` by `2π`, and optionally the global sign flip.
fn image(a: &Angles, j: usize, k: usize, flip: bool) -> Angles {
    let mut b = a.clone();
    b.betas[j % a.p()] += PI;
    b.gammas[k % a.p()] -= 2.0 * PI;
    if flip {
        b.betas.iter_mut().for_each(|x| *x = -*x);
        b.gammas.iter_mut().for_each(|x| *x = -*x);
    }
    b
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn standardize_is_idempotent(a in angles(4)) {
        let s = standardize(&a, WeightParity::UnweightedMaxCut);
        let t = standardize(&s.angles, WeightParity::UnweightedMaxCut);
        for (x, y) in s.angles.to_flat().iter().zip(t.angles.to_flat()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn distance_is_a_symmetric_bounded_orbit_invariant(a in angles(4), b in angles(4), j in 0usize..4, k in 0usize..4, flip: bool) {
        prop_assume!(a.p() == b.p());
        let (sa, sb) = (standardize(&a, WeightParity::UnweightedMaxCut), standardize(&b, WeightParity::UnweightedMaxCut));
        let d = angle_distance(&sa, &sb, AngleSubset::All).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((d - angle_distance(&sb, &sa, AngleSubset::All).unwrap()).abs() < 1e-15);
        prop_assert!(angle_distance(&sa, &sa, AngleSubset::All).unwrap() < 1e-15);
        let moved = standardize(&image(&a, j, k, flip), WeightParity::UnweightedMaxCut);
        prop_assert!(angle_distance(&sa, &moved, AngleSubset::All).unwrap() < 1e-9);
    }

    #[test]
    fn er_energy_respects_angle_symmetries(a in angles(3), d in 1.0f64..8.0, j in 0usize..3, k in 0usize..3, flip: bool) {
        let e = er_energy_per_vertex(&a, d).unwrap();
        let moved = er_energy_per_vertex(&image(&a, j, k, flip), d).unwrap();
        assert_abs_diff_eq!(e, moved, epsilon = 1e-10);
        // Per-vertex energy of MaxCut lies in [-d/2, d/2].
        prop_assert!(e.abs() <= d / 2.0 + 1e-12);
    }

    #[test]
    fn sk_energy_is_invariant_under_global_sign_flip(a in angles(3)) {
        let mut neg = a.clone();
        neg.gammas.iter_mut().for_each(|g| *g = -*g);
        neg.betas.iter_mut().for_each(|b| *b = -*b);
        assert_abs_diff_eq!(sk_energy_per_vertex(&a).unwrap(), sk_energy_per_vertex(&neg).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn er_r_values_are_bounded(a in angles(3), d in 0.5f64..10.0) {
        // Each R_s is an expectation of a unimodular quantity over the tree.
        for v in compute_r_er(&a, d).unwrap().values {
            prop_assert!(v.norm() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn transfer_round_trips(a in angles(4), d in 0.1f64..100.0) {
        let back = transfer_sk_to_er(&transfer_sk_to_er(&a, d).unwrap(), 1.0 / d).unwrap();
        for (x, y) in back.to_flat().iter().zip(a.to_flat()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn simulator_preserves_norm_and_agrees_across_precisions(a in angles(3), seed in 0u64..1000) {
        let g = sample_er(9, 3.0, seed).unwrap();
        let h = IsingHamiltonian::from_graph(&g).unwrap();
        let sim = QaoaSimulator::new(&h).unwrap();
        let psi = sim.state(&a).unwrap();
        assert_abs_diff_eq!(psi.norm_sqr(), 1.0, epsilon = 1e-12);
        let direct: f64 = psi.probabilities().iter().enumerate().map(|(z, p)| p * h.value(z)).sum();
        let e64 = sim.energy(&a).unwrap();
        assert_abs_diff_eq!(e64, direct, epsilon = 1e-10);
        let e32 = sim.energy(&a.cast::<f32>()).unwrap();
        assert_abs_diff_eq!(e32 as f64, e64, epsilon = 1e-3 * (1.0 + g.edges.len() as f64));
        prop_assert!(e64.abs() <= g.edges.len() as f64 + 1e-9);
    }

    #[test]
    fn variance_bound_is_never_nan(a in angles(3)) {
        let b = variance_upper_bound(&a).unwrap();
        prop_assert!(!b.ln_variance.is_nan());
    }
}
