mod common;

use maglap::distance::{
    component_densities, mean_wasserstein, wasserstein_1d, wasserstein_lp_oracle, CouplingProblem, InferenceConfig,
    SweepModel,
};
use maglap::generators::erdos_renyi_directed;
use maglap::kpm::{KpmConfig, SpectralDensity};
use maglap::rng::rng_from_seed;
use proptest::prelude::*;
use rand::Rng;

fn arb_measure() -> impl Strategy<Value = SpectralDensity> {
    (1usize..25, any::<u64>()).prop_map(|(k, seed)| common::random_measure(&mut rng_from_seed(seed), k, -2.0, 3.0))
}

#[test]
fn quantile_formula_equals_lp_oracle() {
    let mut rng = rng_from_seed(2024);
    for case in 0..200 {
        let (ka, kb) = (rng.random_range(1..30), rng.random_range(1..30));
        let a = common::random_measure(&mut rng, ka, 0.0, 2.0);
        let b = common::random_measure(&mut rng, kb, -0.5, 2.5);
        for d in [1.0, 2.0] {
            let q = wasserstein_1d(&a, &b, d).unwrap();
            let lp = wasserstein_lp_oracle(&a, &b, d).unwrap();
            assert!((q - lp).abs() < 1e-9, "case {case}, d={d}: {q} vs {lp}");
        }
    }
}

#[test]
fn coupling_problem_agrees_on_ten_point_measures() {
    let mut rng = rng_from_seed(7);
    for _ in 0..20 {
        let a = common::random_measure(&mut rng, 10, 0.0, 1.0);
        let b = common::random_measure(&mut rng, 10, 0.0, 1.0);
        let p = CouplingProblem::new(a, b, 1.0).unwrap();
        assert!((p.distance().unwrap() - p.distance_lp().unwrap()).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metric_axioms(a in arb_measure(), b in arb_measure(), c in arb_measure(), d in prop::sample::select(vec![1.0, 2.0, 3.5])) {
        let ab = wasserstein_1d(&a, &b, d).unwrap();
        let ba = wasserstein_1d(&b, &a, d).unwrap();
        let bc = wasserstein_1d(&b, &c, d).unwrap();
        let ac = wasserstein_1d(&a, &c, d).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!(ac <= ab + bc + 1e-9);
        prop_assert!(wasserstein_1d(&a, &a, d).unwrap() <= 1e-12);
    }

    #[test]
    fn translation_moves_w1_by_the_shift(a in arb_measure(), t in -3.0f64..3.0) {
        let shifted = SpectralDensity { support: a.support.iter().map(|x| x + t).collect(), ..a.clone() };
        let w = wasserstein_1d(&a, &shifted, 1.0).unwrap();
        prop_assert!((w - t.abs()).abs() <= 1e-12, "{} vs {}", w, t.abs());
    }

    #[test]
    fn distinct_distributions_are_separated(a in arb_measure(), t in 0.01f64..1.0) {
        let shifted = SpectralDensity { support: a.support.iter().map(|x| x + t).collect(), ..a.clone() };
        prop_assert!(wasserstein_1d(&a, &shifted, 2.0).unwrap() > 0.0);
    }
}

#[test]
fn duplicate_atoms_do_not_matter() {
    let a = SpectralDensity { support: vec![0.0, 1.0], weights: vec![0.5, 0.5], dimension: 2 };
    let b = SpectralDensity { support: vec![0.0, 0.0, 1.0, 1.0], weights: vec![0.25; 4], dimension: 4 };
    assert!(wasserstein_1d(&a, &b, 1.0).unwrap() < 1e-15);
}

fn small_config(seed: u64) -> InferenceConfig {
    InferenceConfig::new(vec![0.0, 1.0 / 3.0], 3, KpmConfig::new(60, 10).with_seed(seed), seed + 1)
}

#[test]
fn mean_distance_is_deterministic() {
    let cfg = small_config(3);
    let target = erdos_renyi_directed(300, 0.03, 1).unwrap();
    let t = component_densities(&target, &cfg.charges, &cfg.kpm).unwrap();
    let model = SweepModel::ErdosRenyi { n: 300 };
    let a = mean_wasserstein(&t, &model, 0.03, 0, &cfg).unwrap();
    let b = mean_wasserstein(&t, &model, 0.03, 0, &cfg).unwrap();
    assert_eq!(a, b);
    let seq = InferenceConfig { kpm: KpmConfig { execution: maglap::Execution::Sequential, ..cfg.kpm.clone() }, ..cfg.clone() };
    assert_eq!(mean_wasserstein(&t, &model, 0.03, 0, &seq).unwrap(), a);
}

#[test]
fn far_candidates_are_far() {
    let cfg = small_config(11);
    let target = erdos_renyi_directed(400, 0.02, 5).unwrap();
    let t = component_densities(&target, &cfg.charges, &cfg.kpm).unwrap();
    let model = SweepModel::ErdosRenyi { n: 400 };
    let floor = mean_wasserstein(&t, &model, 0.02, 0, &cfg).unwrap().mean;
    let far = mean_wasserstein(&t, &model, 0.2, 1, &cfg).unwrap().mean;
    assert!(far >= 5.0 * floor, "floor {floor}, far {far}");
}

#[test]
fn degenerate_candidates_are_errors() {
    let cfg = small_config(1);
    let target = erdos_renyi_directed(50, 0.2, 5).unwrap();
    let t = component_densities(&target, &cfg.charges, &cfg.kpm).unwrap();
    // p = 0 leaves isolated nodes only.
    assert!(mean_wasserstein(&t, &SweepModel::ErdosRenyi { n: 50 }, 0.0, 0, &cfg).is_err());
    assert!(mean_wasserstein(&t[..1], &SweepModel::ErdosRenyi { n: 50 }, 0.2, 0, &cfg).is_err());
}
