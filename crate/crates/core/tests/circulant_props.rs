mod common;

use maglap::circulant::{
    block_reduced_matrix, oracle_heat_grid, random_intrablock_experiment, rotation_asymmetry, rotation_charges,
    uniform_blocks, uniform_modular_eigenvalues,
};
use maglap::exact::{eig_hermitian, heat_grid};
use maglap::generators::uniform_modular;
use maglap::operator::{MagneticOperator, OperatorKind};

fn dense_levels(n_f: usize, n_c: usize, q: f64) -> Vec<f64> {
    let g = uniform_modular(n_f, n_c).unwrap();
    let op = MagneticOperator::from_graph(&g, q, OperatorKind::Normalized).unwrap();
    eig_hermitian(&op, false).unwrap().eigenvalues
}

#[test]
fn closed_form_matches_dense_spectrum() {
    for n_f in [3, 4, 5, 6] {
        for n_c in [2, 5, 45] {
            for q in [0.0, 0.1, 1.0 / 3.0] {
                let oracle = uniform_modular_eigenvalues(n_f, n_c, q).unwrap();
                assert_eq!(oracle.len(), n_f * n_c);
                assert!(oracle.iter().all(|&x| (-1e-15..=2.0 + 1e-15).contains(&x)));
                let dense = dense_levels(n_f, n_c, q);
                let err = common::max_abs_diff(&oracle, &dense);
                assert!(err < 1e-9, "n_f={n_f} n_c={n_c} q={q}: {err}");
            }
        }
    }
}

#[test]
fn block_reduction_reproduces_the_spectrum() {
    // Union over u of the reduced-matrix spectra equals the full spectrum.
    let (n_f, n_c, q) = (4, 5, 0.17);
    let (h_in, h_out) = uniform_blocks(n_c, q);
    let mut union = Vec::new();
    for u in 0..n_f {
        let r = block_reduced_matrix(&h_in, &h_out, u, n_f).unwrap();
        let ev = r.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
        union.extend(ev.iter().copied());
    }
    union.sort_by(f64::total_cmp);
    assert!(common::max_abs_diff(&union, &dense_levels(n_f, n_c, q)) < 1e-12);
}

#[test]
fn oracle_heat_matches_dense_pipeline() {
    let qs = [0.0, 0.05, 0.2, 0.45];
    let ts = [0.01, 0.04, 0.09, 0.15];
    for (n_f, n_c) in [(3, 45), (5, 5), (6, 2)] {
        let oracle = oracle_heat_grid(n_f, n_c, &qs, &ts).unwrap();
        let dense = heat_grid(&uniform_modular(n_f, n_c).unwrap(), &qs, &ts).unwrap();
        for i in 0..qs.len() {
            for j in 0..ts.len() {
                let (a, b) = (oracle.get(i, j), dense.get(i, j));
                assert!((a - b).abs() < 1e-8 * b.abs().max(1.0), "{n_f}x{n_c} q={} T={}: {a} vs {b}", qs[i], ts[j]);
            }
        }
    }
}

#[test]
fn petal_period_is_one_over_n_f() {
    let ts = [0.02, 0.06, 0.1, 0.15];
    for n_f in [3, 4, 5, 6] {
        let qs = rotation_charges(n_f, 6);
        let grid = oracle_heat_grid(n_f, 5, &qs, &ts).unwrap();
        assert!(rotation_asymmetry(&grid, n_f).unwrap() < 1e-10);
        // A shift by half the period is not a symmetry.
        let half = oracle_heat_grid(n_f, 5, &[0.01, 0.01 + 0.5 / n_f as f64], &ts).unwrap();
        let diff = (0..ts.len()).map(|j| (half.get(0, j) - half.get(1, j)).abs()).fold(0.0, f64::max);
        assert!(diff > 1e-6, "n_f = {n_f}");
    }
}

#[test]
fn random_intrablock_is_reproducible() {
    let qs = [0.0, 0.2];
    let ts = [0.05, 0.1];
    let a = random_intrablock_experiment(3, 12, 0.5, &qs, &ts, 9).unwrap();
    let b = random_intrablock_experiment(3, 12, 0.5, &qs, &ts, 9).unwrap();
    assert_eq!(a.values, b.values);
    assert!(random_intrablock_experiment(3, 12, 0.0, &qs, &ts, 9).is_err());
    // p_c = 1 is the uniform modular network.
    let full = random_intrablock_experiment(3, 12, 1.0, &qs, &ts, 9).unwrap();
    let oracle = oracle_heat_grid(3, 12, &qs, &ts).unwrap();
    assert!(full.l2_distance(&oracle).unwrap() < 1e-8);
}
