mod common;

use std::collections::HashMap;

use maglap::generators::{cyclic_sbm, uniform_modular, GeneratorSpec, Model};
use maglap::graph::{load_edge_list, DirectedGraph, Edge};
use maglap::rng::rng_from_seed;
use proptest::prelude::*;

fn arb_graph() -> impl Strategy<Value = DirectedGraph> {
    (2usize..25, any::<u64>(), 0.0f64..0.4, any::<bool>()).prop_map(|(n, seed, p, weighted)| {
        common::random_connected_graph(&mut rng_from_seed(seed), n, p, weighted)
    })
}

/// Possibly disconnected graph: a union of two random blocks.
fn arb_split_graph() -> impl Strategy<Value = DirectedGraph> {
    (arb_graph(), arb_graph()).prop_map(|(a, b)| {
        let shift = a.node_count();
        let mut edges: Vec<Edge> = a.edges().to_vec();
        edges.extend(b.edges().iter().map(|e| Edge { source: e.source + shift, target: e.target + shift, ..*e }));
        DirectedGraph::new(shift + b.node_count(), edges).unwrap()
    })
}

proptest! {
    #[test]
    fn flow_is_antisymmetric(g in arb_graph()) {
        let w: HashMap<(usize, usize), f64> = g.edges().iter().map(|e| ((e.source, e.target), e.weight)).collect();
        let get = |u, v| w.get(&(u, v)).copied().unwrap_or(0.0);
        let sg = g.symmetrize();
        for e in sg.edges() {
            prop_assert_eq!(e.flow, get(e.u, e.v) - get(e.v, e.u));
            prop_assert_eq!(-e.flow, get(e.v, e.u) - get(e.u, e.v));
            prop_assert_eq!(e.weight, 0.5 * (get(e.u, e.v) + get(e.v, e.u)));
        }
    }

    #[test]
    fn degrees_conserve_weight(g in arb_graph()) {
        let sg = g.symmetrize();
        let sum_d: f64 = sg.degrees().iter().sum();
        let sum_pairs: f64 = sg.edges().iter().map(|e| 2.0 * e.weight).sum();
        prop_assert!((sum_d - sum_pairs).abs() <= 1e-12 * sum_d.max(1.0));
        prop_assert!((sum_d - g.total_weight()).abs() <= 1e-12 * sum_d.max(1.0));
    }

    #[test]
    fn component_is_idempotent(g in arb_split_graph()) {
        let once = g.largest_weakly_connected_component().unwrap();
        prop_assert!(once.graph.is_weakly_connected());
        let twice = once.graph.largest_weakly_connected_component().unwrap();
        prop_assert_eq!(&twice.graph, &once.graph);
        prop_assert_eq!(twice.new_to_old, (0..once.graph.node_count()).collect::<Vec<_>>());
        for (new, &old) in once.new_to_old.iter().enumerate() {
            prop_assert_eq!(once.old_to_new[old], Some(new));
        }
    }

    #[test]
    fn edge_list_round_trip(g in arb_graph()) {
        let text = g.to_edge_list();
        let back = load_edge_list(&text).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn permutation_preserves_weight_multiset(g in arb_graph(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..g.node_count()).collect();
        perm.shuffle(&mut rng_from_seed(seed));
        let h = g.permute_nodes(&perm).unwrap();
        let mut a: Vec<f64> = g.symmetrize().degrees().to_vec();
        let mut b: Vec<f64> = h.symmetrize().degrees().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        // Degrees are sums over incident pairs, so summation order may differ.
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{} vs {}", x, y);
        }
    }
}

fn all_families(n: usize) -> Vec<Model> {
    vec![
        Model::ErdosRenyi { n, p: 0.05 },
        Model::BarabasiAlbert { n, m: 3 },
        Model::scale_free(n),
        Model::WattsStrogatz { n, k: 4, beta: 0.3 },
        Model::CyclicSbm { n_f: 3, n_c: n / 3, p_c: 0.2, p_d: 0.1 },
        Model::UniformModular { n_f: 4, n_c: n / 4 },
    ]
}

#[test]
fn generators_are_deterministic_and_valid() {
    for model in all_families(60) {
        for seed in [0u64, 1, 99] {
            let spec = GeneratorSpec { model: model.clone(), seed };
            let a = spec.generate().unwrap();
            let b = spec.generate().unwrap();
            assert_eq!(a.to_edge_list(), b.to_edge_list(), "{model:?}");
            // Re-validating the edge set catches self-loops and duplicates.
            DirectedGraph::new(a.node_count(), a.edges().to_vec()).unwrap();
        }
    }
}

#[test]
fn ws_rewiring_keeps_out_degree() {
    for beta in [0.0, 0.5, 1.0] {
        let g = maglap::generators::watts_strogatz_directed(40, 6, beta, 4).unwrap();
        assert!(g.out_degrees().iter().all(|&d| d == 6), "beta = {beta}");
    }
}

#[test]
fn ba_out_degrees() {
    let g = maglap::generators::barabasi_albert_directed(200, 3, 8).unwrap();
    let out = g.out_degrees();
    // Core clique on m + 1 nodes, then exactly m arcs per new node.
    assert!(out[..4].iter().all(|&d| d == 3));
    assert!(out[4..].iter().all(|&d| d == 3));
    assert_eq!(g.edge_count(), 4 * 3 + 196 * 3);
}

#[test]
fn block_model_symmetrized_weights() {
    let n_c = 6;
    let block = |u: usize| u / n_c;
    // Uniform modular: reciprocal intra-block pairs, one-way forward pairs.
    let g = uniform_modular(3, n_c).unwrap();
    for e in g.symmetrize().edges() {
        let expected = if block(e.u) == block(e.v) { 1.0 } else { 0.5 };
        assert_eq!(e.weight, expected);
        if block(e.u) == block(e.v) {
            assert_eq!(e.flow, 0.0);
        } else {
            assert_eq!(e.flow.abs(), 1.0);
        }
    }
    // Independent ordered pairs: a one-way intra-block pair has w_s = 1/2,
    // a reciprocated one w_s = 1.
    let g = cyclic_sbm(3, n_c, 0.3, 0.0, 21).unwrap();
    let arcs: std::collections::HashSet<(usize, usize)> = g.edges().iter().map(|e| (e.source, e.target)).collect();
    let mut one_way = 0;
    for e in g.symmetrize().edges() {
        assert_eq!(block(e.u), block(e.v));
        let reciprocal = arcs.contains(&(e.u, e.v)) && arcs.contains(&(e.v, e.u));
        assert_eq!(e.weight, if reciprocal { 1.0 } else { 0.5 });
        one_way += usize::from(!reciprocal);
    }
    assert!(one_way > 0);
    let full = cyclic_sbm(3, n_c, 1.0, 1.0, 21).unwrap();
    assert_eq!(full.edge_count(), 3 * n_c * (n_c - 1) + 3 * n_c * n_c);
    assert_eq!(cyclic_sbm(3, n_c, 0.0, 0.0, 21).unwrap().edge_count(), 0);
}

#[test]
fn sbm_block_streams_are_order_independent() {
    // Intra-block edges of block 1 depend only on the seed and block index,
    // so they agree between a model with p_d = 0 and one with p_d > 0.
    let a = cyclic_sbm(3, 20, 0.3, 0.0, 5).unwrap();
    let b = cyclic_sbm(3, 20, 0.3, 0.7, 5).unwrap();
    let intra = |g: &DirectedGraph| {
        let mut v: Vec<(usize, usize)> =
            g.edges().iter().filter(|e| e.source / 20 == e.target / 20).map(|e| (e.source, e.target)).collect();
        v.sort_unstable();
        v
    };
    assert_eq!(intra(&a).len(), a.edge_count());
    assert!(b.edge_count() > a.edge_count());
    // Intra-block sampling is not affected by the forward edges.
    assert_eq!(intra(&a), intra(&b));
}
