#![allow(dead_code)]

use maglap::graph::{DirectedGraph, Edge};
use maglap::kpm::SpectralDensity;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random directed graph on `n` nodes: a random spanning path in both
/// orientations makes it weakly connected, then extra arcs are added with
/// probability `p`. Weights are 1 or uniform in `[0.5, 3)`.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, weighted: bool) -> DirectedGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut present = std::collections::HashSet::new();
    let mut edges = Vec::new();
    let weight = |rng: &mut ChaCha8Rng| if weighted { rng.random_range(0.5..3.0) } else { 1.0 };
    for w in order.windows(2) {
        let (a, b) = if rng.random::<bool>() { (w[0], w[1]) } else { (w[1], w[0]) };
        present.insert((a, b));
        edges.push(Edge { source: a, target: b, weight: weight(rng) });
    }
    for u in 0..n {
        for v in 0..n {
            if u != v && !present.contains(&(u, v)) && rng.random::<f64>() < p {
                present.insert((u, v));
                edges.push(Edge { source: u, target: v, weight: weight(rng) });
            }
        }
    }
    DirectedGraph::new(n, edges).unwrap()
}

/// Random discrete probability measure with `k` atoms in `[lo, hi)`.
pub fn random_measure(rng: &mut ChaCha8Rng, k: usize, lo: f64, hi: f64) -> SpectralDensity {
    let mut support: Vec<f64> = (0..k).map(|_| rng.random_range(lo..hi)).collect();
    support.sort_by(f64::total_cmp);
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    SpectralDensity { support, weights: raw.iter().map(|w| w / total).collect(), dimension: k }
}

/// Largest absolute entrywise difference between two sorted lists.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
