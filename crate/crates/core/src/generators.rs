//! Seeded random generators for the directed network families.
//!
//! Every generator is a pure function of its parameters and seed. A single
//! call is sequential; the cyclic block model draws each block from its own
//! ChaCha stream (`stream = block index`) so the output does not depend on
//! the order in which blocks are visited.

use std::collections::HashSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Edge};
use crate::rng::{rng_from_seed, stream_rng};

/// Network family together with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Model {
    ErdosRenyi { n: usize, p: f64 },
    BarabasiAlbert { n: usize, m: usize },
    ScaleFree {
        n: usize,
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta_in: f64,
        delta_out: f64,
    },
    WattsStrogatz { n: usize, k: usize, beta: f64 },
    CyclicSbm { n_f: usize, n_c: usize, p_c: f64, p_d: f64 },
    UniformModular { n_f: usize, n_c: usize },
}

impl Model {
    /// Bollobás et al. scale-free model with the usual default weights.
    pub fn scale_free(n: usize) -> Self {
        Model::ScaleFree { n, alpha: 0.41, beta: 0.54, gamma: 0.05, delta_in: 0.2, delta_out: 0.0 }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Model::ErdosRenyi { .. } => "er",
            Model::BarabasiAlbert { .. } => "ba",
            Model::ScaleFree { .. } => "sf",
            Model::WattsStrogatz { .. } => "ws",
            Model::CyclicSbm { .. } => "sbm",
            Model::UniformModular { .. } => "uniform",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Model::ErdosRenyi { n, p } => {
                check(n >= 1, "n must be >= 1")?;
                check_prob("p", p)
            }
            Model::BarabasiAlbert { n, m } => check(m >= 1 && n > m, "BA requires n > m >= 1"),
            Model::ScaleFree { n, alpha, beta, gamma, delta_in, delta_out } => {
                check(n >= 3, "scale-free model requires n >= 3")?;
                for (name, x) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
                    check_prob(name, x)?;
                }
                check(
                    (alpha + beta + gamma - 1.0).abs() <= 1e-12,
                    "alpha + beta + gamma must equal 1",
                )?;
                check(n == 3 || alpha + gamma > 0.0, "alpha + gamma must be positive to grow")?;
                check(
                    delta_in >= 0.0 && delta_out >= 0.0 && delta_in.is_finite() && delta_out.is_finite(),
                    "delta_in and delta_out must be finite and non-negative",
                )
            }
            Model::WattsStrogatz { n, k, beta } => {
                check(k >= 2 && k % 2 == 0 && n > k, "WS requires n > k >= 2 with k even")?;
                check_prob("beta", beta)
            }
            Model::CyclicSbm { n_f, n_c, p_c, p_d } => {
                check(n_f >= 3, "n_f must be >= 3")?;
                check(n_c >= 2, "n_c must be >= 2")?;
                check_prob("p_c", p_c)?;
                check_prob("p_d", p_d)
            }
            Model::UniformModular { n_f, n_c } => {
                check(n_f >= 3, "n_f must be >= 3")?;
                check(n_c >= 2, "n_c must be >= 2")
            }
        }
    }

    pub fn generate(&self, seed: u64) -> Result<DirectedGraph> {
        self.validate()?;
        Ok(match *self {
            Model::ErdosRenyi { n, p } => erdos_renyi_unchecked(n, p, seed),
            Model::BarabasiAlbert { n, m } => barabasi_albert_unchecked(n, m, seed),
            Model::ScaleFree { n, alpha, beta, gamma, delta_in, delta_out } => {
                scale_free_unchecked(n, [alpha, beta, gamma], delta_in, delta_out, seed)
            }
            Model::WattsStrogatz { n, k, beta } => watts_strogatz_unchecked(n, k, beta, seed),
            Model::CyclicSbm { n_f, n_c, p_c, p_d } => cyclic_sbm_unchecked(n_f, n_c, p_c, p_d, seed),
            Model::UniformModular { n_f, n_c } => uniform_modular_unchecked(n_f, n_c),
        })
    }
}

/// Full record of one generator invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub model: Model,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<DirectedGraph> {
        self.model.generate(self.seed)
    }
}

fn check(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.to_string()))
    }
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    check((0.0..=1.0).contains(&p), &format!("{name} must lie in [0, 1], got {p}"))
}

/// Calls `hit(k)` for each `k in 0..count` selected independently with
/// probability `p`, in increasing order, using geometric gap sampling.
fn bernoulli_indices(count: u64, p: f64, rng: &mut ChaCha8Rng, mut hit: impl FnMut(u64)) {
    if p <= 0.0 || count == 0 {
        return;
    }
    if p >= 1.0 {
        (0..count).for_each(hit);
        return;
    }
    let log_q = (-p).ln_1p();
    let mut k: u64 = 0;
    loop {
        // 1 - u lies in (0, 1], so the logarithm is finite.
        let u: f64 = rng.random();
        let gap = ((1.0 - u).ln() / log_q).floor();
        if !(gap < (count - k) as f64) {
            return;
        }
        k += gap as u64;
        hit(k);
        k += 1;
        if k >= count {
            return;
        }
    }
}

/// Directed Erdős–Rényi graph: each ordered pair `u != v` independently with
/// probability `p`.
pub fn erdos_renyi_directed(n: usize, p: f64, seed: u64) -> Result<DirectedGraph> {
    Model::ErdosRenyi { n, p }.generate(seed)
}

fn erdos_renyi_unchecked(n: usize, p: f64, seed: u64) -> DirectedGraph {
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    if n > 1 {
        let row = (n - 1) as u64;
        bernoulli_indices(n as u64 * row, p, &mut rng, |k| {
            let u = (k / row) as usize;
            let r = (k % row) as usize;
            let v = if r < u { r } else { r + 1 };
            edges.push(Edge { source: u, target: v, weight: 1.0 });
        });
    }
    DirectedGraph::from_trusted(n, edges)
}

/// Directed preferential-attachment growth.
///
/// Starts from a complete directed core on `m + 1` nodes; each later node
/// sends `m` edges to distinct existing nodes drawn with probability
/// proportional to `in-degree + 1`.
pub fn barabasi_albert_directed(n: usize, m: usize, seed: u64) -> Result<DirectedGraph> {
    Model::BarabasiAlbert { n, m }.generate(seed)
}

fn barabasi_albert_unchecked(n: usize, m: usize, seed: u64) -> DirectedGraph {
    let mut rng = rng_from_seed(seed);
    let core = m + 1;
    let mut edges = Vec::with_capacity(core * m + (n - core) * m);
    // Each node appears once for its "+1" and once per incoming edge.
    let mut urn: Vec<usize> = Vec::with_capacity(n + edges.capacity());
    for u in 0..core {
        urn.push(u);
        for v in 0..core {
            if u != v {
                edges.push(Edge { source: u, target: v, weight: 1.0 });
            }
        }
    }
    for v in 0..core {
        urn.extend(std::iter::repeat_n(v, core - 1));
    }
    let mut chosen = Vec::with_capacity(m);
    for new in core..n {
        chosen.clear();
        while chosen.len() < m {
            let t = urn[rng.random_range(0..urn.len())];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            edges.push(Edge { source: new, target: t, weight: 1.0 });
            urn.push(t);
        }
        urn.push(new);
    }
    DirectedGraph::from_trusted(n, edges)
}

/// Bollobás–Borgs–Chayes–Riordan directed scale-free process.
///
/// Starts from the directed 3-cycle. Each step is one of three events chosen
/// with probabilities `alpha`, `beta`, `gamma`:
/// a new node links to an existing node chosen by `in-degree + delta_in`;
/// an existing node (by `out-degree + delta_out`) links to an existing node
/// (by `in-degree + delta_in`); or an existing node (by
/// `out-degree + delta_out`) links to a new node. Duplicate edges and
/// self-loops are re-drawn.
pub fn bollobas_scale_free(
    n: usize,
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta_in: f64,
    delta_out: f64,
    seed: u64,
) -> Result<DirectedGraph> {
    Model::ScaleFree { n, alpha, beta, gamma, delta_in, delta_out }.generate(seed)
}

const REDRAW_LIMIT: usize = 64;

fn scale_free_unchecked(
    n: usize,
    weights: [f64; 3],
    delta_in: f64,
    delta_out: f64,
    seed: u64,
) -> DirectedGraph {
    let [alpha, beta, _] = weights;
    let mut rng = rng_from_seed(seed);
    let mut state = ScaleFreeState::default();
    for u in 0..3 {
        state.add(u, (u + 1) % 3);
    }
    let mut nodes = 3;

    while nodes < n {
        let r: f64 = rng.random();
        if r < alpha {
            let w = pick(&mut rng, &state.targets, delta_in, nodes);
            state.add(nodes, w);
            nodes += 1;
        } else if r < alpha + beta {
            for _ in 0..REDRAW_LIMIT {
                let v = pick(&mut rng, &state.sources, delta_out, nodes);
                let w = pick(&mut rng, &state.targets, delta_in, nodes);
                if v != w && !state.present.contains(&(v, w)) {
                    state.add(v, w);
                    break;
                }
            }
        } else {
            let v = pick(&mut rng, &state.sources, delta_out, nodes);
            state.add(v, nodes);
            nodes += 1;
        }
    }
    DirectedGraph::from_trusted(n, state.edges)
}

#[derive(Default)]
struct ScaleFreeState {
    edges: Vec<Edge>,
    present: HashSet<(usize, usize)>,
    // Endpoint lists: a uniform draw from them is a draw proportional to degree.
    sources: Vec<usize>,
    targets: Vec<usize>,
}

impl ScaleFreeState {
    fn add(&mut self, u: usize, v: usize) {
        self.present.insert((u, v));
        self.edges.push(Edge { source: u, target: v, weight: 1.0 });
        self.sources.push(u);
        self.targets.push(v);
    }
}

/// Node drawn with probability proportional to `degree + delta`.
fn pick(rng: &mut ChaCha8Rng, ends: &[usize], delta: f64, nodes: usize) -> usize {
    let total = ends.len() as f64 + delta * nodes as f64;
    if rng.random::<f64>() * total < ends.len() as f64 {
        ends[rng.random_range(0..ends.len())]
    } else {
        rng.random_range(0..nodes)
    }
}

/// Directed Watts–Strogatz graph.
///
/// Each node points to its `k/2` clockwise and `k/2` counter-clockwise ring
/// neighbours; each edge then has its target replaced, with probability
/// `beta`, by a uniform node that is neither the source nor an existing
/// target of the source. Out-degrees stay equal to `k`.
pub fn watts_strogatz_directed(n: usize, k: usize, beta: f64, seed: u64) -> Result<DirectedGraph> {
    Model::WattsStrogatz { n, k, beta }.generate(seed)
}

fn watts_strogatz_unchecked(n: usize, k: usize, beta: f64, seed: u64) -> DirectedGraph {
    let mut rng = rng_from_seed(seed);
    let half = k / 2;
    let mut targets: Vec<Vec<usize>> = (0..n)
        .map(|u| {
            (1..=half)
                .flat_map(|j| [(u + j) % n, (u + n - j) % n])
                .collect()
        })
        .collect();
    for (u, outs) in targets.iter_mut().enumerate() {
        for slot in 0..outs.len() {
            if rng.random::<f64>() < beta {
                loop {
                    let w = rng.random_range(0..n);
                    if w != u && !outs.contains(&w) {
                        outs[slot] = w;
                        break;
                    }
                    // n > k leaves at least one admissible target, possibly
                    // the current one.
                    if w == outs[slot] {
                        break;
                    }
                }
            }
        }
    }
    let edges = targets
        .iter()
        .enumerate()
        .flat_map(|(u, outs)| outs.iter().map(move |&v| Edge { source: u, target: v, weight: 1.0 }))
        .collect();
    DirectedGraph::from_trusted(n, edges)
}

/// Directed cyclic stochastic block model.
///
/// `n_f` blocks of `n_c` nodes, node `j` in block `j / n_c`. Ordered pairs
/// inside a block get an edge with probability `p_c`; every pair from block
/// `i` to block `i + 1 (mod n_f)` gets a forward edge with probability `p_d`.
pub fn cyclic_sbm(n_f: usize, n_c: usize, p_c: f64, p_d: f64, seed: u64) -> Result<DirectedGraph> {
    Model::CyclicSbm { n_f, n_c, p_c, p_d }.generate(seed)
}

fn cyclic_sbm_unchecked(n_f: usize, n_c: usize, p_c: f64, p_d: f64, seed: u64) -> DirectedGraph {
    let mut edges = Vec::new();
    let row = (n_c - 1) as u64;
    for block in 0..n_f {
        let mut rng = stream_rng(seed, block as u64);
        let base = block * n_c;
        let next = ((block + 1) % n_f) * n_c;
        bernoulli_indices((n_c as u64) * row, p_c, &mut rng, |k| {
            let u = (k / row) as usize;
            let r = (k % row) as usize;
            let v = if r < u { r } else { r + 1 };
            edges.push(Edge { source: base + u, target: base + v, weight: 1.0 });
        });
        bernoulli_indices((n_c * n_c) as u64, p_d, &mut rng, |k| {
            let u = (k / n_c as u64) as usize;
            let v = (k % n_c as u64) as usize;
            edges.push(Edge { source: base + u, target: next + v, weight: 1.0 });
        });
    }
    DirectedGraph::from_trusted(n_f * n_c, edges)
}

/// Deterministic modular network: complete undirected blocks (both
/// orientations of every intra-block pair) and complete directed coupling
/// from each block to the next one, cyclically.
pub fn uniform_modular(n_f: usize, n_c: usize) -> Result<DirectedGraph> {
    Model::UniformModular { n_f, n_c }.generate(0)
}

fn uniform_modular_unchecked(n_f: usize, n_c: usize) -> DirectedGraph {
    let mut edges = Vec::with_capacity(n_f * n_c * (2 * n_c - 1));
    for block in 0..n_f {
        let base = block * n_c;
        let next = ((block + 1) % n_f) * n_c;
        for u in 0..n_c {
            for v in 0..n_c {
                if u != v {
                    edges.push(Edge { source: base + u, target: base + v, weight: 1.0 });
                }
            }
            for v in 0..n_c {
                edges.push(Edge { source: base + u, target: next + v, weight: 1.0 });
            }
        }
    }
    DirectedGraph::from_trusted(n_f * n_c, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_extremes() {
        assert_eq!(erdos_renyi_directed(5, 0.0, 1).unwrap().edge_count(), 0);
        let full = erdos_renyi_directed(5, 1.0, 1).unwrap();
        assert_eq!(full.edge_count(), 20);
        assert!(erdos_renyi_directed(5, 1.5, 1).is_err());
        assert!(erdos_renyi_directed(0, 0.5, 1).is_err());
        assert_eq!(erdos_renyi_directed(1, 0.5, 1).unwrap().edge_count(), 0);
    }

    #[test]
    fn er_edge_count_within_binomial_band() {
        let (n, p) = (1000usize, 0.003);
        let trials = (n * (n - 1)) as f64;
        let mean = trials * p;
        let sd = (trials * p * (1.0 - p)).sqrt();
        for seed in 0..5 {
            let m = erdos_renyi_directed(n, p, seed).unwrap().edge_count() as f64;
            assert!((m - mean).abs() < 4.0 * sd, "seed {seed}: {m} vs {mean}");
        }
    }

    #[test]
    fn ba_core_and_degrees() {
        let g = barabasi_albert_directed(4, 3, 9).unwrap();
        assert_eq!(g.edge_count(), 12);
        let g = barabasi_albert_directed(1000, 3, 9).unwrap();
        assert_eq!(g.edge_count(), 12 + (1000 - 4) * 3);
        assert!(g.out_degrees().iter().all(|&d| d == 3));
        assert!(barabasi_albert_directed(3, 3, 0).is_err());
    }

    #[test]
    fn scale_free_gamma_only() {
        let g = bollobas_scale_free(200, 0.0, 0.0, 1.0, 0.2, 1.0, 5).unwrap();
        for e in &g.edges()[3..] {
            assert!(e.source < e.target, "edge must point to a newer node");
        }
        assert!(g.in_degrees()[3..].iter().all(|&d| d >= 1));
    }

    #[test]
    fn scale_free_defaults_connected() {
        let g = Model::scale_free(1000).generate(11).unwrap();
        assert_eq!(g.node_count(), 1000);
        assert!(g.is_weakly_connected());
        assert!(bollobas_scale_free(100, 0.5, 0.5, 0.5, 0.0, 0.0, 0).is_err());
    }

    #[test]
    fn ws_out_degree_preserved() {
        let ring = watts_strogatz_directed(20, 4, 0.0, 3).unwrap();
        assert!(ring.out_degrees().iter().all(|&d| d == 4));
        assert!(ring.edges().iter().any(|e| e.source == 0 && e.target == 19));
        let full = watts_strogatz_directed(20, 4, 1.0, 3).unwrap();
        assert!(full.out_degrees().iter().all(|&d| d == 4));
        let a = watts_strogatz_directed(20, 4, 0.1, 42).unwrap().to_edge_list();
        let b = watts_strogatz_directed(20, 4, 0.1, 42).unwrap().to_edge_list();
        assert_eq!(a, b);
        assert!(watts_strogatz_directed(20, 3, 0.1, 0).is_err());
        assert!(watts_strogatz_directed(4, 4, 0.1, 0).is_err());
    }

    #[test]
    fn sbm_saturated_and_empty() {
        let g = cyclic_sbm(3, 2, 1.0, 1.0, 0).unwrap();
        assert_eq!(g.edge_count(), 6 + 12);
        assert_eq!(cyclic_sbm(3, 2, 0.0, 0.0, 0).unwrap().edge_count(), 0);
        assert!(cyclic_sbm(2, 2, 0.5, 0.5, 0).is_err());
        assert!(cyclic_sbm(3, 2, 1.5, 0.5, 0).is_err());
    }

    #[test]
    fn sbm_intra_density() {
        let (n_f, n_c, p_c) = (3usize, 45usize, 0.3);
        let g = cyclic_sbm(n_f, n_c, p_c, 0.0, 17).unwrap();
        let trials = (n_f * n_c * (n_c - 1)) as f64;
        let sd = (trials * p_c * (1.0 - p_c)).sqrt();
        assert!((g.edge_count() as f64 - trials * p_c).abs() < 4.0 * sd);
    }

    #[test]
    fn uniform_modular_counts() {
        let g = uniform_modular(3, 2).unwrap();
        assert_eq!(g.edge_count(), 18);
        let s = uniform_modular(3, 45).unwrap().symmetrize();
        assert!(s.degrees().iter().all(|&d| d == 89.0));
    }

    #[test]
    fn spec_serializes_flat() {
        let spec = GeneratorSpec { model: Model::ErdosRenyi { n: 10, p: 0.5 }, seed: 3 };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"family":"erdos_renyi","n":10,"p":0.5,"seed":3}"#);
        let back: GeneratorSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
}
