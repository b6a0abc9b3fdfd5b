//! Directed graph model, edge-list I/O, symmetrization and connectivity.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// A weighted directed graph on nodes `0..node_count`.
///
/// No self-loops, at most one edge per ordered pair and strictly positive
/// finite weights. Edges keep their insertion order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectedGraph {
    node_count: usize,
    edges: Vec<Edge>,
}

impl DirectedGraph {
    pub fn new(node_count: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for e in &edges {
            for index in [e.source, e.target] {
                if index >= node_count {
                    return Err(Error::NodeOutOfRange { index, node_count });
                }
            }
            if e.source == e.target {
                return Err(Error::SelfLoop(e.source));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::InvalidWeight(e.source, e.target, e.weight));
            }
            if !seen.insert((e.source, e.target)) {
                return Err(Error::DuplicateEdge(e.source, e.target));
            }
        }
        Ok(Self { node_count, edges })
    }

    /// Builds an unweighted graph from `(source, target)` pairs.
    pub fn from_pairs(node_count: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let edges = pairs
            .iter()
            .map(|&(source, target)| Edge { source, target, weight: 1.0 })
            .collect();
        Self::new(node_count, edges)
    }

    /// Construction path for generators that guarantee validity themselves.
    pub(crate) fn from_trusted(node_count: usize, edges: Vec<Edge>) -> Self {
        debug_assert!(Self::new(node_count, edges.clone()).is_ok());
        Self { node_count, edges }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn is_unweighted(&self) -> bool {
        self.edges.iter().all(|e| e.weight == 1.0)
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count];
        for e in &self.edges {
            deg[e.source] += 1;
        }
        deg
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count];
        for e in &self.edges {
            deg[e.target] += 1;
        }
        deg
    }

    /// Serializes to the edge-list text format read by [`load_edge_list`].
    ///
    /// Unit weights are omitted; other weights use the shortest round-trip
    /// representation, so reading the output back yields an identical graph.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(16 * self.edges.len() + 16);
        let _ = writeln!(out, "#nodes {}", self.node_count);
        for e in &self.edges {
            if e.weight == 1.0 {
                let _ = writeln!(out, "{} {}", e.source, e.target);
            } else {
                let _ = writeln!(out, "{} {} {}", e.source, e.target, e.weight);
            }
        }
        out
    }

    /// Relabels nodes: edge `(u, v, w)` becomes `(perm[u], perm[v], w)`.
    pub fn permute_nodes(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.node_count {
            return Err(Error::InvalidPermutation(format!(
                "length {} for {} nodes",
                perm.len(),
                self.node_count
            )));
        }
        let mut hit = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut hit[p], true) {
                return Err(Error::InvalidPermutation(format!("image {p} repeated or out of range")));
            }
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge { source: perm[e.source], target: perm[e.target], weight: e.weight })
            .collect();
        Ok(Self { node_count: self.node_count, edges })
    }

    /// Weakly connected component label per node, labels numbered by first
    /// appearance in ascending node order.
    pub fn weak_components(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.node_count);
        for e in &self.edges {
            uf.union(e.source, e.target);
        }
        let mut label = vec![usize::MAX; self.node_count];
        let mut root_label = HashMap::new();
        for (u, slot) in label.iter_mut().enumerate() {
            let r = uf.find(u);
            let next = root_label.len();
            *slot = *root_label.entry(r).or_insert(next);
        }
        label
    }

    pub fn is_weakly_connected(&self) -> bool {
        self.node_count > 0 && self.weak_components().iter().all(|&c| c == 0)
    }

    /// Induced subgraph on the largest weakly connected component.
    ///
    /// Ties go to the component holding the smallest original index. Kept
    /// nodes are renumbered in ascending original order.
    pub fn largest_weakly_connected_component(&self) -> Result<Component> {
        if self.node_count == 0 {
            return Err(Error::EmptyGraph);
        }
        let labels = self.weak_components();
        let n_comp = labels.iter().max().map_or(0, |m| m + 1);
        let mut sizes = vec![0usize; n_comp];
        for &l in &labels {
            sizes[l] += 1;
        }
        // Labels are ordered by smallest member, so the first maximum wins ties.
        let best = (0..n_comp).fold(0, |b, c| if sizes[c] > sizes[b] { c } else { b });
        let mut old_to_new = vec![None; self.node_count];
        let mut new_to_old = Vec::with_capacity(sizes[best]);
        for (u, &l) in labels.iter().enumerate() {
            if l == best {
                old_to_new[u] = Some(new_to_old.len());
                new_to_old.push(u);
            }
        }
        let edges = self
            .edges
            .iter()
            .filter_map(|e| {
                Some(Edge {
                    source: old_to_new[e.source]?,
                    target: old_to_new[e.target]?,
                    weight: e.weight,
                })
            })
            .collect();
        Ok(Component {
            graph: DirectedGraph { node_count: new_to_old.len(), edges },
            old_to_new,
            new_to_old,
        })
    }

    pub fn symmetrize(&self) -> SymmetrizedGraph {
        SymmetrizedGraph::from_directed(self)
    }
}

/// Result of [`DirectedGraph::largest_weakly_connected_component`].
#[derive(Debug, Clone)]
pub struct Component {
    pub graph: DirectedGraph,
    pub old_to_new: Vec<Option<usize>>,
    pub new_to_old: Vec<usize>,
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// One unordered node pair `u < v` of the symmetrized graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricEdge {
    pub u: usize,
    pub v: usize,
    /// `(w(u,v) + w(v,u)) / 2`
    pub weight: f64,
    /// `w(u,v) - w(v,u)`; the flow in the opposite orientation is `-flow`.
    pub flow: f64,
}

/// Undirected counterpart of a directed graph with the antisymmetric flow
/// kept alongside each pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedGraph {
    node_count: usize,
    edges: Vec<SymmetricEdge>,
    degrees: Vec<f64>,
}

impl SymmetrizedGraph {
    pub fn from_directed(g: &DirectedGraph) -> Self {
        let mut halves: Vec<(usize, usize, f64, f64)> = g
            .edges()
            .iter()
            .map(|e| {
                if e.source < e.target {
                    (e.source, e.target, e.weight, 0.0)
                } else {
                    (e.target, e.source, 0.0, e.weight)
                }
            })
            .collect();
        halves.sort_unstable_by_key(|h| (h.0, h.1));

        let mut edges: Vec<SymmetricEdge> = Vec::with_capacity(halves.len());
        let mut i = 0;
        while i < halves.len() {
            let (u, v, mut forward, mut backward) = halves[i];
            if i + 1 < halves.len() && halves[i + 1].0 == u && halves[i + 1].1 == v {
                forward += halves[i + 1].2;
                backward += halves[i + 1].3;
                i += 1;
            }
            edges.push(SymmetricEdge {
                u,
                v,
                weight: 0.5 * (forward + backward),
                flow: forward - backward,
            });
            i += 1;
        }

        let mut degrees = vec![0.0; g.node_count()];
        for e in &edges {
            degrees[e.u] += e.weight;
            degrees[e.v] += e.weight;
        }
        Self { node_count: g.node_count(), edges, degrees }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Pairs sorted by `(u, v)` with `u < v`.
    pub fn edges(&self) -> &[SymmetricEdge] {
        &self.edges
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn max_degree(&self) -> f64 {
        self.degrees.iter().copied().fold(0.0, f64::max)
    }
}

/// Parses the whitespace-separated edge-list format.
///
/// Each non-comment line is `u v` or `u v w`. Lines starting with `#` are
/// comments, except a `#nodes N` header which fixes the node count (otherwise
/// it is one more than the largest index seen).
pub fn load_edge_list(text: &str) -> Result<DirectedGraph> {
    let mut declared = None;
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(n) = rest.trim_start().strip_prefix("nodes") {
                let n = n.trim().parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("bad node count header: {line:?}"),
                })?;
                declared = Some(n);
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected `u v` or `u v w`, found {line:?}"),
            });
        }
        let index = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad node index {s:?}"),
            })
        };
        let weight = match fields.get(2) {
            Some(s) => s.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad weight {s:?}"),
            })?,
            None => 1.0,
        };
        edges.push(Edge { source: index(fields[0])?, target: index(fields[1])?, weight });
    }
    let inferred = edges.iter().map(|e| e.source.max(e.target) + 1).max().unwrap_or(0);
    let node_count = match declared {
        Some(n) if n < inferred => {
            return Err(Error::NodeOutOfRange { index: inferred - 1, node_count: n });
        }
        Some(n) => n,
        None => inferred,
    };
    DirectedGraph::new(node_count, edges)
}

/// Parses an edge list whose node fields are arbitrary labels.
///
/// Labels get dense indices in order of first appearance; the returned vector
/// maps index to label.
pub fn load_labeled_edge_list(text: &str) -> Result<(DirectedGraph, Vec<String>)> {
    let mut labels: Vec<String> = Vec::new();
    let mut index_of: HashMap<String, usize> = HashMap::new();
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::Parse { line: i + 1, msg: format!("malformed line {line:?}") });
        }
        let mut idx = |s: &str| {
            *index_of.entry(s.to_string()).or_insert_with(|| {
                labels.push(s.to_string());
                labels.len() - 1
            })
        };
        let (source, target) = (idx(fields[0]), idx(fields[1]));
        let weight = match fields.get(2) {
            Some(s) => s
                .parse()
                .map_err(|_| Error::Parse { line: i + 1, msg: format!("bad weight {s:?}") })?,
            None => 1.0,
        };
        edges.push(Edge { source, target, weight });
    }
    Ok((DirectedGraph::new(labels.len(), edges)?, labels))
}
