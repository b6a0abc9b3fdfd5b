//! Specific-heat fingerprints and self-organizing maps.
//!
//! Neurons sit on a `width × height` rectangular lattice; neuron `(x, y)` has
//! flat index `x * height + y`. The best-matching unit (BMU) of a sample is
//! the neuron with the smallest Euclidean distance to it, lowest index first
//! on ties.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{heat_grid, HeatGrid};
use crate::graph::DirectedGraph;
use crate::exec::Execution;
use crate::format::fmt17;
use crate::rng::{derive_seed, rng_from_seed};

/// Label given to neurons that are the BMU of no labeled sample.
pub const UNLABELED: &str = "none";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Flattens a heat grid row by row (charges outer, temperatures inner).
pub fn make_fingerprint(grid: &HeatGrid, label: Option<&str>) -> Result<Fingerprint> {
    let n_t = grid.temperatures.len();
    if grid.values.len() != grid.charges.len() || grid.values.iter().any(|r| r.len() != n_t) {
        return Err(Error::DimensionMismatch {
            expected: grid.charges.len() * n_t,
            got: grid.values.iter().map(Vec::len).sum(),
        });
    }
    let values: Vec<f64> = grid.values.concat();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite specific heat in fingerprint".into()));
    }
    Ok(Fingerprint { values, label: label.map(str::to_string) })
}

/// Exact heat-grid fingerprint of the largest weakly connected component
/// of `g`.
pub fn graph_fingerprint(
    g: &DirectedGraph,
    label: Option<&str>,
    charges: &[f64],
    temperatures: &[f64],
) -> Result<Fingerprint> {
    let component = g.largest_weakly_connected_component()?;
    make_fingerprint(&heat_grid(&component.graph, charges, temperatures)?, label)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationKind {
    None,
    Zscore,
}

/// Per-feature affine map fitted on a dataset, kept for query-time reuse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub kind: NormalizationKind,
    pub mean: Vec<f64>,
    /// Population standard deviation; zero marks a constant column.
    pub std: Vec<f64>,
}

impl Normalization {
    pub fn fit(data: &[Fingerprint], kind: NormalizationKind) -> Result<Self> {
        let dim = common_length(data)?;
        if kind == NormalizationKind::None {
            return Ok(Self { kind, mean: vec![0.0; dim], std: vec![1.0; dim] });
        }
        let n = data.len() as f64;
        let mut mean = vec![0.0; dim];
        for f in data {
            mean.iter_mut().zip(&f.values).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut std = vec![0.0; dim];
        for f in data {
            for ((s, v), m) in std.iter_mut().zip(&f.values).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        for (s, m) in std.iter_mut().zip(&mean) {
            *s = (*s / n).sqrt();
            if *s <= 1e-12 * m.abs().max(1.0) {
                *s = 0.0;
            }
        }
        Ok(Self { kind, mean, std })
    }

    pub fn apply(&self, f: &Fingerprint) -> Result<Fingerprint> {
        if f.values.len() != self.mean.len() {
            return Err(Error::DimensionMismatch { expected: self.mean.len(), got: f.values.len() });
        }
        let values = match self.kind {
            NormalizationKind::None => f.values.clone(),
            NormalizationKind::Zscore => f
                .values
                .iter()
                .zip(self.mean.iter().zip(&self.std))
                .map(|(v, (m, s))| if *s == 0.0 { 0.0 } else { (v - m) / s })
                .collect(),
        };
        Ok(Fingerprint { values, label: f.label.clone() })
    }
}

/// Fits `kind` on `data` and returns the transformed dataset.
pub fn normalize_dataset(data: &[Fingerprint], kind: NormalizationKind) -> Result<(Vec<Fingerprint>, Normalization)> {
    let norm = Normalization::fit(data, kind)?;
    let out = data.iter().map(|f| norm.apply(f)).collect::<Result<Vec<_>>>()?;
    Ok((out, norm))
}

fn common_length(data: &[Fingerprint]) -> Result<usize> {
    let first = data.first().ok_or_else(|| Error::InvalidParameter("empty fingerprint set".into()))?;
    let dim = first.values.len();
    if dim == 0 {
        return Err(Error::InvalidParameter("zero-length fingerprint".into()));
    }
    if let Some(bad) = data.iter().find(|f| f.values.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: bad.values.len() });
    }
    Ok(dim)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SomMode {
    /// Classic per-sample updates in shuffled order.
    Online,
    /// One neighborhood-weighted average per epoch; BMU search runs in parallel.
    Batch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomConfig {
    pub width: usize,
    pub height: usize,
    pub epochs: usize,
    pub learning_rate_start: f64,
    pub learning_rate_end: f64,
    /// Defaults to `max(width, height) / 2` when `None`.
    pub radius_start: Option<f64>,
    pub radius_end: f64,
    pub seed: u64,
    pub mode: SomMode,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SomConfig {
    fn default() -> Self {
        Self {
            width: 20,
            height: 20,
            epochs: 50,
            learning_rate_start: 0.5,
            learning_rate_end: 0.01,
            radius_start: None,
            radius_end: 1.0,
            seed: 0,
            mode: SomMode::Online,
            execution: Execution::default(),
        }
    }
}

impl SomConfig {
    pub fn radius_start(&self) -> f64 {
        self.radius_start.unwrap_or(self.width.max(self.height) as f64 / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.width >= 2
            && self.height >= 2
            && self.epochs >= 1
            && self.learning_rate_start > 0.0
            && self.learning_rate_end > 0.0
            && self.radius_start() > 0.0
            && self.radius_end > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "SOM needs a grid of at least 2x2, epochs >= 1, positive rates and radii".into(),
            ))
        }
    }
}

/// Value at fraction `s ∈ [0, 1]` of an exponential schedule.
fn decay(start: f64, end: f64, s: f64) -> f64 {
    start * (end / start).powf(s)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomGrid {
    pub width: usize,
    pub height: usize,
    pub codebook: Vec<Vec<f64>>,
    pub config: SomConfig,
    /// Mean sample-to-BMU distance after each epoch.
    pub quantization_errors: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl SomGrid {
    pub fn neuron_count(&self) -> usize {
        self.width * self.height
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k / self.height, k % self.height)
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        x * self.height + y
    }

    pub fn bmu(&self, sample: &[f64]) -> usize {
        bmu(&self.codebook, sample)
    }

    pub fn quantization_error(&self, data: &[Fingerprint]) -> f64 {
        quantization_error(&self.codebook, data)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Label map as CSV with columns `x,y,label`.
    pub fn labels_csv(&self) -> String {
        let mut out = String::from("x,y,label\n");
        for k in 0..self.neuron_count() {
            let (x, y) = self.coords(k);
            let label = self.labels.as_ref().map_or(UNLABELED, |l| l[k].as_str());
            let _ = writeln!(out, "{x},{y},{label}");
        }
        out
    }

    fn grid_sq_dist(&self, a: usize, b: usize) -> f64 {
        let (ax, ay) = self.coords(a);
        let (bx, by) = self.coords(b);
        let dx = ax as f64 - bx as f64;
        let dy = ay as f64 - by as f64;
        dx * dx + dy * dy
    }

    fn neighbours(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        let (x, y) = self.coords(k);
        let (w, h) = (self.width as isize, self.height as isize);
        [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)].into_iter().filter_map(move |(dx, dy)| {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            (nx >= 0 && ny >= 0 && nx < w && ny < h).then(|| self.index(nx as usize, ny as usize))
        })
    }
}

fn bmu(codebook: &[Vec<f64>], sample: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, w) in codebook.iter().enumerate() {
        let d = sq_dist(w, sample);
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    best
}

fn quantization_error(codebook: &[Vec<f64>], data: &[Fingerprint]) -> f64 {
    let total: f64 = data
        .iter()
        .map(|f| sq_dist(&codebook[bmu(codebook, &f.values)], &f.values).sqrt())
        .sum();
    total / data.len() as f64
}

/// Trains a SOM on `data`.
///
/// The codebook starts uniform within the per-feature range of the data.
/// Learning rate and neighborhood radius decay exponentially from their
/// start to their end values over the whole run (per sample in online mode,
/// per epoch in batch mode). The neighborhood is Gaussian in lattice
/// distance.
pub fn som_train(data: &[Fingerprint], cfg: &SomConfig) -> Result<SomGrid> {
    cfg.validate()?;
    let dim = common_length(data)?;
    let n_neurons = cfg.width * cfg.height;

    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for f in data {
        for (i, &v) in f.values.iter().enumerate() {
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    let mut init_rng = rng_from_seed(derive_seed(cfg.seed, &[0]));
    let codebook: Vec<Vec<f64>> = (0..n_neurons)
        .map(|_| (0..dim).map(|i| lo[i] + (hi[i] - lo[i]) * init_rng.random::<f64>()).collect())
        .collect();

    let mut som = SomGrid {
        width: cfg.width,
        height: cfg.height,
        codebook,
        config: cfg.clone(),
        quantization_errors: Vec::with_capacity(cfg.epochs),
        labels: None,
    };
    let r0 = cfg.radius_start();
    match cfg.mode {
        SomMode::Online => {
            let total_steps = (cfg.epochs * data.len()).max(2) - 1;
            let mut order: Vec<usize> = (0..data.len()).collect();
            let mut step = 0usize;
            for epoch in 0..cfg.epochs {
                order.shuffle(&mut rng_from_seed(derive_seed(cfg.seed, &[1, epoch as u64])));
                for &s in &order {
                    let frac = step as f64 / total_steps as f64;
                    let lr = decay(cfg.learning_rate_start, cfg.learning_rate_end, frac);
                    let sigma = decay(r0, cfg.radius_end, frac);
                    let x = &data[s].values;
                    let winner = som.bmu(x);
                    for k in 0..n_neurons {
                        let h = (-som.grid_sq_dist(k, winner) / (2.0 * sigma * sigma)).exp();
                        let rate = lr * h;
                        if rate < 1e-12 {
                            continue;
                        }
                        for (w, v) in som.codebook[k].iter_mut().zip(x) {
                            *w += rate * (v - *w);
                        }
                    }
                    step += 1;
                }
                let qe = som.quantization_error(data);
                som.quantization_errors.push(qe);
            }
        }
        SomMode::Batch => {
            let denom = (cfg.epochs.max(2) - 1) as f64;
            for epoch in 0..cfg.epochs {
                let sigma = decay(r0, cfg.radius_end, epoch as f64 / denom);
                let winners = cfg.execution.map(data.len(), |s| som.bmu(&data[s].values));
                let updated = cfg.execution.map(n_neurons, |k| {
                    let mut acc = vec![0.0; dim];
                    let mut mass = 0.0;
                    for (f, &b) in data.iter().zip(&winners) {
                        let h = (-som.grid_sq_dist(k, b) / (2.0 * sigma * sigma)).exp();
                        mass += h;
                        acc.iter_mut().zip(&f.values).for_each(|(a, v)| *a += h * v);
                    }
                    if mass > 1e-300 {
                        acc.iter_mut().for_each(|a| *a /= mass);
                        acc
                    } else {
                        som.codebook[k].clone()
                    }
                });
                som.codebook = updated;
                let qe = som.quantization_error(data);
                som.quantization_errors.push(qe);
            }
        }
    }
    Ok(som)
}

/// Labels every neuron by majority vote over the labeled samples it wins.
/// Ties go to the lexicographically smallest label; neurons winning no
/// labeled sample get [`UNLABELED`].
pub fn label_neurons(som: &mut SomGrid, data: &[Fingerprint]) -> Result<()> {
    let votes = neuron_votes(som, data)?;
    som.labels = Some(
        votes
            .iter()
            .map(|v| {
                // BTreeMap iterates in label order, and `>` keeps the first maximum.
                let mut best: Option<(&String, usize)> = None;
                for (label, &count) in v {
                    if best.is_none_or(|(_, c)| count > c) {
                        best = Some((label, count));
                    }
                }
                best.map_or_else(|| UNLABELED.to_string(), |(l, _)| l.clone())
            })
            .collect(),
    );
    Ok(())
}

fn neuron_votes(som: &SomGrid, data: &[Fingerprint]) -> Result<Vec<BTreeMap<String, usize>>> {
    let mut votes = vec![BTreeMap::new(); som.neuron_count()];
    let mut any = false;
    for f in data {
        if f.values.len() != som.codebook[0].len() {
            return Err(Error::DimensionMismatch { expected: som.codebook[0].len(), got: f.values.len() });
        }
        if let Some(label) = &f.label {
            any = true;
            *votes[som.bmu(&f.values)].entry(label.clone()).or_insert(0) += 1;
        }
    }
    if !any {
        return Err(Error::InvalidParameter("no labeled fingerprints".into()));
    }
    Ok(votes)
}

/// Fraction of labeled samples that fall into the majority class of their
/// BMU.
pub fn purity(som: &SomGrid, data: &[Fingerprint]) -> Result<f64> {
    let votes = neuron_votes(som, data)?;
    let total: usize = votes.iter().flat_map(|v| v.values()).sum();
    let majority: usize = votes.iter().map(|v| v.values().copied().max().unwrap_or(0)).sum();
    Ok(majority as f64 / total as f64)
}

/// Fraction of labeled neurons whose nearest other labeled neuron (lattice
/// distance) carries the same label, counting a tie as a match if any of the
/// nearest neurons agrees. Near 1 when each class occupies one region.
pub fn label_contiguity(som: &SomGrid) -> Result<f64> {
    let labels = som.labels.as_ref().ok_or_else(|| Error::InvalidParameter("SOM is not labeled".into()))?;
    let labeled: Vec<usize> = (0..som.neuron_count()).filter(|&k| labels[k] != UNLABELED).collect();
    if labeled.len() < 2 {
        return Ok(1.0);
    }
    let mut agree = 0usize;
    for &k in &labeled {
        let nearest = labeled
            .iter()
            .filter(|&&j| j != k)
            .map(|&j| som.grid_sq_dist(k, j))
            .fold(f64::INFINITY, f64::min);
        let matched = labeled
            .iter()
            .any(|&j| j != k && som.grid_sq_dist(k, j) == nearest && labels[j] == labels[k]);
        agree += matched as usize;
    }
    Ok(agree as f64 / labeled.len() as f64)
}

/// Mean codebook distance of each neuron to its lattice 4-neighbors,
/// indexed `[x][y]`.
pub fn u_matrix(som: &SomGrid) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; som.height]; som.width];
    for k in 0..som.neuron_count() {
        let (x, y) = som.coords(k);
        let (sum, count) = som
            .neighbours(k)
            .fold((0.0, 0usize), |(s, c), j| (s + sq_dist(&som.codebook[k], &som.codebook[j]).sqrt(), c + 1));
        out[x][y] = if count == 0 { 0.0 } else { sum / count as f64 };
    }
    out
}

/// U-matrix as CSV with columns `x,y,u`.
pub fn u_matrix_csv(u: &[Vec<f64>]) -> String {
    let mut out = String::from("x,y,u\n");
    for (x, col) in u.iter().enumerate() {
        for (y, v) in col.iter().enumerate() {
            let _ = writeln!(out, "{x},{y},{}", fmt17(*v));
        }
    }
    out
}
