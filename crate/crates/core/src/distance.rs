//! Wasserstein distances between spectral densities and parameter inference
//! by distance minimization over a grid.
//!
//! Densities are the discrete measures produced by the KPM (support = the
//! Chebyshev evaluation nodes mapped back to the spectrum). Two densities
//! need not have the same number of atoms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::fmt17;
use crate::generators::Model;
use crate::graph::DirectedGraph;
use crate::kpm::{estimate_density, KpmConfig, SpectralDensity};
use crate::operator::MagneticOperator;
use crate::rng::derive_seed;
use crate::transport::min_cost_transport;

/// Largest support accepted by [`wasserstein_lp_oracle`].
pub const LP_ORACLE_LIMIT: usize = 200;

fn check_order(d: f64) -> Result<()> {
    if d >= 1.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("Wasserstein order must be >= 1, got {d}")))
    }
}

fn ground_cost(x: f64, y: f64, d: f64) -> f64 {
    let gap = (x - y).abs();
    if d == 1.0 {
        gap
    } else if d == 2.0 {
        gap * gap
    } else {
        gap.powf(d)
    }
}

fn root(cost: f64, d: f64) -> f64 {
    if d == 1.0 {
        cost
    } else {
        cost.max(0.0).powf(1.0 / d)
    }
}

/// `W_d(a, b)` from the quantile functions.
///
/// Both quantile functions are step functions on `[0, 1]`; walking the merged
/// breakpoints of the two cumulative weight sequences gives the exact
/// integral of `|F_a^{-1} - F_b^{-1}|^d`.
pub fn wasserstein_1d(a: &SpectralDensity, b: &SpectralDensity, d: f64) -> Result<f64> {
    check_order(d)?;
    a.validate()?;
    b.validate()?;
    let (na, nb) = (a.support.len(), b.support.len());
    // The last cumulative value is pinned to 1 so rounding in the sums
    // cannot leave a sliver of unmatched mass.
    let cum = |w: &[f64], n: usize, i: usize, prev: f64| if i + 1 == n { 1.0 } else { prev + w[i] };
    let (mut i, mut j) = (0, 0);
    let mut ca = cum(&a.weights, na, 0, 0.0);
    let mut cb = cum(&b.weights, nb, 0, 0.0);
    let mut level = 0.0f64;
    let mut cost = 0.0;
    loop {
        let next = ca.min(cb).max(level);
        cost += (next - level) * ground_cost(a.support[i], b.support[j], d);
        level = next;
        let a_last = i + 1 == na;
        let b_last = j + 1 == nb;
        if a_last && b_last {
            break;
        }
        if b_last || (!a_last && ca <= cb) {
            i += 1;
            ca = cum(&a.weights, na, i, ca);
        } else {
            j += 1;
            cb = cum(&b.weights, nb, j, cb);
        }
    }
    Ok(root(cost, d))
}

/// `W_d(a, b)` by solving the transport linear program exactly.
///
/// Independent of the quantile construction; intended for cross-checking on
/// small supports.
pub fn wasserstein_lp_oracle(a: &SpectralDensity, b: &SpectralDensity, d: f64) -> Result<f64> {
    check_order(d)?;
    a.validate()?;
    b.validate()?;
    for m in [a, b] {
        if m.support.len() > LP_ORACLE_LIMIT {
            return Err(Error::DimensionTooLarge { dim: m.support.len(), limit: LP_ORACLE_LIMIT });
        }
    }
    let cost: Vec<Vec<f64>> = a
        .support
        .iter()
        .map(|&x| b.support.iter().map(|&y| ground_cost(x, y, d)).collect())
        .collect();
    let total_a: f64 = a.weights.iter().sum();
    let total_b: f64 = b.weights.iter().sum();
    let demand: Vec<f64> = b.weights.iter().map(|w| w * total_a / total_b).collect();
    Ok(root(min_cost_transport(&a.weights, &demand, &cost)?, d))
}

/// Two measures and an order, validated together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingProblem {
    pub left: SpectralDensity,
    pub right: SpectralDensity,
    pub order: f64,
}

impl CouplingProblem {
    pub fn new(left: SpectralDensity, right: SpectralDensity, order: f64) -> Result<Self> {
        check_order(order)?;
        left.validate()?;
        right.validate()?;
        Ok(Self { left, right, order })
    }

    pub fn distance(&self) -> Result<f64> {
        wasserstein_1d(&self.left, &self.right, self.order)
    }

    pub fn distance_lp(&self) -> Result<f64> {
        wasserstein_lp_oracle(&self.left, &self.right, self.order)
    }
}

/// One-parameter slice through a network family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SweepModel {
    /// Parameter: edge probability `p`.
    ErdosRenyi { n: usize },
    /// Parameter: edges per new node `m` (must be integral).
    BarabasiAlbert { n: usize },
    /// Parameter: intra-block probability `p_c`.
    CyclicSbmIntra { n_f: usize, n_c: usize, p_d: f64 },
    /// Parameter: forward inter-block probability `p_d`.
    CyclicSbmInter { n_f: usize, n_c: usize, p_c: f64 },
    /// Parameter: rewiring probability `beta`.
    WattsStrogatz { n: usize, k: usize },
}

impl SweepModel {
    pub fn model(&self, param: f64) -> Result<Model> {
        let model = match *self {
            SweepModel::ErdosRenyi { n } => Model::ErdosRenyi { n, p: param },
            SweepModel::BarabasiAlbert { n } => {
                if !(param >= 1.0 && param.fract() == 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "BA parameter must be a positive integer, got {param}"
                    )));
                }
                Model::BarabasiAlbert { n, m: param as usize }
            }
            SweepModel::CyclicSbmIntra { n_f, n_c, p_d } => Model::CyclicSbm { n_f, n_c, p_c: param, p_d },
            SweepModel::CyclicSbmInter { n_f, n_c, p_c } => Model::CyclicSbm { n_f, n_c, p_c, p_d: param },
            SweepModel::WattsStrogatz { n, k } => Model::WattsStrogatz { n, k, beta: param },
        };
        model.validate()?;
        Ok(model)
    }

    pub fn parameter_name(&self) -> &'static str {
        match self {
            SweepModel::ErdosRenyi { .. } => "p",
            SweepModel::BarabasiAlbert { .. } => "m",
            SweepModel::CyclicSbmIntra { .. } => "p_c",
            SweepModel::CyclicSbmInter { .. } => "p_d",
            SweepModel::WattsStrogatz { .. } => "beta",
        }
    }
}

/// Settings shared by every distance evaluation of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceConfig {
    pub charges: Vec<f64>,
    pub n_exp: usize,
    pub order: f64,
    pub kpm: KpmConfig,
    /// Root of the seed tree for candidate realizations.
    pub seed: u64,
}

impl InferenceConfig {
    pub fn new(charges: Vec<f64>, n_exp: usize, kpm: KpmConfig, seed: u64) -> Self {
        Self { charges, n_exp, order: 1.0, kpm, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.charges.is_empty() || self.charges.iter().any(|q| !q.is_finite()) {
            return Err(Error::InvalidParameter("charge set must be non-empty and finite".into()));
        }
        if self.n_exp == 0 {
            return Err(Error::InvalidParameter("n_exp must be >= 1".into()));
        }
        check_order(self.order)?;
        self.kpm.validate()
    }
}

/// KPM densities of the normalized operator of the largest weakly connected
/// component of `g`, one per charge.
pub fn component_densities(g: &DirectedGraph, charges: &[f64], kpm: &KpmConfig) -> Result<Vec<SpectralDensity>> {
    let component = g.largest_weakly_connected_component()?;
    let sg = component.graph.symmetrize();
    charges
        .iter()
        .map(|&q| {
            let op = MagneticOperator::normalized(&sg, q)?;
            Ok(estimate_density(&op, kpm)?.density)
        })
        .collect()
}

/// Distance between two graphs, charge by charge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDistance {
    pub charges: Vec<f64>,
    pub per_charge: Vec<f64>,
    /// Average of `per_charge`.
    pub mean: f64,
    pub order: f64,
    pub kpm: KpmConfig,
}

/// `W_d` between the component densities of `a` and `b` at each charge.
/// Both graphs use the same probe seed.
pub fn graph_distance(
    a: &DirectedGraph,
    b: &DirectedGraph,
    charges: &[f64],
    order: f64,
    kpm: &KpmConfig,
) -> Result<GraphDistance> {
    InferenceConfig { charges: charges.to_vec(), n_exp: 1, order, kpm: kpm.clone(), seed: 0 }.validate()?;
    let da = component_densities(a, charges, kpm)?;
    let db = component_densities(b, charges, kpm)?;
    let per_charge = da.iter().zip(&db).map(|(x, y)| wasserstein_1d(x, y, order)).collect::<Result<Vec<_>>>()?;
    let mean = per_charge.iter().sum::<f64>() / per_charge.len() as f64;
    Ok(GraphDistance { charges: charges.to_vec(), per_charge, mean, order, kpm: kpm.clone() })
}

/// Distances of one candidate parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanDistance {
    pub mean: f64,
    /// `per_realization[r][k]` is the distance at charge `k` for realization `r`.
    pub per_realization: Vec<Vec<f64>>,
}

/// Average of `W_d(target_q, candidate_q)` over the charges, then over
/// `n_exp` realizations generated at `param`.
///
/// Realization `r` of parameter slot `param_index` draws its graph from seed
/// `derive_seed(cfg.seed, [param_index, r, 0])` and its KPM probes from
/// `derive_seed(cfg.seed, [param_index, r, 1])`.
pub fn mean_wasserstein(
    targets: &[SpectralDensity],
    model: &SweepModel,
    param: f64,
    param_index: usize,
    cfg: &InferenceConfig,
) -> Result<MeanDistance> {
    cfg.validate()?;
    if targets.len() != cfg.charges.len() {
        return Err(Error::DimensionMismatch { expected: cfg.charges.len(), got: targets.len() });
    }
    let generator = model.model(param)?;
    let per_realization = cfg.kpm.execution.try_map(cfg.n_exp, |r| {
        let path = [param_index as u64, r as u64];
        let g = generator.generate(derive_seed(cfg.seed, &[path[0], path[1], 0]))?;
        let kpm = cfg.kpm.clone().with_seed(derive_seed(cfg.seed, &[path[0], path[1], 1]));
        let densities = component_densities(&g, &cfg.charges, &kpm)?;
        targets
            .iter()
            .zip(&densities)
            .map(|(t, c)| wasserstein_1d(t, c, cfg.order))
            .collect::<Result<Vec<f64>>>()
    })?;
    let n_q = cfg.charges.len() as f64;
    let mean = per_realization.iter().map(|row| row.iter().sum::<f64>() / n_q).sum::<f64>()
        / cfg.n_exp as f64;
    Ok(MeanDistance { mean, per_realization })
}

/// Outcome of a grid sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceReport {
    pub model: SweepModel,
    pub parameter: String,
    pub grid: Vec<f64>,
    pub mean_distances: Vec<f64>,
    /// `distances[i][r][k]`: parameter `i`, realization `r`, charge `k`.
    pub distances: Vec<Vec<Vec<f64>>>,
    pub best_index: usize,
    pub best_param: f64,
    pub best_distance: f64,
    pub config: InferenceConfig,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub config_hash: Option<String>,
}

impl InferenceReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `param,mean_distance` rows in grid order.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("param,mean_distance\n");
        for (p, w) in self.grid.iter().zip(&self.mean_distances) {
            let _ = writeln!(out, "{},{}", fmt17(*p), fmt17(*w));
        }
        out
    }
}

/// Grid search for the parameter whose realizations are spectrally closest
/// to `target`. Ties go to the smaller parameter.
///
/// Target densities use the probe seed in `cfg.kpm.seed` and are computed
/// once per charge.
pub fn infer_parameter(
    target: &DirectedGraph,
    model: &SweepModel,
    grid: &[f64],
    cfg: &InferenceConfig,
) -> Result<InferenceReport> {
    cfg.validate()?;
    if grid.is_empty() {
        return Err(Error::InvalidParameter("parameter grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("parameter grid must be strictly increasing".into()));
    }
    let targets = component_densities(target, &cfg.charges, &cfg.kpm)?;
    let results = cfg
        .kpm
        .execution
        .try_map(grid.len(), |i| mean_wasserstein(&targets, model, grid[i], i, cfg))?;
    let mean_distances: Vec<f64> = results.iter().map(|r| r.mean).collect();
    let mut best_index = 0;
    for (i, &w) in mean_distances.iter().enumerate() {
        if w < mean_distances[best_index] {
            best_index = i;
        }
    }
    Ok(InferenceReport {
        model: model.clone(),
        parameter: model.parameter_name().to_string(),
        grid: grid.to_vec(),
        best_param: grid[best_index],
        best_distance: mean_distances[best_index],
        best_index,
        mean_distances,
        distances: results.into_iter().map(|r| r.per_realization).collect(),
        config: cfg.clone(),
        config_hash: None,
    })
}
