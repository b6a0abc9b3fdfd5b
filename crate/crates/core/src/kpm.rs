//! Kernel polynomial estimation of spectral densities.
//!
//! The operator is mapped affinely onto `[-1 + ε, 1 - ε]`, Chebyshev moments
//! `μ_m = Tr T_m(H̃) / N` are estimated with random probe vectors whose
//! entries are independent uniform phases (`|v_i| = 1`), damped with the
//! Jackson kernel and resummed at Chebyshev nodes into a discrete probability
//! measure. Thermal trace functions are then read off that measure.
//!
//! Probe `r` is seeded with `derive_seed(config.seed, [r])`; probes run in
//! parallel and their moments are averaged in probe order.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::HeatGrid;
use crate::exec::Execution;
use crate::format::fmt17;
use crate::graph::DirectedGraph;
use crate::operator::{MagneticOperator, OperatorKind};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Jackson,
    None,
}

/// How the trace of each Chebyshev polynomial is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMode {
    /// Hutchinson estimate with `num_random_vectors` random-phase probes.
    Stochastic,
    /// Exact trace over all `N` basis vectors; for small operators and tests.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpmConfig {
    pub num_moments: usize,
    pub num_random_vectors: usize,
    /// Number of Chebyshev nodes carrying the output measure.
    pub grid_points: usize,
    pub kernel: Kernel,
    pub trace: TraceMode,
    pub seed: u64,
    pub safety_margin: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for KpmConfig {
    /// 100 moments and 20 probes, the setting used for distance-based inference.
    fn default() -> Self {
        Self::new(100, 20)
    }
}

impl KpmConfig {
    pub fn new(num_moments: usize, num_random_vectors: usize) -> Self {
        Self {
            num_moments,
            num_random_vectors,
            grid_points: 4 * num_moments.max(64),
            kernel: Kernel::Jackson,
            trace: TraceMode::Stochastic,
            seed: 0,
            safety_margin: 0.01,
            execution: Execution::default(),
        }
    }

    /// 40 moments and 25 probes, the setting used for specific-heat grids.
    pub fn heat_defaults() -> Self {
        Self::new(40, 25)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.num_moments < 2 {
            return bad("num_moments must be >= 2");
        }
        if self.num_random_vectors < 1 {
            return bad("num_random_vectors must be >= 1");
        }
        if self.grid_points < 1 {
            return bad("grid_points must be >= 1");
        }
        if !(self.safety_margin >= 0.0 && self.safety_margin < 0.5) {
            return bad("safety_margin must lie in [0, 0.5)");
        }
        Ok(())
    }
}

/// `x = (λ - center) / half_width`, i.e. `λ = half_width · x + center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub half_width: f64,
    pub center: f64,
}

impl AffineMap {
    pub fn to_unit(&self, lambda: f64) -> f64 {
        (lambda - self.center) / self.half_width
    }

    pub fn from_unit(&self, x: f64) -> f64 {
        self.half_width * x + self.center
    }
}

/// Operator view `(H - center) / half_width`.
#[derive(Debug, Clone, Copy)]
pub struct RescaledOperator<'a> {
    pub op: &'a MagneticOperator,
    pub map: AffineMap,
}

impl RescaledOperator<'_> {
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.op.apply(x, y);
        let inv = 1.0 / self.map.half_width;
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = (*yi - xi * self.map.center) * inv;
        }
    }
}

/// Result of [`rescale`].
#[derive(Debug, Clone, Copy)]
pub enum Rescaled<'a> {
    Operator(RescaledOperator<'a>),
    /// The certified bounds collapse to one point: the density is a delta there.
    Point(f64),
}

/// Maps the certified spectral interval onto `[-1 + ε, 1 - ε]`.
pub fn rescale(op: &MagneticOperator, safety_margin: f64) -> Rescaled<'_> {
    let (lo, hi) = op.spectral_bounds();
    if hi <= lo {
        return Rescaled::Point(lo);
    }
    let map = AffineMap {
        half_width: (hi - lo) / (2.0 - 2.0 * safety_margin),
        center: 0.5 * (hi + lo),
    };
    Rescaled::Operator(RescaledOperator { op, map })
}

fn random_phases(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = rng_from_seed(seed);
    (0..n)
        .map(|_| {
            let (s, c) = (2.0 * PI * rng.random::<f64>()).sin_cos();
            Complex64::new(c, s)
        })
        .collect()
}

/// `⟨v, T_m(H̃) v⟩` for `m < num_moments`, by the three-term recurrence.
fn probe_moments(h: &RescaledOperator<'_>, v: &[Complex64], num_moments: usize) -> Vec<f64> {
    let n = v.len();
    let dot = |a: &[Complex64], b: &[Complex64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
    };
    let mut out = Vec::with_capacity(num_moments);
    let mut prev = v.to_vec();
    let mut cur = vec![Complex64::new(0.0, 0.0); n];
    h.apply(v, &mut cur);
    out.push(dot(v, v));
    if num_moments > 1 {
        out.push(dot(v, &cur));
    }
    let mut next = vec![Complex64::new(0.0, 0.0); n];
    for _ in 2..num_moments {
        h.apply(&cur, &mut next);
        for (nx, p) in next.iter_mut().zip(&prev) {
            *nx = *nx * 2.0 - p;
        }
        out.push(dot(v, &next));
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    out
}

/// Chebyshev moments `μ_0 .. μ_{M-1}` of the rescaled operator, normalized
/// by the dimension. `μ_0` is exactly 1.
pub fn chebyshev_moments(h: &RescaledOperator<'_>, cfg: &KpmConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n = h.dim();
    let m = cfg.num_moments;
    let per_probe: Vec<Vec<f64>> = match cfg.trace {
        TraceMode::Stochastic => cfg.execution.map(cfg.num_random_vectors, |r| {
            let v = random_phases(n, derive_seed(cfg.seed, &[r as u64]));
            probe_moments(h, &v, m)
        }),
        TraceMode::Exact => cfg.execution.map(n, |i| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[i] = Complex64::new(1.0, 0.0);
            probe_moments(h, &e, m)
        }),
    };
    // Phase probes have squared norm n, basis vectors norm 1.
    let scale = match cfg.trace {
        TraceMode::Stochastic => 1.0 / (per_probe.len() as f64 * n as f64),
        TraceMode::Exact => 1.0 / n as f64,
    };
    let mut mu = vec![0.0; m];
    for moments in &per_probe {
        for (k, (acc, &x)) in mu.iter_mut().zip(moments).enumerate() {
            if !x.is_finite() || x.abs() > (1.0 + 1e-8) * n as f64 {
                return Err(Error::Numerical(format!(
                    "Chebyshev moment {k} left [-1, 1]; spectral bounds are not an enclosure"
                )));
            }
            *acc += x;
        }
    }
    mu.iter_mut().for_each(|x| *x *= scale);
    mu[0] = 1.0;
    Ok(mu)
}

/// Moments `(1/N) Σ_l T_m(x_l)` of a known list of eigenvalues.
pub fn moments_from_levels(levels: &[f64], map: AffineMap, num_moments: usize) -> Vec<f64> {
    let mut mu = vec![0.0; num_moments];
    for &lam in levels {
        let x = map.to_unit(lam);
        let (mut t0, mut t1) = (1.0, x);
        for (m, slot) in mu.iter_mut().enumerate() {
            let t = match m {
                0 => 1.0,
                1 => x,
                _ => {
                    let t2 = 2.0 * x * t1 - t0;
                    t0 = t1;
                    t1 = t2;
                    t2
                }
            };
            *slot += t;
        }
    }
    let n = levels.len().max(1) as f64;
    mu.iter_mut().for_each(|x| *x /= n);
    mu
}

/// Jackson damping factor `g_m` for an expansion of `num_moments` terms.
pub fn jackson_coefficient(m: usize, num_moments: usize) -> f64 {
    let big = num_moments as f64 + 1.0;
    let arg = PI * m as f64 / big;
    ((big - m as f64) * arg.cos() + arg.sin() / (PI / big).tan()) / big
}

pub fn jackson_damp(moments: &[f64]) -> Vec<f64> {
    let n = moments.len();
    moments
        .iter()
        .enumerate()
        .map(|(m, &mu)| mu * jackson_coefficient(m, n))
        .collect()
}

/// Discrete probability measure on the real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    /// Ascending support points.
    pub support: Vec<f64>,
    pub weights: Vec<f64>,
    /// Dimension of the operator the density describes.
    pub dimension: usize,
}

impl SpectralDensity {
    /// Single atom of mass one.
    pub fn delta(at: f64, dimension: usize) -> Self {
        Self { support: vec![at], weights: vec![1.0], dimension }
    }

    /// Uniform measure over a list of eigenvalues.
    pub fn from_levels(levels: &[f64]) -> Self {
        let mut support = levels.to_vec();
        support.sort_by(f64::total_cmp);
        let w = 1.0 / levels.len() as f64;
        Self { weights: vec![w; support.len()], support, dimension: levels.len() }
    }

    /// Checks sizes, finiteness, ordering and the simplex condition.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSimplex(m));
        if self.support.is_empty() || self.support.len() != self.weights.len() {
            return bad(format!(
                "support has {} points, weights {}",
                self.support.len(),
                self.weights.len()
            ));
        }
        if self.support.iter().any(|x| !x.is_finite()) {
            return bad("non-finite support point".into());
        }
        if self.support.windows(2).any(|w| w[0] > w[1]) {
            return bad("support not ascending".into());
        }
        if self.weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return bad("negative or non-finite weight".into());
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("weights sum to {total}"));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.weights).map(|(x, w)| x * w).sum()
    }

    /// Two columns, `lambda,weight`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,weight\n");
        for (x, w) in self.support.iter().zip(&self.weights) {
            let _ = writeln!(out, "{},{}", fmt17(*x), fmt17(*w));
        }
        out
    }
}

/// Resums damped moments at `n` Chebyshev nodes into a discrete measure.
///
/// With `θ_k = π (k + 1/2) / n` the weight of node `cos θ_k` is
/// `(1/n) [μ_0 + 2 Σ_m μ_m cos(m θ_k)]`, i.e. the density times the
/// Gauss–Chebyshev quadrature weight. Negative weights are clipped and the
/// rest renormalized.
pub fn dos_estimate(
    damped: &[f64],
    map: AffineMap,
    n: usize,
    dimension: usize,
) -> Result<SpectralDensity> {
    if n == 0 || damped.is_empty() {
        return Err(Error::InvalidParameter("need at least one node and one moment".into()));
    }
    let mut support = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    // k descending gives ascending x = cos θ_k.
    for k in (0..n).rev() {
        let theta = PI * (k as f64 + 0.5) / n as f64;
        let series: f64 = damped
            .iter()
            .enumerate()
            .skip(1)
            .map(|(m, mu)| mu * (m as f64 * theta).cos())
            .sum();
        let w = (damped[0] + 2.0 * series) / n as f64;
        support.push(map.from_unit(theta.cos()));
        weights.push(w.max(0.0));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Numerical("all density weights vanished after clipping".into()));
    }
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(SpectralDensity { support, weights, dimension })
}

/// Everything produced by one KPM run, kept for provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KpmEstimate {
    pub density: SpectralDensity,
    /// Undamped moments; empty for a point spectrum.
    pub moments: Vec<f64>,
    pub map: Option<AffineMap>,
    pub charge: f64,
    pub kind: OperatorKind,
    pub config: KpmConfig,
}

impl KpmEstimate {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Full pipeline on one operator: rescale, moments, damping, resummation.
pub fn estimate_density(op: &MagneticOperator, cfg: &KpmConfig) -> Result<KpmEstimate> {
    cfg.validate()?;
    let make = |density, moments, map| KpmEstimate {
        density,
        moments,
        map,
        charge: op.charge(),
        kind: op.kind(),
        config: cfg.clone(),
    };
    match rescale(op, cfg.safety_margin) {
        Rescaled::Point(at) => Ok(make(SpectralDensity::delta(at, op.dim()), Vec::new(), None)),
        Rescaled::Operator(h) => {
            let moments = chebyshev_moments(&h, cfg)?;
            let damped = match cfg.kernel {
                Kernel::Jackson => jackson_damp(&moments),
                Kernel::None => moments.clone(),
            };
            let density = dos_estimate(&damped, h.map, cfg.grid_points, op.dim())?;
            Ok(make(density, moments, Some(h.map)))
        }
    }
}

/// Trace functionals evaluated on a spectral density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceFunction {
    /// `Tr 1 = N`.
    One,
    /// `Z(T) = Tr exp(-H/T)`.
    Partition { temperature: f64 },
    /// `Tr exp(-H)`.
    Estrada,
    /// `Tr H`.
    Mean,
    /// `Tr H²`.
    SecondMoment,
    /// Gibbs entropy `ln Z + ⟨H⟩/T` in nats.
    Entropy { temperature: f64 },
    /// `(⟨H²⟩ - ⟨H⟩²) / T²`.
    SpecificHeat { temperature: f64 },
}

fn thermal_weights(density: &SpectralDensity, t: f64) -> Result<(Vec<f64>, f64)> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTemperature(t));
    }
    let shift = density
        .support
        .iter()
        .zip(&density.weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(x, _)| *x)
        .fold(f64::INFINITY, f64::min);
    let w = density
        .support
        .iter()
        .zip(&density.weights)
        .map(|(x, p)| p * (-(x - shift) / t).exp())
        .collect();
    Ok((w, shift))
}

pub fn trace_function(density: &SpectralDensity, f: TraceFunction) -> Result<f64> {
    let n = density.dimension as f64;
    let pairs = || density.support.iter().zip(&density.weights);
    Ok(match f {
        TraceFunction::One => n * density.weights.iter().sum::<f64>(),
        TraceFunction::Estrada => n * pairs().map(|(x, p)| p * (-x).exp()).sum::<f64>(),
        TraceFunction::Mean => n * pairs().map(|(x, p)| p * x).sum::<f64>(),
        TraceFunction::SecondMoment => n * pairs().map(|(x, p)| p * x * x).sum::<f64>(),
        TraceFunction::Partition { temperature } => {
            let (w, shift) = thermal_weights(density, temperature)?;
            n * w.iter().sum::<f64>() * (-shift / temperature).exp()
        }
        TraceFunction::Entropy { temperature } => {
            let (w, shift) = thermal_weights(density, temperature)?;
            let total: f64 = w.iter().sum();
            let mean: f64 = w.iter().zip(&density.support).map(|(w, x)| w * x).sum::<f64>() / total;
            let log_z = (n * total).ln() - shift / temperature;
            log_z + mean / temperature
        }
        TraceFunction::SpecificHeat { temperature } => {
            let (w, _) = thermal_weights(density, temperature)?;
            let total: f64 = w.iter().sum();
            let mean: f64 = w.iter().zip(&density.support).map(|(w, x)| w * x).sum::<f64>() / total;
            let var: f64 = w
                .iter()
                .zip(&density.support)
                .map(|(w, x)| w * (x - mean) * (x - mean))
                .sum::<f64>()
                / total;
            var / (temperature * temperature)
        }
    })
}

/// Specific-heat grid from one KPM density per charge.
///
/// Every charge uses the same probe seeds, so differences between charges are
/// not inflated by independent probe noise.
pub fn kpm_heat_grid(
    g: &DirectedGraph,
    charges: &[f64],
    temperatures: &[f64],
    cfg: &KpmConfig,
) -> Result<HeatGrid> {
    if charges.is_empty() || temperatures.is_empty() {
        return Err(Error::InvalidParameter("heat grid needs at least one charge and one temperature".into()));
    }
    let sg = g.symmetrize();
    let values = cfg.execution.try_map(charges.len(), |i| {
        let op = MagneticOperator::normalized(&sg, charges[i])?;
        let est = estimate_density(&op, cfg)?;
        temperatures
            .iter()
            .map(|&t| trace_function(&est.density, TraceFunction::SpecificHeat { temperature: t }))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(HeatGrid {
        charges: charges.to_vec(),
        temperatures: temperatures.to_vec(),
        values,
        kind: OperatorKind::Normalized,
        method: "kpm".into(),
        graph_id: None,
    })
}
