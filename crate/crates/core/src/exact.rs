//! Dense spectra and the thermodynamic measures built on them.
//!
//! Eigenvalues are treated as energy levels of a Boltzmann–Gibbs ensemble at
//! temperature `T`: `Z = Σ exp(-λ_l / T)`, `p_l = exp(-λ_l / T) / Z`. All
//! weights are evaluated relative to the smallest eigenvalue, so the largest
//! exponent is zero and nothing overflows at small `T`.

use std::fmt::Write as _;

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::format::{fmt17, linspace};
use crate::graph::DirectedGraph;
use crate::operator::{MagneticOperator, OperatorKind};

/// Largest dimension handed to the dense eigensolver by default.
pub const DEFAULT_DENSE_LIMIT: usize = 4000;

/// Floor applied to Boltzmann weights before taking logarithms.
pub const PROBABILITY_FLOOR: f64 = 1e-300;

/// Ascending eigenvalues, optionally with the matching unitary eigenvector
/// matrix (column `l` belongs to eigenvalue `l`).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Mat<Complex64>>,
    pub charge: Option<f64>,
}

impl Spectrum {
    /// Wraps a bare list of levels, sorting it ascending.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        Self { eigenvalues, eigenvectors: None, charge: None }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// One value per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda\n");
        for &x in &self.eigenvalues {
            let _ = writeln!(out, "{}", fmt17(x));
        }
        out
    }
}

pub fn eig_hermitian(op: &MagneticOperator, want_vectors: bool) -> Result<Spectrum> {
    eig_hermitian_limited(op, want_vectors, DEFAULT_DENSE_LIMIT)
}

/// Full eigendecomposition of the operator through a dense Hermitian solver.
pub fn eig_hermitian_limited(
    op: &MagneticOperator,
    want_vectors: bool,
    dense_limit: usize,
) -> Result<Spectrum> {
    let n = op.dim();
    if n > dense_limit {
        return Err(Error::DimensionTooLarge { dim: n, limit: dense_limit });
    }
    let dense = op.to_dense();
    let numerical = |e: faer::linalg::evd::EvdError| Error::Numerical(format!("{e:?}"));
    let (eigenvalues, eigenvectors) = if want_vectors {
        let evd = dense.self_adjoint_eigen(Side::Lower).map_err(numerical)?;
        let s = evd.S().column_vector();
        let values = (0..n).map(|i| s[i].re).collect();
        (values, Some(evd.U().to_owned()))
    } else {
        (dense.self_adjoint_eigenvalues(Side::Lower).map_err(numerical)?, None)
    };
    Ok(Spectrum { eigenvalues, eigenvectors, charge: Some(op.charge()) })
}

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveTemperature(t))
    }
}

fn min_level(levels: &[f64]) -> f64 {
    levels.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Normalized Boltzmann weights `p_l`; they sum to one up to rounding.
pub fn boltzmann_weights(levels: &[f64], t: f64) -> Result<Vec<f64>> {
    check_temperature(t)?;
    if levels.is_empty() {
        return Ok(Vec::new());
    }
    let shift = min_level(levels);
    let mut w: Vec<f64> = levels.iter().map(|&l| (-(l - shift) / t).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    Ok(w)
}

/// `ln Z`, evaluated without overflow.
pub fn log_partition_function(levels: &[f64], t: f64) -> Result<f64> {
    check_temperature(t)?;
    let shift = min_level(levels);
    let sum: f64 = levels.iter().map(|&l| (-(l - shift) / t).exp()).sum();
    Ok(sum.ln() - shift / t)
}

pub fn partition_function(spec: &Spectrum, t: f64) -> Result<f64> {
    log_partition_function(&spec.eigenvalues, t).map(f64::exp)
}

/// Boltzmann average of `observable[l]` over the levels of `spec`.
pub fn expected_value(spec: &Spectrum, observable: &[f64], t: f64) -> Result<f64> {
    if observable.len() != spec.len() {
        return Err(Error::DimensionMismatch { expected: spec.len(), got: observable.len() });
    }
    let p = boltzmann_weights(&spec.eigenvalues, t)?;
    Ok(p.iter().zip(observable).map(|(p, o)| p * o).sum())
}

/// Specific heat of a set of levels, `(⟨λ²⟩ - ⟨λ⟩²) / T²`.
///
/// The variance is accumulated in centered form so it is never negative.
pub fn level_specific_heat(levels: &[f64], t: f64) -> Result<f64> {
    let p = boltzmann_weights(levels, t)?;
    let mean: f64 = p.iter().zip(levels).map(|(p, l)| p * l).sum();
    let var: f64 = p.iter().zip(levels).map(|(p, l)| p * (l - mean) * (l - mean)).sum();
    Ok(var / (t * t))
}

pub fn specific_heat(spec: &Spectrum, t: f64) -> Result<f64> {
    level_specific_heat(&spec.eigenvalues, t)
}

/// Von Neumann entropy `-Σ p_l ln p_l` in nats.
pub fn spectral_entropy(spec: &Spectrum, t: f64) -> Result<f64> {
    let p = boltzmann_weights(&spec.eigenvalues, t)?;
    Ok(-p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>())
}

/// Specific heat over a (charge × temperature) grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatGrid {
    pub charges: Vec<f64>,
    pub temperatures: Vec<f64>,
    /// `values[i][j]` is the value at `charges[i]`, `temperatures[j]`.
    pub values: Vec<Vec<f64>>,
    pub kind: OperatorKind,
    /// How the values were obtained: `exact`, `kpm` or `oracle`.
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph_id: Option<String>,
}

impl HeatGrid {
    pub fn get(&self, qi: usize, ti: usize) -> f64 {
        self.values[qi][ti]
    }

    /// Rows are charges, columns temperatures; the first row holds the
    /// temperatures and the first column the charges.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q\\T");
        for &t in &self.temperatures {
            let _ = write!(out, ",{}", fmt17(t));
        }
        out.push('\n');
        for (q, row) in self.charges.iter().zip(&self.values) {
            out.push_str(&fmt17(*q));
            for &v in row {
                let _ = write!(out, ",{}", fmt17(v));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Euclidean distance between two grids of equal shape.
    pub fn l2_distance(&self, other: &HeatGrid) -> Result<f64> {
        if self.charges.len() != other.charges.len()
            || self.temperatures.len() != other.temperatures.len()
        {
            return Err(Error::DimensionMismatch {
                expected: self.charges.len() * self.temperatures.len(),
                got: other.charges.len() * other.temperatures.len(),
            });
        }
        let sum: f64 = self
            .values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(sum.sqrt())
    }
}

/// 30 charges spread uniformly over `[0, 1/2]`.
pub fn default_charges() -> Vec<f64> {
    linspace(0.0, 0.5, 30)
}

/// 30 temperatures spread uniformly over `[0.01, 0.15]`.
pub fn default_temperatures() -> Vec<f64> {
    linspace(0.01, 0.15, 30)
}

#[derive(Debug, Clone, Copy)]
pub struct HeatGridOptions {
    pub kind: OperatorKind,
    pub dense_limit: usize,
    pub execution: Execution,
}

impl Default for HeatGridOptions {
    fn default() -> Self {
        Self {
            kind: OperatorKind::Normalized,
            dense_limit: DEFAULT_DENSE_LIMIT,
            execution: Execution::default(),
        }
    }
}

/// Exact specific-heat grid of the normalized operator.
pub fn heat_grid(g: &DirectedGraph, charges: &[f64], temperatures: &[f64]) -> Result<HeatGrid> {
    heat_grid_with(g, charges, temperatures, &HeatGridOptions::default())
}

/// One eigenvalue decomposition per charge; charges run in parallel.
pub fn heat_grid_with(
    g: &DirectedGraph,
    charges: &[f64],
    temperatures: &[f64],
    opts: &HeatGridOptions,
) -> Result<HeatGrid> {
    if charges.is_empty() || temperatures.is_empty() {
        return Err(Error::InvalidParameter("heat grid needs at least one charge and one temperature".into()));
    }
    for &t in temperatures {
        check_temperature(t)?;
    }
    if g.node_count() > opts.dense_limit {
        return Err(Error::DimensionTooLarge { dim: g.node_count(), limit: opts.dense_limit });
    }
    let sg = g.symmetrize();
    let values = opts.execution.try_map(charges.len(), |i| {
        let op = match opts.kind {
            OperatorKind::Normalized => MagneticOperator::normalized(&sg, charges[i])?,
            OperatorKind::Combinatorial => MagneticOperator::combinatorial(&sg, charges[i]),
        };
        let spec = eig_hermitian_limited(&op, false, opts.dense_limit)?;
        temperatures.iter().map(|&t| specific_heat(&spec, t)).collect::<Result<Vec<_>>>()
    })?;
    Ok(HeatGrid {
        charges: charges.to_vec(),
        temperatures: temperatures.to_vec(),
        values,
        kind: opts.kind,
        method: "exact".into(),
        graph_id: None,
    })
}

/// Thermal state `ρ = Σ p_l ψ_l ψ_l†`.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub matrix: Mat<Complex64>,
    pub temperature: f64,
    pub charge: Option<f64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }
}

pub fn density_matrix(spec: &Spectrum, t: f64) -> Result<DensityMatrix> {
    let u = spec.eigenvectors.as_ref().ok_or(Error::MissingEigenvectors)?;
    let p = boltzmann_weights(&spec.eigenvalues, t)?;
    let n = u.nrows();
    let mut rho = Mat::<Complex64>::zeros(n, n);
    for (l, &pl) in p.iter().enumerate() {
        if pl == 0.0 {
            continue;
        }
        for j in 0..n {
            let b = u[(j, l)].conj() * pl;
            for i in 0..n {
                rho[(i, j)] += u[(i, l)] * b;
            }
        }
    }
    Ok(DensityMatrix { matrix: rho, temperature: t, charge: spec.charge })
}

/// Quantum relative entropy `Tr[ρ̃ (ln ρ̃ - ln ρ)]` between the thermal
/// states of two spectra of equal dimension; `tilde` is the first argument.
///
/// `ln ρ` is evaluated in the eigenbasis of `ρ` with weights floored at
/// [`PROBABILITY_FLOOR`].
pub fn relative_entropy(tilde: &Spectrum, base: &Spectrum, t: f64) -> Result<f64> {
    let ut = tilde.eigenvectors.as_ref().ok_or(Error::MissingEigenvectors)?;
    let ub = base.eigenvectors.as_ref().ok_or(Error::MissingEigenvectors)?;
    if ut.nrows() != ub.nrows() {
        return Err(Error::DimensionMismatch { expected: ub.nrows(), got: ut.nrows() });
    }
    let n = ut.nrows();
    let pt = boltzmann_weights(&tilde.eigenvalues, t)?;
    let pb = boltzmann_weights(&base.eigenvalues, t)?;
    let log_pb: Vec<f64> = pb.iter().map(|&p| p.max(PROBABILITY_FLOOR).ln()).collect();

    let neg_entropy: f64 = pt.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum();
    // Tr[ρ̃ ln ρ] = Σ_k p̃_k Σ_l ln p_l |⟨ψ_l | ψ̃_k⟩|²
    let mut cross = 0.0;
    for (k, &pk) in pt.iter().enumerate() {
        if pk == 0.0 {
            continue;
        }
        let mut acc = 0.0;
        for (l, &lp) in log_pb.iter().enumerate() {
            let mut overlap = Complex64::new(0.0, 0.0);
            for i in 0..n {
                overlap += ub[(i, l)].conj() * ut[(i, k)];
            }
            acc += lp * overlap.norm_sqr();
        }
        cross += pk * acc;
    }
    Ok(neg_entropy - cross)
}

/// Entropic dissimilarity of `tilde` with respect to `base` through their
/// normalized operators at charge `q`. Both graphs must have the same node
/// count; the value depends on the node labelling.
pub fn entropic_dissimilarity(
    tilde: &DirectedGraph,
    base: &DirectedGraph,
    q: f64,
    t: f64,
) -> Result<f64> {
    if tilde.node_count() != base.node_count() {
        return Err(Error::DimensionMismatch { expected: base.node_count(), got: tilde.node_count() });
    }
    check_temperature(t)?;
    let spectrum = |g: &DirectedGraph| {
        let op = MagneticOperator::from_graph(g, q, OperatorKind::Normalized)?;
        eig_hermitian(&op, true)
    };
    relative_entropy(&spectrum(tilde)?, &spectrum(base)?, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_edge_list;

    fn levels(v: &[f64]) -> Spectrum {
        Spectrum::from_eigenvalues(v.to_vec())
    }

    #[test]
    fn partition_function_values() {
        assert_eq!(partition_function(&levels(&[0.0]), 0.3).unwrap(), 1.0);
        let z = partition_function(&levels(&[0.0, 2.0]), 1.0).unwrap();
        assert!((z - (1.0 + (-2.0f64).exp())).abs() < 1e-15);
        assert!((partition_function(&levels(&[0.0; 7]), 0.05).unwrap() - 7.0).abs() < 1e-14);
        assert!(partition_function(&levels(&[0.0]), 0.0).is_err());
        assert!(partition_function(&levels(&[0.0]), -1.0).is_err());
    }

    #[test]
    fn partition_function_large_exponents() {
        // Raw exponent -200 for the lowest level.
        let lz = log_partition_function(&[2.0, 2.5], 0.01).unwrap();
        let expect = -200.0 + (1.0 + (-50.0f64).exp()).ln();
        assert!((lz - expect).abs() < 1e-12);
    }

    #[test]
    fn expected_value_cases() {
        let s = levels(&[0.0, 2.0]);
        assert!((expected_value(&s, &[1.0, 1.0], 0.7).unwrap() - 1.0).abs() < 1e-15);
        let e2 = (-2.0f64).exp();
        let v = expected_value(&s, &[0.0, 2.0], 1.0).unwrap();
        assert!((v - 2.0 * e2 / (1.0 + e2)).abs() < 1e-15);
        assert!((v - 0.238406).abs() < 1e-6);
        let s = levels(&[0.1, 0.4, 0.9, 1.7]);
        let mean = expected_value(&s, &s.eigenvalues, 1e9).unwrap();
        assert!((mean - 0.775).abs() / 0.775 < 1e-6);
        assert!(expected_value(&s, &[1.0], 1.0).is_err());
    }

    #[test]
    fn specific_heat_two_level() {
        assert_eq!(specific_heat(&levels(&[0.4]), 0.1).unwrap(), 0.0);
        let c = specific_heat(&levels(&[0.0, 1.0]), 1.0).unwrap();
        let e = (-1.0f64).exp();
        assert!((c - e / ((1.0 + e) * (1.0 + e))).abs() < 1e-15);
        assert!((c - 0.196612).abs() < 1e-6);
        assert!(specific_heat(&levels(&[0.0, 1.0]), 0.01).unwrap() < 1e-39);
    }

    #[test]
    fn entropy_cases() {
        assert_eq!(spectral_entropy(&levels(&[0.0]), 0.2).unwrap(), 0.0);
        let s = levels(&[0.0, 0.3, 1.1, 1.9, 2.0]);
        assert!((spectral_entropy(&s, 1e9).unwrap() - 5f64.ln()).abs() < 1e-6);
        let p = 1.0 / (1.0 + (-1.0f64).exp());
        let h = -(p * p.ln() + (1.0 - p) * (1.0 - p).ln());
        let s = spectral_entropy(&levels(&[0.0, 1.0]), 1.0).unwrap();
        assert!((s - h).abs() < 1e-15);
        assert!((s - 0.582203).abs() < 1e-6);
    }

    #[test]
    fn directed_triangle_spectra() {
        let g = load_edge_list("0 1\n1 2\n2 0").unwrap();
        for (q, expect) in [
            (0.0, [0.0, 1.5, 1.5]),
            (1.0 / 6.0, [0.5, 0.5, 2.0]),
            (1.0 / 3.0, [0.0, 1.5, 1.5]),
        ] {
            let op = MagneticOperator::from_graph(&g, q, OperatorKind::Normalized).unwrap();
            let s = eig_hermitian(&op, false).unwrap();
            for (a, b) in s.eigenvalues.iter().zip(expect) {
                assert!((a - b).abs() < 1e-12, "q={q}: {:?}", s.eigenvalues);
            }
        }
    }

    #[test]
    fn dense_limit_is_enforced() {
        let g = load_edge_list("0 1\n1 2\n2 0").unwrap();
        let op = MagneticOperator::from_graph(&g, 0.0, OperatorKind::Normalized).unwrap();
        assert!(matches!(
            eig_hermitian_limited(&op, false, 2),
            Err(Error::DimensionTooLarge { dim: 3, limit: 2 })
        ));
    }

    #[test]
    fn eigenvectors_residual_and_density_matrix() {
        let g = load_edge_list("0 1\n1 2 2\n2 3\n3 0\n0 2 0.5\n4 1\n3 4").unwrap();
        let op = MagneticOperator::from_graph(&g, 0.37, OperatorKind::Normalized).unwrap();
        let s = eig_hermitian(&op, true).unwrap();
        let u = s.eigenvectors.as_ref().unwrap();
        for (l, &lam) in s.eigenvalues.iter().enumerate() {
            let col: Vec<Complex64> = (0..5).map(|i| u[(i, l)]).collect();
            let y = op.matvec(&col).unwrap();
            let r: f64 = y.iter().zip(&col).map(|(a, b)| (a - b * lam).norm_sqr()).sum();
            assert!(r.sqrt() <= 1e-8 * lam.abs().max(1.0));
            let form: Complex64 = col.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
            assert!(form.im.abs() < 1e-12);
        }
        let rho = density_matrix(&s, 0.3).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-10);
        let hot = density_matrix(&s, 1e9).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 0.2 } else { 0.0 };
                assert!((hot.matrix[(i, j)] - Complex64::new(expect, 0.0)).norm() < 1e-6);
            }
        }
        let gap = s.eigenvalues[1] - s.eigenvalues[0];
        let cold = density_matrix(&s, 1e-3 * gap).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let pure = u[(i, 0)] * u[(j, 0)].conj();
                assert!((cold.matrix[(i, j)] - pure).norm() < 1e-9);
            }
        }
        assert!(matches!(
            density_matrix(&Spectrum::from_eigenvalues(vec![0.0]), 1.0),
            Err(Error::MissingEigenvectors)
        ));
    }

    #[test]
    fn dissimilarity_identity_and_size_mismatch() {
        let g = load_edge_list("0 1\n1 2\n2 0\n0 3").unwrap();
        let d = entropic_dissimilarity(&g, &g, 0.2, 0.1).unwrap();
        assert!(d.abs() < 1e-9);
        let small = load_edge_list("0 1\n1 2").unwrap();
        assert!(entropic_dissimilarity(&g, &small, 0.2, 0.1).is_err());
        assert!(entropic_dissimilarity(&g, &g, 0.2, 0.0).is_err());
    }

    #[test]
    fn heat_grid_csv_shape() {
        let g = load_edge_list("0 1\n1 2\n2 0").unwrap();
        let grid = heat_grid(&g, &[0.0, 0.25], &[0.05, 0.1, 0.2]).unwrap();
        let csv = grid.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines.iter().all(|l| l.split(',').count() == 4));
        assert!(heat_grid(&g, &[], &[0.1]).is_err());
    }
}
