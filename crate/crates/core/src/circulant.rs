//! Closed-form spectra of cyclic block-structured operators.
//!
//! When the normalized operator is made of `n_f` identical diagonal blocks
//! `H_in` coupled cyclically by `H_out` (block `i` to block `i + 1`), it is
//! block-circulant, and its spectrum is the union over `u = 0..n_f` of the
//! spectra of the `n_c × n_c` matrices
//! `H_in + ω^u H_out + ω^{-u} H_out†` with `ω = exp(2πi / n_f)`.
//!
//! For the uniform modular network (complete undirected blocks, complete
//! forward coupling) `H_in` and `H_out` are rank-one perturbations of the
//! identity and the spectrum is explicit: with `d = 2 n_c - 1`, each `u`
//! contributes `n_c (1 - cos(2π(u/n_f - q))) / d` once and `1 + 1/d`
//! with multiplicity `n_c - 1`.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{heat_grid, level_specific_heat, HeatGrid};
use crate::generators::cyclic_sbm;
use crate::operator::OperatorKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub n_f: usize,
    pub n_c: usize,
    pub q: f64,
}

fn half_count(n: usize) -> usize {
    if n % 2 == 1 { n.div_ceil(2) } else { n / 2 }
}

impl BlockSpec {
    pub fn new(n_f: usize, n_c: usize, q: f64) -> Result<Self> {
        if n_f < 3 || n_c < 2 {
            return Err(Error::InvalidParameter(format!(
                "block spec needs n_f >= 3 and n_c >= 2, got n_f={n_f}, n_c={n_c}"
            )));
        }
        Ok(Self { n_f, n_c, q })
    }

    pub fn m_f(&self) -> usize {
        half_count(self.n_f)
    }

    pub fn m_c(&self) -> usize {
        half_count(self.n_c)
    }

    /// Symmetrized degree of every node of the uniform modular network.
    pub fn degree(&self) -> usize {
        2 * self.n_c - 1
    }
}

/// `H_in + ω^u H_out + ω^{-u} H_out†`, `ω = exp(2πi / n_f)`.
pub fn block_reduced_matrix(
    h_in: &Mat<Complex64>,
    h_out: &Mat<Complex64>,
    u: usize,
    n_f: usize,
) -> Result<Mat<Complex64>> {
    let n = h_in.nrows();
    for m in [h_in, h_out] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.ncols().max(m.nrows()) });
        }
    }
    if u >= n_f {
        return Err(Error::InvalidParameter(format!("block index {u} out of range 0..{n_f}")));
    }
    let angle = 2.0 * PI * u as f64 / n_f as f64;
    let w = Complex64::new(angle.cos(), angle.sin());
    Ok(Mat::from_fn(n, n, |i, j| h_in[(i, j)] + w * h_out[(i, j)] + w.conj() * h_out[(j, i)].conj()))
}

/// Diagonal and coupling blocks of the normalized operator of the uniform
/// modular network at charge `q`.
pub fn uniform_blocks(n_c: usize, q: f64) -> (Mat<Complex64>, Mat<Complex64>) {
    let d = (2 * n_c - 1) as f64;
    let h_in = Mat::from_fn(n_c, n_c, |i, j| {
        Complex64::new(if i == j { 1.0 } else { -1.0 / d }, 0.0)
    });
    let phase = Complex64::new((2.0 * PI * q).cos(), (2.0 * PI * q).sin());
    let h_out = Mat::from_fn(n_c, n_c, |_, _| -phase / (2.0 * d));
    (h_in, h_out)
}

/// Ascending closed-form spectrum of the uniform modular network.
pub fn uniform_modular_eigenvalues(n_f: usize, n_c: usize, q: f64) -> Result<Vec<f64>> {
    let spec = BlockSpec::new(n_f, n_c, q)?;
    let d = spec.degree() as f64;
    let mut out = Vec::with_capacity(n_f * n_c);
    for u in 0..n_f {
        let phase = 2.0 * PI * (u as f64 / n_f as f64 - q);
        out.push(n_c as f64 * (1.0 - phase.cos()) / d);
        out.extend(std::iter::repeat_n(1.0 + 1.0 / d, n_c - 1));
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Specific-heat grid from the closed-form spectrum.
pub fn oracle_heat_grid(
    n_f: usize,
    n_c: usize,
    charges: &[f64],
    temperatures: &[f64],
) -> Result<HeatGrid> {
    let values = charges
        .iter()
        .map(|&q| {
            let levels = uniform_modular_eigenvalues(n_f, n_c, q)?;
            temperatures.iter().map(|&t| level_specific_heat(&levels, t)).collect()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(HeatGrid {
        charges: charges.to_vec(),
        temperatures: temperatures.to_vec(),
        values,
        kind: OperatorKind::Normalized,
        method: "oracle".into(),
        graph_id: Some(format!("uniform_modular(n_f={n_f}, n_c={n_c})")),
    })
}

/// Modular network whose intra-block ordered pairs are kept with
/// probability `p_c` (forward coupling stays complete), solved exactly.
pub fn random_intrablock_experiment(
    n_f: usize,
    n_c: usize,
    p_c: f64,
    charges: &[f64],
    temperatures: &[f64],
    seed: u64,
) -> Result<HeatGrid> {
    if !(p_c > 0.0 && p_c <= 1.0) {
        return Err(Error::InvalidParameter(format!("p_c must lie in (0, 1], got {p_c}")));
    }
    let g = cyclic_sbm(n_f, n_c, p_c, 1.0, seed)?;
    let mut grid = heat_grid(&g, charges, temperatures)?;
    grid.graph_id = Some(format!("cyclic_sbm(n_f={n_f}, n_c={n_c}, p_c={p_c}, p_d=1, seed={seed})"));
    Ok(grid)
}

/// `k / (n_f · per_sector)` for `k = 0 .. n_f · per_sector`: a charge grid on
/// `[0, 1)` that is closed under shifts by `1 / n_f`.
pub fn rotation_charges(n_f: usize, per_sector: usize) -> Vec<f64> {
    let total = n_f * per_sector;
    (0..total).map(|k| k as f64 / total as f64).collect()
}

/// Largest `|c(q, T) - c(q + 1/n_f, T)|` over grid points whose shifted
/// charge (taken modulo 1) is also on the grid.
pub fn rotation_asymmetry(grid: &HeatGrid, n_f: usize) -> Result<f64> {
    let shift = 1.0 / n_f as f64;
    let mut worst: Option<f64> = None;
    for (i, &q) in grid.charges.iter().enumerate() {
        let target = (q + shift).rem_euclid(1.0);
        let partner = grid.charges.iter().position(|&p| {
            let diff = (p - target).rem_euclid(1.0);
            diff < 1e-9 || 1.0 - diff < 1e-9
        });
        if let Some(j) = partner {
            let row_max = grid.values[i]
                .iter()
                .zip(&grid.values[j])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            worst = Some(worst.map_or(row_max, |w: f64| w.max(row_max)));
        }
    }
    worst.ok_or_else(|| {
        Error::InvalidParameter(format!("charge grid has no pair separated by 1/{n_f}"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_counts() {
        let s = BlockSpec::new(5, 4, 0.0).unwrap();
        assert_eq!((s.m_f(), s.m_c(), s.degree()), (3, 2, 7));
        assert!(BlockSpec::new(2, 4, 0.0).is_err());
    }

    #[test]
    fn uniform_3_45_at_zero() {
        let ev = uniform_modular_eigenvalues(3, 45, 0.0).unwrap();
        assert_eq!(ev.len(), 135);
        assert!(ev[0].abs() < 1e-15);
        assert!((ev[1] - 67.5 / 89.0).abs() < 1e-14);
        assert!((ev[2] - 67.5 / 89.0).abs() < 1e-14);
        assert!((ev[1] - 0.758427).abs() < 1e-6);
        assert!(ev[3..].iter().all(|&x| (x - 90.0 / 89.0).abs() < 1e-15));
    }

    #[test]
    fn spectrum_shifts_with_charge() {
        for (n_f, n_c) in [(3, 5), (4, 2), (6, 7)] {
            let q = 0.137;
            let a = uniform_modular_eigenvalues(n_f, n_c, q).unwrap();
            let b = uniform_modular_eigenvalues(n_f, n_c, q + 1.0 / n_f as f64).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
            assert!(a.iter().all(|&x| (0.0..=2.0).contains(&x)));
        }
    }

    #[test]
    fn reduced_matrix_cases() {
        let (h_in, _) = uniform_blocks(3, 0.2);
        let zero = Mat::<Complex64>::zeros(3, 3);
        for u in 0..4 {
            let r = block_reduced_matrix(&h_in, &zero, u, 4).unwrap();
            assert_eq!(r, h_in);
        }
        let herm = Mat::from_fn(3, 3, |i, j| Complex64::new((i + j) as f64, i as f64 - j as f64));
        let r = block_reduced_matrix(&h_in, &herm, 0, 4).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((r[(i, j)] - (h_in[(i, j)] + herm[(i, j)] * 2.0)).norm() < 1e-14);
            }
        }
        assert!(block_reduced_matrix(&h_in, &Mat::zeros(2, 2), 0, 4).is_err());
        assert!(block_reduced_matrix(&h_in, &zero, 4, 4).is_err());
    }

    #[test]
    fn asymmetry_needs_partners() {
        let grid = oracle_heat_grid(3, 5, &[0.0, 0.1], &[0.05]).unwrap();
        assert!(rotation_asymmetry(&grid, 3).is_err());
        let grid = oracle_heat_grid(3, 5, &rotation_charges(3, 4), &[0.05, 0.1]).unwrap();
        assert!(rotation_asymmetry(&grid, 3).unwrap() < 1e-12);
    }
}
