//! Sparse magnetic Laplacian operators.
//!
//! For a symmetrized graph with weights `w_s` and flows `f`, the combinatorial
//! operator is `L_q = D - Γ_q ∘ W_s` with `Γ_q(u, v) = exp(2πi q f(u, v))`, and
//! the normalized one is `H_q = D^{-1/2} L_q D^{-1/2}`.
//!
//! Only the strict upper triangle is stored (row-compressed, columns
//! ascending) plus the real diagonal; the lower triangle is applied as the
//! conjugate, so every operator is Hermitian by construction.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, SymmetrizedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Combinatorial,
    Normalized,
}

/// Phase factor `exp(2πi q f)` attached to an edge carrying flow `f`.
///
/// The product `q f` is reduced to `[-1/2, 1/2]` before the trigonometric
/// evaluation, which keeps large charges and flows accurate.
pub fn gamma(flow: f64, q: f64) -> Complex64 {
    let t = q * flow;
    let t = t - t.round();
    let (s, c) = (2.0 * PI * t).sin_cos();
    Complex64::new(c, s)
}

#[derive(Debug, Clone)]
pub struct MagneticOperator {
    dim: usize,
    charge: f64,
    kind: OperatorKind,
    diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
    bounds: (f64, f64),
}

impl MagneticOperator {
    /// `L_q = D - Γ_q ∘ W_s`.
    pub fn combinatorial(sg: &SymmetrizedGraph, q: f64) -> Self {
        let n = sg.node_count();
        let mut op = Self::assemble(sg, q, OperatorKind::Combinatorial, |_, _| 1.0);
        op.diag = sg.degrees().to_vec();
        // L_q is positive semidefinite, and Gershgorin caps it at 2 max d.
        op.bounds = (0.0, if n == 0 { 0.0 } else { 2.0 * sg.max_degree() });
        op
    }

    /// `H_q = D^{-1/2} L_q D^{-1/2}`; the graph must be weakly connected.
    pub fn normalized(sg: &SymmetrizedGraph, q: f64) -> Result<Self> {
        let n = sg.node_count();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if !is_connected(sg) {
            return Err(Error::NotWeaklyConnected);
        }
        if let Some(u) = sg.degrees().iter().position(|&d| d <= 0.0) {
            return Err(Error::ZeroDegreeNode(u));
        }
        let inv_sqrt: Vec<f64> = sg.degrees().iter().map(|d| 1.0 / d.sqrt()).collect();
        let mut op =
            Self::assemble(sg, q, OperatorKind::Normalized, |u, v| inv_sqrt[u] * inv_sqrt[v]);
        op.diag = vec![1.0; n];
        op.bounds = (0.0, 2.0);
        Ok(op)
    }

    /// Convenience: symmetrize `g` and build the requested kind.
    pub fn from_graph(g: &DirectedGraph, q: f64, kind: OperatorKind) -> Result<Self> {
        let sg = g.symmetrize();
        match kind {
            OperatorKind::Combinatorial => Ok(Self::combinatorial(&sg, q)),
            OperatorKind::Normalized => Self::normalized(&sg, q),
        }
    }

    /// Operator with the given real diagonal and no couplings. Its spectrum
    /// is the diagonal itself, which makes it a calibration target for the
    /// spectral estimators.
    pub fn from_diagonal(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("diagonal entries must be finite".into()));
        }
        let n = values.len();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            dim: n,
            charge: 0.0,
            kind: OperatorKind::Combinatorial,
            diag: values,
            row_ptr: vec![0; n + 1],
            cols: Vec::new(),
            vals: Vec::new(),
            bounds: if n == 0 { (0.0, 0.0) } else { (lo, hi) },
        })
    }

    fn assemble(
        sg: &SymmetrizedGraph,
        q: f64,
        kind: OperatorKind,
        scale: impl Fn(usize, usize) -> f64,
    ) -> Self {
        let n = sg.node_count();
        let edges = sg.edges();
        let mut row_ptr = vec![0usize; n + 1];
        for e in edges {
            row_ptr[e.u + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        // Symmetrized edges are sorted by (u, v), so they already are in CSR order.
        let cols = edges.iter().map(|e| e.v).collect();
        let vals = edges
            .iter()
            .map(|e| -gamma(e.flow, q) * (e.weight * scale(e.u, e.v)))
            .collect();
        Self { dim: n, charge: q, kind, diag: Vec::new(), row_ptr, cols, vals, bounds: (0.0, 0.0) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    /// Number of stored strictly-upper entries.
    pub fn stored_offdiag(&self) -> usize {
        self.vals.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Entry `(u, v)`, with the lower triangle read as the conjugate.
    pub fn entry(&self, u: usize, v: usize) -> Complex64 {
        if u == v {
            return Complex64::new(self.diag[u], 0.0);
        }
        let (r, c, conj) = if u < v { (u, v, false) } else { (v, u, true) };
        let row = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        match row.binary_search(&c) {
            Ok(k) => {
                let a = self.vals[self.row_ptr[r] + k];
                if conj { a.conj() } else { a }
            }
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Iterates the stored strictly-upper entries as `(u, v, value)`.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |u| {
            (self.row_ptr[u]..self.row_ptr[u + 1]).map(move |k| (u, self.cols[k], self.vals[k]))
        })
    }

    /// `y = self · x`.
    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply(x, &mut y);
        Ok(y)
    }

    /// Writes `self · x` into `y`.
    ///
    /// Accumulation order is fixed: diagonal first, then stored entries in
    /// row-major order, each contributing to `y[u]` and then `y[v]`.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for ((yi, &d), &xi) in y.iter_mut().zip(&self.diag).zip(x) {
            *yi = xi * d;
        }
        for u in 0..self.dim {
            let xu = x[u];
            let mut acc = y[u];
            for k in self.row_ptr[u]..self.row_ptr[u + 1] {
                let v = self.cols[k];
                let a = self.vals[k];
                acc += a * x[v];
                y[v] += a.conj() * xu;
            }
            y[u] = acc;
        }
    }

    /// Certified spectral enclosure `(lo, hi)`.
    ///
    /// `[0, 2]` for the normalized kind; `[0, 2 max_u d_u]` (positive
    /// semidefiniteness plus Gershgorin) for the combinatorial kind.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        self.bounds
    }

    /// Gershgorin bound intersected with a power-iteration estimate of the
    /// top eigenvalue, expanded by its residual norm and a relative safety
    /// factor. Never tighter than the certified bound on the low side.
    ///
    /// The upper end is only as trustworthy as the power iteration's
    /// convergence; KPM uses [`MagneticOperator::spectral_bounds`].
    pub fn tightened_bounds(&self, iterations: usize, safety: f64) -> (f64, f64) {
        let (lo, hi) = self.bounds;
        if self.dim == 0 || hi <= lo || iterations == 0 {
            return (lo, hi);
        }
        let n = self.dim;
        let mut x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.05))
            .collect();
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        let mut theta = 0.0;
        let mut resid = f64::INFINITY;
        for _ in 0..iterations {
            let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return (lo, hi);
            }
            x.iter_mut().for_each(|z| *z /= norm);
            self.apply(&x, &mut y);
            theta = x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
            resid = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (b - a * theta).norm_sqr())
                .sum::<f64>()
                .sqrt();
            std::mem::swap(&mut x, &mut y);
        }
        let estimate = (theta + resid) * (1.0 + safety);
        (lo, hi.min(estimate.max(lo)))
    }

    /// Dense copy of the operator.
    pub fn to_dense(&self) -> Mat<Complex64> {
        let mut m = Mat::<Complex64>::zeros(self.dim, self.dim);
        for (u, &d) in self.diag.iter().enumerate() {
            m[(u, u)] = Complex64::new(d, 0.0);
        }
        for (u, v, a) in self.upper_entries() {
            m[(u, v)] = a;
            m[(v, u)] = a.conj();
        }
        m
    }
}

fn is_connected(sg: &SymmetrizedGraph) -> bool {
    let n = sg.node_count();
    let mut adj = vec![Vec::new(); n];
    for e in sg.edges() {
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}
