//! Exact discrete optimal transport by the transportation simplex method
//! (MODI potentials, stepping-stone pivots).
//!
//! Meant for small problems: the cost matrix is dense and every pivot
//! rebuilds the basis tree.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Minimal `Σ c_ij x_ij` over couplings with row sums `supply` and column
/// sums `demand`. The totals must agree to within `1e-9`.
pub fn min_cost_transport(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Result<f64> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter("transport problem with empty side".into()));
    }
    if cost.len() != m || cost.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: m * n, got: cost.iter().map(Vec::len).sum() });
    }
    let total_s: f64 = supply.iter().sum();
    let total_d: f64 = demand.iter().sum();
    if (total_s - total_d).abs() > 1e-9 {
        return Err(Error::InvalidSimplex(format!("unbalanced masses {total_s} vs {total_d}")));
    }

    let mut flow = vec![vec![0.0; n]; m];
    let mut basic = vec![vec![false; n]; m];
    initial_basis(supply, demand, &mut flow, &mut basic);

    let scale = cost.iter().flatten().fold(0.0f64, |a, &c| a.max(c.abs())).max(1.0);
    let tol = 1e-12 * scale;
    let max_iter = 50 * (m + n) * (m + n) + 1000;
    for _ in 0..max_iter {
        let (u, v) = potentials(&basic, cost);
        let mut entering = None;
        let mut best = -tol;
        for i in 0..m {
            for j in 0..n {
                if !basic[i][j] {
                    let r = cost[i][j] - u[i] - v[j];
                    if r < best {
                        best = r;
                        entering = Some((i, j));
                    }
                }
            }
        }
        let Some((ei, ej)) = entering else {
            return Ok((0..m)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| flow[i][j] * cost[i][j])
                .sum());
        };
        let path = tree_path(&basic, ej, ei);
        // Cells alternate -, +, -, ... starting next to column `ej`.
        let mut theta = f64::INFINITY;
        let mut leaving = None;
        for (k, &(i, j)) in path.iter().enumerate() {
            if k % 2 == 0 && flow[i][j] < theta {
                theta = flow[i][j];
                leaving = Some((i, j));
            }
        }
        let (li, lj) = leaving.ok_or_else(|| Error::Numerical("degenerate pivot cycle".into()))?;
        for (k, &(i, j)) in path.iter().enumerate() {
            if k % 2 == 0 {
                flow[i][j] -= theta;
            } else {
                flow[i][j] += theta;
            }
        }
        flow[ei][ej] += theta;
        flow[li][lj] = 0.0;
        basic[li][lj] = false;
        basic[ei][ej] = true;
    }
    Err(Error::Numerical("transportation simplex did not converge".into()))
}

/// Northwest-corner start with the columns visited in reverse order, which
/// for sorted supports produces the anti-monotone coupling. Always yields
/// exactly `m + n - 1` basic cells.
fn initial_basis(supply: &[f64], demand: &[f64], flow: &mut [Vec<f64>], basic: &mut [Vec<bool>]) {
    let (m, n) = (supply.len(), demand.len());
    let mut s = supply.to_vec();
    let mut d: Vec<f64> = demand.to_vec();
    let col = |k: usize| n - 1 - k;
    let (mut i, mut k) = (0, 0);
    loop {
        let j = col(k);
        let x = s[i].min(d[j]).max(0.0);
        flow[i][j] = x;
        basic[i][j] = true;
        s[i] -= x;
        d[j] -= x;
        if i == m - 1 && k == n - 1 {
            break;
        }
        if k == n - 1 || (i < m - 1 && s[i] <= d[j]) {
            i += 1;
        } else {
            k += 1;
        }
    }
}

/// Row and column potentials with `u_i + v_j = c_ij` on basic cells.
fn potentials(basic: &[Vec<bool>], cost: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = (basic.len(), basic[0].len());
    let mut u = vec![f64::NAN; m];
    let mut v = vec![f64::NAN; n];
    u[0] = 0.0;
    // Nodes 0..m are rows, m..m+n columns.
    let mut queue = VecDeque::from([0usize]);
    while let Some(node) = queue.pop_front() {
        if node < m {
            let i = node;
            for j in 0..n {
                if basic[i][j] && v[j].is_nan() {
                    v[j] = cost[i][j] - u[i];
                    queue.push_back(m + j);
                }
            }
        } else {
            let j = node - m;
            for i in 0..m {
                if basic[i][j] && u[i].is_nan() {
                    u[i] = cost[i][j] - v[j];
                    queue.push_back(i);
                }
            }
        }
    }
    (u, v)
}

/// Basic cells on the tree path from column `from_col` to row `to_row`.
fn tree_path(basic: &[Vec<bool>], from_col: usize, to_row: usize) -> Vec<(usize, usize)> {
    let (m, n) = (basic.len(), basic[0].len());
    let start = m + from_col;
    let mut parent = vec![usize::MAX; m + n];
    parent[start] = start;
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        if node == to_row {
            break;
        }
        let neighbours: Vec<usize> = if node < m {
            (0..n).filter(|&j| basic[node][j]).map(|j| m + j).collect()
        } else {
            (0..m).filter(|&i| basic[i][node - m]).collect()
        };
        for next in neighbours {
            if parent[next] == usize::MAX {
                parent[next] = node;
                queue.push_back(next);
            }
        }
    }
    let mut cells = Vec::new();
    let mut node = to_row;
    while node != start {
        let prev = parent[node];
        let cell = if node < m { (node, prev - m) } else { (prev, node - m) };
        cells.push(cell);
        node = prev;
    }
    cells.reverse();
    cells
}
