//! Polar heatmap of a specific-heat grid: angle `2πq`, radius `T`, color the
//! value. One annular sector per grid cell.

use std::f64::consts::PI;
use std::fmt::Write as _;

use maglap::format::fmt17;
use maglap::HeatGrid;

const SIZE: f64 = 520.0;
const CENTER: f64 = SIZE / 2.0;
const INNER: f64 = 30.0;
const OUTER: f64 = 230.0;

/// Viridis sampled at five stops.
const STOPS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

fn color(s: f64) -> String {
    let s = if s.is_finite() { s.clamp(0.0, 1.0) } else { 0.0 };
    let x = s * (STOPS.len() - 1) as f64;
    let i = (x.floor() as usize).min(STOPS.len() - 2);
    let f = x - i as f64;
    let c: Vec<u8> = (0..3).map(|k| (STOPS[i][k] + f * (STOPS[i + 1][k] - STOPS[i][k])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Cell boundaries around sorted axis values: midpoints inside, half a
/// spacing beyond each end.
fn edges(values: &[f64], lone_width: f64) -> Vec<f64> {
    if values.len() == 1 {
        return vec![values[0] - lone_width / 2.0, values[0] + lone_width / 2.0];
    }
    let mut e = Vec::with_capacity(values.len() + 1);
    e.push(values[0] - (values[1] - values[0]) / 2.0);
    for w in values.windows(2) {
        e.push((w[0] + w[1]) / 2.0);
    }
    let n = values.len();
    e.push(values[n - 1] + (values[n - 1] - values[n - 2]) / 2.0);
    e
}

fn point(r: f64, theta: f64) -> (f64, f64) {
    (CENTER + r * theta.cos(), CENTER - r * theta.sin())
}

pub fn polar_heatmap(grid: &HeatGrid) -> String {
    let q_edges = edges(&grid.charges, 0.02);
    let t_edges = edges(&grid.temperatures, 1.0);
    let (t_lo, t_hi) = (t_edges[0], t_edges[t_edges.len() - 1]);
    let radius = |t: f64| INNER + (t - t_lo) / (t_hi - t_lo) * (OUTER - INNER);
    let finite = grid.values.iter().flatten().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, row) in grid.values.iter().enumerate() {
        let (a0, a1) = (2.0 * PI * q_edges[i], 2.0 * PI * q_edges[i + 1]);
        let large = u8::from(a1 - a0 > PI);
        for (j, &v) in row.iter().enumerate() {
            let (r0, r1) = (radius(t_edges[j]), radius(t_edges[j + 1]));
            let (p0, p1) = (point(r1, a0), point(r1, a1));
            let (p2, p3) = (point(r0, a1), point(r0, a0));
            let _ = writeln!(
                out,
                r#"<path d="M{:.3} {:.3} A{r1:.3} {r1:.3} 0 {large} 0 {:.3} {:.3} L{:.3} {:.3} A{r0:.3} {r0:.3} 0 {large} 1 {:.3} {:.3} Z" fill="{}"><title>q={} T={} c={}</title></path>"#,
                p0.0,
                p0.1,
                p1.0,
                p1.1,
                p2.0,
                p2.1,
                p3.0,
                p3.1,
                color((v - lo) / span),
                fmt17(grid.charges[i]),
                fmt17(grid.temperatures[j]),
                fmt17(v),
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="8" y="{:.0}" font-family="sans-serif" font-size="11">{} c from {} to {}; angle 2&#960;q, radius T</text>"#,
        SIZE - 8.0,
        grid.method,
        fmt17(lo),
        fmt17(hi)
    );
    out.push_str("</svg>\n");
    out
}
