//! Text output helpers shared by the CSV writers.

/// Scientific notation with 17 significant digits; parsing it back gives
/// the same `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { end } else { start + step * i as f64 })
                .collect()
        }
    }
}
