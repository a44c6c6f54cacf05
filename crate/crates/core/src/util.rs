//! Small numeric helpers shared by the modules and the CLI.

/// Round-trippable float formatting for CSV output.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Least-squares slope of `ln y` against `ln x`, ignoring non-positive pairs.
/// Returns `(slope, intercept, points_used)`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, usize) {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let (slope, intercept) = linear_fit(&pts);
    (slope, intercept, pts.len())
}

/// Ordinary least squares `y = slope x + intercept`. NaN with fewer than two points.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
