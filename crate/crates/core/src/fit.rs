//! Least-squares order estimates on log–log data.

/// Slope and intercept of the least-squares line through `(ln x, ln y)`.
/// Pairs with a non-positive coordinate are skipped; `None` if fewer than two
/// usable points remain.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Empirical order `p` in `y ≈ C x^p`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    loglog_fit(xs, ys).map(|(s, _)| s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let xs = [0.1, 0.05, 0.025, 0.0125];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(2.5)).collect();
        let (p, c) = loglog_fit(&xs, &ys).unwrap();
        assert!((p - 2.5).abs() < 1e-12);
        assert!((c.exp() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn skips_zero_rows() {
        let xs = [0.0, 0.1, 0.05, 0.025];
        let ys = [0.0, 1e-2, 2.5e-3, 6.25e-4];
        assert!((loglog_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_none());
    }
}
