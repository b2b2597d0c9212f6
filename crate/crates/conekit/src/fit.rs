//! Least-squares fits and power-law extrapolation used by the diagnostics
//! and the mass schedule.

/// Ordinary least squares y = a + b x. Returns (a, b, rms residual).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let det = n * sxx - sx * sx;
    let b = (n * sxy - sx * sy) / det;
    let a = (sy - b * sx) / n;
    let mut rss = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        let e = yi - (a + b * xi);
        rss += e * e;
    }
    (a, b, (rss / n).sqrt())
}

/// Log-log slope of |y| vs x over the given samples (skipping zeros).
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (a, b) in x.iter().zip(y) {
        if b.abs() > 0.0 {
            lx.push(a.ln());
            ly.push(b.abs().ln());
        }
    }
    if lx.len() < 2 {
        return 0.0;
    }
    linear_fit(&lx, &ly).1
}

/// Result of fitting values(r) ~ a + b r^{-q} over a radius schedule.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PowerFit {
    pub limit: f64,
    pub amplitude: f64,
    pub exponent: f64,
    pub residual: f64,
    /// Error estimate for `limit`: size of the fitted correction at the last
    /// radius plus the fit residual.
    pub error_estimate: f64,
    /// True when the sequence was constant to rounding and no decay exponent
    /// could be identified.
    pub constant: bool,
}

/// Fit a + b r^{-q} by scanning q and solving the linear subproblem.
pub fn fit_power_law(radii: &[f64], values: &[f64]) -> PowerFit {
    assert_eq!(radii.len(), values.len());
    assert!(radii.len() >= 3);
    let scale = values.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-300);
    let spread = values.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if spread.1 - spread.0 <= 1e-12 * scale {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        return PowerFit {
            limit: mean,
            amplitude: 0.0,
            exponent: 0.0,
            residual: spread.1 - spread.0,
            error_estimate: (spread.1 - spread.0).abs(),
            constant: true,
        };
    }
    let mut best: Option<PowerFit> = None;
    let mut q = 0.1f64;
    while q <= 8.0 {
        let fit = fit_with_exponent(radii, values, q);
        if best.as_ref().map_or(true, |b| fit.residual < b.residual) {
            best = Some(fit);
        }
        q += 0.02;
    }
    let mut best = best.unwrap();
    // local refinement around the best exponent
    let mut lo = (best.exponent - 0.05).max(0.01);
    let mut hi = best.exponent + 0.05;
    for _ in 0..40 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        let f1 = fit_with_exponent(radii, values, m1);
        let f2 = fit_with_exponent(radii, values, m2);
        if f1.residual < f2.residual {
            hi = m2;
            if f1.residual < best.residual {
                best = f1;
            }
        } else {
            lo = m1;
            if f2.residual < best.residual {
                best = f2;
            }
        }
    }
    best
}

fn fit_with_exponent(radii: &[f64], values: &[f64], q: f64) -> PowerFit {
    let x: Vec<f64> = radii.iter().map(|r| r.powf(-q)).collect();
    let (a, b, res) = linear_fit(&x, values);
    let err = (b * radii.last().unwrap().powf(-q)).abs() + res;
    PowerFit {
        limit: a,
        amplitude: b,
        exponent: q,
        residual: res,
        error_estimate: err,
        constant: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law_limit() {
        let radii: Vec<f64> = (0..9).map(|k| 10.0 * 2f64.powi(k)).collect();
        let values: Vec<f64> = radii.iter().map(|r| 3.5 + 40.0 * r.powf(-1.5)).collect();
        let fit = fit_power_law(&radii, &values);
        assert!((fit.limit - 3.5).abs() < 1e-6, "limit {}", fit.limit);
        assert!((fit.exponent - 1.5).abs() < 0.05);
    }

    #[test]
    fn constant_sequence_short_circuits() {
        let radii = [10.0, 20.0, 40.0, 80.0];
        let values = [2.0, 2.0, 2.0, 2.0];
        let fit = fit_power_law(&radii, &values);
        assert!(fit.constant);
        assert_eq!(fit.limit, 2.0);
    }
}
