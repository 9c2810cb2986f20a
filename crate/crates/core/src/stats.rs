//! Small descriptive-statistics and regression helpers shared by the estimators.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Quantile with linear interpolation between order statistics
/// (the `R-7` / numpy default rule). `values` need not be sorted.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(v[lo] + (h - lo as f64) * (v[hi] - v[lo]))
}

pub fn median(values: &[f64]) -> Option<f64> {
    quantile(values, 0.5)
}

/// Ordinary least squares fit of `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    pub r_squared: f64,
    /// Two-sided p-value of the slope t-statistic (`n - 2` degrees of freedom).
    pub slope_p_value: f64,
    pub n: usize,
}

/// Returns `None` with fewer than two points or a constant regressor.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - intercept - slope * xi;
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let (slope_stderr, intercept_stderr, slope_p_value) = if n > 2 {
        let s2 = sse / (nf - 2.0);
        let se_slope = (s2 / sxx).sqrt();
        let se_int = (s2 * (1.0 / nf + mx * mx / sxx)).sqrt();
        let p = if se_slope == 0.0 {
            0.0
        } else {
            let t = (slope / se_slope).abs();
            let dist = StudentsT::new(0.0, 1.0, nf - 2.0).expect("valid dof");
            (2.0 * dist.sf(t)).clamp(0.0, 1.0)
        };
        (se_slope, se_int, p)
    } else {
        (0.0, 0.0, f64::NAN)
    };
    Some(LinearFit {
        slope,
        intercept,
        slope_stderr,
        intercept_stderr,
        r_squared,
        slope_p_value,
        n,
    })
}
