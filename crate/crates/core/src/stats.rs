//! Shared statistical helpers: moments, least squares, and the test
//! statistics the verification harness runs against fixed critical values.

use crate::error::{Error, Result};

/// Sample mean and standard error (sample stdev over sqrt(n)).
///
/// A single observation has standard error 0 by convention.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Ordinary least squares of `y` on `x`; returns (slope, intercept, r^2).
pub fn ols(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::Fit("x and y lengths differ".into()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::Fit(format!("need at least 2 points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y.iter()).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("regressor is constant".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let r2 = if syy == 0.0 {
        1.0 // constant response fitted exactly by the constant line
    } else {
        let ss_res: f64 = x
            .iter()
            .zip(y.iter())
            .map(|(a, b)| (b - (intercept + slope * a)).powi(2))
            .sum();
        1.0 - ss_res / syy
    };
    Ok((slope, intercept, r2))
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Two-sample Kolmogorov-Smirnov statistic on integer-valued samples.
pub fn ks_two_sample_counts(a: &[u64], b: &[u64]) -> f64 {
    let max = a.iter().chain(b.iter()).copied().max().unwrap_or(0);
    let ecdf = |xs: &[u64], t: u64| xs.iter().filter(|&&x| x <= t).count() as f64 / xs.len() as f64;
    (0..=max)
        .map(|t| (ecdf(a, t) - ecdf(b, t)).abs())
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov critical value `c(alpha) sqrt((n+m)/(n m))`;
/// one-sample callers pass `m = infinity` via [`ks_critical_one_sample`].
pub fn ks_critical_two_sample(alpha: f64, n: usize, m: usize) -> f64 {
    kolmogorov_c(alpha) * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

pub fn ks_critical_one_sample(alpha: f64, n: usize) -> f64 {
    kolmogorov_c(alpha) / (n as f64).sqrt()
}

fn kolmogorov_c(alpha: f64) -> f64 {
    // c(alpha) = sqrt(-ln(alpha/2)/2)
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// Pearson chi-square statistic over matched observed/expected bins.
pub fn chi_square_statistic(observed: &[f64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected.iter())
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum()
}

/// Upper quantile of the chi-square distribution by the Wilson-Hilferty
/// cube approximation; adequate for gate checks at the percent level.
pub fn chi_square_quantile(dof: usize, upper_tail: f64) -> f64 {
    let k = dof as f64;
    let z = normal_quantile(1.0 - upper_tail);
    let t = 1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt();
    k * t.powi(3)
}

/// Standard normal quantile (Acklam's rational approximation).
pub fn normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = 0.02425;
    if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}
