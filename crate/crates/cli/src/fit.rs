//! Rate-shape regression: log mean distance against the exponent abscissa.

use serde::{Deserialize, Serialize};

use crate::rows::AggregateRow;
use crate::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Abscissa {
    /// `sqrt(ln n)` — the general upper-rate exponent scale.
    SqrtLogN,
    /// `sqrt(ln n * ln ln n)` — the Poisson-refined exponent scale.
    SqrtLogNLogLogN,
}

impl Abscissa {
    pub fn eval(&self, n: usize) -> f64 {
        let ln_n = (n as f64).ln();
        match self {
            Abscissa::SqrtLogN => ln_n.sqrt(),
            Abscissa::SqrtLogNLogLogN => (ln_n * ln_n.ln().max(0.0)).sqrt(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Abscissa::SqrtLogN => "sqrt_log_n",
            Abscissa::SqrtLogNLogLogN => "sqrt_logn_loglogn",
        }
    }
}

impl std::str::FromStr for Abscissa {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "sqrt_log_n" => Ok(Abscissa::SqrtLogN),
            "sqrt_logn_loglogn" => Ok(Abscissa::SqrtLogNLogLogN),
            other => Err(HarnessError::Config(format!(
                "unknown abscissa {other:?}; use sqrt_log_n or sqrt_logn_loglogn"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub rows_used: usize,
    pub rows_dropped: usize,
}

/// OLS of `ln(mean_w)` on the chosen abscissa. Rows with non-positive or
/// non-finite means are dropped; at least 4 usable rows are required.
pub fn fit_rate(rows: &[AggregateRow], abscissa: Abscissa) -> Result<RateFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut dropped = 0usize;
    for row in rows {
        if row.mean_w > 0.0 && row.mean_w.is_finite() {
            xs.push(abscissa.eval(row.n));
            ys.push(row.mean_w.ln());
        } else {
            dropped += 1;
        }
    }
    if xs.len() < 4 {
        return Err(HarnessError::Fit(format!(
            "need at least 4 rows with positive means, got {} ({dropped} dropped)",
            xs.len()
        )));
    }
    let (slope, intercept, r_squared) =
        ppwass::stats::ols(&xs, &ys).map_err(|e| HarnessError::Fit(e.to_string()))?;
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        rows_used: xs.len(),
        rows_dropped: dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, mean: f64) -> AggregateRow {
        AggregateRow {
            n,
            mean_w: mean,
            stderr: 0.0,
            upper_rate: 0.0,
            upper_rate_poisson: 0.0,
            lower_rate: 0.0,
            lower_rate_valid: false,
        }
    }

    #[test]
    fn recovers_synthetic_exponent_exactly() {
        // mean = e^{-2 sqrt(ln n)} fits with slope -2, r^2 = 1.
        let rows: Vec<AggregateRow> = [16usize, 64, 256, 1024, 4096]
            .iter()
            .map(|&n| row(n, (-2.0 * (n as f64).ln().sqrt()).exp()))
            .collect();
        let fit = fit_rate(&rows, Abscissa::SqrtLogN).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-6, "slope {}", fit.slope);
        assert!((fit.r_squared - 1.0).abs() < 1e-9);
        assert_eq!(fit.rows_used, 5);
    }

    #[test]
    fn constant_means_fit_flat() {
        let rows: Vec<AggregateRow> = [16usize, 64, 256, 1024]
            .iter()
            .map(|&n| row(n, 0.25))
            .collect();
        let fit = fit_rate(&rows, Abscissa::SqrtLogNLogLogN).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn drops_nonpositive_rows_and_errors_below_four() {
        let rows = vec![row(16, 0.5), row(32, 0.0), row(64, -1.0), row(128, 0.2)];
        match fit_rate(&rows, Abscissa::SqrtLogN) {
            Err(HarnessError::Fit(msg)) => assert!(msg.contains("2 dropped"), "{msg}"),
            other => panic!("expected fit error, got {other:?}"),
        }
    }

    #[test]
    fn abscissa_parsing() {
        assert_eq!("sqrt-log-n".parse::<Abscissa>().unwrap(), Abscissa::SqrtLogN);
        assert_eq!(
            "sqrt_logn_loglogn".parse::<Abscissa>().unwrap(),
            Abscissa::SqrtLogNLogLogN
        );
        assert!("nope".parse::<Abscissa>().is_err());
    }
}
