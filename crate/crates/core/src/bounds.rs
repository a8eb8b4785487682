//! Closed-form rate, concentration and sample-size bounds.
//!
//! Every function here evaluates a bound *shape*: the multiplicative
//! constants in the source results are existential, so all outputs carry an
//! implicit constant 1 and are only meaningful through their dependence on
//! `n` (slopes and exponents), never as absolute levels. Factorials and
//! powers are taken in log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::ln_factorial;

/// The constant bundle feeding every bound formula.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RateParams {
    /// Wasserstein order, `>= 1`.
    pub p: f64,
    /// Dimension slack `kappa > 0`.
    pub kappa: f64,
    /// Minkowski dimension of the ground space (interval 1, box `d`).
    pub dim_m: f64,
    /// Tail rate `lambda` of the exponential cardinality envelope.
    pub lambda_tail: f64,
    /// Tail scale `K1` of the envelope.
    pub k1: f64,
    /// Local mass exponent `sigma` of the location measure.
    pub sigma: f64,
    /// Local mass scale `K2`.
    pub k2: f64,
    /// Optional lower-envelope scale `K3`.
    pub k3: Option<f64>,
    /// Augmentation distance.
    pub alpha: f64,
    /// Ground-space diameter.
    pub diam: f64,
}

impl RateParams {
    fn check_common(&self) -> Result<()> {
        if !(self.p >= 1.0) {
            return Err(Error::domain(format!("order p must be >= 1, got {}", self.p)));
        }
        if !(self.dim_m > 0.0) || !self.dim_m.is_finite() {
            return Err(Error::domain(format!("dim_m must be positive, got {}", self.dim_m)));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::domain(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.lambda_tail > 0.0) {
            return Err(Error::domain(format!(
                "tail rate lambda must be positive, got {}",
                self.lambda_tail
            )));
        }
        Ok(())
    }

    fn check_lower(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa < self.sigma) {
            return Err(Error::domain(format!(
                "lower bounds need 0 < kappa < sigma, got kappa = {}, sigma = {}",
                self.kappa, self.sigma
            )));
        }
        if !(self.k2 > 0.0) {
            return Err(Error::domain(format!("K2 must be positive, got {}", self.k2)));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::domain(format!("alpha must be positive, got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Covering-number bound for the m-point stratum: `e^m (1 + M_S/m)^m`,
/// where `M_S` is the ground-space covering number at radius `eps/m`.
pub fn covering_bound_nm(m: u64, m_s: u64) -> Result<f64> {
    Ok(covering_bound_nm_ln(m, m_s)?.exp())
}

/// Natural log of [`covering_bound_nm`], safe from overflow.
pub fn covering_bound_nm_ln(m: u64, m_s: u64) -> Result<f64> {
    if m < 1 || m_s < 1 {
        return Err(Error::domain("covering bound needs m >= 1 and M_S >= 1"));
    }
    let mf = m as f64;
    Ok(mf + mf * (1.0 + m_s as f64 / mf).ln())
}

fn check_n(n: u64, min: u64) -> Result<f64> {
    if n < min {
        return Err(Error::domain(format!("n must be at least {min}, got {n}")));
    }
    Ok((n as f64).ln())
}

/// General upper-rate shape at a given `ln n`:
/// `e^{(1 + 1/(2p)) ln ln n} e^{-2 sqrt(lambda / (p (dim_m + kappa))) sqrt(ln n)}`.
pub fn upper_rate_at_log_n(ln_n: f64, params: &RateParams) -> f64 {
    let loglog = ln_n.ln().max(0.0);
    let c = 2.0 * (params.lambda_tail / (params.p * (params.dim_m + params.kappa))).sqrt();
    ((1.0 + 0.5 / params.p) * loglog - c * ln_n.sqrt()).exp()
}

/// General upper-rate shape; `n >= 3`. Up to an unknown constant.
pub fn upper_rate(n: u64, params: &RateParams) -> Result<f64> {
    params.check_common()?;
    let ln_n = check_n(n, 3)?;
    Ok(upper_rate_at_log_n(ln_n, params))
}

/// Interval refinement at a given `ln n`:
/// `e^{(1/2 + 1/(2p)) ln ln n} e^{-2 sqrt(lambda/p) sqrt(ln n)}`
/// (no dimension dependence).
pub fn upper_rate_interval_at_log_n(ln_n: f64, params: &RateParams) -> f64 {
    let loglog = ln_n.ln().max(0.0);
    let c = 2.0 * (params.lambda_tail / params.p).sqrt();
    ((0.5 + 0.5 / params.p) * loglog - c * ln_n.sqrt()).exp()
}

/// Interval refinement of the upper rate; `n >= 3`.
pub fn upper_rate_interval(n: u64, params: &RateParams) -> Result<f64> {
    params.check_common()?;
    let ln_n = check_n(n, 3)?;
    Ok(upper_rate_interval_at_log_n(ln_n, params))
}

/// Poisson refinement at a given `ln n`:
/// `e^{-(1 - chi) sqrt(2 / (p (dim_m + kappa))) sqrt(ln n ln ln n)}`.
///
/// The Poisson mass rate enters only through the unknown constant, so it
/// does not appear in the shape.
pub fn upper_rate_poisson_at_log_n(ln_n: f64, dim_m: f64, kappa: f64, p: f64, chi: f64) -> f64 {
    let loglog = ln_n.ln().max(0.0);
    let c = (2.0 / (p * (dim_m + kappa))).sqrt();
    (-(1.0 - chi) * c * (ln_n * loglog).sqrt()).exp()
}

/// Poisson refinement of the upper rate; `n >= 16` and `0 <= chi < 1`.
pub fn upper_rate_poisson(n: u64, dim_m: f64, kappa: f64, p: f64, chi: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&chi) {
        return Err(Error::domain(format!("chi must lie in [0, 1), got {chi}")));
    }
    if !(p >= 1.0) || !(dim_m > 0.0) || !(kappa > 0.0) {
        return Err(Error::domain("upper_rate_poisson needs p >= 1, dim_m > 0, kappa > 0"));
    }
    let ln_n = check_n(n, 16)?;
    Ok(upper_rate_poisson_at_log_n(ln_n, dim_m, kappa, p, chi))
}

/// Largest cardinality entering the lower-bound supremum: `floor((ln n)^{2/3})`.
pub fn max_admissible_cardinality(n: u64) -> u64 {
    if n < 2 {
        return 0;
    }
    (n as f64).ln().powf(2.0 / 3.0).floor() as u64
}

/// Lower-rate value in both the `W_p` and `W_p^p` forms, plus whether the
/// finite-`n` validity condition held.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LowerRate {
    /// `2^{-2-1/p} sup_m P(m)^{1/p} n^{-1/(m (sigma - kappa))}`.
    pub wp: f64,
    /// `2^{-(2p+1)} sup_m P(m) n^{-p/(m (sigma - kappa))}`.
    pub wp_pow: f64,
    /// True when `n` clears the per-cardinality validity thresholds; a
    /// false value flags the bound as below its validity range.
    pub valid: bool,
}

/// Almost-sure lower-rate shape from a cardinality pmf.
pub fn lower_rate(n: u64, params: &RateParams, pmf: impl Fn(u64) -> f64) -> Result<LowerRate> {
    params.check_lower()?;
    let ln_n = check_n(n, 2)?;
    let m_max = max_admissible_cardinality(n);
    if m_max < 1 {
        return Err(Error::EmptySupport(format!(
            "no admissible cardinality at n = {n} (range 1..=floor((ln n)^(2/3)) is empty)"
        )));
    }
    let gap = params.sigma - params.kappa;
    let mut best_wp = f64::NEG_INFINITY;
    let mut best_pow = f64::NEG_INFINITY;
    let mut any = false;
    for m in 1..=m_max {
        let mass = pmf(m);
        if !(mass > 0.0) {
            continue;
        }
        any = true;
        let ln_mass = mass.ln();
        best_wp = best_wp.max(ln_mass / params.p - ln_n / (m as f64 * gap));
        best_pow = best_pow.max(ln_mass - params.p * ln_n / (m as f64 * gap));
    }
    if !any {
        return Err(Error::EmptySupport(format!(
            "pmf vanishes on every cardinality 1..={m_max}"
        )));
    }
    let valid = validity_threshold(params, n)?;
    Ok(LowerRate {
        wp: ((-2.0 - 1.0 / params.p) * 2f64.ln() + best_wp).exp(),
        wp_pow: (-(2.0 * params.p + 1.0) * 2f64.ln() + best_pow).exp(),
        valid,
    })
}

/// Fast path of [`lower_rate`] for a Poisson count distribution with the
/// given total mass; enumerates the closed-form pmf in log space.
pub fn lower_rate_poisson(n: u64, params: &RateParams, lambda_mass: f64) -> Result<LowerRate> {
    if !(lambda_mass > 0.0) {
        return Err(Error::domain(format!(
            "Poisson mass must be positive, got {lambda_mass}"
        )));
    }
    lower_rate(n, params, |m| {
        (-lambda_mass + m as f64 * lambda_mass.ln() - ln_factorial(m)).exp()
    })
}

/// Edge of the admissible radius window for the m-point covering lower
/// bound: `2^{sigma/kappa} / (K2^{1/kappa} (2 m!)^{1/(m kappa)})`, capped
/// at `alpha`.
pub fn covering_lower_window(m: u64, params: &RateParams) -> Result<f64> {
    params.check_lower()?;
    if m < 1 {
        return Err(Error::domain("cardinality m must be at least 1"));
    }
    let mf = m as f64;
    let ln_edge = (params.sigma / params.kappa) * 2f64.ln()
        - params.k2.ln() / params.kappa
        - (2f64.ln() + ln_factorial(m)) / (mf * params.kappa);
    Ok(ln_edge.exp().min(params.alpha))
}

/// Covering lower bound `eps^{-m (sigma - kappa)}` for the m-point stratum,
/// valid for `eps` up to and including the window edge.
pub fn covering_lower(eps: f64, m: u64, params: &RateParams) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {eps}")));
    }
    let edge = covering_lower_window(m, params)?;
    if eps > edge {
        return Err(Error::WindowViolation { eps, edge });
    }
    Ok((-(m as f64) * (params.sigma - params.kappa) * eps.ln()).exp())
}

/// Whether `n` clears the validity threshold of the lower bound: for every
/// admissible `m`, `n` must exceed `window(m)^{-m (sigma - kappa)}`.
///
/// Returns false when the admissible range is empty (e.g. `n = 1`).
pub fn validity_threshold(params: &RateParams, n: u64) -> Result<bool> {
    params.check_lower()?;
    if n < 2 {
        return Ok(false);
    }
    let ln_n = (n as f64).ln();
    let m_max = max_admissible_cardinality(n);
    if m_max < 1 {
        return Ok(false);
    }
    let gap = params.sigma - params.kappa;
    for m in 1..=m_max {
        let edge = covering_lower_window(m, params)?;
        let ln_threshold = -(m as f64) * gap * edge.ln();
        if !(ln_n > ln_threshold) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One-sided concentration bound for the empirical `W_p`:
/// `exp(-eps^2 lambda^3 / (16 K1 e^lambda (diam + alpha)^2 n^{1-2/p}
///   + 4 lambda^2 eps (diam + alpha) n^{-1/p}))`.
///
/// Applicable only for `1 <= p < 2`.
pub fn concentration_bound(eps: f64, n: u64, params: &RateParams) -> Result<f64> {
    if !(params.p >= 1.0 && params.p < 2.0) {
        return Err(Error::OutOfRegime(format!(
            "concentration bound needs 1 <= p < 2, got p = {}",
            params.p
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::domain(format!("deviation must be positive, got {eps}")));
    }
    if n < 1 {
        return Err(Error::domain("n must be at least 1"));
    }
    if !(params.k1 > 0.0) || !(params.lambda_tail > 0.0) {
        return Err(Error::domain("concentration bound needs K1 > 0 and lambda > 0"));
    }
    let nf = n as f64;
    let da = params.diam + params.alpha;
    let lam = params.lambda_tail;
    let denom = 16.0 * params.k1 * lam.exp() * da * da * nf.powf(1.0 - 2.0 / params.p)
        + 4.0 * lam * lam * eps * da * nf.powf(-1.0 / params.p);
    Ok((-(eps * eps) * lam.powi(3) / denom).exp())
}

/// Two-sided version: twice the one-sided bound, capped at 1.
pub fn concentration_bound_two_sided(eps: f64, n: u64, params: &RateParams) -> Result<f64> {
    Ok((2.0 * concentration_bound(eps, n, params)?).min(1.0))
}

/// Smallest `n` with simplified upper-rate shape
/// `e^{-2 sqrt(lambda / (p (dim_m + 2 kappa))) sqrt(ln n)} <= target_eps`,
/// i.e. `n >= exp(p (dim_m + 2 kappa) ln(1/eps)^2 / (4 lambda))`.
///
/// Like every rate here this carries an unknown constant; the result is a
/// shape-level sample-size rule, not a calibrated guarantee.
pub fn min_sample_size(target_eps: f64, params: &RateParams) -> Result<u64> {
    params.check_common()?;
    if !(target_eps > 0.0 && target_eps < 1.0) {
        return Err(Error::domain(format!(
            "target must lie strictly inside (0, 1), got {target_eps}"
        )));
    }
    let ln_inv = -(target_eps.ln());
    let exponent =
        params.p * (params.dim_m + 2.0 * params.kappa) * ln_inv * ln_inv / (4.0 * params.lambda_tail);
    let raw = exponent.exp();
    if !(raw < u64::MAX as f64) {
        return Err(Error::domain(format!(
            "required sample size exp({exponent:.3}) exceeds u64"
        )));
    }
    Ok((raw.ceil() as u64).max(1))
}
