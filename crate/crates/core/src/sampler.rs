//! Seeded point-process samplers.
//!
//! The Hawkes process is generated two independent ways: through its
//! immigration-birth cluster representation and through thinning of the
//! conditional intensity. The two are distributionally equal, which gives a
//! built-in cross-validation oracle for both.
//!
//! For the homogeneous Poisson variant the rate parameter is the expected
//! total mass `E[eta(S)]`, not a per-unit intensity; the per-unit intensity
//! is `rate / |S|`. This keeps the meaning unambiguous on boxes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground::GroundSpace;
use crate::measure::CountingMeasure;
use crate::numeric::ln_factorial;
use crate::rng::RngStream;

/// Hard cap on points produced by one branching simulation.
pub const CASCADE_LIMIT: u64 = 10_000_000;

/// Per-unit intensity function for inhomogeneous Poisson sampling.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intensity {
    Constant { level: f64 },
    /// `intercept + slope * x`, clipped at zero.
    Linear { intercept: f64, slope: f64 },
    /// `base + amplitude * sin^2(pi x / period)`.
    SineBump { base: f64, amplitude: f64, period: f64 },
}

impl Intensity {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Intensity::Constant { level } => *level,
            Intensity::Linear { intercept, slope } => (intercept + slope * x).max(0.0),
            Intensity::SineBump { base, amplitude, period } => {
                base + amplitude * (std::f64::consts::PI * x / period).sin().powi(2)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerVariant {
    /// `rate` is the expected total mass `E[eta(S)]`.
    HomogeneousPoisson { rate: f64 },
    /// Thinning against the bound `lambda_max` on the per-unit intensity.
    InhomogeneousPoisson { lambda_max: f64, intensity: Intensity },
    /// Exponential-kernel Hawkes: baseline `nu`, kernel `a b e^{-bt}` with
    /// branching ratio `a < 1`.
    HawkesExp { baseline: f64, branching: f64, decay: f64 },
    /// Cycles through a fixed list of measures.
    Deterministic { measures: Vec<CountingMeasure> },
}

/// A sampler bound to its ground space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SamplerSpec {
    variant: SamplerVariant,
    space: GroundSpace,
}

impl SamplerSpec {
    pub fn new(variant: SamplerVariant, space: GroundSpace) -> Result<Self> {
        match &variant {
            SamplerVariant::HomogeneousPoisson { rate } => {
                if !(*rate >= 0.0) || !rate.is_finite() {
                    return Err(Error::domain(format!("Poisson rate must be >= 0, got {rate}")));
                }
                space.volume()?;
            }
            SamplerVariant::InhomogeneousPoisson { lambda_max, .. } => {
                if !(*lambda_max > 0.0) || !lambda_max.is_finite() {
                    return Err(Error::domain(format!(
                        "intensity bound must be positive, got {lambda_max}"
                    )));
                }
                if !space.is_interval() {
                    return Err(Error::UnsupportedSpace(
                        "inhomogeneous Poisson sampling is implemented on intervals".into(),
                    ));
                }
            }
            SamplerVariant::HawkesExp { baseline, branching, decay } => {
                if !(*baseline >= 0.0) || !baseline.is_finite() {
                    return Err(Error::domain(format!("baseline must be >= 0, got {baseline}")));
                }
                if !(*branching >= 0.0 && *branching < 1.0) {
                    return Err(Error::domain(format!(
                        "branching ratio must lie in [0, 1), got {branching}"
                    )));
                }
                if !(*decay > 0.0) || !decay.is_finite() {
                    return Err(Error::domain(format!("decay must be positive, got {decay}")));
                }
                if !space.is_interval() {
                    return Err(Error::UnsupportedSpace(
                        "Hawkes sampling is implemented on intervals".into(),
                    ));
                }
            }
            SamplerVariant::Deterministic { measures } => {
                if measures.is_empty() {
                    return Err(Error::precondition("deterministic sampler needs measures"));
                }
                for mu in measures {
                    for p in mu.points() {
                        if !space.contains(p) {
                            return Err(Error::domain(format!(
                                "fixed measure point {p:?} lies outside the ground space"
                            )));
                        }
                    }
                }
            }
        }
        Ok(SamplerSpec { variant, space })
    }

    pub fn variant(&self) -> &SamplerVariant {
        &self.variant
    }

    pub fn space(&self) -> &GroundSpace {
        &self.space
    }

    /// One realization. Hawkes uses the cluster construction.
    pub fn sample(&self, stream: &mut RngStream) -> Result<CountingMeasure> {
        match &self.variant {
            SamplerVariant::HomogeneousPoisson { .. }
            | SamplerVariant::InhomogeneousPoisson { .. } => sample_poisson(self, stream),
            SamplerVariant::HawkesExp { .. } => sample_hawkes_cluster(self, stream),
            SamplerVariant::Deterministic { measures } => {
                let k = stream.next_ordinal() as usize % measures.len();
                Ok(measures[k].clone())
            }
        }
    }
}

/// Poisson realization: count from the total-mass distribution, locations
/// i.i.d. uniform; inhomogeneous intensities are thinned against their bound.
pub fn sample_poisson(spec: &SamplerSpec, stream: &mut RngStream) -> Result<CountingMeasure> {
    let space = &spec.space;
    match &spec.variant {
        SamplerVariant::HomogeneousPoisson { rate } => {
            let count = stream.poisson(*rate);
            Ok(CountingMeasure::new(
                (0..count).map(|_| space.sample_point(stream)).collect(),
            ))
        }
        SamplerVariant::InhomogeneousPoisson { lambda_max, intensity } => {
            let length = space.interval_length()?;
            let candidates = stream.poisson(lambda_max * length);
            let mut points = Vec::new();
            for _ in 0..candidates {
                let x = stream.uniform(0.0, length);
                let level = intensity.eval(x);
                if level > *lambda_max * (1.0 + 1e-12) {
                    return Err(Error::domain(format!(
                        "intensity {level} at {x} exceeds its declared bound {lambda_max}"
                    )));
                }
                if stream.next_f64() * lambda_max < level {
                    points.push(crate::ground::Point::Scalar(x));
                }
            }
            Ok(CountingMeasure::new(points))
        }
        _ => Err(Error::precondition("sample_poisson needs a Poisson variant")),
    }
}

fn hawkes_params(spec: &SamplerSpec) -> Result<(f64, f64, f64, f64)> {
    match &spec.variant {
        SamplerVariant::HawkesExp { baseline, branching, decay } => {
            Ok((*baseline, *branching, *decay, spec.space.interval_length()?))
        }
        _ => Err(Error::precondition("operation needs a HawkesExp variant")),
    }
}

/// Hawkes realization via the immigration-birth cluster construction.
///
/// Immigrants arrive as a rate-`nu` Poisson process on `[0, T]`. A point at
/// time `t` bears `Poisson(a (1 - e^{-b(T-t)}))` children at truncated-
/// exponential offsets, which is the kernel mass restricted to the horizon,
/// so no rejection step is needed.
pub fn sample_hawkes_cluster(spec: &SamplerSpec, stream: &mut RngStream) -> Result<CountingMeasure> {
    let (nu, a, b, horizon) = hawkes_params(spec)?;
    let immigrants = stream.poisson(nu * horizon);
    let mut pending: Vec<f64> = (0..immigrants)
        .map(|_| stream.uniform(0.0, horizon))
        .collect();
    let mut times: Vec<f64> = Vec::with_capacity(pending.len());
    while let Some(t) = pending.pop() {
        times.push(t);
        if times.len() as u64 + pending.len() as u64 > CASCADE_LIMIT {
            return Err(Error::RunawayCascade { limit: CASCADE_LIMIT });
        }
        let window = horizon - t;
        if window <= 0.0 {
            continue;
        }
        let mean = a * (-(-b * window).exp_m1());
        let children = stream.poisson(mean);
        for _ in 0..children {
            pending.push(t + stream.truncated_exponential(b, window));
        }
    }
    times.sort_by(f64::total_cmp);
    Ok(CountingMeasure::new(
        times.into_iter().map(crate::ground::Point::Scalar).collect(),
    ))
}

/// Hawkes realization by thinning the conditional intensity
/// `lambda_t = nu + sum_{t_i < t} a b e^{-b (t - t_i)}`.
///
/// The exponential kernel folds the history into one decaying excitation
/// state, so each proposal is O(1). Distributionally equal to
/// [`sample_hawkes_cluster`].
pub fn sample_hawkes_thinning(spec: &SamplerSpec, stream: &mut RngStream) -> Result<CountingMeasure> {
    let (nu, a, b, horizon) = hawkes_params(spec)?;
    let mut t = 0.0f64;
    let mut excitation = 0.0f64;
    let mut times: Vec<f64> = Vec::new();
    loop {
        let bound = nu + excitation;
        if bound <= 0.0 {
            break;
        }
        let wait = stream.exponential(bound);
        t += wait;
        if t > horizon {
            break;
        }
        excitation *= (-b * wait).exp();
        if stream.next_f64() * bound <= nu + excitation {
            times.push(t);
            excitation += a * b;
            if times.len() as u64 > CASCADE_LIMIT {
                return Err(Error::RunawayCascade { limit: CASCADE_LIMIT });
            }
        }
    }
    Ok(CountingMeasure::new(
        times.into_iter().map(crate::ground::Point::Scalar).collect(),
    ))
}

/// Mean point count of the truncated Hawkes process on `[0, T]`:
/// `nu [ T/(1-a) - a (1 - e^{-b(1-a)T}) / (b (1-a)^2) ]`.
///
/// Closed form of `nu * integral of E[S(t)] dt`, where the mean cluster size
/// at age `t` solves `M'(t) = b((a-1)M(t) + 1)`, `M(0) = 1`.
pub fn hawkes_mean_count(baseline: f64, branching: f64, decay: f64, horizon: f64) -> f64 {
    let a = branching;
    let lam = decay * (1.0 - a);
    baseline * (horizon / (1.0 - a) - a * (-(-lam * horizon).exp_m1()) / (decay * (1.0 - a).powi(2)))
}

/// Borel pmf `P(X = m) = e^{-mu m} (mu m)^{m-1} / m!`, in log space.
pub fn borel_pmf(mu: f64, m: u64) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::domain(format!("Borel parameter must lie in (0,1), got {mu}")));
    }
    if m < 1 {
        return Err(Error::domain("Borel support starts at m = 1"));
    }
    let mf = m as f64;
    let ln_p = -mu * mf + (mf - 1.0) * (mu * mf).ln() - ln_factorial(m);
    Ok(ln_p.exp())
}

/// Total progeny of a Galton-Watson tree with Poisson(`mu`) offspring;
/// Borel-distributed.
pub fn sample_borel(mu: f64, stream: &mut RngStream) -> Result<u64> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::domain(format!("Borel parameter must lie in (0,1), got {mu}")));
    }
    let mut total: u64 = 1;
    let mut pending: u64 = 1;
    while pending > 0 {
        pending -= 1;
        let children = stream.poisson(mu);
        total += children;
        pending += children;
        if total > CASCADE_LIMIT {
            return Err(Error::RunawayCascade { limit: CASCADE_LIMIT });
        }
    }
    Ok(total)
}

/// Exponential tail envelope fitted from sampled cardinalities.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TailFit {
    /// Envelope scale `K1`.
    pub k1: f64,
    /// Envelope rate `lambda`.
    pub lambda: f64,
}

/// Fit the tightest `K1 e^{-lambda m}` dominating the empirical pmf of the
/// sample cardinalities.
///
/// `lambda` comes from least squares of log survival counts against `m` over
/// the observed support; `K1` is then raised until the envelope dominates
/// every observed frequency, with equality at the binding cardinality.
pub fn fit_tail(samples: &[CountingMeasure]) -> Result<TailFit> {
    if samples.len() < 100 {
        return Err(Error::precondition(format!(
            "tail fit needs at least 100 samples, got {}",
            samples.len()
        )));
    }
    let counts: Vec<u64> = samples.iter().map(|s| s.cardinality() as u64).collect();
    fit_tail_from_counts(&counts)
}

/// As [`fit_tail`], from raw cardinalities.
pub fn fit_tail_from_counts(counts: &[u64]) -> Result<TailFit> {
    if counts.is_empty() {
        return Err(Error::precondition("tail fit needs samples"));
    }
    let max = *counts.iter().max().expect("non-empty");
    let min = *counts.iter().min().expect("non-empty");
    if min == max {
        return Err(Error::DegenerateFit(format!(
            "all {} sampled cardinalities equal {max}",
            counts.len()
        )));
    }
    let n = counts.len() as f64;
    let mut freq = vec![0u64; max as usize + 1];
    for &c in counts {
        freq[c as usize] += 1;
    }
    // Survival counts #{i : count_i >= m} at each observed cardinality.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut at_least = counts.len() as u64;
    for m in 0..=max {
        if freq[m as usize] > 0 {
            xs.push(m as f64);
            ys.push((at_least as f64).ln());
        }
        at_least -= freq[m as usize];
    }
    let (slope, _, _) = crate::stats::ols(&xs, &ys)?;
    if !(slope < 0.0) {
        return Err(Error::DegenerateFit(format!(
            "survival counts do not decay (fitted slope {slope})"
        )));
    }
    let lambda = -slope;
    let mut k1 = 0.0f64;
    for m in 0..=max {
        if freq[m as usize] > 0 {
            let pmf = freq[m as usize] as f64 / n;
            k1 = k1.max(pmf * (lambda * m as f64).exp());
        }
    }
    Ok(TailFit { k1, lambda })
}
