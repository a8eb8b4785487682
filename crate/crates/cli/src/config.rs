//! Declarative experiment configuration.
//!
//! One flat JSON document drives a run. Field reference:
//!
//! ```text
//! schema_version   required, currently 1
//! experiment       "convergence" | "concentration" | "campbell" | "bounds_table"
//! sampler          "poisson" | "inhomogeneous_poisson" | "hawkes" | "deterministic"
//! rate             Poisson expected total mass E[eta(S)]
//! lambda_max       intensity bound (inhomogeneous Poisson)
//! intensity        intensity description (inhomogeneous Poisson)
//! baseline/branching/decay   Hawkes parameters (branching < 1)
//! measures         fixed scalar measures (deterministic sampler, interval)
//! space            "interval" | "box" | "finite_metric"
//! length/dim/side  space geometry; metric_csv + anchor_index for tables
//! alpha            augmentation distance, default 1.0
//! p                Wasserstein order
//! n_grid           strictly increasing sample sizes; concentration and
//!                  campbell use its first entry as their fixed n
//! replications     per-grid-point replications, >= 1
//! estimator        "independent_pair" (default) | "proxy_reference"
//! proxy_n          reference sample size N for proxy_reference
//! master_seed      seed of every stream in the run
//! kappa/lambda_tail/k1/sigma/k2/k3/chi   rate-parameter overrides
//! eps_grid         explicit deviation grid (concentration)
//! campbell_f       "one" | "linear" | "damped"; campbell_c scales "damped"
//! out_dir          output directory (CLI --out overrides)
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use ppwass::{
    EstimatorMode, GroundSpace, Intensity, SamplerSpec, SamplerVariant, SpaceKind,
};
use ppwass::bounds::RateParams;
use ppwass::measure::CountingMeasure;

use crate::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;

/// Cap on the proxy-reference sample size N.
pub const MAX_PROXY_REFERENCE: usize = 16_384;

/// Cost-matrix size above which proxy runs emit a warning.
pub const COST_ENTRY_WARNING: usize = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Convergence,
    Concentration,
    Campbell,
    BoundsTable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Poisson,
    InhomogeneousPoisson,
    Hawkes,
    Deterministic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceShape {
    Interval,
    Box,
    FiniteMetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    IndependentPair,
    ProxyReference,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CampbellF {
    One,
    Linear,
    Damped,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub sampler: SamplerKind,

    pub rate: Option<f64>,
    pub lambda_max: Option<f64>,
    pub intensity: Option<Intensity>,
    pub baseline: Option<f64>,
    pub branching: Option<f64>,
    pub decay: Option<f64>,
    pub measures: Option<Vec<Vec<f64>>>,

    pub space: SpaceShape,
    pub length: Option<f64>,
    pub dim: Option<usize>,
    pub side: Option<f64>,
    pub metric_csv: Option<PathBuf>,
    pub anchor_index: Option<usize>,
    pub alpha: Option<f64>,

    pub p: f64,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub estimator: Option<EstimatorKind>,
    pub proxy_n: Option<usize>,
    pub master_seed: u64,

    pub kappa: Option<f64>,
    pub lambda_tail: Option<f64>,
    pub k1: Option<f64>,
    pub sigma: Option<f64>,
    pub k2: Option<f64>,
    pub k3: Option<f64>,
    pub chi: Option<f64>,

    pub eps_grid: Option<Vec<f64>>,
    pub campbell_f: Option<CampbellF>,
    pub campbell_c: Option<f64>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::Config(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        if self.n_grid.is_empty() {
            return Err(HarnessError::Config("n_grid must be non-empty".into()));
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(HarnessError::Config("n_grid must be strictly increasing".into()));
        }
        if self.n_grid[0] == 0 {
            return Err(HarnessError::Config("sample sizes must be at least 1".into()));
        }
        if self.replications < 1 {
            return Err(HarnessError::Config("replications must be at least 1".into()));
        }
        if !(self.p >= 1.0) {
            return Err(HarnessError::Config(format!("order p must be >= 1, got {}", self.p)));
        }
        Ok(())
    }

    pub fn build_space(&self) -> Result<GroundSpace, HarnessError> {
        let alpha = self.alpha.unwrap_or(1.0);
        let space = match self.space {
            SpaceShape::Interval => {
                let length = self
                    .length
                    .ok_or_else(|| HarnessError::Config("interval space needs \"length\"".into()))?;
                GroundSpace::interval(length, alpha)?
            }
            SpaceShape::Box => {
                let dim = self
                    .dim
                    .ok_or_else(|| HarnessError::Config("box space needs \"dim\"".into()))?;
                let side = self
                    .side
                    .ok_or_else(|| HarnessError::Config("box space needs \"side\"".into()))?;
                GroundSpace::boxed(dim, side, alpha)?
            }
            SpaceShape::FiniteMetric => {
                let path = self.metric_csv.as_ref().ok_or_else(|| {
                    HarnessError::Config("finite_metric space needs \"metric_csv\"".into())
                })?;
                GroundSpace::finite_metric_from_csv(path, alpha, self.anchor_index.unwrap_or(0))?
            }
        };
        Ok(space)
    }

    pub fn build_sampler(&self, space: &GroundSpace) -> Result<SamplerSpec, HarnessError> {
        let variant = match self.sampler {
            SamplerKind::Poisson => SamplerVariant::HomogeneousPoisson {
                rate: self
                    .rate
                    .ok_or_else(|| HarnessError::Config("poisson sampler needs \"rate\"".into()))?,
            },
            SamplerKind::InhomogeneousPoisson => SamplerVariant::InhomogeneousPoisson {
                lambda_max: self.lambda_max.ok_or_else(|| {
                    HarnessError::Config("inhomogeneous sampler needs \"lambda_max\"".into())
                })?,
                intensity: self.intensity.clone().ok_or_else(|| {
                    HarnessError::Config("inhomogeneous sampler needs \"intensity\"".into())
                })?,
            },
            SamplerKind::Hawkes => SamplerVariant::HawkesExp {
                baseline: self
                    .baseline
                    .ok_or_else(|| HarnessError::Config("hawkes sampler needs \"baseline\"".into()))?,
                branching: self
                    .branching
                    .ok_or_else(|| HarnessError::Config("hawkes sampler needs \"branching\"".into()))?,
                decay: self
                    .decay
                    .ok_or_else(|| HarnessError::Config("hawkes sampler needs \"decay\"".into()))?,
            },
            SamplerKind::Deterministic => {
                let lists = self.measures.as_ref().ok_or_else(|| {
                    HarnessError::Config("deterministic sampler needs \"measures\"".into())
                })?;
                SamplerVariant::Deterministic {
                    measures: lists
                        .iter()
                        .map(|xs| CountingMeasure::from_scalars(xs))
                        .collect(),
                }
            }
        };
        Ok(SamplerSpec::new(variant, space.clone())?)
    }

    pub fn estimator_mode(&self) -> Result<EstimatorMode, HarnessError> {
        match self.estimator.unwrap_or(EstimatorKind::IndependentPair) {
            EstimatorKind::IndependentPair => Ok(EstimatorMode::IndependentPair),
            EstimatorKind::ProxyReference => {
                let n = self.proxy_n.ok_or_else(|| {
                    HarnessError::Config("proxy_reference estimator needs \"proxy_n\"".into())
                })?;
                if n > MAX_PROXY_REFERENCE {
                    return Err(HarnessError::Config(format!(
                        "proxy_n = {n} exceeds the cap of {MAX_PROXY_REFERENCE}"
                    )));
                }
                if let Some(&max_n) = self.n_grid.iter().max() {
                    if max_n.saturating_mul(n) > COST_ENTRY_WARNING {
                        eprintln!(
                            "warning: proxy_reference flow at n = {max_n}, N = {n} builds \
                             {} cost entries",
                            max_n * n
                        );
                    }
                }
                Ok(EstimatorMode::ProxyReference { reference_n: n })
            }
        }
    }

    /// Rate parameters for bound annotations: geometry from the space,
    /// everything else from the overrides or their defaults.
    pub fn rate_params(&self, space: &GroundSpace) -> RateParams {
        let dim_m = match space.kind() {
            SpaceKind::Interval { .. } => 1.0,
            SpaceKind::Box { dim, .. } => *dim as f64,
            SpaceKind::FiniteMetric { .. } => 1.0,
        };
        RateParams {
            p: self.p,
            kappa: self.kappa.unwrap_or(0.1),
            dim_m,
            lambda_tail: self.lambda_tail.unwrap_or(1.0),
            k1: self.k1.unwrap_or(1.0),
            sigma: self.sigma.unwrap_or(dim_m),
            k2: self.k2.unwrap_or(2.0),
            k3: self.k3,
            alpha: space.alpha(),
            diam: space.diameter(),
        }
    }

    pub fn chi(&self) -> f64 {
        self.chi.unwrap_or(0.5)
    }
}

/// A minimal convergence config used by tests and docs.
pub fn example_convergence_config() -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        experiment: ExperimentKind::Convergence,
        sampler: SamplerKind::Poisson,
        rate: Some(1.0),
        lambda_max: None,
        intensity: None,
        baseline: None,
        branching: None,
        decay: None,
        measures: None,
        space: SpaceShape::Interval,
        length: Some(1.0),
        dim: None,
        side: None,
        metric_csv: None,
        anchor_index: None,
        alpha: Some(1.0),
        p: 1.0,
        n_grid: vec![16, 32, 64],
        replications: 4,
        estimator: None,
        proxy_n: None,
        master_seed: 42,
        kappa: None,
        lambda_tail: None,
        k1: None,
        sigma: None,
        k2: None,
        k3: None,
        chi: None,
        eps_grid: None,
        campbell_f: None,
        campbell_c: None,
        out_dir: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_json() {
        let config = example_convergence_config();
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back.experiment, ExperimentKind::Convergence);
        assert_eq!(back.n_grid, vec![16, 32, 64]);
    }

    #[test]
    fn rejects_bad_grids_and_versions() {
        let mut config = example_convergence_config();
        config.n_grid = vec![16, 16];
        assert!(config.validate().is_err());
        config.n_grid = vec![32, 16];
        assert!(config.validate().is_err());
        config.n_grid = vec![16];
        config.replications = 0;
        assert!(config.validate().is_err());
        config.replications = 1;
        config.schema_version = 99;
        assert!(config.validate().is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut value: serde_json::Value =
            serde_json::to_value(example_convergence_config()).unwrap();
        value["typo_field"] = serde_json::json!(1);
        let text = serde_json::to_string(&value).unwrap();
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn proxy_reference_is_capped() {
        let mut config = example_convergence_config();
        config.estimator = Some(EstimatorKind::ProxyReference);
        config.proxy_n = Some(MAX_PROXY_REFERENCE + 1);
        assert!(config.estimator_mode().is_err());
        config.proxy_n = Some(128);
        assert!(matches!(
            config.estimator_mode().unwrap(),
            EstimatorMode::ProxyReference { reference_n: 128 }
        ));
    }

    #[test]
    fn builds_space_sampler_and_params() {
        let config = example_convergence_config();
        let space = config.build_space().unwrap();
        assert!(space.is_interval());
        let sampler = config.build_sampler(&space).unwrap();
        assert!(matches!(
            sampler.variant(),
            SamplerVariant::HomogeneousPoisson { .. }
        ));
        let params = config.rate_params(&space);
        assert_eq!(params.dim_m, 1.0);
        assert_eq!(params.alpha, 1.0);
        assert_eq!(params.diam, 1.0);
        assert!(matches!(
            config.estimator_mode().unwrap(),
            EstimatorMode::IndependentPair
        ));
    }
}
