//! Experiment execution.
//!
//! Replications parallelise freely because replication `r` of grid entry
//! `e` owns the two streams `e * 2^20 + 2r` and `e * 2^20 + 2r + 1`; rows
//! are merged back in job order, so outputs are byte-identical at any
//! thread count.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use ppwass::bounds::{self, RateParams};
use ppwass::sampler::{fit_tail_from_counts, TailFit};
use ppwass::stats;
use ppwass::{law, EstimatorMode, GroundSpace, RngStream, SamplerSpec};

use crate::config::{CampbellF, ExperimentConfig, ExperimentKind, SamplerKind};
use crate::fit::Abscissa;
use crate::plot;
use crate::rows::{
    write_aggregate_csv, write_raw_csv, write_timings_csv, AggregateRow, ResultRow,
};
use crate::{HarnessError, Result};

/// Stream block reserved per grid entry.
pub const STREAMS_PER_GRID_ENTRY: u64 = 1 << 20;

/// Run the closure on a dedicated rayon pool of `threads` workers
/// (0 = library default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("rayon pool")
            .install(f)
    }
}

#[derive(Debug)]
pub struct ConvergenceOutput {
    pub raw: Vec<ResultRow>,
    pub aggregate: Vec<AggregateRow>,
    /// Pooled cardinality histogram of every drawn realization.
    pub count_freq: Vec<u64>,
    pub bias_note: &'static str,
}

struct RowOutcome {
    n: usize,
    replication: usize,
    stream_a: u64,
    stream_b: u64,
    outcome: ppwass::Result<(f64, Vec<u64>, f64)>, // value, counts, runtime ms
}

fn compute_rows(
    config: &ExperimentConfig,
    space: &GroundSpace,
    spec: &SamplerSpec,
    mode: EstimatorMode,
    grid: &[usize],
) -> Vec<RowOutcome> {
    let jobs: Vec<(usize, usize, usize)> = grid
        .iter()
        .enumerate()
        .flat_map(|(e, &n)| (0..config.replications).map(move |r| (e, n, r)))
        .collect();
    jobs.into_par_iter()
        .map(|(e, n, r)| {
            let stream_a = e as u64 * STREAMS_PER_GRID_ENTRY + 2 * r as u64;
            let stream_b = stream_a + 1;
            let mut sa = RngStream::new(config.master_seed, stream_a);
            let mut sb = RngStream::new(config.master_seed, stream_b);
            let start = Instant::now();
            let outcome =
                law::wp_two_sample_with_streams(space, spec, n, mode, config.p, &mut sa, &mut sb)
                    .map(|est| {
                        (est.value, est.counts, start.elapsed().as_secs_f64() * 1e3)
                    });
            RowOutcome { n, replication: r, stream_a, stream_b, outcome }
        })
        .collect()
}

/// Rows, pooled cardinality histogram, and the first failure if any.
type SplitRows = (Vec<ResultRow>, Vec<u64>, Option<(usize, usize, ppwass::Error)>);

fn split_outcomes(outcomes: Vec<RowOutcome>) -> SplitRows {
    let mut rows = Vec::with_capacity(outcomes.len());
    let mut freq: Vec<u64> = Vec::new();
    let mut first_error = None;
    for o in outcomes {
        match o.outcome {
            Ok((value, counts, runtime_ms)) => {
                for c in counts {
                    if freq.len() <= c as usize {
                        freq.resize(c as usize + 1, 0);
                    }
                    freq[c as usize] += 1;
                }
                rows.push(ResultRow {
                    n: o.n,
                    replication: o.replication,
                    stream_a: o.stream_a,
                    stream_b: o.stream_b,
                    value,
                    runtime_ms,
                });
            }
            Err(e) => {
                if first_error.is_none() {
                    first_error = Some((o.n, o.replication, e));
                }
            }
        }
    }
    (rows, freq, first_error)
}

/// Annotate one grid point with its bound values. Bounds outside their
/// domain (tiny n, empty pmf support) surface as NaN columns.
fn annotate(
    n: usize,
    values: &[f64],
    params: &RateParams,
    chi: f64,
    poisson_rate: Option<f64>,
    count_freq: &[u64],
) -> AggregateRow {
    let (mean_w, stderr) = stats::mean_and_stderr(values);
    let upper = bounds::upper_rate(n as u64, params).unwrap_or(f64::NAN);
    let upper_poisson =
        bounds::upper_rate_poisson(n as u64, params.dim_m, params.kappa, params.p, chi)
            .unwrap_or(f64::NAN);
    let lower = match poisson_rate {
        Some(rate) => bounds::lower_rate_poisson(n as u64, params, rate),
        None => {
            let total: u64 = count_freq.iter().sum();
            bounds::lower_rate(n as u64, params, |m| {
                count_freq
                    .get(m as usize)
                    .map(|&k| k as f64 / total as f64)
                    .unwrap_or(0.0)
            })
        }
    };
    let (lower_rate, lower_rate_valid) = match lower {
        Ok(lr) => (lr.wp, lr.valid),
        Err(_) => (f64::NAN, false),
    };
    AggregateRow {
        n,
        mean_w,
        stderr,
        upper_rate: upper,
        upper_rate_poisson: upper_poisson,
        lower_rate,
        lower_rate_valid,
    }
}

fn poisson_rate_of(config: &ExperimentConfig) -> Option<f64> {
    match config.sampler {
        SamplerKind::Poisson => config.rate,
        _ => None,
    }
}

/// Convergence study: every (n, replication) two-sample distance plus
/// annotated aggregates. Errors abort with the first failing row.
pub fn run_convergence(config: &ExperimentConfig) -> Result<ConvergenceOutput> {
    config.validate()?;
    if config.experiment != ExperimentKind::Convergence {
        return Err(HarnessError::Config("config is not a convergence experiment".into()));
    }
    let space = config.build_space()?;
    let spec = config.build_sampler(&space)?;
    let mode = config.estimator_mode()?;
    let outcomes = compute_rows(config, &space, &spec, mode, &config.n_grid);
    let (rows, count_freq, first_error) = split_outcomes(outcomes);
    if let Some((n, replication, source)) = first_error {
        return Err(HarnessError::Aborted {
            n,
            replication,
            partial_path: "<not written: library call>".into(),
            source,
        });
    }
    let params = config.rate_params(&space);
    let aggregate = aggregate_rows(config, &rows, &params, &count_freq);
    Ok(ConvergenceOutput { raw: rows, aggregate, count_freq, bias_note: mode.bias_note() })
}

fn aggregate_rows(
    config: &ExperimentConfig,
    rows: &[ResultRow],
    params: &RateParams,
    count_freq: &[u64],
) -> Vec<AggregateRow> {
    config
        .n_grid
        .iter()
        .map(|&n| {
            let values: Vec<f64> =
                rows.iter().filter(|r| r.n == n).map(|r| r.value).collect();
            annotate(n, &values, params, config.chi(), poisson_rate_of(config), count_freq)
        })
        .collect()
}

/// Convergence run with artifacts written under `out_dir`: raw.csv,
/// timings.csv, aggregate.csv, plot.txt and meta.json. A failing row still
/// flushes the successful rows to raw.partial.csv before aborting.
pub fn run_convergence_to_dir(config: &ExperimentConfig, out_dir: &Path) -> Result<ConvergenceOutput> {
    config.validate()?;
    fs::create_dir_all(out_dir)?;
    let space = config.build_space()?;
    let spec = config.build_sampler(&space)?;
    let mode = config.estimator_mode()?;
    let outcomes = compute_rows(config, &space, &spec, mode, &config.n_grid);
    let (rows, count_freq, first_error) = split_outcomes(outcomes);
    if let Some((n, replication, source)) = first_error {
        let partial = out_dir.join("raw.partial.csv");
        let mut buf = Vec::new();
        write_raw_csv(&mut buf, &rows)?;
        fs::write(&partial, buf)?;
        return Err(HarnessError::Aborted {
            n,
            replication,
            partial_path: partial.display().to_string(),
            source,
        });
    }
    let params = config.rate_params(&space);
    let aggregate = aggregate_rows(config, &rows, &params, &count_freq);

    write_file(out_dir.join("raw.csv"), |buf| write_raw_csv(buf, &rows))?;
    write_file(out_dir.join("timings.csv"), |buf| write_timings_csv(buf, &rows))?;
    write_file(out_dir.join("aggregate.csv"), |buf| write_aggregate_csv(buf, &aggregate))?;
    write_file(out_dir.join("plot.txt"), |buf| {
        plot::emit_plot_data(buf, &aggregate, Abscissa::SqrtLogNLogLogN)
    })?;
    let meta = json!({
        "config": config,
        "estimator_bias": mode.bias_note(),
        "notes": [
            "bound columns are rate shapes with constant C = 1, not absolute levels",
            "timings.csv is outside the byte-reproducibility contract",
        ],
    });
    fs::write(out_dir.join("meta.json"), serde_json::to_vec_pretty(&meta)?)?;
    Ok(ConvergenceOutput { raw: rows, aggregate, count_freq, bias_note: mode.bias_note() })
}

fn write_file(path: std::path::PathBuf, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConcentrationRow {
    pub eps: f64,
    pub empirical_freq: f64,
    pub bound: f64,
}

pub struct ConcentrationOutput {
    pub n: usize,
    pub mean: f64,
    pub tail: TailFit,
    pub rows: Vec<ConcentrationRow>,
    pub raw: Vec<ResultRow>,
}

/// Concentration study at fixed `n = n_grid[0]`: empirical two-sided
/// exceedance of the two-sample distance against twice the one-sided bound
/// evaluated with tail constants fitted from the run's own draws.
pub fn run_concentration(config: &ExperimentConfig) -> Result<ConcentrationOutput> {
    config.validate()?;
    if config.experiment != ExperimentKind::Concentration {
        return Err(HarnessError::Config("config is not a concentration experiment".into()));
    }
    if !(config.p < 2.0) {
        return Err(HarnessError::Core(ppwass::Error::OutOfRegime(format!(
            "concentration experiments need 1 <= p < 2, got p = {}",
            config.p
        ))));
    }
    let space = config.build_space()?;
    let spec = config.build_sampler(&space)?;
    let mode = config.estimator_mode()?;
    let n = config.n_grid[0];
    let outcomes = compute_rows(config, &space, &spec, mode, &[n]);
    let (rows, count_freq, first_error) = split_outcomes(outcomes);
    if let Some((n, replication, source)) = first_error {
        return Err(HarnessError::Aborted {
            n,
            replication,
            partial_path: "<not written: library call>".into(),
            source,
        });
    }
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let (mean, _) = stats::mean_and_stderr(&values);
    let devs: Vec<f64> = values.iter().map(|v| (v - mean).abs()).collect();
    let max_dev = devs.iter().copied().fold(0.0, f64::max);

    let counts: Vec<u64> = count_freq
        .iter()
        .enumerate()
        .flat_map(|(m, &k)| std::iter::repeat_n(m as u64, k as usize))
        .collect();
    let tail = fit_tail_from_counts(&counts)?;
    let mut params = config.rate_params(&space);
    params.k1 = tail.k1;
    params.lambda_tail = tail.lambda;

    let eps_grid: Vec<f64> = match &config.eps_grid {
        Some(grid) => grid.clone(),
        // 12 rungs past the largest observed deviation.
        None => (1..=12).map(|k| max_dev.max(1e-12) * k as f64 / 10.0).collect(),
    };
    let total = values.len() as f64;
    let rows_out = eps_grid
        .iter()
        .map(|&eps| {
            let freq = devs.iter().filter(|&&d| d > eps).count() as f64 / total;
            let bound = bounds::concentration_bound_two_sided(eps, n as u64, &params)?;
            Ok(ConcentrationRow { eps, empirical_freq: freq, bound })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConcentrationOutput { n, mean, tail, rows: rows_out, raw: rows })
}

pub fn run_concentration_to_dir(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<ConcentrationOutput> {
    let output = run_concentration(config)?;
    fs::create_dir_all(out_dir)?;
    write_file(out_dir.join("raw.csv"), |buf| write_raw_csv(buf, &output.raw))?;
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["eps", "empirical_freq", "bound"])?;
        for r in &output.rows {
            w.write_record([
                crate::rows::fmt_f64(r.eps),
                crate::rows::fmt_f64(r.empirical_freq),
                crate::rows::fmt_f64(r.bound),
            ])?;
        }
        w.flush()?;
    }
    fs::write(out_dir.join("concentration.csv"), buf)?;
    let meta = json!({
        "config": config,
        "n": output.n,
        "mean": output.mean,
        "tail_fit": { "k1": output.tail.k1, "lambda": output.tail.lambda },
        "notes": [
            "empirical A2 constants: K1 and lambda fitted from this run's own draws",
            "bound column is the two-sided value, capped at 1",
        ],
    });
    fs::write(out_dir.join("meta.json"), serde_json::to_vec_pretty(&meta)?)?;
    Ok(output)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CampbellRow {
    pub n: usize,
    pub estimate: f64,
    pub stderr: f64,
    /// Closed-form reference, available for Poisson samplers with
    /// measure-independent integrands.
    pub analytic: Option<f64>,
}

/// Campbell-functional estimate `(1/n) sum_i sum_{x in eta_i} f(x, eta_i)`
/// for each n in the grid.
pub fn run_campbell(config: &ExperimentConfig) -> Result<Vec<CampbellRow>> {
    config.validate()?;
    if config.experiment != ExperimentKind::Campbell {
        return Err(HarnessError::Config("config is not a campbell experiment".into()));
    }
    let space = config.build_space()?;
    let length = space.interval_length()?;
    let spec = config.build_sampler(&space)?;
    let f_kind = config.campbell_f.unwrap_or(CampbellF::One);
    let scale = config.campbell_c.unwrap_or(1.0);
    if !(scale > 0.0) {
        return Err(HarnessError::Config("campbell_c must be positive".into()));
    }
    let f = |x: f64, cardinality: usize| -> f64 {
        match f_kind {
            CampbellF::One => 1.0,
            CampbellF::Linear => x / length,
            CampbellF::Damped => x / length * (-(cardinality as f64) / scale).exp(),
        }
    };
    let analytic = match (&config.sampler, f_kind) {
        (SamplerKind::Poisson, CampbellF::One) => config.rate,
        // lambda * int_0^T (s/T) dU(s) = lambda / 2 for uniform locations.
        (SamplerKind::Poisson, CampbellF::Linear) => config.rate.map(|r| r / 2.0),
        _ => None,
    };
    config
        .n_grid
        .iter()
        .enumerate()
        .map(|(e, &n)| {
            let mut stream =
                RngStream::new(config.master_seed, e as u64 * STREAMS_PER_GRID_ENTRY);
            let mut g_values = Vec::with_capacity(n);
            for _ in 0..n {
                let mu = spec.sample(&mut stream)?;
                let card = mu.cardinality();
                let g: f64 = mu
                    .points()
                    .iter()
                    .map(|p| f(p.as_scalar().expect("interval point"), card))
                    .sum();
                g_values.push(g);
            }
            let (estimate, stderr) = stats::mean_and_stderr(&g_values);
            Ok(CampbellRow { n, estimate, stderr, analytic })
        })
        .collect()
}

pub fn run_campbell_to_dir(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<CampbellRow>> {
    let rows = run_campbell(config)?;
    fs::create_dir_all(out_dir)?;
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["n", "estimate", "stderr", "analytic"])?;
        for r in &rows {
            w.write_record([
                r.n.to_string(),
                crate::rows::fmt_f64(r.estimate),
                crate::rows::fmt_f64(r.stderr),
                r.analytic.map(crate::rows::fmt_f64).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
    }
    fs::write(out_dir.join("campbell.csv"), buf)?;
    let meta = json!({ "config": config });
    fs::write(out_dir.join("meta.json"), serde_json::to_vec_pretty(&meta)?)?;
    Ok(rows)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundsRow {
    pub n: usize,
    pub upper_rate: f64,
    pub upper_rate_interval: f64,
    pub upper_rate_poisson: f64,
    pub lower_rate: f64,
    pub lower_rate_valid: bool,
}

/// Evaluate every rate shape over the grid, without sampling anything.
pub fn run_bounds_table(config: &ExperimentConfig) -> Result<Vec<BoundsRow>> {
    config.validate()?;
    let space = config.build_space()?;
    let params = config.rate_params(&space);
    let rows = config
        .n_grid
        .iter()
        .map(|&n| {
            let lower = match poisson_rate_of(config) {
                Some(rate) => bounds::lower_rate_poisson(n as u64, &params, rate),
                None => Err(ppwass::Error::EmptySupport("no count pmf available".into())),
            };
            let (lower_rate, lower_rate_valid) = match lower {
                Ok(lr) => (lr.wp, lr.valid),
                Err(_) => (f64::NAN, false),
            };
            BoundsRow {
                n,
                upper_rate: bounds::upper_rate(n as u64, &params).unwrap_or(f64::NAN),
                upper_rate_interval: bounds::upper_rate_interval(n as u64, &params)
                    .unwrap_or(f64::NAN),
                upper_rate_poisson: bounds::upper_rate_poisson(
                    n as u64,
                    params.dim_m,
                    params.kappa,
                    params.p,
                    config.chi(),
                )
                .unwrap_or(f64::NAN),
                lower_rate,
                lower_rate_valid,
            }
        })
        .collect();
    Ok(rows)
}

pub fn run_bounds_table_to_dir(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<BoundsRow>> {
    let rows = run_bounds_table(config)?;
    fs::create_dir_all(out_dir)?;
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record([
            "n",
            "upper_rate",
            "upper_rate_interval",
            "upper_rate_poisson",
            "lower_rate",
            "lower_rate_valid",
        ])?;
        for r in &rows {
            w.write_record([
                r.n.to_string(),
                crate::rows::fmt_f64(r.upper_rate),
                crate::rows::fmt_f64(r.upper_rate_interval),
                crate::rows::fmt_f64(r.upper_rate_poisson),
                crate::rows::fmt_f64(r.lower_rate),
                r.lower_rate_valid.to_string(),
            ])?;
        }
        w.flush()?;
    }
    fs::write(out_dir.join("bounds.csv"), buf)?;
    Ok(rows)
}

/// Dispatch a config to its experiment runner, writing artifacts.
pub fn run_to_dir(config: &ExperimentConfig, out_dir: &Path, threads: usize) -> Result<()> {
    with_threads(threads, || match config.experiment {
        ExperimentKind::Convergence => run_convergence_to_dir(config, out_dir).map(|_| ()),
        ExperimentKind::Concentration => run_concentration_to_dir(config, out_dir).map(|_| ()),
        ExperimentKind::Campbell => run_campbell_to_dir(config, out_dir).map(|_| ()),
        ExperimentKind::BoundsTable => run_bounds_table_to_dir(config, out_dir).map(|_| ()),
    })
}
