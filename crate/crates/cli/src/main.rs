use std::fs;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ppwass::bounds::{self, RateParams};
use ppwass::io::{read_law_jsonl, read_measures_jsonl, write_measures_jsonl, DatasetMeta};
use ppwass::{law, measure, GroundSpace, Intensity, RngStream, SamplerSpec, SamplerVariant};
use ppwass_cli::config::ExperimentConfig;
use ppwass_cli::fit::{fit_rate, Abscissa};
use ppwass_cli::rows::read_aggregate_csv;
use ppwass_cli::runner;

#[derive(Parser)]
#[command(
    name = "ppwass",
    about = "Distances, Wasserstein experiments and rate bounds for finite point processes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distance between counting measures, paired line by line from two JSONL files
    D1(D1Args),
    /// Order-p Wasserstein distance between two JSONL empirical laws
    Wp(WpArgs),
    /// Generate realizations of a point process into a JSONL dataset
    Sample(SampleArgs),
    /// Bound calculators
    Bounds(BoundsArgs),
    /// Run an experiment described by a JSON config
    Run(RunArgs),
    /// Fit the rate exponent of an aggregate CSV
    Fit(FitArgs),
}

#[derive(Args)]
struct SpaceArgs {
    /// Ground space shape
    #[arg(long, value_enum, default_value_t = SpaceChoice::Interval)]
    space: SpaceChoice,
    /// Interval length T
    #[arg(long)]
    length: Option<f64>,
    /// Box dimension
    #[arg(long)]
    dim: Option<usize>,
    /// Box side length
    #[arg(long)]
    side: Option<f64>,
    /// CSV square cost matrix for finite metric spaces
    #[arg(long)]
    metric_csv: Option<PathBuf>,
    /// Anchor index for finite metric spaces
    #[arg(long, default_value_t = 0)]
    anchor_index: usize,
    /// Augmentation distance alpha
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceChoice {
    Interval,
    Box,
    FiniteMetric,
}

impl SpaceArgs {
    fn build(&self) -> anyhow::Result<GroundSpace> {
        let space = match self.space {
            SpaceChoice::Interval => {
                let length = self.length.context("--length is required for intervals")?;
                GroundSpace::interval(length, self.alpha)?
            }
            SpaceChoice::Box => {
                let dim = self.dim.context("--dim is required for boxes")?;
                let side = self.side.context("--side is required for boxes")?;
                GroundSpace::boxed(dim, side, self.alpha)?
            }
            SpaceChoice::FiniteMetric => {
                let path = self
                    .metric_csv
                    .as_ref()
                    .context("--metric-csv is required for finite metric spaces")?;
                GroundSpace::finite_metric_from_csv(path, self.alpha, self.anchor_index)?
            }
        };
        Ok(space)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum D1Method {
    Exact,
    Sorted,
    Cdf,
    All,
}

#[derive(Args)]
struct D1Args {
    #[command(flatten)]
    space: SpaceArgs,
    /// Evaluation route
    #[arg(long, value_enum, default_value_t = D1Method::Exact)]
    method: D1Method,
    /// First JSONL measure file
    a: PathBuf,
    /// Second JSONL measure file
    b: PathBuf,
}

#[derive(Args)]
struct WpArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Wasserstein order
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// First JSONL law file
    a: PathBuf,
    /// Second JSONL law file
    b: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// poisson | inhomogeneous | hawkes
    #[arg(long)]
    sampler: String,
    /// Poisson expected total mass
    #[arg(long)]
    rate: Option<f64>,
    /// Intensity bound for thinning
    #[arg(long)]
    lambda_max: Option<f64>,
    /// Intensity: "constant:level" | "linear:intercept,slope" | "sine:base,amplitude,period"
    #[arg(long)]
    intensity: Option<String>,
    /// Hawkes baseline rate
    #[arg(long)]
    baseline: Option<f64>,
    /// Hawkes branching ratio, < 1
    #[arg(long)]
    branching: Option<f64>,
    /// Hawkes kernel decay
    #[arg(long)]
    decay: Option<f64>,
    /// Number of realizations
    #[arg(long)]
    count: usize,
    /// Master seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stream index within the seed
    #[arg(long, default_value_t = 0)]
    stream: u64,
    /// Output JSONL path; metadata goes to `<path>.meta.json`
    #[arg(long)]
    out_file: PathBuf,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(subcommand)]
    command: BoundsCommand,
}

#[derive(Subcommand)]
enum BoundsCommand {
    /// Print one JSON record per computable formula
    Eval(BoundsEvalArgs),
}

#[derive(Args)]
struct BoundsEvalArgs {
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 0.1)]
    kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    dim_m: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_tail: f64,
    #[arg(long, default_value_t = 1.0)]
    k1: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 2.0)]
    k2: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    diam: f64,
    #[arg(long, default_value_t = 0.5)]
    chi: f64,
    /// Deviation for the concentration bound and radius for covering_lower
    #[arg(long)]
    eps: Option<f64>,
    /// Cardinality for covering_lower / covering_bound_nm
    #[arg(long)]
    m: Option<u64>,
    /// Ground-space covering number feeding covering_bound_nm
    #[arg(long)]
    m_s: Option<u64>,
    /// Target accuracy for min_sample_size
    #[arg(long)]
    target_eps: Option<f64>,
    /// Poisson total mass for the lower-rate fast path
    #[arg(long)]
    poisson_rate: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config
    config: PathBuf,
    /// Output directory (overrides the config's out_dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = library default)
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct FitArgs {
    /// aggregate.csv produced by a convergence run
    aggregate: PathBuf,
    /// sqrt-log-n | sqrt-logn-loglogn
    #[arg(long, default_value = "sqrt-logn-loglogn")]
    abscissa: String,
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::D1(args) => cmd_d1(args),
        Command::Wp(args) => cmd_wp(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Bounds(args) => match args.command {
            BoundsCommand::Eval(eval) => cmd_bounds_eval(eval),
        },
        Command::Run(args) => cmd_run(args),
        Command::Fit(args) => cmd_fit(args),
    }
}

fn read_measures(path: &PathBuf, space: &GroundSpace) -> anyhow::Result<Vec<measure::CountingMeasure>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_measures_jsonl(&mut BufReader::new(file), space)?)
}

fn cmd_d1(args: D1Args) -> anyhow::Result<()> {
    let space = args.space.build()?;
    let left = read_measures(&args.a, &space)?;
    let right = read_measures(&args.b, &space)?;
    if left.len() != right.len() {
        bail!(
            "{} has {} measures but {} has {}; d1 pairs them line by line",
            args.a.display(),
            left.len(),
            args.b.display(),
            right.len()
        );
    }
    for (idx, (a, b)) in left.iter().zip(right.iter()).enumerate() {
        let record = match args.method {
            D1Method::Exact => json!({ "line": idx, "d1": measure::d1(&space, a, b)? }),
            D1Method::Sorted => {
                json!({ "line": idx, "d1": measure::d1_sorted_1d(&space, a, b)? })
            }
            D1Method::Cdf => json!({ "line": idx, "d1": measure::d1_cdf_area(&space, a, b)? }),
            D1Method::All => json!({
                "line": idx,
                "d1": measure::d1(&space, a, b)?,
                "d1_sorted": measure::d1_sorted_1d(&space, a, b)?,
                "d1_cdf_area": measure::d1_cdf_area(&space, a, b)?,
                "cdf_area": measure::cdf_area(&space, a, b)?,
                "upper_bound": measure::d1_upper_bound(&space, a, b),
            }),
        };
        println!("{record}");
    }
    Ok(())
}

fn cmd_wp(args: WpArgs) -> anyhow::Result<()> {
    let space = args.space.build()?;
    let open = |path: &PathBuf| -> anyhow::Result<ppwass::EmpiricalLaw> {
        let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        Ok(read_law_jsonl(&mut BufReader::new(file), &space)?)
    };
    let a = open(&args.a)?;
    let b = open(&args.b)?;
    let equal_route = a.len() == b.len() && a.is_uniform() && b.is_uniform();
    let value = if equal_route {
        law::wp_equal(&space, &a, &b, args.p)?
    } else {
        law::wp_general(&space, &a, &b, args.p)?
    };
    let record = json!({
        "p": args.p,
        "mode": if equal_route { "equal" } else { "general" },
        "n": a.len(),
        "N": b.len(),
        "seed": serde_json::Value::Null,
        "value": value,
    });
    println!("{record}");
    Ok(())
}

fn parse_intensity(text: &str) -> anyhow::Result<Intensity> {
    let (kind, params) = text.split_once(':').unwrap_or((text, ""));
    let values: Vec<f64> = if params.is_empty() {
        Vec::new()
    } else {
        params
            .split(',')
            .map(|tok| tok.trim().parse::<f64>().map_err(|e| anyhow::anyhow!("{e}: {tok:?}")))
            .collect::<anyhow::Result<_>>()?
    };
    match (kind, values.as_slice()) {
        ("constant", [level]) => Ok(Intensity::Constant { level: *level }),
        ("linear", [intercept, slope]) => Ok(Intensity::Linear {
            intercept: *intercept,
            slope: *slope,
        }),
        ("sine", [base, amplitude, period]) => Ok(Intensity::SineBump {
            base: *base,
            amplitude: *amplitude,
            period: *period,
        }),
        _ => bail!(
            "bad intensity {text:?}; use constant:level, linear:intercept,slope or sine:base,amplitude,period"
        ),
    }
}

fn cmd_sample(args: SampleArgs) -> anyhow::Result<()> {
    let space = args.space.build()?;
    let variant = match args.sampler.as_str() {
        "poisson" => SamplerVariant::HomogeneousPoisson {
            rate: args.rate.context("--rate is required for poisson")?,
        },
        "inhomogeneous" => SamplerVariant::InhomogeneousPoisson {
            lambda_max: args
                .lambda_max
                .context("--lambda-max is required for inhomogeneous")?,
            intensity: parse_intensity(
                args.intensity
                    .as_deref()
                    .context("--intensity is required for inhomogeneous")?,
            )?,
        },
        "hawkes" => SamplerVariant::HawkesExp {
            baseline: args.baseline.context("--baseline is required for hawkes")?,
            branching: args.branching.context("--branching is required for hawkes")?,
            decay: args.decay.context("--decay is required for hawkes")?,
        },
        other => bail!("unknown sampler {other:?}; use poisson, inhomogeneous or hawkes"),
    };
    let spec = SamplerSpec::new(variant, space.clone())?;
    let mut stream = RngStream::new(args.seed, args.stream);
    let measures = (0..args.count)
        .map(|_| spec.sample(&mut stream))
        .collect::<ppwass::Result<Vec<_>>>()?;
    let mut buf = Vec::new();
    write_measures_jsonl(&mut buf, &space, &measures)?;
    fs::write(&args.out_file, buf).with_context(|| format!("writing {}", args.out_file.display()))?;
    let meta = DatasetMeta {
        spec,
        master_seed: args.seed,
        count: args.count,
    };
    let meta_path = args.out_file.with_extension("meta.json");
    fs::write(&meta_path, serde_json::to_vec_pretty(&meta)?)?;
    eprintln!(
        "wrote {} measures to {} (metadata: {})",
        args.count,
        args.out_file.display(),
        meta_path.display()
    );
    Ok(())
}

fn cmd_bounds_eval(args: BoundsEvalArgs) -> anyhow::Result<()> {
    let params = RateParams {
        p: args.p,
        kappa: args.kappa,
        dim_m: args.dim_m,
        lambda_tail: args.lambda_tail,
        k1: args.k1,
        sigma: args.sigma,
        k2: args.k2,
        k3: None,
        alpha: args.alpha,
        diam: args.diam,
    };
    const SHAPE_NOTE: &str = "rate shape; unknown constant taken as C = 1";
    let mut records = vec![
        formula_record("upper_rate", bounds::upper_rate(args.n, &params), SHAPE_NOTE),
        formula_record(
            "upper_rate_interval",
            bounds::upper_rate_interval(args.n, &params),
            SHAPE_NOTE,
        ),
        formula_record(
            "upper_rate_poisson",
            bounds::upper_rate_poisson(args.n, args.dim_m, args.kappa, args.p, args.chi),
            SHAPE_NOTE,
        ),
        formula_record(
            "validity_threshold",
            bounds::validity_threshold(&params, args.n).map(|b| if b { 1.0 } else { 0.0 }),
            "1 = lower bound valid at this n",
        ),
    ];
    if let Some(rate) = args.poisson_rate {
        records.push(formula_record(
            "lower_rate",
            bounds::lower_rate_poisson(args.n, &params, rate).map(|lr| lr.wp),
            SHAPE_NOTE,
        ));
    }
    if let (Some(m), Some(m_s)) = (args.m, args.m_s) {
        records.push(formula_record(
            "covering_bound_nm",
            bounds::covering_bound_nm(m, m_s),
            "upper bound on the m-point stratum covering number",
        ));
    }
    if let (Some(eps), Some(m)) = (args.eps, args.m) {
        records.push(formula_record(
            "covering_lower",
            bounds::covering_lower(eps, m, &params),
            "covering lower bound within its radius window",
        ));
    }
    if let Some(eps) = args.eps {
        records.push(formula_record(
            "concentration_bound",
            bounds::concentration_bound(eps, args.n, &params),
            "one-sided; two-sided value is twice this, capped at 1",
        ));
    }
    if let Some(target) = args.target_eps {
        records.push(formula_record(
            "min_sample_size",
            bounds::min_sample_size(target, &params).map(|n| n as f64),
            "shape-level rule; unknown constant taken as C = 1",
        ));
    }
    for record in records {
        println!("{record}");
    }
    Ok(())
}

fn formula_record(name: &str, value: ppwass::Result<f64>, note: &str) -> serde_json::Value {
    match value {
        Ok(v) => json!({ "formula": name, "value": v, "note": note }),
        Err(e) => json!({ "formula": name, "value": serde_json::Value::Null, "error": e.to_string() }),
    }
}

fn cmd_run(args: RunArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    let out_dir = args
        .out
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    runner::run_to_dir(&config, &out_dir, args.threads)?;
    eprintln!("experiment artifacts written to {}", out_dir.display());
    Ok(())
}

fn cmd_fit(args: FitArgs) -> anyhow::Result<()> {
    let abscissa: Abscissa = args.abscissa.parse()?;
    let rows = read_aggregate_csv(&args.aggregate)?;
    let fit = fit_rate(&rows, abscissa)?;
    let record = json!({
        "abscissa": abscissa.name(),
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "rows_used": fit.rows_used,
        "rows_dropped": fit.rows_dropped,
    });
    println!("{record}");
    Ok(())
}
