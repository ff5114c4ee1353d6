//! Command-line front end: distances, estimators, sample-size
//! certificates, tail evaluation, Monte Carlo experiments, and the full
//! verification grid, all with machine-readable output.
//!
//! Exit codes: 0 success (all verdicts pass), 1 verification failure,
//! 2 usage or config error.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use distlearn::bounds::{self, BoundRequest, HellingerTier};
use distlearn::dist::{DistSpec, Distribution, FamilyName, FamilyParams, FamilySpec, SampleSet};
use distlearn::error::Error;
use distlearn::estimators::EstimatorKind;
use distlearn::harness::{self, ExperimentConfig};
use distlearn::metrics::{self, MetricKind};
use distlearn::verify::{self, Scale};

#[derive(Parser)]
#[command(
    name = "distlearn",
    version,
    about = "Distances, estimators, sample-size certificates, and seeded Monte Carlo \
             verification for discrete distributions on [k]"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a distance between two distributions (or all of them).
    Distance(DistanceArgs),
    /// Apply an estimator to samples and print the estimated pmf.
    Estimate(EstimateArgs),
    /// Print the sample-size certificate for a metric at (k, eps, delta).
    #[command(name = "sample-size")]
    SampleSize(SampleSizeArgs),
    /// Evaluate a tail bound formula at explicit arguments.
    Tail(TailArgs),
    /// Run a seeded Monte Carlo experiment and print its report.
    Simulate(SimulateArgs),
    /// Run the whole verification grid and print one row per criterion.
    #[command(name = "verify-all")]
    VerifyAll(VerifyAllArgs),
}

#[derive(Args)]
struct DistanceArgs {
    /// First distribution, as JSON ({"pmf": [...]} or a family spec).
    #[arg(long)]
    p: String,
    /// Second distribution, as JSON.
    #[arg(long)]
    q: String,
    /// tv, hellinger, kl, chi2, kolmogorov, l2, linf, or all.
    #[arg(long)]
    metric: String,
}

#[derive(Args)]
struct EstimateArgs {
    /// Explicit samples as a JSON array of 1-based values, e.g. [1,1,2].
    #[arg(long, conflicts_with_all = ["dist", "n"])]
    samples: Option<String>,
    /// Domain size (required with --samples).
    #[arg(long)]
    k: Option<usize>,
    /// Distribution to sample from, as JSON (used with --n/--seed).
    #[arg(long)]
    dist: Option<String>,
    /// Number of samples to draw from --dist.
    #[arg(long)]
    n: Option<u64>,
    /// Sampling seed (with --dist); defaults to DISTLEARN_SEED or 42.
    #[arg(long)]
    seed: Option<u64>,
    /// "empirical" or "add-constant:<c>".
    #[arg(long, default_value = "empirical")]
    estimator: String,
}

#[derive(Args)]
struct SampleSizeArgs {
    /// tv, tv-union, hellinger, kl, kolmogorov, linf, l2.
    #[arg(long)]
    metric: String,
    /// Domain size (needed by tv, tv-union, hellinger, kl).
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    delta: f64,
    /// Hellinger tier: easy, intermediate, optimal (default optimal).
    #[arg(long)]
    tier: Option<String>,
}

#[derive(Args)]
struct TailArgs {
    /// dkw, hoeffding-subset, mcdiarmid-tv, agrawal.
    #[arg(long)]
    bound: String,
    #[arg(long)]
    n: u64,
    /// Threshold (the KL level alpha for agrawal).
    #[arg(long)]
    eps: f64,
    /// Domain size (agrawal only).
    #[arg(long)]
    k: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    /// expectation, failure-rate, tail-curve, kl-unbounded.
    #[arg(long)]
    mode: String,
    /// Read the experiment config from a JSON file instead of flags.
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// Explicit pmf as JSON, e.g. [0.5,0.5].
    #[arg(long)]
    pmf: Option<String>,
    /// Family name: uniform, point_mass, two_point, zipf, dirichlet.
    #[arg(long)]
    family: Option<String>,
    /// Domain size for --family.
    #[arg(long)]
    k: Option<usize>,
    /// point_mass location (1-based).
    #[arg(long)]
    index: Option<usize>,
    /// two_point mass on element 1.
    #[arg(long)]
    bias: Option<f64>,
    /// zipf decay exponent.
    #[arg(long)]
    exponent: Option<f64>,
    /// dirichlet concentration.
    #[arg(long)]
    concentration: Option<f64>,
    /// Seed for dirichlet family generation.
    #[arg(long)]
    dist_seed: Option<u64>,
    /// "empirical" or "add-constant:<c>".
    #[arg(long, default_value = "empirical")]
    estimator: String,
    /// Metric to aggregate.
    #[arg(long)]
    metric: Option<String>,
    /// Samples per trial.
    #[arg(long)]
    n: Option<u64>,
    /// Derive n from the sample-size certificate at (metric, k, eps, delta).
    #[arg(long, conflicts_with = "n")]
    auto_n: bool,
    /// Hellinger tier for --auto-n.
    #[arg(long)]
    tier: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    /// Base seed; defaults to DISTLEARN_SEED or 42.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Comma-separated increasing thresholds for tail curves.
    #[arg(long)]
    thresholds: Option<String>,
    /// Mass of the rare element in the kl-unbounded demo.
    #[arg(long)]
    tiny_mass: Option<f64>,
    /// Emit CSV instead of JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct VerifyAllArgs {
    /// smoke (reduced trials) or full.
    #[arg(long, default_value = "smoke")]
    scale: String,
    /// Base seed; defaults to DISTLEARN_SEED or 42.
    #[arg(long)]
    seed: Option<u64>,
    /// Pin the rayon thread-pool size.
    #[arg(long)]
    threads: Option<usize>,
    /// Emit CSV instead of JSON.
    #[arg(long)]
    csv: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Distance(args) => cmd_distance(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::SampleSize(args) => cmd_sample_size(args),
        Command::Tail(args) => cmd_tail(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::VerifyAll(args) => cmd_verify_all(args),
    }
}

fn default_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("DISTLEARN_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(42)
}

fn parse_dist(json: &str) -> Result<Distribution, String> {
    let spec: DistSpec =
        serde_json::from_str(json).map_err(|e| format!("bad distribution JSON: {e}"))?;
    spec.build().map_err(|e| e.to_string())
}

fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("valid JSON"));
}

fn to_json<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("serializable report")
}

/// JSON value for a possibly-infinite nonnegative real.
fn real_value(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!("inf")
    }
}

fn cmd_distance(args: DistanceArgs) -> Result<ExitCode, String> {
    let p = parse_dist(&args.p)?;
    let q = parse_dist(&args.q)?;
    let mut out = Map::new();
    if args.metric == "all" {
        for kind in MetricKind::ALL {
            let v = kind.evaluate(&p, &q).map_err(|e| e.to_string())?;
            out.insert(kind.as_str().to_string(), real_value(v.value()));
        }
        let report = metrics::inequality_report(&p, &q).map_err(|e| e.to_string())?;
        out.insert("inequalities".into(), to_json(&report));
    } else {
        let kind: MetricKind = args.metric.parse().map_err(|e: Error| e.to_string())?;
        let v = kind.evaluate(&p, &q).map_err(|e| e.to_string())?;
        out.insert(kind.as_str().to_string(), real_value(v.value()));
    }
    print_json(&Value::Object(out));
    Ok(ExitCode::SUCCESS)
}

fn cmd_estimate(args: EstimateArgs) -> Result<ExitCode, String> {
    let estimator: EstimatorKind = args.estimator.parse().map_err(|e: Error| e.to_string())?;
    let (sample_set, k, seed) = if let Some(samples_json) = &args.samples {
        let samples: Vec<u32> =
            serde_json::from_str(samples_json).map_err(|e| format!("bad samples JSON: {e}"))?;
        let k = args.k.ok_or("--samples needs --k")?;
        let s = SampleSet::from_samples(samples, k, 0).map_err(|e| e.to_string())?;
        (s, k, None)
    } else {
        let dist_json = args.dist.as_ref().ok_or("need --samples or --dist")?;
        let n = args.n.ok_or("--dist needs --n")?;
        if n == 0 {
            return Err("n must be >= 1".into());
        }
        let p = parse_dist(dist_json)?;
        let seed = default_seed(args.seed);
        let k = args.k.unwrap_or(p.k());
        (p.sample(n, seed), k, Some(seed))
    };
    let est = estimator
        .estimate(&sample_set, k)
        .map_err(|e| e.to_string())?;
    let mut out = Map::new();
    out.insert("estimator".into(), json!(estimator.to_string()));
    out.insert("k".into(), json!(k));
    out.insert("n".into(), json!(sample_set.n()));
    if let Some(seed) = seed {
        out.insert("seed".into(), json!(seed));
    }
    out.insert("pmf".into(), json!(est.pmf()));
    print_json(&Value::Object(out));
    Ok(ExitCode::SUCCESS)
}

fn parse_tier(tier: &Option<String>) -> Result<Option<HellingerTier>, String> {
    tier.as_ref()
        .map(|t| t.parse().map_err(|e: Error| e.to_string()))
        .transpose()
}

fn cmd_sample_size(args: SampleSizeArgs) -> Result<ExitCode, String> {
    let tier = parse_tier(&args.tier)?;
    if tier.is_some() && args.metric != "hellinger" {
        return Err("--tier only applies to --metric hellinger".into());
    }
    let cert = if args.metric == "tv-union" {
        let k = args.k.ok_or("tv-union needs --k")?;
        bounds::sample_size_tv_union(k, args.eps, args.delta).map_err(|e| e.to_string())?
    } else {
        let metric: MetricKind = args.metric.parse().map_err(|e: Error| e.to_string())?;
        bounds::sample_size(&BoundRequest {
            metric,
            k: args.k,
            eps: args.eps,
            delta: args.delta,
            tier,
        })
        .map_err(|e| e.to_string())?
    };
    print_json(&to_json(&cert));
    Ok(ExitCode::SUCCESS)
}

fn cmd_tail(args: TailArgs) -> Result<ExitCode, String> {
    let value = match args.bound.as_str() {
        "dkw" => bounds::tail_dkw(args.n, args.eps),
        "hoeffding-subset" => bounds::tail_hoeffding_subset(args.n, args.eps),
        "mcdiarmid-tv" => bounds::tail_mcdiarmid_tv(args.n, args.eps),
        "agrawal" => {
            let k = args.k.ok_or("agrawal needs --k")?;
            bounds::tail_agrawal(args.n, k, args.eps)
        }
        other => {
            return Err(format!(
                "unknown bound {other:?} (expected dkw, hoeffding-subset, mcdiarmid-tv, agrawal)"
            ))
        }
    }
    .map_err(|e| e.to_string())?;
    let mut out = Map::new();
    out.insert("bound".into(), json!(args.bound));
    out.insert("n".into(), json!(args.n));
    out.insert("eps".into(), json!(args.eps));
    if let Some(k) = args.k {
        out.insert("k".into(), json!(k));
    }
    out.insert("value".into(), json!(value));
    print_json(&Value::Object(out));
    Ok(ExitCode::SUCCESS)
}

fn parse_family_spec(args: &SimulateArgs) -> Result<DistSpec, String> {
    if let Some(pmf_json) = &args.pmf {
        let pmf: Vec<f64> =
            serde_json::from_str(pmf_json).map_err(|e| format!("bad pmf JSON: {e}"))?;
        return Ok(DistSpec::Pmf { pmf });
    }
    let family = args.family.as_ref().ok_or("need --pmf or --family")?;
    let k = args.k.ok_or("--family needs --k")?;
    let family: FamilyName =
        serde_json::from_value(json!(family)).map_err(|_| format!("unknown family {family:?}"))?;
    Ok(DistSpec::Family(FamilySpec {
        family,
        k,
        params: FamilyParams {
            index: args.index,
            bias: args.bias,
            exponent: args.exponent,
            concentration: args.concentration,
        },
        seed: args.dist_seed,
    }))
}

fn parse_thresholds(spec: &str) -> Result<Vec<f64>, String> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad threshold {s:?}"))
        })
        .collect()
}

fn build_config(args: &SimulateArgs) -> Result<ExperimentConfig, String> {
    if let Some(path) = &args.config {
        if args.pmf.is_some() || args.family.is_some() || args.metric.is_some() {
            return Err("--config conflicts with inline distribution/metric flags".into());
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        return serde_json::from_str(&text).map_err(|e| format!("bad config JSON: {e}"));
    }

    let dist = parse_family_spec(args)?;
    let metric: MetricKind = args
        .metric
        .as_ref()
        .ok_or("need --metric")?
        .parse()
        .map_err(|e: Error| e.to_string())?;
    let estimator: EstimatorKind = args.estimator.parse().map_err(|e: Error| e.to_string())?;

    let n = if args.auto_n {
        let eps = args.eps.ok_or("--auto-n needs --eps")?;
        let delta = args.delta.ok_or("--auto-n needs --delta")?;
        let k = dist.build().map_err(|e| e.to_string())?.k() as u64;
        bounds::sample_size(&BoundRequest {
            metric,
            k: Some(k),
            eps,
            delta,
            tier: parse_tier(&args.tier)?,
        })
        .map_err(|e| e.to_string())?
        .n
    } else {
        args.n.ok_or("need --n or --auto-n")?
    };

    Ok(ExperimentConfig {
        dist,
        estimator,
        metric,
        n,
        trials: args.trials.unwrap_or(harness::DEFAULT_TRIALS),
        base_seed: default_seed(args.seed),
        thresholds: args
            .thresholds
            .as_ref()
            .map(|t| parse_thresholds(t))
            .transpose()?,
        eps: args.eps,
        delta: args.delta,
    })
}

fn exit_for_verdict(passed: bool) -> ExitCode {
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

/// Flattens a JSON object into one CSV record (arrays serialized
/// compactly, nulls empty).
fn csv_from_object(value: &Value) -> Result<String, String> {
    let obj = value.as_object().ok_or("expected a JSON object")?;
    let mut wtr = csv::Writer::from_writer(vec![]);
    let headers: Vec<&String> = obj.keys().collect();
    wtr.write_record(&headers).map_err(|e| e.to_string())?;
    let row: Vec<String> = obj.values().map(csv_cell).collect();
    wtr.write_record(&row).map_err(|e| e.to_string())?;
    String::from_utf8(wtr.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode, String> {
    if args.mode == "kl-unbounded" {
        let tiny = args.tiny_mass.ok_or("kl-unbounded needs --tiny-mass")?;
        let estimator: EstimatorKind = args.estimator.parse().map_err(|e: Error| e.to_string())?;
        let report = harness::run_kl_unbounded_demo(
            args.k.unwrap_or(2) as u64,
            args.n.ok_or("kl-unbounded needs --n")?,
            tiny,
            args.trials.unwrap_or(harness::DEFAULT_TRIALS),
            default_seed(args.seed),
            estimator,
        )
        .map_err(|e| e.to_string())?;
        let value = to_json(&report);
        if args.csv {
            print!("{}", csv_from_object(&value)?);
        } else {
            print_json(&value);
        }
        return Ok(ExitCode::SUCCESS);
    }

    let cfg = build_config(&args)?;
    match args.mode.as_str() {
        "expectation" => {
            let report = harness::run_expectation(&cfg).map_err(|e| e.to_string())?;
            let value = to_json(&report);
            if args.csv {
                print!("{}", csv_from_object(&value)?);
            } else {
                print_json(&value);
            }
            Ok(exit_for_verdict(report.passed()))
        }
        "failure-rate" => {
            let report = harness::run_failure_rate(&cfg).map_err(|e| e.to_string())?;
            let value = to_json(&report);
            if args.csv {
                print!("{}", csv_from_object(&value)?);
            } else {
                print_json(&value);
            }
            Ok(exit_for_verdict(report.passed()))
        }
        "tail-curve" => {
            let report = harness::run_tail_curve(&cfg).map_err(|e| e.to_string())?;
            if args.csv {
                let mut wtr = csv::Writer::from_writer(vec![]);
                wtr.write_record([
                    "threshold",
                    "empirical_tail",
                    "theoretical_tail",
                    "asserted",
                    "holds",
                ])
                .map_err(|e| e.to_string())?;
                for pt in &report.points {
                    wtr.write_record(&[
                        pt.threshold.to_string(),
                        pt.empirical_tail.to_string(),
                        pt.theoretical_tail
                            .map(|v| v.to_string())
                            .unwrap_or_default(),
                        pt.asserted.to_string(),
                        pt.holds.map(|h| h.to_string()).unwrap_or_default(),
                    ])
                    .map_err(|e| e.to_string())?;
                }
                let bytes = wtr.into_inner().map_err(|e| e.to_string())?;
                print!("{}", String::from_utf8(bytes).map_err(|e| e.to_string())?);
            } else {
                print_json(&to_json(&report));
            }
            Ok(exit_for_verdict(report.passed()))
        }
        other => Err(format!(
            "unknown mode {other:?} (expected expectation, failure-rate, tail-curve, kl-unbounded)"
        )),
    }
}

fn cmd_verify_all(args: VerifyAllArgs) -> Result<ExitCode, String> {
    let scale: Scale = args.scale.parse().map_err(|e: Error| e.to_string())?;
    let seed = default_seed(args.seed);
    let rows = match args.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?
            .install(|| verify::run_all(scale, seed)),
        None => verify::run_all(scale, seed),
    };

    if args.csv {
        let mut wtr = csv::Writer::from_writer(vec![]);
        wtr.write_record(["id", "name", "pass", "detail"])
            .map_err(|e| e.to_string())?;
        for row in &rows {
            wtr.write_record(&[
                row.id.to_string(),
                row.name.clone(),
                row.pass.to_string(),
                row.detail.clone(),
            ])
            .map_err(|e| e.to_string())?;
        }
        let bytes = wtr.into_inner().map_err(|e| e.to_string())?;
        print!("{}", String::from_utf8(bytes).map_err(|e| e.to_string())?);
    } else {
        print_json(&to_json(&rows));
    }
    Ok(exit_for_verdict(rows.iter().all(|r| r.pass)))
}
