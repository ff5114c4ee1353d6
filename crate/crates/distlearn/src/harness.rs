//! Seeded Monte Carlo experiments comparing estimator behavior against the
//! theoretical bounds: expectation runs, failure-rate runs, tail curves,
//! and the KL-unboundedness demonstration.
//!
//! Determinism contract: the per-trial seed is a pure function of
//! `(base_seed, trial_index)` (see [`per_trial_seed`]), trials are
//! independent, and aggregation happens in trial-index order with
//! compensated sums. Reports are therefore bitwise identical across thread
//! counts for a fixed config.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::bounds;
use crate::dist::{DistSpec, Distribution};
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::metrics::{self, MetricKind};

/// Default trial count giving confidence intervals tight enough for the
/// desk-scale verdicts.
pub const DEFAULT_TRIALS: u64 = 10_000;

/// Two-sided z score for the 95% normal-approximation intervals.
const Z95: f64 = 1.959963984540054;

/// Derives the seed for one trial from the experiment base seed.
///
/// This is the splitmix64 finalizer applied to
/// `base_seed + (trial_index + 1) * 0x9E3779B97F4A7C15`, fixed so that
/// recorded reports survive refactors and scheduling changes alike.
pub fn per_trial_seed(base_seed: u64, trial_index: u64) -> u64 {
    let mut z = base_seed.wrapping_add(
        trial_index
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15),
    );
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One-sided upper confidence limit for a binomial proportion
/// (Clopper-Pearson, exact). `confidence` is the one-sided level, e.g.
/// 0.95.
pub fn clopper_pearson_upper(failures: u64, trials: u64, confidence: f64) -> f64 {
    assert!(trials >= 1, "need at least one trial");
    assert!((0.0..1.0).contains(&(1.0 - confidence)));
    if failures >= trials {
        return 1.0;
    }
    Beta::new((failures + 1) as f64, (trials - failures) as f64)
        .expect("valid beta parameters")
        .inverse_cdf(confidence)
}

/// Two-sided 95% Wilson score interval for a binomial proportion.
pub fn wilson_ci95(successes: u64, trials: u64) -> [f64; 2] {
    assert!(trials >= 1);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    [(center - half).max(0.0), (center + half).min(1.0)]
}

/// Compensated (Kahan) sum in slice order.
fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Declarative description of one Monte Carlo run.
///
/// `thresholds` is consumed by tail-curve runs; `eps`/`delta` by
/// failure-rate runs. Unknown JSON fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dist: DistSpec,
    #[serde(default = "default_estimator")]
    pub estimator: EstimatorKind,
    pub metric: MetricKind,
    pub n: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

fn default_estimator() -> EstimatorKind {
    EstimatorKind::Empirical
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

impl ExperimentConfig {
    fn validate_common(&self) -> Result<Distribution> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be >= 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if let EstimatorKind::AddConstant(c) = self.estimator {
            if !c.is_finite() || c <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "add-constant needs c > 0, got {c}"
                )));
            }
        }
        self.dist
            .build()
            .map_err(|e| Error::InvalidConfig(format!("dist: {e}")))
    }
}

/// Pass/fail verdict of a theoretical-bound comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }

    fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Statistical outcome of an expectation or failure-rate run.
///
/// Trials whose statistic is infinite are counted in `infinite_count` and
/// excluded from `mean`/`std_err`/`ci95`; they do count as exceedances in
/// failure-rate mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub mode: String,
    pub metric: MetricKind,
    /// Which statistic was aggregated (e.g. squared distances in
    /// expectation mode where the bound is on the square).
    pub statistic: String,
    pub estimator: String,
    pub k: u64,
    pub n: u64,
    pub trials: u64,
    pub base_seed: u64,
    pub mean: Option<f64>,
    pub std_err: Option<f64>,
    pub ci95: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub failure_rate: Option<f64>,
    pub failure_rate_upper: Option<f64>,
    pub theory: Option<f64>,
    pub verdict: Option<Verdict>,
    pub infinite_count: u64,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.verdict.map(Verdict::passed).unwrap_or(true)
    }
}

/// One row of a tail curve: empirical exceedance of a threshold next to
/// the theoretical tail value, when one applies.
///
/// `asserted` marks thresholds where the theoretical curve is an actual
/// guarantee (e.g. Agrawal requires `n >= (k-1)/alpha`; the intrinsic
/// total-variation tail requires the expectation term to fit under half
/// the threshold). Non-asserted rows may still show the formula value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCurvePoint {
    pub threshold: f64,
    pub empirical_tail: f64,
    pub theoretical_tail: Option<f64>,
    pub asserted: bool,
    pub holds: Option<bool>,
}

/// Outcome of a tail-curve run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCurveReport {
    pub mode: String,
    pub metric: MetricKind,
    pub statistic: String,
    pub estimator: String,
    pub k: u64,
    pub n: u64,
    pub trials: u64,
    pub base_seed: u64,
    pub points: Vec<TailCurvePoint>,
    pub verdict: Option<Verdict>,
}

impl TailCurveReport {
    pub fn passed(&self) -> bool {
        self.verdict.map(Verdict::passed).unwrap_or(true)
    }
}

/// Outcome of the KL-unboundedness demonstration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlUnboundedReport {
    pub mode: String,
    pub k: u64,
    pub n: u64,
    pub tiny_mass: f64,
    pub trials: u64,
    pub base_seed: u64,
    pub estimator: String,
    pub infinite_count: u64,
    pub infinite_fraction: f64,
    /// Exact probability that some support element goes unsampled, so that
    /// `kl(p || empirical)` is infinite: `(1-t)^n + t^n` for the two-point
    /// demo distribution.
    pub analytic_infinite_prob: f64,
}

/// Evaluates the per-trial statistic for one (mode, metric) pairing.
/// Returns `f64::INFINITY` for infinite divergences.
fn eval_statistic(metric: MetricKind, squared: bool, first: &Distribution, second: &Distribution) -> f64 {
    let msg = "metric evaluation on equal domains";
    match metric {
        MetricKind::Tv => metrics::total_variation(first, second).expect(msg),
        MetricKind::Hellinger => {
            if squared {
                metrics::hellinger_squared(first, second).expect(msg)
            } else {
                metrics::hellinger(first, second).expect(msg)
            }
        }
        MetricKind::Kl => metrics::kl_divergence(first, second).expect(msg).value(),
        MetricKind::ChiSquare => metrics::chi_square(first, second).expect(msg).value(),
        MetricKind::Kolmogorov => metrics::kolmogorov(first, second).expect(msg),
        MetricKind::L2 => {
            let v = metrics::l2(first, second).expect(msg);
            if squared {
                v * v
            } else {
                v
            }
        }
        MetricKind::Linf => metrics::l_inf(first, second).expect(msg),
    }
}

/// Runs the trials in parallel and returns per-trial statistics in trial
/// order. `estimate_first` swaps the argument order (used for the
/// `kl(empirical || p)` direction of tail curves).
fn trial_statistics(
    p: &Distribution,
    cfg: &ExperimentConfig,
    squared: bool,
    estimate_first: bool,
) -> Vec<f64> {
    let k = p.k();
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let s = p.sample(cfg.n, per_trial_seed(cfg.base_seed, t));
            let est = cfg
                .estimator
                .estimate(&s, k)
                .expect("estimator on in-domain samples");
            if estimate_first {
                eval_statistic(cfg.metric, squared, &est, p)
            } else {
                eval_statistic(cfg.metric, squared, p, &est)
            }
        })
        .collect()
}

struct Moments {
    mean: Option<f64>,
    std_err: Option<f64>,
    ci95: Option<[f64; 2]>,
    infinite_count: u64,
}

fn finite_moments(values: &[f64]) -> Moments {
    let infinite_count = values.iter().filter(|v| v.is_infinite()).count() as u64;
    let m = values.len() as u64 - infinite_count;
    if m == 0 {
        return Moments {
            mean: None,
            std_err: None,
            ci95: None,
            infinite_count,
        };
    }
    let finite = || values.iter().copied().filter(|v| v.is_finite());
    let mean = kahan_sum(finite()) / m as f64;
    let std_err = if m >= 2 {
        let ss = kahan_sum(finite().map(|v| (v - mean) * (v - mean)));
        Some((ss / (m - 1) as f64).sqrt() / (m as f64).sqrt())
    } else {
        None
    };
    let ci95 = std_err.map(|se| [mean - Z95 * se, mean + Z95 * se]);
    Moments {
        mean: Some(mean),
        std_err,
        ci95,
        infinite_count,
    }
}

/// Which statistic expectation mode aggregates for each metric: the plain
/// distance for tv/kolmogorov/linf, the square for hellinger and l2 (the
/// expectation bounds govern the squares), the truth-first divergence for
/// kl/chi2.
fn expectation_statistic_name(metric: MetricKind) -> &'static str {
    match metric {
        MetricKind::Tv => "tv",
        MetricKind::Hellinger => "hellinger_sq",
        MetricKind::Kl => "kl_truth_vs_estimate",
        MetricKind::ChiSquare => "chi2_truth_vs_estimate",
        MetricKind::Kolmogorov => "kolmogorov",
        MetricKind::L2 => "l2_sq",
        MetricKind::Linf => "linf",
    }
}

/// Estimates the mean of the metric statistic over seeded trials and
/// compares it to the matching expectation bound, when one exists for the
/// empirical estimator (tv, squared hellinger, squared l2).
pub fn run_expectation(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let p = cfg.validate_common()?;
    let squared = true;
    let values = trial_statistics(&p, cfg, squared, false);
    let moments = finite_moments(&values);

    let theory = if cfg.estimator.is_empirical() {
        match cfg.metric {
            MetricKind::Tv => Some(bounds::expected_tv_bound(p.k() as u64, cfg.n)),
            MetricKind::Hellinger => {
                Some(bounds::expected_hellinger_sq_bound(p.k() as u64, cfg.n))
            }
            MetricKind::L2 => Some(bounds::expected_l2_sq_exact(&p, cfg.n)),
            _ => None,
        }
    } else {
        None
    };
    let verdict = match (theory, moments.mean) {
        (Some(bound), Some(mean)) => Some(Verdict::from_bool(mean <= bound)),
        (Some(_), None) => Some(Verdict::Fail),
        (None, _) => None,
    };

    Ok(ExperimentReport {
        mode: "expectation".into(),
        metric: cfg.metric,
        statistic: expectation_statistic_name(cfg.metric).into(),
        estimator: cfg.estimator.to_string(),
        k: p.k() as u64,
        n: cfg.n,
        trials: cfg.trials,
        base_seed: cfg.base_seed,
        mean: moments.mean,
        std_err: moments.std_err,
        ci95: moments.ci95,
        eps: None,
        delta: None,
        failure_rate: None,
        failure_rate_upper: None,
        theory,
        verdict,
        infinite_count: moments.infinite_count,
    })
}

/// Measures how often the metric exceeds `eps` over seeded trials.
///
/// The verdict certifies the `<= delta` guarantee conservatively: pass iff
/// the one-sided 95% Clopper-Pearson upper limit on the failure rate is at
/// most `delta`. Infinite statistics count as failures.
pub fn run_failure_rate(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let p = cfg.validate_common()?;
    let eps = cfg
        .eps
        .ok_or_else(|| Error::InvalidConfig("failure-rate mode needs eps".into()))?;
    let delta = cfg
        .delta
        .ok_or_else(|| Error::InvalidConfig("failure-rate mode needs delta".into()))?;
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidConfig(format!("eps must be > 0, got {eps}")));
    }
    if !delta.is_finite() || delta <= 0.0 || delta > 1.0 {
        return Err(Error::InvalidConfig(format!(
            "delta must be in (0, 1], got {delta}"
        )));
    }

    let values = trial_statistics(&p, cfg, false, false);
    let moments = finite_moments(&values);
    let failures = values.iter().filter(|&&v| v > eps).count() as u64;
    let failure_rate = failures as f64 / cfg.trials as f64;
    let upper = clopper_pearson_upper(failures, cfg.trials, 0.95);

    Ok(ExperimentReport {
        mode: "failure_rate".into(),
        metric: cfg.metric,
        statistic: cfg.metric.as_str().into(),
        estimator: cfg.estimator.to_string(),
        k: p.k() as u64,
        n: cfg.n,
        trials: cfg.trials,
        base_seed: cfg.base_seed,
        mean: moments.mean,
        std_err: moments.std_err,
        ci95: Some(wilson_ci95(failures, cfg.trials)),
        eps: Some(eps),
        delta: Some(delta),
        failure_rate: Some(failure_rate),
        failure_rate_upper: Some(upper),
        theory: Some(delta),
        verdict: Some(Verdict::from_bool(upper <= delta)),
        infinite_count: moments.infinite_count,
    })
}

/// Which theoretical tail applies to a tail-curve threshold, if any, and
/// whether it is asserted there.
fn tail_theory(
    metric: MetricKind,
    empirical: bool,
    k: u64,
    n: u64,
    t: f64,
) -> (Option<f64>, bool) {
    if !empirical {
        return (None, false);
    }
    match metric {
        MetricKind::Kolmogorov => (Some(bounds::tail_dkw(n, t).expect("valid args")), true),
        MetricKind::Kl => {
            if k < 2 {
                return (None, false);
            }
            let applicable = n as f64 >= (k - 1) as f64 / t;
            (Some(bounds::agrawal_raw(n, k, t)), applicable)
        }
        MetricKind::Tv => {
            // The deviation bound covers P[tv > t] only once the expected
            // distance fits under t/2.
            let applicable = bounds::expected_tv_bound(k, n) <= t / 2.0;
            (
                Some(bounds::tail_mcdiarmid_tv(n, t).expect("valid args")),
                applicable,
            )
        }
        _ => (None, false),
    }
}

/// Empirical exceedance fraction per threshold, next to the theoretical
/// tail curve (DKW for kolmogorov, Agrawal for `kl(empirical || p)`, the
/// intrinsic McDiarmid tail for tv).
///
/// KL runs in the estimate-first direction here; all other metrics are
/// evaluated as `d(p, estimate)`. The verdict requires empirical <=
/// theoretical at every asserted threshold (none asserted: no verdict).
pub fn run_tail_curve(cfg: &ExperimentConfig) -> Result<TailCurveReport> {
    let p = cfg.validate_common()?;
    let thresholds = cfg
        .thresholds
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("tail-curve mode needs thresholds".into()))?;
    if thresholds.is_empty() {
        return Err(Error::InvalidConfig("thresholds must be nonempty".into()));
    }
    for w in thresholds.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidConfig(
                "thresholds must be strictly increasing".into(),
            ));
        }
    }
    if thresholds.iter().any(|t| !t.is_finite() || *t <= 0.0) {
        return Err(Error::InvalidConfig("thresholds must be positive".into()));
    }

    let estimate_first = matches!(cfg.metric, MetricKind::Kl | MetricKind::ChiSquare);
    let values = trial_statistics(&p, cfg, false, estimate_first);

    let empirical_est = cfg.estimator.is_empirical();
    let (k, n, trials) = (p.k() as u64, cfg.n, cfg.trials);
    let points: Vec<TailCurvePoint> = thresholds
        .iter()
        .map(|&t| {
            let exceed = values.iter().filter(|&&v| v > t).count() as u64;
            let empirical_tail = exceed as f64 / trials as f64;
            let (theoretical_tail, asserted) = tail_theory(cfg.metric, empirical_est, k, n, t);
            let holds = match (theoretical_tail, asserted) {
                (Some(bound), true) => Some(empirical_tail <= bound),
                _ => None,
            };
            TailCurvePoint {
                threshold: t,
                empirical_tail,
                theoretical_tail,
                asserted,
                holds,
            }
        })
        .collect();

    let asserted_any = points.iter().any(|pt| pt.asserted);
    let verdict = asserted_any
        .then(|| Verdict::from_bool(points.iter().all(|pt| pt.holds.unwrap_or(true))));

    let statistic = match cfg.metric {
        MetricKind::Kl => "kl_estimate_vs_truth",
        MetricKind::ChiSquare => "chi2_estimate_vs_truth",
        other => other.as_str(),
    };

    Ok(TailCurveReport {
        mode: "tail_curve".into(),
        metric: cfg.metric,
        statistic: statistic.into(),
        estimator: cfg.estimator.to_string(),
        k,
        n,
        trials,
        base_seed: cfg.base_seed,
        points,
        verdict,
    })
}

/// Demonstrates that `kl(p || empirical)` is infinite whenever some support
/// element goes unsampled, on the two-point distribution
/// `p = (1 - tiny_mass, tiny_mass)`.
///
/// Returns the measured fraction of infinite trials next to the exact miss
/// probability `(1-t)^n + t^n`. Substituting an add-constant estimator
/// drives the infinite fraction to zero.
pub fn run_kl_unbounded_demo(
    k: u64,
    n: u64,
    tiny_mass: f64,
    trials: u64,
    base_seed: u64,
    estimator: EstimatorKind,
) -> Result<KlUnboundedReport> {
    if k != 2 {
        return Err(Error::InvalidConfig(format!(
            "the demo uses the canonical two-point distribution; k = {k} is not supported"
        )));
    }
    if !(tiny_mass > 0.0 && tiny_mass <= 0.5) {
        return Err(Error::InvalidConfig(format!(
            "tiny_mass must be in (0, 0.5], got {tiny_mass}"
        )));
    }
    if n == 0 || trials == 0 {
        return Err(Error::InvalidConfig("n and trials must be >= 1".into()));
    }

    let p = Distribution::new(vec![1.0 - tiny_mass, tiny_mass])?;
    let infinite_count: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = p.sample(n, per_trial_seed(base_seed, t));
            let est = estimator.estimate(&s, 2).expect("estimator on k = 2");
            u64::from(
                metrics::kl_divergence(&p, &est)
                    .expect("equal domains")
                    .is_infinite(),
            )
        })
        .sum();

    let miss = |q: f64| (1.0 - q).powf(n as f64);
    Ok(KlUnboundedReport {
        mode: "kl_unbounded".into(),
        k,
        n,
        tiny_mass,
        trials,
        base_seed,
        estimator: estimator.to_string(),
        infinite_count,
        infinite_fraction: infinite_count as f64 / trials as f64,
        analytic_infinite_prob: miss(tiny_mass) + miss(1.0 - tiny_mass),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::FamilySpec;
    use approx::assert_abs_diff_eq;

    fn config(metric: MetricKind, k: usize, n: u64, trials: u64) -> ExperimentConfig {
        ExperimentConfig {
            dist: DistSpec::Family(FamilySpec::uniform(k)),
            estimator: EstimatorKind::Empirical,
            metric,
            n,
            trials,
            base_seed: 42,
            thresholds: None,
            eps: None,
            delta: None,
        }
    }

    #[test]
    fn per_trial_seed_is_fixed() {
        // Frozen values: changing the mix function invalidates recorded
        // reports, so lock it down.
        assert_eq!(per_trial_seed(0, 0), 16294208416658607535);
        assert_eq!(per_trial_seed(42, 0), 13679457532755275413);
        assert_eq!(per_trial_seed(42, 1), 2949826092126892291);
        assert_ne!(per_trial_seed(42, 1), per_trial_seed(43, 1));
    }

    #[test]
    fn clopper_pearson_matches_closed_form_at_zero() {
        let upper = clopper_pearson_upper(0, 10_000, 0.95);
        let closed = 1.0 - 0.05f64.powf(1.0 / 10_000.0);
        assert_abs_diff_eq!(upper, closed, epsilon = 1e-7);
        assert_eq!(clopper_pearson_upper(5, 5, 0.95), 1.0);
        assert!(clopper_pearson_upper(3, 100, 0.95) > 0.03);
    }

    #[test]
    fn wilson_interval_sane() {
        let [lo, hi] = wilson_ci95(50, 100);
        assert!(lo < 0.5 && 0.5 < hi);
        let [lo, hi] = wilson_ci95(0, 100);
        assert!(lo >= 0.0 && lo < 1e-12);
        assert!(hi > 0.0 && hi < 0.05);
    }

    #[test]
    fn expectation_point_mass_is_exact_zero() {
        let mut cfg = config(MetricKind::Tv, 5, 50, 200);
        cfg.dist = DistSpec::Family(FamilySpec::point_mass(5, 2));
        let report = run_expectation(&cfg).unwrap();
        assert_eq!(report.mean, Some(0.0));
        assert_eq!(report.verdict, Some(Verdict::Pass));
        assert_eq!(report.infinite_count, 0);
    }

    #[test]
    fn expectation_tv_uniform_k2_matches_enumeration() {
        // Exact oracle: E|Bin(100, 1/2)/100 - 1/2| by enumeration.
        let mut oracle = 0.0;
        let mut log_pmf = vec![0.0f64; 101];
        let ln_fact: Vec<f64> = {
            let mut acc = vec![0.0f64; 102];
            for i in 1..102 {
                acc[i] = acc[i - 1] + (i as f64).ln();
            }
            acc
        };
        for j in 0..=100usize {
            log_pmf[j] = ln_fact[100] - ln_fact[j] - ln_fact[100 - j] - 100.0 * 2.0f64.ln();
            oracle += log_pmf[j].exp() * ((j as f64) / 100.0 - 0.5).abs();
        }
        assert_abs_diff_eq!(oracle, 0.039794618693589356, epsilon = 1e-12);

        let report = run_expectation(&config(MetricKind::Tv, 2, 100, 20_000)).unwrap();
        let mean = report.mean.unwrap();
        let se = report.std_err.unwrap();
        assert!(
            (mean - oracle).abs() <= 3.0 * se,
            "mean {mean} vs oracle {oracle} (se {se})"
        );
        assert_abs_diff_eq!(report.theory.unwrap(), 0.5 * (2.0f64 / 100.0).sqrt(), epsilon = 1e-15);
        assert_eq!(report.verdict, Some(Verdict::Pass));
    }

    #[test]
    fn failure_rate_point_mass_never_fails() {
        let mut cfg = config(MetricKind::Kolmogorov, 4, 20, 500);
        cfg.dist = DistSpec::Family(FamilySpec::point_mass(4, 1));
        cfg.eps = Some(0.05);
        cfg.delta = Some(0.5);
        let report = run_failure_rate(&cfg).unwrap();
        assert_eq!(report.failure_rate, Some(0.0));
        assert_eq!(report.verdict, Some(Verdict::Pass));
    }

    #[test]
    fn failure_rate_requires_eps_delta() {
        let cfg = config(MetricKind::Tv, 2, 100, 100);
        assert!(matches!(
            run_failure_rate(&cfg).unwrap_err(),
            Error::InvalidConfig(_)
        ));
    }

    #[test]
    fn tail_curve_validates_thresholds() {
        let mut cfg = config(MetricKind::Kolmogorov, 5, 50, 100);
        cfg.thresholds = Some(vec![0.2, 0.1]);
        assert!(run_tail_curve(&cfg).is_err());
        cfg.thresholds = Some(vec![]);
        assert!(run_tail_curve(&cfg).is_err());
        cfg.thresholds = Some(vec![-0.1, 0.2]);
        assert!(run_tail_curve(&cfg).is_err());
    }

    #[test]
    fn tail_curve_tv_thresholds_beyond_one_are_empty() {
        let mut cfg = config(MetricKind::Tv, 4, 30, 300);
        cfg.thresholds = Some(vec![0.5, 1.5]);
        let report = run_tail_curve(&cfg).unwrap();
        assert_eq!(report.points[1].empirical_tail, 0.0);
    }

    #[test]
    fn tail_curve_agrawal_marks_applicability() {
        let mut cfg = config(MetricKind::Kl, 8, 10, 200);
        // (k-1)/t = 7/0.5 = 14 > n = 10: not asserted; 7/0.9 < 10: asserted.
        cfg.thresholds = Some(vec![0.5, 0.9]);
        let report = run_tail_curve(&cfg).unwrap();
        assert!(!report.points[0].asserted);
        assert!(report.points[0].theoretical_tail.is_some());
        assert!(report.points[1].asserted);
    }

    #[test]
    fn tail_curve_non_empirical_has_no_theory() {
        let mut cfg = config(MetricKind::Kolmogorov, 5, 50, 100);
        cfg.estimator = EstimatorKind::AddConstant(1.0);
        cfg.thresholds = Some(vec![0.1]);
        let report = run_tail_curve(&cfg).unwrap();
        assert_eq!(report.points[0].theoretical_tail, None);
        assert_eq!(report.verdict, None);
    }

    #[test]
    fn kl_unbounded_demo_k2_n1_always_infinite() {
        let report =
            run_kl_unbounded_demo(2, 1, 0.5, 2_000, 7, EstimatorKind::Empirical).unwrap();
        assert_eq!(report.infinite_fraction, 1.0);
        assert_abs_diff_eq!(report.analytic_infinite_prob, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn kl_unbounded_demo_add_constant_is_finite() {
        let report =
            run_kl_unbounded_demo(2, 50, 0.01, 2_000, 7, EstimatorKind::AddConstant(1.0))
                .unwrap();
        assert_eq!(report.infinite_count, 0);
    }

    #[test]
    fn kl_unbounded_demo_validates() {
        assert!(run_kl_unbounded_demo(3, 10, 0.1, 10, 0, EstimatorKind::Empirical).is_err());
        assert!(run_kl_unbounded_demo(2, 10, 0.0, 10, 0, EstimatorKind::Empirical).is_err());
        assert!(run_kl_unbounded_demo(2, 10, 0.7, 10, 0, EstimatorKind::Empirical).is_err());
    }

    #[test]
    fn reports_are_deterministic_across_thread_counts() {
        let mut cfg = config(MetricKind::Tv, 10, 200, 2_000);
        cfg.eps = Some(0.1);
        cfg.delta = Some(0.05);
        let run_with = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_failure_rate(&cfg).unwrap())
        };
        let r1 = run_with(1);
        let r4 = run_with(4);
        let r16 = run_with(16);
        assert_eq!(r1, r4);
        assert_eq!(r4, r16);
        assert_eq!(
            serde_json::to_string(&r1).unwrap(),
            serde_json::to_string(&r16).unwrap()
        );
    }

    #[test]
    fn config_json_round_trip_rejects_unknown_fields() {
        let json = r#"{
            "dist": {"family": "uniform", "k": 4},
            "metric": "tv",
            "n": 100,
            "trials": 50,
            "base_seed": 1
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.estimator, EstimatorKind::Empirical);
        assert_eq!(cfg.trials, 50);

        let bad = r#"{"dist": {"pmf": [1.0]}, "metric": "tv", "n": 1, "trials": 1, "base_seed": 0, "bogus": 3}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(bad).is_err());
    }
}
