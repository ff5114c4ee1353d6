//! Closed-form sample-size calculators, evaluable tail bounds, and
//! expectation bounds for learning a distribution on `[k]` with the
//! empirical estimator.
//!
//! Every calculator returns a [`BoundCertificate`] recording the required
//! sample count, the governing inequality, and the evaluated sub-terms, so
//! a report can be audited without re-deriving the formula.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::metrics::MetricKind;

/// Guarantee tiers for the Hellinger sample-size calculator, from the
/// loosest (reduction to total variation) to the tightest known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HellingerTier {
    Easy,
    Intermediate,
    Optimal,
}

impl std::fmt::Display for HellingerTier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HellingerTier::Easy => "easy",
            HellingerTier::Intermediate => "intermediate",
            HellingerTier::Optimal => "optimal",
        })
    }
}

impl std::str::FromStr for HellingerTier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "easy" => HellingerTier::Easy,
            "intermediate" => HellingerTier::Intermediate,
            "optimal" => HellingerTier::Optimal,
            other => {
                return Err(Error::InvalidParam(format!(
                    "unknown tier {other:?} (expected easy, intermediate, optimal)"
                )))
            }
        })
    }
}

/// A sample-size query: which metric, what domain size, what accuracy and
/// failure probability, and (for Hellinger) which tier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRequest {
    pub metric: MetricKind,
    /// Domain size; ignored by the k-independent calculators
    /// (kolmogorov, linf, l2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    pub eps: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tier: Option<HellingerTier>,
}

/// A required sample count together with its provenance: the governing
/// inequality and the evaluated sub-terms of the formula.
///
/// `n` is the ceiling of the real-valued bound, never below 1. For
/// k-independent metrics the `k` field is `None`: the certificate records
/// exactly the inputs the formula consumed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCertificate {
    pub metric: MetricKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tier: Option<HellingerTier>,
    pub k: Option<u64>,
    pub eps: f64,
    pub delta: f64,
    pub n: u64,
    pub theorem: String,
    pub formula_terms: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn validate_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidParam(format!("eps must be > 0, got {eps}")));
    }
    if !delta.is_finite() || delta <= 0.0 || delta > 1.0 {
        return Err(Error::InvalidParam(format!(
            "delta must be in (0, 1], got {delta}"
        )));
    }
    Ok(())
}

fn validate_k(k: u64) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParam("k must be >= 1".into()));
    }
    Ok(())
}

/// Ceils a real-valued bound to an integer sample count, at least 1.
fn ceil_n(x: f64) -> u64 {
    if x <= 1.0 {
        1
    } else {
        x.ceil() as u64
    }
}

fn terms(entries: &[(&str, f64)]) -> BTreeMap<String, f64> {
    entries
        .iter()
        .map(|(name, v)| (name.to_string(), *v))
        .collect()
}

/// Samples sufficient for `tv(p, empirical) <= eps` with probability
/// `1 - delta`: `n = ceil(max(k/eps^2, (2/eps^2) ln(2/delta)))`.
///
/// The first term drives the expected distance below `eps/2`; the second is
/// the bounded-differences (McDiarmid) deviation term.
pub fn sample_size_tv(k: u64, eps: f64, delta: f64) -> Result<BoundCertificate> {
    validate_k(k)?;
    validate_eps_delta(eps, delta)?;
    let expectation_term = k as f64 / (eps * eps);
    let deviation_term = 2.0 / (eps * eps) * (2.0 / delta).ln();
    Ok(BoundCertificate {
        metric: MetricKind::Tv,
        tier: None,
        k: Some(k),
        eps,
        delta,
        n: ceil_n(expectation_term.max(deviation_term)),
        theorem: "tv-expectation-plus-mcdiarmid".into(),
        formula_terms: terms(&[
            ("k_over_eps2", expectation_term),
            ("mcdiarmid_term", deviation_term),
        ]),
        note: None,
    })
}

/// Samples sufficient for the same total-variation guarantee via a
/// Hoeffding bound per subset and a union bound over all `2^k` subsets:
/// `n = ceil((k ln 2 + ln(1/delta)) / (2 eps^2))`.
pub fn sample_size_tv_union(k: u64, eps: f64, delta: f64) -> Result<BoundCertificate> {
    validate_k(k)?;
    validate_eps_delta(eps, delta)?;
    let raw = (k as f64 * std::f64::consts::LN_2 + (1.0 / delta).ln()) / (2.0 * eps * eps);
    Ok(BoundCertificate {
        metric: MetricKind::Tv,
        tier: None,
        k: Some(k),
        eps,
        delta,
        n: ceil_n(raw),
        theorem: "tv-subset-union-hoeffding".into(),
        formula_terms: terms(&[("union_bound", raw)]),
        note: None,
    })
}

/// Samples sufficient for `hellinger(p, empirical) <= eps` with probability
/// `1 - delta`, at the requested tier:
///
/// - `easy`: `hellinger^2 <= tv`, so run the TV calculator at accuracy
///   `eps^2`; costs `O(1/eps^4)` everywhere.
/// - `intermediate`: `n = ceil(max(k/eps^2, (8/eps^4) ln(1/delta)))` from
///   the expected squared distance `k/(2n)` plus a self-bounding
///   concentration argument.
/// - `optimal`: `n = ceil(max(15k/(2e eps^2), ln(1/delta)/eps^2))` by
///   inverting Agrawal's KL concentration bound at `alpha = 2 eps^2`.
pub fn sample_size_hellinger(
    k: u64,
    eps: f64,
    delta: f64,
    tier: HellingerTier,
) -> Result<BoundCertificate> {
    validate_k(k)?;
    validate_eps_delta(eps, delta)?;
    if eps > 1.0 {
        return Err(Error::InvalidParam(format!(
            "hellinger distance is at most 1; eps = {eps}"
        )));
    }
    let cert = match tier {
        HellingerTier::Easy => {
            let inner = sample_size_tv(k, eps * eps, delta)?;
            BoundCertificate {
                metric: MetricKind::Hellinger,
                tier: Some(tier),
                k: Some(k),
                eps,
                delta,
                n: inner.n,
                theorem: "hellinger-sq-le-tv-reduction".into(),
                formula_terms: terms(&[
                    ("k_over_eps4", inner.formula_terms["k_over_eps2"]),
                    ("mcdiarmid_term", inner.formula_terms["mcdiarmid_term"]),
                ]),
                note: None,
            }
        }
        HellingerTier::Intermediate => {
            let expectation_term = k as f64 / (eps * eps);
            let deviation_term = 8.0 / eps.powi(4) * (1.0 / delta).ln();
            BoundCertificate {
                metric: MetricKind::Hellinger,
                tier: Some(tier),
                k: Some(k),
                eps,
                delta,
                n: ceil_n(expectation_term.max(deviation_term)),
                theorem: "hellinger-expectation-plus-bounded-differences".into(),
                formula_terms: terms(&[
                    ("k_over_eps2", expectation_term),
                    ("tail_term", deviation_term),
                ]),
                note: None,
            }
        }
        HellingerTier::Optimal => {
            let two_e = 2.0 * std::f64::consts::E;
            let k_term = 15.0 * k as f64 / (two_e * eps * eps);
            let delta_term = (1.0 / delta).ln() / (eps * eps);
            let n = ceil_n(k_term.max(delta_term));
            // Agrawal's bound at alpha = 2 eps^2 needs n >= (k-1)/(2 eps^2);
            // automatic because 15/(2e) > 1/2.
            debug_assert!(n as f64 >= (k - 1) as f64 / (2.0 * eps * eps));
            BoundCertificate {
                metric: MetricKind::Hellinger,
                tier: Some(tier),
                k: Some(k),
                eps,
                delta,
                n,
                theorem: "hellinger-agrawal-kl-inversion".into(),
                formula_terms: terms(&[
                    ("k_term_15_over_2e_eps2", k_term),
                    ("k_term_15_over_2_eps2", 15.0 * k as f64 / (2.0 * eps * eps)),
                    ("delta_term", delta_term),
                ]),
                note: Some(
                    "the k term uses the sharper 15/(2e) constant; the 15/2 variant is \
                     surfaced alongside for comparison"
                        .into(),
                ),
            }
        }
    };
    Ok(cert)
}

/// Samples sufficient for `kl(empirical || p) <= eps` with probability
/// `1 - delta`: the smallest `n >= ceil((k-1)/eps)` with
/// `tail_agrawal(n, k, eps) <= delta`, found by doubling then binary
/// search (the tail is strictly decreasing in `n` past the floor).
///
/// For `k = 1` the divergence is identically zero and `n = 1` suffices.
pub fn sample_size_kl(k: u64, eps: f64, delta: f64) -> Result<BoundCertificate> {
    validate_k(k)?;
    validate_eps_delta(eps, delta)?;
    if k == 1 {
        return Ok(BoundCertificate {
            metric: MetricKind::Kl,
            tier: None,
            k: Some(k),
            eps,
            delta,
            n: 1,
            theorem: "kl-single-point-domain".into(),
            formula_terms: terms(&[("achieved_tail", 0.0)]),
            note: Some("kl(empirical || p) is identically 0 when k = 1".into()),
        });
    }

    const CAP: u64 = 1 << 62;
    let floor = ceil_n((k - 1) as f64 / eps);
    let tail = |n: u64| agrawal_raw(n, k, eps);

    let n = if tail(floor) <= delta {
        floor
    } else {
        // Double until the tail crosses delta, then bisect the crossover.
        let mut lo = floor;
        let mut hi = floor
            .checked_mul(2)
            .filter(|&h| h <= CAP)
            .ok_or_else(|| Error::InvalidParam("sample size exceeds 2^62".into()))?;
        while tail(hi) > delta {
            lo = hi;
            hi = hi
                .checked_mul(2)
                .filter(|&h| h <= CAP)
                .ok_or_else(|| Error::InvalidParam("sample size exceeds 2^62".into()))?;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if tail(mid) <= delta {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };

    Ok(BoundCertificate {
        metric: MetricKind::Kl,
        tier: None,
        k: Some(k),
        eps,
        delta,
        n,
        theorem: "kl-agrawal-inversion".into(),
        formula_terms: terms(&[("floor_n", floor as f64), ("achieved_tail", tail(n))]),
        note: None,
    })
}

/// Samples sufficient for `kolmogorov(empirical, p) <= eps` with
/// probability `1 - delta`, by inverting the DKW inequality with Massart's
/// constant: `n = ceil(ln(2/delta) / (2 eps^2))`. Independent of `k`.
pub fn sample_size_kolmogorov(eps: f64, delta: f64) -> Result<BoundCertificate> {
    validate_eps_delta(eps, delta)?;
    let raw = (2.0 / delta).ln() / (2.0 * eps * eps);
    Ok(BoundCertificate {
        metric: MetricKind::Kolmogorov,
        tier: None,
        k: None,
        eps,
        delta,
        n: ceil_n(raw),
        theorem: "kolmogorov-dkw-massart-inversion".into(),
        formula_terms: terms(&[("dkw_inversion", raw)]),
        note: None,
    })
}

/// Samples sufficient for `linf(p, empirical) <= eps` with probability
/// `1 - delta`, via `linf <= 2 kolmogorov` and the DKW inversion at
/// accuracy `eps/2`: `n = ceil(2 ln(2/delta) / eps^2)`. Independent of `k`.
pub fn sample_size_linf(eps: f64, delta: f64) -> Result<BoundCertificate> {
    validate_eps_delta(eps, delta)?;
    let inner = sample_size_kolmogorov(eps / 2.0, delta)?;
    Ok(BoundCertificate {
        metric: MetricKind::Linf,
        tier: None,
        k: None,
        eps,
        delta,
        n: inner.n,
        theorem: "linf-le-two-kolmogorov-dkw".into(),
        formula_terms: terms(&[("dkw_inversion_at_half_eps", inner.formula_terms["dkw_inversion"])]),
        note: None,
    })
}

/// Samples sufficient for `l2(p, empirical) <= eps` with probability
/// `1 - delta`: `n = ceil(max(4/eps^2, (4/eps^2) ln(2/delta)))`.
/// Independent of `k`.
///
/// Derived, not quoted: `E[l2^2] = sum_i p(i)(1-p(i))/n <= 1/n` puts the
/// expected distance below `eps/2` once `n >= 4/eps^2`, and a bounded-
/// differences argument (per-sample change at most `sqrt(2)/n`) gives a
/// `2 exp(-n eps^2 / 4)` tail at deviation `eps/2`.
pub fn sample_size_l2(eps: f64, delta: f64) -> Result<BoundCertificate> {
    validate_eps_delta(eps, delta)?;
    let expectation_term = 4.0 / (eps * eps);
    let deviation_term = 4.0 / (eps * eps) * (2.0 / delta).ln();
    Ok(BoundCertificate {
        metric: MetricKind::L2,
        tier: None,
        k: None,
        eps,
        delta,
        n: ceil_n(expectation_term.max(deviation_term)),
        theorem: "l2-expectation-plus-mcdiarmid".into(),
        formula_terms: terms(&[
            ("four_over_eps2", expectation_term),
            ("mcdiarmid_term", deviation_term),
        ]),
        note: Some(
            "derived from E[l2^2] <= 1/n and bounded differences; constants are not \
             from a published tight bound"
                .into(),
        ),
    })
}

/// Dispatches a [`BoundRequest`] to the matching calculator.
///
/// Total variation uses the expectation-plus-McDiarmid route; the union
/// bound is available directly via [`sample_size_tv_union`]. Chi-square has
/// no calculator: its optimal sample complexity is an open problem.
pub fn sample_size(req: &BoundRequest) -> Result<BoundCertificate> {
    let need_k = || {
        req.k
            .ok_or_else(|| Error::InvalidParam(format!("metric {} needs k", req.metric)))
    };
    match req.metric {
        MetricKind::Tv => sample_size_tv(need_k()?, req.eps, req.delta),
        MetricKind::Hellinger => sample_size_hellinger(
            need_k()?,
            req.eps,
            req.delta,
            req.tier.unwrap_or(HellingerTier::Optimal),
        ),
        MetricKind::Kl => sample_size_kl(need_k()?, req.eps, req.delta),
        MetricKind::Kolmogorov => sample_size_kolmogorov(req.eps, req.delta),
        MetricKind::Linf => sample_size_linf(req.eps, req.delta),
        MetricKind::L2 => sample_size_l2(req.eps, req.delta),
        MetricKind::ChiSquare => Err(Error::InvalidParam(
            "no chi2 sample-size bound: the optimal chi-square sample complexity \
             is an open problem"
                .into(),
        )),
    }
}

fn validate_tail_args(n: u64, eps: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParam("n must be >= 1".into()));
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidParam(format!("eps must be > 0, got {eps}")));
    }
    Ok(())
}

/// DKW tail with Massart's constant: `P[kolmogorov > eps] <= 2 e^{-2 n eps^2}`.
/// Returned uncapped; values above 1 are vacuous but preserve the algebra.
pub fn tail_dkw(n: u64, eps: f64) -> Result<f64> {
    validate_tail_args(n, eps)?;
    Ok(2.0 * (-2.0 * n as f64 * eps * eps).exp())
}

/// Hoeffding tail for the empirical mass of one fixed subset:
/// `P[emp(S) > p(S) + eps] <= e^{-2 n eps^2}`.
pub fn tail_hoeffding_subset(n: u64, eps: f64) -> Result<f64> {
    validate_tail_args(n, eps)?;
    Ok((-2.0 * n as f64 * eps * eps).exp())
}

/// Two-sided McDiarmid tail for the total variation of the empirical
/// estimator at deviation `eps/2` (per-sample change `1/n`):
/// `P[|tv - E tv| >= eps/2] <= 2 e^{-n eps^2 / 2}`.
pub fn tail_mcdiarmid_tv(n: u64, eps: f64) -> Result<f64> {
    validate_tail_args(n, eps)?;
    Ok(2.0 * (-(n as f64) * eps * eps / 2.0).exp())
}

/// The Agrawal formula value, without the applicability precondition.
/// Evaluated in log space so large `k` cannot overflow the power.
pub(crate) fn agrawal_raw(n: u64, k: u64, alpha: f64) -> f64 {
    let (n, km1) = (n as f64, (k - 1) as f64);
    (-n * alpha + km1 * (1.0 + (alpha * n / km1).ln())).exp()
}

/// Agrawal's multinomial KL concentration bound:
/// `P[kl(empirical || p) >= alpha] <= e^{-n alpha} (e alpha n / (k-1))^{k-1}`,
/// asserted only for `n >= (k-1)/alpha` (where it is strictly decreasing
/// in `n`).
pub fn tail_agrawal(n: u64, k: u64, alpha: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidParam("tail_agrawal needs k >= 2".into()));
    }
    validate_tail_args(n, alpha)?;
    if (n as f64) < (k - 1) as f64 / alpha {
        return Err(Error::PreconditionViolated(format!(
            "tail_agrawal needs n >= (k-1)/alpha = {}, got n = {n}",
            (k - 1) as f64 / alpha
        )));
    }
    Ok(agrawal_raw(n, k, alpha))
}

/// Expected total variation of the empirical estimator is at most
/// `0.5 sqrt(k/n)`, for every `p` on `[k]`.
pub fn expected_tv_bound(k: u64, n: u64) -> f64 {
    0.5 * (k as f64 / n as f64).sqrt()
}

/// Expected squared Hellinger distance of the empirical estimator is at
/// most `k / (2n)`, for every `p` on `[k]`.
pub fn expected_hellinger_sq_bound(k: u64, n: u64) -> f64 {
    k as f64 / (2.0 * n as f64)
}

/// Exact expected squared l2 distance of the empirical estimator:
/// `sum_i p(i)(1 - p(i)) / n` (each scaled count is binomial).
pub fn expected_l2_sq_exact(p: &Distribution, n: u64) -> f64 {
    p.pmf().iter().map(|&v| v * (1.0 - v)).sum::<f64>() / n as f64
}

/// Closed form for `E[1/(N+1)]` with `N ~ Binomial(r, rho)`:
/// `(1 - (1-rho)^{r+1}) / (rho (r+1))`, always at most `1/(rho (r+1))`.
pub fn binomial_inverse_moment(r: u64, rho: f64) -> Result<f64> {
    if !rho.is_finite() || rho <= 0.0 || rho > 1.0 {
        return Err(Error::InvalidParam(format!(
            "rho must be in (0, 1], got {rho}"
        )));
    }
    let r1 = (r + 1) as f64;
    Ok((1.0 - (1.0 - rho).powf(r1)) / (rho * r1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::FamilySpec;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn tv_sample_sizes() {
        let c = sample_size_tv(1000, 0.1, 0.05).unwrap();
        assert_eq!(c.n, 100_000);
        assert_abs_diff_eq!(c.formula_terms["k_over_eps2"], 1e5, epsilon = 1e-6);
        assert_abs_diff_eq!(c.formula_terms["mcdiarmid_term"], 737.7758908, epsilon = 1e-4);

        assert_eq!(sample_size_tv(2, 0.1, 1e-6).unwrap().n, 2902);
        assert_eq!(sample_size_tv(2, 1.0, 1.0).unwrap().n, 2);
        assert!(sample_size_tv(0, 0.1, 0.5).is_err());
        assert!(sample_size_tv(2, 0.0, 0.5).is_err());
        assert!(sample_size_tv(2, 0.1, 0.0).is_err());
        assert!(sample_size_tv(2, 0.1, 1.5).is_err());
    }

    #[test]
    fn tv_union_sample_sizes() {
        assert_eq!(sample_size_tv_union(2, 0.1, 0.05).unwrap().n, 220);
        assert_eq!(sample_size_tv_union(100, 0.1, 0.05).unwrap().n, 3616);
        assert_eq!(sample_size_tv_union(1, 0.5, 1.0).unwrap().n, 2);
    }

    #[test]
    fn hellinger_sample_sizes() {
        let easy = sample_size_hellinger(100, 0.1, 0.05, HellingerTier::Easy).unwrap();
        assert_eq!(easy.n, 1_000_000);

        let mid = sample_size_hellinger(100, 0.1, 0.05, HellingerTier::Intermediate).unwrap();
        // max(1e4, 8e4 * ln 20) = 239658.58..
        assert_eq!(mid.n, 239_659);

        let opt = sample_size_hellinger(100, 0.1, 0.05, HellingerTier::Optimal).unwrap();
        // max(1500/(2e*0.01), 100 ln 20) = max(27590.96, 299.57)
        assert_eq!(opt.n, 27_591);
        assert!(opt.formula_terms["k_term_15_over_2_eps2"] > opt.formula_terms["k_term_15_over_2e_eps2"]);

        assert!(sample_size_hellinger(100, 1.5, 0.05, HellingerTier::Optimal).is_err());
    }

    #[test]
    fn kl_sample_size_brute_force_crossover() {
        // Scan n = floor, floor+1, ... directly against the formula.
        let (k, eps, delta) = (2u64, 0.5, 0.05);
        let mut expected = 2;
        while agrawal_raw(expected, k, eps) > delta {
            expected += 1;
        }
        assert_eq!(expected, 12);
        let c = sample_size_kl(k, eps, delta).unwrap();
        assert_eq!(c.n, 12);
        assert!(c.formula_terms["achieved_tail"] <= delta);
        assert!(agrawal_raw(11, k, eps) > delta);
    }

    #[test]
    fn kl_sample_size_boundary_and_trivial() {
        // At n = 1 = (k-1)/eps the formula value is exactly e^{-1} * e = 1.
        let c = sample_size_kl(2, 1.0, 1.0).unwrap();
        assert_eq!(c.n, 1);

        let c = sample_size_kl(1, 0.1, 0.05).unwrap();
        assert_eq!(c.n, 1);
        assert_eq!(c.theorem, "kl-single-point-domain");
    }

    #[test]
    fn kl_sample_size_monotone_in_delta() {
        let mut prev = 0;
        for delta in [0.1, 0.01, 0.001] {
            let n = sample_size_kl(10, 0.1, delta).unwrap().n;
            assert!(n >= prev, "delta {delta}: {n} < {prev}");
            prev = n;
        }
    }

    #[test]
    fn kolmogorov_sample_sizes() {
        assert_eq!(sample_size_kolmogorov(0.1, 0.01).unwrap().n, 265);
        assert_eq!(sample_size_kolmogorov(0.1, 0.05).unwrap().n, 185);
        // Equality case of the inversion: delta = 2 e^{-2}, eps = 1.
        assert_eq!(sample_size_kolmogorov(1.0, 2.0 * (-2.0f64).exp()).unwrap().n, 1);
    }

    #[test]
    fn linf_sample_sizes() {
        assert_eq!(sample_size_linf(0.1, 0.01).unwrap().n, 1060);
        assert_eq!(sample_size_linf(0.2, 0.05).unwrap().n, 185);
        // Always the Kolmogorov answer at eps/2.
        for (eps, delta) in [(0.1, 0.05), (0.3, 0.2), (0.05, 0.01)] {
            assert_eq!(
                sample_size_linf(eps, delta).unwrap().n,
                sample_size_kolmogorov(eps / 2.0, delta).unwrap().n
            );
        }
    }

    #[test]
    fn l2_sample_sizes() {
        assert_eq!(sample_size_l2(0.1, 0.05).unwrap().n, 1476);
        assert_eq!(sample_size_l2(1.0, 1.0).unwrap().n, 4);
    }

    #[test]
    fn dispatch_covers_all_metrics() {
        let req = |metric, k, tier| BoundRequest {
            metric,
            k,
            eps: 0.1,
            delta: 0.05,
            tier,
        };
        assert_eq!(sample_size(&req(MetricKind::Tv, Some(10), None)).unwrap().n, 1000);
        assert!(sample_size(&req(MetricKind::Tv, None, None)).is_err());
        assert_eq!(
            sample_size(&req(MetricKind::Hellinger, Some(10), None)).unwrap().tier,
            Some(HellingerTier::Optimal)
        );
        // k is ignored and dropped for the k-independent metrics.
        let a = sample_size(&req(MetricKind::Kolmogorov, Some(10), None)).unwrap();
        let b = sample_size(&req(MetricKind::Kolmogorov, Some(100_000), None)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.k, None);
        assert!(sample_size(&req(MetricKind::ChiSquare, Some(10), None)).is_err());
    }

    #[test]
    fn tail_values() {
        assert_abs_diff_eq!(tail_dkw(100, 0.1).unwrap(), 2.0 * (-2.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(
            tail_hoeffding_subset(100, 0.1).unwrap(),
            (-2.0f64).exp(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            tail_mcdiarmid_tv(800, 0.1).unwrap(),
            2.0 * (-4.0f64).exp(),
            epsilon = 1e-15
        );
        // Uncapped: tiny n with tiny eps exceeds 1 and approaches 2.
        assert!(tail_dkw(1, 1e-9).unwrap() > 1.9999);
        assert!(tail_dkw(0, 0.1).is_err());
        assert!(tail_dkw(1, 0.0).is_err());
    }

    #[test]
    fn tail_identities() {
        // tail_dkw = 2 * tail_hoeffding_subset.
        for (n, eps) in [(10, 0.3), (100, 0.1), (5000, 0.02)] {
            assert_relative_eq!(
                tail_dkw(n, eps).unwrap(),
                2.0 * tail_hoeffding_subset(n, eps).unwrap(),
                max_relative = 1e-14
            );
        }
        // Doubling n squares-and-halves the DKW tail.
        for (n, eps) in [(50, 0.1), (200, 0.05)] {
            assert_relative_eq!(
                tail_dkw(2 * n, eps).unwrap(),
                tail_dkw(n, eps).unwrap().powi(2) / 2.0,
                max_relative = 1e-12
            );
        }
        // McDiarmid inversion: n = (2/eps^2) ln(2/delta) gives back delta.
        for (eps, delta) in [(0.1f64, 0.05f64), (0.2, 0.01)] {
            let n_real = 2.0 / (eps * eps) * (2.0 / delta).ln();
            let tail = 2.0 * (-n_real * eps * eps / 2.0).exp();
            assert_relative_eq!(tail, delta, max_relative = 1e-9);
        }
    }

    #[test]
    fn agrawal_examples() {
        assert_abs_diff_eq!(tail_agrawal(2, 2, 0.5).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            tail_agrawal(2, 2, 1.0).unwrap(),
            2.0 / std::f64::consts::E,
            epsilon = 1e-12
        );
        // Strictly decreasing on the valid region.
        assert!(tail_agrawal(100, 10, 0.2).unwrap() > tail_agrawal(200, 10, 0.2).unwrap());
        assert!(matches!(
            tail_agrawal(10, 10, 0.2).unwrap_err(),
            Error::PreconditionViolated(_)
        ));
        assert!(tail_agrawal(10, 1, 0.2).is_err());
    }

    #[test]
    fn expectation_bounds() {
        assert_abs_diff_eq!(expected_tv_bound(100, 10_000), 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(expected_tv_bound(7, 7), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(expected_hellinger_sq_bound(100, 10_000), 0.005, epsilon = 1e-15);
        assert_abs_diff_eq!(expected_hellinger_sq_bound(1, 50), 0.01, epsilon = 1e-15);

        let uniform2 = FamilySpec::uniform(2).build().unwrap();
        assert_abs_diff_eq!(expected_l2_sq_exact(&uniform2, 100), 0.005, epsilon = 1e-15);
        let point = FamilySpec::point_mass(5, 3).build().unwrap();
        assert_eq!(expected_l2_sq_exact(&point, 100), 0.0);
        let uniform10 = FamilySpec::uniform(10).build().unwrap();
        assert_abs_diff_eq!(
            expected_l2_sq_exact(&uniform10, 250),
            (1.0 - 0.1) / 250.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn binomial_inverse_moment_examples() {
        assert_abs_diff_eq!(binomial_inverse_moment(1, 0.5).unwrap(), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(
            binomial_inverse_moment(9, 1.0).unwrap(),
            0.1,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(binomial_inverse_moment(0, 0.3).unwrap(), 1.0, epsilon = 1e-15);
        assert!(binomial_inverse_moment(5, 0.0).is_err());
        assert!(binomial_inverse_moment(5, 1.5).is_err());
        // Always below 1/(rho (r+1)).
        for r in [0u64, 3, 17] {
            for rho in [0.1, 0.4, 0.9] {
                let v = binomial_inverse_moment(r, rho).unwrap();
                assert!(v <= 1.0 / (rho * (r + 1) as f64) + 1e-15);
            }
        }
    }

    #[test]
    fn log_exponent_fact_holds_on_grid() {
        // For n >= (15/(2e)) k / eps^2: (k-1) ln(2 e n eps^2/(k-1)) <= n eps^2.
        let two_e = 2.0 * std::f64::consts::E;
        for k in [2u64, 5, 17, 100, 1000] {
            for eps in [0.05, 0.1, 0.3, 1.0] {
                for mult in [1.0, 1.5, 4.0, 100.0] {
                    let n = (15.0 / two_e * k as f64 / (eps * eps) * mult).ceil();
                    let km1 = (k - 1) as f64;
                    let lhs = km1 * (two_e * n * eps * eps / km1).ln();
                    let rhs = n * eps * eps;
                    assert!(lhs <= rhs + 1e-9, "k={k} eps={eps} mult={mult}: {lhs} > {rhs}");
                }
            }
        }
    }
}
