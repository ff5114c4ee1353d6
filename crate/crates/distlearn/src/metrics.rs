//! Distance and divergence measures between distributions on a shared
//! domain, with exact infinity and `0 * log 0` semantics, plus a checker
//! for the standard chain of inter-metric inequalities.

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::dist::Distribution;
use crate::error::{Error, Result};

/// Additive slack when checking inequalities between computed metrics.
pub const INEQUALITY_TOLERANCE: f64 = 1e-10;

/// A nonnegative real or positive infinity; never NaN.
///
/// The codomain of KL and chi-square. Serializes as a JSON number when
/// finite and as the string `"inf"` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ExtendedReal(f64);

impl ExtendedReal {
    pub const ZERO: Self = Self(0.0);
    pub const INFINITY: Self = Self(f64::INFINITY);

    /// Wraps a nonnegative value (infinity allowed).
    ///
    /// # Panics
    /// Panics on NaN or negative input.
    pub fn new(value: f64) -> Self {
        assert!(!value.is_nan(), "extended real cannot be NaN");
        assert!(value >= 0.0, "extended real cannot be negative, got {value}");
        Self(value)
    }

    /// Wraps a sum that is nonnegative up to rounding, clamping stray
    /// `-1e-16`-scale values to zero.
    fn from_sum(value: f64) -> Self {
        debug_assert!(!value.is_nan());
        debug_assert!(value > -1e-9, "sum unexpectedly negative: {value}");
        Self(value.max(0.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl std::fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        json_real::serialize(&self.0, serializer)
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = json_real::deserialize(deserializer)?;
        if v.is_nan() || v < 0.0 {
            return Err(de::Error::custom("expected a nonnegative real or \"inf\""));
        }
        Ok(Self(v))
    }
}

/// Serde adapter for reals that may be infinite: numbers pass through,
/// infinities become the strings `"inf"` / `"-inf"` (JSON has no infinity
/// literal).
pub mod json_real {
    use super::*;

    pub fn serialize<S: Serializer>(
        v: &f64,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            serializer.serialize_f64(*v)
        } else if *v > 0.0 {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<f64, D::Error> {
        struct RealVisitor;
        impl Visitor<'_> for RealVisitor {
            type Value = f64;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a number or \"inf\"/\"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<f64, E> {
                Ok(v)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<f64, E> {
                match s {
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    other => Err(E::custom(format!("unrecognized real: {other:?}"))),
                }
            }
        }
        deserializer.deserialize_any(RealVisitor)
    }
}

/// Dispatch tag over the supported distance measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricKind {
    #[serde(rename = "tv")]
    Tv,
    #[serde(rename = "hellinger")]
    Hellinger,
    #[serde(rename = "kl")]
    Kl,
    #[serde(rename = "chi2")]
    ChiSquare,
    #[serde(rename = "kolmogorov")]
    Kolmogorov,
    #[serde(rename = "l2")]
    L2,
    #[serde(rename = "linf")]
    Linf,
}

impl MetricKind {
    pub const ALL: [MetricKind; 7] = [
        MetricKind::Tv,
        MetricKind::Hellinger,
        MetricKind::Kl,
        MetricKind::ChiSquare,
        MetricKind::Kolmogorov,
        MetricKind::L2,
        MetricKind::Linf,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MetricKind::Tv => "tv",
            MetricKind::Hellinger => "hellinger",
            MetricKind::Kl => "kl",
            MetricKind::ChiSquare => "chi2",
            MetricKind::Kolmogorov => "kolmogorov",
            MetricKind::L2 => "l2",
            MetricKind::Linf => "linf",
        }
    }

    /// Evaluates this measure between `p` and `q` (in that order; KL and
    /// chi-square are asymmetric).
    pub fn evaluate(&self, p: &Distribution, q: &Distribution) -> Result<ExtendedReal> {
        Ok(match self {
            MetricKind::Tv => ExtendedReal::new(total_variation(p, q)?),
            MetricKind::Hellinger => ExtendedReal::new(hellinger(p, q)?),
            MetricKind::Kl => kl_divergence(p, q)?,
            MetricKind::ChiSquare => chi_square(p, q)?,
            MetricKind::Kolmogorov => ExtendedReal::new(kolmogorov(p, q)?),
            MetricKind::L2 => ExtendedReal::new(l2(p, q)?),
            MetricKind::Linf => ExtendedReal::new(l_inf(p, q)?),
        })
    }
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "tv" => MetricKind::Tv,
            "hellinger" => MetricKind::Hellinger,
            "kl" => MetricKind::Kl,
            "chi2" => MetricKind::ChiSquare,
            "kolmogorov" => MetricKind::Kolmogorov,
            "l2" => MetricKind::L2,
            "linf" => MetricKind::Linf,
            other => {
                return Err(Error::InvalidParam(format!(
                    "unknown metric {other:?} (expected tv, hellinger, kl, chi2, kolmogorov, l2, linf)"
                )))
            }
        })
    }
}

fn check_domains(p: &Distribution, q: &Distribution) -> Result<()> {
    if p.k() != q.k() {
        return Err(Error::DomainMismatch {
            left: p.k(),
            right: q.k(),
        });
    }
    Ok(())
}

/// Total variation distance: `0.5 * sum_i |p(i) - q(i)|`, in `[0, 1]`.
/// Equals the largest discrepancy `p(S) - q(S)` over subsets `S`.
pub fn total_variation(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_domains(p, q)?;
    let sum: f64 = p
        .pmf()
        .iter()
        .zip(q.pmf())
        .map(|(&a, &b)| (a - b).abs())
        .sum();
    Ok((sum / 2.0).clamp(0.0, 1.0))
}

/// Squared Hellinger distance via the Bhattacharyya identity
/// `1 - sum_i sqrt(p(i) q(i))`, clamped to `[0, 1]` to absorb rounding.
pub fn hellinger_squared(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_domains(p, q)?;
    let bc: f64 = p
        .pmf()
        .iter()
        .zip(q.pmf())
        .map(|(&a, &b)| (a * b).sqrt())
        .sum();
    Ok((1.0 - bc).clamp(0.0, 1.0))
}

/// Hellinger distance `sqrt(1 - sum_i sqrt(p(i) q(i)))`, in `[0, 1]`.
/// Agrees with `(1/sqrt(2)) * ||sqrt(p) - sqrt(q)||_2`.
pub fn hellinger(p: &Distribution, q: &Distribution) -> Result<f64> {
    Ok(hellinger_squared(p, q)?.sqrt())
}

/// KL divergence `sum_i p(i) ln(p(i)/q(i))` in nats, in `[0, inf]`.
///
/// Terms with `p(i) = 0` contribute 0; any `i` with `p(i) > 0, q(i) = 0`
/// makes the divergence infinite. Summed in ascending index order with
/// compensated (Kahan) accumulation for cross-platform reproducibility.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<ExtendedReal> {
    check_domains(p, q)?;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (&a, &b) in p.pmf().iter().zip(q.pmf()) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Ok(ExtendedReal::INFINITY);
        }
        let term = a * (a / b).ln();
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(ExtendedReal::from_sum(sum))
}

/// Chi-square divergence `sum_i (p(i) - q(i))^2 / q(i)`, in `[0, inf]`.
///
/// Terms with `p(i) = q(i) = 0` contribute 0; any `i` with
/// `p(i) > 0, q(i) = 0` makes the divergence infinite.
pub fn chi_square(p: &Distribution, q: &Distribution) -> Result<ExtendedReal> {
    check_domains(p, q)?;
    let mut sum = 0.0;
    for (&a, &b) in p.pmf().iter().zip(q.pmf()) {
        if b == 0.0 {
            if a > 0.0 {
                return Ok(ExtendedReal::INFINITY);
            }
            continue;
        }
        let d = a - b;
        sum += d * d / b;
    }
    Ok(ExtendedReal::from_sum(sum))
}

/// Kolmogorov distance: the largest absolute difference between the two
/// cumulative distribution functions, in `[0, 1]`.
pub fn kolmogorov(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_domains(p, q)?;
    let mut fp = 0.0;
    let mut fq = 0.0;
    let mut max = 0.0f64;
    for (&a, &b) in p.pmf().iter().zip(q.pmf()) {
        fp += a;
        fq += b;
        max = max.max((fp - fq).abs());
    }
    Ok(max.clamp(0.0, 1.0))
}

/// Euclidean distance between the pmfs: `||p - q||_2`.
pub fn l2(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_domains(p, q)?;
    let sum: f64 = p
        .pmf()
        .iter()
        .zip(q.pmf())
        .map(|(&a, &b)| {
            let d = a - b;
            d * d
        })
        .sum();
    Ok(sum.sqrt())
}

/// Largest absolute coordinate difference: `max_i |p(i) - q(i)|`.
pub fn l_inf(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_domains(p, q)?;
    Ok(p.pmf()
        .iter()
        .zip(q.pmf())
        .map(|(&a, &b)| (a - b).abs())
        .fold(0.0f64, f64::max))
}

/// One checked inequality: `lhs <= rhs` up to [`INEQUALITY_TOLERANCE`].
///
/// `slack = rhs - lhs`; when both sides are infinite the comparison holds
/// trivially and the slack is reported as 0.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    #[serde(serialize_with = "json_real::serialize")]
    pub lhs: f64,
    #[serde(serialize_with = "json_real::serialize")]
    pub rhs: f64,
    #[serde(serialize_with = "json_real::serialize")]
    pub slack: f64,
    pub holds: bool,
}

impl InequalityCheck {
    fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        let (slack, holds) = if lhs.is_infinite() && rhs.is_infinite() {
            (0.0, true)
        } else if rhs.is_infinite() {
            (f64::INFINITY, true)
        } else if lhs.is_infinite() {
            (f64::NEG_INFINITY, false)
        } else {
            (rhs - lhs, lhs <= rhs + INEQUALITY_TOLERANCE)
        };
        Self {
            name,
            lhs,
            rhs,
            slack,
            holds,
        }
    }
}

/// Results of the full inter-metric inequality chain; serializes as a JSON
/// list of `{name, lhs, rhs, slack, holds}`.
#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct InequalityReport {
    pub checks: Vec<InequalityCheck>,
}

impl InequalityReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Evaluates every supported measure on `(p, q)` and checks the chain:
///
/// ```text
/// tv^2 / 2  <=  hellinger^2  <=  tv
/// 2 tv^2    <=  kl           <=  chi2          (Pinsker, then chi2 domination)
/// l2        <=  2 tv         <=  sqrt(k) l2
/// linf      <=  l2
/// l2^2      <=  linf * l1
/// linf / 2  <=  kolmogorov   <=  tv
/// ```
///
/// Infinite right-hand sides pass trivially. The `l2^2 <= linf * l1` form
/// replaces the tempting `l2 <= sqrt(linf)`, which fails on disjoint point
/// masses (`l2 = sqrt(2) > 1 = sqrt(linf)`).
pub fn inequality_report(p: &Distribution, q: &Distribution) -> Result<InequalityReport> {
    check_domains(p, q)?;
    let tv = total_variation(p, q)?;
    let h2 = hellinger_squared(p, q)?;
    let kl = kl_divergence(p, q)?.value();
    let chi2 = chi_square(p, q)?.value();
    let dk = kolmogorov(p, q)?;
    let l2v = l2(p, q)?;
    let linf = l_inf(p, q)?;
    let l1 = 2.0 * tv;
    let k = p.k() as f64;

    let checks = vec![
        InequalityCheck::new("half_tv_sq_le_hellinger_sq", 0.5 * tv * tv, h2),
        InequalityCheck::new("hellinger_sq_le_tv", h2, tv),
        InequalityCheck::new("pinsker_two_tv_sq_le_kl", 2.0 * tv * tv, kl),
        InequalityCheck::new("kl_le_chi2", kl, chi2),
        InequalityCheck::new("l2_le_two_tv", l2v, l1),
        InequalityCheck::new("two_tv_le_sqrt_k_l2", l1, k.sqrt() * l2v),
        InequalityCheck::new("linf_le_l2", linf, l2v),
        InequalityCheck::new("l2_sq_le_linf_l1", l2v * l2v, linf * l1),
        InequalityCheck::new("half_linf_le_kolmogorov", 0.5 * linf, dk),
        InequalityCheck::new("kolmogorov_le_tv", dk, tv),
    ];
    Ok(InequalityReport { checks })
}
