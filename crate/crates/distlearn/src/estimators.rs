//! Estimators mapping a sample set to a distribution: the plug-in empirical
//! estimator and the add-constant (Laplace smoothing) family.

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::dist::{Distribution, SampleSet};
use crate::error::{Error, Result};

/// Estimator selector. Parses from and displays as `"empirical"` or
/// `"add-constant:<c>"`, in CLI flags and JSON configs alike.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorKind {
    Empirical,
    AddConstant(f64),
}

impl EstimatorKind {
    /// Applies the estimator to a sample set over domain size `k`.
    /// Cost is `O(k)`: only the histogram is consulted.
    pub fn estimate(&self, s: &SampleSet, k: usize) -> Result<Distribution> {
        match self {
            EstimatorKind::Empirical => empirical(s, k),
            EstimatorKind::AddConstant(c) => add_constant(s, k, *c),
        }
    }

    pub fn is_empirical(&self) -> bool {
        matches!(self, EstimatorKind::Empirical)
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EstimatorKind::Empirical => f.write_str("empirical"),
            EstimatorKind::AddConstant(c) => write!(f, "add-constant:{c}"),
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "empirical" {
            return Ok(EstimatorKind::Empirical);
        }
        if let Some(c) = s.strip_prefix("add-constant:") {
            let c: f64 = c
                .parse()
                .map_err(|_| Error::InvalidParam(format!("bad add-constant value {c:?}")))?;
            if !c.is_finite() || c <= 0.0 {
                return Err(Error::InvalidParam(format!(
                    "add-constant needs c > 0, got {c}"
                )));
            }
            return Ok(EstimatorKind::AddConstant(c));
        }
        Err(Error::InvalidParam(format!(
            "unknown estimator {s:?} (expected \"empirical\" or \"add-constant:<c>\")"
        )))
    }
}

impl Serialize for EstimatorKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for EstimatorKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct KindVisitor;
        impl Visitor<'_> for KindVisitor {
            type Value = EstimatorKind;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("\"empirical\" or \"add-constant:<c>\"")
            }

            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<EstimatorKind, E> {
                s.parse().map_err(E::custom)
            }
        }
        deserializer.deserialize_str(KindVisitor)
    }
}

fn check_counts_fit(s: &SampleSet, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::EmptyDomain);
    }
    // A histogram wider than k is fine as long as the excess is empty.
    for (i, &c) in s.counts().iter().enumerate().skip(k) {
        if c > 0 {
            return Err(Error::OutOfDomain {
                value: (i + 1) as u64,
                k,
            });
        }
    }
    Ok(())
}

/// The empirical (plug-in) estimator: `pmf[i] = counts[i] / n`.
pub fn empirical(s: &SampleSet, k: usize) -> Result<Distribution> {
    check_counts_fit(s, k)?;
    let n = s.n() as f64;
    let pmf: Vec<f64> = (0..k)
        .map(|i| s.counts().get(i).copied().unwrap_or(0) as f64 / n)
        .collect();
    Distribution::new(pmf)
}

/// The add-constant estimator: `pmf[i] = (counts[i] + c) / (n + c k)`,
/// `c > 0`. Every element receives strictly positive mass, so divergences
/// against it stay finite.
pub fn add_constant(s: &SampleSet, k: usize, c: f64) -> Result<Distribution> {
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "add-constant needs c > 0, got {c}"
        )));
    }
    check_counts_fit(s, k)?;
    let denom = s.n() as f64 + c * k as f64;
    let pmf: Vec<f64> = (0..k)
        .map(|i| (s.counts().get(i).copied().unwrap_or(0) as f64 + c) / denom)
        .collect();
    Distribution::new(pmf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn samples(values: &[u32], k: usize) -> SampleSet {
        SampleSet::from_samples(values.to_vec(), k, 0).unwrap()
    }

    #[test]
    fn empirical_examples() {
        let p = empirical(&samples(&[1, 1, 2], 3), 3).unwrap();
        assert_abs_diff_eq!(p.pmf()[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.pmf()[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(p.pmf()[2], 0.0);

        let p = empirical(&samples(&[3], 3), 3).unwrap();
        assert_eq!(p.pmf(), &[0.0, 0.0, 1.0]);

        let p = empirical(&samples(&[1, 2, 3, 4], 4), 4).unwrap();
        assert_eq!(p.pmf(), &[0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn empirical_rejects_out_of_domain() {
        let s = samples(&[1, 3], 3);
        assert_eq!(
            empirical(&s, 2).unwrap_err(),
            Error::OutOfDomain { value: 3, k: 2 }
        );
        // Widening the domain is allowed.
        let p = empirical(&s, 5).unwrap();
        assert_eq!(p.pmf(), &[0.5, 0.0, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn empirical_sums_to_one() {
        let s = samples(&[1, 2, 2, 3, 3, 3, 7], 7);
        let p = empirical(&s, 7).unwrap();
        assert_abs_diff_eq!(p.pmf().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn add_constant_examples() {
        let p = add_constant(&samples(&[1, 1, 2], 3), 3, 1.0).unwrap();
        assert_abs_diff_eq!(p.pmf()[0], 3.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.pmf()[1], 2.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.pmf()[2], 1.0 / 6.0, epsilon = 1e-15);

        let p = add_constant(&samples(&[1], 2), 2, 0.5).unwrap();
        assert_eq!(p.pmf(), &[0.75, 0.25]);

        let p = add_constant(&samples(&[1, 1], 1), 1, 2.0).unwrap();
        assert_eq!(p.pmf(), &[1.0]);
    }

    #[test]
    fn add_constant_full_support_and_param_check() {
        let p = add_constant(&samples(&[1], 4), 4, 0.1).unwrap();
        assert!(p.pmf().iter().all(|&v| v > 0.0));
        assert!(add_constant(&samples(&[1], 2), 2, 0.0).is_err());
        assert!(add_constant(&samples(&[1], 2), 2, -1.0).is_err());
    }

    #[test]
    fn add_constant_converges_to_empirical() {
        let s = samples(&[1, 1, 2, 5, 5, 5], 6);
        let emp = empirical(&s, 6).unwrap();
        let smoothed = add_constant(&s, 6, 1e-12).unwrap();
        let linf = crate::metrics::l_inf(&emp, &smoothed).unwrap();
        assert!(linf < 1e-10, "linf = {linf}");
    }

    #[test]
    fn kind_parses_and_displays() {
        assert_eq!(
            "empirical".parse::<EstimatorKind>().unwrap(),
            EstimatorKind::Empirical
        );
        assert_eq!(
            "add-constant:0.5".parse::<EstimatorKind>().unwrap(),
            EstimatorKind::AddConstant(0.5)
        );
        assert!("add-constant:0".parse::<EstimatorKind>().is_err());
        assert!("add-constant:x".parse::<EstimatorKind>().is_err());
        assert!("laplace".parse::<EstimatorKind>().is_err());
        assert_eq!(EstimatorKind::AddConstant(0.5).to_string(), "add-constant:0.5");
        let k: EstimatorKind = serde_json::from_str("\"add-constant:1\"").unwrap();
        assert_eq!(k, EstimatorKind::AddConstant(1.0));
    }
}
