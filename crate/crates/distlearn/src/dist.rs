//! Probability distributions over the finite domain `[k] = {1, ..., k}`,
//! named test families, and deterministic seeded sampling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Gamma};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Construction tolerance on `|sum(pmf) - 1|`. Inputs farther from 1 are
/// rejected; inputs within it are renormalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// A validated probability mass function over `[k]`.
///
/// Entries are finite, nonnegative, and renormalized at construction so the
/// stored values sum to 1 in working precision. Domain elements are the
/// 1-based indices `1..=k`; the backing vector is 0-based, so `pmf()[i-1]`
/// is the mass of element `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pmf: Vec<f64>,
}

impl Distribution {
    /// Validates and renormalizes a pmf.
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::EmptyDomain);
        }
        for (i, &v) in pmf.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i + 1 });
            }
            if v < 0.0 {
                return Err(Error::NegativeMass {
                    index: i + 1,
                    value: v,
                });
            }
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        let mut pmf = pmf;
        for v in &mut pmf {
            *v /= sum;
        }
        Ok(Self { pmf })
    }

    /// Builds a distribution from a named family spec.
    pub fn from_family(spec: &FamilySpec) -> Result<Self> {
        spec.build()
    }

    /// Domain size `k`.
    pub fn k(&self) -> usize {
        self.pmf.len()
    }

    /// The stored (renormalized) pmf.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Mass of the 1-based domain element `i`.
    pub fn prob(&self, i: usize) -> f64 {
        self.pmf[i - 1]
    }

    /// Cumulative distribution function: `F[i] = sum(pmf[..=i])`.
    /// Nondecreasing, with the last entry equal to 1 up to rounding.
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.pmf
            .iter()
            .map(|&v| {
                acc += v;
                acc
            })
            .collect()
    }

    /// Draws `n` i.i.d. samples, deterministically in `(self, n, seed)`.
    ///
    /// Sampling is inverse-CDF: one ChaCha8 64-bit word per draw is mapped
    /// to the unit interval and located in the cumulative table by binary
    /// search. Zero-mass elements are never emitted.
    ///
    /// # Panics
    /// Panics if `n == 0`.
    pub fn sample(&self, n: u64, seed: u64) -> SampleSet {
        assert!(n >= 1, "sample size must be at least 1");
        let mut table = self.cdf();
        // Seal the table so every u in [0, 1) lands inside it.
        *table.last_mut().expect("nonempty pmf") = 1.0;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut samples = Vec::with_capacity(n as usize);
        let mut counts = vec![0u64; self.k()];
        for _ in 0..n {
            let u = unit_from_u64(rng.next_u64());
            let idx = table.partition_point(|&c| c <= u);
            debug_assert!(idx < self.k());
            samples.push((idx + 1) as u32);
            counts[idx] += 1;
        }
        SampleSet {
            samples,
            counts,
            seed,
        }
    }
}

/// Maps a 64-bit word to the unit interval `[0, 1)` using its top 53 bits.
#[inline]
fn unit_from_u64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// An ordered multiset of `n` draws from `[k]`, together with its histogram
/// and the seed that produced it. Immutable after construction.
///
/// Serializes as the reduced projection `{n, seed, counts}`; the raw sample
/// list is an in-memory detail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    samples: Vec<u32>,
    counts: Vec<u64>,
    seed: u64,
}

impl SampleSet {
    /// Builds a sample set from explicit 1-based sample values.
    ///
    /// `seed` records provenance when the samples came from a seeded draw;
    /// use 0 for hand-built sets.
    pub fn from_samples(samples: Vec<u32>, k: usize, seed: u64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParam(
                "a sample set needs at least one sample".into(),
            ));
        }
        if k == 0 {
            return Err(Error::EmptyDomain);
        }
        let mut counts = vec![0u64; k];
        for &s in &samples {
            if s < 1 || s as usize > k {
                return Err(Error::OutOfDomain { value: s as u64, k });
            }
            counts[(s - 1) as usize] += 1;
        }
        Ok(Self {
            samples,
            counts,
            seed,
        })
    }

    /// Number of samples `n`.
    pub fn n(&self) -> u64 {
        self.samples.len() as u64
    }

    /// Domain size the histogram was built over.
    pub fn k(&self) -> usize {
        self.counts.len()
    }

    /// The ordered samples (1-based values).
    pub fn samples(&self) -> &[u32] {
        &self.samples
    }

    /// Histogram: `counts[i]` occurrences of element `i + 1`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl Serialize for SampleSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("SampleSet", 3)?;
        st.serialize_field("n", &self.n())?;
        st.serialize_field("seed", &self.seed)?;
        st.serialize_field("counts", &self.counts)?;
        st.end()
    }
}

/// Named distribution families used to generate test corpora.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Uniform,
    PointMass,
    TwoPoint,
    Zipf,
    Dirichlet,
}

/// Per-family parameters; each family reads the fields it needs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyParams {
    /// Point-mass location (1-based).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    /// Two-point mass on element 1; element 2 gets the rest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<f64>,
    /// Zipf decay exponent (> 0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    /// Symmetric Dirichlet concentration (> 0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concentration: Option<f64>,
}

/// Declarative description of a family distribution:
/// `{"family": "...", "k": N, "params": {...}, "seed": N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: FamilyName,
    pub k: usize,
    #[serde(default)]
    pub params: FamilyParams,
    /// Consumed by `dirichlet` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl FamilySpec {
    pub fn uniform(k: usize) -> Self {
        Self {
            family: FamilyName::Uniform,
            k,
            params: FamilyParams::default(),
            seed: None,
        }
    }

    pub fn point_mass(k: usize, index: usize) -> Self {
        Self {
            family: FamilyName::PointMass,
            k,
            params: FamilyParams {
                index: Some(index),
                ..Default::default()
            },
            seed: None,
        }
    }

    pub fn two_point(k: usize, bias: f64) -> Self {
        Self {
            family: FamilyName::TwoPoint,
            k,
            params: FamilyParams {
                bias: Some(bias),
                ..Default::default()
            },
            seed: None,
        }
    }

    pub fn zipf(k: usize, exponent: f64) -> Self {
        Self {
            family: FamilyName::Zipf,
            k,
            params: FamilyParams {
                exponent: Some(exponent),
                ..Default::default()
            },
            seed: None,
        }
    }

    pub fn dirichlet(k: usize, concentration: f64, seed: u64) -> Self {
        Self {
            family: FamilyName::Dirichlet,
            k,
            params: FamilyParams {
                concentration: Some(concentration),
                ..Default::default()
            },
            seed: Some(seed),
        }
    }

    /// Materializes the spec. Deterministic: equal specs (including the
    /// dirichlet seed) produce equal distributions.
    pub fn build(&self) -> Result<Distribution> {
        if self.k == 0 {
            return Err(Error::EmptyDomain);
        }
        let k = self.k;
        match self.family {
            FamilyName::Uniform => Distribution::new(vec![1.0 / k as f64; k]),
            FamilyName::PointMass => {
                let index = self
                    .params
                    .index
                    .ok_or_else(|| Error::InvalidParam("point_mass needs params.index".into()))?;
                if index < 1 || index > k {
                    return Err(Error::InvalidParam(format!(
                        "point_mass index {index} outside [1, {k}]"
                    )));
                }
                let mut pmf = vec![0.0; k];
                pmf[index - 1] = 1.0;
                Distribution::new(pmf)
            }
            FamilyName::TwoPoint => {
                let bias = self
                    .params
                    .bias
                    .ok_or_else(|| Error::InvalidParam("two_point needs params.bias".into()))?;
                if k < 2 {
                    return Err(Error::InvalidParam("two_point needs k >= 2".into()));
                }
                if !(0.0..=1.0).contains(&bias) {
                    return Err(Error::InvalidParam(format!(
                        "two_point bias {bias} outside [0, 1]"
                    )));
                }
                let mut pmf = vec![0.0; k];
                pmf[0] = bias;
                pmf[1] = 1.0 - bias;
                Distribution::new(pmf)
            }
            FamilyName::Zipf => {
                let s = self
                    .params
                    .exponent
                    .ok_or_else(|| Error::InvalidParam("zipf needs params.exponent".into()))?;
                if !s.is_finite() || s <= 0.0 {
                    return Err(Error::InvalidParam(format!(
                        "zipf exponent must be positive, got {s}"
                    )));
                }
                let weights: Vec<f64> = (1..=k).map(|i| (i as f64).powf(-s)).collect();
                let total: f64 = weights.iter().sum();
                Distribution::new(weights.iter().map(|w| w / total).collect())
            }
            FamilyName::Dirichlet => {
                let a = self.params.concentration.ok_or_else(|| {
                    Error::InvalidParam("dirichlet needs params.concentration".into())
                })?;
                if !a.is_finite() || a <= 0.0 {
                    return Err(Error::InvalidParam(format!(
                        "dirichlet concentration must be positive, got {a}"
                    )));
                }
                let seed = self
                    .seed
                    .ok_or_else(|| Error::InvalidParam("dirichlet needs a seed".into()))?;
                let gamma = Gamma::new(a, 1.0)
                    .map_err(|e| Error::InvalidParam(format!("gamma({a}): {e}")))?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                // Tiny concentrations can underflow every draw to zero;
                // redraw deterministically rather than divide by zero.
                for _ in 0..100 {
                    let draws: Vec<f64> = (0..k).map(|_| gamma.sample(&mut rng)).collect();
                    let total: f64 = draws.iter().sum();
                    if total.is_finite() && total > 0.0 {
                        return Distribution::new(draws.iter().map(|g| g / total).collect());
                    }
                }
                Err(Error::InvalidParam(format!(
                    "dirichlet draws underflowed for concentration {a}"
                )))
            }
        }
    }
}

/// A distribution given either as an explicit pmf or as a family spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistSpec {
    Pmf { pmf: Vec<f64> },
    Family(FamilySpec),
}

impl DistSpec {
    pub fn build(&self) -> Result<Distribution> {
        match self {
            DistSpec::Pmf { pmf } => Distribution::new(pmf.clone()),
            DistSpec::Family(spec) => spec.build(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn accepts_valid_pmf() {
        let d = Distribution::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(d.k(), 2);
        assert_eq!(d.pmf(), &[0.5, 0.5]);
    }

    #[test]
    fn accepts_single_point() {
        let d = Distribution::new(vec![1.0]).unwrap();
        assert_eq!(d.k(), 1);
        assert_eq!(d.pmf(), &[1.0]);
    }

    #[test]
    fn rejects_negative_mass() {
        let err = Distribution::new(vec![0.3, -0.1, 0.8]).unwrap_err();
        assert_eq!(
            err,
            Error::NegativeMass {
                index: 2,
                value: -0.1
            }
        );
    }

    #[test]
    fn rejects_empty_and_unnormalized_and_nan() {
        assert_eq!(Distribution::new(vec![]).unwrap_err(), Error::EmptyDomain);
        assert!(matches!(
            Distribution::new(vec![0.5, 0.6]).unwrap_err(),
            Error::NotNormalized { .. }
        ));
        assert_eq!(
            Distribution::new(vec![f64::NAN, 1.0]).unwrap_err(),
            Error::NonFinite { index: 1 }
        );
    }

    #[test]
    fn renormalizes_within_tolerance() {
        let d = Distribution::new(vec![0.5 + 4e-10, 0.5]).unwrap();
        assert_abs_diff_eq!(d.pmf().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn family_uniform() {
        let d = FamilySpec::uniform(4).build().unwrap();
        assert_eq!(d.pmf(), &[0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn family_point_mass() {
        let d = FamilySpec::point_mass(3, 2).build().unwrap();
        assert_eq!(d.pmf(), &[0.0, 1.0, 0.0]);
        assert!(FamilySpec::point_mass(3, 4).build().is_err());
        assert!(FamilySpec::point_mass(3, 0).build().is_err());
    }

    #[test]
    fn family_zipf_exponent_one() {
        // Normalizing (1, 1/2, 1/3) gives (6/11, 3/11, 2/11).
        let d = FamilySpec::zipf(3, 1.0).build().unwrap();
        assert_abs_diff_eq!(d.pmf()[0], 6.0 / 11.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.pmf()[1], 3.0 / 11.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.pmf()[2], 2.0 / 11.0, epsilon = 1e-15);
        assert!(FamilySpec::zipf(3, 0.0).build().is_err());
    }

    #[test]
    fn family_two_point() {
        let d = FamilySpec::two_point(4, 0.7).build().unwrap();
        assert_abs_diff_eq!(d.pmf()[0], 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(d.pmf()[1], 0.3, epsilon = 1e-15);
        assert_eq!(&d.pmf()[2..], &[0.0, 0.0]);
        assert!(FamilySpec::two_point(1, 0.5).build().is_err());
        assert!(FamilySpec::two_point(2, 1.5).build().is_err());
    }

    #[test]
    fn family_dirichlet_deterministic() {
        let spec = FamilySpec::dirichlet(5, 1.0, 99);
        let a = spec.build().unwrap();
        let b = spec.build().unwrap();
        assert_eq!(a, b);
        assert_abs_diff_eq!(a.pmf().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(FamilySpec::dirichlet(5, -1.0, 0).build().is_err());
        let mut no_seed = spec;
        no_seed.seed = None;
        assert!(no_seed.build().is_err());
    }

    #[test]
    fn cdf_examples() {
        let d = Distribution::new(vec![0.25, 0.25, 0.5]).unwrap();
        let f = d.cdf();
        assert_abs_diff_eq!(f[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(f[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f[2], 1.0, epsilon = 1e-12);

        let point = FamilySpec::point_mass(4, 4).build().unwrap();
        assert_eq!(point.cdf(), vec![0.0, 0.0, 0.0, 1.0]);

        let uniform = FamilySpec::uniform(4).build().unwrap();
        let f = uniform.cdf();
        for (i, v) in f.iter().enumerate() {
            assert_abs_diff_eq!(*v, 0.25 * (i + 1) as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn sample_point_mass_is_constant() {
        let d = FamilySpec::point_mass(3, 1).build().unwrap();
        let s = d.sample(5, 12345);
        assert!(s.samples().iter().all(|&x| x == 1));
        assert_eq!(s.counts(), &[5, 0, 0]);
        assert_eq!(s.n(), 5);
    }

    #[test]
    fn sample_never_emits_zero_mass_elements() {
        let d = Distribution::new(vec![0.0, 1.0, 0.0]).unwrap();
        let s = d.sample(1000, 7);
        assert_eq!(s.counts(), &[0, 1000, 0]);
    }

    #[test]
    fn sample_is_deterministic() {
        let d = FamilySpec::uniform(10).build().unwrap();
        let a = d.sample(1000, 42);
        let b = d.sample(1000, 42);
        assert_eq!(a, b);
        let c = d.sample(1000, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn sample_counts_match_samples() {
        let d = FamilySpec::zipf(6, 1.5).build().unwrap();
        let s = d.sample(5000, 7);
        let mut recount = vec![0u64; 6];
        for &x in s.samples() {
            recount[(x - 1) as usize] += 1;
        }
        assert_eq!(s.counts(), recount.as_slice());
        assert_eq!(s.counts().iter().sum::<u64>(), 5000);
    }

    #[test]
    fn sample_uniform_k2_frequency() {
        // 6-sigma band for Binomial(1e6, 0.5).
        let d = FamilySpec::uniform(2).build().unwrap();
        let s = d.sample(1_000_000, 42);
        let f = s.counts()[0] as f64 / 1e6;
        assert!((0.497..=0.503).contains(&f), "frequency {f}");
    }

    #[test]
    fn sample_set_from_samples_validates_domain() {
        let s = SampleSet::from_samples(vec![1, 1, 2], 3, 0).unwrap();
        assert_eq!(s.counts(), &[2, 1, 0]);
        assert_eq!(
            SampleSet::from_samples(vec![1, 4], 3, 0).unwrap_err(),
            Error::OutOfDomain { value: 4, k: 3 }
        );
        assert!(SampleSet::from_samples(vec![], 3, 0).is_err());
    }

    #[test]
    fn sample_set_serializes_reduced_projection() {
        let s = SampleSet::from_samples(vec![1, 1, 3], 3, 9).unwrap();
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"n": 3, "seed": 9, "counts": [2, 0, 1]})
        );
    }

    #[test]
    fn dist_spec_json_forms() {
        let p: DistSpec = serde_json::from_str(r#"{"pmf": [0.5, 0.5]}"#).unwrap();
        assert_eq!(p.build().unwrap().pmf(), &[0.5, 0.5]);

        let f: DistSpec = serde_json::from_str(
            r#"{"family": "zipf", "k": 3, "params": {"exponent": 1.0}}"#,
        )
        .unwrap();
        assert_eq!(f.build().unwrap().k(), 3);

        let d: DistSpec = serde_json::from_str(
            r#"{"family": "dirichlet", "k": 4, "params": {"concentration": 1.0}, "seed": 5}"#,
        )
        .unwrap();
        assert_eq!(d.build().unwrap().k(), 4);
    }
}
