//! Learning discrete distributions on a known finite domain, end to end:
//! distance and divergence measures, the empirical and add-constant
//! estimators, closed-form sample-size certificates with evaluable tail
//! bounds, and a seeded Monte Carlo harness that checks each guarantee
//! empirically.
//!
//! Determinism is a design contract throughout: sampling is a pure
//! function of `(distribution, n, seed)` via ChaCha8, per-trial seeds
//! derive from a fixed splitmix64 mix, and experiment reports are bitwise
//! identical across thread counts.

pub mod bounds;
pub mod dist;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod metrics;
pub mod verify;

pub use bounds::{BoundCertificate, BoundRequest, HellingerTier};
pub use dist::{DistSpec, Distribution, FamilyName, FamilyParams, FamilySpec, SampleSet};
pub use error::{Error, Result};
pub use estimators::EstimatorKind;
pub use harness::{ExperimentConfig, ExperimentReport, KlUnboundedReport, TailCurveReport, Verdict};
pub use metrics::{ExtendedReal, InequalityReport, MetricKind};
