//! Minimum-satellite constellation design over repeating ground tracks.
//!
//! A common-ground-track constellation observed from a fixed target is a
//! circular convolution of the seed satellite's access profile with a binary
//! pattern vector. Pattern design then reduces to a covering problem over a
//! stack of circulant matrices, solved either by a quasi-symmetric scan or by
//! exact binary integer programming.
//!
//! Orbit and geometry code is generic over [`scalar::Real`]; the LP is
//! generic over [`scalar::LpScalar`]. The aliases below fix common choices.

pub mod bilp;
pub mod coverage;
pub mod geodesy;
pub mod orbit;
pub mod phasing;
pub mod quasi_symmetric;
pub mod scalar;
pub mod scenario;

pub use coverage::{
    circular_convolve, evaluate_system, CirculantOperator, CoverageProblem, CoverageRequirement, CoverageTimeline,
    PatternVector, SystemEvaluation,
};
pub use geodesy::{sample_access_profile, seed_access_profile, AccessProfile, TimeGrid};
pub use orbit::{Epoch, PeriodRatio};
pub use scenario::{parse_scenario, RunReport, Scenario};

/// Exact scalar for small LP relaxations.
pub type ExactRational = num_rational::BigRational;

pub type Constants = orbit::PhysicalConstants<f64>;
pub type Constants32 = orbit::PhysicalConstants<f32>;
pub type Elements = orbit::RgtElements<f64>;
pub type Elements32 = orbit::RgtElements<f32>;
pub type Orbit = orbit::RgtOrbit<f64>;
pub type Orbit32 = orbit::RgtOrbit<f32>;
pub type Target = geodesy::TargetPoint<f64>;
pub type Target32 = geodesy::TargetPoint<f32>;
pub type Members = phasing::MemberElements<f64>;
pub type Relaxation = bilp::RelaxationBound<f64>;
pub type ExactRelaxation = bilp::RelaxationBound<ExactRational>;
