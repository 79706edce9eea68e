//! Distortion-leakage regions for two-phase hierarchical joint
//! source-channel coding, plus an operational layered-binning codec
//! simulator and exact small-instance verifiers.
//!
//! The crate is organized around six pieces:
//!
//! - [`prob`]: exact finite-alphabet probability calculus (joint tensors,
//!   entropies, mutual informations, the degraded source triple and the
//!   auxiliary description channel);
//! - [`dmc`]: discrete memoryless channels, capacity, symbol simulation;
//! - [`region`]: evaluation of the R1/R2 rate-leakage-distortion systems for
//!   a candidate auxiliary triple;
//! - [`search`]: leakage minimization and frontier sweeps over auxiliary
//!   triples;
//! - [`codec`]: Monte Carlo simulation of the two-phase layered-binning
//!   scheme with secret-key one-time-pad masking;
//! - [`oracle`]: independent brute-force verifiers (exact n-letter leakage,
//!   secure key index, definition-level mutual information).
//!
//! All core math is generic over the scalar type via [`real::Real`]; the
//! aliases at the crate root fix `f64`, which is what the simulator, the
//! oracles and the CLI use.

pub mod codec;
pub mod dmc;
pub mod error;
pub mod io;
pub mod oracle;
pub mod prob;
pub mod real;
pub mod region;
pub mod sampling;
pub mod search;
pub mod seed;
pub mod verify;

pub use error::{Error, Result};
pub use real::Real;

/// Double-precision instantiations of the generic core types.
pub type JointDist = prob::JointDist<f64>;
pub type CondKernel = prob::CondKernel<f64>;
pub type SourceModel = prob::SourceModel<f64>;
pub type AuxChannel = prob::AuxChannel<f64>;
pub type Channel = dmc::Channel<f64>;
pub type CapacityResult = dmc::CapacityResult<f64>;
pub type DistortionMeasure = region::DistortionMeasure<f64>;
pub type ScenarioConfig = region::ScenarioConfig<f64>;
pub type RegionPoint = region::RegionPoint<f64>;
pub type MiTerms = region::MiTerms<f64>;
