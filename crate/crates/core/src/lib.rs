//! Correlation-domain GNSS interference simulation and power-distortion
//! classification.
//!
//! The crate simulates complex correlator taps under four hypotheses
//! (clean, multipath, spoofing, jamming), measures received power and
//! correlation-profile distortion, and designs Monte-Carlo Bayes decision
//! regions over the (power, distortion) plane. Two distortion metrics are
//! provided: the normalized post-fit residual of a multi-tap maximum-likelihood
//! single-signal fit ([`mle`]) and the classic two-tap symmetric difference
//! ([`monitors::symmetric_difference`]).

pub mod bayes;
pub mod cli;
pub mod corrsim;
pub mod error;
pub mod hypothesis;
pub mod mle;
pub mod monitors;

pub use corrsim::{NoiseCovariance, NoiseModel, ScenarioParams, TapGrid, TapVector};
pub use error::{Error, Result};
pub use hypothesis::Hypothesis;
pub use mle::{MlConfig, SignalEstimate};
pub use monitors::{Detector, DetectorKind, Measurement, PowerModel};
