//! Slot-level simulation and analysis of collision-avoiding WLAN contention.
//!
//! Covers plain CSMA/CA (with or without binary exponential backoff),
//! CSMA/ECA, which backs off deterministically after a success, and
//! CSMA/E2CA, which keeps the deterministic backoff through `k - 1` failures.
//!
//! - [`protocol`]: the per-station backoff state machine.
//! - [`channel`]: the slot loop, lossy channel and absorption detection.
//! - [`markov`]: the absorbing chain predicting slots to collision-free operation.
//! - [`adaptation`]: beacon-driven `CW_min` control.
//! - [`metrics`]: slot accounting, airtime and efficiency.
//! - [`experiment`]: replications and confidence intervals.
//!
//! The analytical code is generic over [`Scalar`]; the aliases below fix it to
//! `f64` or to exact rationals.

pub mod adaptation;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod markov;
pub mod metrics;
pub mod protocol;
pub mod scalar;

pub use channel::{run, slots_to_absorption, ChannelModel, SimConfig, Simulator, SlotOutcome};
pub use error::{Error, Result};
pub use metrics::{MetricsReport, SlotCounts, SlotKind, TimingModel};
pub use protocol::{deterministic_backoff, Mode, ProtocolConfig, StationState, TxResult, Variant};
pub use scalar::Scalar;

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

pub type TransitionMatrixF64 = markov::TransitionMatrix<f64>;
pub type ExactTransitionMatrix = markov::TransitionMatrix<Rational>;
pub type AbsorptionResultF64 = markov::AbsorptionResult<f64>;
pub type ExactAbsorptionResult = markov::AbsorptionResult<Rational>;
