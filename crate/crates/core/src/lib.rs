//! Two-terminal network reliability through survival signatures.
//!
//! Components fail at random times drawn from per-class lifetime
//! distributions. The crate estimates the survival signature of a network
//! either exactly (small networks), by spanning-tree Monte Carlo over sorted
//! lifetime samples, or by an active-learning loop around a random-forest
//! surrogate, and turns a signature into a reliability curve.

pub mod cli;
pub mod error;
pub mod forest;
pub mod io;
pub mod kst;
pub mod learner;
pub mod lifetimes;
pub mod net_model;
pub mod scalar;
pub mod signature;

pub use error::{Error, Result};
pub use net_model::{CombinationKey, FailureMode, Network, StateVector};
pub use scalar::Scalar;
pub use signature::{ExactPhi, Provenance, SignatureTable};

pub type Distribution = lifetimes::LifetimeDistribution<f64>;
pub type Distribution32 = lifetimes::LifetimeDistribution<f32>;
pub type Sample = lifetimes::LifetimeSample<f64>;
pub type Pool = lifetimes::SamplePool<f64>;
pub type Chain = kst::StateChain<f64>;
pub type Curve = signature::ReliabilityCurve<f64>;
pub type Curve32 = signature::ReliabilityCurve<f32>;
