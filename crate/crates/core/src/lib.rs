//! Multi-object tracking with a generalized labeled multi-Bernoulli (GLMB)
//! filter that supports multiple point detections per object.
//!
//! The filter represents the multi-object posterior as a weighted set of
//! association hypotheses over labeled tracks, with each track's kinematic
//! state carried by a weighted particle cloud under a constant-turn-rate-
//! and-velocity motion model. Successor hypotheses are generated by a
//! two-stage sampler (Bernoulli track death, then independent per-measurement
//! categorical association) that places no limit on the number of detections
//! a track may claim, so hypothesis generation is batch-parallel over
//! hypotheses, measurements, and tracks.
//!
//! All stochastic operations draw from counter-style keyed random streams
//! ([`rng::StreamKey`]), so filter output is byte-identical for a fixed seed
//! regardless of thread count.
//!
//! Core math is generic over the scalar type via [`Real`] (implemented for
//! `f32` and `f64`); concrete `f64` aliases are exported at the crate root.

pub mod dynamics;
pub mod error;
pub mod likelihood;
pub mod metrics;
pub mod num;
pub mod rng;
pub mod sampler;
pub mod scenario;
pub mod types;
pub mod update;
pub mod weights;

pub use error::{Error, Result};
pub use num::Real;

/// Double-precision aliases for the main filter and scenario types.
pub type Particle64 = types::Particle<f64>;
pub type LabeledTrack64 = types::LabeledTrack<f64>;
pub type Hypothesis64 = types::Hypothesis<f64>;
pub type GlmbPosterior64 = types::GlmbPosterior<f64>;
pub type MeasurementSet64 = types::MeasurementSet<f64>;
pub type TrackerConfig64 = types::TrackerConfig<f64>;
pub type CompatibilityMatrix64 = likelihood::CompatibilityMatrix<f64>;
pub type Scenario64 = scenario::Scenario<f64>;
pub type ScenarioParams64 = scenario::ScenarioParams<f64>;
pub type GroundTrack64 = scenario::GroundTrack<f64>;
pub type Region64 = scenario::Region<f64>;
pub type StepOutput64 = update::StepOutput<f64>;
pub type TrackEstimate64 = update::TrackEstimate<f64>;

/// Single-precision aliases for memory-constrained deployments.
pub type Particle32 = types::Particle<f32>;
pub type GlmbPosterior32 = types::GlmbPosterior<f32>;
pub type TrackerConfig32 = types::TrackerConfig<f32>;
