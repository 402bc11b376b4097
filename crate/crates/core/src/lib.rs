//! Single-photon interferometer networks.
//!
//! A network is written in a small line-oriented netlist language, validated
//! into an immutable [`Network`], then made numeric with
//! [`Network::apply_config`]. On the numeric form you can propagate
//! amplitudes ([`engine`]), post-select on a detector and read weak values
//! ([`tsvf`]), expand the explicit environment coupling to any order
//! ([`envtrace`]), run communication sessions ([`protocol`]), and solve for
//! free phases that make chosen ports dark ([`tuner`]).
//!
//! The numeric core is generic over the real scalar (`f32` or `f64`) through
//! [`Scalar`]. The `*32` aliases below name the single-precision variants;
//! the unsuffixed names default to `f64`.

pub mod engine;
pub mod envtrace;
pub mod netlist;
pub mod protocol;
pub mod scalar;
pub mod tsvf;
pub mod tuner;

pub use engine::{ConcreteNetwork, EngineError, ForwardState, OutcomeDistribution};
pub use envtrace::{EnvError, EnvModel, EnvState};
pub use netlist::{Diagnostic, Network, NetlistError};
pub use scalar::Scalar;
pub use tsvf::{BackwardState, TraceMap, TsvfError};

/// Complex amplitude in double precision.
pub type C64 = num_complex::Complex<f64>;

pub type ConcreteNetwork32 = ConcreteNetwork<f32>;
pub type ForwardState32 = ForwardState<f32>;
pub type OutcomeDistribution32 = OutcomeDistribution<f32>;
pub type BackwardState32 = BackwardState<f32>;
pub type TraceMap32 = TraceMap<f32>;
pub type EnvState32 = EnvState<f32>;
