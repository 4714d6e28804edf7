//! Steady-state Gaussian entanglement between the filtered output fields of
//! a two-cavity optomechanical system, and dense-coding rates built on it.
//!
//! The pipeline runs [`params::derive`] → [`dynamics::build`] →
//! [`spectral::output_cm`] → [`spectral::reduce_two_mode`], then
//! [`gaussian`] and [`densecoding`] act on the resulting block.

// `!(x >= lo)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod constants;
pub mod conventions;
pub mod densecoding;
pub mod dynamics;
pub mod error;
pub mod figures;
pub mod gaussian;
pub mod params;
pub mod pipeline;
pub mod quadrature;
pub mod spectral;
pub mod sweep;

pub use densecoding::{capacities, rate_om, rate_point, Capacities, RatePoint};
pub use dynamics::{build, stability, LinearModel, StabilityReport};
pub use error::{Error, Result};
pub use gaussian::{duan_sum, log_negativity, pt_symplectic, SymplecticPair};
pub use params::{derive, DerivedParams, DetuningMode, PhysicalParams};
pub use pipeline::{entanglement, evaluate, EntanglementReport, Evaluation};
pub use spectral::{output_cm, reduce_two_mode, FilterSpec, OutputCM, OutputFilters, TwoModeBlock};
pub use sweep::{run_sweep, Axis, Observable, SweepResult, SweepSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
