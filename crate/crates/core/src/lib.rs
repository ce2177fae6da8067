//! Trial-by-trial motor adaptation models.
//!
//! Two update rules are provided:
//!
//! * the standard state-space model `x' = A x + B e`, and
//! * the coupled model `x' = (1 - P(e)) x + P(e) K`, where a single
//!   error-dependent rate `P` sets both learning and forgetting and the drive
//!   target `K = sign(e) k`.
//!
//! On top of these the crate simulates clamped-error, rotation and washout
//! protocols, extracts asymptotes and initial slopes, reports where the
//! standard model's fixed point contradicts the clamped-error features,
//! checks which general linear updates share a single asymptote, and fits
//! either model to observed trajectories.

pub mod analysis;
pub mod error;
pub mod fitting;
pub mod io;
pub mod model;
pub mod paradigm;
pub mod rate;
pub mod report;

pub use error::{Error, Result};
pub use model::{
    drive_target, fixed_point_coupled, fixed_point_standard, step_coupled, step_standard,
    CoupledModelParams, ErrorSignal, Model, StandardSsmParams, TrialState,
};
pub use paradigm::{
    simulate, simulate_until_converged, ConvergedRun, Paradigm, Protocol, Trajectory, TrialRecord,
};
pub use rate::{learning_rate, RateFunction};
