//! Full-state-feedback power-loop design for grid-forming converters.
//!
//! The crate covers the whole design chain for the coupled active/reactive
//! power loops of a droop-controlled grid-forming converter behind a general
//! `R + jX` line impedance:
//!
//! 1. [`powerflow`]: nonlinear power transfer, steady-state operating point,
//!    small-signal sensitivities.
//! 2. [`statespace`]: the extended error/angle plant `(A, B)` and its
//!    controllability matrix.
//! 3. [`design`] and [`placement`]: time-domain specifications to eigenvalue
//!    targets, then a 2×3 gain matrix placing the closed-loop eigenvalues.
//! 4. [`sim`] and [`metrics`]: nonlinear and linear closed-loop simulation,
//!    step-response overshoot and settling time.
//! 5. [`config`], [`report`], [`pipeline`], [`verify`]: the batch front end
//!    used by the `gridform` binary.

pub mod config;
pub mod cubic;
pub mod design;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod placement;
pub mod powerflow;
pub mod report;
pub mod sim;
pub mod statespace;
pub mod verify;

pub use design::{EigenvalueTargets, PerformanceSpec};
pub use error::{Error, Result};
pub use metrics::StepMetrics;
pub use placement::{FeedbackGain, ParameterMatrix};
pub use powerflow::{LinearizedGains, OperatingPoint, SystemParams};
pub use sim::{SetpointEvent, SetpointTarget, SimConfig, Trajectory};
pub use statespace::{ControllabilityReport, PlantMatrices};

pub use nalgebra::Complex;
