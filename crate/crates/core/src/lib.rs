//! Grover search with arbitrary oracle and diffusion phases: a reduced
//! two-dimensional simulator, a full state-vector cross-check, phase sweeps,
//! Hill-function fitting and multi-size robustness scans.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod fullstate;
pub mod grover;
pub mod hillfit;
pub mod pipeline;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use grover::{
    evolve, phase_matching_angle, run, Kernel, PhaseSchedule, ProblemSpec, ReducedState,
    ScheduleKind, SignPattern, SignRule,
};
pub use hillfit::{fit_hill, fit_secondary, hill_eval, FitResult, HillParams, ModelId};
pub use sweep::{cross_section, grid, robustness_interval, Dependence, SampleSet};
