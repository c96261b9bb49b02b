//! Experiment harness: field files, slope fits, configuration and drivers.

pub mod config;
pub mod experiments;
pub mod fit;
pub mod io;

pub use config::{ExperimentConfig, KTol, ProblemKind};
pub use experiments::{converge, sweep_omega, ConvergeOptions, ErrorReport, Problem, SweepReport};
pub use fit::{fit_slope, FitWindow, SlopeFit};
pub use io::{load_field, save_field};
