//! Config-driven experiment runner, output writers, the constants report and
//! the coupling-diagnostics sweep.

pub mod config;
pub mod diagnose;
pub mod emit;
pub mod run;
pub mod verify;

pub use config::{AcceptanceThresholds, ExperimentConfig, SourceSelection, SpectrumSpec, Theorem};
pub use diagnose::{diagnose_sweep, parse_grid, DiagnoseRow};
pub use emit::{emit, render, OutputFormat};
pub use run::{run, ExactLaw, ExperimentResult, SourceResult};
pub use verify::{diverging_sup_distance, verify_constants, wimp_sup, VerificationReport};
