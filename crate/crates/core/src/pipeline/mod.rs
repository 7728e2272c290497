//! Configuration, end-to-end runs, sweeps over `R` and verification.

pub mod config;
pub mod run;
pub mod sweep;
pub mod verify;

pub use config::{parse_config, RunConfig};
pub use run::{limit_profiles, run_pipeline, Profiles, RunSummary, Setup};
pub use sweep::{sweep_r, SweepEntry, SweepRow};
pub use verify::{verify, CheckRecord, VerificationReport, CHECK_IDS};
