//! Experiment configuration, drivers and recorded output.

pub mod config;
pub mod record;
pub mod run;
pub mod speedup;
pub mod verify;

pub use config::{BodyConfig, Experiment, ExperimentConfig, ForceConfig, GridConfig, ModelKind};
pub use record::{Row, TimeSeriesRecord};
pub use run::{run_fom, run_model, run_rom, RunOutput, RunSummary, Setup};
pub use speedup::{measure, SpeedupRow};
pub use verify::{run_checks, Check};
