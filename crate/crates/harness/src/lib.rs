//! Experiment driver for `cubeperc`: TOML sweep configs, deterministic CSV
//! output and golden-file verification.

pub mod config;
pub mod golden;
pub mod sweep;

pub use config::{ConfigError, Experiment, SweepConfig};
pub use golden::{verify_goldens, GoldenError, GoldenReport};
pub use sweep::{run_sweep, SweepRow, SweepTable};
