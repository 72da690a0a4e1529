//! Experiment driver for the kinetic-hj schemes: configuration, studies,
//! error tables and CSV artifacts.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod metric;
pub mod studies;

pub use config::{ExperimentConfig, InitPreset, SchemeKind, StudyMode};
pub use error::{HarnessError, Result};
pub use metric::{error_metric, ErrorRow, ErrorTable};
