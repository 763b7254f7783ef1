//! File formats, experiment configs and the command implementations behind
//! the `pelab` binary. The numerics live in `pelab-core`.

pub mod build;
pub mod commands;
pub mod config;
pub mod output;
pub mod reproduce;

pub use commands::{Settings, Status};
pub use config::ExperimentConfig;
