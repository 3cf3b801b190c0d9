//! Experiment harness around `spwt-core`: configuration files, seeded
//! multi-trial studies and CSV output.
//!
//! The binary `spwt` exposes one subcommand per study (`design`, `surface`,
//! `sweep-snr`, `convergence`, `flops`); each is a thin wrapper over a
//! function in [`studies`] that returns a [`table::Table`].

pub mod config;
pub mod error;
pub mod studies;
pub mod table;

pub use config::ExperimentConfig;
pub use error::CliError;
