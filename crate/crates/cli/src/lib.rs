//! Command-line front end for `som3d`: CSV ingestion, run configuration,
//! model artifacts and the `train`, `evaluate`, `export-density` and
//! `inspect` subcommands.

pub mod artifact;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod records;

pub use artifact::ModelArtifact;
pub use cli::{run, Cli, Command};
pub use commands::{cmd_evaluate, cmd_export_density, cmd_inspect, cmd_train, ProjectionChoice};
pub use config::{RunConfig, OUT_DIR_ENV};
pub use error::{exit_code, CliError};
pub use records::{load_records, ColumnMapping};
