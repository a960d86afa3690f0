//! The `handsmith` command-line pipeline.
//!
//! Each stage is a subcommand that reads files and writes files:
//!
//! 1. `validate` parses every configured input and reports problems.
//! 2. `fit-bones` places the bone template in the target hand.
//! 3. `gen-tissue` builds the soft-tissue shell around a fitted bone.
//! 4. `select-thickness` picks the wall offset from deformation curves.
//! 5. `simulate` sweeps finger designs through cable displacement.
//!
//! Exit status is 0 on success, 1 when a stage fails on its data and 2 on a
//! usage or configuration error.

pub mod args;
pub mod commands;
pub mod config;
pub mod demo;
pub mod error;

pub use args::Cli;
pub use commands::run;
pub use config::PipelineConfig;
pub use error::{CliError, ExitStatus};
