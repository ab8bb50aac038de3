//! Front end for `leray-core`: spec parsing and the subcommands behind the
//! `leray` binary.

pub mod commands;
pub mod error;
pub mod spec;

pub use error::CliError;
