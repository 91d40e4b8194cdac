//! Library side of the `wavebreak` command-line tool: the analysis pipeline,
//! scenario registry, experiment harness, and file formats. The binary in
//! `main.rs` is a thin argument-parsing layer over these functions.

#![forbid(unsafe_code)]

pub mod commands;
pub mod error;
pub mod experiment;
pub mod io;
pub mod pipeline;
pub mod scenarios;

pub use error::{CliError, CliResult, ErrorClass};
pub use pipeline::{analyze, AnalysisSettings, ResultDocument, RESULT_SCHEMA_VERSION};

// keeps the README code example compiling
#[doc = include_str!("../../../README.md")]
#[cfg(doctest)]
pub struct ReadmeDoctests;
