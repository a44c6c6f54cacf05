//! Experiment driver behind the `patchlab` binary.
//!
//! Each subcommand writes its artifacts, a `report.json` listing every
//! checked property, a `failure.json` when any property fails, and a
//! `run_record.json` whose manifest carries SHA-256 digests of all other files.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

use std::fmt;

pub use config::RunConfig;
pub use output::{sha256_hex, Artifact, Check, Outcome, RunRecord};

/// Process exit codes.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_PROPERTY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Invalid configuration or parameters; exit code 2.
    Config(String),
    /// A run aborted part way; reported as a property failure.
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Runtime(m) => write!(f, "run failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<patchlab_core::Error> for CliError {
    fn from(e: patchlab_core::Error) -> Self {
        use patchlab_core::Error as E;
        match e {
            E::Config(_) | E::Parameter(_) | E::Domain(_) | E::Band(_) | E::Data(_) | E::Reality(_) => {
                Self::Config(e.to_string())
            }
            _ => Self::Runtime(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Dispersion,
    Resonance,
    Simulate,
    Lifespan,
    ParadiffCheck,
    NormalformCheck,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Self::Dispersion => "dispersion",
            Self::Resonance => "resonance",
            Self::Simulate => "simulate",
            Self::Lifespan => "lifespan",
            Self::ParadiffCheck => "paradiff-check",
            Self::NormalformCheck => "normalform-check",
        }
    }

    pub fn run(self, cfg: &RunConfig) -> Result<Outcome, CliError> {
        match self {
            Self::Dispersion => commands::cmd_dispersion(cfg),
            Self::Resonance => commands::cmd_resonance(cfg),
            Self::Simulate => commands::cmd_simulate(cfg),
            Self::Lifespan => commands::cmd_lifespan(cfg),
            Self::ParadiffCheck => commands::cmd_paradiff_check(cfg),
            Self::NormalformCheck => commands::cmd_normalform_check(cfg),
        }
    }
}
