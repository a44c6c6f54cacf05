//! Artifacts, property reports and the run record.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{CliError, RunConfig, Subcommand, EXIT_PASS, EXIT_PROPERTY};

pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn text(name: &str, body: String) -> Self {
        Self {
            name: name.to_string(),
            bytes: body.into_bytes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub invariant: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(invariant: &str, passed: bool, detail: String) -> Self {
        Self {
            invariant: invariant.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub subcommand: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub subcommand: String,
    pub config: RunConfig,
    pub build: String,
    pub wall_time_s: f64,
    pub exit_code: i32,
    pub files: Vec<ManifestEntry>,
}

impl RunRecord {
    /// Digest mismatches against the files in `dir`, as readable messages.
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter_map(|e| match std::fs::read(dir.join(&e.file)) {
                Ok(b) if sha256_hex(&b) == e.sha256 => None,
                Ok(_) => Some(format!("{}: digest mismatch", e.file)),
                Err(err) => Some(format!("{}: {err}", e.file)),
            })
            .collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn build_id() -> String {
    format!("patchlab {}", env!("CARGO_PKG_VERSION"))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

/// Runs `cmd`, persists everything under `dir` and returns the exit code.
/// Configuration errors are returned before anything is written.
pub fn execute(cmd: Subcommand, cfg: &RunConfig, dir: &Path) -> Result<i32, CliError> {
    let start = Instant::now();
    let outcome = match cmd.run(cfg) {
        Ok(o) => o,
        Err(CliError::Runtime(msg)) => Outcome {
            artifacts: Vec::new(),
            checks: vec![Check::new("run completes", false, msg)],
        },
        Err(e) => return Err(e),
    };
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;

    let passed = outcome.passed();
    let mut files = outcome.artifacts;
    let report = Report {
        subcommand: cmd.name().to_string(),
        passed,
        checks: outcome.checks.clone(),
    };
    files.push(Artifact::text("report.json", to_json(&report)));
    if !passed {
        let failed: Vec<&Check> = outcome.checks.iter().filter(|c| !c.passed).collect();
        files.push(Artifact::text(
            "failure.json",
            to_json(&serde_json::json!({ "subcommand": cmd.name(), "violations": failed })),
        ));
    } else if dir.join("failure.json").exists() {
        let _ = std::fs::remove_file(dir.join("failure.json"));
    }

    let mut manifest = Vec::new();
    for a in &files {
        std::fs::write(dir.join(&a.name), &a.bytes)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", a.name)))?;
        manifest.push(ManifestEntry {
            file: a.name.clone(),
            bytes: a.bytes.len() as u64,
            sha256: sha256_hex(&a.bytes),
        });
    }
    let exit_code = if passed { EXIT_PASS } else { EXIT_PROPERTY };
    let record = RunRecord {
        subcommand: cmd.name().to_string(),
        config: cfg.clone(),
        build: build_id(),
        wall_time_s: start.elapsed().as_secs_f64(),
        exit_code,
        files: manifest,
    };
    std::fs::write(dir.join("run_record.json"), to_json(&record))
        .map_err(|e| CliError::Config(format!("cannot write run_record.json: {e}")))?;
    Ok(exit_code)
}
