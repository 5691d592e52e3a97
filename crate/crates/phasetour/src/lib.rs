//! Persistence, experiment orchestration and the command line front end for
//! `phasetour-core`.
//!
//! Every file written here is named by an [`ArtifactId`], the SHA-256 prefix of
//! its canonical content, and every load re-hashes what it reads. A result
//! manifest embeds the resolved [`ExperimentConfig`], so any run can be replayed
//! into a fresh directory and compared file by file.

pub mod artifact;
pub mod cli;
pub mod config;
mod error;
pub mod gridfile;
pub mod matrixfile;
pub mod plot;
pub mod report;
pub mod runner;

use std::path::Path;

use serde::Serialize;

pub use crate::artifact::{content_hash, ArtifactId};
pub use crate::config::{ConfigPatch, ExperimentConfig};
pub use crate::error::{Error, Result};
pub use crate::runner::{replay, run_experiment, verify_result, RunOutcome};

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::format("<json>", e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}
