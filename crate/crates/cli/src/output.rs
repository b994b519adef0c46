//! Trajectory CSV files and run manifests.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use plap_core::integrate::Trajectory;
use plap_core::systems::to_profile;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::format::{sig, to_json, CSV_DIGITS};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Trajectory rows `tau,y,Y,r,w,dw`, one per accepted step.
pub fn trajectory_csv(t: &Trajectory) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["tau", "y", "Y", "r", "w", "dw"])?;
    for s in &t.states {
        let prof = to_profile(s, &t.params);
        w.write_record([s.tau, s.y, s.big_y, prof.r, prof.w, prof.dw].map(|x| sig(x, CSV_DIGITS)))?;
    }
    Ok(w.into_inner()?)
}

/// Event rows `kind,tau,y,Y`.
pub fn events_csv(t: &Trajectory) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "tau", "y", "Y"])?;
    for e in &t.events {
        let kind = serde_json::to_value(e.kind)?;
        let kind = kind.as_str().unwrap_or_default().to_string();
        w.write_record([kind, sig(e.tau, CSV_DIGITS), sig(e.state.y, CSV_DIGITS), sig(e.state.big_y, CSV_DIGITS)])?;
    }
    Ok(w.into_inner()?)
}

/// `stem.events.csv` and `stem.manifest.json` next to `out`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}.{suffix}"))
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    /// File name relative to the manifest.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub config: serde_json::Value,
    pub config_hash: String,
    pub tool_version: &'static str,
    pub outputs: Vec<OutputEntry>,
    pub wall_time_s: f64,
}

/// Collects output files for one run and writes them with a manifest.
pub struct Artifacts {
    command: String,
    params: serde_json::Value,
    config: serde_json::Value,
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Artifacts {
    pub fn new(command: &str, params: impl Serialize, config: impl Serialize) -> Result<Self> {
        Ok(Self {
            command: command.into(),
            params: serde_json::to_value(params)?,
            config: serde_json::to_value(config)?,
            files: Vec::new(),
        })
    }

    pub fn add(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.files.push((path, bytes));
    }

    pub fn config_hash(&self) -> Result<String> {
        let canon = to_json(&serde_json::json!({ "params": self.params, "config": self.config }))?;
        Ok(sha256_hex(canon.as_bytes()))
    }

    /// Writes every file, then the manifest at `manifest_path`.
    pub fn write(self, manifest_path: &Path, elapsed: Duration) -> Result<RunManifest> {
        let mut outputs = Vec::new();
        for (path, bytes) in &self.files {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
            outputs.push(OutputEntry {
                path: path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len(),
            });
        }
        let manifest = RunManifest {
            command: self.command.clone(),
            config_hash: self.config_hash()?,
            params: self.params,
            config: self.config,
            tool_version: TOOL_VERSION,
            outputs,
            wall_time_s: elapsed.as_secs_f64(),
        };
        std::fs::write(manifest_path, to_json(&manifest)?)
            .with_context(|| format!("writing {}", manifest_path.display()))?;
        Ok(manifest)
    }
}
