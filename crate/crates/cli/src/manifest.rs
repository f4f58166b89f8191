use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    format_version: u64,
    argv: &'a [String],
    seed: Option<u64>,
    threads: usize,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    wall_seconds: f64,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Inputs, outputs and timing of one run, written next to its outputs.
pub struct RunRecord {
    argv: Vec<String>,
    started: Instant,
    pub seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl RunRecord {
    pub fn new(argv: Vec<String>) -> Self {
        Self { argv, started: Instant::now(), seed: None, inputs: Vec::new(), outputs: Vec::new() }
    }

    pub fn input(&mut self, p: &Path) {
        self.inputs.push(p.to_path_buf());
    }

    pub fn output(&mut self, p: &Path) {
        self.outputs.push(p.to_path_buf());
    }

    /// Write `<first output>.manifest.json`; does nothing when no file was
    /// written.
    pub fn finish(self) -> Result<Option<PathBuf>> {
        let Some(first) = self.outputs.first() else {
            return Ok(None);
        };
        let digest = |ps: &[PathBuf]| -> Result<Vec<FileDigest>> {
            ps.iter()
                .map(|p| Ok(FileDigest { path: p.display().to_string(), sha256: sha256_file(p)? }))
                .collect()
        };
        let manifest = Manifest {
            tool: "sparsenet",
            version: env!("CARGO_PKG_VERSION"),
            format_version: sparsenet::net::FORMAT_VERSION,
            argv: &self.argv,
            seed: self.seed,
            threads: rayon::current_num_threads(),
            inputs: digest(&self.inputs)?,
            outputs: digest(&self.outputs)?,
            wall_seconds: self.started.elapsed().as_secs_f64(),
        };
        let mut name = first.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        let path = first.with_file_name(name);
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(Some(path))
    }
}
