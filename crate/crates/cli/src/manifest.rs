//! Output directory bookkeeping and `manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub verb: String,
    pub seed: u64,
    pub threads: usize,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
    pub timings: Vec<Timing>,
}

/// Writes artifacts into one directory and records them for the manifest.
pub struct Artifacts {
    dir: PathBuf,
    pub manifest: Manifest,
}

impl Artifacts {
    pub fn new(dir: &Path, verb: String, seed: u64, threads: usize) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            manifest: Manifest {
                tool: "bergman-lab",
                version: env!("CARGO_PKG_VERSION"),
                verb,
                seed,
                threads,
                inputs: Vec::new(),
                outputs: Vec::new(),
                timings: Vec::new(),
            },
        })
    }

    pub fn input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path)?;
        self.manifest.inputs.push(FileEntry {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len(),
        });
        Ok(bytes)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.manifest.outputs.push(FileEntry { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, v: &impl Serialize) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    /// Runs `f` and records its wall time under `stage`.
    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let t0 = Instant::now();
        let out = f(self);
        self.manifest.timings.push(Timing { stage: stage.to_string(), seconds: t0.elapsed().as_secs_f64() });
        out
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        let path = self.dir.join("manifest.json");
        self.manifest.outputs.sort_by(|a, b| a.path.cmp(&b.path));
        let mut s = serde_json::to_string_pretty(&self.manifest)?;
        s.push('\n');
        fs::write(&path, s)?;
        Ok(path)
    }
}
