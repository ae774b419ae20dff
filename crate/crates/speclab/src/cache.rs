//! Binary eigenvector cache keyed by (spec hash, p).

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SpecError};
use crate::spectral::SpectralResult;
use crate::torus::TorusSpec;

#[derive(Serialize, Deserialize)]
struct Entry {
    spec: TorusSpec,
    eigenvalues: Vec<f64>,
    /// (re, im) pairs.
    vectors: Vec<Vec<(f64, f64)>>,
    cluster: usize,
    max_residual: f64,
}

/// Hex SHA-256 of the canonical JSON of the spec.
pub fn spec_hash(t: &TorusSpec) -> String {
    let json = serde_json::to_vec(t).expect("spec serializes");
    hex::encode(Sha256::digest(json))
}

pub fn cache_path(dir: &Path, t: &TorusSpec) -> PathBuf {
    dir.join(format!("{}-p{}.bin", spec_hash(t), t.p))
}

pub fn store(dir: &Path, r: &SpectralResult) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let e = Entry {
        spec: r.spec.clone(),
        eigenvalues: r.eigenvalues.clone(),
        vectors: r.vectors.iter().map(|v| v.iter().map(|c| (c.re, c.im)).collect()).collect(),
        cluster: r.cluster,
        max_residual: r.max_residual,
    };
    let path = cache_path(dir, &r.spec);
    let bytes = bincode::serialize(&e).map_err(|e| SpecError::Io(e.to_string()))?;
    fs::write(&path, bytes)?;
    Ok(path)
}

/// The cached result for `t`, if present and written for the same spec.
pub fn load(dir: &Path, t: &TorusSpec) -> Result<Option<SpectralResult>> {
    let path = cache_path(dir, t);
    if !path.exists() {
        return Ok(None);
    }
    let e: Entry = bincode::deserialize(&fs::read(&path)?).map_err(|e| SpecError::Io(e.to_string()))?;
    if &e.spec != t {
        return Ok(None);
    }
    Ok(Some(SpectralResult {
        spec: e.spec,
        eigenvalues: e.eigenvalues,
        vectors: e.vectors.into_iter().map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).collect(),
        cluster: e.cluster,
        max_residual: e.max_residual,
    }))
}
