//! Run configuration, read from a JSON file and overridden by flags.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use speclab::{default_grid, Gauge, TorusSpec};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Verb {
    Expand,
    Spectrum,
    Bergman,
    Dos,
    Embed,
    Verify,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Whatever exact mode the jets file declares.
    #[default]
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    #[default]
    Torus,
    Cp1,
}

fn one() -> f64 {
    1.0
}
fn unit_sides() -> [f64; 2] {
    [1.0, 1.0]
}
fn landau_y() -> Gauge {
    Gauge::LandauY
}
fn two() -> usize {
    2
}
fn four() -> usize {
    4
}
fn first_order() -> usize {
    1
}
fn eight() -> usize {
    8
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Must match the command-line verb when given.
    #[serde(default)]
    pub verb: Option<Verb>,
    /// Jets file for `expand` and `verify`, relative to the config file.
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub geometry: Geometry,
    /// Tensor powers.
    #[serde(default)]
    pub p: Vec<u32>,
    /// Points per side; the default grid rule per p when absent.
    #[serde(default)]
    pub grid: Option<usize>,
    #[serde(default = "one")]
    pub degree: f64,
    #[serde(default = "unit_sides")]
    pub sides: [f64; 2],
    #[serde(default = "landau_y")]
    pub gauge: Gauge,
    #[serde(default = "two")]
    pub q_max: usize,
    #[serde(default = "four")]
    pub r_max: usize,
    /// Number of 1/p powers fitted beyond the leading term.
    #[serde(default = "first_order")]
    pub order: usize,
    /// Fit and pullback sample points per side.
    #[serde(default = "eight")]
    pub samples: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let mut c: RunConfig = serde_json::from_str(&text)?;
        if let (Some(input), Some(dir)) = (&c.input, path.parent()) {
            if input.is_relative() {
                c.input = Some(dir.join(input));
            }
        }
        Ok(c)
    }

    pub fn check(&self, verb: Verb) -> Result<()> {
        if let Some(v) = self.verb {
            if v != verb {
                return Err(CliError::Validation(format!("config is for {v:?}, command line asks for {verb:?}")));
            }
        }
        let needs_input = matches!(verb, Verb::Expand | Verb::Verify);
        if needs_input && self.input.is_none() {
            return Err(CliError::Validation("`input` (a jets file) is required".into()));
        }
        if !needs_input && self.p.is_empty() {
            return Err(CliError::Validation("`p` must list at least one tensor power".into()));
        }
        if self.geometry == Geometry::Cp1 && !matches!(verb, Verb::Bergman | Verb::Embed) {
            return Err(CliError::Validation(format!("{verb:?} is only available on the torus")));
        }
        if self.samples == 0 {
            return Err(CliError::Validation("`samples` must be positive".into()));
        }
        Ok(())
    }

    pub fn torus(&self, p: u32) -> TorusSpec {
        TorusSpec {
            l1: self.sides[0],
            l2: self.sides[1],
            degree: self.degree,
            p,
            n: self.grid.unwrap_or_else(|| default_grid(p, self.degree)),
            gauge: self.gauge,
        }
    }

    pub fn sorted_powers(&self) -> Vec<u32> {
        let mut ps = self.p.clone();
        ps.sort_unstable();
        ps.dedup();
        ps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_unknown_fields() {
        let c: RunConfig = serde_json::from_str(r#"{"p": [8, 4, 8]}"#).unwrap();
        assert_eq!(c.mode, Mode::Exact);
        assert_eq!(c.sorted_powers(), vec![4, 8]);
        assert_eq!(c.torus(8).n, default_grid(8, 1.0));
        assert!(c.check(Verb::Spectrum).is_ok());
        assert!(c.check(Verb::Expand).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"pp": 1}"#).is_err());
    }

    #[test]
    fn verb_mismatch_is_rejected() {
        let c: RunConfig = serde_json::from_str(r#"{"verb": "dos", "p": [8]}"#).unwrap();
        assert!(c.check(Verb::Dos).is_ok());
        assert!(c.check(Verb::Embed).is_err());
    }
}
