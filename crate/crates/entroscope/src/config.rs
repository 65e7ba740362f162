//! Run configuration: JSON schema, validation, and the canonical config
//! fingerprint embedded in outputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::eigensolver::SolverOptions;
use crate::error::{Error, Result};
use crate::lattice::{ModelFamily, Shape};
use crate::sweep::{DetectionThresholds, SweepSettings};

/// Lattice size: a chain length or a square extent pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SizeSpec {
    Chain(usize),
    Square([usize; 2]),
}

impl SizeSpec {
    pub fn to_shape(self) -> Shape {
        match self {
            SizeSpec::Chain(n) => Shape::Chain(n),
            SizeSpec::Square([lx, ly]) => Shape::Square(lx, ly),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub family: ModelFamily,
    pub size: SizeSpec,
    /// On-site interaction, required for HUBBARD_CHAIN sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub prefix: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    /// Sublattice override: explicit R-site list. Defaults to the preset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<usize>>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub detection: DetectionThresholds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let shape = self.model.size.to_shape();
        let n = shape.num_sites();
        match (self.model.family, shape) {
            (ModelFamily::IsingChain | ModelFamily::HubbardChain, Shape::Chain(len)) => {
                if len < 4 || len % 2 != 0 {
                    return Err(Error::Config(format!(
                        "{} requires an even chain length >= 4, got {len}",
                        self.model.family.as_str()
                    )));
                }
            }
            (
                ModelFamily::Dimer2d | ModelFamily::J1j2_2d | ModelFamily::Checkerboard2d,
                Shape::Square(4, 4),
            ) => {}
            (family, shape) => {
                return Err(Error::Config(format!(
                    "{} does not support size {shape}",
                    family.as_str()
                )));
            }
        }
        if self.model.family == ModelFamily::HubbardChain {
            match self.model.u {
                Some(u) if u.is_finite() => {}
                Some(u) => return Err(Error::Config(format!("non-finite U = {u}"))),
                None => {
                    return Err(Error::Config(
                        "HUBBARD_CHAIN requires model.u (the fixed on-site interaction)".into(),
                    ))
                }
            }
        } else if self.model.u.is_some() {
            return Err(Error::Config(format!(
                "model.u applies only to HUBBARD_CHAIN, not {}",
                self.model.family.as_str()
            )));
        }

        let grid = self.grid_values()?;
        if grid.len() < 5 {
            return Err(Error::Config(format!(
                "grid has {} points; at least 5 required",
                grid.len()
            )));
        }
        if self.model.family == ModelFamily::IsingChain
            && grid[0] < 0.0 {
                return Err(Error::Config("transverse field sweep requires lambda >= 0".into()));
            }

        if let Some(partition) = &self.partition {
            if partition.len() != n / 2 {
                return Err(Error::Config("balanced bipartition required".into()));
            }
            let mut seen = vec![false; n];
            for &site in partition {
                if site >= n {
                    return Err(Error::Config(format!(
                        "partition site {site} outside 0..{n}"
                    )));
                }
                if seen[site] {
                    return Err(Error::Config(format!("partition repeats site {site}")));
                }
                seen[site] = true;
            }
        }

        if self.solver.max_iter == 0 {
            return Err(Error::Config("solver.max_iter must be positive".into()));
        }
        for (name, value) in [
            ("solver.tol", self.solver.tol),
            ("solver.residual_tol", self.solver.residual_tol),
            ("solver.degeneracy_tol", self.solver.degeneracy_tol),
            ("detection.curve_prominence", self.detection.curve_prominence),
            (
                "detection.derivative_prominence",
                self.detection.derivative_prominence,
            ),
        ] {
            if value <= 0.0 || !value.is_finite() || value.is_nan() {
                return Err(Error::Config(format!("{name} must be a positive number")));
            }
        }
        Ok(())
    }

    pub fn grid_values(&self) -> Result<Vec<f64>> {
        crate::sweep::uniform_grid(self.grid.start, self.grid.stop, self.grid.step)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_sweep_settings(&self) -> Result<SweepSettings> {
        Ok(SweepSettings {
            family: self.model.family,
            shape: self.model.size.to_shape(),
            hubbard_u: self.model.u,
            grid: self.grid_values()?,
            partition_override: self.partition.clone(),
            solver: self.solver,
            cache_dir: self.cache_dir.clone(),
        })
    }

    /// Stable hash of the canonicalized config (provenance stamp for
    /// outputs).
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }

    /// Output file stem: configured prefix or family + size.
    pub fn output_prefix(&self) -> String {
        if let Some(output) = &self.output {
            if let Some(prefix) = &output.prefix {
                return prefix.clone();
            }
        }
        format!(
            "{}_{}",
            self.model.family.as_str().to_lowercase(),
            self.model.size.to_shape()
        )
    }
}
