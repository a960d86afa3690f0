//! The TOML pipeline configuration.
//!
//! ```toml
//! seed = 7
//!
//! [paths]
//! scan = "scan.stl"
//! landmarks = "landmarks.json"
//! template_dir = "template"
//! output_dir = "out"
//! curves = "curves.csv"
//! designs = "designs.json"
//!
//! [tube]
//! sigma = 0.4
//! region = "index_distal"
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::fs;
use std::path::{Path, PathBuf};

use handsmith_core::deformation::{DistanceMetric, SelectionOptions, TieBreak, DEFAULT_GRID_POINTS};
use handsmith_core::template_match::HoleSpec;
use handsmith_core::tissue::TubeSpec;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub paths: PathsConfig,
    #[serde(default)]
    pub tube: TubeConfig,
    #[serde(default)]
    pub holes: HolesConfig,
    #[serde(default)]
    pub kinematics: KinematicsConfig,
    #[serde(default)]
    pub deformation: DeformationConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub scan: Option<PathBuf>,
    pub landmarks: Option<PathBuf>,
    /// Holds `<bone_id>.stl` (or `.obj`) per bone and `landmarks.json`.
    pub template_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub curves: Option<PathBuf>,
    /// Design set JSON; the built-in presets when absent.
    pub designs: Option<PathBuf>,
    /// Bone topology JSON; the canonical 19-bone topology when absent.
    pub topology: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TubeConfig {
    pub sigma: f64,
    pub support_count: usize,
    pub support_radius: f64,
    pub region: String,
}

impl Default for TubeConfig {
    fn default() -> Self {
        let spec = TubeSpec::new(0.4, "index_distal");
        TubeConfig {
            sigma: spec.sigma,
            support_count: spec.support_count,
            support_radius: spec.support_radius,
            region: spec.region,
        }
    }
}

impl TubeConfig {
    pub fn spec(&self, region: &str, sigma: Option<f64>) -> TubeSpec {
        TubeSpec {
            sigma: sigma.unwrap_or(self.sigma),
            support_count: self.support_count,
            support_radius: self.support_radius,
            region: region.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolesConfig {
    pub diameter: f64,
    pub end_offset: f64,
    pub depth: Option<f64>,
}

impl Default for HolesConfig {
    fn default() -> Self {
        let spec = HoleSpec::default();
        HolesConfig {
            diameter: spec.diameter,
            end_offset: spec.end_offset,
            depth: spec.depth,
        }
    }
}

impl From<&HolesConfig> for HoleSpec {
    fn from(c: &HolesConfig) -> Self {
        HoleSpec {
            diameter: c.diameter,
            depth: c.depth,
            end_offset: c.end_offset,
        }
    }
}

/// Sweep settings; unset values fall back to the design set's own.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KinematicsConfig {
    pub designs: Option<Vec<String>>,
    pub displacement_max: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeformationConfig {
    pub human_label: String,
    pub metric: DistanceMetric,
    pub grid_points: usize,
    pub tie_break: TieBreak,
}

impl Default for DeformationConfig {
    fn default() -> Self {
        DeformationConfig {
            human_label: "human".into(),
            metric: DistanceMetric::Rms,
            grid_points: DEFAULT_GRID_POINTS,
            tie_break: TieBreak::SmallerSigma,
        }
    }
}

impl DeformationConfig {
    pub fn options(&self) -> SelectionOptions {
        SelectionOptions {
            metric: self.metric,
            grid_points: self.grid_points,
            tie_break: self.tie_break,
        }
    }
}

impl PipelineConfig {
    pub fn parse(document: &str) -> Result<PipelineConfig, CliError> {
        toml::from_str(document).map_err(|e| CliError::Config(e.message().to_string()))
    }

    /// Reads the file and resolves its relative paths against its directory.
    pub fn load(path: &Path) -> Result<PipelineConfig, CliError> {
        if !path.is_file() {
            return Err(CliError::MissingPath {
                what: "config file",
                path: path.to_path_buf(),
            });
        }
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut config =
            PipelineConfig::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.paths.resolve(base);
        Ok(config)
    }

    /// Checks every referenced path exists.
    pub fn check_paths(&self) -> Result<(), CliError> {
        let p = &self.paths;
        let files = [
            ("scan mesh", &p.scan),
            ("landmark file", &p.landmarks),
            ("curves file", &p.curves),
            ("design file", &p.designs),
            ("topology file", &p.topology),
        ];
        for (what, path) in files {
            if let Some(path) = path {
                if !path.is_file() {
                    return Err(CliError::MissingPath { what, path: path.clone() });
                }
            }
        }
        if let Some(dir) = &p.template_dir {
            if !dir.is_dir() {
                return Err(CliError::MissingPath {
                    what: "template directory",
                    path: dir.clone(),
                });
            }
        }
        Ok(())
    }
}

impl PathsConfig {
    fn resolve(&mut self, base: &Path) {
        let slots = [
            &mut self.scan,
            &mut self.landmarks,
            &mut self.template_dir,
            &mut self.output_dir,
            &mut self.curves,
            &mut self.designs,
            &mut self.topology,
        ];
        for p in slots.into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    /// The configured path, or a usage error naming its key.
    pub fn require<'a>(slot: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, CliError> {
        slot.as_deref()
            .ok_or_else(|| CliError::Config(format!("paths.{key} is not set")))
    }
}
