use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use handsmith_core::mesh::MeshFormat;

#[derive(Debug, Parser)]
#[command(name = "handsmith", version, about = "Build customized multi-layer hand models from a scan")]
pub struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `paths.output_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tissue wall offset in mm; overrides `tube.sigma`.
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Trajectory sample count; overrides the design set's.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Mesh format for written meshes.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::StlBinary)]
    pub format: OutputFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum OutputFormat {
    StlBinary,
    StlAscii,
    Obj,
}

impl From<OutputFormat> for MeshFormat {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::StlBinary => MeshFormat::StlBinary,
            OutputFormat::StlAscii => MeshFormat::StlAscii,
            OutputFormat::Obj => MeshFormat::Obj,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and check every configured input.
    Validate,
    /// Fit the bone template to the target landmarks.
    FitBones,
    /// Build the soft-tissue shell around fitted bones.
    GenTissue(GenTissueArgs),
    /// Pick the wall offset whose deformation curve is closest to the reference.
    SelectThickness(SelectThicknessArgs),
    /// Sweep finger designs through cable displacement.
    Simulate(SimulateArgs),
    /// Summarize a mesh file, or the toolkit when no file is given.
    Info(InfoArgs),
    /// Write the synthetic demo fixture set.
    Demo,
}

#[derive(Debug, Args)]
pub struct GenTissueArgs {
    /// Bone id, or `all`; defaults to `tube.region`.
    #[arg(long)]
    pub bone: Option<String>,
    /// Use this closed skin segment instead of cutting the scan.
    #[arg(long, requires = "bone_mesh")]
    pub skin_segment: Option<PathBuf>,
    /// Use this bone mesh instead of the fitted one.
    #[arg(long, requires = "skin_segment")]
    pub bone_mesh: Option<PathBuf>,
    /// Number of support struts; overrides `tube.support_count`.
    #[arg(long)]
    pub supports: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SelectThicknessArgs {
    /// Curve table; defaults to `paths.curves`.
    #[arg(long)]
    pub curves: Option<PathBuf>,
    /// Label of the reference curve; defaults to `deformation.human_label`.
    #[arg(long)]
    pub human: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Design set JSON; defaults to `paths.designs`, then the built-in presets.
    #[arg(long)]
    pub designs: Option<PathBuf>,
    /// Design id to run; repeat for several. Defaults to every design.
    #[arg(long = "design")]
    pub design_ids: Vec<String>,
    /// Largest cable displacement in mm.
    #[arg(long)]
    pub displacement_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    pub mesh: Option<PathBuf>,
}
