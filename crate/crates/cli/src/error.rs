use std::io;
use std::path::PathBuf;

use handsmith_core::deformation::DeformationError;
use handsmith_core::kinematics::KinematicsError;
use handsmith_core::landmarks::LandmarkError;
use handsmith_core::mesh::MeshError;
use handsmith_core::template_match::MatchError;
use handsmith_core::tissue::TissueError;
use thiserror::Error;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExitStatus(pub i32);

impl ExitStatus {
    pub const SUCCESS: ExitStatus = ExitStatus(0);
    pub const FAILURE: ExitStatus = ExitStatus(1);
    pub const USAGE: ExitStatus = ExitStatus(2);
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{what} not found: {}", path.display())]
    MissingPath { what: &'static str, path: PathBuf },
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Mesh { path: PathBuf, source: MeshError },
    #[error("{}: {source}", path.display())]
    Landmarks { path: PathBuf, source: LandmarkError },
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error("{region}: {source}")]
    Tissue { region: String, source: TissueError },
    #[error(transparent)]
    Deformation(#[from] DeformationError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("validation found {0} error(s)")]
    Validation(usize),
}

impl CliError {
    pub fn exit_status(&self) -> ExitStatus {
        match self {
            CliError::Config(_) | CliError::MissingPath { .. } | CliError::Usage(_) => ExitStatus::USAGE,
            CliError::Tissue {
                source: TissueError::InvalidSpec(_),
                ..
            } => ExitStatus::USAGE,
            _ => ExitStatus::FAILURE,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
