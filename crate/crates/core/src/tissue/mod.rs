//! Concentric-tube tissue shells.
//!
//! The tissue around a bone is bounded by two closed surfaces: the skin
//! segment pushed inward by `sigma` and the bone pushed outward by `sigma`.
//! The outer surface keeps outward winding, the inner one is stored inward
//! wound, so the signed volume of the pair is the material between them.
//! Radial struts tie the two walls together.

mod offset;
mod segment;
mod shell;

use thiserror::Error;

use crate::mesh::MeshError;

pub use offset::{offset_surface, OffsetSurface};
pub use segment::{clip_and_cap, extract_segment, Plane};
pub use shell::{
    add_supports, build_concentric_tube, export_shell, LongAxis, ShellExport, ShellModel,
    ShellReport, TubeSpec,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TissueError {
    #[error("invalid tube spec: {0}")]
    InvalidSpec(String),
    #[error("{0} mesh is not watertight")]
    NotWatertight(&'static str),
    #[error("{0} mesh is wound inward")]
    InwardWound(&'static str),
    #[error("{outside} of {sampled} sampled bone vertices lie outside the skin segment")]
    Containment { outside: usize, sampled: usize },
    #[error("gap too small: minimum skin-to-bone gap {min_gap:.4} mm leaves no room for sigma = {sigma} mm")]
    GapTooSmall { min_gap: f64, sigma: f64 },
    #[error("cannot place strut {strut}: {reason}")]
    PlacementFailure { strut: usize, reason: String },
    #[error("segment extraction failed: {0}")]
    Segment(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}
