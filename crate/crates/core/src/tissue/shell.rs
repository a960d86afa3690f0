use std::f64::consts::PI;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::geom::{distance_to_mesh, is_inside, principal_axes, ray_hits};
use crate::mesh::{analyze_mesh, signed_volume, write_mesh, MeshFormat, TriangleMesh};
use crate::primitives::{cylinder, perpendicular_basis};

use super::offset::offset_surface;
use super::TissueError;

const CONTAINMENT_SAMPLES: usize = 64;
const STRUT_SEGMENTS: usize = 24;

fn default_support_count() -> usize {
    4
}

fn default_support_radius() -> f64 {
    0.5
}

/// Construction parameters for one tissue tube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeSpec {
    /// Wall construction offset in mm.
    pub sigma: f64,
    #[serde(default = "default_support_count")]
    pub support_count: usize,
    #[serde(default = "default_support_radius")]
    pub support_radius: f64,
    /// Finger segment this tube belongs to, e.g. `index_distal`.
    #[serde(default)]
    pub region: String,
}

impl TubeSpec {
    pub fn new(sigma: f64, region: impl Into<String>) -> TubeSpec {
        TubeSpec {
            sigma,
            support_count: default_support_count(),
            support_radius: default_support_radius(),
            region: region.into(),
        }
    }

    pub fn validate(&self) -> Result<(), TissueError> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(TissueError::InvalidSpec(format!(
                "sigma must be a positive length, got {}",
                self.sigma
            )));
        }
        if self.support_count > 0 && !(self.support_radius.is_finite() && self.support_radius > 0.0) {
            return Err(TissueError::InvalidSpec(format!(
                "support radius must be positive, got {}",
                self.support_radius
            )));
        }
        Ok(())
    }
}

/// Long axis of a bone, through its mid-length point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LongAxis {
    pub midpoint: Point3<f64>,
    pub direction: Vector3<f64>,
    pub half_length: f64,
}

impl LongAxis {
    pub fn of_mesh(mesh: &TriangleMesh) -> Option<LongAxis> {
        let pca = principal_axes(mesh.vertices())?;
        let d = pca.axes[0];
        let (lo, hi) = mesh
            .vertices()
            .iter()
            .map(|p| d.dot(&(p - pca.centroid)))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)));
        Some(LongAxis {
            midpoint: pca.centroid + d * ((lo + hi) / 2.0),
            direction: d,
            half_length: (hi - lo) / 2.0,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ShellModel {
    /// Skin offset inward, wound outward.
    pub outer: TriangleMesh,
    /// Bone offset outward, wound inward.
    pub inner: TriangleMesh,
    pub supports: TriangleMesh,
    pub support_count: usize,
    pub material_volume_mm3: f64,
    /// Volume of the skin segment minus the bone, printed solid.
    pub solid_volume_mm3: f64,
    pub sigma: f64,
    pub region: String,
    pub axis: LongAxis,
    pub outer_self_intersections: usize,
    pub inner_self_intersections: usize,
    pub warnings: Vec<String>,
}

impl ShellModel {
    fn recompute_volume(&mut self) {
        self.material_volume_mm3 =
            signed_volume(&self.outer) + signed_volume(&self.inner) + signed_volume(&self.supports);
    }

    /// All parts as one multi-component mesh.
    pub fn merged(&self) -> TriangleMesh {
        let mut m = TriangleMesh::merge([&self.outer, &self.inner, &self.supports]);
        if !self.region.is_empty() {
            m = m.with_name(self.region.clone());
        }
        m
    }
}

fn sample<T: Copy>(items: &[T], limit: usize) -> Vec<T> {
    let stride = items.len().div_ceil(limit).max(1);
    items.iter().step_by(stride).copied().collect()
}

fn require_closed(mesh: &TriangleMesh, what: &'static str) -> Result<f64, TissueError> {
    let r = analyze_mesh(mesh);
    if !r.watertight {
        return Err(TissueError::NotWatertight(what));
    }
    if r.signed_volume_mm3 <= 0.0 {
        return Err(TissueError::InwardWound(what));
    }
    Ok(r.signed_volume_mm3)
}

/// Builds the hollow tissue shell between a skin segment and the bone it
/// encloses, then adds `spec.support_count` struts.
pub fn build_concentric_tube(
    skin: &TriangleMesh,
    bone: &TriangleMesh,
    spec: &TubeSpec,
) -> Result<ShellModel, TissueError> {
    spec.validate()?;
    let skin_volume = require_closed(skin, "skin")?;
    let bone_volume = require_closed(bone, "bone")?;

    let probes = sample(bone.vertices(), CONTAINMENT_SAMPLES);
    let outside = probes.iter().filter(|p| !is_inside(skin, p)).count();
    if outside > 0 {
        return Err(TissueError::Containment {
            outside,
            sampled: probes.len(),
        });
    }
    let min_gap = probes
        .iter()
        .map(|p| distance_to_mesh(skin, p))
        .fold(f64::INFINITY, f64::min);
    if spec.sigma >= min_gap / 2.0 {
        return Err(TissueError::GapTooSmall {
            min_gap,
            sigma: spec.sigma,
        });
    }

    let outer = offset_surface(skin, -spec.sigma)?;
    let inner = offset_surface(bone, spec.sigma)?;
    let walls_gap = sample(inner.mesh.vertices(), CONTAINMENT_SAMPLES)
        .iter()
        .map(|p| {
            let d = distance_to_mesh(&outer.mesh, p);
            if is_inside(&outer.mesh, p) {
                d
            } else {
                -d
            }
        })
        .fold(f64::INFINITY, f64::min);
    if walls_gap <= 0.0 {
        return Err(TissueError::GapTooSmall {
            min_gap,
            sigma: spec.sigma,
        });
    }

    let axis = LongAxis::of_mesh(bone).expect("bone is non-empty");
    let mut warnings = outer.warnings;
    warnings.extend(inner.warnings);
    let mut shell = ShellModel {
        outer_self_intersections: outer.self_intersections.len(),
        inner_self_intersections: inner.self_intersections.len(),
        outer: outer.mesh,
        inner: inner.mesh.flipped(),
        supports: TriangleMesh::default(),
        support_count: 0,
        material_volume_mm3: 0.0,
        solid_volume_mm3: skin_volume - bone_volume,
        sigma: spec.sigma,
        region: spec.region.clone(),
        axis,
        warnings,
    };
    shell.recompute_volume();
    if spec.support_count > 0 {
        shell = add_supports(shell, spec)?;
    }
    Ok(shell)
}

/// Adds radial struts at the mid-length of the bone axis, equally spaced in
/// angle, each spanning from the inner wall to the outer wall.
pub fn add_supports(mut shell: ShellModel, spec: &TubeSpec) -> Result<ShellModel, TissueError> {
    spec.validate()?;
    if spec.support_count == 0 {
        return Ok(shell);
    }
    let axis = shell.axis;
    let (u0, _) = perpendicular_basis(&axis.direction);
    let z_perp = Vector3::z() - axis.direction * axis.direction.z;
    let u = if z_perp.norm() > 1e-6 { z_perp.normalize() } else { u0 };
    let v = axis.direction.cross(&u);

    let mut struts = Vec::with_capacity(spec.support_count);
    for k in 0..spec.support_count {
        let angle = 2.0 * PI * k as f64 / spec.support_count as f64;
        let dir = u * angle.cos() + v * angle.sin();
        let origin = axis.midpoint;
        let fail = |reason: &str| TissueError::PlacementFailure {
            strut: k,
            reason: reason.to_string(),
        };
        let t_out = *ray_hits(&shell.outer, &origin, &dir)
            .first()
            .ok_or_else(|| fail("ray misses the outer wall"))?;
        let t_in = ray_hits(&shell.inner, &origin, &dir)
            .into_iter()
            .rev()
            .find(|&t| t < t_out)
            .ok_or_else(|| fail("ray misses the inner wall"))?;
        if t_out - t_in <= 1e-6 {
            return Err(fail("walls touch along the strut ray"));
        }
        struts.push(cylinder(
            origin + dir * t_in,
            origin + dir * t_out,
            spec.support_radius,
            STRUT_SEGMENTS,
        ));
    }
    shell.supports = TriangleMesh::merge(std::iter::once(&shell.supports).chain(struts.iter()));
    shell.support_count += struts.len();
    shell.recompute_volume();
    Ok(shell)
}

/// Volume summary written next to an exported shell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShellReport {
    pub region: String,
    pub sigma_mm: f64,
    pub outer_volume_mm3: f64,
    pub inner_volume_mm3: f64,
    pub support_volume_mm3: f64,
    pub material_volume_mm3: f64,
    pub material_volume_ml: f64,
    pub solid_volume_mm3: f64,
    pub solid_volume_ml: f64,
    pub component_count: usize,
    pub support_count: usize,
    pub outer_self_intersections: usize,
    pub inner_self_intersections: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ShellExport {
    pub stl: Vec<u8>,
    pub report: ShellReport,
}

impl ShellExport {
    pub fn report_json(&self) -> String {
        serde_json::to_string_pretty(&self.report).expect("report serializes")
    }
}

/// Binary STL of the merged shell plus its volume report.
pub fn export_shell(shell: &ShellModel) -> ShellExport {
    let merged = shell.merged();
    let report = ShellReport {
        region: shell.region.clone(),
        sigma_mm: shell.sigma,
        outer_volume_mm3: signed_volume(&shell.outer),
        inner_volume_mm3: signed_volume(&shell.inner),
        support_volume_mm3: signed_volume(&shell.supports),
        material_volume_mm3: shell.material_volume_mm3,
        material_volume_ml: shell.material_volume_mm3 / 1000.0,
        solid_volume_mm3: shell.solid_volume_mm3,
        solid_volume_ml: shell.solid_volume_mm3 / 1000.0,
        component_count: merged.components().len(),
        support_count: shell.support_count,
        outer_self_intersections: shell.outer_self_intersections,
        inner_self_intersections: shell.inner_self_intersections,
        warnings: shell.warnings.clone(),
    };
    ShellExport {
        stl: write_mesh(&merged, MeshFormat::StlBinary),
        report,
    }
}
