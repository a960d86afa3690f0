//! A synthetic fixture set that exercises every subcommand.
//!
//! The target hand is the synthetic template hand scaled by
//! [`TARGET_SCALE`] about the wrist. Its "scan" is one capsule per finger,
//! running from the carpometacarpal landmark to the fingertip, plus a palm
//! block; the parts overlap and are stored as separate closed shells. None of
//! it is measured data.

use std::fs;
use std::path::{Path, PathBuf};

use handsmith_core::deformation::SYNTHETIC_CURVES;
use handsmith_core::kinematics::DESIGN_PRESETS;
use handsmith_core::landmarks::{BoneTopology, LandmarkSet, LandmarkSource, FINGERS};
use handsmith_core::mesh::{write_mesh, MeshFormat, TriangleMesh};
use handsmith_core::primitives::{box_mesh, capsule, icosphere};
use handsmith_core::template_match::{synthetic_template, BoneTemplateSet};
use nalgebra::{Point2, Point3};

use crate::error::CliError;

pub const TARGET_SCALE: f64 = 1.05;

/// Skin radius of each finger of the synthetic scan, in mm.
const SKIN_RADII: [f64; 5] = [10.0, 8.5, 9.0, 8.5, 7.5];
const SKIN_SEGMENTS: usize = 24;
const PALM_PADDING: f64 = 10.0;
const PALM_HALF_THICKNESS: f64 = 12.0;

pub const DEMO_CONFIG: &str = r#"# Synthetic demo fixture; regenerate with `handsmith demo --out <dir>`.
seed = 7

[paths]
scan = "scan.stl"
landmarks = "landmarks.json"
template_dir = "template"
output_dir = "out"
curves = "curves.csv"
designs = "designs.json"

[tube]
sigma = 0.4
support_count = 4
support_radius = 0.5
region = "index_distal"

[holes]
diameter = 1.0
end_offset = 2.0

[kinematics]
displacement_max = 22.0
steps = 45

[deformation]
human_label = "human"
metric = "rms"
grid_points = 100
tie_break = "smaller_sigma"
"#;

pub struct DemoFixture {
    pub topology: BoneTopology,
    pub template: BoneTemplateSet,
    pub target: LandmarkSet,
    pub scan: TriangleMesh,
}

pub fn demo_fixture() -> DemoFixture {
    let topology = BoneTopology::canonical();
    let template = synthetic_template(&topology);
    let target = template
        .landmarks
        .map_points(LandmarkSource::Target, |_, p| Point2::from(p.coords * TARGET_SCALE))
        .expect("scaling keeps the schema");
    let scan = synthetic_scan(&target);
    DemoFixture {
        topology,
        template,
        target,
        scan,
    }
}

/// Finger capsules and a palm block around `hand`, symmetric about z = 0.
pub fn synthetic_scan(hand: &LandmarkSet) -> TriangleMesh {
    let at = |name: String| {
        let p = hand.get(&name).expect("schema landmark");
        Point3::new(p.x, p.y, 0.0)
    };
    let mut parts: Vec<TriangleMesh> = FINGERS
        .iter()
        .zip(SKIN_RADII)
        .map(|(finger, r)| capsule(at(format!("{finger}_cmc")), at(format!("{finger}_tip")), r, SKIN_SEGMENTS, 6))
        .collect();

    let palm: Vec<Point3<f64>> = FINGERS[1..]
        .iter()
        .flat_map(|f| [at(format!("{f}_cmc")), at(format!("{f}_mcp"))])
        .collect();
    let min_x = palm.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let max_x = palm.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let min_y = palm.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let knuckles = FINGERS[1..].iter().map(|f| at(format!("{f}_mcp")).y);
    let max_y = knuckles.fold(f64::INFINITY, f64::min);
    parts.push(box_mesh(
        Point3::new(min_x - PALM_PADDING, min_y - PALM_PADDING, -PALM_HALF_THICKNESS),
        Point3::new(max_x + PALM_PADDING, max_y, PALM_HALF_THICKNESS),
    ));
    TriangleMesh::merge(parts.iter()).with_name("demo_scan")
}

/// Writes the fixture set into `dir` and returns the files written.
pub fn write_demo(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let fixture = demo_fixture();
    let mut files: Vec<(PathBuf, Vec<u8>)> = vec![
        (dir.join("handsmith.toml"), DEMO_CONFIG.as_bytes().to_vec()),
        (dir.join("scan.stl"), write_mesh(&fixture.scan, MeshFormat::StlBinary)),
        (dir.join("landmarks.json"), fixture.target.to_json().into_bytes()),
        (dir.join("curves.csv"), SYNTHETIC_CURVES.as_bytes().to_vec()),
        (dir.join("designs.json"), DESIGN_PRESETS.as_bytes().to_vec()),
        (
            dir.join("template").join("landmarks.json"),
            fixture.template.landmarks.to_json().into_bytes(),
        ),
        (
            dir.join("sphere").join("skin.stl"),
            write_mesh(&icosphere(10.0, 4), MeshFormat::StlBinary),
        ),
        (
            dir.join("sphere").join("bone.stl"),
            write_mesh(&icosphere(5.0, 4), MeshFormat::StlBinary),
        ),
    ];
    for (id, mesh) in &fixture.template.meshes {
        files.push((
            dir.join("template").join(format!("{id}.stl")),
            write_mesh(mesh, MeshFormat::StlBinary),
        ));
    }
    for (path, bytes) in &files {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(CliError::io(parent))?;
        }
        fs::write(path, bytes).map_err(CliError::io(path))?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use handsmith_core::mesh::analyze_mesh;

    #[test]
    fn scan_parts_are_closed_and_symmetric() {
        let f = demo_fixture();
        let r = analyze_mesh(&f.scan);
        assert!(r.watertight);
        assert_eq!(r.component_count, 6);
        assert!((r.bbox.min.z + r.bbox.max.z).abs() < 1e-9);
    }

    #[test]
    fn target_is_the_scaled_template() {
        let f = demo_fixture();
        let a = f.template.landmarks.get("middle_tip").unwrap();
        let b = f.target.get("middle_tip").unwrap();
        assert!((b - a * TARGET_SCALE).norm() < 1e-12);
    }

    #[test]
    fn config_parses() {
        crate::config::PipelineConfig::parse(DEMO_CONFIG).unwrap();
    }
}
