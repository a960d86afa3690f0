//! Replays the checked-in fuzz seeds through the same checks as the fuzz
//! targets, so they run on every `cargo test`.

use std::fs;
use std::path::PathBuf;

use handsmith_core::deformation::{load_curves, write_curves};
use handsmith_core::kinematics::{parse_trajectory_csv, DesignSet};
use handsmith_core::landmarks::{load_landmarks, BoneTopology, LandmarkSource};
use handsmith_core::mesh::{analyze_mesh, detect_format, parse_mesh, write_mesh, MeshFormat};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).unwrap()
}

fn mesh_round_trip(format: MeshFormat) -> usize {
    let dir = match format {
        MeshFormat::StlBinary => "stl_binary",
        MeshFormat::StlAscii => "stl_ascii",
        _ => "obj",
    };
    let mut parsed = 0;
    for (name, data) in seeds(dir) {
        let Ok(mesh) = parse_mesh(&data, format) else { continue };
        let again = parse_mesh(&write_mesh(&mesh, format), format).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(again.face_count(), mesh.face_count(), "{name}");
        if format == MeshFormat::Obj {
            assert_eq!(again.vertices(), mesh.vertices(), "{name}");
        }
        parsed += 1;
    }
    parsed
}

#[test]
fn stl_binary_seeds() {
    // The empty seed is rejected, the rest parse.
    assert_eq!(mesh_round_trip(MeshFormat::StlBinary), seeds("stl_binary").len() - 1);
}

#[test]
fn stl_ascii_seeds() {
    assert_eq!(mesh_round_trip(MeshFormat::StlAscii), seeds("stl_ascii").len());
}

#[test]
fn obj_seeds() {
    assert_eq!(mesh_round_trip(MeshFormat::Obj), seeds("obj").len());
}

#[test]
fn mesh_auto_seeds() {
    for (name, data) in seeds("mesh_auto") {
        assert_ne!(detect_format(&data), MeshFormat::Auto, "{name}");
        let mesh = parse_mesh(&data, MeshFormat::Auto).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(analyze_mesh(&mesh).watertight, "{name}");
    }
}

#[test]
fn landmark_seeds() {
    for (name, data) in seeds("landmarks") {
        let set = load_landmarks(text(&data), LandmarkSource::Target).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(load_landmarks(&set.to_json(), LandmarkSource::Target).unwrap(), set);
    }
}

#[test]
fn topology_seeds() {
    for (name, data) in seeds("topology") {
        let t = BoneTopology::from_json(text(&data)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(BoneTopology::from_json(&t.to_json()).unwrap(), t);
    }
}

#[test]
fn curve_seeds() {
    for (name, data) in seeds("curves") {
        let curves = load_curves(text(&data)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(load_curves(&write_curves(&curves)).unwrap().len(), curves.len());
    }
}

#[test]
fn design_set_seeds() {
    for (name, data) in seeds("design_set") {
        DesignSet::from_json(text(&data)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn trajectory_seeds() {
    for (name, data) in seeds("trajectory_csv") {
        let rows = parse_trajectory_csv(text(&data)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(!rows.is_empty());
    }
}
