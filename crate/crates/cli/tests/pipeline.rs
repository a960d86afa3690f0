use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use handsmith_core::deformation::SYNTHETIC_CURVES;
use handsmith_core::kinematics::parse_trajectory_csv;
use handsmith_core::mesh::{analyze_mesh, parse_mesh, MeshFormat};
use serde_json::Value;
use tempfile::TempDir;

fn handsmith(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_handsmith"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn demo() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let o = handsmith(dir.path(), &["demo", "--out", "."]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    dir
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn set_config(dir: &Path, from: &str, to: &str) {
    let p = dir.join("handsmith.toml");
    let text = fs::read_to_string(&p).unwrap();
    assert!(text.contains(from), "{from}");
    fs::write(&p, text.replace(from, to)).unwrap();
}

const CFG: &[&str] = &["--config", "handsmith.toml"];

fn run(dir: &Path, args: &[&str]) -> Output {
    let all: Vec<&str> = CFG.iter().chain(args).copied().collect();
    handsmith(dir, &all)
}

#[test]
fn validate_accepts_the_demo() {
    let d = demo();
    let o = run(d.path(), &["validate"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let report = json(&d.path().join("out/validation.json"));
    assert_eq!(report["errors"], 0);
}

#[test]
fn validate_names_a_missing_landmark_file() {
    let d = demo();
    fs::remove_file(d.path().join("landmarks.json")).unwrap();
    let o = run(d.path(), &["validate"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("landmarks.json"), "{}", stderr(&o));
}

#[test]
fn validate_warns_on_an_open_scan() {
    let d = demo();
    // Drop the last facet of the binary scan and fix the count.
    let path = d.path().join("scan.stl");
    let mut bytes = fs::read(&path).unwrap();
    let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) - 1;
    bytes[80..84].copy_from_slice(&n.to_le_bytes());
    bytes.truncate(bytes.len() - 50);
    fs::write(&path, bytes).unwrap();
    let o = run(d.path(), &["validate"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("warning: scan: not watertight"), "{}", stdout(&o));
}

#[test]
fn validate_fails_on_a_broken_design_file() {
    let d = demo();
    fs::write(d.path().join("designs.json"), "{\"designs\": []}").unwrap();
    let o = run(d.path(), &["validate"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("error: designs"), "{}", stdout(&o));
}

#[test]
fn malformed_config_exits_2() {
    let d = demo();
    fs::write(d.path().join("handsmith.toml"), "[tube\nsigma = 0.4").unwrap();
    assert_eq!(code(&run(d.path(), &["validate"])), 2);
    fs::write(d.path().join("handsmith.toml"), "[tube]\nthickness = 0.4\n").unwrap();
    assert_eq!(code(&run(d.path(), &["validate"])), 2);
    assert_eq!(code(&handsmith(d.path(), &["--config", "nope.toml", "validate"])), 2);
}

#[test]
fn identity_fixture_fits_with_identity_transforms() {
    let d = demo();
    set_config(d.path(), "landmarks = \"landmarks.json\"", "landmarks = \"template/landmarks.json\"");
    let o = run(d.path(), &["fit-bones"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let log = json(&d.path().join("out/transforms.json"));
    let entries = log.as_array().unwrap();
    assert_eq!(entries.len(), 19);
    for e in entries {
        let id = e["bone_id"].as_str().unwrap();
        assert_eq!(e["theta"], 0.0, "{id}");
        assert_eq!(e["lambda"], 1.0, "{id}");
        assert_eq!(e["translation"], serde_json::json!([0.0, 0.0, 0.0]), "{id}");
        let fitted = fs::read(d.path().join(format!("out/bones/{id}.stl"))).unwrap();
        let template = fs::read(d.path().join(format!("template/{id}.stl"))).unwrap();
        assert!(fitted == template, "{id} differs from its template");
    }
}

#[test]
fn scaled_fixture_fits_with_the_scale() {
    let d = demo();
    let template = json(&d.path().join("template/landmarks.json"));
    let scaled: serde_json::Map<String, Value> = template
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| {
            let xy: Vec<f64> = v.as_array().unwrap().iter().map(|c| c.as_f64().unwrap() * 1.2).collect();
            (k.clone(), serde_json::json!(xy))
        })
        .collect();
    fs::write(d.path().join("landmarks.json"), Value::Object(scaled).to_string()).unwrap();
    let o = run(d.path(), &["fit-bones"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for e in json(&d.path().join("out/transforms.json")).as_array().unwrap() {
        assert!((e["lambda"].as_f64().unwrap() - 1.2).abs() < 1e-9, "{e}");
        assert!(e["theta"].as_f64().unwrap().abs() < 1e-9, "{e}");
    }
}

#[test]
fn missing_landmark_fails_fit_naming_it() {
    let d = demo();
    let mut target = json(&d.path().join("landmarks.json"));
    target.as_object_mut().unwrap().remove("ring_dip");
    fs::write(d.path().join("landmarks.json"), target.to_string()).unwrap();
    let o = run(d.path(), &["fit-bones"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("ring_dip"), "{}", stderr(&o));
}

#[test]
fn fit_bones_writes_parseable_outputs_in_each_format() {
    let d = demo();
    for (format, ext) in [("stl_ascii", "stl"), ("obj", "obj")] {
        let o = run(d.path(), &["--out", format, "--format", format, "fit-bones"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let bytes = fs::read(d.path().join(format!("{format}/bones/index_distal.{ext}"))).unwrap();
        let mesh = parse_mesh(&bytes, MeshFormat::Auto).unwrap();
        assert!(analyze_mesh(&mesh).watertight);
        let holes = json(&d.path().join(format!("{format}/holes.json")));
        assert_eq!(holes.as_array().unwrap().len(), 19);
        assert_eq!(holes[0]["holes"].as_array().unwrap().len(), 2);
    }
}

#[test]
fn sphere_pair_shell_matches_the_analytic_volume() {
    let d = demo();
    let o = handsmith(
        d.path(),
        &[
            "--out", "out", "--sigma", "0.4", "gen-tissue", "--bone", "sphere",
            "--skin-segment", "sphere/skin.stl", "--bone-mesh", "sphere/bone.stl", "--supports", "0",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = json(&d.path().join("out/tissue/sphere_report.json"));
    let material = report["material_volume_mm3"].as_f64().unwrap();
    let exact = 4.0 / 3.0 * std::f64::consts::PI * (9.6f64.powi(3) - 5.4f64.powi(3));
    assert!((material - exact).abs() / exact < 0.01, "{material} vs {exact}");
    assert!(material < report["solid_volume_mm3"].as_f64().unwrap());
    let shell = parse_mesh(&fs::read(d.path().join("out/tissue/sphere_shell.stl")).unwrap(), MeshFormat::Auto).unwrap();
    let parts = shell.components();
    assert_eq!(parts.len(), 2);
    assert!(parts.iter().all(|p| analyze_mesh(p).watertight));
}

#[test]
fn zero_sigma_is_a_usage_error() {
    let d = demo();
    let o = run(d.path(), &["--sigma", "0", "gen-tissue"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn tissue_needs_fitted_bones_and_reports_gap_failures() {
    let d = demo();
    assert_eq!(code(&run(d.path(), &["gen-tissue"])), 2);
    assert_eq!(code(&run(d.path(), &["fit-bones"])), 0);
    let o = run(d.path(), &["--sigma", "3.0", "gen-tissue"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("index_distal"), "{}", stderr(&o));
    let o = run(d.path(), &["gen-tissue", "--bone", "index_sixth"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn tissue_report_shows_hollow_below_solid() {
    let d = demo();
    assert_eq!(code(&run(d.path(), &["fit-bones"])), 0);
    for bone in ["index_proximal", "thumb_distal"] {
        let o = run(d.path(), &["gen-tissue", "--bone", bone]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let r = json(&d.path().join(format!("out/tissue/{bone}_report.json")));
        assert!(r["material_volume_ml"].as_f64().unwrap() < r["solid_volume_ml"].as_f64().unwrap());
        assert_eq!(r["component_count"], 6);
    }
}

#[test]
fn select_thickness_picks_the_matching_candidate() {
    let d = demo();
    let o = run(d.path(), &["select-thickness"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("selected sigma = 0.4 mm (distance 0)"), "{}", stdout(&o));
    let sel = json(&d.path().join("out/thickness/selection.json"));
    assert_eq!(sel["sigma_star"], 0.4);
    assert_eq!(sel["distance"], 0.0);

    // Reversing the row order of the table does not change the answer.
    let mut lines: Vec<&str> = SYNTHETIC_CURVES.lines().filter(|l| !l.starts_with('#')).collect();
    let header = lines.remove(0);
    lines.reverse();
    let reversed = std::iter::once(header).chain(lines).collect::<Vec<_>>().join("\n");
    fs::write(d.path().join("reversed.csv"), reversed).unwrap();
    let o = run(d.path(), &["--out", "rev", "select-thickness", "--curves", "reversed.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&d.path().join("rev/thickness/selection.json"))["sigma_star"], 0.4);
}

#[test]
fn select_thickness_fails_on_disjoint_curves() {
    let d = demo();
    fs::write(
        d.path().join("disjoint.csv"),
        "label,strain,force\nhuman,0.0,0.0\nhuman,0.1,1.0\nsigma=0.4,0.5,0.0\nsigma=0.4,0.6,1.0\n",
    )
    .unwrap();
    let o = run(d.path(), &["select-thickness", "--curves", "disjoint.csv"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
}

#[test]
fn simulate_writes_one_table_per_design() {
    let d = demo();
    let o = run(d.path(), &["simulate"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = json(&d.path().join("out/simulation_report.json"));
    assert_eq!(report["baseline"], "design_5");
    assert_eq!(report["baseline_shallowest"], true);
    let ranking = report["ranking"].as_array().unwrap();
    assert_eq!(ranking.len(), 6);
    assert_eq!(ranking.last().unwrap(), "design_5");
    for i in 1..=6 {
        let table = fs::read_to_string(d.path().join(format!("out/trajectories/design_{i}.csv"))).unwrap();
        let rows = parse_trajectory_csv(&table).unwrap();
        assert_eq!(rows.len(), 45);
        assert!(rows.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-9));
    }
}

#[test]
fn simulate_checks_its_sweep() {
    let d = demo();
    assert_eq!(code(&run(d.path(), &["--steps", "1", "simulate"])), 2);
    assert_eq!(code(&run(d.path(), &["simulate", "--design", "design_9"])), 2);

    let o = run(d.path(), &["--steps", "3", "simulate", "--displacement-max", "0", "--design", "design_2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = parse_trajectory_csv(&fs::read_to_string(d.path().join("out/trajectories/design_2.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| *r == rows[0]));
    assert_eq!(rows[0].1, 90.0);
}

#[test]
fn outputs_are_deterministic() {
    let d = demo();
    for out in ["a", "b"] {
        for cmd in [&["fit-bones"][..], &["gen-tissue"], &["simulate"], &["select-thickness"]] {
            let args: Vec<&str> = ["--out", out].iter().chain(cmd).copied().collect();
            let o = run(d.path(), &args);
            assert_eq!(code(&o), 0, "{}", stderr(&o));
        }
    }
    let files = [
        "bones/middle_proximal.stl",
        "transforms.json",
        "holes.json",
        "tissue/index_distal_shell.stl",
        "tissue/index_distal_report.json",
        "trajectories/design_3.csv",
        "simulation_report.json",
        "thickness/selection.json",
        "thickness/plot.csv",
    ];
    for f in files {
        let a = fs::read(d.path().join("a").join(f)).unwrap();
        let b = fs::read(d.path().join("b").join(f)).unwrap();
        assert!(a == b, "{f} differs between runs");
    }
}

#[test]
fn info_reports_on_a_mesh_and_the_toolkit() {
    let d = demo();
    let o = handsmith(d.path(), &["info", "sphere/bone.stl"]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["watertight"], true);
    assert_eq!(r["face_count"], 5120);
    let o = handsmith(d.path(), &["info"]);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["bones"].as_array().unwrap().len(), 19);
    assert_eq!(code(&handsmith(d.path(), &["info", "missing.stl"])), 2);
    fs::write(d.path().join("junk.obj"), "v 1 2\n").unwrap();
    assert_eq!(code(&handsmith(d.path(), &["info", "junk.obj"])), 1);
}

#[test]
fn bad_flags_are_usage_errors() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&handsmith(d.path(), &["--format", "ply", "info"])), 2);
    assert_eq!(code(&handsmith(d.path(), &["frobnicate"])), 2);
    assert_eq!(code(&handsmith(d.path(), &["gen-tissue", "--skin-segment", "a.stl"])), 2);
}
