use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use handsmith_core::deformation::{
    load_curves, plot_data_csv, select_thickness, split_candidates, SelectionOptions,
};
use handsmith_core::kinematics::{compare_designs, DesignMetrics, DesignSet, FingerConfig};
use handsmith_core::landmarks::{
    align_midplane, bone_frame, load_landmarks, BoneTopology, LandmarkSet, LandmarkSource,
    LANDMARK_NAMES,
};
use handsmith_core::mesh::{analyze_mesh, parse_mesh, write_mesh, MeshFormat, TriangleMesh};
use handsmith_core::template_match::{
    fit_template, place_ligament_holes, BoneTemplateSet, HolePose, HoleSpec,
};
use handsmith_core::tissue::{
    build_concentric_tube, export_shell, extract_segment, Plane, ShellReport, TissueError,
};
use log::info;
use nalgebra::{Point3, Vector3};
use serde::Serialize;

use crate::args::{Cli, Command, GenTissueArgs, InfoArgs, SelectThicknessArgs, SimulateArgs};
use crate::config::{PathsConfig, PipelineConfig};
use crate::demo::write_demo;
use crate::error::CliError;

/// `println!` that tolerates a closed stdout, e.g. when piped into `head`.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

/// Everything a subcommand needs from the command line and config file.
pub struct Context {
    pub config: PipelineConfig,
    pub out_dir: PathBuf,
    pub format: MeshFormat,
    pub sigma: Option<f64>,
    pub steps: Option<usize>,
}

impl Context {
    pub fn from_cli(cli: &Cli) -> Result<Context, CliError> {
        let config = match &cli.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        let out_dir = cli
            .out
            .clone()
            .or_else(|| config.paths.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok(Context {
            config,
            out_dir,
            format: cli.format.into(),
            sigma: cli.sigma,
            steps: cli.steps,
        })
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Command::Demo = cli.command {
        let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("demo"));
        let files = write_demo(&dir)?;
        say!("wrote {} files to {}", files.len(), dir.display());
        return Ok(());
    }
    let ctx = Context::from_cli(cli)?;
    match &cli.command {
        Command::Validate => cmd_validate(&ctx).map(|_| ()),
        Command::FitBones => cmd_fit_bones(&ctx),
        Command::GenTissue(args) => cmd_gen_tissue(&ctx, args).map(|_| ()),
        Command::SelectThickness(args) => cmd_select_thickness(&ctx, args),
        Command::Simulate(args) => cmd_simulate(&ctx, args),
        Command::Info(args) => cmd_info(args),
        Command::Demo => unreachable!("handled above"),
    }
}

fn read_file(path: &Path, what: &'static str) -> Result<Vec<u8>, CliError> {
    if !path.is_file() {
        return Err(CliError::MissingPath {
            what,
            path: path.to_path_buf(),
        });
    }
    fs::read(path).map_err(CliError::io(path))
}

fn read_text(path: &Path, what: &'static str) -> Result<String, CliError> {
    let bytes = read_file(path, what)?;
    String::from_utf8(bytes).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
    })
}

fn read_mesh(path: &Path, what: &'static str) -> Result<TriangleMesh, CliError> {
    let bytes = read_file(path, what)?;
    parse_mesh(&bytes, MeshFormat::Auto).map_err(|source| CliError::Mesh {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(CliError::io(parent))?;
    }
    fs::write(path, bytes).map_err(CliError::io(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn read_landmarks(path: &Path, source: LandmarkSource) -> Result<LandmarkSet, CliError> {
    let text = read_text(path, "landmark file")?;
    load_landmarks(&text, source).map_err(|source| CliError::Landmarks {
        path: path.to_path_buf(),
        source,
    })
}

fn read_topology(config: &PipelineConfig) -> Result<BoneTopology, CliError> {
    match &config.paths.topology {
        None => Ok(BoneTopology::canonical()),
        Some(path) => {
            let text = read_text(path, "topology file")?;
            BoneTopology::from_json(&text).map_err(|source| CliError::Landmarks {
                path: path.clone(),
                source,
            })
        }
    }
}

/// `<dir>/<bone_id>.stl`, or `.obj` if only that exists.
fn bone_file(dir: &Path, bone_id: &str) -> Option<PathBuf> {
    ["stl", "obj"]
        .iter()
        .map(|ext| dir.join(format!("{bone_id}.{ext}")))
        .find(|p| p.is_file())
}

fn read_template(dir: &Path, topology: &BoneTopology) -> Result<BoneTemplateSet, CliError> {
    let landmarks = read_landmarks(&dir.join("landmarks.json"), LandmarkSource::Template)?;
    let mut meshes = std::collections::BTreeMap::new();
    for id in topology.bone_ids() {
        if let Some(path) = bone_file(dir, id) {
            meshes.insert(id.to_string(), read_mesh(&path, "template mesh")?);
        }
    }
    Ok(BoneTemplateSet { meshes, landmarks })
}

fn read_designs(ctx: &Context, override_path: Option<&Path>) -> Result<DesignSet, CliError> {
    match override_path.or(ctx.config.paths.designs.as_deref()) {
        None => Ok(DesignSet::presets()),
        Some(path) => Ok(DesignSet::from_json(&read_text(path, "design file")?)?),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Info,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub level: Level,
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.level {
            Level::Info => "info",
            Level::Warning => "warning",
            Level::Error => "error",
        };
        write!(f, "{level}: {}: {}", self.subject, self.message)
    }
}

#[derive(Debug, Default, Serialize)]
pub struct ValidationReport {
    pub errors: usize,
    pub warnings: usize,
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    fn push(&mut self, level: Level, subject: impl Into<String>, message: impl fmt::Display) {
        match level {
            Level::Error => self.errors += 1,
            Level::Warning => self.warnings += 1,
            Level::Info => {}
        }
        self.diagnostics.push(Diagnostic {
            level,
            subject: subject.into(),
            message: message.to_string(),
        });
    }

    fn check<T, E: fmt::Display>(&mut self, subject: &str, r: Result<T, E>) -> Option<T> {
        r.map_err(|e| self.push(Level::Error, subject, e)).ok()
    }

    fn mesh(&mut self, subject: &str, path: &Path) -> Option<TriangleMesh> {
        let mesh = self.check(subject, read_mesh(path, "mesh"))?;
        let r = analyze_mesh(&mesh);
        if !r.watertight {
            self.push(
                Level::Warning,
                subject,
                format!(
                    "not watertight ({} boundary, {} non-manifold edges)",
                    r.boundary_edge_count, r.non_manifold_edge_count
                ),
            );
        } else if r.signed_volume_mm3 <= 0.0 {
            self.push(Level::Warning, subject, "surface is wound inward");
        }
        Some(mesh)
    }
}

pub fn cmd_validate(ctx: &Context) -> Result<ValidationReport, CliError> {
    let cfg = &ctx.config;
    cfg.check_paths()?;
    let mut report = ValidationReport::default();

    let topology = report.check("topology", read_topology(cfg));
    if let Some(path) = &cfg.paths.scan {
        if let Some(scan) = report.mesh("scan", path) {
            let r = analyze_mesh(&scan);
            report.push(
                Level::Info,
                "scan",
                format!("{} vertices, {} faces, {} parts", r.vertex_count, r.face_count, r.component_count),
            );
            report.check("scan", align_midplane(&scan));
        }
    }
    let target = cfg
        .paths
        .landmarks
        .as_ref()
        .and_then(|p| report.check("landmarks", read_landmarks(p, LandmarkSource::Target)));
    if let (Some(target), Some(topology)) = (&target, &topology) {
        for id in topology.bone_ids() {
            report.check("landmarks", bone_frame(target, topology, id));
        }
    }
    if let (Some(dir), Some(topology)) = (&cfg.paths.template_dir, &topology) {
        let landmarks = report.check(
            "template",
            read_landmarks(&dir.join("landmarks.json"), LandmarkSource::Template),
        );
        for id in topology.bone_ids() {
            match bone_file(dir, id) {
                Some(path) => {
                    report.mesh(&format!("template/{id}"), &path);
                }
                None => report.push(Level::Error, "template", format!("no mesh for bone '{id}'")),
            }
            if let Some(l) = &landmarks {
                report.check("template", bone_frame(l, topology, id));
            }
        }
    }
    report.check("tube", cfg.tube.spec(&cfg.tube.region, ctx.sigma).validate());
    let holes = HoleSpec::from(&cfg.holes);
    if !(holes.diameter > 0.0 && holes.end_offset >= 0.0) {
        report.push(Level::Error, "holes", format!("invalid hole spec {holes:?}"));
    }
    if let Some(path) = &cfg.paths.curves {
        let curves = report.check("curves", read_text(path, "curves file"));
        let curves = curves.and_then(|t| report.check("curves", load_curves(&t)));
        if let Some(curves) = curves {
            if let Some((_, candidates)) =
                report.check("curves", split_candidates(curves, &cfg.deformation.human_label))
            {
                report.push(Level::Info, "curves", format!("{} candidate curves", candidates.len()));
            }
        }
    }
    if let Some(set) = report.check("designs", read_designs(ctx, None)) {
        for id in cfg.kinematics.designs.iter().flatten() {
            if set.get(id).is_none() {
                report.push(Level::Error, "kinematics", format!("unknown design '{id}'"));
            }
        }
    }

    for d in &report.diagnostics {
        say!("{d}");
    }
    say!("{} error(s), {} warning(s)", report.errors, report.warnings);
    write_json(&ctx.out_dir.join("validation.json"), &report)?;
    if report.errors > 0 {
        return Err(CliError::Validation(report.errors));
    }
    Ok(report)
}

#[derive(Debug, Serialize)]
pub struct TransformEntry {
    pub bone_id: String,
    pub theta: f64,
    pub lambda: f64,
    pub translation: [f64; 3],
}

#[derive(Debug, Serialize)]
pub struct HoleEntry {
    pub bone_id: String,
    pub holes: Vec<HolePose>,
}

pub fn cmd_fit_bones(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let topology = read_topology(cfg)?;
    let target = read_landmarks(PathsConfig::require(&cfg.paths.landmarks, "landmarks")?, LandmarkSource::Target)?;
    let template = read_template(PathsConfig::require(&cfg.paths.template_dir, "template_dir")?, &topology)?;
    let bones = fit_template(&template, &topology, &target)?;
    let hole_spec = HoleSpec::from(&cfg.holes);

    let bone_dir = ctx.out_dir.join("bones");
    let mut transforms = Vec::new();
    let mut holes = Vec::new();
    for id in topology.bone_ids() {
        let bone = &bones[id];
        let path = bone_dir.join(format!("{id}.{}", ctx.format.extension()));
        write_file(&path, &write_mesh(&bone.mesh, ctx.format))?;
        let t = &bone.transform;
        transforms.push(TransformEntry {
            bone_id: id.to_string(),
            theta: t.theta,
            lambda: t.lambda,
            translation: [t.translation.x, t.translation.y, t.translation.z],
        });
        holes.push(HoleEntry {
            bone_id: id.to_string(),
            holes: place_ligament_holes(&bone.mesh, &bone.frame, &hole_spec)?,
        });
        info!("{id}: theta {:.6} lambda {:.6}", t.theta, t.lambda);
    }
    write_json(&ctx.out_dir.join("transforms.json"), &transforms)?;
    write_json(&ctx.out_dir.join("holes.json"), &holes)?;
    say!("fitted {} bones into {}", transforms.len(), bone_dir.display());
    Ok(())
}

/// The skin between a bone's two joint planes, cut from the aligned scan.
fn skin_segment(
    skin: &TriangleMesh,
    bone: &TriangleMesh,
    target: &LandmarkSet,
    topology: &BoneTopology,
    bone_id: &str,
) -> Result<TriangleMesh, CliError> {
    let link = topology
        .bone(bone_id)
        .ok_or_else(|| CliError::Usage(format!("unknown bone '{bone_id}'")))?;
    let frame = bone_frame(target, topology, bone_id).map_err(|source| CliError::Landmarks {
        path: PathBuf::from("landmarks"),
        source,
    })?;
    let o = Point3::new(frame.origin.x, frame.origin.y, 0.0);
    let u = Vector3::new(frame.reference.x, frame.reference.y, 0.0);
    let near = Plane::new(o, u);
    let far = Plane::new(o + u, -u);
    // The last bone of a chain keeps the whole fingertip.
    let terminal = !topology.bones.iter().any(|b| b.origin == link.reference);
    extract_segment(skin, bone, &near, (!terminal).then_some(&far)).map_err(|source| CliError::Tissue {
        region: bone_id.to_string(),
        source,
    })
}

fn write_shell(
    ctx: &Context,
    region: &str,
    skin: &TriangleMesh,
    bone: &TriangleMesh,
    spec: &handsmith_core::tissue::TubeSpec,
) -> Result<ShellReport, CliError> {
    let tissue_err = |source: TissueError| CliError::Tissue {
        region: region.to_string(),
        source,
    };
    let shell = build_concentric_tube(skin, bone, spec).map_err(tissue_err)?;
    let export = export_shell(&shell);
    let dir = ctx.out_dir.join("tissue");
    let bytes = match ctx.format {
        MeshFormat::StlBinary => export.stl.clone(),
        other => write_mesh(&shell.merged().with_name(format!("{region}_shell")), other),
    };
    write_file(&dir.join(format!("{region}_shell.{}", ctx.format.extension())), &bytes)?;
    write_file(&dir.join(format!("{region}_report.json")), format!("{}\n", export.report_json()).as_bytes())?;
    let r = &export.report;
    say!(
        "{region}: sigma {} mm, {} parts, material {:.4} ml, solid {:.4} ml",
        r.sigma_mm, r.component_count, r.material_volume_ml, r.solid_volume_ml
    );
    for w in &r.warnings {
        say!("warning: {region}: {w}");
    }
    Ok(export.report)
}

pub fn cmd_gen_tissue(ctx: &Context, args: &GenTissueArgs) -> Result<Vec<ShellReport>, CliError> {
    let cfg = &ctx.config;
    let mut tube = cfg.tube.clone();
    if let Some(n) = args.supports {
        tube.support_count = n;
    }
    let region = args.bone.clone().unwrap_or_else(|| cfg.tube.region.clone());
    let spec_for = |region: &str| tube.spec(region, ctx.sigma);
    spec_for(&region).validate().map_err(|source| CliError::Tissue {
        region: region.clone(),
        source,
    })?;

    if let (Some(skin), Some(bone)) = (&args.skin_segment, &args.bone_mesh) {
        let skin = read_mesh(skin, "skin segment")?;
        let bone = read_mesh(bone, "bone mesh")?;
        return Ok(vec![write_shell(ctx, &region, &skin, &bone, &spec_for(&region))?]);
    }

    let topology = read_topology(cfg)?;
    let ids: Vec<String> = if region == "all" {
        topology.bone_ids().map(String::from).collect()
    } else if topology.bone(&region).is_some() {
        vec![region.clone()]
    } else {
        return Err(CliError::Usage(format!("unknown bone '{region}'")));
    };
    let scan = read_mesh(PathsConfig::require(&cfg.paths.scan, "scan")?, "scan mesh")?;
    let (skin, _) = align_midplane(&scan).map_err(|source| CliError::Landmarks {
        path: cfg.paths.scan.clone().unwrap_or_default(),
        source,
    })?;
    let target = read_landmarks(PathsConfig::require(&cfg.paths.landmarks, "landmarks")?, LandmarkSource::Target)?;
    let bone_dir = ctx.out_dir.join("bones");
    let mut reports = Vec::new();
    for id in &ids {
        let path = bone_file(&bone_dir, id).ok_or_else(|| CliError::MissingPath {
            what: "fitted bone (run fit-bones first)",
            path: bone_dir.join(format!("{id}.stl")),
        })?;
        let bone = read_mesh(&path, "fitted bone")?;
        let segment = skin_segment(&skin, &bone, &target, &topology, id)?;
        reports.push(write_shell(ctx, id, &segment, &bone, &spec_for(id))?);
    }
    Ok(reports)
}

pub fn cmd_select_thickness(ctx: &Context, args: &SelectThicknessArgs) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let path = match &args.curves {
        Some(p) => p.as_path(),
        None => PathsConfig::require(&cfg.paths.curves, "curves")?,
    };
    let human_label = args.human.as_deref().unwrap_or(&cfg.deformation.human_label);
    let curves = load_curves(&read_text(path, "curves file")?)?;
    let (human, candidates) = split_candidates(curves, human_label)?;
    let options: SelectionOptions = cfg.deformation.options();
    let selection = select_thickness(&candidates, &human, &options)?;
    let plot = plot_data_csv(&human, &candidates, options.grid_points)?;

    say!("{:>8}  {:>12}", "sigma", "distance_n");
    for (sigma, d) in &selection.distances {
        say!("{sigma:>8}  {d:>12.6}");
    }
    say!("selected sigma = {} mm (distance {})", selection.sigma_star, selection.distance);
    let dir = ctx.out_dir.join("thickness");
    write_file(&dir.join("selection.json"), format!("{}\n", selection.to_json()).as_bytes())?;
    write_file(&dir.join("plot.csv"), plot.as_bytes())?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SimulationReport {
    pub displacement_max: f64,
    pub steps: usize,
    pub baseline: Option<String>,
    /// Whether the baseline has the largest minimum fingertip y.
    pub baseline_shallowest: Option<bool>,
    /// Design ids from deepest to shallowest flexion.
    pub ranking: Vec<String>,
    pub designs: Vec<DesignMetrics>,
}

pub fn cmd_simulate(ctx: &Context, args: &SimulateArgs) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let set = read_designs(ctx, args.designs.as_deref())?;
    let steps = ctx.steps.or(cfg.kinematics.steps).unwrap_or(set.steps);
    if steps < 2 {
        return Err(CliError::Usage(format!("--steps must be at least 2, got {steps}")));
    }
    let displacement_max = args
        .displacement_max
        .or(cfg.kinematics.displacement_max)
        .unwrap_or(set.displacement_max);
    if !(displacement_max.is_finite() && displacement_max >= 0.0) {
        return Err(CliError::Usage(format!(
            "displacement_max must be finite and non-negative, got {displacement_max}"
        )));
    }
    let ids: Vec<String> = if !args.design_ids.is_empty() {
        args.design_ids.clone()
    } else if let Some(ids) = &cfg.kinematics.designs {
        ids.clone()
    } else {
        set.designs.iter().map(|d| d.design_id.clone()).collect()
    };
    let configs: Vec<FingerConfig> = ids
        .iter()
        .map(|id| {
            set.get(id)
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("unknown design '{id}'")))
        })
        .collect::<Result<_, _>>()?;

    let comparison = compare_designs(&configs, displacement_max, steps)?;
    let dir = ctx.out_dir.join("trajectories");
    for (cfg, t) in configs.iter().zip(&comparison.trajectories) {
        write_file(&dir.join(format!("{}.csv", cfg.design_id)), t.to_csv().as_bytes())?;
    }
    let baseline = set.baseline.clone().filter(|b| ids.contains(b));
    let baseline_shallowest = baseline.as_ref().map(|b| {
        let min_y = |id: &str| comparison.designs.iter().find(|d| d.design_id == id).map(|d| d.min_y);
        let base = min_y(b).expect("baseline was simulated");
        comparison.designs.iter().all(|d| &d.design_id == b || d.min_y < base)
    });
    let report = SimulationReport {
        displacement_max,
        steps,
        baseline,
        baseline_shallowest,
        ranking: comparison.ranking.clone(),
        designs: comparison.designs.clone(),
    };
    write_json(&ctx.out_dir.join("simulation_report.json"), &report)?;
    for d in &report.designs {
        say!(
            "{}: min y {:.3} mm, final (y, z) ({:.3}, {:.3}) mm",
            d.design_id, d.min_y, d.final_y, d.final_z
        );
    }
    say!("ranking (deepest first): {}", report.ranking.join(", "));
    Ok(())
}

#[derive(Debug, Serialize)]
struct ToolkitInfo {
    version: &'static str,
    mesh_formats: [&'static str; 3],
    landmarks: usize,
    bones: Vec<String>,
}

pub fn cmd_info(args: &InfoArgs) -> Result<(), CliError> {
    let text = match &args.mesh {
        Some(path) => {
            let mesh = read_mesh(path, "mesh")?;
            serde_json::to_string_pretty(&analyze_mesh(&mesh))
        }
        None => serde_json::to_string_pretty(&ToolkitInfo {
            version: env!("CARGO_PKG_VERSION"),
            mesh_formats: ["stl_binary", "stl_ascii", "obj"],
            landmarks: LANDMARK_NAMES.len(),
            bones: BoneTopology::canonical().bone_ids().map(String::from).collect(),
        }),
    }
    .expect("info serializes");
    say!("{text}");
    Ok(())
}
