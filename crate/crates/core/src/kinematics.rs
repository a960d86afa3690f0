//! Single-cable tendon drive of a three-joint finger.
//!
//! Each joint stage follows Landsmeer's model III, `L = (b + h*phi) * phi`.
//! The stages are chained as a 3-stage cable: the proximal excursion is felt
//! by both later stages, and the intermediate total again by the distal one,
//! so `L_d = 2 e_p + e_i + e_d`. One cable drives all three joints; linear
//! rotational springs stand in for the elastic tissue that restores the
//! pose, and the joint angles for a given cable displacement are the ones of
//! least elastic energy.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default joint limits for MCP, PIP and DIP in radians.
pub const DEFAULT_JOINT_LIMITS: [f64; 3] = [1.57, 1.92, 1.22];

/// Constraint residual the solver must reach, in mm.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

const MAX_ITERATIONS: usize = 400;

/// Six design presets, the fifth being the baseline. The coefficients are
/// illustrative, not measured.
pub const DESIGN_PRESETS: &str = include_str!("../data/finger_designs.json");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("invalid finger config: {0}")]
    InvalidConfig(String),
    #[error("invalid joint state: {0}")]
    InvalidState(String),
    #[error("cable displacement must be finite and non-negative, got {0}")]
    InvalidDisplacement(f64),
    #[error("solver did not converge after {iterations} iterations (residual {residual:e} mm)")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("design {design_id}: {source}")]
    Design {
        design_id: String,
        #[source]
        source: Box<KinematicsError>,
    },
    #[error("cannot parse {what}: {message}")]
    Parse { what: &'static str, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageId {
    Proximal,
    Intermediate,
    Distal,
}

impl fmt::Display for StageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StageId::Proximal => "proximal",
            StageId::Intermediate => "intermediate",
            StageId::Distal => "distal",
        })
    }
}

/// Landsmeer coefficients of one joint: `b` in mm, `h` in mm/rad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TendonStage {
    pub b: f64,
    pub h: f64,
    pub stage: StageId,
}

impl TendonStage {
    pub fn new(b: f64, h: f64, stage: StageId) -> Result<Self, KinematicsError> {
        let s = TendonStage { b, h, stage };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        let ok = self.b.is_finite() && self.h.is_finite() && self.b >= 0.0 && self.h >= 0.0;
        if !ok || (self.b == 0.0 && self.h == 0.0) {
            return Err(KinematicsError::InvalidConfig(format!(
                "{} stage needs b, h >= 0, not both zero (b = {}, h = {})",
                self.stage, self.b, self.h
            )));
        }
        Ok(())
    }

    /// Angle at which this stage alone takes up `excursion` mm.
    fn inverse(&self, excursion: f64) -> f64 {
        let e = excursion.max(0.0);
        if self.h > 0.0 {
            2.0 * e / (self.b + (self.b * self.b + 4.0 * self.h * e).sqrt())
        } else {
            e / self.b
        }
    }
}

/// Tendon displacement taken up by one joint flexed by `phi` radians.
pub fn tendon_excursion(stage: &TendonStage, phi: f64) -> f64 {
    (stage.b + stage.h * phi) * phi
}

/// Flexion angles in radians, zero when straight.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointState {
    pub phi_p: f64,
    pub phi_i: f64,
    pub phi_d: f64,
}

impl JointState {
    pub fn new(phi_p: f64, phi_i: f64, phi_d: f64) -> Self {
        JointState { phi_p, phi_i, phi_d }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        JointState::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.phi_p, self.phi_i, self.phi_d]
    }
}

/// A finger: segment lengths, joint stages, return springs and limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerConfig {
    pub design_id: String,
    /// Proximal, intermediate and distal phalanx lengths in mm.
    pub lengths: [f64; 3],
    pub stages: [TendonStage; 3],
    /// Spring stiffness per joint in N·mm/rad.
    pub springs: [f64; 3],
    #[serde(default = "default_limits")]
    pub joint_limits: [f64; 3],
}

fn default_limits() -> [f64; 3] {
    DEFAULT_JOINT_LIMITS
}

impl FingerConfig {
    pub fn validate(&self) -> Result<(), KinematicsError> {
        let bad = |m: String| Err(KinematicsError::InvalidConfig(format!("{}: {m}", self.design_id)));
        if self.lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return bad(format!("lengths must be positive, got {:?}", self.lengths));
        }
        if self.springs.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return bad(format!("springs must be positive, got {:?}", self.springs));
        }
        if self.joint_limits.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return bad(format!("joint limits must be positive, got {:?}", self.joint_limits));
        }
        let order = [StageId::Proximal, StageId::Intermediate, StageId::Distal];
        for (s, want) in self.stages.iter().zip(order) {
            if s.stage != want {
                return bad(format!("stage {} listed where {want} belongs", s.stage));
            }
            s.validate()?;
        }
        Ok(())
    }

    pub fn validate_state(&self, state: &JointState) -> Result<(), KinematicsError> {
        for (phi, max) in state.to_array().iter().zip(self.joint_limits) {
            if !(phi.is_finite() && (0.0..=max).contains(phi)) {
                return Err(KinematicsError::InvalidState(format!(
                    "angle {phi} outside [0, {max}]"
                )));
            }
        }
        Ok(())
    }

    pub fn max_state(&self) -> JointState {
        JointState::from_array(self.joint_limits)
    }

    /// Copy with every stage coefficient multiplied by `factor`.
    pub fn with_scaled_stages(&self, factor: f64) -> FingerConfig {
        let mut c = self.clone();
        for s in &mut c.stages {
            s.b *= factor;
            s.h *= factor;
        }
        c
    }
}

/// Multiplicity of each stage's excursion in the distal cable displacement.
const CABLE_WEIGHTS: [f64; 3] = [2.0, 1.0, 1.0];

/// `(L_p, L_i, L_d)` for the 3-stage cable at `state`.
pub fn cumulative_excursion(cfg: &FingerConfig, state: &JointState) -> (f64, f64, f64) {
    let [sp, si, sd] = &cfg.stages;
    let l_p = tendon_excursion(sp, state.phi_p);
    let l_i = l_p + tendon_excursion(si, state.phi_i);
    let l_d = l_p + l_i + tendon_excursion(sd, state.phi_d);
    (l_p, l_i, l_d)
}

pub fn elastic_energy(cfg: &FingerConfig, state: &JointState) -> f64 {
    state
        .to_array()
        .iter()
        .zip(cfg.springs)
        .map(|(phi, k)| 0.5 * k * phi * phi)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlexionSolution {
    pub state: JointState,
    /// The cable asked for more than the fully flexed finger takes up.
    pub saturated: bool,
    pub iterations: usize,
    pub residual: f64,
}

/// Joint angles of least elastic energy whose distal cable excursion equals
/// `displacement`, within the joint limits.
///
/// For a multiplier `mu`, each joint minimizes
/// `k phi^2 / 2 - mu c (b phi + h phi^2)` over its range on its own; the
/// minimizer grows with `mu`, so `mu` is bisected until the cable constraint
/// is met. A state that minimizes this Lagrangian and meets the constraint is
/// a global minimum of the energy on the constraint set.
pub fn solve_flexion(cfg: &FingerConfig, displacement: f64) -> Result<FlexionSolution, KinematicsError> {
    cfg.validate()?;
    if !(displacement.is_finite() && displacement >= 0.0) {
        return Err(KinematicsError::InvalidDisplacement(displacement));
    }
    let excursion = |s: &JointState| cumulative_excursion(cfg, s).2;
    let done = |state: JointState, saturated: bool, iterations: usize| FlexionSolution {
        state,
        saturated,
        iterations,
        residual: if saturated { 0.0 } else { (excursion(&state) - displacement).abs() },
    };
    if displacement == 0.0 {
        return Ok(done(JointState::default(), false, 0));
    }
    let full = excursion(&cfg.max_state());
    if displacement >= full {
        return Ok(done(cfg.max_state(), displacement > full, 0));
    }

    let at = |mu: f64| JointState::from_array(std::array::from_fn(|j| lagrangian_argmin(cfg, j, mu)));
    let mut iterations = 0;
    let mut hi = 1.0;
    while excursion(&at(hi)) < displacement {
        hi *= 2.0;
        iterations += 1;
        if iterations > MAX_ITERATIONS || !hi.is_finite() {
            return Err(KinematicsError::NonConvergence {
                iterations,
                residual: displacement - excursion(&at(hi)),
            });
        }
    }
    let mut lo = 0.0;
    while hi - lo > 4.0 * f64::EPSILON * hi && iterations < MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if excursion(&at(mid)) >= displacement {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }

    // Walk the over-shooting state back onto the constraint, taking the
    // surplus from the joints that moved most between the brackets.
    let (below, above) = (at(lo).to_array(), at(hi).to_array());
    let mut phi = above;
    let mut surplus = excursion(&JointState::from_array(phi)) - displacement;
    let mut order = [0, 1, 2];
    order.sort_by(|&a, &b| (above[b] - below[b]).total_cmp(&(above[a] - below[a])));
    for j in order {
        if surplus <= 0.0 {
            break;
        }
        let stage = &cfg.stages[j];
        let w = CABLE_WEIGHTS[j];
        let now = w * tendon_excursion(stage, phi[j]);
        let target = (now - surplus).max(w * tendon_excursion(stage, below[j]));
        phi[j] = stage.inverse(target / w).clamp(below[j], above[j]);
        surplus -= now - w * tendon_excursion(stage, phi[j]);
    }
    let state = JointState::from_array(phi);
    let residual = (excursion(&state) - displacement).abs();
    if residual >= RESIDUAL_TOLERANCE {
        return Err(KinematicsError::NonConvergence { iterations, residual });
    }
    Ok(done(state, false, iterations))
}

fn lagrangian_argmin(cfg: &FingerConfig, j: usize, mu: f64) -> f64 {
    let (k, max) = (cfg.springs[j], cfg.joint_limits[j]);
    let TendonStage { b, h, .. } = cfg.stages[j];
    let c = CABLE_WEIGHTS[j];
    let curvature = k - 2.0 * mu * c * h;
    if curvature > 0.0 {
        (mu * c * b / curvature).min(max)
    } else {
        max
    }
}

/// Fingertip in the lateral (y, z) plane, MCP joint at the origin. The
/// straight finger points along +y and flexion turns toward -z.
pub fn fingertip_position(cfg: &FingerConfig, state: &JointState) -> (f64, f64) {
    let mut angle = 0.0;
    let (mut y, mut z) = (0.0, 0.0);
    for (len, phi) in cfg.lengths.iter().zip(state.to_array()) {
        angle += phi;
        y += len * angle.cos();
        z -= len * angle.sin();
    }
    (y, z)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// Fingertip `(y, z)` in mm.
    pub points: Vec<(f64, f64)>,
    /// Cable displacement in mm for each point.
    pub displacements: Vec<f64>,
    pub states: Vec<JointState>,
    pub saturated: Vec<bool>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn path_length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1))
            .sum()
    }

    pub fn min_y(&self) -> f64 {
        self.points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min)
    }

    /// `displacement,y,z` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("displacement,y,z\n");
        for (d, (y, z)) in self.displacements.iter().zip(&self.points) {
            writeln!(out, "{d},{y},{z}").expect("write to string");
        }
        out
    }
}

/// Reads back the output of [`Trajectory::to_csv`] as `(displacement, y, z)`.
pub fn parse_trajectory_csv(document: &str) -> Result<Vec<(f64, f64, f64)>, KinematicsError> {
    let err = |message: String| KinematicsError::Parse {
        what: "trajectory table",
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(document.as_bytes());
    let headers = reader.headers().map_err(|e| err(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["displacement", "y", "z"] {
        return Err(err(format!("unexpected header {headers:?}")));
    }
    reader
        .records()
        .map(|r| {
            let r = r.map_err(|e| err(e.to_string()))?;
            let line = r.position().map_or(0, |p| p.line());
            let v: Vec<f64> = r
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| err(format!("line {line}: {e}")))?;
            match v[..] {
                [d, y, z] => Ok((d, y, z)),
                _ => Err(err(format!("line {line}: expected 3 fields"))),
            }
        })
        .collect()
}

/// Solves the finger at `steps` evenly spaced displacements from 0 to
/// `displacement_max`.
pub fn sweep_trajectory(
    cfg: &FingerConfig,
    displacement_max: f64,
    steps: usize,
) -> Result<Trajectory, KinematicsError> {
    if steps < 2 {
        return Err(KinematicsError::InvalidConfig(format!("sweep needs at least 2 steps, got {steps}")));
    }
    if !(displacement_max.is_finite() && displacement_max >= 0.0) {
        return Err(KinematicsError::InvalidDisplacement(displacement_max));
    }
    let mut t = Trajectory {
        points: Vec::with_capacity(steps),
        displacements: Vec::with_capacity(steps),
        states: Vec::with_capacity(steps),
        saturated: Vec::with_capacity(steps),
    };
    for i in 0..steps {
        let d = displacement_max * i as f64 / (steps - 1) as f64;
        let sol = solve_flexion(cfg, d)?;
        t.points.push(fingertip_position(cfg, &sol.state));
        t.displacements.push(d);
        t.states.push(sol.state);
        t.saturated.push(sol.saturated);
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignMetrics {
    pub design_id: String,
    pub min_y: f64,
    pub final_y: f64,
    pub final_z: f64,
    pub path_length: f64,
    pub saturated_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignComparison {
    pub displacement_max: f64,
    pub steps: usize,
    pub designs: Vec<DesignMetrics>,
    /// Design ids from deepest to shallowest flexion (ascending min y).
    pub ranking: Vec<String>,
    #[serde(skip)]
    pub trajectories: Vec<Trajectory>,
}

pub fn compare_designs(
    configs: &[FingerConfig],
    displacement_max: f64,
    steps: usize,
) -> Result<DesignComparison, KinematicsError> {
    if configs.is_empty() {
        return Err(KinematicsError::InvalidConfig("no designs to compare".into()));
    }
    let mut designs = Vec::with_capacity(configs.len());
    let mut trajectories = Vec::with_capacity(configs.len());
    for cfg in configs {
        let t = sweep_trajectory(cfg, displacement_max, steps).map_err(|e| KinematicsError::Design {
            design_id: cfg.design_id.clone(),
            source: Box::new(e),
        })?;
        let last = *t.points.last().expect("at least two points");
        designs.push(DesignMetrics {
            design_id: cfg.design_id.clone(),
            min_y: t.min_y(),
            final_y: last.0,
            final_z: last.1,
            path_length: t.path_length(),
            saturated_steps: t.saturated.iter().filter(|s| **s).count(),
        });
        trajectories.push(t);
    }
    let mut ranked: Vec<&DesignMetrics> = designs.iter().collect();
    ranked.sort_by(|a, b| a.min_y.total_cmp(&b.min_y));
    Ok(DesignComparison {
        displacement_max,
        steps,
        ranking: ranked.iter().map(|d| d.design_id.clone()).collect(),
        designs,
        trajectories,
    })
}

/// A set of finger designs with the sweep they are compared on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSet {
    #[serde(default)]
    pub note: String,
    pub displacement_max: f64,
    pub steps: usize,
    /// Design id of the reference design, if any.
    #[serde(default)]
    pub baseline: Option<String>,
    pub designs: Vec<FingerConfig>,
}

impl DesignSet {
    pub fn from_json(document: &str) -> Result<DesignSet, KinematicsError> {
        let set: DesignSet = serde_json::from_str(document).map_err(|e| KinematicsError::Parse {
            what: "design set",
            message: e.to_string(),
        })?;
        set.validate()?;
        Ok(set)
    }

    pub fn presets() -> DesignSet {
        DesignSet::from_json(DESIGN_PRESETS).expect("shipped presets are valid")
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        if self.designs.is_empty() {
            return Err(KinematicsError::InvalidConfig("design set is empty".into()));
        }
        for (i, d) in self.designs.iter().enumerate() {
            d.validate()?;
            if self.designs[..i].iter().any(|e| e.design_id == d.design_id) {
                return Err(KinematicsError::InvalidConfig(format!(
                    "design id {} repeats",
                    d.design_id
                )));
            }
        }
        if let Some(b) = &self.baseline {
            if !self.designs.iter().any(|d| &d.design_id == b) {
                return Err(KinematicsError::InvalidConfig(format!("baseline {b} is not a design")));
            }
        }
        if !(self.displacement_max.is_finite() && self.displacement_max >= 0.0) || self.steps < 2 {
            return Err(KinematicsError::InvalidConfig(format!(
                "sweep needs displacement_max >= 0 and steps >= 2, got {} and {}",
                self.displacement_max, self.steps
            )));
        }
        Ok(())
    }

    pub fn get(&self, design_id: &str) -> Option<&FingerConfig> {
        self.designs.iter().find(|d| d.design_id == design_id)
    }
}
