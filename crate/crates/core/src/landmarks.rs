//! Hand landmark schema, bone topology and scan alignment.
//!
//! Landmarks are 2D points in the frame of the scan after [`align_midplane`]
//! has made the hand symmetric about the xy-plane. The 25 names follow the
//! joint chain of each finger:
//!
//! - `wrist_center`
//! - thumb: `thumb_cmc`, `thumb_mcp`, `thumb_ip`, `thumb_tip`
//! - index, middle, ring, little: `<finger>_cmc`, `_mcp`, `_pip`, `_dip`, `_tip`
//!
//! Each bone runs from a proximal landmark (its frame origin) to a distal one
//! (its reference). The schema is a reconstruction from hand anatomy; the
//! shipped `data/landmark_schema.v1.json` and `data/bone_topology.v1.json`
//! documents carry the same content for tools that want it as data.

use std::collections::BTreeMap;

use nalgebra::{Point2, Point3, Rotation3, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::principal_axes;
use crate::mesh::TriangleMesh;

pub const FINGERS: [&str; 5] = ["thumb", "index", "middle", "ring", "little"];

pub const LANDMARK_NAMES: [&str; 25] = [
    "wrist_center",
    "thumb_cmc",
    "thumb_mcp",
    "thumb_ip",
    "thumb_tip",
    "index_cmc",
    "index_mcp",
    "index_pip",
    "index_dip",
    "index_tip",
    "middle_cmc",
    "middle_mcp",
    "middle_pip",
    "middle_dip",
    "middle_tip",
    "ring_cmc",
    "ring_mcp",
    "ring_pip",
    "ring_dip",
    "ring_tip",
    "little_cmc",
    "little_mcp",
    "little_pip",
    "little_dip",
    "little_tip",
];

pub const SCHEMA_DOCUMENT: &str = include_str!("../data/landmark_schema.v1.json");
pub const TOPOLOGY_DOCUMENT: &str = include_str!("../data/bone_topology.v1.json");

/// Below this length a bone's reference vector is treated as zero.
pub const MIN_REFERENCE_MM: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LandmarkError {
    #[error("cannot parse document: {0}")]
    Parse(String),
    #[error("landmark schema violation: {0}")]
    Schema(SchemaViolation),
    #[error("bone '{bone}' has coincident origin and reference landmarks")]
    ZeroReference { bone: String },
    #[error("unknown bone '{0}'")]
    UnknownBone(String),
    #[error("invalid bone topology: {0}")]
    InvalidTopology(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SchemaViolation {
    /// Names outside the schema and schema names absent from the document.
    Names {
        unknown: Vec<String>,
        missing: Vec<String>,
    },
    NonFinite(String),
    NotAPoint(String),
}

impl std::fmt::Display for SchemaViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SchemaViolation::Names { unknown, missing } => {
                let mut parts = Vec::new();
                if !unknown.is_empty() {
                    parts.push(format!("unknown landmarks: {}", unknown.join(", ")));
                }
                if !missing.is_empty() {
                    parts.push(format!("missing landmarks: {}", missing.join(", ")));
                }
                write!(f, "{}", parts.join("; "))
            }
            SchemaViolation::NonFinite(name) => write!(f, "landmark '{name}' is not finite"),
            SchemaViolation::NotAPoint(name) => {
                write!(f, "landmark '{name}' is not an [x, y] pair")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandmarkSource {
    Template,
    Target,
}

/// The 25 named landmarks of one hand, in millimeters.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    points: BTreeMap<String, Point2<f64>>,
    source: LandmarkSource,
}

impl LandmarkSet {
    pub fn new(
        points: BTreeMap<String, Point2<f64>>,
        source: LandmarkSource,
    ) -> Result<Self, LandmarkError> {
        let unknown: Vec<String> = points
            .keys()
            .filter(|k| !LANDMARK_NAMES.contains(&k.as_str()))
            .cloned()
            .collect();
        let missing: Vec<String> = LANDMARK_NAMES
            .iter()
            .filter(|n| !points.contains_key(**n))
            .map(|n| n.to_string())
            .collect();
        if !unknown.is_empty() || !missing.is_empty() {
            return Err(LandmarkError::Schema(SchemaViolation::Names {
                unknown,
                missing,
            }));
        }
        if let Some((name, _)) = points
            .iter()
            .find(|(_, p)| !(p.x.is_finite() && p.y.is_finite()))
        {
            return Err(LandmarkError::Schema(SchemaViolation::NonFinite(
                name.clone(),
            )));
        }
        Ok(LandmarkSet { points, source })
    }

    pub fn get(&self, name: &str) -> Option<Point2<f64>> {
        self.points.get(name).copied()
    }

    pub fn source(&self) -> LandmarkSource {
        self.source
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Point2<f64>)> {
        self.points.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Same names with every point passed through `f`.
    pub fn map_points<F>(&self, source: LandmarkSource, f: F) -> Result<LandmarkSet, LandmarkError>
    where
        F: Fn(&str, &Point2<f64>) -> Point2<f64>,
    {
        let points = self
            .points
            .iter()
            .map(|(k, p)| (k.clone(), f(k, p)))
            .collect();
        LandmarkSet::new(points, source)
    }

    /// Serializes as a `name -> [x, y]` JSON object, names sorted.
    pub fn to_json(&self) -> String {
        let doc: BTreeMap<&str, [f64; 2]> = self
            .points
            .iter()
            .map(|(k, p)| (k.as_str(), [p.x, p.y]))
            .collect();
        serde_json::to_string_pretty(&doc).expect("landmark map serializes")
    }
}

/// Parses a `name -> [x, y]` JSON document.
pub fn load_landmarks(document: &str, source: LandmarkSource) -> Result<LandmarkSet, LandmarkError> {
    let raw: BTreeMap<String, serde_json::Value> =
        serde_json::from_str(document).map_err(|e| LandmarkError::Parse(e.to_string()))?;
    let mut points = BTreeMap::new();
    for (name, value) in raw {
        let xy = value
            .as_array()
            .filter(|a| a.len() == 2)
            .and_then(|a| Some([a[0].as_f64()?, a[1].as_f64()?]))
            .ok_or_else(|| LandmarkError::Schema(SchemaViolation::NotAPoint(name.clone())))?;
        points.insert(name, Point2::new(xy[0], xy[1]));
    }
    LandmarkSet::new(points, source)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoneLink {
    pub id: String,
    /// Proximal landmark, the origin of the bone's local frame.
    pub origin: String,
    /// Distal landmark defining the bone's reference direction and length.
    pub reference: String,
}

/// Which two landmarks define each bone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoneTopology {
    pub version: u32,
    pub bones: Vec<BoneLink>,
}

impl BoneTopology {
    /// The 19-bone hand: five metacarpals, proximal and distal phalanges for
    /// every finger and intermediate phalanges for all but the thumb.
    pub fn canonical() -> BoneTopology {
        let mut bones = Vec::with_capacity(19);
        let link = |id: String, origin: String, reference: String| BoneLink {
            id,
            origin,
            reference,
        };
        for finger in FINGERS {
            let chain: Vec<String> = if finger == "thumb" {
                ["cmc", "mcp", "ip", "tip"]
                    .iter()
                    .map(|j| format!("thumb_{j}"))
                    .collect()
            } else {
                ["cmc", "mcp", "pip", "dip", "tip"]
                    .iter()
                    .map(|j| format!("{finger}_{j}"))
                    .collect()
            };
            let segments: &[&str] = if finger == "thumb" {
                &["metacarpal", "proximal", "distal"]
            } else {
                &["metacarpal", "proximal", "intermediate", "distal"]
            };
            for (k, seg) in segments.iter().enumerate() {
                bones.push(link(
                    format!("{finger}_{seg}"),
                    chain[k].clone(),
                    chain[k + 1].clone(),
                ));
            }
        }
        BoneTopology { version: 1, bones }
    }

    pub fn from_json(document: &str) -> Result<BoneTopology, LandmarkError> {
        let topo: BoneTopology =
            serde_json::from_str(document).map_err(|e| LandmarkError::Parse(e.to_string()))?;
        topo.validate()?;
        Ok(topo)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("topology serializes")
    }

    pub fn validate(&self) -> Result<(), LandmarkError> {
        let mut seen = std::collections::BTreeSet::new();
        for b in &self.bones {
            if !seen.insert(b.id.as_str()) {
                return Err(LandmarkError::InvalidTopology(format!(
                    "bone '{}' listed twice",
                    b.id
                )));
            }
            for name in [&b.origin, &b.reference] {
                if !LANDMARK_NAMES.contains(&name.as_str()) {
                    return Err(LandmarkError::InvalidTopology(format!(
                        "bone '{}' names unknown landmark '{name}'",
                        b.id
                    )));
                }
            }
            if b.origin == b.reference {
                return Err(LandmarkError::InvalidTopology(format!(
                    "bone '{}' uses '{}' for both ends",
                    b.id, b.origin
                )));
            }
        }
        Ok(())
    }

    pub fn bone(&self, id: &str) -> Option<&BoneLink> {
        self.bones.iter().find(|b| b.id == id)
    }

    pub fn bone_ids(&self) -> impl Iterator<Item = &str> {
        self.bones.iter().map(|b| b.id.as_str())
    }
}

/// Local 2D frame of one bone: origin landmark plus the vector to the
/// reference landmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoneFrame {
    pub bone_id: String,
    pub origin: Point2<f64>,
    pub reference: Vector2<f64>,
}

pub fn bone_frame(
    landmarks: &LandmarkSet,
    topology: &BoneTopology,
    bone_id: &str,
) -> Result<BoneFrame, LandmarkError> {
    let link = topology
        .bone(bone_id)
        .ok_or_else(|| LandmarkError::UnknownBone(bone_id.to_string()))?;
    let lookup = |name: &str| {
        landmarks.get(name).ok_or_else(|| {
            LandmarkError::Schema(SchemaViolation::Names {
                unknown: vec![],
                missing: vec![name.to_string()],
            })
        })
    };
    let origin = lookup(&link.origin)?;
    let reference = lookup(&link.reference)? - origin;
    if reference.norm() < MIN_REFERENCE_MM {
        return Err(LandmarkError::ZeroReference {
            bone: bone_id.to_string(),
        });
    }
    Ok(BoneFrame {
        bone_id: bone_id.to_string(),
        origin,
        reference,
    })
}

/// `p -> rotation * p + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Rotation3<f64>,
    pub translation: Vector3<f64>,
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: Rotation3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn apply(&self, p: &Point3<f64>) -> Point3<f64> {
        self.rotation * p + self.translation
    }

    /// Row-major rotation matrix and translation, for logs and reports.
    pub fn to_rows(&self) -> ([[f64; 3]; 3], [f64; 3]) {
        let m = self.rotation.matrix();
        let rows = [0, 1, 2].map(|r| [m[(r, 0)], m[(r, 1)], m[(r, 2)]]);
        (rows, [self.translation.x, self.translation.y, self.translation.z])
    }
}

/// Moves the mesh so that its symmetry plane becomes z = 0.
///
/// The symmetry plane passes through the vertex centroid and is spanned by the
/// two principal directions of largest variance. The applied rotation is the
/// smallest one that takes the plane normal onto the z-axis, and the
/// translation only acts along z, so a mesh that is already symmetric about
/// z = 0 comes back unchanged.
pub fn align_midplane(mesh: &TriangleMesh) -> Result<(TriangleMesh, RigidTransform), LandmarkError> {
    let pa = principal_axes(mesh.vertices())
        .ok_or_else(|| LandmarkError::DegenerateGeometry("mesh has no vertices".into()))?;
    let scale = pa.variances[0];
    if !(scale > 0.0) || pa.variances[1] <= 1e-12 * scale {
        return Err(LandmarkError::DegenerateGeometry(
            "vertices do not span a plane".into(),
        ));
    }
    let mut normal = pa.axes[2];
    if normal.z < 0.0 {
        normal = -normal;
    }
    let rotation =
        Rotation3::rotation_between(&normal, &Vector3::z()).unwrap_or_else(Rotation3::identity);
    let centroid_z = (rotation * pa.centroid).z;
    let transform = RigidTransform {
        rotation,
        translation: Vector3::new(0.0, 0.0, -centroid_z),
    };
    let aligned = mesh
        .map_vertices(|p| transform.apply(p))
        .map_err(|e| LandmarkError::DegenerateGeometry(e.to_string()))?;
    Ok((aligned, transform))
}
