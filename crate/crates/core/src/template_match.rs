//! Per-bone similarity fitting of a bone template to a target hand.
//!
//! Every bone is located by two landmarks. Comparing the template's
//! origin-to-reference vector `r` with the target's `r'` gives a rotation
//! about z by `theta` and a uniform scale `lambda = |r'| / |r|`; a translation
//! then carries the template origin landmark onto the target one. Applying
//! that transform to the template bone mesh places it in the target hand.
//!
//! The scale acts on all three axes so bone thickness follows bone length.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{Point2, Point3, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::landmarks::{
    bone_frame, BoneFrame, BoneTopology, LandmarkError, LandmarkSet, LandmarkSource,
    MIN_REFERENCE_MM,
};
use crate::mesh::{MeshError, TriangleMesh};
use crate::primitives::{capsule, cylinder};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchError {
    #[error("bone '{bone}' has a zero-length reference vector")]
    ZeroReference { bone: String },
    #[error(transparent)]
    Landmarks(#[from] LandmarkError),
    #[error("template has no mesh for bone '{0}'")]
    MissingTemplate(String),
    #[error("template mesh '{0}' is not part of the bone topology")]
    UnexpectedTemplate(String),
    #[error("bone '{bone}' spans {extent:.3} mm along its axis, need more than {needed:.3} mm")]
    BoneTooShort {
        bone: String,
        extent: f64,
        needed: f64,
    },
    #[error("invalid transform: {0}")]
    InvalidTransform(String),
    #[error("invalid hole spec: {0}")]
    InvalidHoleSpec(String),
    #[error("bone '{bone}': {source}")]
    Mesh { bone: String, source: MeshError },
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// `p -> lambda * Rz(theta) * p + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityTransform {
    /// Counterclockwise rotation about +z, radians in (-pi, pi].
    pub theta: f64,
    /// Uniform scale, > 0.
    pub lambda: f64,
    /// mm; z is always 0.
    pub translation: Vector3<f64>,
}

impl SimilarityTransform {
    pub fn new(theta: f64, lambda: f64, translation: Vector2<f64>) -> Result<Self, MatchError> {
        if !theta.is_finite() {
            return Err(MatchError::InvalidTransform(format!("theta = {theta}")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(MatchError::InvalidTransform(format!("lambda = {lambda}")));
        }
        if !(translation.x.is_finite() && translation.y.is_finite()) {
            return Err(MatchError::InvalidTransform("non-finite translation".into()));
        }
        Ok(SimilarityTransform {
            theta: normalize_angle(theta),
            lambda,
            translation: Vector3::new(translation.x, translation.y, 0.0),
        })
    }

    pub fn identity() -> Self {
        SimilarityTransform {
            theta: 0.0,
            lambda: 1.0,
            translation: Vector3::zeros(),
        }
    }

    /// Exact comparison, no tolerance.
    pub fn is_identity(&self) -> bool {
        self.theta == 0.0 && self.lambda == 1.0 && self.translation == Vector3::zeros()
    }

    pub fn apply_point(&self, p: &Point3<f64>) -> Point3<f64> {
        let (s, c) = self.theta.sin_cos();
        let l = self.lambda;
        Point3::new(
            l * (c * p.x - s * p.y) + self.translation.x,
            l * (s * p.x + c * p.y) + self.translation.y,
            l * p.z + self.translation.z,
        )
    }

    pub fn apply_point2(&self, p: &Point2<f64>) -> Point2<f64> {
        let q = self.apply_point(&Point3::new(p.x, p.y, 0.0));
        Point2::new(q.x, q.y)
    }

    pub fn apply_vector2(&self, v: &Vector2<f64>) -> Vector2<f64> {
        let (s, c) = self.theta.sin_cos();
        self.lambda * Vector2::new(c * v.x - s * v.y, s * v.x + c * v.y)
    }
}

/// Similarity transform taking the template frame onto the target frame.
pub fn estimate_transform(
    template: &BoneFrame,
    target: &BoneFrame,
) -> Result<SimilarityTransform, MatchError> {
    for f in [template, target] {
        if !(f.reference.norm() >= MIN_REFERENCE_MM) {
            return Err(MatchError::ZeroReference {
                bone: f.bone_id.clone(),
            });
        }
    }
    let (r, rp) = (template.reference, target.reference);
    let lambda = rp.norm() / r.norm();
    // Quadrant-correct signed angle; arcsine alone only covers (-pi/2, pi/2).
    let theta = (r.x * rp.y - r.y * rp.x).atan2(r.dot(&rp));
    let rotated_scaled = SimilarityTransform::new(theta, lambda, Vector2::zeros())?;
    let translation = target.origin - rotated_scaled.apply_point2(&template.origin);
    SimilarityTransform::new(theta, lambda, translation)
}

pub fn apply_transform(
    mesh: &TriangleMesh,
    t: &SimilarityTransform,
) -> Result<TriangleMesh, MeshError> {
    if t.is_identity() {
        return Ok(mesh.clone());
    }
    mesh.map_vertices(|p| t.apply_point(p))
}

/// Template bone meshes in the template's global frame, plus the template
/// landmarks that locate them.
#[derive(Debug, Clone)]
pub struct BoneTemplateSet {
    pub meshes: BTreeMap<String, TriangleMesh>,
    pub landmarks: LandmarkSet,
}

impl BoneTemplateSet {
    /// Checks that the meshes cover exactly the topology's bones.
    pub fn validate(&self, topology: &BoneTopology) -> Result<(), MatchError> {
        if let Some(missing) = topology.bone_ids().find(|b| !self.meshes.contains_key(*b)) {
            return Err(MatchError::MissingTemplate(missing.to_string()));
        }
        if let Some(extra) = self.meshes.keys().find(|k| topology.bone(k).is_none()) {
            return Err(MatchError::UnexpectedTemplate(extra.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FittedBone {
    pub mesh: TriangleMesh,
    pub transform: SimilarityTransform,
    /// The bone's frame in the target hand.
    pub frame: BoneFrame,
}

/// Fits every template bone to the target landmarks independently.
pub fn fit_template(
    templates: &BoneTemplateSet,
    topology: &BoneTopology,
    target: &LandmarkSet,
) -> Result<BTreeMap<String, FittedBone>, MatchError> {
    templates.validate(topology)?;
    let mut out = BTreeMap::new();
    for bone in topology.bone_ids() {
        let frame_err = |e: LandmarkError| match e {
            LandmarkError::ZeroReference { bone } => MatchError::ZeroReference { bone },
            other => MatchError::Landmarks(other),
        };
        let template_frame = bone_frame(&templates.landmarks, topology, bone).map_err(frame_err)?;
        let target_frame = bone_frame(target, topology, bone).map_err(frame_err)?;
        let transform = estimate_transform(&template_frame, &target_frame)?;
        let template_mesh = &templates.meshes[bone];
        let mesh = apply_transform(template_mesh, &transform).map_err(|source| MatchError::Mesh {
            bone: bone.to_string(),
            source,
        })?;
        out.insert(
            bone.to_string(),
            FittedBone {
                mesh,
                transform,
                frame: target_frame,
            },
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleSpec {
    pub diameter: f64,
    /// `None` drills through the local bone width.
    pub depth: Option<f64>,
    /// Inset of each hole from the bone's axial extremes.
    pub end_offset: f64,
}

impl Default for HoleSpec {
    fn default() -> Self {
        HoleSpec {
            diameter: 1.0,
            depth: None,
            end_offset: 2.0,
        }
    }
}

/// A cylindrical ligament hole: centered at `center`, running along `axis`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolePose {
    pub center: Point3<f64>,
    pub axis: Vector3<f64>,
    pub diameter: f64,
    pub depth: f64,
}

impl HolePose {
    /// Closed cylinder occupying the hole, for boolean subtraction in a slicer.
    pub fn cutter(&self, segments: usize) -> TriangleMesh {
        let half = self.axis * (self.depth / 2.0);
        cylinder(
            self.center - half,
            self.center + half,
            self.diameter / 2.0,
            segments,
        )
    }
}

/// One hole near each longitudinal end of a fitted bone.
///
/// The bone's long axis is the line through the vertex centroid along the
/// frame's reference direction. Holes sit on that axis, `end_offset` inside
/// the extremes of the vertices' axial projection, and run perpendicular to
/// both the long axis and z.
pub fn place_ligament_holes(
    bone_mesh: &TriangleMesh,
    frame: &BoneFrame,
    spec: &HoleSpec,
) -> Result<Vec<HolePose>, MatchError> {
    if !(spec.diameter > 0.0 && spec.end_offset >= 0.0) || spec.depth.is_some_and(|d| !(d > 0.0)) {
        return Err(MatchError::InvalidHoleSpec(format!("{spec:?}")));
    }
    if bone_mesh.vertex_count() == 0 {
        return Err(MatchError::Mesh {
            bone: frame.bone_id.clone(),
            source: MeshError::EmptyMesh,
        });
    }
    let r = frame.reference;
    if !(r.norm() >= MIN_REFERENCE_MM) {
        return Err(MatchError::ZeroReference {
            bone: frame.bone_id.clone(),
        });
    }
    let u2 = r.normalize();
    let long_axis = Vector3::new(u2.x, u2.y, 0.0);
    let hole_axis = Vector3::new(-u2.y, u2.x, 0.0);
    let centroid = bone_mesh.centroid();

    let axial: Vec<f64> = bone_mesh
        .vertices()
        .iter()
        .map(|p| (p - centroid).dot(&long_axis))
        .collect();
    let s_min = axial.iter().copied().fold(f64::INFINITY, f64::min);
    let s_max = axial.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let extent = s_max - s_min;
    if extent < 2.0 * spec.end_offset {
        return Err(MatchError::BoneTooShort {
            bone: frame.bone_id.clone(),
            extent,
            needed: 2.0 * spec.end_offset,
        });
    }

    let local_width = |s_center: f64| -> f64 {
        let window = spec.end_offset.max(0.05 * extent);
        let lateral = |pick: &dyn Fn(f64) -> bool| {
            let (lo, hi) = bone_mesh
                .vertices()
                .iter()
                .zip(&axial)
                .filter(|(_, s)| pick(**s))
                .map(|(p, _)| (p - centroid).dot(&hole_axis))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), w| {
                    (lo.min(w), hi.max(w))
                });
            (hi > lo).then_some(hi - lo)
        };
        lateral(&|s| (s - s_center).abs() <= window)
            .or_else(|| lateral(&|_| true))
            .unwrap_or(spec.diameter)
    };

    Ok([s_min + spec.end_offset, s_max - spec.end_offset]
        .into_iter()
        .map(|s| HolePose {
            center: centroid + long_axis * s,
            axis: hole_axis,
            diameter: spec.diameter,
            depth: spec.depth.unwrap_or_else(|| local_width(s)),
        })
        .collect())
}

/// Parametric template: one capsule per bone, sized from its length, laid
/// out in a generic adult right hand with fingers along +y.
///
/// The proportions are generic, not measured from any subject.
pub fn synthetic_template(topology: &BoneTopology) -> BoneTemplateSet {
    let landmarks = synthetic_template_landmarks();
    let meshes = topology
        .bones
        .iter()
        .map(|b| {
            let o = landmarks.get(&b.origin).expect("schema landmark");
            let r = landmarks.get(&b.reference).expect("schema landmark");
            (b.id.clone(), synthetic_bone(o, r))
        })
        .collect();
    BoneTemplateSet { meshes, landmarks }
}

/// Capsule between two joint landmarks, leaving a joint gap at each end.
pub fn synthetic_bone(origin: Point2<f64>, reference: Point2<f64>) -> TriangleMesh {
    let v = reference - origin;
    let len = v.norm();
    let u = v / len;
    let radius = 0.06 * len + 1.6;
    let inset = 0.12 * len;
    let at = |s: f64| Point3::new(origin.x + u.x * s, origin.y + u.y * s, 0.0);
    capsule(at(inset + radius), at(len - inset - radius), radius, 16, 4)
}

pub fn synthetic_template_landmarks() -> LandmarkSet {
    let mut points = BTreeMap::new();
    points.insert("wrist_center".to_string(), Point2::new(0.0, 0.0));
    // (finger, base x, joint y positions, lateral lean per mm of y)
    let fingers: [(&str, f64, &[f64], f64); 5] = [
        ("thumb", -22.0, &[14.0, 44.0, 76.0, 100.0], -0.45),
        ("index", -20.0, &[12.0, 78.0, 120.0, 146.0, 166.0], -0.03),
        ("middle", -3.0, &[12.0, 80.0, 126.0, 155.0, 176.0], 0.0),
        ("ring", 14.0, &[12.0, 76.0, 119.0, 146.0, 166.0], 0.03),
        ("little", 29.0, &[12.0, 68.0, 102.0, 123.0, 141.0], 0.07),
    ];
    for (finger, x0, ys, lean) in fingers {
        let joints: &[&str] = if finger == "thumb" {
            &["cmc", "mcp", "ip", "tip"]
        } else {
            &["cmc", "mcp", "pip", "dip", "tip"]
        };
        for (j, &y) in joints.iter().zip(ys) {
            points.insert(format!("{finger}_{j}"), Point2::new(x0 + lean * y, y));
        }
    }
    LandmarkSet::new(points, LandmarkSource::Template).expect("synthetic landmarks follow the schema")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{analyze_mesh, signed_volume};
    use crate::primitives::{box_mesh, cylinder};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn frame(o: (f64, f64), r: (f64, f64)) -> BoneFrame {
        BoneFrame {
            bone_id: "b".into(),
            origin: Point2::new(o.0, o.1),
            reference: Vector2::new(r.0, r.1),
        }
    }

    #[test]
    fn quarter_turn_with_double_scale() {
        let t = estimate_transform(&frame((0., 0.), (1., 0.)), &frame((0., 0.), (0., 2.))).unwrap();
        assert_relative_eq!(t.theta, PI / 2.0, epsilon = 1e-15);
        assert_eq!(t.lambda, 2.0);
        assert_eq!(t.translation, Vector3::zeros());
    }

    #[test]
    fn equal_frames_give_exact_identity() {
        let f = frame((3.5, -7.25), (0.3, 41.0));
        let t = estimate_transform(&f, &f).unwrap();
        assert!(t.is_identity(), "{t:?}");
    }

    #[test]
    fn half_turn_is_resolved() {
        let t = estimate_transform(&frame((0., 0.), (1., 0.)), &frame((0., 0.), (-3., 0.))).unwrap();
        assert_eq!(t.theta, PI);
        assert_eq!(t.lambda, 3.0);
        let t = estimate_transform(&frame((0., 0.), (1., 0.)), &frame((0., 0.), (-1., -1e-3))).unwrap();
        assert!(t.theta < -3.0);
    }

    #[test]
    fn zero_reference_is_rejected() {
        assert!(matches!(
            estimate_transform(&frame((0., 0.), (0., 0.)), &frame((0., 0.), (1., 0.))),
            Err(MatchError::ZeroReference { .. })
        ));
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(normalize_angle(-PI), PI);
        assert_relative_eq!(normalize_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_relative_eq!(normalize_angle(0.25), 0.25);
    }

    #[test]
    fn rotation_table() {
        let t = SimilarityTransform::new(PI / 2.0, 1.0, Vector2::zeros()).unwrap();
        let p = t.apply_point(&Point3::new(1.0, 0.0, 0.0));
        assert!((p - Point3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn identity_transform_returns_identical_mesh() {
        let m = crate::primitives::icosphere(2.0, 1)
            .map_vertices(|p| Point3::new(-0.0 * p.x, p.y, p.z))
            .unwrap();
        let out = apply_transform(&m, &SimilarityTransform::identity()).unwrap();
        assert_eq!(out, m);
    }

    #[test]
    fn doubling_scales_volume_by_eight() {
        let cube = box_mesh(Point3::origin(), Point3::new(1.0, 1.0, 1.0));
        let t = SimilarityTransform::new(0.0, 2.0, Vector2::zeros()).unwrap();
        assert_relative_eq!(
            signed_volume(&apply_transform(&cube, &t).unwrap()),
            8.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn invalid_transforms() {
        assert!(SimilarityTransform::new(0.0, 0.0, Vector2::zeros()).is_err());
        assert!(SimilarityTransform::new(0.0, f64::NAN, Vector2::zeros()).is_err());
        assert!(SimilarityTransform::new(f64::INFINITY, 1.0, Vector2::zeros()).is_err());
    }

    proptest! {
        #[test]
        fn maps_reference_landmark_exactly(
            ox in -100.0..100.0f64, oy in -100.0..100.0f64,
            rx in -50.0..50.0f64, ry in -50.0..50.0f64,
            tx in -100.0..100.0f64, ty in -100.0..100.0f64,
            qx in -50.0..50.0f64, qy in -50.0..50.0f64,
        ) {
            prop_assume!(Vector2::new(rx, ry).norm() > 1e-3 && Vector2::new(qx, qy).norm() > 1e-3);
            let a = frame((ox, oy), (rx, ry));
            let b = frame((tx, ty), (qx, qy));
            let t = estimate_transform(&a, &b).unwrap();
            let target_ref = b.origin + b.reference;
            let mapped = t.apply_point2(&(a.origin + a.reference));
            prop_assert!((mapped - target_ref).norm() <= 1e-9 * b.reference.norm().max(target_ref.coords.norm()));
            let mapped_origin = t.apply_point2(&a.origin);
            prop_assert!((mapped_origin - b.origin).norm() <= 1e-9 * (1.0 + b.origin.coords.norm()));
        }

        #[test]
        fn recovers_a_known_transform(
            theta in -3.1..3.1f64, lambda in 0.2..5.0f64,
            tx in -50.0..50.0f64, ty in -50.0..50.0f64,
            rx in 1.0..40.0f64, ry in -40.0..40.0f64,
        ) {
            let t = SimilarityTransform::new(theta, lambda, Vector2::new(tx, ty)).unwrap();
            let a = frame((5.0, -3.0), (rx, ry));
            let b = BoneFrame {
                bone_id: "b".into(),
                origin: t.apply_point2(&a.origin),
                reference: t.apply_vector2(&a.reference),
            };
            let est = estimate_transform(&a, &b).unwrap();
            prop_assert!((est.theta - t.theta).abs() < 1e-9);
            prop_assert!((est.lambda - t.lambda).abs() < 1e-9 * t.lambda);
        }

        #[test]
        fn volume_scales_with_lambda_cubed(theta in -3.0..3.0f64, lambda in 0.1..4.0f64) {
            let m = crate::primitives::icosphere(3.0, 1)
                .map_vertices(|p| p + Vector3::new(4.0, -2.0, 1.0))
                .unwrap();
            let t = SimilarityTransform::new(theta, lambda, Vector2::new(7.0, 1.0)).unwrap();
            let v = signed_volume(&apply_transform(&m, &t).unwrap());
            prop_assert!((v - lambda.powi(3) * signed_volume(&m)).abs() <= 1e-6 * v.abs());
        }
    }

    #[test]
    fn template_fits_itself() {
        let topo = BoneTopology::canonical();
        let set = synthetic_template(&topo);
        let target = set.landmarks.map_points(LandmarkSource::Target, |_, p| *p).unwrap();
        let fitted = fit_template(&set, &topo, &target).unwrap();
        assert_eq!(fitted.len(), 19);
        for (bone, fb) in &fitted {
            assert!(fb.transform.is_identity(), "{bone}");
            assert_eq!(&fb.mesh, &set.meshes[bone]);
        }
    }

    #[test]
    fn uniform_scaling_of_landmarks_scales_every_bone() {
        let topo = BoneTopology::canonical();
        let set = synthetic_template(&topo);
        let target = set
            .landmarks
            .map_points(LandmarkSource::Target, |_, p| Point2::from(p.coords * 1.2))
            .unwrap();
        let fitted = fit_template(&set, &topo, &target).unwrap();
        for (bone, fb) in &fitted {
            assert_relative_eq!(fb.transform.lambda, 1.2, max_relative = 1e-12);
            assert!(fb.transform.theta.abs() < 1e-12);
            for (p, q) in fb.mesh.vertices().iter().zip(set.meshes[bone].vertices()) {
                assert!((p.coords - q.coords * 1.2).norm() < 1e-9, "{bone}");
            }
        }
    }

    #[test]
    fn moving_one_finger_leaves_other_bones_untouched() {
        let topo = BoneTopology::canonical();
        let set = synthetic_template(&topo);
        let base = set.landmarks.map_points(LandmarkSource::Target, |_, p| *p).unwrap();
        let pivot = base.get("index_mcp").unwrap();
        let rot = nalgebra::Rotation2::new(10f64.to_radians());
        let bent = base
            .map_points(LandmarkSource::Target, |name, p| {
                if name.starts_with("index_") && name != "index_cmc" {
                    pivot + rot * (p - pivot)
                } else {
                    *p
                }
            })
            .unwrap();
        let a = fit_template(&set, &topo, &base).unwrap();
        let b = fit_template(&set, &topo, &bent).unwrap();
        for bone in topo.bone_ids() {
            let moved = a[bone].mesh != b[bone].mesh;
            let expect = matches!(bone, "index_proximal" | "index_intermediate" | "index_distal");
            assert_eq!(moved, expect, "{bone}");
        }
        assert_relative_eq!(
            b["index_proximal"].transform.theta,
            10f64.to_radians(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn missing_template_mesh_is_reported() {
        let topo = BoneTopology::canonical();
        let mut set = synthetic_template(&topo);
        set.meshes.remove("ring_distal");
        let target = set.landmarks.clone();
        assert_eq!(
            fit_template(&set, &topo, &target).unwrap_err(),
            MatchError::MissingTemplate("ring_distal".into())
        );
    }

    #[test]
    fn coincident_target_landmarks_name_the_bone() {
        let topo = BoneTopology::canonical();
        let set = synthetic_template(&topo);
        let tip = set.landmarks.get("little_dip").unwrap();
        let target = set
            .landmarks
            .map_points(LandmarkSource::Target, |n, p| if n == "little_tip" { tip } else { *p })
            .unwrap();
        assert_eq!(
            fit_template(&set, &topo, &target).unwrap_err(),
            MatchError::ZeroReference {
                bone: "little_distal".into()
            }
        );
    }

    #[test]
    fn holes_on_a_cylinder_bone() {
        let bone = cylinder(Point3::origin(), Point3::new(0.0, 30.0, 0.0), 3.0, 24);
        let f = BoneFrame {
            bone_id: "test".into(),
            origin: Point2::new(0.0, 0.0),
            reference: Vector2::new(0.0, 30.0),
        };
        let spec = HoleSpec {
            diameter: 1.0,
            depth: Some(6.0),
            end_offset: 3.0,
        };
        let holes = place_ligament_holes(&bone, &f, &spec).unwrap();
        assert_eq!(holes.len(), 2);
        assert!((holes[0].center - Point3::new(0.0, 3.0, 0.0)).norm() < 1e-9);
        assert!((holes[1].center - Point3::new(0.0, 27.0, 0.0)).norm() < 1e-9);
        for h in &holes {
            assert!((h.axis - Vector3::new(-1.0, 0.0, 0.0)).norm() < 1e-12);
            assert!(h.axis.dot(&Vector3::z()).abs() < 1e-12);
        }
        let cutter = holes[0].cutter(16);
        assert!(analyze_mesh(&cutter).watertight);

        let too_far = HoleSpec {
            end_offset: 20.0,
            ..spec
        };
        assert!(matches!(
            place_ligament_holes(&bone, &f, &too_far),
            Err(MatchError::BoneTooShort { .. })
        ));
    }

    #[test]
    fn default_holes_fit_inside_every_template_bone() {
        let topo = BoneTopology::canonical();
        let set = synthetic_template(&topo);
        for bone in topo.bone_ids() {
            let f = bone_frame(&set.landmarks, &topo, bone).unwrap();
            let mesh = &set.meshes[bone];
            let holes = place_ligament_holes(mesh, &f, &HoleSpec::default()).unwrap();
            assert_eq!(holes.len(), 2);
            let bbox = analyze_mesh(mesh).bbox;
            for h in holes {
                assert!(bbox.contains(&h.center, 1e-9), "{bone}");
                assert!(h.depth > 0.0 && h.depth <= 2.0 * (0.06 * f.reference.norm() + 1.6) + 1e-9);
            }
        }
    }

    #[test]
    fn template_bones_are_closed() {
        let topo = BoneTopology::canonical();
        let set = synthetic_template(&topo);
        set.validate(&topo).unwrap();
        for (id, m) in &set.meshes {
            let r = analyze_mesh(m);
            assert!(r.watertight && r.signed_volume_mm3 > 0.0, "{id}");
        }
    }
}
