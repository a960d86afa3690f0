use crate::geom::self_intersections;
use crate::mesh::{analyze_mesh, vertex_normals, TriangleMesh};

use super::TissueError;

/// Result of moving a surface along its vertex normals.
#[derive(Debug, Clone)]
pub struct OffsetSurface {
    pub mesh: TriangleMesh,
    /// Face pairs of the offset mesh that cross each other.
    pub self_intersections: Vec<(usize, usize)>,
    pub warnings: Vec<String>,
}

/// Moves every vertex by `delta` along its area-weighted normal
/// (positive = outward). Connectivity is unchanged.
///
/// Self-intersections are detected and reported, not repaired.
pub fn offset_surface(mesh: &TriangleMesh, delta: f64) -> Result<OffsetSurface, TissueError> {
    if !delta.is_finite() {
        return Err(TissueError::InvalidSpec(format!("offset distance {delta}")));
    }
    let mut warnings = Vec::new();
    let report = analyze_mesh(mesh);
    if !report.watertight {
        warnings.push(format!(
            "offsetting a mesh with {} boundary and {} non-manifold edges",
            report.boundary_edge_count, report.non_manifold_edge_count
        ));
    }
    let feature_size = report.bbox.extents().min() / 2.0;
    if delta.abs() >= feature_size / 2.0 {
        warnings.push(format!(
            "offset {delta} mm is large relative to the estimated feature size {feature_size:.3} mm"
        ));
    }

    let out = if delta == 0.0 {
        mesh.clone()
    } else {
        let normals = vertex_normals(mesh)?;
        let mut i = 0;
        mesh.map_vertices(|p| {
            let q = p + normals[i] * delta;
            i += 1;
            q
        })?
    };
    for w in &warnings {
        log::warn!("{w}");
    }
    let crossings = self_intersections(&out);
    if !crossings.is_empty() {
        log::warn!("offset surface has {} self-intersecting face pairs", crossings.len());
    }
    Ok(OffsetSurface {
        mesh: out,
        self_intersections: crossings,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::signed_volume;
    use crate::primitives::{box_mesh, cylinder, icosphere};
    use nalgebra::Point3;
    use std::f64::consts::PI;

    #[test]
    fn sphere_shrinks_radially() {
        let s = icosphere(10.0, 4);
        let off = offset_surface(&s, -0.4).unwrap();
        for v in off.mesh.vertices() {
            assert!((v.coords.norm() - 9.6).abs() < 1e-6, "{}", v.coords.norm());
        }
        assert!(off.self_intersections.is_empty());
        assert!(off.warnings.is_empty());
    }

    #[test]
    fn sphere_grows_with_expected_volume() {
        let s = icosphere(10.0, 4);
        let off = offset_surface(&s, 0.4).unwrap();
        let exact = 4.0 / 3.0 * PI * 10.4f64.powi(3);
        assert!((signed_volume(&off.mesh) - exact).abs() / exact < 5e-3);
    }

    #[test]
    fn zero_offset_is_identity() {
        let s = icosphere(3.0, 2);
        assert_eq!(offset_surface(&s, 0.0).unwrap().mesh, s);
    }

    #[test]
    fn consecutive_sphere_offsets_add() {
        let s = icosphere(10.0, 3);
        let once = offset_surface(&s, -0.7).unwrap().mesh;
        let twice = offset_surface(&offset_surface(&s, -0.3).unwrap().mesh, -0.4)
            .unwrap()
            .mesh;
        for (a, b) in once.vertices().iter().zip(twice.vertices()) {
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn colliding_offsets_are_reported() {
        let a = box_mesh(Point3::origin(), Point3::new(4.0, 4.0, 4.0));
        let b = box_mesh(Point3::new(4.5, 0.0, 0.0), Point3::new(8.5, 4.0, 4.0));
        let pair = TriangleMesh::merge([&a, &b]);
        assert!(offset_surface(&pair, 0.1).unwrap().self_intersections.is_empty());
        let off = offset_surface(&pair, 0.5).unwrap();
        assert!(!off.self_intersections.is_empty());
    }

    #[test]
    fn thin_rod_offset_warns() {
        let b = cylinder(Point3::origin(), Point3::new(0.0, 0.0, 10.0), 1.0, 12);
        let off = offset_surface(&b, -0.6).unwrap();
        assert!(!off.warnings.is_empty());
    }

    #[test]
    fn open_mesh_gets_a_warning() {
        let s = icosphere(3.0, 1);
        let open = TriangleMesh::new(s.vertices().to_vec(), s.faces()[1..].to_vec()).unwrap();
        let off = offset_surface(&open, 0.1).unwrap();
        assert!(off.warnings.iter().any(|w| w.contains("boundary")));
    }

    #[test]
    fn small_offset_of_a_box_is_quiet() {
        let b = box_mesh(Point3::origin(), Point3::new(10.0, 10.0, 4.0));
        let off = offset_surface(&b, -0.4).unwrap();
        assert!(off.warnings.is_empty());
        assert!(off.self_intersections.is_empty());
        assert!(signed_volume(&off.mesh) < signed_volume(&b));
    }
}
