use std::collections::HashMap;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::{MeshError, TriangleMesh};

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    pub fn of_points<'a, I: IntoIterator<Item = &'a Point3<f64>>>(points: I) -> Option<Aabb> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        Some(it.fold(
            Aabb {
                min: first,
                max: first,
            },
            |b, p| Aabb {
                min: b.min.inf(p),
                max: b.max.sup(p),
            },
        ))
    }

    pub fn extents(&self) -> Vector3<f64> {
        self.max - self.min
    }

    pub fn contains(&self, p: &Point3<f64>, slack: f64) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] - slack && p[i] <= self.max[i] + slack)
    }
}

/// Topological and volumetric summary of a mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshReport {
    pub watertight: bool,
    pub boundary_edge_count: usize,
    pub non_manifold_edge_count: usize,
    /// Only meaningful when `watertight` is true.
    pub signed_volume_mm3: f64,
    pub bbox: Aabb,
    pub vertex_count: usize,
    pub face_count: usize,
    pub component_count: usize,
}

impl MeshReport {
    /// The signed volume, if the surface is closed enough for it to mean
    /// anything.
    pub fn trusted_volume(&self) -> Option<f64> {
        self.watertight.then_some(self.signed_volume_mm3)
    }
}

/// Sum of signed tetrahedron volumes spanned by each face and the origin.
///
/// Positive for closed surfaces wound outward.
pub fn signed_volume(mesh: &TriangleMesh) -> f64 {
    mesh.triangles()
        .map(|[a, b, c]| a.coords.dot(&b.coords.cross(&c.coords)))
        .sum::<f64>()
        / 6.0
}

pub(crate) fn edge_incidence(mesh: &TriangleMesh) -> HashMap<(usize, usize), u32> {
    let mut edges: HashMap<(usize, usize), u32> = HashMap::with_capacity(mesh.face_count() * 2);
    for &[a, b, c] in mesh.faces() {
        for (u, v) in [(a, b), (b, c), (c, a)] {
            *edges.entry((u.min(v), u.max(v))).or_insert(0) += 1;
        }
    }
    edges
}

pub fn analyze_mesh(mesh: &TriangleMesh) -> MeshReport {
    let edges = edge_incidence(mesh);
    let boundary_edge_count = edges.values().filter(|&&n| n == 1).count();
    let non_manifold_edge_count = edges.values().filter(|&&n| n > 2).count();
    let bbox = Aabb::of_points(mesh.vertices()).unwrap_or(Aabb {
        min: Point3::origin(),
        max: Point3::origin(),
    });
    MeshReport {
        watertight: boundary_edge_count == 0 && non_manifold_edge_count == 0,
        boundary_edge_count,
        non_manifold_edge_count,
        signed_volume_mm3: signed_volume(mesh),
        bbox,
        vertex_count: mesh.vertex_count(),
        face_count: mesh.face_count(),
        component_count: mesh.components().len(),
    }
}

/// Unit vertex normals from Max's facet weights: each incident face
/// contributes `e1 x e2 / (|e1|^2 |e2|^2)` for its two edges leaving the
/// vertex. The result is exact when a vertex and its neighbours lie on a
/// common sphere.
pub fn vertex_normals(mesh: &TriangleMesh) -> Result<Vec<Vector3<f64>>, MeshError> {
    let mut sums = vec![Vector3::zeros(); mesh.vertex_count()];
    let vs = mesh.vertices();
    for f in mesh.faces() {
        for k in 0..3 {
            let v = f[k];
            let e1 = vs[f[(k + 1) % 3]] - vs[v];
            let e2 = vs[f[(k + 2) % 3]] - vs[v];
            let w = e1.norm_squared() * e2.norm_squared();
            if w > 0.0 {
                sums[v] += e1.cross(&e2) / w;
            }
        }
    }
    sums.into_iter()
        .enumerate()
        .map(|(vertex, s)| {
            let len = s.norm();
            if len < 1e-12 || !len.is_finite() {
                Err(MeshError::DegenerateVertex { vertex })
            } else {
                Ok(s / len)
            }
        })
        .collect()
}
