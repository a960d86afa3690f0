//! Closed, outward-wound primitive meshes used for synthetic fixtures,
//! struts and hole cutters.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{Point3, Vector3};

use crate::mesh::TriangleMesh;

/// Geodesic sphere from a subdivided icosahedron, centered at the origin.
///
/// Level `n` has `20 * 4^n` faces; every vertex lies on the sphere.
pub fn icosphere(radius: f64, subdivisions: u32) -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vector3<f64>> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vector3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vector3<f64>>| {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let vertices = verts.into_iter().map(|v| Point3::from(v * radius)).collect();
    TriangleMesh::from_parts(vertices, faces)
}

/// Axis-aligned box, two triangles per side.
pub fn box_mesh(min: Point3<f64>, max: Point3<f64>) -> TriangleMesh {
    let (a, b) = (min, max);
    let vertices = vec![
        Point3::new(a.x, a.y, a.z),
        Point3::new(b.x, a.y, a.z),
        Point3::new(b.x, b.y, a.z),
        Point3::new(a.x, b.y, a.z),
        Point3::new(a.x, a.y, b.z),
        Point3::new(b.x, a.y, b.z),
        Point3::new(b.x, b.y, b.z),
        Point3::new(a.x, b.y, b.z),
    ];
    let faces = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [1, 2, 6],
        [1, 6, 5],
        [2, 3, 7],
        [2, 7, 6],
        [3, 0, 4],
        [3, 4, 7],
    ];
    TriangleMesh::from_parts(vertices, faces)
}

/// Orthonormal pair perpendicular to the unit vector `d`, right-handed with it.
pub fn perpendicular_basis(d: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if d.x.abs() <= d.y.abs() && d.x.abs() <= d.z.abs() {
        Vector3::x()
    } else if d.y.abs() <= d.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let u = d.cross(&helper).normalize();
    let v = d.cross(&u);
    (u, v)
}

/// Closed cylinder between two points with flat caps.
///
/// # Panics
/// If the points coincide, the radius is not positive, or `segments < 3`.
pub fn cylinder(a: Point3<f64>, b: Point3<f64>, radius: f64, segments: usize) -> TriangleMesh {
    let axis = b - a;
    assert!(axis.norm() > 0.0, "cylinder endpoints coincide");
    assert!(radius > 0.0 && segments >= 3);
    let d = axis.normalize();
    let (u, v) = perpendicular_basis(&d);
    let ring = |center: Point3<f64>| -> Vec<Point3<f64>> {
        (0..segments)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / segments as f64;
                center + (u * t.cos() + v * t.sin()) * radius
            })
            .collect()
    };
    // Caps are fans from the first ring vertex so that no vertex sits on the
    // axis endpoints themselves.
    let mut vertices = ring(a);
    vertices.extend(ring(b));
    let bottom = |k: usize| k % segments;
    let top = |k: usize| segments + k % segments;
    let mut faces = Vec::with_capacity(4 * segments - 4);
    for k in 0..segments {
        faces.push([bottom(k), bottom(k + 1), top(k + 1)]);
        faces.push([bottom(k), top(k + 1), top(k)]);
    }
    for k in 1..segments - 1 {
        faces.push([bottom(0), bottom(k + 1), bottom(k)]);
        faces.push([top(0), top(k), top(k + 1)]);
    }
    TriangleMesh::from_parts(vertices, faces)
}

/// Closed capsule (cylinder with hemispherical ends) whose axis runs from
/// `a` to `b`; the surface extends `radius` past each endpoint.
///
/// # Panics
/// If the points coincide, the radius is not positive, `segments < 3` or
/// `rings < 1`.
pub fn capsule(
    a: Point3<f64>,
    b: Point3<f64>,
    radius: f64,
    segments: usize,
    rings: usize,
) -> TriangleMesh {
    let axis = b - a;
    assert!(axis.norm() > 0.0, "capsule endpoints coincide");
    assert!(radius > 0.0 && segments >= 3 && rings >= 1);
    let d = axis.normalize();
    let (u, v) = perpendicular_basis(&d);

    // Latitude rings from the `a` pole to the `b` pole.
    let mut rings_pos: Vec<(Point3<f64>, f64)> = Vec::new();
    for i in 1..=rings {
        let polar = PI / 2.0 * i as f64 / rings as f64;
        rings_pos.push((a - d * (radius * polar.cos()), radius * polar.sin()));
    }
    // Body rings keep the side faces roughly as long as they are wide.
    let len = axis.norm();
    let body = (len / (2.0 * PI * radius / segments as f64)).ceil().max(1.0) as usize;
    for j in 1..body {
        rings_pos.push((a + d * (len * j as f64 / body as f64), radius));
    }
    for i in 0..rings {
        let polar = PI / 2.0 * i as f64 / rings as f64;
        rings_pos.push((b + d * (radius * polar.sin()), radius * polar.cos()));
    }

    let mut vertices = vec![a - d * radius];
    for (center, r) in &rings_pos {
        for k in 0..segments {
            let t = 2.0 * PI * k as f64 / segments as f64;
            vertices.push(center + (u * t.cos() + v * t.sin()) * *r);
        }
    }
    vertices.push(b + d * radius);
    let north = vertices.len() - 1;
    let idx = |ring: usize, k: usize| 1 + ring * segments + k % segments;

    let mut faces = Vec::new();
    for k in 0..segments {
        faces.push([0, idx(0, k + 1), idx(0, k)]);
    }
    for r in 0..rings_pos.len() - 1 {
        for k in 0..segments {
            faces.push([idx(r, k), idx(r, k + 1), idx(r + 1, k + 1)]);
            faces.push([idx(r, k), idx(r + 1, k + 1), idx(r + 1, k)]);
        }
    }
    let last = rings_pos.len() - 1;
    for k in 0..segments {
        faces.push([north, idx(last, k), idx(last, k + 1)]);
    }
    TriangleMesh::from_parts(vertices, faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{analyze_mesh, signed_volume};

    #[test]
    fn icosphere_face_counts_and_radius() {
        for level in 0..4 {
            let m = icosphere(3.0, level);
            assert_eq!(m.face_count(), 20 * 4usize.pow(level));
            let r = analyze_mesh(&m);
            assert!(r.watertight, "level {level}");
            assert!(r.signed_volume_mm3 > 0.0);
            for v in m.vertices() {
                assert!((v.coords.norm() - 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cylinder_is_closed_and_outward() {
        let m = cylinder(
            Point3::new(1.0, 2.0, 3.0),
            Point3::new(4.0, -2.0, 3.0),
            0.5,
            32,
        );
        let r = analyze_mesh(&m);
        assert!(r.watertight);
        // Inscribed polygon area times length.
        let area = 0.5 * 32.0 * 0.25 * (2.0 * PI / 32.0).sin();
        assert!((signed_volume(&m) - area * 5.0).abs() < 1e-9);
    }

    #[test]
    fn capsule_is_closed_and_outward() {
        let m = capsule(Point3::origin(), Point3::new(0.0, 10.0, 0.0), 2.0, 24, 6);
        let r = analyze_mesh(&m);
        assert!(r.watertight);
        let exact = PI * 4.0 * 10.0 + 4.0 / 3.0 * PI * 8.0;
        assert!(r.signed_volume_mm3 > 0.95 * exact && r.signed_volume_mm3 < exact);
        assert!((r.bbox.min.y + 2.0).abs() < 1e-12);
        assert!((r.bbox.max.y - 12.0).abs() < 1e-12);
    }

    #[test]
    fn box_is_closed() {
        let m = box_mesh(Point3::new(-1.0, -2.0, -3.0), Point3::new(1.0, 2.0, 3.0));
        assert!(analyze_mesh(&m).watertight);
        assert!((signed_volume(&m) - 48.0).abs() < 1e-12);
    }
}
