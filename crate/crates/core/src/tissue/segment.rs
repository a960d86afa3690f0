//! Cutting a per-bone segment out of the skin surface.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use crate::geom::is_inside;
use crate::mesh::TriangleMesh;

use super::TissueError;

/// Half-space boundary; the kept side is where `normal . (p - point) >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub point: Point3<f64>,
    pub normal: Vector3<f64>,
}

impl Plane {
    pub fn new(point: Point3<f64>, normal: Vector3<f64>) -> Plane {
        Plane {
            point,
            normal: normal.normalize(),
        }
    }

    pub fn signed_distance(&self, p: &Point3<f64>) -> f64 {
        self.normal.dot(&(p - self.point))
    }
}

/// Clips a closed mesh to the kept side of `plane` and closes every cut loop
/// with a triangle fan around the loop centroid.
pub fn clip_and_cap(mesh: &TriangleMesh, plane: &Plane) -> TriangleMesh {
    let d: Vec<f64> = mesh.vertices().iter().map(|p| plane.signed_distance(p)).collect();
    let mut vertices = mesh.vertices().to_vec();
    let mut cuts: HashMap<(usize, usize), usize> = HashMap::new();
    let mut cut = |a: usize, b: usize, vertices: &mut Vec<Point3<f64>>| -> usize {
        // `a` is kept, `b` is not.
        if d[a] == 0.0 {
            return a;
        }
        *cuts.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let (i, j) = (a.min(b), a.max(b));
            let t = d[i] / (d[i] - d[j]);
            vertices.push(vertices[i] + (vertices[j] - vertices[i]) * t);
            vertices.len() - 1
        })
    };

    let mut faces: Vec<[usize; 3]> = Vec::new();
    for &f in mesh.faces() {
        let inside = f.map(|v| d[v] >= 0.0);
        match inside.iter().filter(|&&x| x).count() {
            3 => faces.push(f),
            0 => {}
            n => {
                // Rotate so the pattern starts at a kept vertex followed by
                // the rest in winding order.
                let r = (0..3)
                    .find(|&r| {
                        if n == 1 {
                            inside[r]
                        } else {
                            inside[r] && inside[(r + 1) % 3]
                        }
                    })
                    .expect("pattern exists");
                let [a, b, c] = [f[r], f[(r + 1) % 3], f[(r + 2) % 3]];
                if n == 1 {
                    let ab = cut(a, b, &mut vertices);
                    let ac = cut(a, c, &mut vertices);
                    faces.push([a, ab, ac]);
                } else {
                    let bc = cut(b, c, &mut vertices);
                    let ac = cut(a, c, &mut vertices);
                    faces.push([a, b, bc]);
                    faces.push([a, bc, ac]);
                }
            }
        }
    }
    faces.retain(|f| f[0] != f[1] && f[1] != f[2] && f[0] != f[2]);

    // Boundary half-edges are those whose twin is missing.
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for f in &faces {
        for k in 0..3 {
            *directed.entry((f[k], f[(k + 1) % 3])).or_insert(0) += 1;
        }
    }
    let scale = mesh
        .vertices()
        .iter()
        .map(|p| p.coords.amax())
        .fold(1.0, f64::max);
    let on_plane = |v: usize, vertices: &Vec<Point3<f64>>| {
        plane.signed_distance(&vertices[v]).abs() <= 1e-9 * scale
    };
    let mut next: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut boundary: Vec<(usize, usize)> = directed
        .keys()
        .filter(|(u, v)| !directed.contains_key(&(*v, *u)))
        .copied()
        .collect();
    boundary.sort_unstable();
    for &(u, v) in &boundary {
        if on_plane(u, &vertices) && on_plane(v, &vertices) {
            next.entry(u).or_default().push(v);
        }
    }

    let mut starts: Vec<usize> = next.keys().copied().collect();
    starts.sort_unstable();
    for start in starts {
        while let Some(first) = next.get_mut(&start).and_then(|n| n.pop()) {
            let mut ring = vec![start];
            let mut cur = first;
            while cur != start {
                ring.push(cur);
                match next.get_mut(&cur).and_then(|n| n.pop()) {
                    Some(n) => cur = n,
                    None => break,
                }
            }
            if cur != start || ring.len() < 3 {
                log::warn!("left an open boundary of {} edges uncapped", ring.len());
                continue;
            }
            let center = Point3::from(
                ring.iter().fold(Vector3::zeros(), |s, &v| s + vertices[v].coords)
                    / ring.len() as f64,
            );
            vertices.push(center);
            let c = vertices.len() - 1;
            for k in 0..ring.len() {
                let (u, v) = (ring[k], ring[(k + 1) % ring.len()]);
                faces.push([v, u, c]);
            }
        }
    }
    TriangleMesh::from_parts(vertices, faces).compacted()
}

/// Cuts the skin between one or two planes and returns the closed piece that
/// contains the bone.
///
/// The planes are perpendicular to the bone's long axis at its joint
/// landmarks; distal bones have no far plane so the fingertip stays whole.
pub fn extract_segment(
    skin: &TriangleMesh,
    bone: &TriangleMesh,
    near: &Plane,
    far: Option<&Plane>,
) -> Result<TriangleMesh, TissueError> {
    let mut piece = clip_and_cap(skin, near);
    if let Some(far) = far {
        piece = clip_and_cap(&piece, far);
    }
    if piece.is_empty() {
        return Err(TissueError::Segment("no skin between the cutting planes".into()));
    }
    // Scans may be several overlapping closed parts, so more than one piece
    // can hold the bone centroid. Keep the one enclosing most of the bone.
    let stride = bone.vertex_count().div_ceil(64).max(1);
    let mut probes = vec![bone.centroid()];
    probes.extend(bone.vertices().iter().step_by(stride).copied());
    let mut best: Option<(usize, TriangleMesh)> = None;
    for c in piece.components() {
        if !is_inside(&c, &probes[0]) {
            continue;
        }
        let hits = probes.iter().filter(|p| is_inside(&c, p)).count();
        if best.as_ref().is_none_or(|(h, _)| hits > *h) {
            best = Some((hits, c));
        }
    }
    best.map(|(_, c)| c)
        .ok_or_else(|| TissueError::Segment("no skin component encloses the bone".into()))
}
