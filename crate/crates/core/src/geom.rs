//! Point, ray and triangle queries against meshes.

use nalgebra::{Matrix3, Point3, SymmetricEigen, Vector3};

use crate::mesh::{Aabb, TriangleMesh};

const PARALLEL_EPS: f64 = 1e-14;
/// Barycentric slack so rays through a shared edge or vertex hit at least
/// one of the faces around it.
const EDGE_EPS: f64 = 1e-10;

/// Ray parameter `t >= 0` at which `origin + t * dir` hits the triangle.
pub fn ray_triangle(origin: &Point3<f64>, dir: &Vector3<f64>, tri: &[Point3<f64>; 3]) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < PARALLEL_EPS * e1.norm() * e2.norm() * dir.norm() {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - tri[0];
    let u = s.dot(&p) * inv;
    if !(-EDGE_EPS..=1.0 + EDGE_EPS).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < -EDGE_EPS || u + v > 1.0 + EDGE_EPS {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t >= 0.0).then_some(t)
}

/// All ray hit parameters against the mesh, ascending.
pub fn ray_hits(mesh: &TriangleMesh, origin: &Point3<f64>, dir: &Vector3<f64>) -> Vec<f64> {
    let mut hits: Vec<f64> = mesh
        .triangles()
        .filter_map(|t| ray_triangle(origin, dir, &t))
        .collect();
    hits.sort_by(f64::total_cmp);
    hits
}

fn segment_hits_triangle(p: &Point3<f64>, q: &Point3<f64>, tri: &[Point3<f64>; 3]) -> bool {
    matches!(ray_triangle(p, &(q - p), tri), Some(t) if t <= 1.0)
}

/// Whether two non-coplanar triangles cross (an edge of one pierces the other).
pub fn triangles_intersect(a: &[Point3<f64>; 3], b: &[Point3<f64>; 3]) -> bool {
    (0..3).any(|i| segment_hits_triangle(&a[i], &a[(i + 1) % 3], b))
        || (0..3).any(|i| segment_hits_triangle(&b[i], &b[(i + 1) % 3], a))
}

/// Pairs of faces that intersect without sharing a vertex, `(i, j)` with `i < j`.
///
/// Broad phase is a sweep over face bounding boxes sorted along x.
pub fn self_intersections(mesh: &TriangleMesh) -> Vec<(usize, usize)> {
    let boxes: Vec<Aabb> = mesh
        .triangles()
        .map(|t| Aabb::of_points(&t).expect("triangle has corners"))
        .collect();
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&i, &j| boxes[i].min.x.total_cmp(&boxes[j].min.x));

    let mut pairs = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        let bi = &boxes[i];
        for &j in &order[k + 1..] {
            let bj = &boxes[j];
            if bj.min.x > bi.max.x {
                break;
            }
            if bj.min.y > bi.max.y || bj.max.y < bi.min.y || bj.min.z > bi.max.z || bj.max.z < bi.min.z {
                continue;
            }
            let (fi, fj) = (mesh.faces()[i], mesh.faces()[j]);
            if fi.iter().any(|v| fj.contains(v)) {
                continue;
            }
            if triangles_intersect(&mesh.triangle(i), &mesh.triangle(j)) {
                pairs.push((i.min(j), i.max(j)));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Closest point to `p` on triangle `abc` (Voronoi-region walk).
pub fn closest_point_on_triangle(p: &Point3<f64>, tri: &[Point3<f64>; 3]) -> Point3<f64> {
    let [a, b, c] = *tri;
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Unsigned distance from `p` to the closest point of the surface.
pub fn distance_to_mesh(mesh: &TriangleMesh, p: &Point3<f64>) -> f64 {
    mesh.triangles()
        .map(|t| (closest_point_on_triangle(p, &t) - p).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Generalized winding number of a closed surface around `p`: about 1 inside
/// an outward-wound surface, 0 outside.
pub fn winding_number(mesh: &TriangleMesh, p: &Point3<f64>) -> f64 {
    let mut total = 0.0;
    for [a, b, c] in mesh.triangles() {
        let (ra, rb, rc) = (a - p, b - p, c - p);
        let (la, lb, lc) = (ra.norm(), rb.norm(), rc.norm());
        let num = ra.dot(&rb.cross(&rc));
        let den = la * lb * lc + ra.dot(&rb) * lc + rb.dot(&rc) * la + rc.dot(&ra) * lb;
        total += 2.0 * num.atan2(den);
    }
    total / (4.0 * std::f64::consts::PI)
}

pub fn is_inside(mesh: &TriangleMesh, p: &Point3<f64>) -> bool {
    winding_number(mesh, p) > 0.5
}

/// Principal axes of a point cloud.
#[derive(Debug, Clone)]
pub struct PrincipalAxes {
    pub centroid: Point3<f64>,
    /// Variances along each axis, descending.
    pub variances: [f64; 3],
    /// Unit axes matching `variances`.
    pub axes: [Vector3<f64>; 3],
}

pub fn principal_axes(points: &[Point3<f64>]) -> Option<PrincipalAxes> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let centroid = Point3::from(points.iter().fold(Vector3::zeros(), |s, p| s + p.coords) / n);
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let axes = idx.map(|i| eig.eigenvectors.column(i).into_owned());
    Some(PrincipalAxes {
        centroid,
        variances: idx.map(|i| eig.eigenvalues[i].max(0.0)),
        axes,
    })
}
