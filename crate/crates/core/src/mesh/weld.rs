use std::collections::HashMap;

use nalgebra::Point3;

/// Incremental vertex welder: points closer than `tolerance` share an index.
///
/// Points are bucketed on a grid with cell size `tolerance`; a lookup checks
/// the 27 surrounding cells, so any match within tolerance is found.
pub(crate) struct Welder {
    tolerance: f64,
    cells: HashMap<[i64; 3], Vec<usize>>,
    vertices: Vec<Point3<f64>>,
}

impl Welder {
    pub(crate) fn new(tolerance: f64) -> Self {
        Welder {
            tolerance,
            cells: HashMap::new(),
            vertices: Vec::new(),
        }
    }

    fn cell(&self, p: &Point3<f64>) -> [i64; 3] {
        // Saturating float->int casts keep huge coordinates in the edge cells.
        [
            (p.x / self.tolerance).floor() as i64,
            (p.y / self.tolerance).floor() as i64,
            (p.z / self.tolerance).floor() as i64,
        ]
    }

    pub(crate) fn insert(&mut self, p: Point3<f64>) -> usize {
        let key = self.cell(&p);
        let tol2 = self.tolerance * self.tolerance;
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                for dz in -1..=1i64 {
                    let k = [
                        key[0].saturating_add(dx),
                        key[1].saturating_add(dy),
                        key[2].saturating_add(dz),
                    ];
                    if let Some(ids) = self.cells.get(&k) {
                        for &id in ids {
                            if (self.vertices[id] - p).norm_squared() <= tol2 {
                                return id;
                            }
                        }
                    }
                }
            }
        }
        let id = self.vertices.len();
        self.vertices.push(p);
        self.cells.entry(key).or_default().push(id);
        id
    }

    pub(crate) fn into_vertices(self) -> Vec<Point3<f64>> {
        self.vertices
    }
}
