//! Indexed triangle meshes and their file formats.
//!
//! All geometry is in millimeters. Faces are wound counterclockwise when seen
//! from outside, so the right-hand-rule normal points outward.
//!
//! Supported formats are binary STL, ASCII STL and OBJ (`v`/`f` records).
//! STL stores every facet with its own copy of the corner positions, so the
//! STL readers weld coincident corners back into shared vertices.

mod analysis;
mod obj;
mod stl;
mod weld;

use std::fmt;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use analysis::{analyze_mesh, signed_volume, vertex_normals, Aabb, MeshReport};

/// Distance under which STL corners are merged into one vertex.
pub const WELD_TOLERANCE_MM: f64 = 1e-6;

/// Where in an input file a parse error was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourcePos {
    Byte(usize),
    Line(usize),
}

impl fmt::Display for SourcePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourcePos::Byte(b) => write!(f, "byte {b}"),
            SourcePos::Line(l) => write!(f, "line {l}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("malformed mesh file at {position}: {message}")]
    MalformedFile { position: SourcePos, message: String },
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("vertex {vertex} has no well-defined normal")]
    DegenerateVertex { vertex: usize },
}

impl MeshError {
    pub(crate) fn malformed(position: SourcePos, message: impl Into<String>) -> Self {
        MeshError::MalformedFile {
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshFormat {
    StlBinary,
    StlAscii,
    Obj,
    /// Only valid for reading.
    Auto,
}

impl MeshFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MeshFormat::Obj => "obj",
            _ => "stl",
        }
    }
}

impl std::str::FromStr for MeshFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stl_binary" => Ok(MeshFormat::StlBinary),
            "stl_ascii" => Ok(MeshFormat::StlAscii),
            "obj" => Ok(MeshFormat::Obj),
            "auto" => Ok(MeshFormat::Auto),
            other => Err(format!(
                "unknown mesh format '{other}' (expected stl_binary, stl_ascii, obj or auto)"
            )),
        }
    }
}

/// An indexed triangle surface.
///
/// Invariants, checked by [`TriangleMesh::new`]: every face index is in range,
/// no face repeats a vertex, and every coordinate is finite.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[usize; 3]>,
    name: Option<String>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        for (i, v) in vertices.iter().enumerate() {
            if !v.iter().all(|c| c.is_finite()) {
                return Err(MeshError::InvalidMesh(format!(
                    "vertex {i} has a non-finite coordinate"
                )));
            }
        }
        for (i, f) in faces.iter().enumerate() {
            if let Some(&bad) = f.iter().find(|&&idx| idx >= vertices.len()) {
                return Err(MeshError::InvalidMesh(format!(
                    "face {i} references vertex {bad} but the mesh has {} vertices",
                    vertices.len()
                )));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::InvalidMesh(format!(
                    "face {i} references the same vertex twice"
                )));
            }
        }
        Ok(TriangleMesh {
            vertices,
            faces,
            name: None,
        })
    }

    /// Builds a mesh whose invariants the caller already guarantees.
    pub(crate) fn from_parts(vertices: Vec<Point3<f64>>, faces: Vec<[usize; 3]>) -> Self {
        debug_assert!(TriangleMesh::new(vertices.clone(), faces.clone()).is_ok());
        TriangleMesh {
            vertices,
            faces,
            name: None,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn triangle(&self, face: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangles(&self) -> impl Iterator<Item = [Point3<f64>; 3]> + '_ {
        (0..self.faces.len()).map(|f| self.triangle(f))
    }

    /// Unnormalized face normal; its length is twice the triangle area.
    pub fn face_area_vector(&self, face: usize) -> Vector3<f64> {
        let [a, b, c] = self.triangle(face);
        (b - a).cross(&(c - a))
    }

    /// Applies `f` to every vertex, keeping connectivity.
    ///
    /// Fails if `f` produces a non-finite coordinate.
    pub fn map_vertices<F>(&self, f: F) -> Result<TriangleMesh, MeshError>
    where
        F: FnMut(&Point3<f64>) -> Point3<f64>,
    {
        let vertices: Vec<_> = self.vertices.iter().map(f).collect();
        if let Some(i) = vertices
            .iter()
            .position(|v| !v.iter().all(|c| c.is_finite()))
        {
            return Err(MeshError::InvalidMesh(format!(
                "vertex {i} became non-finite"
            )));
        }
        Ok(TriangleMesh {
            vertices,
            faces: self.faces.clone(),
            name: self.name.clone(),
        })
    }

    /// Same surface with every face's winding reversed.
    pub fn flipped(&self) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.clone(),
            faces: self.faces.iter().map(|&[a, b, c]| [a, c, b]).collect(),
            name: self.name.clone(),
        }
    }

    pub fn centroid(&self) -> Point3<f64> {
        if self.vertices.is_empty() {
            return Point3::origin();
        }
        let sum = self
            .vertices
            .iter()
            .fold(Vector3::zeros(), |acc, v| acc + v.coords);
        Point3::from(sum / self.vertices.len() as f64)
    }

    /// Concatenates meshes into one multi-component mesh.
    pub fn merge<'a, I>(meshes: I) -> TriangleMesh
    where
        I: IntoIterator<Item = &'a TriangleMesh>,
    {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for m in meshes {
            let offset = vertices.len();
            vertices.extend_from_slice(&m.vertices);
            faces.extend(
                m.faces
                    .iter()
                    .map(|&[a, b, c]| [a + offset, b + offset, c + offset]),
            );
        }
        TriangleMesh::from_parts(vertices, faces)
    }

    /// Drops vertices that no face references, preserving order otherwise.
    pub fn compacted(&self) -> TriangleMesh {
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        let faces = self
            .faces
            .iter()
            .map(|f| {
                f.map(|i| {
                    if remap[i] == usize::MAX {
                        remap[i] = vertices.len();
                        vertices.push(self.vertices[i]);
                    }
                    remap[i]
                })
            })
            .collect();
        TriangleMesh {
            vertices,
            faces,
            name: self.name.clone(),
        }
    }

    /// Splits the mesh into face-connected components (faces sharing a vertex
    /// belong to the same component), ordered by their first face.
    pub fn components(&self) -> Vec<TriangleMesh> {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &[a, b, c] in &self.faces {
            for (u, v) in [(a, b), (b, c)] {
                let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                if ru != rv {
                    parent[ru.max(rv)] = ru.min(rv);
                }
            }
        }
        let mut order: Vec<usize> = Vec::new();
        let mut groups: std::collections::HashMap<usize, Vec<[usize; 3]>> = Default::default();
        for f in &self.faces {
            let root = find(&mut parent, f[0]);
            groups
                .entry(root)
                .or_insert_with(|| {
                    order.push(root);
                    Vec::new()
                })
                .push(*f);
        }
        order
            .into_iter()
            .map(|root| {
                TriangleMesh {
                    vertices: self.vertices.clone(),
                    faces: groups.remove(&root).unwrap_or_default(),
                    name: None,
                }
                .compacted()
            })
            .collect()
    }
}

/// Reads a mesh from raw file contents.
pub fn parse_mesh(bytes: &[u8], format: MeshFormat) -> Result<TriangleMesh, MeshError> {
    if bytes.is_empty() {
        return Err(MeshError::malformed(SourcePos::Byte(0), "empty input"));
    }
    match format {
        MeshFormat::StlBinary => stl::parse_binary(bytes),
        MeshFormat::StlAscii => stl::parse_ascii(bytes),
        MeshFormat::Obj => obj::parse(bytes),
        MeshFormat::Auto => parse_mesh(bytes, detect_format(bytes)),
    }
}

/// Guesses the format of a mesh file from its contents.
///
/// A file whose length matches its binary STL facet count is binary STL even
/// if its header happens to start with `solid`.
pub fn detect_format(bytes: &[u8]) -> MeshFormat {
    if stl::looks_binary(bytes) {
        return MeshFormat::StlBinary;
    }
    if stl::looks_ascii(bytes) {
        return MeshFormat::StlAscii;
    }
    MeshFormat::Obj
}

/// Serializes a mesh. `MeshFormat::Auto` writes binary STL.
pub fn write_mesh(mesh: &TriangleMesh, format: MeshFormat) -> Vec<u8> {
    match format {
        MeshFormat::StlBinary | MeshFormat::Auto => stl::write_binary(mesh),
        MeshFormat::StlAscii => stl::write_ascii(mesh),
        MeshFormat::Obj => obj::write(mesh),
    }
}
