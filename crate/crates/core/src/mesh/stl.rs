use std::fmt::Write as _;

use nalgebra::{Point3, Vector3};

use super::weld::Welder;
use super::{MeshError, SourcePos, TriangleMesh, WELD_TOLERANCE_MM};

const HEADER_LEN: usize = 80;
const FACET_LEN: usize = 50;
const BINARY_HEADER: &[u8] = b"handsmith binary STL";

pub(super) fn looks_binary(bytes: &[u8]) -> bool {
    if bytes.len() < HEADER_LEN + 4 {
        return false;
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as u64;
    (HEADER_LEN as u64 + 4 + FACET_LEN as u64 * count) == bytes.len() as u64
}

pub(super) fn looks_ascii(bytes: &[u8]) -> bool {
    let head = &bytes[..bytes.len().min(1024)];
    let text = String::from_utf8_lossy(head);
    let mut tokens = text.split_whitespace();
    tokens.next() == Some("solid") && (text.contains("facet") || text.contains("endsolid"))
}

/// Collects welded facets into a mesh, dropping facets that collapse.
struct FacetSink {
    welder: Welder,
    faces: Vec<[usize; 3]>,
    collapsed: usize,
}

impl FacetSink {
    fn new() -> Self {
        FacetSink {
            welder: Welder::new(WELD_TOLERANCE_MM),
            faces: Vec::new(),
            collapsed: 0,
        }
    }

    fn push(&mut self, corners: [Point3<f64>; 3]) {
        let f = corners.map(|p| self.welder.insert(p));
        if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
            self.collapsed += 1;
        } else {
            self.faces.push(f);
        }
    }

    fn finish(self, name: Option<String>) -> Result<TriangleMesh, MeshError> {
        if self.collapsed > 0 {
            log::warn!(
                "dropped {} STL facets that collapsed after welding",
                self.collapsed
            );
        }
        if self.faces.is_empty() {
            return Err(MeshError::EmptyMesh);
        }
        let mut mesh = TriangleMesh::from_parts(self.welder.into_vertices(), self.faces);
        mesh.name = name;
        Ok(mesh)
    }
}

pub(super) fn parse_binary(bytes: &[u8]) -> Result<TriangleMesh, MeshError> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(MeshError::malformed(
            SourcePos::Byte(bytes.len()),
            "truncated binary STL header",
        ));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    let expected = (HEADER_LEN as u64 + 4) + FACET_LEN as u64 * count as u64;
    if (bytes.len() as u64) < expected {
        return Err(MeshError::malformed(
            SourcePos::Byte(bytes.len()),
            format!("truncated binary STL: header declares {count} facets ({expected} bytes)"),
        ));
    }
    if (bytes.len() as u64) > expected {
        log::warn!(
            "ignoring {} trailing bytes after binary STL facets",
            bytes.len() as u64 - expected
        );
    }
    if count == 0 {
        return Err(MeshError::EmptyMesh);
    }

    let mut sink = FacetSink::new();
    for i in 0..count {
        let start = HEADER_LEN + 4 + i * FACET_LEN;
        let record = &bytes[start..start + FACET_LEN];
        let mut corners = [Point3::origin(); 3];
        for (k, corner) in corners.iter_mut().enumerate() {
            let mut xyz = [0.0f64; 3];
            for (j, c) in xyz.iter_mut().enumerate() {
                let off = 12 + k * 12 + j * 4;
                let v = f32::from_le_bytes(record[off..off + 4].try_into().unwrap());
                if !v.is_finite() {
                    return Err(MeshError::malformed(
                        SourcePos::Byte(start + off),
                        "non-finite vertex coordinate",
                    ));
                }
                *c = v as f64;
            }
            *corner = Point3::from(xyz);
        }
        sink.push(corners);
    }
    sink.finish(None)
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .flat_map(|(n, line)| line.split_whitespace().map(move |t| (n + 1, t)))
            .collect();
        Tokens { items, pos: 0 }
    }

    fn line(&self) -> usize {
        self.items
            .get(self.pos)
            .or(self.items.last())
            .map_or(1, |t| t.0)
    }

    fn peek(&self) -> Option<&'a str> {
        self.items.get(self.pos).map(|t| t.1)
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let t = self.items.get(self.pos).copied();
        self.pos += 1;
        t
    }

    fn expect(&mut self, word: &str) -> Result<(), MeshError> {
        let line = self.line();
        match self.next() {
            Some((_, t)) if t == word => Ok(()),
            Some((l, t)) => Err(MeshError::malformed(
                SourcePos::Line(l),
                format!("expected '{word}', found '{t}'"),
            )),
            None => Err(MeshError::malformed(
                SourcePos::Line(line),
                format!("unexpected end of file, expected '{word}'"),
            )),
        }
    }

    fn number(&mut self) -> Result<f64, MeshError> {
        let line = self.line();
        match self.next() {
            Some((l, t)) => match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(MeshError::malformed(
                    SourcePos::Line(l),
                    format!("'{t}' is not a finite number"),
                )),
            },
            None => Err(MeshError::malformed(
                SourcePos::Line(line),
                "unexpected end of file, expected a number",
            )),
        }
    }

    /// Consumes the remaining tokens on the current line.
    fn rest_of_line(&mut self, line: usize) -> Vec<&'a str> {
        let mut out = Vec::new();
        while let Some(&(l, t)) = self.items.get(self.pos) {
            if l != line {
                break;
            }
            out.push(t);
            self.pos += 1;
        }
        out
    }
}

pub(super) fn parse_ascii(bytes: &[u8]) -> Result<TriangleMesh, MeshError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        MeshError::malformed(SourcePos::Byte(e.valid_up_to()), "ASCII STL is not valid UTF-8")
    })?;
    let mut tokens = Tokens::new(text);
    let mut sink = FacetSink::new();
    let mut name = None;
    let mut solids = 0usize;

    while let Some((line, word)) = tokens.next() {
        if word != "solid" {
            return Err(MeshError::malformed(
                SourcePos::Line(line),
                format!("expected 'solid', found '{word}'"),
            ));
        }
        solids += 1;
        let label = tokens.rest_of_line(line).join(" ");
        if name.is_none() && !label.is_empty() {
            name = Some(label);
        }
        loop {
            match tokens.peek() {
                Some("facet") => parse_facet(&mut tokens, &mut sink)?,
                Some("endsolid") => {
                    let (l, _) = tokens.next().unwrap();
                    tokens.rest_of_line(l);
                    break;
                }
                Some(other) => {
                    return Err(MeshError::malformed(
                        SourcePos::Line(tokens.line()),
                        format!("expected 'facet' or 'endsolid', found '{other}'"),
                    ))
                }
                None => {
                    return Err(MeshError::malformed(
                        SourcePos::Line(tokens.line()),
                        "unexpected end of file inside solid",
                    ))
                }
            }
        }
    }
    if solids == 0 {
        return Err(MeshError::malformed(SourcePos::Line(1), "no 'solid' block"));
    }
    sink.finish(name)
}

fn parse_facet(tokens: &mut Tokens<'_>, sink: &mut FacetSink) -> Result<(), MeshError> {
    tokens.expect("facet")?;
    tokens.expect("normal")?;
    for _ in 0..3 {
        tokens.number()?;
    }
    tokens.expect("outer")?;
    tokens.expect("loop")?;
    let mut corners = [Point3::origin(); 3];
    for corner in &mut corners {
        tokens.expect("vertex")?;
        *corner = Point3::new(tokens.number()?, tokens.number()?, tokens.number()?);
    }
    tokens.expect("endloop")?;
    tokens.expect("endfacet")?;
    sink.push(corners);
    Ok(())
}

fn facet_normal(corners: &[Point3<f64>; 3]) -> Vector3<f64> {
    let n = (corners[1] - corners[0]).cross(&(corners[2] - corners[0]));
    let len = n.norm();
    if len > 0.0 && len.is_finite() {
        n / len
    } else {
        Vector3::zeros()
    }
}

pub(super) fn write_binary(mesh: &TriangleMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 + FACET_LEN * mesh.face_count());
    let mut header = [0u8; HEADER_LEN];
    header[..BINARY_HEADER.len()].copy_from_slice(BINARY_HEADER);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.face_count() as u32).to_le_bytes());
    for tri in mesh.triangles() {
        // Normal from the stored single-precision corners so the record is
        // self-consistent.
        let narrowed = tri.map(|p| p.map(|c| c as f32 as f64));
        let n = facet_normal(&narrowed);
        for c in n.iter() {
            out.extend_from_slice(&(*c as f32).to_le_bytes());
        }
        for p in &narrowed {
            for c in p.iter() {
                out.extend_from_slice(&(*c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

fn solid_name(mesh: &TriangleMesh) -> String {
    let name = mesh
        .name()
        .map(|n| n.split_whitespace().collect::<Vec<_>>().join("_"))
        .unwrap_or_default();
    if name.is_empty() {
        "mesh".to_string()
    } else {
        name
    }
}

pub(super) fn write_ascii(mesh: &TriangleMesh) -> Vec<u8> {
    let name = solid_name(mesh);
    let mut s = String::new();
    // f64 Display is the shortest representation that parses back exactly.
    let _ = writeln!(s, "solid {name}");
    for tri in mesh.triangles() {
        let n = facet_normal(&tri);
        let _ = writeln!(s, "  facet normal {} {} {}", n.x, n.y, n.z);
        s.push_str("    outer loop\n");
        for p in &tri {
            let _ = writeln!(s, "      vertex {} {} {}", p.x, p.y, p.z);
        }
        s.push_str("    endloop\n  endfacet\n");
    }
    let _ = writeln!(s, "endsolid {name}");
    s.into_bytes()
}
