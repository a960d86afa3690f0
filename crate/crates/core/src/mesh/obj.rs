use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::Point3;

use super::{MeshError, SourcePos, TriangleMesh};

pub(super) fn parse(bytes: &[u8]) -> Result<TriangleMesh, MeshError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        MeshError::malformed(SourcePos::Byte(e.valid_up_to()), "OBJ is not valid UTF-8")
    })?;
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut name = None;
    let mut ignored: BTreeSet<String> = BTreeSet::new();

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("");
        let mut parts = line.split_whitespace();
        let Some(keyword) = parts.next() else {
            continue;
        };
        match keyword {
            "v" => {
                let mut xyz = [0.0; 3];
                for c in &mut xyz {
                    let tok = parts.next().ok_or_else(|| {
                        MeshError::malformed(SourcePos::Line(line_no), "vertex needs 3 coordinates")
                    })?;
                    *c = match tok.parse::<f64>() {
                        Ok(v) if v.is_finite() => v,
                        _ => {
                            return Err(MeshError::malformed(
                                SourcePos::Line(line_no),
                                format!("'{tok}' is not a finite number"),
                            ))
                        }
                    };
                }
                vertices.push(Point3::from(xyz));
            }
            "f" => {
                let mut poly = Vec::new();
                for tok in parts {
                    poly.push(resolve_index(tok, vertices.len(), line_no)?);
                }
                if poly.len() < 3 {
                    return Err(MeshError::malformed(
                        SourcePos::Line(line_no),
                        "face needs at least 3 vertices",
                    ));
                }
                let distinct: BTreeSet<_> = poly.iter().collect();
                if distinct.len() != poly.len() {
                    return Err(MeshError::malformed(
                        SourcePos::Line(line_no),
                        "face references the same vertex twice",
                    ));
                }
                for k in 1..poly.len() - 1 {
                    faces.push([poly[0], poly[k], poly[k + 1]]);
                }
            }
            "o" => {
                if name.is_none() {
                    let label = parts.collect::<Vec<_>>().join(" ");
                    if !label.is_empty() {
                        name = Some(label);
                    }
                }
            }
            other => {
                ignored.insert(other.to_string());
            }
        }
    }
    if !ignored.is_empty() {
        log::warn!(
            "ignored OBJ records: {}",
            ignored.into_iter().collect::<Vec<_>>().join(", ")
        );
    }
    if faces.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    let mut mesh = TriangleMesh::from_parts(vertices, faces);
    mesh.name = name;
    Ok(mesh)
}

fn resolve_index(tok: &str, count: usize, line_no: usize) -> Result<usize, MeshError> {
    let head = tok.split('/').next().unwrap_or("");
    let raw: i64 = head.parse().map_err(|_| {
        MeshError::malformed(
            SourcePos::Line(line_no),
            format!("'{tok}' is not a vertex index"),
        )
    })?;
    let resolved = if raw > 0 {
        raw - 1
    } else if raw < 0 {
        count as i64 + raw
    } else {
        -1
    };
    if resolved < 0 || resolved >= count as i64 {
        return Err(MeshError::malformed(
            SourcePos::Line(line_no),
            format!("vertex index {raw} out of range ({count} vertices defined)"),
        ));
    }
    Ok(resolved as usize)
}

pub(super) fn write(mesh: &TriangleMesh) -> Vec<u8> {
    let mut s = String::from("# handsmith\n");
    if let Some(name) = mesh.name() {
        let name = name.split_whitespace().collect::<Vec<_>>().join("_");
        if !name.is_empty() {
            let _ = writeln!(s, "o {name}");
        }
    }
    for v in mesh.vertices() {
        let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s.into_bytes()
}
