//! Binary and ASCII STL reading, binary STL writing.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{TriMesh, Vec3};
use crate::error::{Error, Result};

/// Vertices closer than this are welded on load.
pub const WELD_TOLERANCE: f64 = 1e-7;

/// Reads a binary or ASCII STL file and welds duplicate vertices.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriMesh> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_stl(&bytes)
}

pub fn parse_stl(bytes: &[u8]) -> Result<TriMesh> {
    let triangles = if looks_ascii(bytes) {
        parse_ascii(bytes)?
    } else {
        parse_binary(bytes)?
    };
    if triangles.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let mesh = TriMesh::from_triangles(&triangles, WELD_TOLERANCE)?;
    if mesh.faces.is_empty() {
        return Err(Error::EmptyMesh);
    }
    Ok(mesh)
}

fn looks_ascii(bytes: &[u8]) -> bool {
    let head = bytes.iter().skip_while(|b| b.is_ascii_whitespace());
    let starts_solid = head.take(5).copied().eq(b"solid".iter().copied());
    if !starts_solid {
        return false;
    }
    // Some binary exporters also start the header with "solid"; trust the
    // declared triangle count when it matches the file size exactly.
    if bytes.len() >= 84 {
        let n = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
        if 84 + 50 * n == bytes.len() {
            return false;
        }
    }
    true
}

fn parse_binary(bytes: &[u8]) -> Result<Vec<[Vec3; 3]>> {
    if bytes.len() < 84 {
        return Err(Error::MalformedStl(format!(
            "truncated header: {} bytes, expected at least 84",
            bytes.len()
        )));
    }
    let n = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
    let needed = 84 + 50 * n;
    if bytes.len() < needed {
        return Err(Error::MalformedStl(format!(
            "truncated body: {n} triangles need {needed} bytes, found {}",
            bytes.len()
        )));
    }
    let read_f32 = |off: usize| {
        f32::from_le_bytes([bytes[off], bytes[off + 1], bytes[off + 2], bytes[off + 3]]) as f64
    };
    let mut tris = Vec::with_capacity(n);
    for i in 0..n {
        let base = 84 + 50 * i + 12;
        let mut tri = [Vec3::zeros(); 3];
        for (k, v) in tri.iter_mut().enumerate() {
            let o = base + 12 * k;
            *v = Vec3::new(read_f32(o), read_f32(o + 4), read_f32(o + 8));
        }
        if tri.iter().any(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(Error::MalformedStl(format!("triangle {i} is not finite")));
        }
        tris.push(tri);
    }
    Ok(tris)
}

fn parse_ascii(bytes: &[u8]) -> Result<Vec<[Vec3; 3]>> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::MalformedStl("ASCII STL is not valid UTF-8".into()))?;
    let mut tris = Vec::new();
    let mut current: Vec<Vec3> = Vec::with_capacity(3);
    let mut in_facet = false;
    for (lineno, line) in text.lines().enumerate() {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("facet") => {
                if in_facet {
                    return Err(malformed_line(lineno, "nested facet"));
                }
                in_facet = true;
                current.clear();
            }
            Some("vertex") => {
                if !in_facet {
                    return Err(malformed_line(lineno, "vertex outside facet"));
                }
                let mut c = [0.0; 3];
                for slot in &mut c {
                    *slot = tok
                        .next()
                        .and_then(|s| s.parse::<f64>().ok())
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| malformed_line(lineno, "bad vertex coordinate"))?;
                }
                current.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("endfacet") => {
                if !in_facet || current.len() != 3 {
                    return Err(malformed_line(lineno, "facet without exactly 3 vertices"));
                }
                tris.push([current[0], current[1], current[2]]);
                in_facet = false;
            }
            _ => {}
        }
    }
    if in_facet {
        return Err(Error::MalformedStl("unterminated facet".into()));
    }
    Ok(tris)
}

fn malformed_line(lineno: usize, what: &str) -> Error {
    Error::MalformedStl(format!("line {}: {what}", lineno + 1))
}

pub fn stl_binary_bytes(mesh: &TriMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(84 + 50 * mesh.faces.len());
    let mut header = [0u8; 80];
    let tag = b"binary STL";
    header[..tag.len()].copy_from_slice(tag);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.faces.len() as u32).to_le_bytes());
    for f in 0..mesh.faces.len() {
        let n = mesh.face_normal(f);
        for c in n.iter() {
            out.extend_from_slice(&(*c as f32).to_le_bytes());
        }
        for v in mesh.triangle(f) {
            for c in v.iter() {
                out.extend_from_slice(&(*c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

pub fn stl_ascii_string(mesh: &TriMesh) -> String {
    let mut s = String::from("solid mesh\n");
    for f in 0..mesh.faces.len() {
        let n = mesh.face_normal(f);
        s.push_str(&format!("  facet normal {} {} {}\n    outer loop\n", n.x, n.y, n.z));
        for v in mesh.triangle(f) {
            s.push_str(&format!("      vertex {} {} {}\n", v.x, v.y, v.z));
        }
        s.push_str("    endloop\n  endfacet\n");
    }
    s.push_str("endsolid mesh\n");
    s
}

/// Writes a binary STL. Coordinates are stored as 32-bit floats.
pub fn write_stl(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&stl_binary_bytes(mesh))
        .map_err(|e| Error::io(path, e))
}
