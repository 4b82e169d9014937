//! ASCII OFF mesh files.
//!
//! Layout: an `OFF` header line, a counts line `N M 0`, `N` vertex lines of
//! three decimal coordinates, and `M` face lines `3 i j k`. Blank lines and
//! `#` comments are tolerated anywhere. Coordinates are written with 17
//! significant digits, so every finite `f64` round-trips exactly and
//! serialization is deterministic.

use std::fmt;
use std::fs;
use std::path::Path;

use transvect_core::Mesh;

/// Failure to read, parse, or write a mesh file.
#[derive(Debug)]
pub enum OffError {
    Io(std::io::Error),
    /// Malformed content; `line` is 1-based.
    Parse { line: usize, message: String },
}

impl fmt::Display for OffError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OffError::Io(e) => write!(f, "{e}"),
            OffError::Parse { line, message } => write!(f, "line {line}: {message}"),
        }
    }
}

impl std::error::Error for OffError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            OffError::Io(e) => Some(e),
            OffError::Parse { .. } => None,
        }
    }
}

impl From<std::io::Error> for OffError {
    fn from(e: std::io::Error) -> Self {
        OffError::Io(e)
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> OffError {
    OffError::Parse { line, message: message.into() }
}

/// Parses the OFF text format.
pub fn parse_off(text: &str) -> Result<Mesh<3>, OffError> {
    // meaningful lines with their original 1-based numbers
    let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            None
        } else {
            Some((i + 1, content))
        }
    });

    let (header_line, header) = lines.next().ok_or_else(|| parse_error(1, "empty file"))?;
    if header != "OFF" {
        return Err(parse_error(header_line, format!("expected 'OFF' header, found '{header}'")));
    }

    let (counts_line, counts) =
        lines.next().ok_or_else(|| parse_error(header_line, "missing counts line"))?;
    let fields: Vec<&str> = counts.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(parse_error(counts_line, "counts line must have three fields: N M 0"));
    }
    let n_vertices: usize = fields[0]
        .parse()
        .map_err(|_| parse_error(counts_line, format!("invalid vertex count '{}'", fields[0])))?;
    let n_faces: usize = fields[1]
        .parse()
        .map_err(|_| parse_error(counts_line, format!("invalid face count '{}'", fields[1])))?;
    let _edges: usize = fields[2]
        .parse()
        .map_err(|_| parse_error(counts_line, format!("invalid edge count '{}'", fields[2])))?;

    let mut vertices = Vec::with_capacity(n_vertices);
    let mut last_line = counts_line;
    for _ in 0..n_vertices {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| parse_error(last_line, "unexpected end of file in vertex list"))?;
        last_line = line_no;
        let coords: Vec<&str> = line.split_whitespace().collect();
        if coords.len() != 3 {
            return Err(parse_error(line_no, "vertex line must have three coordinates"));
        }
        let mut v = [0.0f64; 3];
        for (a, c) in coords.iter().enumerate() {
            v[a] = c
                .parse()
                .map_err(|_| parse_error(line_no, format!("invalid coordinate '{c}'")))?;
            if !v[a].is_finite() {
                return Err(parse_error(line_no, format!("non-finite coordinate '{c}'")));
            }
        }
        vertices.push(v);
    }

    let mut faces = Vec::with_capacity(n_faces);
    for _ in 0..n_faces {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| parse_error(last_line, "unexpected end of file in face list"))?;
        last_line = line_no;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "3" {
            return Err(parse_error(line_no, "face line must be '3 i j k'"));
        }
        let mut face = [0usize; 3];
        for (a, t) in fields[1..].iter().enumerate() {
            face[a] = t
                .parse()
                .map_err(|_| parse_error(line_no, format!("invalid face index '{t}'")))?;
            if face[a] >= n_vertices {
                return Err(parse_error(
                    line_no,
                    format!("face index {} out of range (mesh has {n_vertices} vertices)", face[a]),
                ));
            }
        }
        faces.push(face);
    }

    if let Some((line_no, _)) = lines.next() {
        return Err(parse_error(line_no, "unexpected content after face list"));
    }

    Mesh::new(vertices, faces).map_err(|e| parse_error(last_line, format!("{e}")))
}

/// Serializes a mesh deterministically (17 significant digits per coordinate).
pub fn format_off(mesh: &Mesh<3>) -> String {
    let mut out = String::from("OFF\n");
    out.push_str(&format!("{} {} 0\n", mesh.vertex_count(), mesh.face_count()));
    for v in mesh.vertices() {
        out.push_str(&format!("{:.16e} {:.16e} {:.16e}\n", v[0], v[1], v[2]));
    }
    for f in mesh.faces() {
        out.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
    }
    out
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh<3>, OffError> {
    parse_off(&fs::read_to_string(path)?)
}

pub fn save_mesh(mesh: &Mesh<3>, path: impl AsRef<Path>) -> Result<(), OffError> {
    fs::write(path, format_off(mesh))?;
    Ok(())
}
