//! Mesh and cochain files.
//!
//! Surfaces are read and written as ASCII OFF. Curves use a line-graph text
//! format: a vertex count, optional `v x y ...` coordinate lines and one
//! `a b` line per edge. Both formats accept a `# hodgekit periodic L1 L2 ...`
//! comment that marks the coordinates as periodic (flat tori and circles).

use crate::cochain::{Cochain, CochainRecord};
use crate::complex::{ComplexBuilder, SimplicialComplex};
use crate::corpus;
use crate::error::{HodgeError, Result};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

const PERIODIC_TAG: &str = "hodgekit periodic";

fn unreadable(msg: impl Into<String>) -> HodgeError {
    HodgeError::MeshUnreadable(msg.into())
}

/// Splits text into data lines, collecting periods from a periodic comment.
fn data_lines(text: &str) -> Result<(Vec<&str>, Option<Vec<f64>>)> {
    let mut periods = None;
    let mut lines = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix(PERIODIC_TAG) {
                let values = rest
                    .split_whitespace()
                    .map(|t| match t {
                        "inf" => Ok(f64::INFINITY),
                        _ => t.parse::<f64>(),
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| unreadable(format!("bad periodic comment '{trimmed}': {e}")))?;
                if values.is_empty() || values.iter().any(|v| !(*v > 0.0)) {
                    return Err(unreadable(format!("bad periodic comment '{trimmed}'")));
                }
                periods = Some(values);
            }
            continue;
        }
        let data = trimmed.split('#').next().unwrap_or("").trim();
        if !data.is_empty() {
            lines.push(data);
        }
    }
    Ok((lines, periods))
}

fn parse_numbers<T: std::str::FromStr>(line: &str, what: &str) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|t| t.parse::<T>().map_err(|_| unreadable(format!("bad {what} line '{line}'"))))
        .collect()
}

fn periodic_comment(periods: &[f64]) -> String {
    let mut out = format!("# {PERIODIC_TAG}");
    for p in periods {
        if p.is_finite() {
            let _ = write!(out, " {p:?}");
        } else {
            out.push_str(" inf");
        }
    }
    out
}

/// Parse an ASCII OFF surface.
pub fn parse_off(text: &str, name: &str) -> Result<SimplicialComplex> {
    let (lines, periods) = data_lines(text)?;
    let mut it = lines.into_iter();
    let header = it.next().ok_or_else(|| unreadable("empty OFF file"))?;
    let rest = header
        .strip_prefix("OFF")
        .ok_or_else(|| unreadable(format!("missing OFF header, found '{header}'")))?
        .trim();
    let counts_line = if rest.is_empty() {
        it.next().ok_or_else(|| unreadable("missing OFF counts"))?
    } else {
        rest
    };
    let counts: Vec<usize> = parse_numbers(counts_line, "OFF counts")?;
    if counts.len() < 2 {
        return Err(unreadable(format!("bad OFF counts line '{counts_line}'")));
    }
    let (nv, nf) = (counts[0], counts[1]);
    let keep = periods.as_ref().map_or(3, |p| p.len());
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let line = it.next().ok_or_else(|| unreadable("OFF file ends inside the vertex list"))?;
        let coords: Vec<f64> = parse_numbers(line, "vertex")?;
        if coords.len() < 3 || coords.len() < keep {
            return Err(unreadable(format!("vertex line '{line}' needs 3 coordinates")));
        }
        vertices.push(coords[..keep].to_vec());
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let line = it.next().ok_or_else(|| unreadable("OFF file ends inside the face list"))?;
        let nums: Vec<usize> = parse_numbers(line, "face")?;
        match nums.split_first() {
            Some((&3, face)) if face.len() >= 3 => faces.push(face[..3].to_vec()),
            _ => return Err(unreadable(format!("face line '{line}' is not a triangle"))),
        }
    }
    if faces.iter().flatten().any(|&v| v >= nv) {
        return Err(unreadable("face refers to a vertex past the vertex list"));
    }
    let mut builder = ComplexBuilder::new(vertices, faces).name(name);
    if let Some(p) = periods {
        builder = builder.periodic(p);
    }
    builder.build()
}

/// Write a surface as OFF, oriented by its top-simplex signs.
pub fn to_off(complex: &SimplicialComplex) -> Result<String> {
    if complex.dimension() != 2 {
        return Err(HodgeError::Shape(format!(
            "OFF holds surfaces, complex has dimension {}",
            complex.dimension()
        )));
    }
    let mut out = String::from("OFF\n");
    if let Some(p) = complex.periods() {
        out.push_str(&periodic_comment(p));
        out.push('\n');
    }
    let _ = writeln!(out, "{} {} 0", complex.count(0), complex.count(2));
    for v in complex.vertices() {
        let mut coords = v.clone();
        coords.resize(3, 0.0);
        let _ = writeln!(out, "{:?} {:?} {:?}", coords[0], coords[1], coords[2]);
    }
    for (s, &sign) in complex.simplices(2).iter().zip(complex.top_orientation()) {
        let (a, b) = if sign > 0 { (s[1], s[2]) } else { (s[2], s[1]) };
        let _ = writeln!(out, "3 {} {} {}", s[0], a, b);
    }
    Ok(out)
}

/// Parse a line-graph curve. Without coordinate lines the vertices are placed
/// on the unit circle in index order.
pub fn parse_line_graph(text: &str, name: &str) -> Result<SimplicialComplex> {
    let (lines, periods) = data_lines(text)?;
    let mut it = lines.into_iter();
    let first = it.next().ok_or_else(|| unreadable("empty line-graph file"))?;
    let n: usize = first
        .parse()
        .map_err(|_| unreadable(format!("expected a vertex count, found '{first}'")))?;
    let mut coords: Vec<Option<Vec<f64>>> = vec![None; n];
    let mut edges = Vec::new();
    for line in it {
        if let Some(rest) = line.strip_prefix('v') {
            let nums: Vec<f64> = parse_numbers(rest, "vertex")?;
            let (&index, point) = nums.split_first().ok_or_else(|| unreadable(format!("bad vertex line '{line}'")))?;
            let i = index as usize;
            if index < 0.0 || index.fract() != 0.0 || i >= n || point.is_empty() {
                return Err(unreadable(format!("bad vertex line '{line}'")));
            }
            coords[i] = Some(point.to_vec());
        } else {
            let e: Vec<usize> = parse_numbers(line, "edge")?;
            if e.len() != 2 || e[0] >= n || e[1] >= n {
                return Err(unreadable(format!("bad edge line '{line}'")));
            }
            edges.push(e);
        }
    }
    let vertices: Vec<Vec<f64>> = if coords.iter().all(Option::is_none) {
        (0..n)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / n as f64;
                vec![a.cos(), a.sin()]
            })
            .collect()
    } else {
        coords
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.ok_or_else(|| unreadable(format!("vertex {i} has no coordinates"))))
            .collect::<Result<_>>()?
    };
    let mut builder = ComplexBuilder::new(vertices, edges).name(name);
    if let Some(p) = periods {
        builder = builder.periodic(p);
    }
    builder.build()
}

/// Write a curve in the line-graph format, edges oriented by their signs.
pub fn to_line_graph(complex: &SimplicialComplex) -> Result<String> {
    if complex.dimension() != 1 {
        return Err(HodgeError::Shape(format!(
            "line graphs hold curves, complex has dimension {}",
            complex.dimension()
        )));
    }
    let mut out = String::new();
    if let Some(p) = complex.periods() {
        out.push_str(&periodic_comment(p));
        out.push('\n');
    }
    let _ = writeln!(out, "{}", complex.count(0));
    for (i, v) in complex.vertices().iter().enumerate() {
        let _ = write!(out, "v {i}");
        for x in v {
            let _ = write!(out, " {x:?}");
        }
        out.push('\n');
    }
    for (e, &sign) in complex.simplices(1).iter().zip(complex.top_orientation()) {
        let (a, b) = if sign > 0 { (e[0], e[1]) } else { (e[1], e[0]) };
        let _ = writeln!(out, "{a} {b}");
    }
    Ok(out)
}

/// Load a mesh from `corpus:<name>` or a file path. Files whose first data
/// line starts with `OFF` are surfaces, everything else is a line graph.
pub fn load_mesh(source: &str) -> Result<SimplicialComplex> {
    if let Some(name) = source.strip_prefix("corpus:") {
        return corpus::corpus_mesh(name);
    }
    let path = Path::new(source);
    let text = std::fs::read_to_string(path).map_err(|e| unreadable(format!("{source}: {e}")))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("mesh")
        .to_string();
    let is_off = data_lines(&text)?.0.first().is_some_and(|l| l.starts_with("OFF"));
    if is_off {
        parse_off(&text, &name)
    } else {
        parse_line_graph(&text, &name)
    }
}

/// Write a mesh in the format matching its dimension.
pub fn save_mesh(complex: &SimplicialComplex, path: &Path) -> Result<()> {
    let text = match complex.dimension() {
        1 => to_line_graph(complex)?,
        _ => to_off(complex)?,
    };
    std::fs::write(path, text).map_err(|e| unreadable(format!("{}: {e}", path.display())))
}

pub fn read_cochain(path: &Path, complex: &SimplicialComplex) -> Result<Cochain> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HodgeError::CochainMalformed(format!("{}: {e}", path.display())))?;
    CochainRecord::parse(&text, complex)
}

pub fn cochain_json(c: &Cochain) -> String {
    serde_json::to_string_pretty(&CochainRecord::from_cochain(c)).expect("cochain records serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn off_round_trip_preserves_id() {
        for mesh in [corpus::flat_torus(4).unwrap(), corpus::octahedron_sphere(1).unwrap()] {
            let text = to_off(&mesh).unwrap();
            let back = parse_off(&text, "x").unwrap();
            assert_eq!(back.id(), mesh.id());
            assert_eq!(back.periods(), mesh.periods());
            assert_eq!(back.vertices(), mesh.vertices());
        }
    }

    #[test]
    fn line_graph_round_trip() {
        for mesh in [corpus::circle(7).unwrap(), corpus::flat_circle(5).unwrap()] {
            let back = parse_line_graph(&to_line_graph(&mesh).unwrap(), "x").unwrap();
            assert_eq!(back.id(), mesh.id());
            assert_eq!(back.vertices(), mesh.vertices());
        }
    }

    #[test]
    fn bare_line_graph_places_vertices_on_circle() {
        let g = parse_line_graph("4\n0 1\n1 2\n2 3\n3 0\n", "square").unwrap();
        assert_eq!(g.count(1), 4);
        assert!((g.vertices()[1][1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn malformed_input() {
        let bad = [
            "",
            "OFF\n3 1 0\n0 0 0\n1 0 0\n",
            "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2 3\n",
            "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n",
            "NOFF\n",
        ];
        for text in bad {
            assert!(matches!(parse_off(text, "x"), Err(HodgeError::MeshUnreadable(_))), "{text:?}");
        }
        assert!(matches!(parse_line_graph("3\n0 5\n", "x"), Err(HodgeError::MeshUnreadable(_))));
        assert!(matches!(parse_line_graph("x\n", "x"), Err(HodgeError::MeshUnreadable(_))));
        assert!(matches!(load_mesh("/nonexistent/mesh.off"), Err(HodgeError::MeshUnreadable(_))));
        assert!(matches!(load_mesh("corpus:klein3"), Err(HodgeError::UnknownRegistry { .. })));
    }

    #[test]
    fn open_surface_is_rejected() {
        let text = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        assert!(matches!(parse_off(text, "x"), Err(HodgeError::NotClosed { .. })));
    }
}
