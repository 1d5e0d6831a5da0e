//! Plain-text mesh exchange and legacy VTK output.
//!
//! The ASCII format is a header line `nv ne`, then `nv` lines `x y`, then
//! `ne` lines `v0 v1 v2` with 0-based vertex ids. Lines starting with `#`
//! are ignored.

use std::io::{BufRead, Write};

use super::Mesh;
use crate::geometry::Vec2;
use crate::{Error, Result};

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

pub fn read_ascii<R: BufRead>(reader: R) -> Result<Mesh> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut toks = Vec::new();
        let mut col = 1;
        for tok in line.split_whitespace() {
            let off = line[col - 1..].find(tok).unwrap_or(0) + col;
            toks.push((off, tok.to_string()));
            col = off + tok.len();
        }
        rows.push((i + 1, toks));
    }
    let mut it = rows.into_iter();
    let (hl, header) = it.next().ok_or_else(|| parse_err(1, 1, "empty mesh file"))?;
    if header.len() != 2 {
        return Err(parse_err(hl, 1, "header must be `nv ne`"));
    }
    let int = |line: usize, (c, s): &(usize, String)| {
        s.parse::<usize>()
            .map_err(|_| parse_err(line, *c, format!("expected a non-negative integer, got `{s}`")))
    };
    let nv = int(hl, &header[0])?;
    let ne = int(hl, &header[1])?;
    let mut vertices: Vec<Vec2> = Vec::with_capacity(nv);
    let mut elements = Vec::with_capacity(ne);
    for k in 0..nv + ne {
        let (ln, toks) = it
            .next()
            .ok_or_else(|| parse_err(hl, 1, format!("expected {} data lines, found {k}", nv + ne)))?;
        if k < nv {
            if toks.len() != 2 {
                return Err(parse_err(ln, 1, "vertex line must be `x y`"));
            }
            let mut p = [0.0; 2];
            for (c, (col, s)) in toks.iter().enumerate() {
                p[c] = s
                    .parse::<f64>()
                    .map_err(|_| parse_err(ln, *col, format!("expected a number, got `{s}`")))?;
            }
            vertices.push(p);
        } else {
            if toks.len() != 3 {
                return Err(parse_err(ln, 1, "element line must be `v0 v1 v2`"));
            }
            let mut t = [0; 3];
            for (c, tok) in toks.iter().enumerate() {
                t[c] = int(ln, tok)?;
                if t[c] >= nv {
                    return Err(parse_err(ln, tok.0, format!("vertex id {} out of range", t[c])));
                }
            }
            elements.push(t);
        }
    }
    if let Some((ln, _)) = it.next() {
        return Err(parse_err(ln, 1, "trailing data after elements"));
    }
    Mesh::new(vertices, elements)
}

pub fn write_ascii<W: Write>(mesh: &Mesh, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", mesh.n_vertices(), mesh.n_elements())?;
    for p in &mesh.vertices {
        writeln!(w, "{:e} {:e}", p[0], p[1])?;
    }
    for t in &mesh.elements {
        writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

/// Writes triangles with optional named point-data fields.
pub fn write_vtk<W: Write>(
    mut w: W,
    points: &[Vec2],
    triangles: &[[usize; 3]],
    fields: &[(&str, &[f64])],
) -> Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "rdes output")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET POLYDATA")?;
    writeln!(w, "POINTS {} double", points.len())?;
    for p in points {
        writeln!(w, "{:e} {:e} 0", p[0], p[1])?;
    }
    writeln!(w, "POLYGONS {} {}", triangles.len(), 4 * triangles.len())?;
    for t in triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    if !fields.is_empty() {
        writeln!(w, "POINT_DATA {}", points.len())?;
        for (name, data) in fields {
            if data.len() != points.len() {
                return Err(Error::invalid(format!("field {name} has wrong length")));
            }
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for v in *data {
                writeln!(w, "{v:e}")?;
            }
        }
    }
    Ok(())
}

pub fn write_mesh_vtk<W: Write>(mesh: &Mesh, w: W) -> Result<()> {
    write_vtk(w, &mesh.vertices, &mesh.elements, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_rect_mesh, Diagonal, Rect};

    #[test]
    fn ascii_round_trip() {
        let m = build_rect_mesh(Rect::new(-1.0, 2.0, 0.0, 0.5), 3, 2, Diagonal::Alternating).unwrap();
        let mut buf = Vec::new();
        write_ascii(&m, &mut buf).unwrap();
        let r = read_ascii(buf.as_slice()).unwrap();
        assert_eq!(r.elements, m.elements);
        assert_eq!(r.vertices, m.vertices);
        assert_eq!(r.interior_faces.len(), m.interior_faces.len());
    }

    #[test]
    fn parse_errors_carry_position() {
        let src = "3 1\n0 0\n1 x\n0 1\n0 1 2\n";
        match read_ascii(src.as_bytes()) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 3)),
            other => panic!("{other:?}"),
        }
        let src = "3 1\n0 0\n1 0\n0 1\n0 1 7\n";
        match read_ascii(src.as_bytes()) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (5, 5)),
            other => panic!("{other:?}"),
        }
        assert!(read_ascii("".as_bytes()).is_err());
    }

    #[test]
    fn comments_are_skipped() {
        let src = "# tri\n3 1\n0 0\n1 0\n# v\n0 1\n0 1 2\n";
        assert_eq!(read_ascii(src.as_bytes()).unwrap().n_elements(), 1);
    }

    #[test]
    fn vtk_header() {
        let m = build_rect_mesh(Rect::unit(), 1, 1, Diagonal::Fixed).unwrap();
        let mut buf = Vec::new();
        write_vtk(&mut buf, &m.vertices, &m.elements, &[("u", &[0.0, 1.0, 2.0, 3.0])]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("DATASET POLYDATA"));
        assert!(s.contains("POLYGONS 2 8"));
        assert!(s.contains("SCALARS u double 1"));
    }
}
