use super::Mesh;
use crate::{Error, Result};

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn unit() -> Self {
        Rect::new(0.0, 1.0, 0.0, 1.0)
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

/// How each grid square is split into two triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Diagonal {
    /// Every square split along the same diagonal, lower-left to upper-right.
    Fixed,
    /// Diagonal direction flips in a checkerboard pattern.
    #[default]
    Alternating,
}

pub fn build_rect_mesh(bounds: Rect, nx: usize, ny: usize, diagonal: Diagonal) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::invalid("cell counts must be positive"));
    }
    if !(bounds.x1 > bounds.x0 && bounds.y1 > bounds.y0) {
        return Err(Error::invalid("degenerate rectangle"));
    }
    let dx = (bounds.x1 - bounds.x0) / nx as f64;
    let dy = (bounds.y1 - bounds.y0) / ny as f64;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = if i == nx { bounds.x1 } else { bounds.x0 + i as f64 * dx };
            let y = if j == ny { bounds.y1 } else { bounds.y0 + j as f64 * dy };
            vertices.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut elements = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            let slash = match diagonal {
                Diagonal::Fixed => true,
                Diagonal::Alternating => (i + j) % 2 == 0,
            };
            if slash {
                elements.push([a, b, c]);
                elements.push([a, c, d]);
            } else {
                elements.push([a, b, d]);
                elements.push([b, c, d]);
            }
        }
    }
    Mesh::new(vertices, elements)
}
