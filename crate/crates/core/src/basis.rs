//! Lagrange and Bernstein (Bezier) shape functions on the reference triangle.
//!
//! Local ordering: the three vertices, then (for degree 2) the edge nodes
//! between vertices 0-1, 1-2 and 2-0.

use crate::{Error, Result};

pub const MAX_LOCAL: usize = 6;

/// Edge node `3 + m` sits between these two vertices.
pub const EDGE_VERTICES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasisKind {
    #[default]
    Lagrange,
    Bezier,
}

/// Shape values and barycentric derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shape {
    pub n: usize,
    pub values: [f64; MAX_LOCAL],
    pub dlambda: [[f64; 3]; MAX_LOCAL],
}

pub fn n_local(degree: usize) -> Result<usize> {
    match degree {
        1 => Ok(3),
        2 => Ok(6),
        _ => Err(Error::invalid(format!("unsupported degree {degree}"))),
    }
}

/// Barycentric coordinates of the local Lagrange points.
pub fn lagrange_points(degree: usize) -> Result<Vec<[f64; 3]>> {
    let mut pts = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    if n_local(degree)? == 6 {
        pts.extend([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]);
    }
    Ok(pts)
}

pub fn lagrange(degree: usize, l: [f64; 3]) -> Result<Shape> {
    let n = n_local(degree)?;
    let mut s = Shape {
        n,
        values: [0.0; MAX_LOCAL],
        dlambda: [[0.0; 3]; MAX_LOCAL],
    };
    if degree == 1 {
        for i in 0..3 {
            s.values[i] = l[i];
            s.dlambda[i][i] = 1.0;
        }
        return Ok(s);
    }
    for i in 0..3 {
        s.values[i] = l[i] * (2.0 * l[i] - 1.0);
        s.dlambda[i][i] = 4.0 * l[i] - 1.0;
    }
    for (m, &[a, b]) in EDGE_VERTICES.iter().enumerate() {
        s.values[3 + m] = 4.0 * l[a] * l[b];
        s.dlambda[3 + m][a] = 4.0 * l[b];
        s.dlambda[3 + m][b] = 4.0 * l[a];
    }
    Ok(s)
}

/// Bernstein polynomials: vertex modes l_i^k, mixed modes 2 l_a l_b.
pub fn bezier(degree: usize, l: [f64; 3]) -> Result<Shape> {
    if degree == 1 {
        return lagrange(1, l);
    }
    let n = n_local(degree)?;
    let mut s = Shape {
        n,
        values: [0.0; MAX_LOCAL],
        dlambda: [[0.0; 3]; MAX_LOCAL],
    };
    for i in 0..3 {
        s.values[i] = l[i] * l[i];
        s.dlambda[i][i] = 2.0 * l[i];
    }
    for (m, &[a, b]) in EDGE_VERTICES.iter().enumerate() {
        s.values[3 + m] = 2.0 * l[a] * l[b];
        s.dlambda[3 + m][a] = 2.0 * l[b];
        s.dlambda[3 + m][b] = 2.0 * l[a];
    }
    Ok(s)
}

pub fn evaluate(kind: BasisKind, degree: usize, l: [f64; 3]) -> Result<Shape> {
    match kind {
        BasisKind::Lagrange => lagrange(degree, l),
        BasisKind::Bezier => bezier(degree, l),
    }
}

/// Converts nodal values at the local Lagrange points into coefficients of
/// the requested basis.
pub fn nodal_to_coefficients(kind: BasisKind, nodal: &[f64]) -> [f64; MAX_LOCAL] {
    let mut c = [0.0; MAX_LOCAL];
    c[..nodal.len()].copy_from_slice(nodal);
    if kind == BasisKind::Bezier && nodal.len() == 6 {
        for (m, &[a, b]) in EDGE_VERTICES.iter().enumerate() {
            c[3 + m] = 2.0 * nodal[3 + m] - 0.5 * (nodal[a] + nodal[b]);
        }
    }
    c
}

impl Shape {
    /// Physical gradient of local function `i` given the element's
    /// barycentric gradients.
    #[inline]
    pub fn grad(&self, i: usize, grad_lambda: &[[f64; 2]; 3]) -> [f64; 2] {
        let d = &self.dlambda[i];
        [
            d[0] * grad_lambda[0][0] + d[1] * grad_lambda[1][0] + d[2] * grad_lambda[2][0],
            d[0] * grad_lambda[0][1] + d[1] * grad_lambda[1][1] + d[2] * grad_lambda[2][1],
        ]
    }

    #[inline]
    pub fn value_of(&self, coeffs: &[f64]) -> f64 {
        (0..self.n).map(|i| self.values[i] * coeffs[i]).sum()
    }

    #[inline]
    pub fn grad_of(&self, coeffs: &[f64], grad_lambda: &[[f64; 2]; 3]) -> [f64; 2] {
        let mut g = [0.0; 3];
        for i in 0..self.n {
            for (l, gl) in g.iter_mut().enumerate() {
                *gl += coeffs[i] * self.dlambda[i][l];
            }
        }
        [
            g[0] * grad_lambda[0][0] + g[1] * grad_lambda[1][0] + g[2] * grad_lambda[2][0],
            g[0] * grad_lambda[0][1] + g[1] * grad_lambda[1][1] + g[2] * grad_lambda[2][1],
        ]
    }
}
