//! A finite-element space on a mesh: element geometry, DoF map and shape
//! tables at every quadrature point in use.

use nalgebra::{DMatrix, DVector};

use crate::basis::{self, BasisKind, Shape, MAX_LOCAL};
use crate::geometry::{norm, Vec2};
use crate::mesh::{face_vertices, Continuity, DofMap, Mesh};
use crate::quadrature::{self, EdgeRule, VolumeRule};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub area: f64,
    /// Longest edge.
    pub h: f64,
    pub grad_lambda: [[f64; 2]; 3],
    /// Outward unit normals of the local faces.
    pub normals: [Vec2; 3],
    pub lengths: [f64; 3],
    pub reversed: [bool; 3],
}

/// Shape data at one reference quadrature point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefPoint {
    pub weight: f64,
    pub lambda: [f64; 3],
    pub shape: Shape,
}

#[derive(Debug, Clone)]
pub struct Space {
    pub mesh: Mesh,
    pub dofs: DofMap,
    pub kind: BasisKind,
    pub geometry: Vec<ElementGeometry>,
    /// Rule for Galerkin and stabilization volume integrals.
    pub volume: Vec<RefPoint>,
    /// Degree-5 rule used for norms and projections.
    pub accurate: Vec<RefPoint>,
    /// Three-point midpoint rule, optionally used for filter terms.
    pub reduced: Vec<RefPoint>,
    pub edge: EdgeRule,
    /// `face[i][reversed]` holds the edge-rule points of local face `i`.
    face: [[Vec<RefPoint>; 2]; 3],
}

fn tabulate(kind: BasisKind, degree: usize, rule: &VolumeRule) -> Result<Vec<RefPoint>> {
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(&lambda, &weight)| {
            Ok(RefPoint {
                weight,
                lambda,
                shape: basis::evaluate(kind, degree, lambda)?,
            })
        })
        .collect()
}

impl Space {
    pub fn new(mesh: Mesh, degree: usize, continuity: Continuity, kind: BasisKind) -> Result<Self> {
        let dofs = DofMap::new(&mesh, degree, continuity)?;
        let geometry = (0..mesh.n_elements())
            .map(|e| {
                let c = mesh.corners(e);
                let area = mesh.area(e);
                let mut g = ElementGeometry {
                    area,
                    h: mesh.diameter(e),
                    grad_lambda: [[0.0; 2]; 3],
                    normals: [[0.0; 2]; 3],
                    lengths: [0.0; 3],
                    reversed: [false; 3],
                };
                for i in 0..3 {
                    let [p, q] = face_vertices(i);
                    let d = [c[q][0] - c[p][0], c[q][1] - c[p][1]];
                    g.grad_lambda[i] = [-d[1] / (2.0 * area), d[0] / (2.0 * area)];
                    let n = mesh.scaled_normal(e, i);
                    let len = norm(n);
                    g.lengths[i] = len;
                    g.normals[i] = [n[0] / len, n[1] / len];
                    g.reversed[i] = mesh.face_reversed(e, i);
                }
                g
            })
            .collect();
        let edge = quadrature::edge_rule();
        let mut face: [[Vec<RefPoint>; 2]; 3] = Default::default();
        for (i, fi) in face.iter_mut().enumerate() {
            let [p, q] = face_vertices(i);
            for (rev, slot) in fi.iter_mut().enumerate() {
                *slot = edge
                    .points
                    .iter()
                    .zip(&edge.weights)
                    .map(|(&s, &weight)| {
                        let mut lambda = [0.0; 3];
                        if rev == 1 {
                            lambda[p] = s;
                            lambda[q] = 1.0 - s;
                        } else {
                            lambda[p] = 1.0 - s;
                            lambda[q] = s;
                        }
                        Ok(RefPoint {
                            weight,
                            lambda,
                            shape: basis::evaluate(kind, degree, lambda)?,
                        })
                    })
                    .collect::<Result<_>>()?;
            }
        }
        Ok(Space {
            volume: tabulate(kind, degree, &quadrature::volume_rule(degree)?)?,
            accurate: tabulate(kind, degree, &quadrature::seven_point_rule())?,
            reduced: tabulate(kind, degree, &quadrature::midpoint_rule())?,
            mesh,
            dofs,
            kind,
            geometry,
            edge,
            face,
        })
    }

    pub fn degree(&self) -> usize {
        self.dofs.degree
    }

    pub fn n_local(&self) -> usize {
        self.dofs.n_local
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.n_dofs
    }

    pub fn n_elements(&self) -> usize {
        self.mesh.n_elements()
    }

    pub fn continuity(&self) -> Continuity {
        self.dofs.continuity
    }

    /// Face quadrature points of local face `i` of element `e`, in the
    /// shared traversal order.
    #[inline]
    pub fn face_points(&self, e: usize, i: usize) -> &[RefPoint] {
        &self.face[i][self.geometry[e].reversed[i] as usize]
    }

    /// Local coefficients of element `e`.
    #[inline]
    pub fn local(&self, e: usize, u: &[f64]) -> [f64; MAX_LOCAL] {
        let mut out = [0.0; MAX_LOCAL];
        for (o, &d) in out.iter_mut().zip(self.dofs.dofs(e)) {
            *o = u[d];
        }
        out
    }

    pub fn point(&self, e: usize, lambda: [f64; 3]) -> Vec2 {
        self.mesh.point(e, lambda)
    }

    /// Coefficients of the interpolant of `f` (nodal values for Lagrange,
    /// converted coefficients for Bezier).
    pub fn interpolate<F: Fn(Vec2) -> f64>(&self, f: F) -> Vec<f64> {
        let nodal: Vec<f64> = self.dofs.dof_points.iter().map(|&p| f(p)).collect();
        self.nodal_to_coefficients(&nodal)
    }

    pub fn nodal_to_coefficients(&self, nodal: &[f64]) -> Vec<f64> {
        if self.kind == BasisKind::Lagrange || self.degree() == 1 {
            return nodal.to_vec();
        }
        let mut out = nodal.to_vec();
        for e in 0..self.n_elements() {
            let d = self.dofs.dofs(e);
            let loc: Vec<f64> = d.iter().map(|&i| nodal[i]).collect();
            let c = basis::nodal_to_coefficients(self.kind, &loc);
            for (l, &i) in d.iter().enumerate() {
                out[i] = c[l];
            }
        }
        out
    }

    /// Values of the field at the DoF locations.
    pub fn nodal_values(&self, u: &[f64]) -> Vec<f64> {
        if self.kind == BasisKind::Lagrange || self.degree() == 1 {
            return u.to_vec();
        }
        let lag = basis::lagrange_points(self.degree()).expect("valid degree");
        let mut out = vec![0.0; self.n_dofs()];
        for e in 0..self.n_elements() {
            let c = self.local(e, u);
            for (l, &i) in self.dofs.dofs(e).iter().enumerate() {
                let s = basis::evaluate(self.kind, self.degree(), lag[l]).expect("valid degree");
                out[i] = s.value_of(&c);
            }
        }
        out
    }

    /// Element-wise L2 projection; only meaningful for discontinuous spaces.
    pub fn project_l2<F: Fn(Vec2) -> f64>(&self, f: F) -> Result<Vec<f64>> {
        if self.continuity() != Continuity::Discontinuous {
            return Err(Error::invalid("L2 projection requires a discontinuous space"));
        }
        let n = self.n_local();
        let mut out = vec![0.0; self.n_dofs()];
        for e in 0..self.n_elements() {
            let mut m = DMatrix::<f64>::zeros(n, n);
            let mut b = DVector::<f64>::zeros(n);
            for p in &self.accurate {
                let fx = f(self.point(e, p.lambda));
                for i in 0..n {
                    b[i] += p.weight * p.shape.values[i] * fx;
                    for j in 0..n {
                        m[(i, j)] += p.weight * p.shape.values[i] * p.shape.values[j];
                    }
                }
            }
            let x = m
                .cholesky()
                .ok_or_else(|| Error::Numerical("singular local mass matrix".into()))?
                .solve(&b);
            for (l, &d) in self.dofs.dofs(e).iter().enumerate() {
                out[d] = x[l];
            }
        }
        Ok(out)
    }

    /// Dual control volumes: each element gives |K| / #K to each of its DoFs.
    pub fn dual_volumes(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.n_dofs()];
        let n = self.n_local() as f64;
        for e in 0..self.n_elements() {
            let share = self.geometry[e].area / n;
            for &d in self.dofs.dofs(e) {
                c[d] += share;
            }
        }
        c
    }

    /// Sub-triangles through the Lagrange points, for plotting.
    pub fn plot_triangles(&self) -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        for e in 0..self.n_elements() {
            let d = self.dofs.dofs(e);
            if self.degree() == 1 {
                out.push([d[0], d[1], d[2]]);
            } else {
                out.push([d[0], d[3], d[5]]);
                out.push([d[3], d[1], d[4]]);
                out.push([d[5], d[4], d[2]]);
                out.push([d[3], d[4], d[5]]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_rect_mesh, Diagonal, Rect};

    fn space(n: usize, k: usize, c: Continuity, kind: BasisKind) -> Space {
        let m = build_rect_mesh(Rect::unit(), n, n, Diagonal::Alternating).unwrap();
        Space::new(m, k, c, kind).unwrap()
    }

    #[test]
    fn dual_volumes_partition_domain() {
        for k in 1..=2 {
            let s = space(4, k, Continuity::Continuous, BasisKind::Lagrange);
            let c = s.dual_volumes();
            assert!(c.iter().all(|&v| v > 0.0));
            assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn interior_vertex_dual_volume() {
        // vertex (0.5, 0.5) of a fixed-diagonal 2x2 grid has 6 incident triangles
        let m = build_rect_mesh(Rect::unit(), 2, 2, Diagonal::Fixed).unwrap();
        let s = Space::new(m, 1, Continuity::Continuous, BasisKind::Lagrange).unwrap();
        let c = s.dual_volumes();
        assert!((c[4] - 2.0 * 0.125).abs() < 1e-15);
    }

    #[test]
    fn gradients_of_linear_function() {
        let s = space(3, 2, Continuity::Continuous, BasisKind::Bezier);
        let u = s.interpolate(|p| 2.0 * p[0] - 3.0 * p[1] + 1.0);
        for e in 0..s.n_elements() {
            let c = s.local(e, &u);
            for p in &s.volume {
                let g = p.shape.grad_of(&c, &s.geometry[e].grad_lambda);
                assert!((g[0] - 2.0).abs() < 1e-12 && (g[1] + 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn projection_reproduces_quadratics() {
        let s = space(2, 2, Continuity::Discontinuous, BasisKind::Lagrange);
        let f = |p: Vec2| p[0] * p[0] - p[0] * p[1] + 0.5;
        let a = s.project_l2(f).unwrap();
        let b = s.interpolate(f);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(space(1, 1, Continuity::Continuous, BasisKind::Lagrange).project_l2(f).is_err());
    }

    #[test]
    fn nodal_values_invert_bezier_conversion() {
        let s = space(2, 2, Continuity::Continuous, BasisKind::Bezier);
        let f = |p: Vec2| (p[0] + 0.3).powi(2) * p[1];
        let nodal: Vec<f64> = s.dofs.dof_points.iter().map(|&p| f(p)).collect();
        let back = s.nodal_values(&s.interpolate(f));
        for (x, y) in nodal.iter().zip(&back) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}
