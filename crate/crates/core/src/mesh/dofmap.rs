use std::collections::HashMap;

use super::Mesh;
use crate::basis::{self, EDGE_VERTICES};
use crate::geometry::Vec2;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Continuity {
    #[default]
    Continuous,
    Discontinuous,
}

/// Global numbering of the Lagrange points of a P1 or P2 space.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub degree: usize,
    pub continuity: Continuity,
    pub n_local: usize,
    element_dofs: Vec<usize>,
    pub dof_points: Vec<Vec2>,
    pub n_dofs: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh, degree: usize, continuity: Continuity) -> Result<Self> {
        let n_local = basis::n_local(degree)?;
        let lag = basis::lagrange_points(degree)?;
        let ne = mesh.n_elements();
        let mut element_dofs = Vec::with_capacity(ne * n_local);
        let mut dof_points = Vec::new();
        match continuity {
            Continuity::Discontinuous => {
                for e in 0..ne {
                    for l in &lag {
                        element_dofs.push(dof_points.len());
                        dof_points.push(mesh.point(e, *l));
                    }
                }
            }
            Continuity::Continuous => {
                dof_points.extend_from_slice(&mesh.vertices);
                let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
                for (e, t) in mesh.elements.iter().enumerate() {
                    element_dofs.extend_from_slice(t);
                    if degree == 2 {
                        for (m, &[a, b]) in EDGE_VERTICES.iter().enumerate() {
                            let key = (t[a].min(t[b]), t[a].max(t[b]));
                            let id = *edges.entry(key).or_insert_with(|| {
                                dof_points.push(mesh.point(e, lag[3 + m]));
                                dof_points.len() - 1
                            });
                            element_dofs.push(id);
                        }
                    }
                }
            }
        }
        let n_dofs = dof_points.len();
        if element_dofs.len() != ne * n_local {
            return Err(Error::Internal("dof map size mismatch".into()));
        }
        Ok(DofMap {
            degree,
            continuity,
            n_local,
            element_dofs,
            dof_points,
            n_dofs,
        })
    }

    #[inline]
    pub fn dofs(&self, e: usize) -> &[usize] {
        &self.element_dofs[e * self.n_local..(e + 1) * self.n_local]
    }

    pub fn n_elements(&self) -> usize {
        self.element_dofs.len() / self.n_local
    }

    /// Local DoFs lying on local face `i`: its two vertices then, for P2,
    /// the edge node.
    pub fn face_local_dofs(&self, i: usize) -> Vec<usize> {
        let [p, q] = super::face_vertices(i);
        let mut v = vec![p, q];
        if self.degree == 2 {
            v.push(3 + (i + 1) % 3);
        }
        v
    }
}
