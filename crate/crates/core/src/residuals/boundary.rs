use crate::basis::MAX_LOCAL;
use crate::geometry::dot;
use crate::mesh::BoundaryFace;
use crate::problems::{BoundaryFluxKind, ConservationLaw, ProblemSpec};
use crate::space::Space;
use crate::Result;

/// Residuals of one boundary face, indexed by the element's local DoFs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryResidual {
    pub elem: usize,
    pub phi: [f64; MAX_LOCAL],
    /// `oint (fhat_b - f . n)`.
    pub total: f64,
    /// `oint fhat_b`.
    pub flux: f64,
}

/// `oint_Gamma phi_sigma (fhat_b(u^h, u_b) - f(u^h) . n)`.
pub fn boundary_residual(
    space: &Space,
    law: &dyn ConservationLaw,
    problem: &ProblemSpec,
    kind: BoundaryFluxKind,
    face: &BoundaryFace,
    u: &[f64],
) -> Result<BoundaryResidual> {
    let e = face.elem;
    let c = space.local(e, u);
    let g = &space.geometry[e];
    let n = g.normals[face.face];
    let len = g.lengths[face.face];
    let mut out = BoundaryResidual {
        elem: e,
        phi: [0.0; MAX_LOCAL],
        total: 0.0,
        flux: 0.0,
    };
    for p in space.face_points(e, face.face) {
        let uq = p.shape.value_of(&c);
        let ub = (problem.boundary)(space.point(e, p.lambda), face.tag);
        let fb = kind.eval(law, uq, ub, n).map_err(|err| match err {
            crate::Error::Domain { value, location } => crate::Error::Domain {
                value,
                location: format!("{location} on boundary face of element {e}"),
            },
            other => other,
        })?;
        let w = p.weight * len;
        let d = fb - dot(law.flux(uq), n);
        out.total += w * d;
        out.flux += w * fb;
        for s in 0..space.n_local() {
            out.phi[s] += w * p.shape.values[s] * d;
        }
    }
    Ok(out)
}
