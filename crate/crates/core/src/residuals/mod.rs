//! Element and boundary residuals of the residual distribution schemes.
//!
//! Every element residual satisfies `sum_sigma Phi_sigma = oint fhat`. The
//! interface fluxes are computed once per face (see [`face_values`]) and
//! reused with opposite sign by the two neighbours, so interior faces cancel
//! exactly in global sums.

mod boundary;
mod config;
mod schemes;

pub use boundary::{boundary_residual, BoundaryResidual};
pub use config::{BaseScheme, EntropyFilter, SchemeConfig};
pub(crate) use schemes::{jump_integral, streamline_integral};
pub use schemes::{
    element_alpha, galerkin_residual, jump_stabilized_residual, limited_rd_residual, limiter_beta, rusanov_alpha,
    rusanov_residual, streamline_tau, supg_residual,
};

use crate::basis::MAX_LOCAL;
use crate::geometry::{dot, Vec2};
use crate::mesh::{Continuity, FaceRef};
use crate::problems::{llf_unchecked, ConservationLaw, EntropyFluxKind};
use crate::space::Space;
use crate::Result;

/// Points of the face rule.
pub const FACE_Q: usize = 2;

/// Per-DoF residuals of one element together with `oint_{dK} fhat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementResidual {
    pub n: usize,
    pub phi: [f64; MAX_LOCAL],
    pub flux_integral: f64,
}

impl ElementResidual {
    pub fn zero(n: usize) -> Self {
        ElementResidual {
            n,
            phi: [0.0; MAX_LOCAL],
            flux_integral: 0.0,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.phi[..self.n]
    }

    pub fn total(&self) -> f64 {
        self.values().iter().sum()
    }

    /// `|sum Phi - oint fhat|`.
    pub fn conservation_defect(&self) -> f64 {
        (self.total() - self.flux_integral).abs()
    }
}

/// Data of an interior face at its quadrature points, seen from the
/// face's first element (normal pointing out of it).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FaceValues {
    pub flux: [f64; FACE_Q],
    pub entropy_flux: [f64; FACE_Q],
    /// `grad u_a - grad u_b`.
    pub u_jump: [Vec2; FACE_Q],
    /// `grad V_a - grad V_b`.
    pub v_jump: [Vec2; FACE_Q],
}

/// One local face of an element, with values oriented for that element.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FaceSide {
    pub interior: bool,
    pub values: FaceValues,
}

/// Everything needed to evaluate an element's residuals.
#[derive(Clone, Copy)]
pub struct ElementContext<'a> {
    pub space: &'a Space,
    pub law: &'a dyn ConservationLaw,
    pub e: usize,
    pub n: usize,
    pub u: [f64; MAX_LOCAL],
    /// Entropy-variable coefficients `V(u_sigma)`.
    pub v: [f64; MAX_LOCAL],
    pub faces: [FaceSide; 3],
}

/// Interface values on interior face `index`. Continuous spaces use the
/// single-valued trace; discontinuous ones the LLF flux.
pub fn face_values(
    space: &Space,
    law: &dyn ConservationLaw,
    u: &[f64],
    index: usize,
    entropy_flux: EntropyFluxKind,
) -> Result<FaceValues> {
    let f = space.mesh.interior_faces[index];
    let (ea, eb) = (f.elem_a, f.elem_b);
    let (ca, cb) = (space.local(ea, u), space.local(eb, u));
    let (va, vb) = (entropy_coeffs(law, &ca, space.n_local()), entropy_coeffs(law, &cb, space.n_local()));
    let (ga, gb) = (&space.geometry[ea], &space.geometry[eb]);
    let n = ga.normals[f.face_a];
    let (pa, pb) = (space.face_points(ea, f.face_a), space.face_points(eb, f.face_b));
    let dg = space.continuity() == Continuity::Discontinuous;
    let mut out = FaceValues::default();
    for q in 0..FACE_Q {
        let ua = pa[q].shape.value_of(&ca);
        law.check(ua, &|| format!("element {ea}, face {}", f.face_a))?;
        let ub = if dg {
            let ub = pb[q].shape.value_of(&cb);
            law.check(ub, &|| format!("element {eb}, face {}", f.face_b))?;
            ub
        } else {
            ua
        };
        let fh = if dg { llf_unchecked(law, ua, ub, n) } else { dot(law.flux(ua), n) };
        out.flux[q] = fh;
        out.entropy_flux[q] = entropy_flux.eval(law, ua, ub, n, fh);
        let (gra, grb) = (pa[q].shape.grad_of(&ca, &ga.grad_lambda), pb[q].shape.grad_of(&cb, &gb.grad_lambda));
        out.u_jump[q] = [gra[0] - grb[0], gra[1] - grb[1]];
        let (gva, gvb) = (pa[q].shape.grad_of(&va, &ga.grad_lambda), pb[q].shape.grad_of(&vb, &gb.grad_lambda));
        out.v_jump[q] = [gva[0] - gvb[0], gva[1] - gvb[1]];
    }
    Ok(out)
}

pub(crate) fn entropy_coeffs(law: &dyn ConservationLaw, u: &[f64; MAX_LOCAL], n: usize) -> [f64; MAX_LOCAL] {
    let mut v = [0.0; MAX_LOCAL];
    for i in 0..n {
        v[i] = law.entropy_var(u[i]);
    }
    v
}

impl<'a> ElementContext<'a> {
    /// Builds the context of element `e` from the global state and the
    /// precomputed interior face values.
    pub fn new(
        space: &'a Space,
        law: &'a dyn ConservationLaw,
        faces: &[FaceValues],
        u: &[f64],
        e: usize,
    ) -> Result<Self> {
        let n = space.n_local();
        let c = space.local(e, u);
        let v = entropy_coeffs(law, &c, n);
        let g = &space.geometry[e];
        let mut sides = [FaceSide::default(); 3];
        for (i, side) in sides.iter_mut().enumerate() {
            match space.mesh.element_faces[e][i] {
                FaceRef::Interior { index, side: s } => {
                    let fv = faces[index];
                    side.interior = true;
                    side.values = if s == 0 { fv } else { negate(fv) };
                }
                FaceRef::Boundary { .. } => {
                    let nrm = g.normals[i];
                    for (q, p) in space.face_points(e, i).iter().enumerate() {
                        let uq = p.shape.value_of(&c);
                        law.check(uq, &|| format!("element {e}, face {i}"))?;
                        side.values.flux[q] = dot(law.flux(uq), nrm);
                        side.values.entropy_flux[q] = dot(law.entropy_flux(uq), nrm);
                    }
                }
            }
        }
        Ok(ElementContext {
            space,
            law,
            e,
            n,
            u: c,
            v,
            faces: sides,
        })
    }

    /// Context of an element whose faces all take the element's own trace.
    pub fn isolated(space: &'a Space, law: &'a dyn ConservationLaw, u: &[f64], e: usize) -> Result<Self> {
        let n = space.n_local();
        let c = space.local(e, u);
        let g = &space.geometry[e];
        let mut sides = [FaceSide::default(); 3];
        for (i, side) in sides.iter_mut().enumerate() {
            for (q, p) in space.face_points(e, i).iter().enumerate() {
                let uq = p.shape.value_of(&c);
                law.check(uq, &|| format!("element {e}, face {i}"))?;
                side.values.flux[q] = dot(law.flux(uq), g.normals[i]);
                side.values.entropy_flux[q] = dot(law.entropy_flux(uq), g.normals[i]);
            }
        }
        Ok(ElementContext {
            space,
            law,
            e,
            n,
            u: c,
            v: entropy_coeffs(law, &c, n),
            faces: sides,
        })
    }

    #[inline]
    pub fn geometry(&self) -> &crate::space::ElementGeometry {
        &self.space.geometry[self.e]
    }

    /// `oint_{dK} fhat`.
    pub fn flux_integral(&self) -> f64 {
        let g = self.geometry();
        let mut s = 0.0;
        for i in 0..3 {
            for (q, p) in self.space.face_points(self.e, i).iter().enumerate() {
                s += p.weight * g.lengths[i] * self.faces[i].values.flux[q];
            }
        }
        s
    }

    /// `oint_{dK} ghat`.
    pub fn entropy_flux_integral(&self) -> f64 {
        let g = self.geometry();
        let mut s = 0.0;
        for i in 0..3 {
            for (q, p) in self.space.face_points(self.e, i).iter().enumerate() {
                s += p.weight * g.lengths[i] * self.faces[i].values.entropy_flux[q];
            }
        }
        s
    }

    /// Part of `oint ghat` on faces lying on the domain boundary.
    pub fn boundary_entropy_flux(&self) -> f64 {
        let g = self.geometry();
        let mut s = 0.0;
        for i in (0..3).filter(|&i| !self.faces[i].interior) {
            for (q, p) in self.space.face_points(self.e, i).iter().enumerate() {
                s += p.weight * g.lengths[i] * self.faces[i].values.entropy_flux[q];
            }
        }
        s
    }
}

fn negate(f: FaceValues) -> FaceValues {
    let neg = |a: [f64; FACE_Q]| a.map(|x| -x);
    let negv = |a: [Vec2; FACE_Q]| a.map(|x| [-x[0], -x[1]]);
    FaceValues {
        flux: neg(f.flux),
        entropy_flux: neg(f.entropy_flux),
        u_jump: negv(f.u_jump),
        v_jump: negv(f.v_jump),
    }
}
