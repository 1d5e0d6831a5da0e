//! Conservation, accuracy and consistency audits.

use crate::basis::BasisKind;
use crate::geometry::{dot, Vec2};
use crate::mesh::{build_rect_mesh, Continuity, Diagonal};
use crate::par::Execution;
use crate::problems::ProblemSpec;
use crate::residuals::{galerkin_residual, SchemeConfig};
use crate::solver::{march, Assembler, EntropyBalance, MarchConfig};
use crate::space::Space;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// L1 and L2 norms of `u^h - u` by the 7-point rule on every element; the
/// max norm over DoF locations.
pub fn error_norms<F: Fn(Vec2) -> f64>(space: &Space, u: &[f64], exact: F) -> ErrorNorms {
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    for e in 0..space.n_elements() {
        let c = space.local(e, u);
        let area = space.geometry[e].area;
        for p in &space.accurate {
            let d = p.shape.value_of(&c) - exact(space.point(e, p.lambda));
            l1 += p.weight * area * d.abs();
            l2 += p.weight * area * d * d;
        }
    }
    let nodal = space.nodal_values(u);
    let linf = nodal
        .iter()
        .zip(&space.dofs.dof_points)
        .map(|(v, &p)| (v - exact(p)).abs())
        .fold(0.0, f64::max);
    ErrorNorms {
        l1,
        l2: l2.sqrt(),
        linf,
    }
}

pub fn problem_error_norms(space: &Space, problem: &ProblemSpec, u: &[f64]) -> Result<ErrorNorms> {
    let exact = problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::invalid(format!("problem {} has no exact solution", problem.name)))?;
    Ok(error_norms(space, u, |p| exact(p)))
}

/// `log(e1 / e2) / log(h1 / h2)`.
pub fn slope(e1: f64, e2: f64, h1: f64, h2: f64) -> f64 {
    (e1 / e2).ln() / (h1 / h2).ln()
}

/// Consecutive slopes of a sequence of `(h, error)` pairs.
pub fn slopes(data: &[(f64, f64)]) -> Vec<f64> {
    data.windows(2).map(|w| slope(w[0].1, w[1].1, w[0].0, w[1].0)).collect()
}

/// `sum_sigma phi_sigma R_sigma(pi_h u)`.
pub fn truncation_error<F: Fn(Vec2) -> f64>(asm: &Assembler, exact: &dyn Fn(Vec2) -> f64, test: F) -> Result<f64> {
    let u = asm.space.interpolate(exact);
    let r = asm.residual(&u)?;
    let phi = asm.space.interpolate(test);
    Ok(phi.iter().zip(&r).map(|(a, b)| a * b).sum())
}

/// Global entropy residual sum of `u` (see [`crate::solver::Assembly::entropy_balance`]).
pub fn entropy_residual_sum(asm: &Assembler, u: &[f64]) -> Result<EntropyBalance> {
    Ok(asm.assemble(u)?.entropy_balance(asm.space))
}

/// Both sides of the global weak identity for a test field `v^h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    /// `sum_sigma v_sigma R_sigma(u^h)`.
    pub lhs: f64,
    /// Volume, face-jump, boundary and distribution terms assembled
    /// separately.
    pub rhs: f64,
    pub scale: f64,
}

impl IdentityCheck {
    pub fn defect(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    pub fn relative_defect(&self) -> f64 {
        self.defect() / self.scale.max(f64::MIN_POSITIVE)
    }
}

/// Evaluates both sides of
///
/// ```text
/// sum v_sigma R_sigma = -int grad v . f + sum_e oint [v] fhat + oint_{dOmega} v fhat_b
///     + sum_K 1/#K sum_{sigma, sigma'} (v_sigma - v_sigma') (Phi_sigma - Phi_sigma^Gal)
/// ```
///
/// assembled independently.
pub fn identity_check(asm: &Assembler, u: &[f64], v: &[f64]) -> Result<IdentityCheck> {
    let space = asm.space;
    if v.len() != space.n_dofs() {
        return Err(Error::invalid("test field has the wrong length"));
    }
    let law = &*asm.problem.law;
    let a = asm.assemble(u)?;
    let lhs: f64 = v.iter().zip(&a.residual).map(|(x, r)| x * r).sum();
    let lhs_scale: f64 = v.iter().zip(&a.residual).map(|(x, r)| (x * r).abs()).sum();

    let mut volume = 0.0;
    let mut volume_scale = 0.0;
    for e in 0..space.n_elements() {
        let (cu, cv) = (space.local(e, u), space.local(e, v));
        let g = &space.geometry[e];
        for p in &space.volume {
            let t = p.weight * g.area * dot(p.shape.grad_of(&cv, &g.grad_lambda), law.flux(p.shape.value_of(&cu)));
            volume -= t;
            volume_scale += t.abs();
        }
    }

    let faces = asm.face_values(u)?;
    let mut jumps = 0.0;
    for (fv, f) in faces.iter().zip(&space.mesh.interior_faces) {
        let (va, vb) = (space.local(f.elem_a, v), space.local(f.elem_b, v));
        let (pa, pb) = (space.face_points(f.elem_a, f.face_a), space.face_points(f.elem_b, f.face_b));
        let len = space.geometry[f.elem_a].lengths[f.face_a];
        for q in 0..pa.len() {
            let jump = pa[q].shape.value_of(&va) - pb[q].shape.value_of(&vb);
            jumps += pa[q].weight * len * jump * fv.flux[q];
        }
    }

    let kind = asm.boundary_flux_kind();
    let mut boundary = 0.0;
    for f in &space.mesh.boundary_faces {
        let e = f.elem;
        let (cu, cv) = (space.local(e, u), space.local(e, v));
        let g = &space.geometry[e];
        for p in space.face_points(e, f.face) {
            let ub = (asm.problem.boundary)(space.point(e, p.lambda), f.tag);
            let fb = kind.eval(law, p.shape.value_of(&cu), ub, g.normals[f.face])?;
            boundary += p.weight * g.lengths[f.face] * p.shape.value_of(&cv) * fb;
        }
    }

    let mut distribution = 0.0;
    for (e, o) in a.elements.iter().enumerate() {
        let ctx = asm.context(&faces, u, e)?;
        let gal = galerkin_residual(&ctx)?;
        let cv = space.local(e, v);
        let n = ctx.n;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += (cv[i] - cv[j]) * (o.total[i] - gal.phi[i]);
            }
        }
        distribution += s / n as f64;
    }

    let rhs = volume + jumps + boundary + distribution;
    let scale = lhs_scale + volume_scale + jumps.abs() + boundary.abs() + distribution.abs();
    Ok(IdentityCheck { lhs, rhs, scale })
}

/// One mesh of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub n_dofs: usize,
    pub norms: ErrorNorms,
    pub converged: bool,
    pub steps: usize,
}

/// Solves `problem` to steady state on `n x n` split-square meshes and
/// measures the error against its exact solution.
pub fn convergence_study(
    problem: &ProblemSpec,
    degree: usize,
    kind: BasisKind,
    config: SchemeConfig,
    march_cfg: &MarchConfig,
    sizes: &[usize],
    exec: Execution,
) -> Result<Vec<ConvergenceRow>> {
    if problem.exact.is_none() {
        return Err(Error::invalid(format!("problem {} has no exact solution", problem.name)));
    }
    let continuity = if config.base == crate::residuals::BaseScheme::Dg {
        Continuity::Discontinuous
    } else {
        Continuity::Continuous
    };
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mesh = build_rect_mesh(problem.domain, n, n, Diagonal::Alternating)?;
        let space = Space::new(mesh, degree, continuity, kind)?;
        let asm = Assembler::new(&space, problem, config)?.with_execution(exec);
        let u0 = space.interpolate(|p| (problem.initial)(p));
        let res = march(&asm, u0, march_cfg)?;
        rows.push(ConvergenceRow {
            n,
            h: space.mesh.h_max(),
            n_dofs: space.n_dofs(),
            norms: problem_error_norms(&space, problem, &res.state)?,
            converged: res.converged,
            steps: res.steps,
        });
    }
    Ok(rows)
}
