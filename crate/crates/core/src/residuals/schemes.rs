use super::{ElementContext, ElementResidual, FACE_Q};
use crate::basis::MAX_LOCAL;
use crate::geometry::{dot, Vec2};
use crate::problems::ConservationLaw;
use crate::space::{RefPoint, Space};
use crate::Result;

/// `-oint_K grad phi . f(u) + oint_{dK} phi fhat`.
pub fn galerkin_residual(ctx: &ElementContext) -> Result<ElementResidual> {
    let g = ctx.geometry();
    let mut r = ElementResidual::zero(ctx.n);
    for p in &ctx.space.volume {
        let uq = p.shape.value_of(&ctx.u);
        ctx.law.check(uq, &|| format!("element {}", ctx.e))?;
        let f = ctx.law.flux(uq);
        let w = p.weight * g.area;
        for s in 0..ctx.n {
            r.phi[s] -= w * dot(p.shape.grad(s, &g.grad_lambda), f);
        }
    }
    for i in 0..3 {
        let pts = ctx.space.face_points(ctx.e, i);
        for (q, p) in pts.iter().enumerate().take(FACE_Q) {
            let w = p.weight * g.lengths[i] * ctx.faces[i].values.flux[q];
            for s in 0..ctx.n {
                r.phi[s] += w * p.shape.values[s];
            }
        }
    }
    r.flux_integral = ctx.flux_integral();
    Ok(r)
}

/// `tau_K = 1 / |sum_sigma min(K_sigma, 0)|` with `K_sigma = abar . mean grad phi_sigma`.
/// `None` when the element is stagnant.
pub fn streamline_tau(ctx: &ElementContext, speed: &dyn Fn(f64) -> Vec2, pts: &[RefPoint]) -> Option<f64> {
    let g = ctx.geometry();
    let mut abar = [0.0; 2];
    let mut mean_grad = [[0.0; 2]; MAX_LOCAL];
    for p in pts {
        let a = speed(p.shape.value_of(&ctx.u));
        abar[0] += p.weight * a[0];
        abar[1] += p.weight * a[1];
        for (s, mg) in mean_grad.iter_mut().enumerate().take(ctx.n) {
            let gr = p.shape.grad(s, &g.grad_lambda);
            mg[0] += p.weight * gr[0];
            mg[1] += p.weight * gr[1];
        }
    }
    let neg: f64 = mean_grad[..ctx.n].iter().map(|mg| dot(abar, *mg).min(0.0)).sum();
    (neg < 0.0).then(|| 1.0 / neg.abs())
}

/// `h_K oint_K (a . grad phi_sigma) tau (a . grad c^h)` for the field with
/// coefficients `c`, with `a = speed(u^h)`.
pub(crate) fn streamline_integral(
    ctx: &ElementContext,
    coeffs: &[f64; MAX_LOCAL],
    speed: &dyn Fn(f64) -> Vec2,
    pts: &[RefPoint],
) -> [f64; MAX_LOCAL] {
    let mut out = [0.0; MAX_LOCAL];
    let Some(tau) = streamline_tau(ctx, speed, pts) else {
        return out;
    };
    let g = ctx.geometry();
    for p in pts {
        let a = speed(p.shape.value_of(&ctx.u));
        let adc = dot(a, p.shape.grad_of(coeffs, &g.grad_lambda));
        let w = g.h * p.weight * g.area * tau * adc;
        for (s, o) in out.iter_mut().enumerate().take(ctx.n) {
            *o += w * dot(a, p.shape.grad(s, &g.grad_lambda));
        }
    }
    out
}

/// `sum_{interior e} h_e^2 oint_e [grad c] . grad phi_sigma|_K`, with the
/// jump of `u` (`entropy == false`) or of `V`.
pub(crate) fn jump_integral(ctx: &ElementContext, entropy: bool) -> [f64; MAX_LOCAL] {
    let g = ctx.geometry();
    let mut out = [0.0; MAX_LOCAL];
    for i in (0..3).filter(|&i| ctx.faces[i].interior) {
        let he = g.lengths[i];
        let vals = &ctx.faces[i].values;
        for (q, p) in ctx.space.face_points(ctx.e, i).iter().enumerate().take(FACE_Q) {
            let jump = if entropy { vals.v_jump[q] } else { vals.u_jump[q] };
            let w = he * he * p.weight * he;
            for (s, o) in out.iter_mut().enumerate().take(ctx.n) {
                *o += w * dot(jump, p.shape.grad(s, &g.grad_lambda));
            }
        }
    }
    out
}

pub fn supg_residual(ctx: &ElementContext, theta: f64) -> Result<ElementResidual> {
    let mut r = galerkin_residual(ctx)?;
    let law = ctx.law;
    let st = streamline_integral(ctx, &ctx.u, &|u| law.wave_speed(u), &ctx.space.volume);
    for s in 0..ctx.n {
        r.phi[s] += theta * st[s];
    }
    Ok(r)
}

pub fn jump_stabilized_residual(ctx: &ElementContext, theta: f64) -> Result<ElementResidual> {
    let mut r = galerkin_residual(ctx)?;
    let j = jump_integral(ctx, false);
    for s in 0..ctx.n {
        r.phi[s] += theta * j[s];
    }
    Ok(r)
}

/// `#K max_{sigma, sigma'} oint_K |phi_sigma| |a . grad phi_sigma'|`.
pub fn rusanov_alpha(ctx: &ElementContext) -> f64 {
    element_alpha(ctx.space, ctx.law, ctx.e, &ctx.u)
}

/// [`rusanov_alpha`] from the local coefficients `c` of element `e`.
pub fn element_alpha(space: &Space, law: &dyn ConservationLaw, e: usize, c: &[f64; MAX_LOCAL]) -> f64 {
    let g = &space.geometry[e];
    let n = space.n_local();
    let mut k = [[0.0; MAX_LOCAL]; MAX_LOCAL];
    for p in &space.volume {
        let a = law.wave_speed(p.shape.value_of(c));
        let w = p.weight * g.area;
        for (s, row) in k.iter_mut().enumerate().take(n) {
            for (t, kst) in row.iter_mut().enumerate().take(n) {
                *kst += w * p.shape.values[s].abs() * dot(a, p.shape.grad(t, &g.grad_lambda)).abs();
            }
        }
    }
    let max = k[..n].iter().flat_map(|row| row[..n].iter()).fold(0.0f64, |m, &x| m.max(x));
    n as f64 * max
}

/// Galerkin plus `alpha (u_sigma - mean u)`.
pub fn rusanov_residual(ctx: &ElementContext) -> Result<ElementResidual> {
    let mut r = galerkin_residual(ctx)?;
    let alpha = rusanov_alpha(ctx);
    let mean = ctx.u[..ctx.n].iter().sum::<f64>() / ctx.n as f64;
    for s in 0..ctx.n {
        r.phi[s] += alpha * (ctx.u[s] - mean);
    }
    Ok(r)
}

/// Distribution coefficients from low-order residuals summing to `total`.
/// Falls back to the uniform split when `|total| <= 1e-14 scale`.
pub fn limiter_beta(low: &[f64], total: f64, scale: f64) -> [f64; MAX_LOCAL] {
    let n = low.len();
    let mut beta = [0.0; MAX_LOCAL];
    let uniform = |b: &mut [f64; MAX_LOCAL]| b[..n].iter_mut().for_each(|x| *x = 1.0 / n as f64);
    if total.abs() <= 1e-14 * scale || !total.is_finite() {
        uniform(&mut beta);
        return beta;
    }
    let mut sum = 0.0;
    for (b, &l) in beta.iter_mut().zip(low) {
        *b = (l / total).max(0.0);
        sum += *b;
    }
    if !(sum > 0.0) || !sum.is_finite() {
        uniform(&mut beta);
        return beta;
    }
    beta[..n].iter_mut().for_each(|b| *b /= sum);
    beta
}

/// `beta_sigma oint f . n` with Rusanov-based coefficients, plus optional
/// streamline and jump terms.
pub fn limited_rd_residual(ctx: &ElementContext, theta_stream: f64, theta_jump: f64) -> Result<ElementResidual> {
    let low = rusanov_residual(ctx)?;
    let g = ctx.geometry();
    let total = low.flux_integral;
    let fmax = ctx
        .space
        .volume
        .iter()
        .map(|p| {
            let f = ctx.law.flux(p.shape.value_of(&ctx.u));
            f[0].hypot(f[1])
        })
        .fold(0.0f64, f64::max);
    let beta = limiter_beta(low.values(), total, 1.0 + fmax * g.h);
    let mut r = ElementResidual::zero(ctx.n);
    r.flux_integral = total;
    for s in 0..ctx.n {
        r.phi[s] = beta[s] * total;
    }
    if theta_stream > 0.0 {
        let law = ctx.law;
        let st = streamline_integral(ctx, &ctx.u, &|u| law.wave_speed(u), &ctx.space.volume);
        for s in 0..ctx.n {
            r.phi[s] += theta_stream * st[s];
        }
    }
    if theta_jump > 0.0 {
        let j = jump_integral(ctx, false);
        for s in 0..ctx.n {
            r.phi[s] += theta_jump * j[s];
        }
    }
    Ok(r)
}
