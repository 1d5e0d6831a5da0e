//! Element-wise entropy correction and entropy-dissipating filters.
//!
//! Given base residuals `Phi_sigma`, the correction `r_sigma = alpha (V_sigma - mean V)`
//! makes `sum_sigma V_sigma (Phi_sigma + r_sigma) = oint ghat` hold exactly
//! while keeping `sum_sigma r_sigma = 0`. Filters `Psi_sigma` add a
//! non-negative entropy production and also sum to zero.

use crate::basis::MAX_LOCAL;
use crate::residuals::{ElementContext, ElementResidual};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyCorrection {
    /// `E = oint ghat - sum V_sigma Phi_sigma`.
    pub defect: f64,
    pub alpha: f64,
    pub r: [f64; MAX_LOCAL],
}

pub fn weighted_sum(v: &[f64], phi: &[f64]) -> f64 {
    v.iter().zip(phi).map(|(a, b)| a * b).sum()
}

/// `oint_{dK} ghat - sum_sigma V_sigma Phi_sigma`.
pub fn entropy_defect(ctx: &ElementContext, phi: &ElementResidual) -> f64 {
    ctx.entropy_flux_integral() - weighted_sum(&ctx.v[..ctx.n], phi.values())
}

/// `alpha = E / (sum (V - mean V)^2 + eps)`, `r_sigma = alpha (V_sigma - mean V)`.
pub fn correction(v: &[f64], defect: f64, epsilon: f64) -> EntropyCorrection {
    let n = v.len();
    let mean = v[0] + v.iter().map(|x| x - v[0]).sum::<f64>() / n as f64;
    let denom: f64 = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() + epsilon;
    let alpha = defect / denom;
    let mut r = [0.0; MAX_LOCAL];
    for (ri, vi) in r.iter_mut().zip(v) {
        *ri = alpha * (vi - mean);
    }
    EntropyCorrection { defect, alpha, r }
}

/// `theta sum_e h_e^2 oint_e [grad V] . grad phi_sigma|_K`.
pub fn filter_jump(ctx: &ElementContext, theta: f64) -> Result<[f64; MAX_LOCAL]> {
    check_theta(theta)?;
    let mut psi = crate::residuals::jump_integral(ctx, true);
    psi[..ctx.n].iter_mut().for_each(|x| *x *= theta);
    Ok(psi)
}

/// `theta h_K oint_K (a . grad phi_sigma) tau (a . grad V^h)` with `a = df/dV`.
pub fn filter_streamline(ctx: &ElementContext, theta: f64, reduced: bool) -> Result<[f64; MAX_LOCAL]> {
    check_theta(theta)?;
    let law = ctx.law;
    let pts = if reduced { &ctx.space.reduced } else { &ctx.space.volume };
    let mut psi = crate::residuals::streamline_integral(ctx, &ctx.v, &|u| law.wave_speed_v(u), pts);
    psi[..ctx.n].iter_mut().for_each(|x| *x *= theta);
    Ok(psi)
}

/// `Phi + r + Psi`.
pub fn corrected_residual(phi: &[f64], r: &[f64], psi: &[f64]) -> [f64; MAX_LOCAL] {
    let mut out = [0.0; MAX_LOCAL];
    for i in 0..phi.len() {
        out[i] = phi[i] + r[i] + psi[i];
    }
    out
}

fn check_theta(theta: f64) -> Result<()> {
    if theta >= 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("filter theta must be non-negative, got {theta}")))
    }
}
