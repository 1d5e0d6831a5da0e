//! Physical fluxes, entropy pairs, numerical fluxes and the test problems.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::geometry::{dot, Vec2};
use crate::mesh::{BoundaryTag, Rect};
use crate::{Error, Result};

/// A scalar conservation law `u_t + div f(u) = 0` with a convex entropy.
pub trait ConservationLaw: Send + Sync + fmt::Debug {
    fn flux(&self, u: f64) -> Vec2;
    /// `df/du`.
    fn wave_speed(&self, u: f64) -> Vec2;
    fn admissible(&self, u: f64) -> bool {
        u.is_finite()
    }
    fn entropy(&self, u: f64) -> f64;
    fn entropy_flux(&self, u: f64) -> Vec2;
    /// Entropy variable `V = U'(u)`.
    fn entropy_var(&self, u: f64) -> f64;
    fn state_of_var(&self, v: f64) -> f64;
    /// `theta_j(V) = V f_j(u(V)) - g_j(u(V))`.
    fn potential(&self, v: f64) -> Vec2;
    /// `U''(u)`.
    fn entropy_hessian(&self, u: f64) -> f64;

    /// Wave speed with respect to the entropy variable, `df/dV`.
    fn wave_speed_v(&self, u: f64) -> Vec2 {
        let a = self.wave_speed(u);
        let h = self.entropy_hessian(u);
        [a[0] / h, a[1] / h]
    }

    fn check(&self, u: f64, location: &dyn Fn() -> String) -> Result<()> {
        if self.admissible(u) {
            Ok(())
        } else {
            Err(Error::domain(u, location()))
        }
    }
}

/// `f(u) = (sqrt u, u)` for `u > 0`, with `U = u^2 / 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SqrtLaw;

impl ConservationLaw for SqrtLaw {
    fn flux(&self, u: f64) -> Vec2 {
        [u.sqrt(), u]
    }
    fn wave_speed(&self, u: f64) -> Vec2 {
        [0.5 / u.sqrt(), 1.0]
    }
    fn admissible(&self, u: f64) -> bool {
        u.is_finite() && u > 0.0
    }
    fn entropy(&self, u: f64) -> f64 {
        0.5 * u * u
    }
    fn entropy_flux(&self, u: f64) -> Vec2 {
        [u * u.sqrt() / 3.0, 0.5 * u * u]
    }
    fn entropy_var(&self, u: f64) -> f64 {
        u
    }
    fn state_of_var(&self, v: f64) -> f64 {
        v
    }
    fn potential(&self, v: f64) -> Vec2 {
        [2.0 * v * v.sqrt() / 3.0, 0.5 * v * v]
    }
    fn entropy_hessian(&self, _u: f64) -> f64 {
        1.0
    }
}

/// `f(u) = (sinh u, u)` with `U = u^2 / 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SinhLaw;

impl ConservationLaw for SinhLaw {
    fn flux(&self, u: f64) -> Vec2 {
        [u.sinh(), u]
    }
    fn wave_speed(&self, u: f64) -> Vec2 {
        [u.cosh(), 1.0]
    }
    fn admissible(&self, u: f64) -> bool {
        u.is_finite() && u.abs() < 700.0
    }
    fn entropy(&self, u: f64) -> f64 {
        0.5 * u * u
    }
    fn entropy_flux(&self, u: f64) -> Vec2 {
        [u * u.sinh() - u.cosh() + 1.0, 0.5 * u * u]
    }
    fn entropy_var(&self, u: f64) -> f64 {
        u
    }
    fn state_of_var(&self, v: f64) -> f64 {
        v
    }
    fn potential(&self, v: f64) -> Vec2 {
        [v.cosh() - 1.0, 0.5 * v * v]
    }
    fn entropy_hessian(&self, _u: f64) -> f64 {
        1.0
    }
}

/// Linear advection `f(u) = beta u` with `U = u^2 / 2`.
#[derive(Debug, Clone, Copy)]
pub struct LinearAdvection {
    pub velocity: Vec2,
}

impl ConservationLaw for LinearAdvection {
    fn flux(&self, u: f64) -> Vec2 {
        [self.velocity[0] * u, self.velocity[1] * u]
    }
    fn wave_speed(&self, _u: f64) -> Vec2 {
        self.velocity
    }
    fn entropy(&self, u: f64) -> f64 {
        0.5 * u * u
    }
    fn entropy_flux(&self, u: f64) -> Vec2 {
        [0.5 * self.velocity[0] * u * u, 0.5 * self.velocity[1] * u * u]
    }
    fn entropy_var(&self, u: f64) -> f64 {
        u
    }
    fn state_of_var(&self, v: f64) -> f64 {
        v
    }
    fn potential(&self, v: f64) -> Vec2 {
        [0.5 * self.velocity[0] * v * v, 0.5 * self.velocity[1] * v * v]
    }
    fn entropy_hessian(&self, _u: f64) -> f64 {
        1.0
    }
}

/// Local Lax-Friedrichs flux through a face with unit normal `n`.
pub fn llf(law: &dyn ConservationLaw, ul: f64, ur: f64, n: Vec2) -> Result<f64> {
    law.check(ul, &|| "left state of numerical flux".into())?;
    law.check(ur, &|| "right state of numerical flux".into())?;
    Ok(llf_unchecked(law, ul, ur, n))
}

#[inline]
pub(crate) fn llf_unchecked(law: &dyn ConservationLaw, ul: f64, ur: f64, n: Vec2) -> f64 {
    let (fl, fr) = (law.flux(ul), law.flux(ur));
    let s = dot(law.wave_speed(ul), n).abs().max(dot(law.wave_speed(ur), n).abs());
    0.5 * dot([fl[0] + fr[0], fl[1] + fr[1]], n) - 0.5 * s * (ur - ul)
}

/// Upwind boundary flux: interior state when `a(ubar) . n >= 0`.
pub fn upwind(law: &dyn ConservationLaw, u: f64, ub: f64, n: Vec2) -> Result<f64> {
    law.check(u, &|| "interior state of boundary flux".into())?;
    law.check(ub, &|| "boundary data".into())?;
    let mean = 0.5 * (u + ub);
    let side = if dot(law.wave_speed(mean), n) >= 0.0 { u } else { ub };
    Ok(dot(law.flux(side), n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryFluxKind {
    #[default]
    Llf,
    Upwind,
}

impl BoundaryFluxKind {
    pub fn eval(self, law: &dyn ConservationLaw, u: f64, ub: f64, n: Vec2) -> Result<f64> {
        match self {
            BoundaryFluxKind::Llf => llf(law, u, ub, n),
            BoundaryFluxKind::Upwind => upwind(law, u, ub, n),
        }
    }
}

/// Interface entropy flux used by the entropy correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntropyFluxKind {
    /// `{V} fhat(uL, uR) - theta({V}) . n`.
    #[default]
    Potential,
    /// Centred entropy flux with the state dissipation of the LLF flux:
    /// `(g(uL) + g(uR)) . n / 2 - s (uR - uL) / 2`.
    Llf,
}

impl EntropyFluxKind {
    /// Entropy flux given the states on both sides and the interior
    /// numerical flux `fhat` already evaluated for them.
    pub fn eval(self, law: &dyn ConservationLaw, ul: f64, ur: f64, n: Vec2, fhat: f64) -> f64 {
        match self {
            EntropyFluxKind::Potential => {
                let vm = 0.5 * (law.entropy_var(ul) + law.entropy_var(ur));
                vm * fhat - dot(law.potential(vm), n)
            }
            EntropyFluxKind::Llf => {
                let (gl, gr) = (law.entropy_flux(ul), law.entropy_flux(ur));
                let s = dot(law.wave_speed(ul), n).abs().max(dot(law.wave_speed(ur), n).abs());
                0.5 * dot([gl[0] + gr[0], gl[1] + gr[1]], n) - 0.5 * s * (ur - ul)
            }
        }
    }
}

/// Entropy flux of the potential form, using LLF as interior flux.
pub fn entropy_numerical_flux(law: &dyn ConservationLaw, vl: f64, vr: f64, n: Vec2) -> Result<f64> {
    let (ul, ur) = (law.state_of_var(vl), law.state_of_var(vr));
    let f = llf(law, ul, ur, n)?;
    Ok(EntropyFluxKind::Potential.eval(law, ul, ur, n, f))
}

pub type Field = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;
pub type BoundaryData = Arc<dyn Fn(Vec2, BoundaryTag) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Steady,
    Unsteady,
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub law: Arc<dyn ConservationLaw>,
    pub domain: Rect,
    pub boundary: BoundaryData,
    /// Initial condition, or initial guess for steady problems.
    pub initial: Field,
    pub exact: Option<Field>,
    pub mode: Mode,
    pub boundary_flux: BoundaryFluxKind,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("law", &self.law)
            .field("domain", &self.domain)
            .field("mode", &self.mode)
            .field("boundary_flux", &self.boundary_flux)
            .finish_non_exhaustive()
    }
}

pub const PROBLEM_NAMES: [&str; 3] = ["sqrt_advect", "sinh_steady", "sinh_burgers"];

pub fn make_problem(name: &str) -> Result<ProblemSpec> {
    match name {
        "sqrt_advect" => Ok(sqrt_advect()),
        "sinh_steady" => Ok(sinh_steady()),
        "sinh_burgers" => Ok(sinh_burgers()),
        _ => Err(Error::invalid(format!(
            "unknown problem `{name}` (expected one of {})",
            PROBLEM_NAMES.join(", ")
        ))),
    }
}

pub fn sqrt_bump(p: Vec2) -> f64 {
    let r = ((p[0] + 5.0).powi(2) + (p[1] + 5.0).powi(2)).sqrt();
    if r > 0.5 {
        1.0
    } else {
        1.0 + 2.0 * (PI / 4.0 * (1.0 - 2.0 * r)).sin()
    }
}

pub fn sqrt_advect() -> ProblemSpec {
    ProblemSpec {
        name: "sqrt_advect".into(),
        law: Arc::new(SqrtLaw),
        domain: Rect::new(-20.0, 20.0, -20.0, 20.0),
        boundary: Arc::new(|p, _| sqrt_bump(p)),
        initial: Arc::new(sqrt_bump),
        exact: None,
        mode: Mode::Unsteady,
        boundary_flux: BoundaryFluxKind::Llf,
    }
}

pub fn sinh_steady() -> ProblemSpec {
    let exact: Field = Arc::new(|p| exact_sinh_steady(p[0], p[1]).expect("smooth region"));
    let b = exact.clone();
    ProblemSpec {
        name: "sinh_steady".into(),
        law: Arc::new(SinhLaw),
        domain: Rect::unit(),
        boundary: Arc::new(move |p, _| b(p)),
        initial: Arc::new(|p| p[0] - 0.5),
        exact: Some(exact),
        mode: Mode::Steady,
        boundary_flux: BoundaryFluxKind::Llf,
    }
}

pub fn sinh_burgers() -> ProblemSpec {
    ProblemSpec {
        name: "sinh_burgers".into(),
        law: Arc::new(SinhLaw),
        domain: Rect::unit(),
        boundary: Arc::new(|p, _| 0.5 - p[0]),
        initial: Arc::new(|p| 0.5 - p[0]),
        exact: None,
        mode: Mode::Steady,
        boundary_flux: BoundaryFluxKind::Upwind,
    }
}

/// Linear advection on the unit square with the exact solution transported
/// from the inflow sides. Intended for tests.
pub fn linear_advection(velocity: Vec2, profile: Field) -> ProblemSpec {
    let exact: Field = Arc::new(move |p| profile([p[0] - velocity[0] * p[1] / velocity[1], 0.0]));
    let b = exact.clone();
    ProblemSpec {
        name: "linear_advection".into(),
        law: Arc::new(LinearAdvection { velocity }),
        domain: Rect::unit(),
        boundary: Arc::new(move |p, _| b(p)),
        initial: Arc::new(|_| 0.0),
        exact: Some(exact),
        mode: Mode::Steady,
        boundary_flux: BoundaryFluxKind::Llf,
    }
}

/// Bottom data for `sinh_steady`. Equal to `x - 1/2` on `[0, 1]`; for `x < 0`
/// it continues as `-1/2 + tanh(2x)/2`, which matches the value and the first
/// two derivatives at the corner and feeds the left inflow side.
pub fn sinh_steady_data(x: f64) -> f64 {
    if x >= 0.0 {
        x - 0.5
    } else {
        -0.5 + 0.5 * (2.0 * x).tanh()
    }
}

fn sinh_steady_data_slope(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        let c = (2.0 * x).cosh();
        1.0 / (c * c)
    }
}

/// Solution of `(sinh u)_x + u_y = 0` carried along characteristics from the
/// line `y = 0`: `u = u0(x0)` where `x0 + y cosh u0(x0) = x`, with `u0` given
/// by [`sinh_steady_data`]. On `x >= y cosh(1/2)` this is the root of
/// `u + y cosh u - x + 1/2 = 0`.
pub fn exact_sinh_steady(x: f64, y: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(x, "exact_sinh_steady x"));
    }
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::domain(y, "exact_sinh_steady y"));
    }
    if y == 0.0 {
        return Ok(sinh_steady_data(x));
    }
    let g = |x0: f64| x0 + y * sinh_steady_data(x0).cosh() - x;
    let dg = |x0: f64| {
        let u = sinh_steady_data(x0);
        1.0 + y * u.sinh() * sinh_steady_data_slope(x0)
    };
    // |u0| <= 1 on the feet that matter, so 1 <= cosh u0 <= cosh 1.
    let mut lo = x - y * 1f64.cosh() - 1e-12;
    let mut hi = x - y + 1e-12;
    if g(lo) > 0.0 || g(hi) < 0.0 {
        return Err(Error::Numerical(format!("no characteristic foot for ({x}, {y})")));
    }
    let mut x0 = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x0);
        if gx == 0.0 {
            break;
        }
        if gx > 0.0 {
            hi = x0;
        } else {
            lo = x0;
        }
        let d = dg(x0);
        let mut next = x0 - gx / d;
        if !(d > 0.0) || !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x0).abs() <= 1e-16 * (1.0 + x0.abs()) || hi - lo <= 1e-16 {
            x0 = next;
            break;
        }
        x0 = next;
    }
    if (hi - lo) > 1e-6 && g(x0).abs() > 1e-13 {
        return Err(Error::Numerical(format!("exact solution did not converge at ({x}, {y})")));
    }
    Ok(sinh_steady_data(x0))
}
