//! Global assembly of the residual distribution scheme and pseudo-time
//! marching.

use crate::basis::MAX_LOCAL;
use crate::entropy::{self, EntropyCorrection};
use crate::mesh::Continuity;
use crate::par::{self, Execution};
use crate::problems::{BoundaryFluxKind, Mode, ProblemSpec};
use crate::residuals::{
    self, boundary_residual, BaseScheme, BoundaryResidual, ElementContext, ElementResidual, EntropyFilter,
    FaceValues, SchemeConfig,
};
use crate::space::Space;
use crate::{Error, Result};

/// Everything computed for one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementOutput {
    pub base: ElementResidual,
    pub correction: EntropyCorrection,
    pub filter: [f64; MAX_LOCAL],
    /// `sum V_sigma Psi_sigma`.
    pub production: f64,
    pub entropy_flux_integral: f64,
    pub boundary_entropy_flux: f64,
    /// `Phi + r + Psi`.
    pub total: [f64; MAX_LOCAL],
    pub v: [f64; MAX_LOCAL],
}

impl ElementOutput {
    pub fn values(&self) -> &[f64] {
        &self.total[..self.base.n]
    }

    /// `sum V_sigma Phi'_sigma`.
    pub fn entropy_residual(&self) -> f64 {
        entropy::weighted_sum(&self.v[..self.base.n], self.values())
    }
}

#[derive(Debug, Clone)]
pub struct Assembly {
    pub residual: Vec<f64>,
    pub elements: Vec<ElementOutput>,
    pub boundary: Vec<BoundaryResidual>,
}

/// Global entropy balance of an assembled state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyBalance {
    /// `sum_K sum V Phi'^K + sum_Gamma sum V Phi^Gamma`.
    pub sum: f64,
    /// `sum_K (sum V Phi'^K - oint_{dK cap dOmega} ghat)`: zero up to
    /// round-off whenever the correction is on.
    pub interior: f64,
    /// `sum |V_sigma Phi'_sigma|` over elements and boundary faces.
    pub scale: f64,
}

impl Assembly {
    pub fn entropy_balance(&self, space: &Space) -> EntropyBalance {
        let mut b = EntropyBalance {
            sum: 0.0,
            interior: 0.0,
            scale: 0.0,
        };
        for o in &self.elements {
            let s = o.entropy_residual();
            b.sum += s;
            b.interior += s - o.boundary_entropy_flux;
            b.scale += o.v[..o.base.n].iter().zip(o.values()).map(|(v, p)| (v * p).abs()).sum::<f64>();
        }
        for f in &self.boundary {
            let v = &self.elements[f.elem].v;
            for s in 0..space.n_local() {
                b.sum += v[s] * f.phi[s];
                b.scale += (v[s] * f.phi[s]).abs();
            }
        }
        b
    }

    /// `sum_Gamma oint fhat_b`: the net flux leaving through the boundary.
    pub fn boundary_flux(&self) -> f64 {
        self.boundary.iter().map(|f| f.flux).sum()
    }

    pub fn residual_inf(&self) -> f64 {
        self.residual.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Binds a space, a problem and a scheme.
#[derive(Clone)]
pub struct Assembler<'a> {
    pub space: &'a Space,
    pub problem: &'a ProblemSpec,
    pub config: SchemeConfig,
    pub exec: Execution,
}

impl<'a> Assembler<'a> {
    pub fn new(space: &'a Space, problem: &'a ProblemSpec, config: SchemeConfig) -> Result<Self> {
        config.validate()?;
        let dg = space.continuity() == Continuity::Discontinuous;
        if config.base == BaseScheme::Dg && !dg {
            return Err(Error::invalid("scheme `dg` needs a discontinuous space"));
        }
        if config.uses_jumps() && dg {
            return Err(Error::invalid("gradient-jump terms need a continuous space"));
        }
        Ok(Assembler {
            space,
            problem,
            config,
            exec: Execution::default(),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn boundary_flux_kind(&self) -> BoundaryFluxKind {
        self.config.boundary_flux.unwrap_or(self.problem.boundary_flux)
    }

    pub fn face_values(&self, u: &[f64]) -> Result<Vec<FaceValues>> {
        let law = &*self.problem.law;
        par::try_map_indexed(self.exec, self.space.mesh.interior_faces.len(), |f| {
            residuals::face_values(self.space, law, u, f, self.config.entropy_flux)
        })
    }

    pub fn context<'b>(&'b self, faces: &[FaceValues], u: &[f64], e: usize) -> Result<ElementContext<'b>> {
        ElementContext::new(self.space, &*self.problem.law, faces, u, e)
    }

    pub fn base_residual(&self, ctx: &ElementContext) -> Result<ElementResidual> {
        let c = &self.config;
        match c.base {
            BaseScheme::Galerkin | BaseScheme::Dg => residuals::galerkin_residual(ctx),
            BaseScheme::Supg => residuals::supg_residual(ctx, c.supg_theta),
            BaseScheme::GalerkinJump => residuals::jump_stabilized_residual(ctx, c.theta_jump),
            BaseScheme::Rusanov => residuals::rusanov_residual(ctx),
            BaseScheme::LimitedRd => residuals::limited_rd_residual(ctx, c.theta_stream, c.theta_jump),
        }
    }

    /// Base residual, then entropy correction, then filter.
    pub fn element_output(&self, ctx: &ElementContext) -> Result<ElementOutput> {
        let c = &self.config;
        let n = ctx.n;
        let base = self.base_residual(ctx)?;
        let ghat = ctx.entropy_flux_integral();
        let defect = ghat - entropy::weighted_sum(&ctx.v[..n], base.values());
        let correction = if c.entropy_correction {
            entropy::correction(&ctx.v[..n], defect, c.epsilon)
        } else {
            EntropyCorrection {
                defect,
                alpha: 0.0,
                r: [0.0; MAX_LOCAL],
            }
        };
        let filter = match c.entropy_filter {
            EntropyFilter::None => [0.0; MAX_LOCAL],
            EntropyFilter::Jump => entropy::filter_jump(ctx, c.filter_theta)?,
            EntropyFilter::Streamline => entropy::filter_streamline(ctx, c.filter_theta, c.reduced_filter_quadrature)?,
        };
        Ok(ElementOutput {
            base,
            correction,
            production: entropy::weighted_sum(&ctx.v[..n], &filter[..n]),
            filter,
            entropy_flux_integral: ghat,
            boundary_entropy_flux: ctx.boundary_entropy_flux(),
            total: entropy::corrected_residual(base.values(), &correction.r[..n], &filter[..n]),
            v: ctx.v,
        })
    }

    pub fn element_outputs(&self, u: &[f64]) -> Result<Vec<ElementOutput>> {
        let faces = self.face_values(u)?;
        par::try_map_indexed(self.exec, self.space.n_elements(), |e| {
            let ctx = self.context(&faces, u, e)?;
            self.element_output(&ctx)
        })
    }

    pub fn boundary_residuals(&self, u: &[f64]) -> Result<Vec<BoundaryResidual>> {
        let kind = self.boundary_flux_kind();
        let law = &*self.problem.law;
        let faces = &self.space.mesh.boundary_faces;
        par::try_map_indexed(self.exec, faces.len(), |i| {
            boundary_residual(self.space, law, self.problem, kind, &faces[i], u)
        })
    }

    /// `R_sigma = sum_K Phi'_sigma^K + sum_Gamma Phi_sigma^Gamma`, gathered in
    /// element order.
    pub fn assemble(&self, u: &[f64]) -> Result<Assembly> {
        if u.len() != self.space.n_dofs() {
            return Err(Error::invalid(format!(
                "state has {} values, space has {} DoFs",
                u.len(),
                self.space.n_dofs()
            )));
        }
        let elements = self.element_outputs(u)?;
        let boundary = self.boundary_residuals(u)?;
        let mut residual = vec![0.0; self.space.n_dofs()];
        for (e, o) in elements.iter().enumerate() {
            for (&d, &p) in self.space.dofs.dofs(e).iter().zip(o.values()) {
                residual[d] += p;
            }
        }
        for f in &boundary {
            for (&d, &p) in self.space.dofs.dofs(f.elem).iter().zip(&f.phi) {
                residual[d] += p;
            }
        }
        Ok(Assembly {
            residual,
            elements,
            boundary,
        })
    }

    pub fn residual(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(self.assemble(u)?.residual)
    }
}

/// Largest wave speed per element, over its DoF values.
fn element_speeds(space: &Space, problem: &ProblemSpec, u: &[f64]) -> Vec<f64> {
    (0..space.n_elements())
        .map(|e| {
            space
                .dofs
                .dofs(e)
                .iter()
                .map(|&d| {
                    let a = problem.law.wave_speed(u[d]);
                    a[0].hypot(a[1])
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// `cfl min_K h_K / ((2k+1) abar_K)`.
pub fn time_step(space: &Space, problem: &ProblemSpec, u: &[f64], cfl: f64) -> Result<f64> {
    let k = space.degree() as f64;
    let speeds = element_speeds(space, problem, u);
    let dt = (0..space.n_elements())
        .filter(|&e| speeds[e] > 0.0)
        .map(|e| cfl * space.geometry[e].h / ((2.0 * k + 1.0) * speeds[e]))
        .fold(f64::INFINITY, f64::min);
    if dt.is_finite() && dt > 0.0 {
        Ok(dt)
    } else {
        Err(Error::Numerical("no finite time step (all wave speeds vanish)".into()))
    }
}

/// Per-DoF pseudo-time steps `cfl |C_sigma| / sum_{K ni sigma} alpha_K`, with
/// `alpha_K` the Rusanov coefficient of the element.
pub fn local_time_steps(
    space: &Space,
    problem: &ProblemSpec,
    u: &[f64],
    volumes: &[f64],
    cfl: f64,
    exec: Execution,
) -> Vec<f64> {
    let law = &*problem.law;
    let alpha = par::map_indexed(exec, space.n_elements(), |e| {
        residuals::element_alpha(space, law, e, &space.local(e, u))
    });
    let mut sum = vec![0.0; space.n_dofs()];
    for (e, a) in alpha.iter().enumerate() {
        for &d in space.dofs.dofs(e) {
            sum[d] += a;
        }
    }
    sum.iter()
        .zip(volumes)
        .map(|(s, c)| cfl * c / s.max(f64::MIN_POSITIVE))
        .collect()
}

/// `u_sigma - dt / |C_sigma| R_sigma`.
pub fn euler_step(u: &[f64], residual: &[f64], dt: f64, volumes: &[f64]) -> Vec<f64> {
    u.iter()
        .zip(residual)
        .zip(volumes)
        .map(|((u, r), c)| u - dt / c * r)
        .collect()
}

/// `M = sum |C_sigma| u_sigma`.
pub fn mass(u: &[f64], volumes: &[f64]) -> f64 {
    u.iter().zip(volumes).map(|(u, c)| u * c).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarchConfig {
    pub cfl: f64,
    pub t_end: f64,
    pub steady_tol: f64,
    pub max_iters: usize,
    /// Mixing depth of Anderson acceleration for steady solves (0 = plain
    /// pseudo-time stepping).
    pub anderson: usize,
}

impl Default for MarchConfig {
    fn default() -> Self {
        MarchConfig {
            cfl: 0.3,
            t_end: 5.0,
            steady_tol: 1e-8,
            max_iters: 200_000,
            anderson: 0,
        }
    }
}

impl MarchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return Err(Error::invalid("cfl must be positive"));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::invalid("t_end must be non-negative"));
        }
        if !(self.steady_tol > 0.0) {
            return Err(Error::invalid("steady_tol must be positive"));
        }
        Ok(())
    }
}

/// One row of the march history, recorded before each update (and once
/// for the final state).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub mass: f64,
    pub entropy_residual_sum: f64,
    pub res_inf: f64,
    /// `M^{n+1} - M^n + dt sum_Gamma oint fhat_b`; zero for an exactly
    /// conservative update. NaN on the final row.
    pub interior_mass_drift: f64,
    pub entropy_scale: f64,
    /// Element part of `entropy_residual_sum`, without boundary residuals.
    pub entropy_interior: f64,
}

#[derive(Debug, Clone)]
pub struct MarchResult {
    pub state: Vec<f64>,
    pub history: Vec<HistoryRow>,
    pub converged: bool,
    pub steps: usize,
}

fn check_state(asm: &Assembler, u: &[f64]) -> Result<()> {
    for (i, &x) in u.iter().enumerate() {
        if !asm.problem.law.admissible(x) {
            return Err(Error::domain(x, format!("DoF {i} after update")));
        }
    }
    Ok(())
}

/// Marches `u0` with forward Euler: to `t_end` with a fixed step for
/// unsteady problems, or with local pseudo-time steps until
/// `||R||_inf <= steady_tol ||R^0||_inf` for steady ones.
pub fn march(asm: &Assembler, u0: Vec<f64>, cfg: &MarchConfig) -> Result<MarchResult> {
    cfg.validate()?;
    match asm.problem.mode {
        Mode::Unsteady => march_unsteady(asm, u0, cfg),
        Mode::Steady => march_steady(asm, u0, cfg),
    }
}

fn row(step: usize, t: f64, dt: f64, u: &[f64], vol: &[f64], a: &Assembly, space: &Space) -> HistoryRow {
    let b = a.entropy_balance(space);
    HistoryRow {
        step,
        t,
        dt,
        mass: mass(u, vol),
        entropy_residual_sum: b.sum,
        res_inf: a.residual_inf(),
        interior_mass_drift: f64::NAN,
        entropy_scale: b.scale,
        entropy_interior: b.interior,
    }
}

fn march_unsteady(asm: &Assembler, mut u: Vec<f64>, cfg: &MarchConfig) -> Result<MarchResult> {
    let vol = asm.space.dual_volumes();
    let dt0 = time_step(asm.space, asm.problem, &u, cfg.cfl)?;
    let mut t = 0.0;
    let mut history = Vec::new();
    let mut step = 0;
    while t < cfg.t_end {
        let dt = dt0.min(cfg.t_end - t);
        let a = asm.assemble(&u)?;
        let mut r = row(step, t, dt, &u, &vol, &a, asm.space);
        let next = euler_step(&u, &a.residual, dt, &vol);
        check_state(asm, &next)?;
        r.interior_mass_drift = mass(&next, &vol) - r.mass + dt * a.boundary_flux();
        history.push(r);
        u = next;
        step += 1;
        t = if cfg.t_end - t <= dt0 { cfg.t_end } else { t + dt };
    }
    let a = asm.assemble(&u)?;
    history.push(row(step, t, 0.0, &u, &vol, &a, asm.space));
    Ok(MarchResult {
        state: u,
        history,
        converged: true,
        steps: step,
    })
}

fn march_steady(asm: &Assembler, mut u: Vec<f64>, cfg: &MarchConfig) -> Result<MarchResult> {
    let vol = asm.space.dual_volumes();
    let mut history = Vec::new();
    let mut anderson = Anderson::new(cfg.anderson);
    let mut r0 = None;
    let mut t = 0.0;
    for step in 0..=cfg.max_iters {
        let a = asm.assemble(&u)?;
        let res = a.residual_inf();
        let r0v = *r0.get_or_insert(res);
        let mut h = row(step, t, 0.0, &u, &vol, &a, asm.space);
        if res <= cfg.steady_tol * r0v || step == cfg.max_iters {
            history.push(h);
            return Ok(MarchResult {
                state: u,
                history,
                converged: res <= cfg.steady_tol * r0v,
                steps: step,
            });
        }
        let dts = local_time_steps(asm.space, asm.problem, &u, &vol, cfg.cfl, asm.exec);
        let update: Vec<f64> = a.residual.iter().zip(&dts).zip(&vol).map(|((r, dt), c)| -dt / c * r).collect();
        let mut next = anderson.next(&u, &update);
        if check_state(asm, &next).is_err() {
            anderson.reset();
            next = u.iter().zip(&update).map(|(a, b)| a + b).collect();
            check_state(asm, &next)?;
        }
        let dt_min = dts.iter().copied().fold(f64::INFINITY, f64::min);
        h.dt = dt_min;
        h.interior_mass_drift = f64::NAN;
        history.push(h);
        t += dt_min;
        u = next;
    }
    unreachable!("loop returns on its last iteration")
}

/// Anderson mixing for the fixed-point map `u -> u + update(u)`.
struct Anderson {
    depth: usize,
    us: Vec<Vec<f64>>,
    fs: Vec<Vec<f64>>,
}

impl Anderson {
    fn new(depth: usize) -> Self {
        Anderson {
            depth,
            us: Vec::new(),
            fs: Vec::new(),
        }
    }

    fn reset(&mut self) {
        self.us.clear();
        self.fs.clear();
    }

    fn next(&mut self, u: &[f64], f: &[f64]) -> Vec<f64> {
        let plain: Vec<f64> = u.iter().zip(f).map(|(a, b)| a + b).collect();
        if self.depth == 0 {
            return plain;
        }
        self.us.push(u.to_vec());
        self.fs.push(f.to_vec());
        if self.us.len() > self.depth + 1 {
            self.us.remove(0);
            self.fs.remove(0);
        }
        let m = self.us.len() - 1;
        if m == 0 {
            return plain;
        }
        let n = u.len();
        let df = nalgebra::DMatrix::from_fn(n, m, |i, j| self.fs[j + 1][i] - self.fs[j][i]);
        let rhs = nalgebra::DVector::from_column_slice(f);
        let Ok(gamma) = df.clone().svd(true, true).solve(&rhs, 1e-12) else {
            self.reset();
            return plain;
        };
        let mut out = plain;
        for j in 0..m {
            let g = gamma[j];
            for i in 0..n {
                out[i] -= g * ((self.us[j + 1][i] - self.us[j][i]) + (self.fs[j + 1][i] - self.fs[j][i]));
            }
        }
        out
    }
}
