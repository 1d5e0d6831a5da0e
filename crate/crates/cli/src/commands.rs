use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rdes::audit::{convergence_study, slopes};
use rdes::fvrecover::{recover_laplacian, recover_p1, FluxGraph, P2_EDGES};
use rdes::mesh::{build_rect_mesh, io::write_vtk};
use rdes::par::Execution;
use rdes::problems::{make_problem, ProblemSpec};
use rdes::solver::{march, Assembler, HistoryRow, MarchResult};
use rdes::space::Space;

use crate::config::RunConfig;
use crate::error::CliError;

pub struct Options {
    pub out: PathBuf,
    pub exec: Execution,
    pub dump_entropy: bool,
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::parse(&text)
}

fn prepare_out(out: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(format!("creating {}", out.display()), e))?;
    write_text(&out.join("effective.cfg"), &cfg.to_string())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(CliError::from)
}

fn build_space(cfg: &RunConfig, problem: &ProblemSpec, nx: usize, ny: usize) -> Result<Space, CliError> {
    let mesh = build_rect_mesh(problem.domain, nx, ny, cfg.diagonal)?;
    Ok(Space::new(mesh, cfg.degree, cfg.continuity(), cfg.basis)?)
}

fn run_march(cfg: &RunConfig, space: &Space, problem: &ProblemSpec, exec: Execution) -> Result<MarchResult, CliError> {
    let asm = Assembler::new(space, problem, cfg.scheme)?.with_execution(exec);
    let u0 = space.interpolate(|p| (problem.initial)(p));
    Ok(march(&asm, u0, &cfg.march)?)
}

fn write_history(path: &Path, history: &[HistoryRow]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["step", "t", "dt", "mass", "entropy_residual_sum", "res_inf"])?;
    for h in history {
        w.write_record([
            h.step.to_string(),
            format!("{:e}", h.t),
            format!("{:e}", h.dt),
            format!("{:e}", h.mass),
            format!("{:e}", h.entropy_residual_sum),
            format!("{:e}", h.res_inf),
        ])?;
    }
    w.flush().map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

pub fn run(cfg: &RunConfig, opts: &Options) -> Result<(), CliError> {
    prepare_out(&opts.out, cfg)?;
    let problem = make_problem(&cfg.problem)?;
    let space = build_space(cfg, &problem, cfg.nx, cfg.ny)?;
    let res = run_march(cfg, &space, &problem, opts.exec)?;
    write_history(&opts.out.join("history.csv"), &res.history)?;

    let path = opts.out.join("field.vtk");
    let file = fs::File::create(&path).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    let values = space.nodal_values(&res.state);
    write_vtk(
        BufWriter::new(file),
        &space.dofs.dof_points,
        &space.plot_triangles(),
        &[("u", &values)],
    )?;

    if opts.dump_entropy {
        let asm = Assembler::new(&space, &problem, cfg.scheme)?.with_execution(opts.exec);
        let mut w = csv_writer(&opts.out.join("entropy_dump.csv"))?;
        w.write_record(["element", "defect", "alpha", "production", "entropy_residual", "entropy_flux_integral"])?;
        for (e, o) in asm.element_outputs(&res.state)?.iter().enumerate() {
            w.write_record([
                e.to_string(),
                format!("{:e}", o.correction.defect),
                format!("{:e}", o.correction.alpha),
                format!("{:e}", o.production),
                format!("{:e}", o.entropy_residual()),
                format!("{:e}", o.entropy_flux_integral),
            ])?;
        }
        w.flush().map_err(|e| CliError::io("writing entropy_dump.csv", e))?;
    }

    let last = res.history.last().expect("history has a final row");
    println!(
        "{}: {} steps, t = {:.6}, mass = {:.15e}, |R|_inf = {:.3e}",
        cfg.problem, res.steps, last.t, last.mass, last.res_inf
    );
    if !res.converged {
        return Err(CliError::Failed(format!(
            "steady solve did not converge in {} iterations",
            cfg.march.max_iters
        )));
    }
    Ok(())
}

pub fn convergence(cfg: &RunConfig, opts: &Options) -> Result<(), CliError> {
    prepare_out(&opts.out, cfg)?;
    let problem = make_problem(&cfg.problem)?;
    let rows = convergence_study(&problem, cfg.degree, cfg.basis, cfg.scheme, &cfg.march, &cfg.sizes, opts.exec)?;
    let column = |f: fn(&rdes::audit::ErrorNorms) -> f64| {
        let data: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, f(&r.norms))).collect();
        slopes(&data)
    };
    let (s1, s2, si) = (column(|n| n.l1), column(|n| n.l2), column(|n| n.linf));
    let slope = |s: &[f64], i: usize| if i == 0 { String::new() } else { format!("{:.3}", s[i - 1]) };

    let mut w = csv_writer(&opts.out.join("convergence.csv"))?;
    w.write_record(["n", "h", "n_dofs", "L1", "slope_L1", "L2", "slope_L2", "Linf", "slope_Linf", "steps", "converged"])?;
    for (i, r) in rows.iter().enumerate() {
        w.write_record([
            r.n.to_string(),
            format!("{:e}", r.h),
            r.n_dofs.to_string(),
            format!("{:e}", r.norms.l1),
            slope(&s1, i),
            format!("{:e}", r.norms.l2),
            slope(&s2, i),
            format!("{:e}", r.norms.linf),
            slope(&si, i),
            r.steps.to_string(),
            r.converged.to_string(),
        ])?;
        println!(
            "n = {:4}  h = {:.3e}  L1 = {:.3e} {:>6}  L2 = {:.3e} {:>6}  Linf = {:.3e} {:>6}",
            r.n,
            r.h,
            r.norms.l1,
            slope(&s1, i),
            r.norms.l2,
            slope(&s2, i),
            r.norms.linf,
            slope(&si, i)
        );
    }
    w.flush().map_err(|e| CliError::io("writing convergence.csv", e))?;
    if let Some(r) = rows.iter().find(|r| !r.converged) {
        return Err(CliError::Failed(format!("steady solve on the {0}x{0} mesh did not converge", r.n)));
    }
    Ok(())
}

pub fn audit(cfg: &RunConfig, opts: &Options) -> Result<(), CliError> {
    prepare_out(&opts.out, cfg)?;
    let problem = make_problem(&cfg.problem)?;
    let space = build_space(cfg, &problem, cfg.nx, cfg.ny)?;
    let mut runs = Vec::with_capacity(2);
    for on in [true, false] {
        let mut c = cfg.clone();
        c.scheme.entropy_correction = on;
        let res = run_march(&c, &space, &problem, opts.exec)
            .map_err(|e| CliError::Failed(format!("correction {}: {e}", if on { "on" } else { "off" })))?;
        runs.push(res.history);
    }
    let (on, off) = (&runs[0], &runs[1]);

    let mut w = csv_writer(&opts.out.join("audit.csv"))?;
    w.write_record([
        "step",
        "t",
        "mass",
        "mass_drift_on",
        "entropy_sum_on",
        "entropy_interior_on",
        "entropy_scale_on",
        "mass_drift_off",
        "entropy_sum_off",
        "entropy_interior_off",
        "entropy_scale_off",
    ])?;
    let rel_drift = |h: &HistoryRow| h.interior_mass_drift / h.mass.abs();
    let mut worst = [0.0f64; 3];
    for (a, b) in on.iter().zip(off) {
        w.write_record([
            a.step.to_string(),
            format!("{:e}", a.t),
            format!("{:e}", a.mass),
            format!("{:e}", rel_drift(a)),
            format!("{:e}", a.entropy_residual_sum),
            format!("{:e}", a.entropy_interior),
            format!("{:e}", a.entropy_scale),
            format!("{:e}", rel_drift(b)),
            format!("{:e}", b.entropy_residual_sum),
            format!("{:e}", b.entropy_interior),
            format!("{:e}", b.entropy_scale),
        ])?;
        if a.interior_mass_drift.is_finite() {
            worst[0] = worst[0].max(rel_drift(a).abs()).max(rel_drift(b).abs());
        }
        worst[1] = worst[1].max(a.entropy_residual_sum.abs() / (1.0 + a.entropy_scale));
        worst[2] = worst[2].max(b.entropy_residual_sum.abs() / (1.0 + b.entropy_scale));
    }
    w.flush().map_err(|e| CliError::io("writing audit.csv", e))?;
    println!("max interior mass drift / |M|: {:.3e}", worst[0]);
    println!("max entropy sum / (1 + scale), correction on:  {:.3e}", worst[1]);
    println!("max entropy sum / (1 + scale), correction off: {:.3e}", worst[2]);
    Ok(())
}

/// Reads `element, psi_0, ..., psi_{n-1}` rows (n = 3 or 6) and writes the
/// recovered edge fluxes.
pub fn recover(input: &Path, out: &Path) -> Result<(), CliError> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(input)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", input.display())))?;
    fs::create_dir_all(out).map_err(|e| CliError::io(format!("creating {}", out.display()), e))?;
    let mut w = csv_writer(&out.join("edge_fluxes.csv"))?;
    w.write_record(["element", "from", "to", "flux"])?;
    let mut worst: f64 = 0.0;
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let bad = |col: usize, msg: String| CliError::config(line, col, msg);
        let element = rec.get(0).unwrap_or_default().to_string();
        let psi: Vec<f64> = rec
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, s)| s.parse::<f64>().map_err(|_| bad(i + 1, format!("`{s}` is not a number"))))
            .collect::<Result<_, _>>()?;
        let graph: FluxGraph = match psi.len() {
            3 => recover_p1([psi[0], psi[1], psi[2]]),
            6 => recover_laplacian(&psi, &P2_EDGES),
            n => return Err(bad(1, format!("expected 3 or 6 residuals, got {n}"))),
        }
        .map_err(|e| bad(1, e.to_string()))?;
        worst = worst.max(graph.defect(&psi));
        for (&(a, b), f) in graph.edges.iter().zip(&graph.flux) {
            w.write_record([element.clone(), a.to_string(), b.to_string(), format!("{f:e}")])?;
        }
    }
    w.flush().map_err(|e| CliError::io("writing edge_fluxes.csv", e))?;
    println!("max node identity defect: {worst:.3e}");
    Ok(())
}
