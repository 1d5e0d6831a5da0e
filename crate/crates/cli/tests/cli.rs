use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SQRT: &str = "\
problem.name = sqrt_advect
mesh.nx = 40
mesh.ny = 40
space.degree = 1
scheme.base = galerkin_jump
scheme.theta_jump = 0.01
scheme.entropy_correction = on
march.cfl = 0.3
march.t_end = 5
";

fn rdes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdes")).args(args).output().unwrap()
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let head = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|x| x.unwrap().iter().map(String::from).collect())
        .collect();
    (head, rows)
}

fn column(head: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = head.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn run_writes_history_and_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.cfg", SQRT);
    let out = dir.path().join("out");
    let o = rdes(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));

    let (head, rows) = read_csv(&out.join("history.csv"));
    assert_eq!(head, ["step", "t", "dt", "mass", "entropy_residual_sum", "res_inf"]);
    let t = column(&head, &rows, "t");
    assert!(t.windows(2).all(|w| w[1] > w[0]));
    assert!((t.last().unwrap() - 5.0).abs() < 1e-12);
    let m = column(&head, &rows, "mass");
    assert!(m.iter().all(|x| x.is_finite()));

    let vtk = fs::read_to_string(out.join("field.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
    assert!(vtk.contains("POINTS 1681 double"));
    assert!(vtk.contains("POLYGONS 3200 12800"));
    assert!(vtk.contains("SCALARS u double 1"));
}

#[test]
fn correction_off_leaves_visible_entropy_residual() {
    let dir = TempDir::new().unwrap();
    let sum_max = |text: &str, name: &str| {
        let cfg = write_config(&dir, &format!("{name}.cfg"), text);
        let out = dir.path().join(name);
        let o = rdes(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        let (head, rows) = read_csv(&out.join("history.csv"));
        column(&head, &rows, "entropy_residual_sum")
            .iter()
            .take(15)
            .fold(0.0f64, |m, x| m.max(x.abs()))
    };
    let on = sum_max(SQRT, "on");
    let off = sum_max(&SQRT.replace("correction = on", "correction = off"), "off");
    assert!(on < 1e-9, "{on}");
    assert!(off > 1e-4, "{off}");
}

#[test]
fn unknown_scheme_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.cfg", &SQRT.replace("galerkin_jump", "magic"));
    let o = rdes(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 5, column 15"), "{err}");
    assert!(err.contains("magic"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(rdes(&["run"]).status.code(), Some(2));
    assert_eq!(rdes(&["frobnicate"]).status.code(), Some(2));
    let o = rdes(&["run", "--config", "/nonexistent/x.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.cfg", "mesh.nx = -3\n");
    let o = rdes(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1, column 11"), "{}", stderr(&o));
}

#[test]
fn numerical_failure_exits_1() {
    // Pure Galerkin undershoots below zero, where sqrt is undefined.
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "gal.cfg", &SQRT.replace("galerkin_jump", "galerkin"));
    let o = rdes(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("inadmissible"), "{}", stderr(&o));
}

#[test]
fn deterministic_rerun_from_dumped_config_is_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.cfg", SQRT);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = rdes(&["run", "--deterministic", "--config", &cfg, "--out", a.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dumped = a.join("effective.cfg");
    let o = rdes(&["run", "--deterministic", "--config", dumped.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["history.csv", "field.vtk", "effective.cfg"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    // The parallel path reduces in the same order.
    let c = dir.path().join("c");
    let o = rdes(&["run", "--config", &cfg, "--out", c.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read(a.join("history.csv")).unwrap(), fs::read(c.join("history.csv")).unwrap());
}

#[test]
fn dump_entropy_has_one_row_per_element() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.cfg", &SQRT.replace("t_end = 5", "t_end = 0.5"));
    let out = dir.path().join("out");
    let o = rdes(&["run", "--dump-entropy", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (head, rows) = read_csv(&out.join("entropy_dump.csv"));
    assert_eq!(head[..3], ["element", "defect", "alpha"]);
    assert_eq!(rows.len(), 3200);
}

const SINH: &str = "\
problem.name = sinh_steady
space.degree = 1
scheme.base = galerkin
scheme.entropy_correction = on
scheme.filter = jump
scheme.filter_theta = 0.01
march.cfl = 1
march.anderson = 5
";

#[test]
fn convergence_table() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.cfg", &format!("{SINH}mesh.sizes = 8, 16, 32\n"));
    let out = dir.path().join("out");
    let o = rdes(&["convergence", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (head, rows) = read_csv(&out.join("convergence.csv"));
    assert_eq!(head[..9], ["n", "h", "n_dofs", "L1", "slope_L1", "L2", "slope_L2", "Linf", "slope_Linf"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][6], "");
    let s: f64 = rows[2][6].parse().unwrap();
    assert!(s > 1.5, "{s}");
}

#[test]
fn convergence_single_mesh_has_no_slopes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.cfg", &format!("{SINH}mesh.sizes = 6\n"));
    let out = dir.path().join("out");
    let o = rdes(&["convergence", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (head, rows) = read_csv(&out.join("convergence.csv"));
    assert_eq!(rows.len(), 1);
    for name in ["slope_L1", "slope_L2", "slope_Linf"] {
        let i = head.iter().position(|h| h == name).unwrap();
        assert_eq!(rows[0][i], "");
    }
    let l2: f64 = rows[0][5].parse().unwrap();
    assert!(l2 > 0.0 && l2 < 0.1);
}

#[test]
fn audit_reports_correction_on_and_off() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "a.cfg", SQRT);
    let out = dir.path().join("out");
    let o = rdes(&["audit", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (head, rows) = read_csv(&out.join("audit.csv"));
    assert_eq!(rows.len(), 41);
    let drift: Vec<f64> = column(&head, &rows[..40], "mass_drift_on");
    assert!(drift.iter().all(|d| d.abs() <= 1e-12), "{drift:?}");
    let interior_on = column(&head, &rows, "entropy_interior_on");
    let scale_on = column(&head, &rows, "entropy_scale_on");
    for (e, s) in interior_on.iter().zip(&scale_on) {
        assert!(e.abs() <= 1e-10 * (1.0 + s), "{e} {s}");
    }
    let off = column(&head, &rows, "entropy_sum_off");
    assert!(off.iter().fold(0.0f64, |m, x| m.max(x.abs())) > 1e-4);
}

#[test]
fn recover_edge_fluxes() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("psi.csv");
    fs::write(&input, "element,psi0,psi1,psi2\n0, 2, -1, -1\n1, 0.5, 0.5, -1\n").unwrap();
    let out = dir.path().join("out");
    let o = rdes(&["recover", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (head, rows) = read_csv(&out.join("edge_fluxes.csv"));
    assert_eq!(head, ["element", "from", "to", "flux"]);
    assert_eq!(rows.len(), 6);
    // (Psi_a - Psi_b) / 3 for Psi = (2, -1, -1)
    let f: Vec<f64> = rows[..3].iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(f, [1.0, 1.0, 0.0]);

    let input = dir.path().join("p2.csv");
    fs::write(&input, "element,a,b,c,d,e,f\n7,1,2,3,-1,-2,-3\n").unwrap();
    let o = rdes(&["recover", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = read_csv(&out.join("edge_fluxes.csv"));
    assert_eq!(rows.len(), 9);
    let mut sums = [0.0; 6];
    for r in &rows {
        let (a, b, f): (usize, usize, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap(), r[3].parse().unwrap());
        sums[a] += f;
        sums[b] -= f;
    }
    for (s, p) in sums.iter().zip([1.0, 2.0, 3.0, -1.0, -2.0, -3.0]) {
        assert!((s - p).abs() < 1e-12);
    }
}

#[test]
fn recover_rejects_bad_rows() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("psi.csv");
    fs::write(&input, "element,a,b,c,d\n0,1,1,1,-3\n").unwrap();
    let o = rdes(&["recover", input.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    fs::write(&input, "element,a,b,c\n0,1,1,1\n").unwrap();
    let o = rdes(&["recover", input.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sum to zero"), "{}", stderr(&o));
}
