//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are namespaced
//! (`problem.name`, `scheme.base`, `mesh.nx`, `march.cfl`, ...). Every key is
//! optional; missing keys keep their defaults.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rdes::basis::BasisKind;
use rdes::mesh::{Continuity, Diagonal};
use rdes::problems::PROBLEM_NAMES;
use rdes::residuals::{BaseScheme, SchemeConfig};
use rdes::solver::MarchConfig;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub nx: usize,
    pub ny: usize,
    pub diagonal: Diagonal,
    /// Mesh sizes for `convergence`.
    pub sizes: Vec<usize>,
    pub degree: usize,
    pub basis: BasisKind,
    pub scheme: SchemeConfig,
    pub march: MarchConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: "sqrt_advect".into(),
            nx: 40,
            ny: 40,
            diagonal: Diagonal::Alternating,
            sizes: vec![20, 40, 80],
            degree: 1,
            basis: BasisKind::Lagrange,
            scheme: SchemeConfig::default(),
            march: MarchConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn continuity(&self) -> Continuity {
        if self.scheme.base == BaseScheme::Dg {
            Continuity::Discontinuous
        } else {
            Continuity::Continuous
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.trim_start();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let key_col = raw.len() - body.len() + 1;
            let Some(eq) = raw.find('=') else {
                return Err(CliError::config(line, raw.trim_end().len() + 1, "expected `key = value`"));
            };
            let key = raw[..eq].trim();
            let after = &raw[eq + 1..];
            let value = after.trim();
            let value_col = eq + 2 + (after.len() - after.trim_start().len());
            if key.is_empty() {
                return Err(CliError::config(line, key_col, "missing key"));
            }
            cfg.set(key, value).map_err(|e| match e {
                SetError::Key => CliError::config(line, key_col, format!("unknown key `{key}`")),
                SetError::Value(msg) => CliError::config(line, value_col, format!("bad value for `{key}`: {msg}")),
            })?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), SetError> {
        let s = &mut self.scheme;
        let m = &mut self.march;
        match key {
            "problem.name" => {
                if !PROBLEM_NAMES.contains(&v) {
                    return Err(SetError::Value(format!(
                        "unknown problem `{v}` (expected one of: {})",
                        PROBLEM_NAMES.join(", ")
                    )));
                }
                self.problem = v.to_string();
            }
            "mesh.nx" => self.nx = positive(v)?,
            "mesh.ny" => self.ny = positive(v)?,
            "mesh.diagonal" => {
                self.diagonal = match v {
                    "alternating" => Diagonal::Alternating,
                    "fixed" => Diagonal::Fixed,
                    _ => return Err(SetError::Value("expected `alternating` or `fixed`".into())),
                }
            }
            "mesh.sizes" => {
                self.sizes = v.split(',').map(|x| positive(x.trim())).collect::<Result<_, _>>()?;
            }
            "space.degree" => {
                self.degree = match v {
                    "1" => 1,
                    "2" => 2,
                    _ => return Err(SetError::Value("degree must be 1 or 2".into())),
                }
            }
            "space.basis" => {
                self.basis = match v {
                    "lagrange" => BasisKind::Lagrange,
                    "bezier" => BasisKind::Bezier,
                    _ => return Err(SetError::Value("expected `lagrange` or `bezier`".into())),
                }
            }
            "scheme.base" => s.base = named(v)?,
            "scheme.theta_jump" => s.theta_jump = number(v)?,
            "scheme.theta_stream" => s.theta_stream = number(v)?,
            "scheme.supg_theta" => s.supg_theta = number(v)?,
            "scheme.entropy_correction" => s.entropy_correction = switch(v)?,
            "scheme.filter" => s.entropy_filter = named(v)?,
            "scheme.filter_theta" => s.filter_theta = number(v)?,
            "scheme.epsilon" => s.epsilon = number(v)?,
            "scheme.entropy_flux" => s.entropy_flux = named(v)?,
            "scheme.boundary_flux" => {
                s.boundary_flux = if v == "default" { None } else { Some(named(v)?) };
            }
            "scheme.reduced_filter_quadrature" => s.reduced_filter_quadrature = switch(v)?,
            "march.cfl" => m.cfl = number(v)?,
            "march.t_end" => m.t_end = number(v)?,
            "march.steady_tol" => m.steady_tol = number(v)?,
            "march.max_iters" => m.max_iters = positive(v)?,
            "march.anderson" => m.anderson = v.parse().map_err(|_| SetError::Value("expected an integer".into()))?,
            _ => return Err(SetError::Key),
        }
        Ok(())
    }
}

enum SetError {
    Key,
    Value(String),
}

fn number(v: &str) -> Result<f64, SetError> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| SetError::Value(format!("`{v}` is not a finite number")))
}

fn positive(v: &str) -> Result<usize, SetError> {
    v.parse::<usize>()
        .ok()
        .filter(|&x| x > 0)
        .ok_or_else(|| SetError::Value(format!("`{v}` is not a positive integer")))
}

fn switch(v: &str) -> Result<bool, SetError> {
    match v {
        "on" | "true" | "1" | "yes" => Ok(true),
        "off" | "false" | "0" | "no" => Ok(false),
        _ => Err(SetError::Value(format!("`{v}` is not on/off"))),
    }
}

fn named<T: FromStr<Err = rdes::Error>>(v: &str) -> Result<T, SetError> {
    v.parse::<T>().map_err(|e| match e {
        rdes::Error::InvalidArgument(msg) => SetError::Value(msg),
        other => SetError::Value(other.to_string()),
    })
}

/// Writes every key, so the output parses back to the same config.
impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.scheme;
        let m = &self.march;
        let on = |b: bool| if b { "on" } else { "off" };
        let mut out = String::new();
        let _ = writeln!(out, "problem.name = {}", self.problem);
        let _ = writeln!(out, "mesh.nx = {}", self.nx);
        let _ = writeln!(out, "mesh.ny = {}", self.ny);
        let diag = match self.diagonal {
            Diagonal::Alternating => "alternating",
            Diagonal::Fixed => "fixed",
        };
        let _ = writeln!(out, "mesh.diagonal = {diag}");
        let sizes: Vec<String> = self.sizes.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(out, "mesh.sizes = {}", sizes.join(", "));
        let _ = writeln!(out, "space.degree = {}", self.degree);
        let basis = match self.basis {
            BasisKind::Lagrange => "lagrange",
            BasisKind::Bezier => "bezier",
        };
        let _ = writeln!(out, "space.basis = {basis}");
        let _ = writeln!(out, "scheme.base = {}", s.base);
        let _ = writeln!(out, "scheme.theta_jump = {:?}", s.theta_jump);
        let _ = writeln!(out, "scheme.theta_stream = {:?}", s.theta_stream);
        let _ = writeln!(out, "scheme.supg_theta = {:?}", s.supg_theta);
        let _ = writeln!(out, "scheme.entropy_correction = {}", on(s.entropy_correction));
        let _ = writeln!(out, "scheme.filter = {}", s.entropy_filter);
        let _ = writeln!(out, "scheme.filter_theta = {:?}", s.filter_theta);
        let _ = writeln!(out, "scheme.epsilon = {:?}", s.epsilon);
        let _ = writeln!(out, "scheme.entropy_flux = {}", s.entropy_flux);
        match s.boundary_flux {
            Some(b) => writeln!(out, "scheme.boundary_flux = {b}"),
            None => writeln!(out, "scheme.boundary_flux = default"),
        }?;
        let _ = writeln!(out, "scheme.reduced_filter_quadrature = {}", on(s.reduced_filter_quadrature));
        let _ = writeln!(out, "march.cfl = {:?}", m.cfl);
        let _ = writeln!(out, "march.t_end = {:?}", m.t_end);
        let _ = writeln!(out, "march.steady_tol = {:?}", m.steady_tol);
        let _ = writeln!(out, "march.max_iters = {}", m.max_iters);
        let _ = writeln!(out, "march.anderson = {}", m.anderson);
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rdes::residuals::EntropyFilter;

    #[test]
    fn parses_namespaced_keys() {
        let cfg = RunConfig::parse(
            "# comment\n\nproblem.name = sinh_steady\nscheme.base=galerkin\n  scheme.filter = jump\nscheme.filter_theta = 0.01\nmesh.sizes = 10, 20,40\nmarch.cfl = 1\n",
        )
        .unwrap();
        assert_eq!(cfg.problem, "sinh_steady");
        assert_eq!(cfg.scheme.entropy_filter, EntropyFilter::Jump);
        assert_eq!(cfg.scheme.filter_theta, 0.01);
        assert_eq!(cfg.sizes, vec![10, 20, 40]);
        assert_eq!(cfg.march.cfl, 1.0);
    }

    #[test]
    fn errors_carry_line_and_column() {
        let err = RunConfig::parse("mesh.nx = 4\nscheme.base =  nonsense\n").unwrap_err();
        match err {
            CliError::Config { line, column, message } => {
                assert_eq!((line, column), (2, 16));
                assert!(message.contains("nonsense"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        match RunConfig::parse("\n   bogus.key = 1").unwrap_err() {
            CliError::Config { line, column, .. } => assert_eq!((line, column), (2, 4)),
            other => panic!("{other:?}"),
        }
        match RunConfig::parse("mesh.nx 4").unwrap_err() {
            CliError::Config { line, column, .. } => assert_eq!((line, column), (1, 10)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn display_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.scheme.theta_jump = 0.1 + 0.2;
        cfg.scheme.boundary_flux = Some(rdes::problems::BoundaryFluxKind::Upwind);
        cfg.march.t_end = 1.0 / 3.0;
        cfg.basis = BasisKind::Bezier;
        let again = RunConfig::parse(&cfg.to_string()).unwrap();
        assert_eq!(again, cfg);
    }
}
