#![allow(dead_code)]

use rand::Rng;
use rdes::basis::BasisKind;
use rdes::geometry::Vec2;
use rdes::mesh::{build_rect_mesh, Continuity, Diagonal, Mesh, Rect};
use rdes::residuals::{BaseScheme, EntropyFilter, SchemeConfig};
use rdes::space::Space;

/// Split-square mesh of the unit square with interior vertices moved by up
/// to `amp` times the cell size.
pub fn perturbed_mesh<R: Rng>(rng: &mut R, n: usize, amp: f64) -> Mesh {
    let base = build_rect_mesh(Rect::unit(), n, n, Diagonal::Alternating).unwrap();
    let h = 1.0 / n as f64;
    let vertices: Vec<Vec2> = base
        .vertices
        .iter()
        .map(|&[x, y]| {
            let inner = |t: f64| t > 1e-12 && t < 1.0 - 1e-12;
            if inner(x) && inner(y) {
                [x + amp * h * rng.gen_range(-1.0..1.0), y + amp * h * rng.gen_range(-1.0..1.0)]
            } else {
                [x, y]
            }
        })
        .collect();
    Mesh::new(vertices, base.elements.clone()).unwrap()
}

pub fn random_space<R: Rng>(rng: &mut R, degree: usize, continuity: Continuity) -> Space {
    let n = rng.gen_range(2..=4);
    let kind = if degree == 2 && rng.gen_bool(0.3) {
        BasisKind::Bezier
    } else {
        BasisKind::Lagrange
    };
    Space::new(perturbed_mesh(rng, n, 0.25), degree, continuity, kind).unwrap()
}

/// Smooth random field plus per-DoF noise, kept inside `[-1.5, 1.5]`.
pub fn random_state<R: Rng>(rng: &mut R, space: &Space, noise: f64) -> Vec<f64> {
    let (a, b, c, d, w) = (
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.3..0.3),
        rng.gen_range(1.0..4.0),
    );
    let smooth = space.interpolate(|p| a + b * p[0] + c * p[1] + d * (w * (p[0] + 2.0 * p[1])).sin());
    smooth.into_iter().map(|x| x + noise * rng.gen_range(-1.0..1.0)).collect()
}

pub fn random_config<R: Rng>(rng: &mut R, base: BaseScheme) -> SchemeConfig {
    let dg = base == BaseScheme::Dg;
    let filter = match rng.gen_range(0..3) {
        0 => EntropyFilter::None,
        1 if !dg => EntropyFilter::Jump,
        _ => EntropyFilter::Streamline,
    };
    SchemeConfig {
        base,
        theta_jump: if dg { 0.0 } else { rng.gen_range(0.0..0.2) },
        theta_stream: rng.gen_range(0.0..0.2),
        supg_theta: rng.gen_range(0.1..1.0),
        entropy_correction: rng.gen_bool(0.5),
        entropy_filter: filter,
        filter_theta: rng.gen_range(0.0..0.2),
        reduced_filter_quadrature: rng.gen_bool(0.5),
        ..SchemeConfig::default()
    }
}

pub const BASES: [BaseScheme; 6] = [
    BaseScheme::Galerkin,
    BaseScheme::Supg,
    BaseScheme::GalerkinJump,
    BaseScheme::Dg,
    BaseScheme::Rusanov,
    BaseScheme::LimitedRd,
];

pub fn continuity_for(base: BaseScheme) -> Continuity {
    if base == BaseScheme::Dg {
        Continuity::Discontinuous
    } else {
        Continuity::Continuous
    }
}
