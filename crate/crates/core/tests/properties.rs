mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use rdes::basis::BasisKind;
use rdes::fvrecover::{fv_as_rd, recover_p1};
use rdes::mesh::Continuity;
use rdes::par::Execution;
use rdes::problems::{llf, sinh_steady, sqrt_advect, ConservationLaw, SinhLaw, SqrtLaw};
use rdes::residuals::{BaseScheme, EntropyFilter, SchemeConfig};
use rdes::solver::{march, Assembler, MarchConfig};
use rdes::space::Space;

use common::{continuity_for, perturbed_mesh, random_config, random_space, random_state, BASES};

fn setup(seed: u64) -> (StdRng, BaseScheme) {
    let mut rng = StdRng::seed_from_u64(seed);
    let base = BASES[rng.gen_range(0..BASES.len())];
    (rng, base)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn global_residual_equals_boundary_flux(seed in any::<u64>()) {
        let (mut rng, base) = setup(seed);
        let p = sinh_steady();
        let degree = rng.gen_range(1..=2);
        let space = random_space(&mut rng, degree, continuity_for(base));
        let u = random_state(&mut rng, &space, 0.2);
        let asm = Assembler::new(&space, &p, random_config(&mut rng, base)).unwrap();
        let a = asm.assemble(&u).unwrap();
        let total: f64 = a.residual.iter().sum();
        let scale: f64 = a.residual.iter().map(|x| x.abs()).sum::<f64>() + a.boundary_flux().abs();
        prop_assert!((total - a.boundary_flux()).abs() <= 1e-13 * (1.0 + scale),
            "{base}: {total} vs {}", a.boundary_flux());
    }

    #[test]
    fn corrected_elements_close_the_entropy_balance(seed in any::<u64>()) {
        let (mut rng, base) = setup(seed);
        let p = sinh_steady();
        let degree = rng.gen_range(1..=2);
        let space = random_space(&mut rng, degree, continuity_for(base));
        let u = random_state(&mut rng, &space, 0.2);
        let cfg = SchemeConfig { entropy_correction: true, ..random_config(&mut rng, base) };
        let asm = Assembler::new(&space, &p, cfg).unwrap();
        for o in asm.element_outputs(&u).unwrap() {
            let n = o.base.n;
            let filter_sum: f64 = o.filter[..n].iter().sum();
            let filter_scale: f64 = o.filter[..n].iter().map(|x| x.abs()).sum();
            prop_assert!(filter_sum.abs() <= 1e-13 * (1.0 + filter_scale));
            let r_sum: f64 = o.correction.r[..n].iter().sum();
            prop_assert!(r_sum.abs() <= 1e-13 * (1.0 + o.correction.alpha.abs()));
            let lhs = o.entropy_residual() - o.production;
            let scale: f64 = o.v[..n].iter().zip(o.values()).map(|(v, x)| (v * x).abs()).sum::<f64>()
                + o.entropy_flux_integral.abs() + o.production.abs();
            prop_assert!((lhs - o.entropy_flux_integral).abs() <= 1e-12 * (1.0 + scale));
        }
    }

    #[test]
    fn streamline_filter_produces_entropy(seed in any::<u64>()) {
        let (mut rng, _) = setup(seed);
        let p = sinh_steady();
        let degree = rng.gen_range(1..=2);
        let space = random_space(&mut rng, degree, Continuity::Continuous);
        let u = random_state(&mut rng, &space, 0.3);
        let cfg = SchemeConfig {
            entropy_filter: EntropyFilter::Streamline,
            filter_theta: rng.gen_range(0.0..1.0),
            ..SchemeConfig::default()
        };
        let asm = Assembler::new(&space, &p, cfg).unwrap();
        for o in asm.element_outputs(&u).unwrap() {
            prop_assert!(o.production >= -1e-14);
        }
    }

    #[test]
    fn parallel_and_sequential_agree_bitwise(seed in any::<u64>()) {
        let (mut rng, base) = setup(seed);
        let p = sinh_steady();
        let degree = rng.gen_range(1..=2);
        let space = random_space(&mut rng, degree, continuity_for(base));
        let u = random_state(&mut rng, &space, 0.2);
        let cfg = random_config(&mut rng, base);
        let seq = Assembler::new(&space, &p, cfg).unwrap().with_execution(Execution::Sequential);
        let par = Assembler::new(&space, &p, cfg).unwrap().with_execution(Execution::Parallel);
        let (a, b) = (seq.assemble(&u).unwrap(), par.assemble(&u).unwrap());
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&a.residual), bits(&b.residual));
    }

    #[test]
    fn llf_is_consistent_and_conservative(ul in -2.0f64..2.0, ur in -2.0f64..2.0, angle in 0.0f64..6.3) {
        let n = [angle.cos(), angle.sin()];
        let m = [-n[0], -n[1]];
        let law = SinhLaw;
        let f = |u: f64| { let g = law.flux(u); g[0] * n[0] + g[1] * n[1] };
        prop_assert!((llf(&law, ul, ul, n).unwrap() - f(ul)).abs() <= 1e-14 * (1.0 + f(ul).abs()));
        let ab = llf(&law, ul, ur, n).unwrap();
        let ba = llf(&law, ur, ul, m).unwrap();
        prop_assert!((ab + ba).abs() <= 1e-13 * (1.0 + ab.abs()));
    }

    #[test]
    fn fv_residuals_are_conservative_and_recoverable(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.gen_range(2..=4);
        let mesh = perturbed_mesh(&mut rng, n, 0.25);
        let space = Space::new(mesh, 1, Continuity::Continuous, BasisKind::Lagrange).unwrap();
        let u = random_state(&mut rng, &space, 0.3);
        let law = SinhLaw;
        let flux = |a: f64, b: f64, nu: [f64; 2]| {
            let len = (nu[0] * nu[0] + nu[1] * nu[1]).sqrt();
            Ok(len * llf(&law, a, b, [nu[0] / len, nu[1] / len])?)
        };
        for e in 0..space.n_elements() {
            let r = fv_as_rd(&space, &law, e, &u, &flux).unwrap();
            let scale: f64 = r.values().iter().map(|x| x.abs()).sum::<f64>() + r.flux_integral.abs();
            prop_assert!(r.conservation_defect() <= 1e-13 * (1.0 + scale));
            // Psi = Phi - Phi_mean sums to zero and is recovered by edge fluxes.
            let mean = r.total() / 3.0;
            let psi = [r.phi[0] - mean, r.phi[1] - mean, r.phi[2] - mean];
            let g = recover_p1(psi).unwrap();
            prop_assert!(g.defect(&psi) <= 1e-14 * (1.0 + scale));
        }
    }
}

#[test]
fn rusanov_dissipation_is_absorbed_by_the_correction() {
    // With U = u^2 / 2 we have V = u, so the Rusanov term alpha (u - mean u)
    // lies in the span of the correction and is removed exactly.
    let mut rng = StdRng::seed_from_u64(11);
    let p = sqrt_advect();
    for degree in 1..=2 {
        let space = random_space(&mut rng, degree, Continuity::Continuous);
        let u: Vec<f64> = random_state(&mut rng, &space, 0.2).iter().map(|x| 2.0 + x).collect();
        let mk = |base| SchemeConfig {
            base,
            entropy_correction: true,
            ..SchemeConfig::default()
        };
        let gal = Assembler::new(&space, &p, mk(BaseScheme::Galerkin)).unwrap().element_outputs(&u).unwrap();
        let rus = Assembler::new(&space, &p, mk(BaseScheme::Rusanov)).unwrap().element_outputs(&u).unwrap();
        for (a, b) in gal.iter().zip(&rus) {
            let scale = a.values().iter().map(|x| x.abs()).fold(0.0, f64::max) + b.correction.alpha.abs();
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() <= 1e-12 * (1.0 + scale), "{x} {y}");
            }
        }
    }
    assert!(SqrtLaw.entropy_var(1.7) == 1.7);
}

#[test]
fn constant_state_has_zero_residual_in_every_scheme() {
    let p = sinh_steady();
    let mut rng = StdRng::seed_from_u64(5);
    for base in BASES {
        for degree in 1..=2 {
            let space = random_space(&mut rng, degree, continuity_for(base));
            let u = vec![0.3; space.n_dofs()];
            let cfg = SchemeConfig {
                entropy_correction: true,
                ..random_config(&mut rng, base)
            };
            let asm = Assembler::new(&space, &p, cfg).unwrap();
            for o in asm.element_outputs(&u).unwrap() {
                assert!(o.values().iter().all(|x| x.abs() < 1e-13), "{base} P{degree}: {:?}", o.values());
            }
        }
    }
}

#[test]
fn dual_volumes_tile_perturbed_meshes() {
    let mut rng = StdRng::seed_from_u64(3);
    for degree in 1..=2 {
        for continuity in [Continuity::Continuous, Continuity::Discontinuous] {
            let space = Space::new(perturbed_mesh(&mut rng, 5, 0.3), degree, continuity, BasisKind::Lagrange).unwrap();
            let c = space.dual_volumes();
            assert!(c.iter().all(|&v| v > 0.0));
            assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn unsteady_march_conserves_mass_and_reruns_identically() {
    let p = sqrt_advect();
    let mesh = rdes::mesh::build_rect_mesh(p.domain, 20, 20, rdes::mesh::Diagonal::Alternating).unwrap();
    let space = Space::new(mesh, 1, Continuity::Continuous, BasisKind::Lagrange).unwrap();
    let cfg = SchemeConfig {
        base: BaseScheme::LimitedRd,
        entropy_correction: false,
        ..SchemeConfig::default()
    };
    let mc = MarchConfig {
        t_end: 3.0,
        ..MarchConfig::default()
    };
    let run = |exec| {
        let asm = Assembler::new(&space, &p, cfg).unwrap().with_execution(exec);
        march(&asm, space.interpolate(|x| (p.initial)(x)), &mc).unwrap()
    };
    let a = run(Execution::Sequential);
    let b = run(Execution::Sequential);
    let c = run(Execution::Parallel);
    for h in &a.history[..a.history.len() - 1] {
        assert!(h.interior_mass_drift.abs() <= 1e-12 * h.mass.abs(), "{h:?}");
    }
    let bits = |r: &rdes::solver::MarchResult| {
        r.history
            .iter()
            .flat_map(|h| [h.t, h.dt, h.mass, h.entropy_residual_sum, h.res_inf, h.interior_mass_drift])
            .chain(r.state.iter().copied())
            .map(f64::to_bits)
            .collect::<Vec<_>>()
    };
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(bits(&a), bits(&c));
    // Limited RD is positive: the bump stays inside its initial range.
    let (lo, hi) = (1.0, 1.0 + 2f64.sqrt());
    assert!(a.state.iter().all(|&x| x >= lo - 1e-12 && x <= hi + 1e-12));
}
