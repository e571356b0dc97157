mod common;

use common::{cosh_fixtures, max_abs, rng};
use fluxdec_core::flows::hamiltonian::{
    antisymmetric_field, energy, energy_gradient, find_jacobi_violation, jacobi_residual_fd,
    jacobi_residual_omega, omega_flow, omega_period, poisson_omega, poisson_rho, skew_matrix,
    skewness, threshold_sigma,
};
use fluxdec_core::flows::phase::{barycentric_grid, phase_portrait};
use fluxdec_core::flows::{
    detect_period, edi_residual, flow_velocity, integrate_flow, FlowKind, IntegrateOptions, TiltField,
};
use fluxdec_core::graph::MassConstraint;
use fluxdec_core::models::{fixtures, Model};
use fluxdec_core::numeric::golden_max;
use fluxdec_core::Error;
use nalgebra::DVector;
use rand::Rng;

fn ipfg(model: &Model) -> &fluxdec_core::models::Ipfg {
    match model {
        Model::Ipfg(m) => m,
        _ => unreachable!(),
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn full_flow_is_stationary_at_equilibrium() {
    for (name, m) in cosh_fixtures() {
        let pi = m.equilibrium().unwrap().to_vec();
        let tr = integrate_flow(&m, &FlowKind::Full, &pi, 5.0, &IntegrateOptions::default()).unwrap();
        // Drift is bounded by the absolute tolerance of the integrator.
        assert!(dist(tr.final_state(), &pi) < 1e-8, "{name}");
    }
}

#[test]
fn two_state_full_flow_matches_exponential_solution() {
    let m = fixtures::two_state_ipfg();
    let opts = IntegrateOptions {
        output_dt: Some(0.5),
        ..Default::default()
    };
    let tr = integrate_flow(&m, &FlowKind::Full, &[1.0, 0.0], 2.0, &opts).unwrap();
    for (t, rho) in tr.times.iter().zip(&tr.states) {
        let exact = 2.0 / 3.0 + (-3.0 * t).exp() / 3.0;
        assert!((rho[0] - exact).abs() < 1e-8, "t = {t}");
    }
    assert!((tr.final_time() - 2.0).abs() < 1e-15);
    assert!((tr.final_state()[0] - 0.667_492_9).abs() < 1e-7);
}

#[test]
fn mass_is_conserved_along_every_flow() {
    let mut r = rng(11);
    let kinds = [
        FlowKind::Full,
        FlowKind::Symmetric,
        FlowKind::Antisymmetric,
        FlowKind::Tilted { field: TiltField::Symmetric, lambda: 0.3 },
    ];
    for (name, m) in cosh_fixtures() {
        if m.mass_constraint() != MassConstraint::Probability {
            continue;
        }
        let rho0 = fixtures::random_interior_state(&m, &mut r);
        for kind in &kinds {
            let tr = integrate_flow(&m, kind, &rho0, 3.0, &IntegrateOptions::default()).unwrap();
            for rho in &tr.states {
                let s: f64 = rho.iter().sum();
                assert!((s - 1.0).abs() < 1e-10, "{name} {}", kind.name());
            }
        }
    }
}

#[test]
fn quasipotential_decreases_along_full_and_symmetric_flows() {
    let mut r = rng(12);
    let mut models = cosh_fixtures();
    models.push(("confined-exclusion-gas", fixtures::confined_exclusion_gas(12)));
    for (name, m) in models {
        for _ in 0..3 {
            let rho0 = fixtures::random_interior_state(&m, &mut r);
            for kind in [FlowKind::Full, FlowKind::Symmetric] {
                let opts = IntegrateOptions {
                    output_dt: Some(0.05),
                    ..Default::default()
                };
                let tr = integrate_flow(&m, &kind, &rho0, 2.0, &opts).unwrap();
                let v: Vec<f64> = tr.quasipotential.iter().map(|v| v.unwrap()).collect();
                for w in v.windows(2) {
                    assert!(w[1] <= w[0] + 1e-9, "{name} {}: {} -> {}", kind.name(), w[0], w[1]);
                }
            }
        }
    }
}

#[test]
fn energy_and_threshold_reference_values() {
    let m = fixtures::three_cycle_ipfg();
    let sigma = threshold_sigma(&m).unwrap();
    assert!((sigma - (1.0 - (2.0_f64 / 3.0).sqrt())).abs() < 1e-15);
    assert!((sigma - 0.183503).abs() < 1e-6);
    assert!(energy(&m, &[1.0 / 3.0; 3]).unwrap().abs() < 1e-15);
    let e = energy(&m, &[1.0, 0.0, 0.0]).unwrap();
    assert!((e - 0.422650).abs() < 1e-6 && e > sigma);
}

#[test]
fn zero_range_threshold_matches_face_minimisation() {
    for m in [fixtures::three_cycle_zero_range()] {
        let sigma = threshold_sigma(&m).unwrap();
        let mut best = f64::INFINITY;
        for x in 0..3 {
            let (y, z) = ((x + 1) % 3, (x + 2) % 3);
            let e = |t: f64| {
                let mut rho = [0.0; 3];
                rho[y] = t;
                rho[z] = 1.0 - t;
                energy(&m, &rho).unwrap()
            };
            let (_, neg) = golden_max(|t| -e(t), 0.0, 1.0, 1e-12);
            best = best.min(-neg);
        }
        assert!((sigma - best).abs() < 1e-9, "{sigma} vs {best}");
        assert!(sigma > 0.0);
    }
}

#[test]
fn skew_matrix_annihilates_root_measure() {
    for m in [fixtures::three_cycle_ipfg(), fixtures::reversible_three_state_ipfg()] {
        let p = ipfg(&m);
        let a = skew_matrix(p.generator(), p.pi());
        assert!((&a + a.transpose()).amax() <= 1e-14);
        let ws = DVector::from_iterator(3, p.pi().iter().map(|v| v.sqrt()));
        assert!((&a * &ws).amax() <= 1e-13);
        assert!((a.transpose() * &ws).amax() <= 1e-13);
    }
}

#[test]
fn subcritical_antisymmetric_orbit_is_periodic_and_conserves_energy() {
    let m = fixtures::three_cycle_ipfg();
    let sigma = threshold_sigma(&m).unwrap();
    let rho0 = [0.5, 0.3, 0.2];
    let e0 = energy(&m, &rho0).unwrap();
    assert!(e0 < sigma);
    let opts = IntegrateOptions::default();
    let rep = detect_period(&m, &FlowKind::Antisymmetric, &rho0, 50.0, &opts).unwrap().unwrap();
    assert!(rep.return_distance < 1e-5, "{rep:?}");
    let exact = omega_period(ipfg(&m)).unwrap();
    assert!((rep.period - exact).abs() < 1e-6, "{} vs {exact}", rep.period);
    let tr = integrate_flow(&m, &FlowKind::Antisymmetric, &rho0, 10.0 * rep.period, &opts).unwrap();
    assert!(!tr.boundary_hit);
    for e in &tr.energy {
        assert!((e.unwrap() - e0).abs() <= 1e-6 * e0.max(1.0));
    }
}

#[test]
fn supercritical_antisymmetric_orbit_hits_boundary() {
    let m = fixtures::three_cycle_ipfg();
    let rho0 = [0.9, 0.09, 0.01];
    assert!(energy(&m, &rho0).unwrap() > threshold_sigma(&m).unwrap());
    let tr = integrate_flow(&m, &FlowKind::Antisymmetric, &rho0, 20.0, &IntegrateOptions::default()).unwrap();
    assert!(tr.boundary_hit);
    assert!(tr.final_time() < 20.0);
    assert!(*tr.min_density.last().unwrap() <= 1e-12);
}

#[test]
fn zero_range_antisymmetric_flow_conserves_energy() {
    let m = fixtures::three_cycle_zero_range();
    let sigma = threshold_sigma(&m).unwrap();
    let pi = m.equilibrium().unwrap().to_vec();
    let rho0: Vec<f64> = pi.iter().zip([0.1, -0.05, -0.05]).map(|(p, d)| p + d).collect();
    let e0 = energy(&m, &rho0).unwrap();
    assert!(e0 < sigma);
    let opts = IntegrateOptions::default();
    let rep = detect_period(&m, &FlowKind::Antisymmetric, &rho0, 50.0, &opts).unwrap().unwrap();
    assert!(rep.return_distance < 1e-5);
    let tr = integrate_flow(&m, &FlowKind::Antisymmetric, &rho0, 10.0 * rep.period, &opts).unwrap();
    assert!(!tr.boundary_hit);
    for e in &tr.energy {
        assert!((e.unwrap() - e0).abs() <= 1e-6 * e0.max(1.0));
    }
}

#[test]
fn omega_flow_matches_nonlinear_flow_over_one_period() {
    let m = fixtures::three_cycle_ipfg();
    let p = ipfg(&m);
    let rho0 = [0.45, 0.35, 0.2];
    let period = omega_period(p).unwrap();
    let opts = IntegrateOptions {
        output_dt: Some(period / 40.0),
        ..Default::default()
    };
    let tr = integrate_flow(&m, &FlowKind::Antisymmetric, &rho0, period, &opts).unwrap();
    let om = omega_flow(p, &rho0, &tr.times).unwrap();
    assert!(om.boundary_time.is_none());
    for (k, rho) in tr.states.iter().enumerate() {
        assert!(dist(rho, &om.rho[k]) <= 1e-6);
        let norm: f64 = om.omega[k].iter().map(|w| w * w).sum();
        assert!((norm - 1.0).abs() <= 1e-12);
    }
    assert!(dist(om.rho.last().unwrap(), &rho0) < 1e-10);
}

#[test]
fn omega_flow_flags_boundary_for_supercritical_start() {
    let m = fixtures::three_cycle_ipfg();
    let times: Vec<f64> = (0..=200).map(|k| k as f64 * 0.05).collect();
    let om = omega_flow(ipfg(&m), &[0.9, 0.09, 0.01], &times).unwrap();
    let tb = om.boundary_time.unwrap();
    let tr = integrate_flow(&m, &FlowKind::Antisymmetric, &[0.9, 0.09, 0.01], 10.0, &IntegrateOptions::default())
        .unwrap();
    assert!((tr.final_time() - tb).abs() < 1e-3, "{} vs {tb}", tr.final_time());
}

#[test]
fn poisson_matrices_are_skew_and_generate_the_antisymmetric_field() {
    let mut r = rng(13);
    for m in [
        fixtures::three_cycle_ipfg(),
        fixtures::three_cycle_zero_range(),
        fixtures::mixed_zero_range(),
    ] {
        for _ in 0..20 {
            let rho = fixtures::random_interior_state(&m, &mut r);
            let j = poisson_rho(&m, &rho).unwrap();
            assert!(skewness(&j) <= 1e-12);
            for _ in 0..5 {
                let a = DVector::from_iterator(rho.len(), (0..rho.len()).map(|_| r.gen_range(-1.0..1.0)));
                assert!(a.dot(&(&j * &a)).abs() <= 1e-12);
            }
            let de = DVector::from_vec(energy_gradient(&m, &rho).unwrap());
            let v = &j * de;
            let field = antisymmetric_field(&m, &rho).unwrap();
            let flow = flow_velocity(&m, &FlowKind::Antisymmetric, &rho).unwrap();
            for k in 0..rho.len() {
                assert!((v[k] - field[k]).abs() <= 1e-10, "{} {:?} {:?}", m.family(), v, field);
                assert!((flow[k] - field[k]).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn omega_poisson_matrix_is_skew() {
    let m = fixtures::three_cycle_ipfg();
    let mut r = rng(14);
    for _ in 0..20 {
        let w: Vec<f64> = (0..3).map(|_| r.gen_range(0.1..1.0)).collect();
        assert!(skewness(&poisson_omega(ipfg(&m), &w).unwrap()) <= 1e-14);
    }
}

#[test]
fn ipfg_satisfies_jacobi_identity() {
    let m = fixtures::three_cycle_ipfg();
    let mut r = rng(15);
    for _ in 0..20 {
        let w: Vec<f64> = (0..3).map(|_| r.gen_range(0.1..1.0)).collect();
        let g: Vec<Vec<f64>> = (0..3).map(|_| (0..3).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
        let res = jacobi_residual_omega(ipfg(&m), &w, [&g[0], &g[1], &g[2]]).unwrap();
        assert!(res.abs() <= 1e-8, "{res}");
        let rho = fixtures::random_interior_state(&m, &mut r);
        let fd = jacobi_residual_fd(&m, &rho, [&g[0], &g[1], &g[2]], 1e-5).unwrap();
        assert!(fd.abs() <= 1e-6, "{fd}");
    }
}

#[test]
fn zero_range_jacobi_violation_is_found() {
    let m = fixtures::mixed_zero_range();
    let w = find_jacobi_violation(&m, &mut rng(16), 50, 1e-4).unwrap().expect("violation");
    let again = jacobi_residual_fd(
        &m,
        &w.rho,
        [&w.covectors[0], &w.covectors[1], &w.covectors[2]],
        1e-5,
    )
    .unwrap();
    assert_eq!(again, w.residual);
    let coarse = jacobi_residual_fd(
        &m,
        &w.rho,
        [&w.covectors[0], &w.covectors[1], &w.covectors[2]],
        1e-4,
    )
    .unwrap();
    assert!((coarse - w.residual).abs() < 1e-3 * w.residual.abs());
}

#[test]
fn edi_holds_along_symmetric_flow() {
    let mut r = rng(17);
    for (name, m) in cosh_fixtures() {
        let rho0 = fixtures::random_interior_state(&m, &mut r);
        let run = |dt: f64| {
            let opts = IntegrateOptions {
                output_dt: Some(dt),
                ..Default::default()
            };
            let tr = integrate_flow(&m, &FlowKind::Symmetric, &rho0, 1.0, &opts).unwrap();
            edi_residual(&m, &tr).unwrap()
        };
        let coarse = run(0.01);
        let fine = run(0.005);
        assert!(max_abs(&coarse.pointwise) <= 1e-8, "{name}");
        assert!(max_abs(&fine.pointwise) <= 1e-8, "{name}");
        let c = max_abs(&coarse.chain_rule);
        let f = max_abs(&fine.chain_rule);
        let order = (c / f).log2();
        if name == "mixed-zero-range" {
            // The capped rate function has a kink, which costs smoothness in V.
            assert!(order > 1.0, "{name}: {c} -> {f}");
        } else {
            assert!(c < 1e-9 || (1.7..2.3).contains(&order), "{name}: {c} -> {f}");
        }
    }
}

#[test]
fn edi_vanishes_at_equilibrium() {
    for (name, m) in cosh_fixtures() {
        let pi = m.equilibrium().unwrap().to_vec();
        let opts = IntegrateOptions {
            output_dt: Some(0.1),
            ..Default::default()
        };
        let tr = integrate_flow(&m, &FlowKind::Symmetric, &pi, 0.5, &opts).unwrap();
        let rep = edi_residual(&m, &tr).unwrap();
        assert!(max_abs(&rep.pointwise) < 1e-12, "{name}");
        assert!(max_abs(&rep.chain_rule) < 1e-12, "{name}");
    }
}

#[test]
fn tilted_flows_spiral_in_below_half_and_out_above() {
    let m = fixtures::three_cycle_ipfg();
    let pi = [1.0 / 3.0; 3];
    let rho0 = [0.335, 0.3325, 0.3325];
    let period = omega_period(ipfg(&m)).unwrap();
    let d2 = |r: &[f64]| r.iter().zip(&pi).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    // Net change of |rho - pi|^2 over one rotation.
    let spread = |lambda: f64| {
        let kind = FlowKind::Tilted { field: TiltField::Symmetric, lambda };
        let tr = integrate_flow(&m, &kind, &rho0, period, &IntegrateOptions::default()).unwrap();
        assert!(!tr.boundary_hit);
        (d2(&rho0), d2(tr.final_state()))
    };
    for lambda in [0.1, 0.3, 0.45] {
        let (a, b) = spread(lambda);
        assert!(b < a, "{lambda}");
    }
    for lambda in [0.52, 0.55] {
        let (a, b) = spread(lambda);
        assert!(b > a, "{lambda}");
    }
    let (a, b) = spread(0.5);
    assert!((b - a).abs() < 1e-4 * a);
}

#[test]
fn tilted_flow_rejects_lambda_outside_unit_interval() {
    let m = fixtures::three_cycle_ipfg();
    let kind = FlowKind::Tilted { field: TiltField::Force, lambda: 1.5 };
    assert!(matches!(flow_velocity(&m, &kind, &[0.3, 0.3, 0.4]), Err(Error::Domain(_))));
}

#[test]
fn interior_kinds_reject_boundary_start() {
    let m = fixtures::three_cycle_ipfg();
    let r = integrate_flow(&m, &FlowKind::Symmetric, &[1.0, 0.0, 0.0], 1.0, &IntegrateOptions::default());
    assert!(r.is_err());
    assert!(integrate_flow(&m, &FlowKind::Full, &[1.0, 0.0, 0.0], 1.0, &IntegrateOptions::default()).is_ok());
}

#[test]
fn phase_portrait_covers_the_grid() {
    let m = fixtures::three_cycle_ipfg();
    assert_eq!(barycentric_grid(6).len(), 10);
    let p = phase_portrait(&m, &FlowKind::Full, 6, 5.0, &IntegrateOptions::default()).unwrap();
    assert_eq!(p.arcs.len(), 10);
    assert_eq!(p.field.len(), 10);
    let asym = phase_portrait(&m, &FlowKind::Antisymmetric, 6, 10.0, &IntegrateOptions::default()).unwrap();
    for arc in &asym.arcs {
        let e = energy(&m, &arc.start).unwrap();
        let orbit = e > 1e-12 && e < threshold_sigma(&m).unwrap();
        assert_eq!(orbit, arc.period.is_some(), "{:?}", arc.start);
    }
}
