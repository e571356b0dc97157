//! Decomposition, Fisher information, orthogonality, contraction and
//! reversal identities.

mod common;

use common::{all_fixtures, cosh_fixtures, rng};
use fluxdec_core::decomposition::*;
use fluxdec_core::entropy::{edge_lagrangian, EdgeRates};
use fluxdec_core::models::{fixtures, forces, lagrangian, Model};
use proptest::prelude::*;

const LAMBDAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[test]
fn two_state_reference_values() {
    // a = b = 1/2 on the single edge.
    let m = Model::Ipfg(fluxdec_core::models::Ipfg::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap());
    let rho = [0.5, 0.5];
    let l = lagrangian(&m, &rho, &[0.5]).unwrap();
    assert!((l - 0.122572).abs() < 1e-6);
    let phi_star = dissipation_dual(&m, &rho, &[1.0]).unwrap();
    assert!((phi_star - (1f64.cosh() - 1.0)).abs() < 1e-15);

    let m = fixtures::two_state_ipfg();
    let f = forces(&m, &rho).unwrap().force;
    let r = fisher(&m, &rho, &f, 0.5).unwrap();
    assert!((r - (1.5 - 2.0 * 0.5f64.sqrt())).abs() < 1e-15);
}

#[test]
fn contraction_matches_two_state_closed_form() {
    let m = Model::Ipfg(fluxdec_core::models::Ipfg::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap());
    let c = contracted_lagrangian(&m, &[0.5, 0.5], &[-0.5, 0.5]).unwrap();
    let oracle = edge_lagrangian(EdgeRates::new(0.5, 0.5).unwrap(), 0.5);
    assert!((c.value - oracle).abs() < 1e-12, "{} vs {oracle}", c.value);
    assert!(matches!(
        contracted_lagrangian(&m, &[0.5, 0.5], &[0.5, 0.5]),
        Err(fluxdec_core::Error::InfeasibleVelocity(_))
    ));
}

#[test]
fn contraction_on_a_tree_is_the_lagrangian() {
    // On a tree the flux is determined by the velocity.
    let m = Model::Ipfg(
        fluxdec_core::models::Ipfg::from_rows(&[
            vec![-1.0, 1.0, 0.0],
            vec![0.5, -2.5, 2.0],
            vec![0.0, 3.0, -3.0],
        ])
        .unwrap(),
    );
    let rho = [0.2, 0.3, 0.5];
    let j = [0.4, -0.7];
    let u = m.continuity().apply(&j).unwrap();
    let c = contracted_lagrangian(&m, &rho, &u).unwrap();
    let l = lagrangian(&m, &rho, &j).unwrap();
    assert!((c.value - l).abs() < 1e-12 * (1.0 + l));
}

#[test]
fn zero_fisher_at_doubled_forces() {
    for (name, m) in cosh_fixtures() {
        let mut r = rng(11);
        for _ in 0..20 {
            let rho = fixtures::random_interior_state(&m, &mut r);
            let ft = forces(&m, &rho).unwrap();
            for g in [&ft.force, &ft.symmetric, &ft.antisymmetric] {
                let two: Vec<f64> = g.iter().map(|v| 2.0 * v).collect();
                let v = fisher(&m, &rho, &two, 0.5).unwrap();
                assert!(v.abs() <= 1e-9, "{name}: {v:e}");
            }
        }
    }
}

#[test]
fn detailed_balance_fixtures_are_self_reversed() {
    for m in [
        fixtures::two_state_ipfg(),
        fixtures::reversible_three_state_ipfg(),
        fixtures::dimerisation_crn(),
        fixtures::confined_exclusion_gas(16),
    ] {
        let mut r = rng(5);
        for _ in 0..20 {
            let rho = fixtures::random_interior_state(&m, &mut r);
            let j = fixtures::random_flux(&m, &mut r);
            let lbar = fluxdec_core::models::reversed_lagrangian(&m, &rho, &j).unwrap();
            let l = lagrangian(&m, &rho, &j).unwrap();
            assert!((lbar - l).abs() <= 1e-8 * (1.0 + l.abs()), "{}: {lbar} vs {l}", m.family());
        }
    }
}

#[test]
fn tilted_dual_matches_numerical_legendre() {
    use fluxdec_core::entropy::{numerical_legendre, LegendreGrid};
    let m = fixtures::three_cycle_zero_range();
    let rho = [0.5, 0.2, 0.3];
    let tilt = [0.3, -0.4, 0.1];
    let j = [0.2, -0.1, 0.05];
    let closed = tilted_lagrangian(&m, &rho, &tilt, &j).unwrap();
    // Separable: dualise edge by edge.
    let f = forces(&m, &rho).unwrap().force;
    let costs = m.edge_costs(&rho).unwrap();
    let mut num = 0.0;
    for e in 0..3 {
        let c = tilt[e] - f[e];
        let (v, _) = numerical_legendre(
            |z| costs[e].hamiltonian(z + c).unwrap() - costs[e].hamiltonian(c).unwrap(),
            j[e],
            LegendreGrid::default(),
        )
        .unwrap();
        num += v;
    }
    assert!((closed - num).abs() < 1e-6 * (1.0 + closed.abs()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decomposition_residuals_vanish(seed in any::<u64>()) {
        let mut r = rng(seed);
        for (name, m) in all_fixtures() {
            let rho = fixtures::random_interior_state(&m, &mut r);
            let j = fixtures::random_flux(&m, &mut r);
            for &lambda in &LAMBDAS {
                for rep in decomposition_residuals(&m, &rho, &j, lambda).unwrap() {
                    prop_assert!(
                        rep.residual.abs() <= 1e-9 * (1.0 + rep.lagrangian.abs()),
                        "{name} {:?} lambda={lambda}: {:e}", rep.splitting, rep.residual
                    );
                    // With a drift the discrete forces are only asymptotically orthogonal.
                    let exact = !matches!(&m, Model::LatticeGas(lg) if lg.has_drift());
                    if exact || rep.splitting == Splitting::Force {
                        prop_assert!(rep.fisher >= -1e-12, "{name}: fisher {:e}", rep.fisher);
                    }
                }
            }
        }
    }

    #[test]
    fn tilted_lagrangian_routes_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        for (name, m) in all_fixtures() {
            let rho = fixtures::random_interior_state(&m, &mut r);
            let j = fixtures::random_flux(&m, &mut r);
            let g = fixtures::random_flux(&m, &mut r);
            let a = tilted_lagrangian(&m, &rho, &g, &j).unwrap();
            let b = tilted_lagrangian_formula(&m, &rho, &g, &j).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{name}: {a} vs {b}");
            let zero = vec![0.0; m.flux_dim()];
            let phi = dissipation(&m, &rho, &j).unwrap();
            let l0 = tilted_lagrangian(&m, &rho, &zero, &j).unwrap();
            prop_assert!((phi - l0).abs() <= 1e-9 * (1.0 + phi), "{name}: Phi {phi} vs L_0 {l0}");
            prop_assert!(tilted_lagrangian(&m, &rho, &g, &tilted_zero_cost_flux(&m, &rho, &g).unwrap()).unwrap().abs() <= 1e-10);
        }
    }

    #[test]
    fn dissipation_dual_routes_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        for (name, m) in all_fixtures() {
            let rho = fixtures::random_interior_state(&m, &mut r);
            let z = fixtures::random_flux(&m, &mut r);
            let a = dissipation_dual(&m, &rho, &z).unwrap();
            let b = dissipation_dual_closed(&m, &rho, &z).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{name}: {a} vs {b}");
            let neg: Vec<f64> = z.iter().map(|v| -v).collect();
            prop_assert!((a - dissipation_dual(&m, &rho, &neg).unwrap()).abs() <= 1e-9 * (1.0 + a.abs()));
            let z2 = fixtures::random_flux(&m, &mut r);
            let t1 = ortho_pairing(&m, &rho, &z, &z2).unwrap();
            let t2 = ortho_pairing_closed(&m, &rho, &z, &z2).unwrap();
            prop_assert!((t1 - t2).abs() <= 1e-9 * (1.0 + t1.abs()), "{name}: {t1} vs {t2}");
        }
    }

    #[test]
    fn forces_are_orthogonal(seed in any::<u64>()) {
        let mut r = rng(seed);
        for (name, m) in all_fixtures() {
            let rho = fixtures::random_interior_state(&m, &mut r);
            let o = orthogonality(&m, &rho).unwrap();
            let scale = 1.0 + dissipation_dual(&m, &rho, &forces(&m, &rho).unwrap().force).unwrap().abs();
            for v in [o.theta_sym_asym, o.theta_asym_sym, o.split_sym, o.split_asym] {
                if let Model::LatticeGas(lg) = &m {
                    if lg.has_drift() { continue; }
                }
                prop_assert!(v.abs() <= 1e-9 * scale, "{name}: {o:?}");
            }
        }
    }

    #[test]
    fn fir_gap_is_non_negative(seed in any::<u64>()) {
        let mut r = rng(seed);
        for (name, m) in cosh_fixtures() {
            let rho = fixtures::random_interior_state(&m, &mut r);
            let j = fixtures::random_flux(&m, &mut r);
            let u = m.continuity().apply(&j).unwrap();
            let lhat = contracted_lagrangian(&m, &rho, &u).unwrap().value;
            prop_assert!(lhat <= lagrangian(&m, &rho, &j).unwrap() + 1e-10);
            for &lambda in &LAMBDAS {
                let gap = fir_gap(&m, &rho, &u, lambda).unwrap();
                prop_assert!(gap >= -1e-9, "{name} lambda={lambda}: {gap:e}");
            }
        }
    }

    #[test]
    fn reversal_identities(seed in any::<u64>()) {
        let mut r = rng(seed);
        for (name, m) in all_fixtures() {
            let rho = fixtures::random_interior_state(&m, &mut r);
            let j = fixtures::random_flux(&m, &mut r);
            let l = lagrangian(&m, &rho, &j).unwrap();
            let res = reversal_residual(&m, &rho, &j).unwrap();
            prop_assert!(res.abs() <= 1e-8 * (1.0 + l.abs()), "{name}: {res:e}");
            if !matches!(&m, Model::LatticeGas(lg) if lg.has_drift()) {
                let res = reversed_force_residual(&m, &rho, &j).unwrap();
                prop_assert!(res.abs() <= 1e-8 * (1.0 + l.abs()), "{name}: {res:e}");
            }
        }
    }
}
