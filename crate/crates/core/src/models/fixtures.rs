//! Reference models used by the tests, the acceptance suite and `fluxdec fixtures`.

use rand::Rng;

use crate::graph::MassConstraint;
use crate::models::{Crn, Eta, Generator, Ipfg, LatticeGas, Mobility, Model, Reaction, ZeroRange};

/// Two states, `Q_12 = 1`, `Q_21 = 2`, so `pi = (2/3, 1/3)`.
pub fn two_state_ipfg() -> Model {
    Model::Ipfg(Ipfg::from_rows(&[vec![-1.0, 1.0], vec![2.0, -2.0]]).expect("valid fixture"))
}

/// Three-cycle generator with rate 2 along `1 -> 2 -> 3 -> 1` and 1 against it.
pub fn three_cycle_generator() -> Generator {
    Generator::from_rows(&[
        vec![-3.0, 2.0, 1.0],
        vec![1.0, -3.0, 2.0],
        vec![2.0, 1.0, -3.0],
    ])
    .expect("valid fixture")
}

/// Driven three-cycle with uniform invariant measure.
pub fn three_cycle_ipfg() -> Model {
    Model::Ipfg(Ipfg::new(three_cycle_generator()).expect("valid fixture"))
}

/// Reversible three-state chain with non-uniform invariant measure.
pub fn reversible_three_state_ipfg() -> Model {
    Model::Ipfg(
        Ipfg::from_rows(&[
            vec![-1.5, 1.0, 0.5],
            vec![0.5, -1.5, 1.0],
            vec![0.25, 1.0, -1.25],
        ])
        .expect("valid fixture"),
    )
}

/// Three-cycle zero-range process with `eta(z) = sqrt(z)`.
pub fn three_cycle_zero_range() -> Model {
    let g = three_cycle_generator();
    let pi = g.stationary_measure().expect("irreducible");
    let eta = vec![Eta::Power { coef: 1.0, exponent: 0.5 }; 3];
    Model::ZeroRange(ZeroRange::new(g, pi, eta).expect("valid fixture"))
}

/// Zero-range process on four sites with mixed rate functions.
pub fn mixed_zero_range() -> Model {
    let g = Generator::from_rows(&[
        vec![-3.0, 1.0, 0.5, 1.5],
        vec![2.0, -3.5, 1.0, 0.5],
        vec![0.5, 0.5, -2.0, 1.0],
        vec![1.0, 2.0, 0.5, -3.5],
    ])
    .expect("valid fixture");
    let eta = vec![
        Eta::Power { coef: 2.0, exponent: 0.5 },
        Eta::Power { coef: 1.0, exponent: 1.5 },
        Eta::AffineCapped { slope: 1.5, knee: 0.8, tail_slope: 0.3 },
        Eta::Table { z: vec![0.0, 0.4, 1.0, 3.0], values: vec![0.0, 0.5, 0.9, 1.6] },
    ];
    Model::ZeroRange(ZeroRange::normalized(g, eta).expect("valid fixture"))
}

fn reaction(reactant: &[u32], product: &[u32], f: f64, b: f64) -> Reaction {
    Reaction {
        reactant: reactant.to_vec(),
        product: product.to_vec(),
        forward_rate: f,
        backward_rate: b,
    }
}

/// Unary network `A <-> B <-> C <-> A` with the rates of [`three_cycle_ipfg`].
pub fn unary_cycle_crn() -> Model {
    Model::Crn(
        Crn::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec![
                reaction(&[1, 0, 0], &[0, 1, 0], 2.0, 1.0),
                reaction(&[1, 0, 0], &[0, 0, 1], 1.0, 2.0),
                reaction(&[0, 1, 0], &[0, 0, 1], 2.0, 1.0),
            ],
            vec![1.0 / 3.0; 3],
        )
        .expect("valid fixture"),
    )
}

/// Complex-balanced, not detailed-balanced cycle `2A -> B -> A + C -> 2A`.
pub fn complex_cycle_crn() -> Model {
    Model::Crn(
        Crn::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec![
                reaction(&[2, 0, 0], &[0, 1, 0], 2.0, 0.5),
                reaction(&[0, 1, 0], &[1, 0, 1], 1.0, 2.0),
                reaction(&[1, 0, 1], &[2, 0, 0], 4.0, 1.0),
            ],
            vec![1.0, 2.0, 0.5],
        )
        .expect("valid fixture"),
    )
}

/// Detailed-balanced dimerisation `2A <-> B`.
pub fn dimerisation_crn() -> Model {
    Model::Crn(
        Crn::new(
            vec!["A".into(), "B".into()],
            vec![reaction(&[2, 0], &[0, 1], 1.0, 2.0)],
            vec![1.0, 0.5],
        )
        .expect("valid fixture"),
    )
}

/// Independent particles on `m` cells with unit drift and no potential.
pub fn driven_lattice_gas(m: usize) -> Model {
    Model::LatticeGas(
        LatticeGas::new(Mobility::Independent, vec![0.0; m], vec![1.0; m], 1.0)
            .expect("valid fixture"),
    )
}

/// Exclusion process on `m` cells in the potential `0.5 sin(2 pi x)`, no drift.
pub fn confined_exclusion_gas(m: usize) -> Model {
    let u = (0..m)
        .map(|i| 0.5 * (2.0 * std::f64::consts::PI * (i as f64 + 0.5) / m as f64).sin())
        .collect();
    Model::LatticeGas(
        LatticeGas::new(Mobility::Exclusion, u, vec![0.0; m], 0.4).expect("valid fixture"),
    )
}

/// The five fixtures shipped with the command-line tool.
pub fn bundled() -> Vec<(&'static str, Model)> {
    vec![
        ("two-state-ipfg", two_state_ipfg()),
        ("three-cycle-ipfg", three_cycle_ipfg()),
        ("three-cycle-zero-range", three_cycle_zero_range()),
        ("unary-cycle-crn", unary_cycle_crn()),
        ("lattice-gas-32", driven_lattice_gas(32)),
    ]
}

/// A random state comfortably inside the domain of `model`.
pub fn random_interior_state<R: Rng + ?Sized>(model: &Model, rng: &mut R) -> Vec<f64> {
    let n = model.state_dim();
    match (model, model.mass_constraint()) {
        (Model::LatticeGas(g), _) => {
            let upper = match g.mobility() {
                Mobility::Independent => f64::INFINITY,
                Mobility::Exclusion => 0.98,
            };
            g.pi()
                .iter()
                .map(|&p| (p * rng.gen_range(0.6..1.4)).clamp(0.02, upper))
                .collect()
        }
        (_, MassConstraint::Probability) => {
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = w.iter().sum();
            w.iter().map(|v| v / s).collect()
        }
        (m, MassConstraint::Free) => {
            let eq = m.equilibrium().map(|e| e.to_vec()).unwrap_or_else(|| vec![1.0; n]);
            eq.iter().map(|&p| p * rng.gen_range(-1.0f64..1.0).exp()).collect()
        }
    }
}

/// A random flux of moderate size.
pub fn random_flux<R: Rng + ?Sized>(model: &Model, rng: &mut R) -> Vec<f64> {
    (0..model.flux_dim()).map(|_| rng.gen_range(-1.5..1.5)).collect()
}
