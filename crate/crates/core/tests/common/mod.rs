#![allow(dead_code)]

use fluxdec_core::models::{fixtures, Model};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Cosh-type fixtures with an exact quasipotential.
pub fn cosh_fixtures() -> Vec<(&'static str, Model)> {
    vec![
        ("two-state-ipfg", fixtures::two_state_ipfg()),
        ("three-cycle-ipfg", fixtures::three_cycle_ipfg()),
        ("reversible-ipfg", fixtures::reversible_three_state_ipfg()),
        ("three-cycle-zero-range", fixtures::three_cycle_zero_range()),
        ("mixed-zero-range", fixtures::mixed_zero_range()),
        ("unary-cycle-crn", fixtures::unary_cycle_crn()),
        ("complex-cycle-crn", fixtures::complex_cycle_crn()),
        ("dimerisation-crn", fixtures::dimerisation_crn()),
    ]
}

/// All fixtures, including lattice gases.
pub fn all_fixtures() -> Vec<(&'static str, Model)> {
    let mut v = cosh_fixtures();
    v.push(("driven-lattice-gas", fixtures::driven_lattice_gas(16)));
    v.push(("confined-exclusion-gas", fixtures::confined_exclusion_gas(16)));
    v
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
