//! Relative Boltzmann function, per-edge Hamiltonians and Lagrangians, and
//! the convex-dual calculus built on them.

use crate::error::{Error, Result};
use crate::numeric::{golden_max, hypot1, stable_asinh};

/// `s(a|b) = a log(a/b) - a + b`, extended by `s(0|b) = b` and `+inf` when
/// `a < 0` or when `a > 0` and `b <= 0`.
pub fn rel_boltzmann(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        return f64::NAN;
    }
    if a < 0.0 || (a > 0.0 && b <= 0.0) {
        return f64::INFINITY;
    }
    if a == 0.0 {
        return b;
    }
    a * (a / b).ln() - a + b
}

/// Convex dual of `cosh - 1`: `x asinh(x) - sqrt(1 + x^2) + 1`.
pub fn cosh_dual(x: f64) -> f64 {
    if x.is_infinite() {
        return f64::INFINITY;
    }
    x * stable_asinh(x) - x * x / (1.0 + hypot1(x))
}

/// Forward and backward jump rates of one edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRates {
    pub forward: f64,
    pub backward: f64,
}

impl EdgeRates {
    pub fn new(forward: f64, backward: f64) -> Result<Self> {
        if !(forward >= 0.0 && backward >= 0.0 && forward.is_finite() && backward.is_finite()) {
            return Err(Error::Domain(format!(
                "edge rates ({forward}, {backward}) must be finite and non-negative"
            )));
        }
        Ok(Self { forward, backward })
    }

    /// Geometric mean prefactor `2 sqrt(a b)`.
    pub fn activity(&self) -> f64 {
        2.0 * (self.forward * self.backward).sqrt()
    }
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range(format!("{what} is not finite")))
    }
}

/// `a (e^zeta - 1) + b (e^-zeta - 1)`.
pub fn edge_hamiltonian(r: EdgeRates, zeta: f64) -> Result<f64> {
    let fwd = if r.forward == 0.0 { 0.0 } else { r.forward * zeta.exp_m1() };
    let bwd = if r.backward == 0.0 { 0.0 } else { r.backward * (-zeta).exp_m1() };
    finite(fwd + bwd, "edge Hamiltonian")
}

/// Legendre dual of [`edge_hamiltonian`] in `zeta`.
pub fn edge_lagrangian(r: EdgeRates, j: f64) -> f64 {
    let (a, b) = (r.forward, r.backward);
    if j.is_nan() {
        return f64::NAN;
    }
    if a == 0.0 {
        return rel_boltzmann(-j, b);
    }
    if b == 0.0 {
        return rel_boltzmann(j, a);
    }
    let sab = (a * b).sqrt();
    let x = j / (2.0 * sab);
    let force = 0.5 * (a.ln() - b.ln());
    2.0 * sab * cosh_dual(x) + (a.sqrt() - b.sqrt()).powi(2) - j * force
}

/// `F = 1/2 log(a/b)`, defined for strictly positive rates.
pub fn edge_force(r: EdgeRates) -> Result<f64> {
    if r.forward > 0.0 && r.backward > 0.0 {
        Ok(0.5 * (r.forward.ln() - r.backward.ln()))
    } else {
        Err(Error::Domain(format!(
            "edge force needs positive rates, got ({}, {})",
            r.forward, r.backward
        )))
    }
}

/// Uniform search grid for [`numerical_legendre`].
#[derive(Debug, Clone, Copy)]
pub struct LegendreGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for LegendreGrid {
    fn default() -> Self {
        Self {
            lo: -30.0,
            hi: 30.0,
            points: 4001,
        }
    }
}

/// `sup_zeta zeta y - f(zeta)` by grid search and golden-section refinement.
/// Returns `(value, argmax)`.
pub fn numerical_legendre<F: Fn(f64) -> f64>(
    f: F,
    y: f64,
    grid: LegendreGrid,
) -> Result<(f64, f64)> {
    let n = grid.points.max(3);
    let h = (grid.hi - grid.lo) / (n - 1) as f64;
    let obj = |z: f64| {
        let v = z * y - f(z);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let (mut best, mut best_v) = (0usize, f64::NEG_INFINITY);
    for i in 0..n {
        let v = obj(grid.lo + h * i as f64);
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    if best == 0 || best == n - 1 {
        return Err(Error::GridTooSmall {
            lo: grid.lo,
            hi: grid.hi,
        });
    }
    let lo = grid.lo + h * (best - 1) as f64;
    let hi = grid.lo + h * (best + 1) as f64;
    let (z, v) = golden_max(obj, lo, hi, 1e-13);
    Ok((v, z))
}

/// Separable per-edge cost: either the cosh-type cost of a jump edge or the
/// quadratic cost of a diffusive edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeCost {
    /// `H(zeta) = a (e^zeta - 1) + b (e^-zeta - 1)`.
    Cosh(EdgeRates),
    /// `H(zeta) = chi zeta^2 + zeta j0`.
    Quadratic { mobility: f64, drift: f64 },
}

impl EdgeCost {
    pub fn hamiltonian(&self, zeta: f64) -> Result<f64> {
        match *self {
            EdgeCost::Cosh(r) => edge_hamiltonian(r, zeta),
            EdgeCost::Quadratic { mobility, drift } => {
                finite(mobility * zeta * zeta + zeta * drift, "quadratic Hamiltonian")
            }
        }
    }

    /// `dH/dzeta`.
    pub fn hamiltonian_derivative(&self, zeta: f64) -> Result<f64> {
        let v = match *self {
            EdgeCost::Cosh(r) => {
                let f = if r.forward == 0.0 { 0.0 } else { r.forward * zeta.exp() };
                let b = if r.backward == 0.0 { 0.0 } else { r.backward * (-zeta).exp() };
                f - b
            }
            EdgeCost::Quadratic { mobility, drift } => 2.0 * mobility * zeta + drift,
        };
        finite(v, "Hamiltonian derivative")
    }

    /// `d^2H/dzeta^2`.
    pub fn hamiltonian_curvature(&self, zeta: f64) -> Result<f64> {
        let v = match *self {
            EdgeCost::Cosh(r) => {
                let f = if r.forward == 0.0 { 0.0 } else { r.forward * zeta.exp() };
                let b = if r.backward == 0.0 { 0.0 } else { r.backward * (-zeta).exp() };
                f + b
            }
            EdgeCost::Quadratic { mobility, .. } => 2.0 * mobility,
        };
        finite(v, "Hamiltonian curvature")
    }

    pub fn lagrangian(&self, j: f64) -> f64 {
        match *self {
            EdgeCost::Cosh(r) => edge_lagrangian(r, j),
            EdgeCost::Quadratic { mobility, drift } => (j - drift).powi(2) / (4.0 * mobility),
        }
    }

    /// Flux at which the Lagrangian vanishes.
    pub fn zero_cost_flux(&self) -> f64 {
        match *self {
            EdgeCost::Cosh(r) => r.forward - r.backward,
            EdgeCost::Quadratic { drift, .. } => drift,
        }
    }

    /// Driving force `-dL/dj` at `j = 0`.
    pub fn force(&self) -> Result<f64> {
        match *self {
            EdgeCost::Cosh(r) => edge_force(r),
            EdgeCost::Quadratic { mobility, drift } => Ok(0.5 * drift / mobility),
        }
    }

    /// Cost with Hamiltonian `zeta -> H(zeta + c) - H(c)`.
    pub fn tilt(&self, c: f64) -> Result<EdgeCost> {
        match *self {
            EdgeCost::Cosh(r) => Ok(EdgeCost::Cosh(EdgeRates::new(
                r.forward * c.exp(),
                r.backward * (-c).exp(),
            )?)),
            EdgeCost::Quadratic { mobility, drift } => Ok(EdgeCost::Quadratic {
                mobility,
                drift: drift + 2.0 * mobility * c,
            }),
        }
    }

    /// Cost with Hamiltonian `zeta -> H(g - zeta) - H(g)`; also returns `H(g)`.
    pub fn reflect(&self, g: f64) -> Result<(EdgeCost, f64)> {
        let hg = self.hamiltonian(g)?;
        let cost = match *self {
            EdgeCost::Cosh(r) => EdgeCost::Cosh(EdgeRates::new(
                r.backward * (-g).exp(),
                r.forward * g.exp(),
            )?),
            EdgeCost::Quadratic { mobility, drift } => EdgeCost::Quadratic {
                mobility,
                drift: -(2.0 * mobility * g + drift),
            },
        };
        Ok((cost, hg))
    }

    /// Closed-form dual dissipation potential.
    pub fn dissipation_dual(&self, zeta: f64) -> f64 {
        match *self {
            EdgeCost::Cosh(r) => {
                let act = r.activity();
                if act == 0.0 {
                    0.0
                } else {
                    act * (zeta.cosh() - 1.0)
                }
            }
            EdgeCost::Quadratic { mobility, .. } => mobility * zeta * zeta,
        }
    }

    /// Closed-form primal dissipation potential.
    pub fn dissipation(&self, j: f64) -> f64 {
        match *self {
            EdgeCost::Cosh(r) => {
                let act = r.activity();
                if act == 0.0 {
                    if j == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    act * cosh_dual(j / act)
                }
            }
            EdgeCost::Quadratic { mobility, .. } => j * j / (4.0 * mobility),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rates(a: f64, b: f64) -> EdgeRates {
        EdgeRates::new(a, b).unwrap()
    }

    /// `inf_{j+ >= max(j,0)} s(j+|a) + s(j+ - j|b)` by golden section.
    fn lagrangian_by_splitting(a: f64, b: f64, j: f64) -> f64 {
        let lo = j.max(0.0);
        let hi = lo + 10.0 * (1.0 + a + b + j.abs());
        let (_, v) = golden_max(|p| -(rel_boltzmann(p, a) + rel_boltzmann(p - j, b)), lo, hi, 1e-14);
        -v
    }

    #[test]
    fn relative_boltzmann_values() {
        assert!((rel_boltzmann(2.0, 1.0) - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-15);
        assert_eq!(rel_boltzmann(0.0, 3.0), 3.0);
        assert_eq!(rel_boltzmann(1.0, 1.0), 0.0);
        assert_eq!(rel_boltzmann(1.0, 0.0), f64::INFINITY);
        assert_eq!(rel_boltzmann(-1e-300, 1.0), f64::INFINITY);
    }

    #[test]
    fn cosh_dual_reference() {
        let x: f64 = 1.0;
        let oracle = x * (x + (1.0 + x * x).sqrt()).ln() - (1.0 + x * x).sqrt() + 1.0;
        assert!((cosh_dual(1.0) - oracle).abs() < 1e-15);
        assert!((cosh_dual(1.0) - 0.467160).abs() < 1e-6);
        assert!((cosh_dual(1e-8) - 0.5e-16).abs() < 1e-30);
    }

    #[test]
    fn hamiltonian_minimum_value() {
        let r = rates(2.0, 1.0);
        let z = -0.5 * 2f64.ln();
        let h = edge_hamiltonian(r, z).unwrap();
        assert!((h - (2.0 * 2f64.sqrt() - 3.0)).abs() < 1e-15);
        assert!((h + 0.171573).abs() < 1e-6);
        assert!(edge_hamiltonian(r, 800.0).is_err());
    }

    #[test]
    fn lagrangian_reference_values() {
        // Golden ratio point of the splitting formula.
        let phi = 0.5 * (1.0 + 5f64.sqrt());
        let oracle = rel_boltzmann(phi, 1.0) + rel_boltzmann(phi - 1.0, 1.0);
        let l = edge_lagrangian(rates(1.0, 1.0), 1.0);
        assert!((l - oracle).abs() < 1e-14);
        assert!((l - 0.245144).abs() < 1e-6);
        assert!((edge_lagrangian(rates(0.5, 0.5), 0.5) - 0.5 * oracle).abs() < 1e-14);
        assert!(edge_lagrangian(rates(2.0, 1.0), 1.0).abs() < 1e-15);
        assert_eq!(edge_lagrangian(rates(1.0, 0.0), -1.0), f64::INFINITY);
        assert_eq!(edge_lagrangian(rates(0.0, 0.0), 0.0), 0.0);
        assert!((edge_lagrangian(rates(0.0, 2.0), -1.0) - rel_boltzmann(1.0, 2.0)).abs() < 1e-15);
    }

    #[test]
    fn lagrangian_matches_splitting_and_grid_legendre() {
        for &(a, b, j) in &[(1.0, 1.0, 1.0), (2.0, 0.3, -0.7), (0.05, 4.0, 2.5), (3.0, 3.0, 0.0)] {
            let closed = edge_lagrangian(rates(a, b), j);
            assert!((closed - lagrangian_by_splitting(a, b, j)).abs() < 1e-9, "{a} {b} {j}");
            let (num, _) = numerical_legendre(
                |z| edge_hamiltonian(rates(a, b), z).unwrap_or(f64::INFINITY),
                j,
                LegendreGrid::default(),
            )
            .unwrap();
            assert!((closed - num).abs() <= 1e-6 * (1.0 + closed.abs()));
        }
    }

    #[test]
    fn legendre_reports_small_grid() {
        let r = numerical_legendre(
            |z| edge_hamiltonian(rates(1.0, 1.0), z).unwrap(),
            50.0,
            LegendreGrid { lo: -1.0, hi: 1.0, points: 101 },
        );
        assert!(matches!(r, Err(Error::GridTooSmall { .. })));
    }

    #[test]
    fn force_is_derivative_of_lagrangian_at_zero() {
        let r = rates(3.0, 0.7);
        let h = 1e-6;
        let fd = -(edge_lagrangian(r, h) - edge_lagrangian(r, -h)) / (2.0 * h);
        assert!((edge_force(r).unwrap() - fd).abs() < 1e-8);
        assert!(edge_force(rates(0.0, 1.0)).is_err());
    }

    #[test]
    fn tilt_and_reflect_shift_the_hamiltonian() {
        for cost in [
            EdgeCost::Cosh(rates(1.3, 0.4)),
            EdgeCost::Quadratic { mobility: 0.8, drift: -0.3 },
        ] {
            let (c, g, z) = (0.37, -0.21, 0.9);
            let t = cost.tilt(c).unwrap();
            let lhs = t.hamiltonian(z).unwrap();
            let rhs = cost.hamiltonian(z + c).unwrap() - cost.hamiltonian(c).unwrap();
            assert!((lhs - rhs).abs() < 1e-14);
            let (r, hg) = cost.reflect(g).unwrap();
            let lhs = r.hamiltonian(z).unwrap() + hg;
            assert!((lhs - cost.hamiltonian(g - z).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_dissipation_pair() {
        let cost = EdgeCost::Cosh(rates(0.5, 0.5));
        assert!((cost.dissipation_dual(1.0) - (1f64.cosh() - 1.0)).abs() < 1e-15);
        assert!((cost.dissipation_dual(1.0) - 0.543081).abs() < 1e-6);
        let f = cost.force().unwrap();
        let via_h = cost.hamiltonian(1.0 - f).unwrap() - cost.hamiltonian(-f).unwrap();
        assert!((via_h - cost.dissipation_dual(1.0)).abs() < 1e-15);
    }
}
