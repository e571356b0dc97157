//! Dissipation potentials, tilted costs, Fisher information and the three
//! force splittings of the Lagrangian.
//!
//! Closed-form per-edge expressions and generic Hamiltonian identities are
//! kept as separate code paths so that one can check the other.

use nalgebra::{DMatrix, DVector};

use crate::entropy::EdgeCost;
use crate::error::{check_len, Error, Result};
use crate::models::{forces, hamiltonian, lagrangian, Model};
use crate::numeric::{dot, neumaier_sum};

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn scale(s: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| s * x).collect()
}

/// `Phi*(rho, zeta) = H(rho, zeta - F) - H(rho, -F)`.
pub fn dissipation_dual(model: &Model, rho: &[f64], zeta: &[f64]) -> Result<f64> {
    check_len("covector", model.flux_dim(), zeta.len())?;
    let f = forces(model, rho)?.force;
    Ok(hamiltonian(model, rho, &sub(zeta, &f))? - hamiltonian(model, rho, &scale(-1.0, &f))?)
}

/// Closed-form `Phi*`: `sum 2 sqrt(ab) (cosh zeta - 1)` or `sum chi zeta^2`.
pub fn dissipation_dual_closed(model: &Model, rho: &[f64], zeta: &[f64]) -> Result<f64> {
    check_len("covector", model.flux_dim(), zeta.len())?;
    let costs = model.edge_costs(rho)?;
    Ok(neumaier_sum(costs.iter().zip(zeta).map(|(c, &z)| c.dissipation_dual(z))))
}

/// Closed-form `Phi(rho, j)`: `sum 2 sqrt(ab) cosh*(j / 2 sqrt(ab))` or `sum j^2 / 4 chi`.
pub fn dissipation(model: &Model, rho: &[f64], j: &[f64]) -> Result<f64> {
    check_len("flux", model.flux_dim(), j.len())?;
    let costs = model.edge_costs(rho)?;
    let terms: Vec<f64> = costs.iter().zip(j).map(|(c, &je)| c.dissipation(je)).collect();
    if terms.iter().any(|t| t.is_infinite()) {
        return Ok(f64::INFINITY);
    }
    Ok(neumaier_sum(terms))
}

/// `H_G(rho, zeta) = H(rho, zeta + G - F) - H(rho, G - F)`.
pub fn tilted_hamiltonian(model: &Model, rho: &[f64], tilt: &[f64], zeta: &[f64]) -> Result<f64> {
    check_len("tilt", model.flux_dim(), tilt.len())?;
    check_len("covector", model.flux_dim(), zeta.len())?;
    let c = sub(tilt, &forces(model, rho)?.force);
    Ok(hamiltonian(model, rho, &add(zeta, &c))? - hamiltonian(model, rho, &c)?)
}

/// Edge costs of `H_G`.
pub fn tilted_edge_costs(model: &Model, rho: &[f64], tilt: &[f64]) -> Result<Vec<EdgeCost>> {
    check_len("tilt", model.flux_dim(), tilt.len())?;
    let costs = model.edge_costs(rho)?;
    costs
        .iter()
        .zip(tilt)
        .map(|(c, &g)| c.tilt(g - c.force()?))
        .collect()
}

/// `L_G(rho, j)`, the Legendre dual of `H_G`, from the tilted edge costs.
pub fn tilted_lagrangian(model: &Model, rho: &[f64], tilt: &[f64], j: &[f64]) -> Result<f64> {
    check_len("flux", model.flux_dim(), j.len())?;
    let costs = tilted_edge_costs(model, rho, tilt)?;
    let terms: Vec<f64> = costs.iter().zip(j).map(|(c, &je)| c.lagrangian(je)).collect();
    if terms.iter().any(|t| t.is_infinite()) {
        return Ok(f64::INFINITY);
    }
    Ok(neumaier_sum(terms))
}

/// `L(rho, j) + H(rho, G - F) + <F - G, j>`.
pub fn tilted_lagrangian_formula(model: &Model, rho: &[f64], tilt: &[f64], j: &[f64]) -> Result<f64> {
    let f = forces(model, rho)?.force;
    Ok(lagrangian(model, rho, j)? + hamiltonian(model, rho, &sub(tilt, &f))? + dot(&sub(&f, tilt), j))
}

/// Zero-cost flux of `L_G`, namely `dH/dzeta (rho, G - F)`.
pub fn tilted_zero_cost_flux(model: &Model, rho: &[f64], tilt: &[f64]) -> Result<Vec<f64>> {
    Ok(tilted_edge_costs(model, rho, tilt)?
        .iter()
        .map(EdgeCost::zero_cost_flux)
        .collect())
}

/// Fisher information `R^lambda_G(rho) = -H(rho, -2 lambda G)`.
pub fn fisher(model: &Model, rho: &[f64], tilt: &[f64], lambda: f64) -> Result<f64> {
    check_len("tilt", model.flux_dim(), tilt.len())?;
    Ok(-hamiltonian(model, rho, &scale(-2.0 * lambda, tilt))?)
}

/// Which force is split off the Lagrangian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Splitting {
    Force,
    Symmetric,
    Antisymmetric,
}

impl Splitting {
    pub const ALL: [Splitting; 3] = [Splitting::Force, Splitting::Symmetric, Splitting::Antisymmetric];

    pub fn name(self) -> &'static str {
        match self {
            Splitting::Force => "F",
            Splitting::Symmetric => "Fsym",
            Splitting::Antisymmetric => "Fasym",
        }
    }
}

/// One evaluation of `L = L_{F - 2 lambda G} + R^lambda_G - 2 lambda <G, j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub splitting: Splitting,
    pub lambda: f64,
    pub lagrangian: f64,
    pub tilted_lagrangian: f64,
    pub fisher: f64,
    pub pairing: f64,
    /// `L - (L_{F - 2 lambda G} + R^lambda_G - 2 lambda <G, j>)`.
    pub residual: f64,
}

/// The three decompositions at `(rho, j, lambda)`.
pub fn decomposition_residuals(
    model: &Model,
    rho: &[f64],
    j: &[f64],
    lambda: f64,
) -> Result<[DecompositionReport; 3]> {
    let ft = forces(model, rho)?;
    let l = lagrangian(model, rho, j)?;
    let one = |splitting: Splitting| -> Result<DecompositionReport> {
        let g = match splitting {
            Splitting::Force => &ft.force,
            Splitting::Symmetric => &ft.symmetric,
            Splitting::Antisymmetric => &ft.antisymmetric,
        };
        let tilt = sub(&ft.force, &scale(2.0 * lambda, g));
        let lt = tilted_lagrangian(model, rho, &tilt, j)?;
        let r = fisher(model, rho, g, lambda)?;
        let p = dot(g, j);
        Ok(DecompositionReport {
            splitting,
            lambda,
            lagrangian: l,
            tilted_lagrangian: lt,
            fisher: r,
            pairing: p,
            residual: l - (lt + r - 2.0 * lambda * p),
        })
    };
    Ok([
        one(Splitting::Force)?,
        one(Splitting::Symmetric)?,
        one(Splitting::Antisymmetric)?,
    ])
}

/// `theta_rho(zeta1, zeta2) = 1/2 [Phi*(zeta1 + zeta2) - Phi*(-zeta1 + zeta2)]`.
pub fn ortho_pairing(model: &Model, rho: &[f64], zeta1: &[f64], zeta2: &[f64]) -> Result<f64> {
    let plus = dissipation_dual(model, rho, &add(zeta1, zeta2))?;
    let minus = dissipation_dual(model, rho, &sub(zeta2, zeta1))?;
    Ok(0.5 * (plus - minus))
}

/// Closed-form `theta`: `sum 2 sqrt(ab) sinh zeta1 sinh zeta2` or `sum 2 chi zeta1 zeta2`.
pub fn ortho_pairing_closed(model: &Model, rho: &[f64], zeta1: &[f64], zeta2: &[f64]) -> Result<f64> {
    let costs = model.edge_costs(rho)?;
    Ok(neumaier_sum(costs.iter().zip(zeta1).zip(zeta2).map(|((c, &a), &b)| match c {
        EdgeCost::Cosh(r) => r.activity() * a.sinh() * b.sinh(),
        EdgeCost::Quadratic { mobility, .. } => 2.0 * mobility * a * b,
    })))
}

/// `Phi*_{zeta2}(rho, zeta1) = 1/2 [Phi*(zeta1 + zeta2) + Phi*(-zeta1 + zeta2)] - Phi*(zeta2)`.
pub fn modified_dissipation_dual(model: &Model, rho: &[f64], zeta2: &[f64], zeta1: &[f64]) -> Result<f64> {
    let plus = dissipation_dual(model, rho, &add(zeta1, zeta2))?;
    let minus = dissipation_dual(model, rho, &sub(zeta2, zeta1))?;
    Ok(0.5 * (plus + minus) - dissipation_dual(model, rho, zeta2)?)
}

/// Orthogonality of the symmetric and antisymmetric forces.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityReport {
    /// `theta(Fsym, Fasym)`.
    pub theta_sym_asym: f64,
    /// `theta(Fasym, Fsym)`.
    pub theta_asym_sym: f64,
    /// `Phi*(F) - Phi*_{Fasym}(Fsym) - Phi*(Fasym)`.
    pub split_asym: f64,
    /// `Phi*(F) - Phi*(Fsym) - Phi*_{Fsym}(Fasym)`.
    pub split_sym: f64,
}

pub fn orthogonality(model: &Model, rho: &[f64]) -> Result<OrthogonalityReport> {
    let ft = forces(model, rho)?;
    let (s, a) = (&ft.symmetric, &ft.antisymmetric);
    let total = dissipation_dual(model, rho, &ft.force)?;
    Ok(OrthogonalityReport {
        theta_sym_asym: ortho_pairing(model, rho, s, a)?,
        theta_asym_sym: ortho_pairing(model, rho, a, s)?,
        split_asym: total - modified_dissipation_dual(model, rho, a, s)? - dissipation_dual(model, rho, a)?,
        split_sym: total - dissipation_dual(model, rho, s)? - modified_dissipation_dual(model, rho, s, a)?,
    })
}

/// Result of the contraction `sup_xi <xi, u> - H(rho, dphi^T xi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contraction {
    pub value: f64,
    pub maximiser: Vec<f64>,
    pub iterations: usize,
}

/// Orthonormal basis of the range of `d` (columns).
fn range_basis(d: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = d.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let tol = smax * 1e-12 * d.nrows().max(d.ncols()) as f64;
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > tol)
        .collect();
    DMatrix::from_fn(d.nrows(), keep.len(), |i, k| u[(i, keep[k])])
}

/// Contracted Lagrangian `L^(rho, u)` by damped Newton over `xi` in the range of `dphi`.
pub fn contracted_lagrangian(model: &Model, rho: &[f64], u: &[f64]) -> Result<Contraction> {
    check_len("velocity", model.state_dim(), u.len())?;
    let d = model.continuity().matrix();
    let basis = range_basis(&d);
    let uvec = DVector::from_column_slice(u);
    let bu = basis.transpose() * &uvec;
    let infeasible = (&uvec - &basis * &bu).amax();
    if infeasible > 1e-10 * (1.0 + uvec.amax()) {
        return Err(Error::InfeasibleVelocity(infeasible));
    }
    let costs = model.edge_costs(rho)?;
    let m = d.transpose() * &basis;
    let r = basis.ncols();
    let objective = |c: &DVector<f64>| -> Option<f64> {
        let zeta = &m * c;
        let mut h = Vec::with_capacity(costs.len());
        for (cost, &z) in costs.iter().zip(zeta.iter()) {
            h.push(cost.hamiltonian(z).ok()?);
        }
        Some(c.dot(&bu) - neumaier_sum(h))
    };
    let mut c = DVector::zeros(r);
    let mut f = objective(&c).ok_or_else(|| Error::Range("contraction objective".into()))?;
    let gtol = 1e-13 * (1.0 + bu.amax());
    for it in 0..200 {
        let zeta = &m * &c;
        let mut hd = DVector::zeros(costs.len());
        let mut w = DVector::zeros(costs.len());
        for (e, cost) in costs.iter().enumerate() {
            hd[e] = cost.hamiltonian_derivative(zeta[e])?;
            w[e] = cost.hamiltonian_curvature(zeta[e])?;
        }
        let grad = &bu - m.transpose() * &hd;
        if grad.amax() <= gtol {
            return Ok(Contraction {
                value: f,
                maximiser: (&basis * &c).iter().copied().collect(),
                iterations: it,
            });
        }
        let mut hess = m.transpose() * DMatrix::from_diagonal(&w) * &m;
        let shift = 1e-300_f64.max(hess.diagonal().amax() * 1e-15);
        for k in 0..r {
            hess[(k, k)] += shift;
        }
        let step = hess
            .cholesky()
            .ok_or_else(|| Error::Convergence("contraction Hessian is not positive definite".into()))?
            .solve(&grad);
        let slope = grad.dot(&step);
        let mut t = 1.0;
        loop {
            let trial = &c + t * &step;
            if let Some(ft) = objective(&trial) {
                if ft >= f + 1e-4 * t * slope || (ft - f).abs() <= 1e-15 * f.abs().max(1.0) {
                    c = trial;
                    f = ft.max(f);
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-20 {
                return Err(Error::Convergence("contraction line search stalled".into()));
            }
        }
    }
    Err(Error::Convergence("contraction did not converge in 200 Newton steps".into()))
}

/// `L^(rho, u) - R^lambda_{Fsym}(rho) - lambda <dV(rho), u>`, non-negative.
pub fn fir_gap(model: &Model, rho: &[f64], u: &[f64], lambda: f64) -> Result<f64> {
    let lhat = contracted_lagrangian(model, rho, u)?.value;
    let fsym = forces(model, rho)?.symmetric;
    let dv = model.quasipotential_gradient(rho)?;
    Ok(lhat - fisher(model, rho, &fsym, lambda)? - lambda * dot(&dv, u))
}

/// `L^rev(rho, j) - [L(rho, -j) + <dphi^T dV, j>]`.
pub fn reversal_residual(model: &Model, rho: &[f64], j: &[f64]) -> Result<f64> {
    Ok(crate::models::reversed_lagrangian(model, rho, j)?
        - crate::models::reversed_lagrangian_formula(model, rho, j)?)
}

/// `L_{-Fbar}(rho, j) - 2 <Fsym, j> - L(rho, j)` with `Fbar = Fsym - Fasym`.
pub fn reversed_force_residual(model: &Model, rho: &[f64], j: &[f64]) -> Result<f64> {
    let ft = forces(model, rho)?;
    let neg_bar = sub(&ft.antisymmetric, &ft.symmetric);
    Ok(tilted_lagrangian(model, rho, &neg_bar, j)? - 2.0 * dot(&ft.symmetric, j) - lagrangian(model, rho, j)?)
}
