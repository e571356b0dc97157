//! Mass-action chemical reaction networks with reversible reactions.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::entropy::{rel_boltzmann, EdgeCost, EdgeRates};
use crate::error::{check_len, Error, Result};
use crate::numeric::neumaier_sum;

/// Tolerance on the complex-balance residual relative to the largest flux at `pi`.
pub const COMPLEX_BALANCE_TOL: f64 = 1e-10;

/// Reversible reaction `alpha_fw <-> alpha_bw` with mass-action constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub reactant: Vec<u32>,
    pub product: Vec<u32>,
    pub forward_rate: f64,
    pub backward_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crn {
    species: Vec<String>,
    reactions: Vec<Reaction>,
    pi: Vec<f64>,
    gamma: DMatrix<f64>,
}

fn monomial(rho: &[f64], alpha: &[u32]) -> f64 {
    rho.iter()
        .zip(alpha)
        .map(|(&r, &a)| if a == 0 { 1.0 } else { r.powi(a as i32) })
        .product()
}

impl Crn {
    /// Network with a complex-balanced equilibrium `pi`.
    pub fn new(species: Vec<String>, reactions: Vec<Reaction>, pi: Vec<f64>) -> Result<Self> {
        let m = Self::new_unchecked(species, reactions, pi)?;
        let r = m.complex_balance_residual();
        if r > COMPLEX_BALANCE_TOL {
            return Err(Error::ModelInvalid {
                invariant: "complex-balance",
                detail: format!("relative residual {r:e}"),
            });
        }
        Ok(m)
    }

    /// Network whose `pi` is only checked for shape and positivity.
    pub fn new_unchecked(species: Vec<String>, reactions: Vec<Reaction>, pi: Vec<f64>) -> Result<Self> {
        let n = species.len();
        if n == 0 || reactions.is_empty() {
            return Err(Error::Structural("network needs species and reactions".into()));
        }
        check_len("equilibrium", n, pi.len())?;
        for (k, r) in reactions.iter().enumerate() {
            check_len("reactant complex", n, r.reactant.len())?;
            check_len("product complex", n, r.product.len())?;
            if r.reactant == r.product {
                return Err(Error::Structural(format!("reaction {k} has identical complexes")));
            }
            if !(r.forward_rate > 0.0 && r.backward_rate > 0.0)
                || !r.forward_rate.is_finite()
                || !r.backward_rate.is_finite()
            {
                return Err(Error::ModelInvalid {
                    invariant: "positive-rate-constants",
                    detail: format!("reaction {k}"),
                });
            }
        }
        if pi.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::ModelInvalid {
                invariant: "positive-measure",
                detail: "equilibrium must be strictly positive".into(),
            });
        }
        let gamma = DMatrix::from_fn(n, reactions.len(), |x, r| {
            reactions[r].product[x] as f64 - reactions[r].reactant[x] as f64
        });
        Ok(Self {
            species,
            reactions,
            pi,
            gamma,
        })
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    /// Stoichiometric matrix `Gamma` with columns `alpha_bw - alpha_fw`.
    pub fn stoichiometry(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    /// Net flux into each complex at `pi`, divided by the largest reaction flux.
    pub fn complex_balance_residual(&self) -> f64 {
        let mut net: HashMap<&[u32], f64> = HashMap::new();
        let mut scale = 0.0_f64;
        for r in &self.reactions {
            let f = r.forward_rate * monomial(&self.pi, &r.reactant);
            let b = r.backward_rate * monomial(&self.pi, &r.product);
            scale = scale.max(f).max(b);
            *net.entry(&r.reactant).or_default() += b - f;
            *net.entry(&r.product).or_default() += f - b;
        }
        net.values().fold(0.0_f64, |m, v| m.max(v.abs())) / scale.max(f64::MIN_POSITIVE)
    }

    pub fn is_complex_balanced(&self) -> bool {
        self.complex_balance_residual() <= COMPLEX_BALANCE_TOL
    }

    pub fn edge_costs(&self, rho: &[f64]) -> Result<Vec<EdgeCost>> {
        check_len("state", self.n_species(), rho.len())?;
        self.reactions
            .iter()
            .map(|r| {
                Ok(EdgeCost::Cosh(EdgeRates::new(
                    r.forward_rate * monomial(rho, &r.reactant),
                    r.backward_rate * monomial(rho, &r.product),
                )?))
            })
            .collect()
    }

    pub fn quasipotential(&self, rho: &[f64]) -> Result<f64> {
        check_len("state", self.n_species(), rho.len())?;
        Ok(neumaier_sum(rho.iter().zip(&self.pi).map(|(&r, &p)| rel_boltzmann(r, p))))
    }

    pub fn quasipotential_gradient(&self, rho: &[f64]) -> Result<Vec<f64>> {
        check_len("state", self.n_species(), rho.len())?;
        rho.iter()
            .zip(&self.pi)
            .map(|(&r, &p)| {
                if r > 0.0 {
                    Ok((r / p).ln())
                } else {
                    Err(Error::Domain("log(rho/pi) needs rho > 0".into()))
                }
            })
            .collect()
    }

    /// Network with `c_fw e^zeta_r` and `c_bw e^-zeta_r`, without a known equilibrium.
    pub fn tilted_reactions(&self, zeta: &[f64]) -> Result<Vec<Reaction>> {
        check_len("tilt", self.reactions.len(), zeta.len())?;
        Ok(self
            .reactions
            .iter()
            .zip(zeta)
            .map(|(r, &z)| Reaction {
                forward_rate: r.forward_rate * z.exp(),
                backward_rate: r.backward_rate * (-z).exp(),
                ..r.clone()
            })
            .collect())
    }
}
