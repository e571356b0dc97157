//! Model families and the Hamiltonian, Lagrangian, forces and quasipotential
//! they induce.
//!
//! Every family reduces, at a fixed state, to a list of per-edge costs
//! ([`EdgeCost`]) together with a continuity operator `dphi` mapping fluxes
//! to state velocities. Pairings are Euclidean sums over edges or states.

pub mod crn;
pub mod eta;
pub mod fixtures;
pub mod generator;
pub mod ipfg;
pub mod lattice;
pub mod zero_range;

use nalgebra::DMatrix;

use crate::entropy::EdgeCost;
use crate::error::{check_len, Error, Result};
use crate::graph::{Graph, MassConstraint};
use crate::numeric::{dot, neumaier_sum};

pub use crn::{Crn, Reaction};
pub use eta::Eta;
pub use generator::Generator;
pub use ipfg::Ipfg;
pub use lattice::{LatticeGas, Mobility};
pub use zero_range::{normalize_zero_range, ZeroRange};

/// Continuity operator `dphi` (flux to velocity) and its adjoint.
#[derive(Debug, Clone, Copy)]
pub enum Continuity<'a> {
    /// `dphi j = -scale * div j`, `dphi^T xi = scale * grad xi`.
    Graph { graph: &'a Graph, scale: f64 },
    /// `dphi j = Gamma j`, `dphi^T xi = Gamma^T xi`.
    Stoichiometric(&'a DMatrix<f64>),
}

impl Continuity<'_> {
    pub fn state_dim(&self) -> usize {
        match self {
            Continuity::Graph { graph, .. } => graph.n_nodes(),
            Continuity::Stoichiometric(g) => g.nrows(),
        }
    }

    pub fn flux_dim(&self) -> usize {
        match self {
            Continuity::Graph { graph, .. } => graph.n_edges(),
            Continuity::Stoichiometric(g) => g.ncols(),
        }
    }

    /// `dphi j`.
    pub fn apply(&self, j: &[f64]) -> Result<Vec<f64>> {
        match self {
            Continuity::Graph { graph, scale } => {
                Ok(graph.divergence(j)?.into_iter().map(|d| -scale * d).collect())
            }
            Continuity::Stoichiometric(g) => {
                check_len("flux", g.ncols(), j.len())?;
                Ok((0..g.nrows())
                    .map(|x| neumaier_sum((0..g.ncols()).map(|r| g[(x, r)] * j[r])))
                    .collect())
            }
        }
    }

    /// `dphi^T xi`.
    pub fn adjoint(&self, xi: &[f64]) -> Result<Vec<f64>> {
        match self {
            Continuity::Graph { graph, scale } => {
                Ok(graph.gradient(xi)?.into_iter().map(|d| scale * d).collect())
            }
            Continuity::Stoichiometric(g) => {
                check_len("state covector", g.nrows(), xi.len())?;
                Ok((0..g.ncols())
                    .map(|r| neumaier_sum((0..g.nrows()).map(|x| g[(x, r)] * xi[x])))
                    .collect())
            }
        }
    }

    /// Dense matrix of `dphi` (states by fluxes).
    pub fn matrix(&self) -> DMatrix<f64> {
        match self {
            Continuity::Graph { graph, scale } => {
                let mut m = DMatrix::zeros(graph.n_nodes(), graph.n_edges());
                for (e, &(x, y)) in graph.edges().iter().enumerate() {
                    m[(x, e)] = -scale;
                    m[(y, e)] = *scale;
                }
                m
            }
            Continuity::Stoichiometric(g) => (*g).clone(),
        }
    }

    /// Integer state change caused by one forward jump on edge `e`.
    pub fn jump(&self, e: usize) -> Vec<(usize, i64)> {
        match self {
            Continuity::Graph { graph, .. } => {
                let (x, y) = graph.edges()[e];
                vec![(x, -1), (y, 1)]
            }
            Continuity::Stoichiometric(g) => (0..g.nrows())
                .filter(|&x| g[(x, e)] != 0.0)
                .map(|x| (x, g[(x, e)] as i64))
                .collect(),
        }
    }
}

/// A base model whose edges are tilted by a fixed covector `zeta`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tilted {
    pub base: Box<Model>,
    pub zeta: Vec<f64>,
}

/// All supported model families.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Ipfg(Ipfg),
    ZeroRange(ZeroRange),
    Crn(Crn),
    LatticeGas(LatticeGas),
    Tilted(Tilted),
}

impl Model {
    pub fn family(&self) -> &'static str {
        match self {
            Model::Ipfg(_) => "ipfg",
            Model::ZeroRange(_) => "zero-range",
            Model::Crn(_) => "crn",
            Model::LatticeGas(_) => "lattice-gas",
            Model::Tilted(_) => "tilted",
        }
    }

    pub fn continuity(&self) -> Continuity<'_> {
        match self {
            Model::Ipfg(m) => Continuity::Graph {
                graph: m.generator().graph(),
                scale: 1.0,
            },
            Model::ZeroRange(m) => Continuity::Graph {
                graph: m.generator().graph(),
                scale: 1.0,
            },
            Model::Crn(m) => Continuity::Stoichiometric(m.stoichiometry()),
            Model::LatticeGas(m) => Continuity::Graph {
                graph: m.graph(),
                scale: m.cells() as f64,
            },
            Model::Tilted(t) => t.base.continuity(),
        }
    }

    pub fn state_dim(&self) -> usize {
        self.continuity().state_dim()
    }

    pub fn flux_dim(&self) -> usize {
        self.continuity().flux_dim()
    }

    pub fn mass_constraint(&self) -> MassConstraint {
        match self {
            Model::Ipfg(_) | Model::ZeroRange(_) => MassConstraint::Probability,
            Model::Crn(_) | Model::LatticeGas(_) => MassConstraint::Free,
            Model::Tilted(t) => t.base.mass_constraint(),
        }
    }

    /// Whether all edge costs are of cosh type.
    pub fn is_cosh(&self) -> bool {
        match self {
            Model::LatticeGas(_) => false,
            Model::Tilted(t) => t.base.is_cosh(),
            _ => true,
        }
    }

    /// Equilibrium state, if known.
    pub fn equilibrium(&self) -> Option<&[f64]> {
        match self {
            Model::Ipfg(m) => Some(m.pi()),
            Model::ZeroRange(m) => Some(m.pi()),
            Model::Crn(m) => Some(m.pi()),
            Model::LatticeGas(m) => Some(m.pi()),
            Model::Tilted(_) => None,
        }
    }

    pub fn edge_costs(&self, rho: &[f64]) -> Result<Vec<EdgeCost>> {
        match self {
            Model::Ipfg(m) => m.edge_costs(rho),
            Model::ZeroRange(m) => m.edge_costs(rho),
            Model::Crn(m) => m.edge_costs(rho),
            Model::LatticeGas(m) => m.edge_costs(rho),
            Model::Tilted(t) => t
                .base
                .edge_costs(rho)?
                .iter()
                .zip(&t.zeta)
                .map(|(c, &z)| c.tilt(z))
                .collect(),
        }
    }

    pub fn quasipotential(&self, rho: &[f64]) -> Result<f64> {
        match self {
            Model::Ipfg(m) => m.quasipotential(rho),
            Model::ZeroRange(m) => m.quasipotential(rho),
            Model::Crn(m) => m.quasipotential(rho),
            Model::LatticeGas(m) => m.quasipotential(rho),
            Model::Tilted(_) => Err(Error::Unsupported("tilted models have no closed-form quasipotential".into())),
        }
    }

    /// Euclidean gradient `dV` of the quasipotential.
    pub fn quasipotential_gradient(&self, rho: &[f64]) -> Result<Vec<f64>> {
        match self {
            Model::Ipfg(m) => m.quasipotential_gradient(rho),
            Model::ZeroRange(m) => m.quasipotential_gradient(rho),
            Model::Crn(m) => m.quasipotential_gradient(rho),
            Model::LatticeGas(m) => m.quasipotential_gradient(rho),
            Model::Tilted(_) => Err(Error::Unsupported("tilted models have no closed-form quasipotential".into())),
        }
    }
}

/// Jump rates `a e^zeta`, `b e^-zeta` on every edge. IPFG and zero-range
/// models stay in their family; other families are wrapped.
pub fn tilt_rates(model: &Model, zeta: &[f64]) -> Result<Model> {
    check_len("tilt", model.flux_dim(), zeta.len())?;
    Ok(match model {
        Model::Ipfg(m) => Model::Ipfg(m.tilted(zeta)?),
        Model::ZeroRange(m) => Model::ZeroRange(m.tilted(zeta)?),
        Model::Tilted(t) => Model::Tilted(Tilted {
            base: t.base.clone(),
            zeta: t.zeta.iter().zip(zeta).map(|(a, b)| a + b).collect(),
        }),
        other => Model::Tilted(Tilted {
            base: Box::new(other.clone()),
            zeta: zeta.to_vec(),
        }),
    })
}

fn sum_possibly_infinite(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    if v.iter().any(|x| x.is_nan()) {
        f64::NAN
    } else if v.contains(&f64::INFINITY) {
        f64::INFINITY
    } else {
        neumaier_sum(v)
    }
}

/// `H(rho, zeta) = sum_e H_e(zeta_e)`.
pub fn hamiltonian(model: &Model, rho: &[f64], zeta: &[f64]) -> Result<f64> {
    check_len("covector", model.flux_dim(), zeta.len())?;
    let costs = model.edge_costs(rho)?;
    let terms = costs
        .iter()
        .zip(zeta)
        .map(|(c, &z)| c.hamiltonian(z))
        .collect::<Result<Vec<_>>>()?;
    Ok(neumaier_sum(terms))
}

/// `dH/dzeta (rho, zeta)`, a flux.
pub fn hamiltonian_gradient(model: &Model, rho: &[f64], zeta: &[f64]) -> Result<Vec<f64>> {
    check_len("covector", model.flux_dim(), zeta.len())?;
    model
        .edge_costs(rho)?
        .iter()
        .zip(zeta)
        .map(|(c, &z)| c.hamiltonian_derivative(z))
        .collect()
}

/// `L(rho, j) = sum_e L_e(j_e)`, possibly `+inf`.
pub fn lagrangian(model: &Model, rho: &[f64], j: &[f64]) -> Result<f64> {
    check_len("flux", model.flux_dim(), j.len())?;
    let costs = model.edge_costs(rho)?;
    Ok(sum_possibly_infinite(costs.iter().zip(j).map(|(c, &je)| c.lagrangian(je))))
}

/// Flux `j0` with `L(rho, j0) = 0`.
pub fn zero_cost_flux(model: &Model, rho: &[f64]) -> Result<Vec<f64>> {
    Ok(model.edge_costs(rho)?.iter().map(EdgeCost::zero_cost_flux).collect())
}

/// `dphi j0(rho)`, the velocity of the deterministic limit.
pub fn velocity(model: &Model, rho: &[f64]) -> Result<Vec<f64>> {
    model.continuity().apply(&zero_cost_flux(model, rho)?)
}

/// `dphi^T dV(rho)`.
pub fn quasipotential_covector(model: &Model, rho: &[f64]) -> Result<Vec<f64>> {
    model.continuity().adjoint(&model.quasipotential_gradient(rho)?)
}

/// Driving force with its symmetric and antisymmetric parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceTriple {
    pub force: Vec<f64>,
    pub symmetric: Vec<f64>,
    pub antisymmetric: Vec<f64>,
}

/// `F = -dL(rho, 0)`, `Fsym = -1/2 dphi^T dV`, `Fasym = F - Fsym`.
pub fn forces(model: &Model, rho: &[f64]) -> Result<ForceTriple> {
    let force = model
        .edge_costs(rho)?
        .iter()
        .map(EdgeCost::force)
        .collect::<Result<Vec<_>>>()?;
    let symmetric: Vec<f64> = quasipotential_covector(model, rho)?
        .iter()
        .map(|g| -0.5 * g)
        .collect();
    let antisymmetric = force.iter().zip(&symmetric).map(|(f, s)| f - s).collect();
    Ok(ForceTriple {
        force,
        symmetric,
        antisymmetric,
    })
}

/// `H(rho, dphi^T dV(rho))`, zero for an exact quasipotential.
pub fn quasipotential_identity_residual(model: &Model, rho: &[f64]) -> Result<f64> {
    hamiltonian(model, rho, &quasipotential_covector(model, rho)?)
}

/// `H(rho, dphi^T dV - zeta)`.
pub fn reversed_hamiltonian(model: &Model, rho: &[f64], zeta: &[f64]) -> Result<f64> {
    check_len("covector", model.flux_dim(), zeta.len())?;
    let g = quasipotential_covector(model, rho)?;
    let shifted: Vec<f64> = g.iter().zip(zeta).map(|(a, b)| a - b).collect();
    hamiltonian(model, rho, &shifted)
}

/// Legendre dual of [`reversed_hamiltonian`], from the reflected edge costs.
pub fn reversed_lagrangian(model: &Model, rho: &[f64], j: &[f64]) -> Result<f64> {
    check_len("flux", model.flux_dim(), j.len())?;
    let g = quasipotential_covector(model, rho)?;
    let costs = model.edge_costs(rho)?;
    let mut shift = Vec::with_capacity(costs.len());
    let mut terms = Vec::with_capacity(costs.len());
    for ((c, &ge), &je) in costs.iter().zip(&g).zip(j) {
        let (r, hg) = c.reflect(ge)?;
        shift.push(hg);
        terms.push(r.lagrangian(je));
    }
    Ok(sum_possibly_infinite(terms.into_iter()) - neumaier_sum(shift))
}

/// `L(rho, -j) + <dphi^T dV, j>`.
pub fn reversed_lagrangian_formula(model: &Model, rho: &[f64], j: &[f64]) -> Result<f64> {
    let neg: Vec<f64> = j.iter().map(|v| -v).collect();
    let g = quasipotential_covector(model, rho)?;
    Ok(lagrangian(model, rho, &neg)? + dot(&g, j))
}
