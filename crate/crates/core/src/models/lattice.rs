//! Periodic one-dimensional lattice gas in the diffusive limit, with
//! quadratic per-edge costs.
//!
//! Cells `0..m` have width `dx = 1/m`. Edge `(i, i+1)` is oriented left to
//! right; the wrap edge is stored as `(0, m-1)` and therefore oriented right
//! to left. The discrete gradient is `(xi_y - xi_x) / dx`.

use crate::entropy::EdgeCost;
use crate::error::{check_len, Error, Result};
use crate::graph::Graph;
use crate::numeric::{brent, neumaier_sum};

/// Mobility and free-energy density of the gas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mobility {
    /// `chi(a) = a`, `h(a) = a log a - a + 1`.
    Independent,
    /// `chi(a) = a (1 - a)`, `h(a) = a log a + (1 - a) log(1 - a)`.
    Exclusion,
}

impl Mobility {
    pub fn chi(self, a: f64) -> f64 {
        match self {
            Mobility::Independent => a,
            Mobility::Exclusion => a * (1.0 - a),
        }
    }

    pub fn h(self, a: f64) -> f64 {
        let xlx = |v: f64| if v == 0.0 { 0.0 } else { v * v.ln() };
        match self {
            Mobility::Independent => xlx(a) - a + 1.0,
            Mobility::Exclusion => xlx(a) + xlx(1.0 - a),
        }
    }

    pub fn h_prime(self, a: f64) -> f64 {
        match self {
            Mobility::Independent => a.ln(),
            Mobility::Exclusion => (a / (1.0 - a)).ln(),
        }
    }

    fn admissible(self, a: f64) -> bool {
        match self {
            Mobility::Independent => a > 0.0 && a.is_finite(),
            Mobility::Exclusion => a > 0.0 && a < 1.0,
        }
    }
}

/// Tolerance for the divergence-free and orthogonality conditions on the drift.
pub const DRIFT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGas {
    graph: Graph,
    mobility: Mobility,
    potential: Vec<f64>,
    spatial_drift: Vec<f64>,
    drift: Vec<f64>,
    mean_density: f64,
    pi: Vec<f64>,
}

impl LatticeGas {
    /// `spatial_drift[i]` is the drift on the edge from cell `i` to cell `i+1 (mod m)`.
    pub fn new(
        mobility: Mobility,
        potential: Vec<f64>,
        spatial_drift: Vec<f64>,
        mean_density: f64,
    ) -> Result<Self> {
        let m = potential.len();
        let graph = Graph::cycle(m)?;
        check_len("drift", m, spatial_drift.len())?;
        if potential.iter().chain(&spatial_drift).any(|v| !v.is_finite()) {
            return Err(Error::Domain("potential and drift must be finite".into()));
        }
        if !mobility.admissible(mean_density) {
            return Err(Error::ModelInvalid {
                invariant: "mean-density",
                detail: format!("{mean_density} is not an admissible density"),
            });
        }
        let mut drift: Vec<f64> = spatial_drift[..m - 1].to_vec();
        drift.push(-spatial_drift[m - 1]);
        let div = graph.divergence(&drift)?;
        if let Some(d) = div.iter().find(|d| d.abs() > DRIFT_TOL) {
            return Err(Error::ModelInvalid {
                invariant: "divergence-free-drift",
                detail: format!("discrete divergence {d:e}"),
            });
        }
        let grad_u = graph.gradient(&potential)?;
        if let Some((a, g)) = drift
            .iter()
            .zip(&grad_u)
            .find(|(a, g)| (*a * *g).abs() > DRIFT_TOL)
        {
            return Err(Error::ModelInvalid {
                invariant: "drift-orthogonal-to-potential",
                detail: format!("A grad U = {:e}", a * g),
            });
        }
        let pi = equilibrium(mobility, &potential, mean_density)?;
        Ok(Self {
            graph,
            mobility,
            potential,
            spatial_drift,
            drift,
            mean_density,
            pi,
        })
    }

    pub fn cells(&self) -> usize {
        self.potential.len()
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.cells() as f64
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn mobility(&self) -> Mobility {
        self.mobility
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn spatial_drift(&self) -> &[f64] {
        &self.spatial_drift
    }

    /// Drift in edge orientation.
    pub fn drift(&self) -> &[f64] {
        &self.drift
    }

    pub fn mean_density(&self) -> f64 {
        self.mean_density
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn has_drift(&self) -> bool {
        self.drift.iter().any(|&a| a != 0.0)
    }

    fn check_state(&self, rho: &[f64]) -> Result<()> {
        check_len("state", self.cells(), rho.len())?;
        match rho.iter().find(|&&r| !self.mobility.admissible(r)) {
            Some(r) => Err(Error::Domain(format!("density {r} outside the admissible range"))),
            None => Ok(()),
        }
    }

    /// Chemical potential `h'(rho) + U`.
    pub fn chemical_potential(&self, rho: &[f64]) -> Vec<f64> {
        rho.iter()
            .zip(&self.potential)
            .map(|(&r, &u)| self.mobility.h_prime(r) + u)
            .collect()
    }

    pub fn edge_costs(&self, rho: &[f64]) -> Result<Vec<EdgeCost>> {
        self.check_state(rho)?;
        let mu = self.chemical_potential(rho);
        let inv_dx = self.cells() as f64;
        Ok(self
            .graph
            .edges()
            .iter()
            .zip(&self.drift)
            .map(|(&(x, y), &a)| {
                let chi = self.mobility.chi(0.5 * (rho[x] + rho[y]));
                EdgeCost::Quadratic {
                    mobility: chi,
                    drift: -chi * (mu[y] - mu[x]) * inv_dx - chi * a,
                }
            })
            .collect())
    }

    /// `V(rho) = sum_x h(rho_x) - h(pi_x) - h'(pi_x) (rho_x - pi_x)`.
    pub fn quasipotential(&self, rho: &[f64]) -> Result<f64> {
        check_len("state", self.cells(), rho.len())?;
        let mob = self.mobility;
        Ok(neumaier_sum(rho.iter().zip(&self.pi).map(|(&r, &p)| {
            mob.h(r) - mob.h(p) - mob.h_prime(p) * (r - p)
        })))
    }

    /// `dV = h'(rho) - h'(pi)`, equal to `h'(rho) + U` up to a constant.
    pub fn quasipotential_gradient(&self, rho: &[f64]) -> Result<Vec<f64>> {
        self.check_state(rho)?;
        Ok(rho
            .iter()
            .zip(&self.pi)
            .map(|(&r, &p)| self.mobility.h_prime(r) - self.mobility.h_prime(p))
            .collect())
    }

    /// The same gas on a grid with `cells` cells, sampling `U` by nearest cell.
    pub fn refined(&self, cells: usize) -> Result<Self> {
        let m = self.cells();
        let pick = |v: &[f64], i: usize| v[(i * m) / cells];
        Self::new(
            self.mobility,
            (0..cells).map(|i| pick(&self.potential, i)).collect(),
            (0..cells).map(|i| pick(&self.spatial_drift, i)).collect(),
            self.mean_density,
        )
    }
}

/// Solves `h'(pi_x) + U_x = c` with `mean(pi) = mean_density`.
fn equilibrium(mobility: Mobility, potential: &[f64], mean_density: f64) -> Result<Vec<f64>> {
    let m = potential.len() as f64;
    match mobility {
        Mobility::Independent => {
            let w: Vec<f64> = potential.iter().map(|u| (-u).exp()).collect();
            let z = w.iter().sum::<f64>() / m;
            Ok(w.iter().map(|v| mean_density * v / z).collect())
        }
        Mobility::Exclusion => {
            let fermi = |c: f64, u: f64| 1.0 / (1.0 + (u - c).exp());
            let excess = |c: f64| potential.iter().map(|&u| fermi(c, u)).sum::<f64>() / m - mean_density;
            let span = potential.iter().fold(0.0_f64, |s, u| s.max(u.abs()));
            let lim = span + 50.0;
            let c = brent(excess, -lim, lim, 1e-15)?;
            Ok(potential.iter().map(|&u| fermi(c, u)).collect())
        }
    }
}
