//! Independent particles on a finite graph: the mean-field limit of
//! non-interacting Markov jump particles.

use crate::entropy::{rel_boltzmann, EdgeCost, EdgeRates};
use crate::error::{check_len, Error, Result};
use crate::models::generator::Generator;
use crate::numeric::neumaier_sum;

/// Tolerance on `max |Q^T pi|` relative to the largest rate.
pub const STATIONARITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Ipfg {
    generator: Generator,
    pi: Vec<f64>,
}

impl Ipfg {
    /// Model with the invariant measure computed from `Q`.
    pub fn new(generator: Generator) -> Result<Self> {
        let pi = generator.stationary_measure()?;
        Ok(Self { generator, pi })
    }

    /// Model with a supplied invariant measure, checked against `Q`.
    pub fn with_measure(generator: Generator, pi: Vec<f64>) -> Result<Self> {
        let m = Self::with_measure_unchecked(generator, pi)?;
        let scale = m.generator.matrix().amax().max(1.0);
        let r = m.generator.stationarity_residual(&m.pi);
        if r > STATIONARITY_TOL * scale {
            return Err(Error::ModelInvalid {
                invariant: "stationary",
                detail: format!("max |Q^T pi| = {r:e}"),
            });
        }
        Ok(m)
    }

    /// Model with a supplied measure that is only checked for shape and positivity.
    pub fn with_measure_unchecked(generator: Generator, pi: Vec<f64>) -> Result<Self> {
        check_len("invariant measure", generator.n_states(), pi.len())?;
        if pi.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::ModelInvalid {
                invariant: "positive-measure",
                detail: "pi must be strictly positive".into(),
            });
        }
        Ok(Self { generator, pi })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Generator::from_rows(rows)?)
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn n_states(&self) -> usize {
        self.pi.len()
    }

    pub fn edge_costs(&self, rho: &[f64]) -> Result<Vec<EdgeCost>> {
        check_len("state", self.n_states(), rho.len())?;
        let g = &self.generator;
        g.graph()
            .edges()
            .iter()
            .map(|&(x, y)| {
                Ok(EdgeCost::Cosh(EdgeRates::new(
                    rho[x] * g.rate(x, y),
                    rho[y] * g.rate(y, x),
                )?))
            })
            .collect()
    }

    /// `V(rho) = sum_x s(rho_x | pi_x)`.
    pub fn quasipotential(&self, rho: &[f64]) -> Result<f64> {
        check_len("state", self.n_states(), rho.len())?;
        Ok(neumaier_sum(rho.iter().zip(&self.pi).map(|(&r, &p)| rel_boltzmann(r, p))))
    }

    /// `dV = log(rho / pi)`.
    pub fn quasipotential_gradient(&self, rho: &[f64]) -> Result<Vec<f64>> {
        check_len("state", self.n_states(), rho.len())?;
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

    /// Time-reversed model with rates `pi_y Q_yx / pi_x`.
    pub fn reversed(&self) -> Result<Self> {
        let n = self.n_states();
        let q = nalgebra::DMatrix::from_fn(n, n, |x, y| {
            self.pi[y] * self.generator.rate(y, x) / self.pi[x]
        });
        Self::with_measure(Generator::new(q)?, self.pi.clone())
    }

    /// Model with each edge tilted by `a e^zeta`, `b e^-zeta`.
    pub fn tilted(&self, zeta: &[f64]) -> Result<Self> {
        Self::new(self.generator.tilted(zeta)?)
    }

    /// Whether `pi_x Q_xy = pi_y Q_yx` on every edge.
    pub fn is_detailed_balanced(&self, tol: f64) -> bool {
        self.generator.graph().edges().iter().all(|&(x, y)| {
            let (f, b) = (
                self.pi[x] * self.generator.rate(x, y),
                self.pi[y] * self.generator.rate(y, x),
            );
            (f - b).abs() <= tol * f.max(b)
        })
    }
}
