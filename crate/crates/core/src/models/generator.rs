//! Validated Markov generators and their invariant measures.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Generator matrix `Q` with non-negative off-diagonal rates, zero row sums
/// and symmetric support, together with the graph of its positive rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    q: DMatrix<f64>,
    graph: Graph,
}

impl Generator {
    /// Row-sum tolerance relative to the largest rate.
    pub const ROW_SUM_TOL: f64 = 1e-10;

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::Structural("generator needs at least two states".into()));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::Dimension {
                what: "generator row",
                expected: n,
                got: r.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        let n = q.nrows();
        if q.ncols() != n {
            return Err(Error::Structural("generator is not square".into()));
        }
        let scale = q.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        let mut edges = Vec::new();
        for x in 0..n {
            let mut row = 0.0;
            for y in 0..n {
                let v = q[(x, y)];
                if !v.is_finite() {
                    return Err(Error::Domain(format!("Q[{x}][{y}] is not finite")));
                }
                if x != y && v < 0.0 {
                    return Err(Error::ModelInvalid {
                        invariant: "non-negative-rates",
                        detail: format!("Q[{x}][{y}] = {v}"),
                    });
                }
                row += v;
            }
            if row.abs() > Self::ROW_SUM_TOL * scale * n as f64 {
                return Err(Error::ModelInvalid {
                    invariant: "row-sum",
                    detail: format!("row {x} sums to {row:e}"),
                });
            }
            for y in x + 1..n {
                let (f, b) = (q[(x, y)], q[(y, x)]);
                if (f > 0.0) != (b > 0.0) {
                    return Err(Error::ModelInvalid {
                        invariant: "reversible-support",
                        detail: format!("Q[{x}][{y}] = {f} but Q[{y}][{x}] = {b}"),
                    });
                }
                if f > 0.0 {
                    edges.push((x, y));
                }
            }
        }
        let graph = Graph::new(n, edges)?;
        Ok(Self { q, graph })
    }

    pub fn n_states(&self) -> usize {
        self.q.nrows()
    }

    pub fn rate(&self, x: usize, y: usize) -> f64 {
        self.q[(x, y)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_states())
            .map(|i| self.q.row(i).iter().copied().collect())
            .collect()
    }

    /// Generator with rates `Q_xy e^{zeta_e}` and `Q_yx e^{-zeta_e}` on each edge.
    pub fn tilted(&self, zeta: &[f64]) -> Result<Self> {
        crate::error::check_len("tilt", self.graph.n_edges(), zeta.len())?;
        let mut q = self.q.clone();
        for (&(x, y), &z) in self.graph.edges().iter().zip(zeta) {
            q[(x, y)] *= z.exp();
            q[(y, x)] *= (-z).exp();
        }
        for x in 0..q.nrows() {
            q[(x, x)] = 0.0;
            let s: f64 = q.row(x).iter().sum();
            q[(x, x)] = -s;
        }
        Self::new(q)
    }

    /// Residual `max_y |(Q^T pi)_y|`.
    pub fn stationarity_residual(&self, pi: &[f64]) -> f64 {
        let p = DVector::from_column_slice(pi);
        (self.q.transpose() * p).amax()
    }

    /// Unique strictly positive probability vector with `Q^T pi = 0`.
    pub fn stationary_measure(&self) -> Result<Vec<f64>> {
        if !self.graph.is_connected() {
            return Err(Error::NoUniqueMeasure("generator is reducible".into()));
        }
        let n = self.n_states();
        let mut m = self.q.transpose();
        for j in 0..n {
            m[(n - 1, j)] = 1.0;
        }
        let mut rhs = DVector::zeros(n);
        rhs[n - 1] = 1.0;
        let pi = m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::NoUniqueMeasure("singular stationarity system".into()))?;
        if pi.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::NoUniqueMeasure("invariant measure is not positive".into()));
        }
        let s = pi.sum();
        Ok(pi.iter().map(|p| p / s).collect())
    }
}
