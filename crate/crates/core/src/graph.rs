//! Finite graphs with ordered half-edges, and the discrete gradient and
//! divergence that connect node and edge quantities.
//!
//! Each undirected edge is stored once as the half-edge `(x, y)` with
//! `x < y`. A flux `j_e` on `e = (x, y)` is the net flow from `x` to `y`.

use std::collections::HashMap;

use crate::error::{check_len, Error, Result};

/// Connected graph on `n` nodes with ordered half-edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
}

impl Graph {
    /// Builds a graph, rejecting unordered, duplicate or out-of-range half-edges.
    pub fn new(n_nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::Structural("graph has no nodes".into()));
        }
        let mut index = HashMap::with_capacity(edges.len());
        for (k, &(x, y)) in edges.iter().enumerate() {
            if x >= y {
                return Err(Error::Structural(format!(
                    "half-edge ({x}, {y}) is not ordered x < y"
                )));
            }
            if y >= n_nodes {
                return Err(Error::Structural(format!(
                    "half-edge ({x}, {y}) references a node outside 0..{n_nodes}"
                )));
            }
            if index.insert((x, y), k).is_some() {
                return Err(Error::Structural(format!("duplicate half-edge ({x}, {y})")));
            }
        }
        Ok(Self {
            n_nodes,
            edges,
            index,
        })
    }

    /// Complete graph on `n` nodes, edges in lexicographic order.
    pub fn complete(n: usize) -> Result<Self> {
        let edges = (0..n)
            .flat_map(|x| (x + 1..n).map(move |y| (x, y)))
            .collect();
        Self::new(n, edges)
    }

    /// Periodic one-dimensional grid: edges `(i, i+1)` and the wrap edge `(0, n-1)`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Structural("a cycle needs at least 3 nodes".into()));
        }
        let mut edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        edges.push((0, n - 1));
        Self::new(n, edges)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Index of the half-edge `(x, y)` with `x < y`, if present.
    pub fn edge_index(&self, x: usize, y: usize) -> Option<usize> {
        self.index.get(&(x, y)).copied()
    }

    pub fn is_connected(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.n_nodes).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut components = self.n_nodes;
        for &(x, y) in &self.edges {
            let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
            if rx != ry {
                parent[rx] = ry;
                components -= 1;
            }
        }
        components == 1
    }

    /// `(div j)_x = sum_{y>x} j_xy - sum_{y<x} j_yx`.
    pub fn divergence(&self, j: &[f64]) -> Result<Vec<f64>> {
        check_len("flux", self.edges.len(), j.len())?;
        let mut out = vec![0.0; self.n_nodes];
        for (&(x, y), &je) in self.edges.iter().zip(j) {
            out[x] += je;
            out[y] -= je;
        }
        Ok(out)
    }

    /// `(grad xi)_xy = xi_y - xi_x`.
    pub fn gradient(&self, xi: &[f64]) -> Result<Vec<f64>> {
        check_len("node function", self.n_nodes, xi.len())?;
        Ok(self.edges.iter().map(|&(x, y)| xi[y] - xi[x]).collect())
    }
}

/// Whether a density is constrained to the probability simplex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassConstraint {
    Probability,
    Free,
}

/// Non-negative state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    values: Vec<f64>,
    constraint: MassConstraint,
}

impl Density {
    /// Tolerance on `|sum - 1|` for probability densities.
    pub const MASS_TOL: f64 = 1e-12;

    pub fn new(values: Vec<f64>, constraint: MassConstraint) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Domain(format!("density entry {v} is negative or not finite")));
        }
        if constraint == MassConstraint::Probability {
            let s: f64 = values.iter().sum();
            if (s - 1.0).abs() > Self::MASS_TOL.max(values.len() as f64 * f64::EPSILON) {
                return Err(Error::Domain(format!("probability density sums to {s}")));
            }
        }
        Ok(Self { values, constraint })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn constraint(&self) -> MassConstraint {
        self.constraint
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// Whether every entry is at least `eps`.
    pub fn is_interior(&self, eps: f64) -> bool {
        interior_check(&self.values, eps).is_ok()
    }
}

impl std::ops::Deref for Density {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// Default interior margin.
pub const INTERIOR_EPS: f64 = 1e-9;

/// Fails with a domain error naming the first entry below `eps`.
pub fn interior_check(rho: &[f64], eps: f64) -> Result<()> {
    match rho.iter().position(|&r| !(r >= eps)) {
        None => Ok(()),
        Some(i) => Err(Error::Domain(format!(
            "state entry {i} = {} is below the interior margin {eps:e}",
            rho[i]
        ))),
    }
}
