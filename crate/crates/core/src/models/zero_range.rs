//! Zero-range processes: particles leave site `x` at rate
//! `Q_xy pi_x eta_x(rho_x / pi_x)`.

use nalgebra::DMatrix;

use crate::entropy::{EdgeCost, EdgeRates};
use crate::error::{check_len, Error, Result};
use crate::models::eta::Eta;
use crate::models::generator::Generator;
use crate::models::ipfg::STATIONARITY_TOL;
use crate::numeric::{brent, neumaier_sum};

/// Tolerance on `|eta_x(1) - 1|`.
pub const ETA_NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroRange {
    generator: Generator,
    pi: Vec<f64>,
    eta: Vec<Eta>,
}

impl ZeroRange {
    /// Model with `Q^T pi = 0`, `sum pi = 1` and `eta_x(1) = 1` already in place.
    pub fn new(generator: Generator, pi: Vec<f64>, eta: Vec<Eta>) -> Result<Self> {
        check_len("invariant measure", generator.n_states(), pi.len())?;
        check_len("eta functions", generator.n_states(), eta.len())?;
        for e in &eta {
            e.validate()?;
        }
        if pi.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::ModelInvalid {
                invariant: "positive-measure",
                detail: "pi must be strictly positive".into(),
            });
        }
        let scale = generator.matrix().amax().max(1.0);
        let r = generator.stationarity_residual(&pi);
        if r > STATIONARITY_TOL * scale {
            return Err(Error::ModelInvalid {
                invariant: "stationary",
                detail: format!("max |Q^T pi| = {r:e}"),
            });
        }
        if let Some((x, e)) = eta
            .iter()
            .enumerate()
            .find(|(_, e)| (e.eval(1.0) - 1.0).abs() > ETA_NORMALIZATION_TOL)
        {
            return Err(Error::ModelInvalid {
                invariant: "eta-normalization",
                detail: format!("eta_{x}(1) = {}", e.eval(1.0)),
            });
        }
        Ok(Self { generator, pi, eta })
    }

    /// Model from `Q` and arbitrary `eta`, normalised so that `eta_x(1) = 1`.
    pub fn normalized(generator: Generator, eta: Vec<Eta>) -> Result<Self> {
        let pi = generator.stationary_measure()?;
        let (g, p, e) = normalize_zero_range(&generator, &pi, &eta)?;
        Self::new(g, p, e)
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn eta(&self) -> &[Eta] {
        &self.eta
    }

    pub fn n_states(&self) -> usize {
        self.pi.len()
    }

    /// `eta_x(rho_x / pi_x)` at every site.
    pub fn site_rates(&self, rho: &[f64]) -> Vec<f64> {
        rho.iter()
            .zip(&self.pi)
            .zip(&self.eta)
            .map(|((&r, &p), e)| e.eval(r / p))
            .collect()
    }

    pub fn edge_costs(&self, rho: &[f64]) -> Result<Vec<EdgeCost>> {
        check_len("state", self.n_states(), rho.len())?;
        if let Some(r) = rho.iter().find(|&&r| r < 0.0) {
            return Err(Error::Domain(format!("negative density {r}")));
        }
        let eta = self.site_rates(rho);
        let g = &self.generator;
        g.graph()
            .edges()
            .iter()
            .map(|&(x, y)| {
                Ok(EdgeCost::Cosh(EdgeRates::new(
                    g.rate(x, y) * self.pi[x] * eta[x],
                    g.rate(y, x) * self.pi[y] * eta[y],
                )?))
            })
            .collect()
    }

    /// `V(rho) = sum_x int_0^{rho_x} log eta_x(z / pi_x) dz + C` with `V(pi) = 0`.
    pub fn quasipotential(&self, rho: &[f64]) -> Result<f64> {
        check_len("state", self.n_states(), rho.len())?;
        Ok(neumaier_sum(rho.iter().zip(&self.pi).zip(&self.eta).map(
            |((&r, &p), e)| p * (e.log_integral(r / p) - e.log_integral(1.0)),
        )))
    }

    /// `dV = log eta(rho / pi)`.
    pub fn quasipotential_gradient(&self, rho: &[f64]) -> Result<Vec<f64>> {
        check_len("state", self.n_states(), rho.len())?;
        rho.iter()
            .zip(&self.pi)
            .zip(&self.eta)
            .map(|((&r, &p), e)| {
                if r > 0.0 {
                    Ok(e.eval(r / p).ln())
                } else {
                    Err(Error::Domain("log eta(rho/pi) needs rho > 0".into()))
                }
            })
            .collect()
    }

    /// `g_x(a) = int_0^a eta_x(b / pi_x)^{-1/2} db`.
    pub fn energy_primitive(&self, x: usize, a: f64) -> f64 {
        self.pi[x] * self.eta[x].inv_sqrt_integral(a / self.pi[x])
    }

    /// Model with jump rates `kappa_xy(rho) = q_xy f_x(rho_x)`, brought to
    /// normal form around its equilibrium.
    pub fn from_raw(q: Generator, f: Vec<Eta>) -> Result<Self> {
        check_len("site rate functions", q.n_states(), f.len())?;
        let p = q.stationary_measure()?;
        let eta = f
            .iter()
            .zip(&p)
            .map(|(fx, &px)| fx.rescaled(px, 1.0 / px))
            .collect();
        Self::normalized(q, eta)
    }

    /// Model with each edge tilted by `a e^zeta`, `b e^-zeta`, renormalised.
    pub fn tilted(&self, zeta: &[f64]) -> Result<Self> {
        let g = self.generator.tilted(zeta)?;
        let n = self.n_states();
        let mut q = DMatrix::from_fn(n, n, |x, y| if x == y { 0.0 } else { g.rate(x, y) * self.pi[x] });
        for x in 0..n {
            q[(x, x)] = -q.row(x).sum();
        }
        let f = self
            .eta
            .iter()
            .zip(&self.pi)
            .map(|(e, &p)| e.rescaled(1.0 / p, 1.0))
            .collect();
        Self::from_raw(Generator::new(q)?, f)
    }
}

/// Rescales `(Q, pi, eta)` so that `eta_x(1) = 1` without changing the jump rates.
///
/// With `s = e^{-lambda}` chosen so that `sum_x pi_x eta_x^{-1}(s) = 1`:
/// `pi'_x = pi_x eta_x^{-1}(s)`, `eta'_x(z) = eta_x(z eta_x^{-1}(s)) / s` and
/// `Q'_xy = Q_xy s / eta_x^{-1}(s)`.
pub fn normalize_zero_range(
    generator: &Generator,
    pi: &[f64],
    eta: &[Eta],
) -> Result<(Generator, Vec<f64>, Vec<Eta>)> {
    let n = generator.n_states();
    check_len("invariant measure", n, pi.len())?;
    check_len("eta functions", n, eta.len())?;
    for e in eta {
        e.validate()?;
    }
    let mass = |log_s: f64| -> f64 {
        let s = log_s.exp();
        pi.iter().zip(eta).map(|(&p, e)| p * e.inverse(s)).sum::<f64>() - 1.0
    };
    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    let mut tries = 0;
    while mass(lo) > 0.0 || mass(hi) < 0.0 {
        lo *= 2.0;
        hi *= 2.0;
        tries += 1;
        if tries > 12 {
            return Err(Error::ModelInvalid {
                invariant: "eta-normalization",
                detail: "could not bracket the normalisation multiplier".into(),
            });
        }
    }
    let log_s = brent(mass, lo, hi, 1e-15)?;
    let s = log_s.exp();
    let inv: Vec<f64> = eta.iter().map(|e| e.inverse(s)).collect();
    let new_pi: Vec<f64> = pi.iter().zip(&inv).map(|(p, i)| p * i).collect();
    let total: f64 = new_pi.iter().sum();
    let new_pi: Vec<f64> = new_pi.iter().map(|p| p / total).collect();
    let new_eta = eta
        .iter()
        .zip(&inv)
        .map(|(e, &i)| e.rescaled(i, 1.0 / s))
        .collect();
    let q = DMatrix::from_fn(n, n, |x, y| generator.rate(x, y) * s / inv[x]);
    Ok((Generator::new(q)?, new_pi, new_eta))
}
