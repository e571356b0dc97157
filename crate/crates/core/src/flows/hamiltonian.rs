//! Hamiltonian structure of antisymmetric flows: the skew matrix `A`, the
//! linear flow in `omega = sqrt(rho)` coordinates, conserved energies,
//! Poisson matrices and Jacobi-identity checks.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::models::{Generator, Ipfg, Model, ZeroRange};
use crate::numeric::{brent, neumaier_sum};

/// `A_xy = Q_yx sqrt(pi_y/pi_x) - Q_xy sqrt(pi_x/pi_y)`, zero on the diagonal.
pub fn skew_matrix(generator: &Generator, pi: &[f64]) -> DMatrix<f64> {
    let n = pi.len();
    DMatrix::from_fn(n, n, |x, y| {
        if x == y {
            0.0
        } else {
            generator.rate(y, x) * (pi[y] / pi[x]).sqrt() - generator.rate(x, y) * (pi[x] / pi[y]).sqrt()
        }
    })
}

fn skew_parts(model: &Model) -> Result<(DMatrix<f64>, &[f64])> {
    match model {
        Model::Ipfg(m) => Ok((skew_matrix(m.generator(), m.pi()), m.pi())),
        Model::ZeroRange(m) => Ok((skew_matrix(m.generator(), m.pi()), m.pi())),
        _ => Err(Error::Unsupported(format!(
            "Hamiltonian structure is available for ipfg and zero-range, not {}",
            model.family()
        ))),
    }
}

/// `sqrt(pi_x eta_x(rho_x / pi_x))`, which is `sqrt(rho_x)` for IPFG.
fn site_factors(model: &Model, rho: &[f64]) -> Result<Vec<f64>> {
    check_len("state", model.state_dim(), rho.len())?;
    match model {
        Model::Ipfg(_) => Ok(rho.iter().map(|r| r.max(0.0).sqrt()).collect()),
        Model::ZeroRange(m) => Ok(m
            .site_rates(rho)
            .iter()
            .zip(m.pi())
            .map(|(e, p)| (p * e).max(0.0).sqrt())
            .collect()),
        _ => Err(Error::Unsupported(model.family().into())),
    }
}

/// Closed-form antisymmetric vector field `sum_y A_xy sqrt(pi_x pi_y eta_x eta_y)`.
pub fn antisymmetric_field(model: &Model, rho: &[f64]) -> Result<Vec<f64>> {
    let (a, _) = skew_parts(model)?;
    let s = DVector::from_vec(site_factors(model, rho)?);
    let v = &a * &s;
    Ok(s.iter().zip(v.iter()).map(|(si, vi)| si * vi).collect())
}

/// Conserved energy: `1 - sum sqrt(pi rho)` for IPFG and
/// `1 - 1/2 sum_x g_x(rho_x)` for zero-range.
pub fn energy(model: &Model, rho: &[f64]) -> Result<f64> {
    check_len("state", model.state_dim(), rho.len())?;
    match model {
        Model::Ipfg(m) => Ok(1.0 - neumaier_sum(rho.iter().zip(m.pi()).map(|(r, p)| (r * p).sqrt()))),
        Model::ZeroRange(m) => Ok(1.0
            - 0.5 * neumaier_sum(rho.iter().enumerate().map(|(x, &r)| m.energy_primitive(x, r)))),
        _ => Err(Error::Unsupported(format!("no conserved energy for {}", model.family()))),
    }
}

/// `DE(rho)`.
pub fn energy_gradient(model: &Model, rho: &[f64]) -> Result<Vec<f64>> {
    check_len("state", model.state_dim(), rho.len())?;
    match model {
        Model::Ipfg(m) => Ok(rho.iter().zip(m.pi()).map(|(r, p)| -0.5 * (p / r).sqrt()).collect()),
        Model::ZeroRange(m) => Ok(m.site_rates(rho).iter().map(|e| -0.5 / e.sqrt()).collect()),
        _ => Err(Error::Unsupported(format!("no conserved energy for {}", model.family()))),
    }
}

fn zero_range_face_minimum(m: &ZeroRange, x: usize) -> Result<f64> {
    let pi = m.pi();
    let eta = m.eta();
    let others: Vec<usize> = (0..pi.len()).filter(|&z| z != x).collect();
    let mass = |log_s: f64| -> f64 {
        let s = log_s.exp();
        others.iter().map(|&z| pi[z] * eta[z].inverse(s)).sum::<f64>() - 1.0
    };
    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    while mass(lo) > 0.0 {
        lo *= 2.0;
        if lo < -1e4 {
            return Err(Error::Convergence("threshold multiplier not bracketed".into()));
        }
    }
    while mass(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::Convergence("threshold multiplier not bracketed".into()));
        }
    }
    let s = brent(mass, lo, hi, 1e-15)?.exp();
    let g: f64 = others
        .iter()
        .map(|&z| m.energy_primitive(z, pi[z] * eta[z].inverse(s)))
        .sum();
    Ok(1.0 - 0.5 * g)
}

/// Smallest energy on the boundary of the simplex.
pub fn threshold_sigma(model: &Model) -> Result<f64> {
    match model {
        Model::Ipfg(m) => Ok(m
            .pi()
            .iter()
            .map(|p| 1.0 - (1.0 - p).sqrt())
            .fold(f64::INFINITY, f64::min)),
        Model::ZeroRange(m) => {
            let mut best = f64::INFINITY;
            for x in 0..m.n_states() {
                best = best.min(zero_range_face_minimum(m, x)?);
            }
            Ok(best)
        }
        _ => Err(Error::Unsupported(format!("no energy threshold for {}", model.family()))),
    }
}

/// Linear flow `omega' = 1/2 A omega` sampled at given times.
#[derive(Debug, Clone)]
pub struct OmegaTrajectory {
    pub times: Vec<f64>,
    pub omega: Vec<Vec<f64>>,
    pub rho: Vec<Vec<f64>>,
    /// First time at which some `omega_x` reaches zero, if within the samples.
    pub boundary_time: Option<f64>,
}

fn omega_at(a: &DMatrix<f64>, w0: &DVector<f64>, t: f64) -> DVector<f64> {
    (a * (0.5 * t)).exp() * w0
}

/// Exact solution of the IPFG antisymmetric flow in `omega` coordinates.
pub fn omega_flow(model: &Ipfg, rho0: &[f64], times: &[f64]) -> Result<OmegaTrajectory> {
    check_len("initial state", model.n_states(), rho0.len())?;
    crate::graph::interior_check(rho0, 0.0)?;
    let a = skew_matrix(model.generator(), model.pi());
    let w0 = DVector::from_iterator(rho0.len(), rho0.iter().map(|r| r.sqrt()));
    let mut omega = Vec::with_capacity(times.len());
    let mut boundary_time = None;
    let mut prev_t = 0.0;
    for &t in times {
        let w = omega_at(&a, &w0, t);
        if boundary_time.is_none() && w.min() <= 0.0 {
            let (mut lo, mut hi) = (prev_t, t);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if omega_at(&a, &w0, mid).min() <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            boundary_time = Some(hi);
        }
        prev_t = t;
        omega.push(w.iter().copied().collect::<Vec<_>>());
    }
    let rho = omega.iter().map(|w| w.iter().map(|v| v * v).collect()).collect();
    Ok(OmegaTrajectory {
        times: times.to_vec(),
        omega,
        rho,
        boundary_time,
    })
}

/// Period `2 pi / |mu|` of the linear flow, where `+-i mu` are the nonzero
/// eigenvalues of `A/2` (three-state models).
pub fn omega_period(model: &Ipfg) -> Result<f64> {
    let a = skew_matrix(model.generator(), model.pi()) * 0.5;
    if a.nrows() != 3 {
        return Err(Error::Unsupported("closed-form period needs three states".into()));
    }
    let mu = (a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2)).sqrt();
    if mu == 0.0 {
        return Err(Error::Domain("A vanishes: the flow is stationary".into()));
    }
    Ok(2.0 * std::f64::consts::PI / mu)
}

/// `JJ~(omega) = (omega* (A omega)^T - (A omega) omega*^T) / (2 |omega*|^2)` with `omega* = sqrt(pi)`.
pub fn poisson_omega(model: &Ipfg, omega: &[f64]) -> Result<DMatrix<f64>> {
    check_len("omega", model.n_states(), omega.len())?;
    let a = skew_matrix(model.generator(), model.pi());
    let ws = DVector::from_iterator(omega.len(), model.pi().iter().map(|p| p.sqrt()));
    let aw = &a * DVector::from_column_slice(omega);
    let norm2 = ws.norm_squared();
    Ok((&ws * aw.transpose() - &aw * ws.transpose()) / (2.0 * norm2))
}

/// `JJ(rho)_xy = 2 s_x s_y sum_z s_z (sqrt(pi_x) A_yz - sqrt(pi_y) A_xz)` with
/// `s_x = sqrt(pi_x eta_x(rho_x / pi_x))`.
pub fn poisson_rho(model: &Model, rho: &[f64]) -> Result<DMatrix<f64>> {
    let (a, pi) = skew_parts(model)?;
    let s = DVector::from_vec(site_factors(model, rho)?);
    let sp = DVector::from_iterator(pi.len(), pi.iter().map(|p| p.sqrt()));
    let as_ = &a * &s;
    let n = pi.len();
    Ok(DMatrix::from_fn(n, n, |x, y| 2.0 * s[x] * s[y] * (sp[x] * as_[y] - sp[y] * as_[x])))
}

/// `max |J + J^T|`.
pub fn skewness(j: &DMatrix<f64>) -> f64 {
    (j + j.transpose()).amax()
}

fn cyclic_sum<F>(g: [&[f64]; 3], term: F) -> Result<f64>
where
    F: Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>) -> Result<f64>,
{
    let v: Vec<DVector<f64>> = g.iter().map(|x| DVector::from_column_slice(x)).collect();
    Ok(term(&v[0], &v[1], &v[2])? + term(&v[1], &v[2], &v[0])? + term(&v[2], &v[0], &v[1])?)
}

/// Jacobi residual of `JJ~` using `D JJ~[v] = JJ~(v)`.
pub fn jacobi_residual_omega(model: &Ipfg, omega: &[f64], g: [&[f64]; 3]) -> Result<f64> {
    let j = poisson_omega(model, omega)?;
    cyclic_sum(g, |g1, g2, g3| {
        let v = &j * g2;
        Ok(g1.dot(&(poisson_omega(model, v.as_slice())? * g3)))
    })
}

/// Jacobi residual of `JJ(rho)` with central-difference derivatives of step `h`.
pub fn jacobi_residual_fd(model: &Model, rho: &[f64], g: [&[f64]; 3], h: f64) -> Result<f64> {
    let j = poisson_rho(model, rho)?;
    let deriv = |v: &DVector<f64>| -> Result<DMatrix<f64>> {
        let plus: Vec<f64> = rho.iter().zip(v.iter()).map(|(r, d)| r + h * d).collect();
        let minus: Vec<f64> = rho.iter().zip(v.iter()).map(|(r, d)| r - h * d).collect();
        Ok((poisson_rho(model, &plus)? - poisson_rho(model, &minus)?) / (2.0 * h))
    };
    cyclic_sum(g, |g1, g2, g3| Ok(g1.dot(&(deriv(&(&j * g2))? * g3))))
}

/// A point and three covectors at which the Jacobi identity fails.
#[derive(Debug, Clone)]
pub struct JacobiWitness {
    pub rho: Vec<f64>,
    pub covectors: [Vec<f64>; 3],
    pub residual: f64,
}

/// Random search for a Jacobi violation larger than `threshold`.
pub fn find_jacobi_violation<R: Rng + ?Sized>(
    model: &Model,
    rng: &mut R,
    tries: usize,
    threshold: f64,
) -> Result<Option<JacobiWitness>> {
    let n = model.state_dim();
    let mut best: Option<JacobiWitness> = None;
    for _ in 0..tries {
        let rho = crate::models::fixtures::random_interior_state(model, rng);
        let g: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let r = jacobi_residual_fd(model, &rho, [&g[0], &g[1], &g[2]], 1e-5)?;
        if best.as_ref().is_none_or(|b| r.abs() > b.residual.abs()) {
            best = Some(JacobiWitness {
                rho,
                covectors: [g[0].clone(), g[1].clone(), g[2].clone()],
                residual: r,
            });
        }
    }
    Ok(best.filter(|b| b.residual.abs() > threshold))
}
