//! Deterministic flows generated by the full, symmetric, antisymmetric and
//! tilted costs, with monitors along trajectories.

pub mod hamiltonian;
pub mod phase;
pub mod rk45;

use crate::decomposition::{dissipation, dissipation_dual};
use crate::error::{check_len, Error, Result};
use crate::graph::interior_check;
use crate::models::{forces, ForceTriple, Model};
use crate::numeric::dot;

pub use rk45::Tolerances;

/// Covector used to tilt the full cost.
#[derive(Debug, Clone, PartialEq)]
pub enum TiltField {
    Force,
    Symmetric,
    Antisymmetric,
    /// A fixed covector on the edges.
    Constant(Vec<f64>),
}

impl TiltField {
    fn resolve<'a>(&'a self, ft: &'a ForceTriple) -> &'a [f64] {
        match self {
            TiltField::Force => &ft.force,
            TiltField::Symmetric => &ft.symmetric,
            TiltField::Antisymmetric => &ft.antisymmetric,
            TiltField::Constant(v) => v,
        }
    }
}

/// Which zero-cost flux drives the flow.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowKind {
    /// Zero-cost flux of `L`.
    Full,
    /// Zero-cost flux of `L_{Fsym}`.
    Symmetric,
    /// Zero-cost flux of `L_{Fasym}`.
    Antisymmetric,
    /// Zero-cost flux of `L_{F - 2 lambda G}`.
    Tilted { field: TiltField, lambda: f64 },
}

impl FlowKind {
    pub fn name(&self) -> &'static str {
        match self {
            FlowKind::Full => "full",
            FlowKind::Symmetric => "sym",
            FlowKind::Antisymmetric => "asym",
            FlowKind::Tilted { .. } => "tilted",
        }
    }

    /// Whether the flux is defined only in the interior.
    pub fn needs_interior(&self) -> bool {
        !matches!(self, FlowKind::Full)
    }
}

/// Flux of the flow `kind` at `rho`: `dH/dzeta (rho, G - F)` for the relevant tilt `G`.
pub fn flow_flux(model: &Model, kind: &FlowKind, rho: &[f64]) -> Result<Vec<f64>> {
    let costs = model.edge_costs(rho)?;
    let shift: Vec<f64> = match kind {
        FlowKind::Full => vec![0.0; costs.len()],
        FlowKind::Symmetric => forces(model, rho)?.antisymmetric.iter().map(|v| -v).collect(),
        FlowKind::Antisymmetric => forces(model, rho)?.symmetric.iter().map(|v| -v).collect(),
        FlowKind::Tilted { field, lambda } => {
            if !(0.0..=1.0).contains(lambda) {
                return Err(Error::Domain(format!("tilt parameter {lambda} outside [0, 1]")));
            }
            let ft = forces(model, rho)?;
            let g = field.resolve(&ft);
            check_len("tilt", costs.len(), g.len())?;
            g.iter().map(|v| -2.0 * lambda * v).collect()
        }
    };
    costs
        .iter()
        .zip(&shift)
        .map(|(c, &s)| c.hamiltonian_derivative(s))
        .collect()
}

/// Velocity `dphi j` of the flow `kind` at `rho`.
pub fn flow_velocity(model: &Model, kind: &FlowKind, rho: &[f64]) -> Result<Vec<f64>> {
    model.continuity().apply(&flow_flux(model, kind, rho)?)
}

#[derive(Debug, Clone)]
pub struct IntegrateOptions {
    pub tolerances: Tolerances,
    /// Record at multiples of this spacing; otherwise at every accepted step.
    pub output_dt: Option<f64>,
    /// Interior flows stop once some entry drops to this level.
    pub boundary_eps: f64,
    /// Margin required of the initial state for interior flows.
    pub interior_eps: f64,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            output_dt: None,
            boundary_eps: 1e-12,
            interior_eps: crate::graph::INTERIOR_EPS,
            max_steps: 10_000_000,
        }
    }
}

/// Sampled trajectory with per-sample monitors.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub kind: FlowKind,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub fluxes: Vec<Vec<f64>>,
    pub quasipotential: Vec<Option<f64>>,
    pub energy: Vec<Option<f64>>,
    /// `Phi + Phi*(Fsym) - <Fsym, j>` for symmetric flows.
    pub edi: Vec<Option<f64>>,
    pub min_density: Vec<f64>,
    pub boundary_hit: bool,
}

impl TrajectoryRecord {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least one sample")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one sample")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Pointwise EDI integrand `Phi(rho, j) + Phi*(rho, Fsym) - <Fsym, j>`.
pub fn edi_integrand(model: &Model, rho: &[f64], j: &[f64]) -> Result<f64> {
    let fsym = forces(model, rho)?.symmetric;
    Ok(dissipation(model, rho, j)? + dissipation_dual(model, rho, &fsym)? - dot(&fsym, j))
}

fn clamp_state(model: &Model, rho: &[f64], out: &mut Vec<f64>) {
    out.clear();
    let upper = match model {
        Model::LatticeGas(g) if g.mobility() == crate::models::Mobility::Exclusion => 1.0 - 1e-15,
        _ => f64::INFINITY,
    };
    out.extend(rho.iter().map(|&r| r.max(f64::MIN_POSITIVE).min(upper)));
}

fn record(model: &Model, kind: &FlowKind, rec: &mut TrajectoryRecord, t: f64, rho: &[f64]) -> Result<()> {
    let mut clamped = Vec::new();
    clamp_state(model, rho, &mut clamped);
    let j = flow_flux(model, kind, &clamped)?;
    let min = rho.iter().copied().fold(f64::INFINITY, f64::min);
    let interior = min > 0.0;
    rec.quasipotential.push(if interior { model.quasipotential(rho).ok() } else { None });
    rec.energy.push(if interior { hamiltonian::energy(model, rho).ok() } else { None });
    rec.edi.push(match kind {
        FlowKind::Symmetric if interior => edi_integrand(model, rho, &j).ok(),
        _ => None,
    });
    rec.min_density.push(min);
    rec.times.push(t);
    rec.states.push(rho.to_vec());
    rec.fluxes.push(j);
    Ok(())
}

/// Integrates `rho' = dphi j(rho)` for the flow `kind` on `[0, t_final]`.
pub fn integrate_flow(
    model: &Model,
    kind: &FlowKind,
    rho0: &[f64],
    t_final: f64,
    opts: &IntegrateOptions,
) -> Result<TrajectoryRecord> {
    check_len("initial state", model.state_dim(), rho0.len())?;
    if !(t_final >= 0.0) {
        return Err(Error::Domain(format!("final time {t_final} must be non-negative")));
    }
    if let Some(r) = rho0.iter().find(|r| !(**r >= 0.0)) {
        return Err(Error::Domain(format!("initial state has entry {r}")));
    }
    if kind.needs_interior() {
        interior_check(rho0, opts.interior_eps)?;
    }
    let mut rec = TrajectoryRecord {
        kind: kind.clone(),
        times: Vec::new(),
        states: Vec::new(),
        fluxes: Vec::new(),
        quasipotential: Vec::new(),
        energy: Vec::new(),
        edi: Vec::new(),
        min_density: Vec::new(),
        boundary_hit: false,
    };
    record(model, kind, &mut rec, 0.0, rho0)?;
    let dphi = model.continuity();
    let mut scratch = Vec::with_capacity(rho0.len());
    let mut rhs = |_t: f64, y: &[f64], out: &mut [f64]| -> Result<()> {
        clamp_state(model, y, &mut scratch);
        let v = dphi.apply(&flow_flux(model, kind, &scratch)?)?;
        out.copy_from_slice(&v);
        Ok(())
    };
    let mut solver = rk45::Dopri5::new(0.0, rho0.to_vec(), opts.tolerances);
    solver.max_steps = opts.max_steps;
    let eps = opts.boundary_eps;
    let interior = kind.needs_interior();
    let hits = |y: &[f64]| interior && y.iter().any(|&r| r <= eps);
    match opts.output_dt {
        Some(dt) if dt > 0.0 => {
            let n = (t_final / dt).round().max(1.0) as usize;
            for k in 1..=n {
                let target = if k == n { t_final } else { k as f64 * dt };
                let done = solver.advance_to(&mut rhs, target, |_, y| hits(y))?;
                record(model, kind, &mut rec, solver.t, &solver.y)?;
                if !done {
                    rec.boundary_hit = true;
                    break;
                }
            }
        }
        _ => {
            let mut samples: Vec<(f64, Vec<f64>)> = Vec::new();
            let done = solver.advance_to(&mut rhs, t_final, |t, y| {
                samples.push((t, y.to_vec()));
                hits(y)
            })?;
            for (t, y) in &samples {
                record(model, kind, &mut rec, *t, y)?;
            }
            rec.boundary_hit = !done;
        }
    }
    Ok(rec)
}

/// EDI monitors along a symmetric-flow trajectory.
#[derive(Debug, Clone)]
pub struct EdiReport {
    /// `L_{Fsym}(rho(t), j(t))` at every sample.
    pub pointwise: Vec<f64>,
    /// `1/2 dV/dt + Phi + Phi*(Fsym)` at interior samples, with `dV/dt`
    /// from central differences.
    pub chain_rule: Vec<f64>,
}

pub fn edi_residual(model: &Model, traj: &TrajectoryRecord) -> Result<EdiReport> {
    let n = traj.len();
    let mut pointwise = Vec::with_capacity(n);
    let mut dissip = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for (rho, j) in traj.states.iter().zip(&traj.fluxes) {
        let fsym = forces(model, rho)?.symmetric;
        let phi = dissipation(model, rho, j)?;
        let phi_star = dissipation_dual(model, rho, &fsym)?;
        pointwise.push(phi + phi_star - dot(&fsym, j));
        dissip.push(phi + phi_star);
        v.push(model.quasipotential(rho)?);
    }
    let chain_rule = (1..n.saturating_sub(1))
        .map(|k| {
            let dv = (v[k + 1] - v[k - 1]) / (traj.times[k + 1] - traj.times[k - 1]);
            0.5 * dv + dissip[k]
        })
        .collect();
    Ok(EdiReport {
        pointwise,
        chain_rule,
    })
}

/// First return to the section through `rho0` orthogonal to the initial velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodReport {
    pub period: f64,
    /// `|rho(period) - rho0|` (max norm).
    pub return_distance: f64,
}

/// Detects the period of a closed orbit by locating the first upward
/// crossing of `s(t) = <v0, rho(t) - rho0>` after `s` has become negative,
/// refined by bisection.
pub fn detect_period(
    model: &Model,
    kind: &FlowKind,
    rho0: &[f64],
    t_max: f64,
    opts: &IntegrateOptions,
) -> Result<Option<PeriodReport>> {
    let v0 = flow_velocity(model, kind, rho0)?;
    let vnorm = dot(&v0, &v0).sqrt();
    if vnorm == 0.0 {
        return Ok(None);
    }
    let section = |y: &[f64]| -> f64 {
        v0.iter().zip(y).zip(rho0).map(|((v, a), b)| v * (a - b)).sum::<f64>() / vnorm
    };
    let dphi = model.continuity();
    let mut scratch = Vec::new();
    let mut rhs = |_t: f64, y: &[f64], out: &mut [f64]| -> Result<()> {
        clamp_state(model, y, &mut scratch);
        out.copy_from_slice(&dphi.apply(&flow_flux(model, kind, &scratch)?)?);
        Ok(())
    };
    let mut solver = rk45::Dopri5::new(0.0, rho0.to_vec(), opts.tolerances);
    let eps = opts.boundary_eps;
    let mut went_negative = false;
    let mut prev: (f64, Vec<f64>, f64) = (0.0, rho0.to_vec(), 0.0);
    let mut crossing: Option<((f64, Vec<f64>), f64)> = None;
    let mut boundary = false;
    solver.advance_to(&mut rhs, t_max, |t, y| {
        if y.iter().any(|&r| r <= eps) {
            boundary = true;
            return true;
        }
        let s = section(y);
        if s < 0.0 {
            went_negative = true;
        } else if went_negative && prev.2 < 0.0 {
            crossing = Some(((prev.0, prev.1.clone()), t));
            return true;
        }
        prev = (t, y.to_vec(), s);
        false
    })?;
    if boundary {
        return Ok(None);
    }
    let Some(((t_lo, y_lo), t_hi)) = crossing else {
        return Ok(None);
    };
    let mut state_at = |t: f64| -> Result<Vec<f64>> {
        let mut s = rk45::Dopri5::new(t_lo, y_lo.clone(), opts.tolerances);
        s.advance_to(&mut rhs, t, |_, _| false)?;
        Ok(s.y)
    };
    let (mut a, mut b) = (t_lo, t_hi);
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        if section(&state_at(mid)?) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= 1e-13 * b.max(1.0) {
            break;
        }
    }
    let period = 0.5 * (a + b);
    let y = state_at(period)?;
    let return_distance = y.iter().zip(rho0).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(Some(PeriodReport {
        period,
        return_distance,
    }))
}
