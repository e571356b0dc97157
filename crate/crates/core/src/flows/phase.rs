//! Phase portraits of three-state models: direction fields and arcs from
//! a barycentric grid of initial states.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flows::{detect_period, flow_velocity, integrate_flow, FlowKind, IntegrateOptions, PeriodReport, TrajectoryRecord};
use crate::models::Model;

/// Interior points `(i, j, k) / n` with `i + j + k = n` and all indices positive.
pub fn barycentric_grid(n: usize) -> Vec<[f64; 3]> {
    let mut pts = Vec::new();
    for i in 1..n {
        for j in 1..n - i {
            let k = n - i - j;
            pts.push([i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64]);
        }
    }
    pts
}

#[derive(Debug, Clone)]
pub struct PhaseArc {
    pub start: [f64; 3],
    pub trajectory: TrajectoryRecord,
    /// Closed-orbit data for antisymmetric arcs that stay interior.
    pub period: Option<PeriodReport>,
}

#[derive(Debug, Clone)]
pub struct PhasePortrait {
    pub kind: FlowKind,
    /// `(state, velocity)` at each grid point.
    pub field: Vec<([f64; 3], Vec<f64>)>,
    pub arcs: Vec<PhaseArc>,
}

/// Direction field and arcs of length `t_final` for one flow kind.
pub fn phase_portrait(
    model: &Model,
    kind: &FlowKind,
    grid: usize,
    t_final: f64,
    opts: &IntegrateOptions,
) -> Result<PhasePortrait> {
    if model.state_dim() != 3 {
        return Err(Error::Unsupported("phase portraits need three states".into()));
    }
    if grid < 3 {
        return Err(Error::Domain("grid resolution must be at least 3".into()));
    }
    let points = barycentric_grid(grid);
    let field = points
        .iter()
        .map(|p| Ok((*p, flow_velocity(model, kind, p)?)))
        .collect::<Result<Vec<_>>>()?;
    let arcs = points
        .par_iter()
        .map(|p| {
            let trajectory = integrate_flow(model, kind, p, t_final, opts)?;
            let period = if matches!(kind, FlowKind::Antisymmetric) && !trajectory.boundary_hit {
                detect_period(model, kind, p, t_final, opts)?
            } else {
                None
            };
            Ok(PhaseArc {
                start: *p,
                trajectory,
                period,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhasePortrait {
        kind: kind.clone(),
        field,
        arcs,
    })
}
