//! Subcommand implementations.

use std::path::Path;

use fluxdec_core::decomposition::{decomposition_residuals, fir_gap, fisher, orthogonality, reversal_residual};
use fluxdec_core::flows::hamiltonian::{jacobi_residual_omega, poisson_rho, skewness};
use fluxdec_core::flows::phase::phase_portrait;
use fluxdec_core::flows::{integrate_flow, FlowKind, IntegrateOptions, TiltField, Tolerances};
use fluxdec_core::models::{
    fixtures, forces, quasipotential_identity_residual, tilt_rates, Mobility, Model,
};
use fluxdec_core::sampler::{log_log_slope, replica_rng, run_replicas, summarize, GillespieOptions, SamplePath};
use rand::Rng;

use crate::args::{FixturesArgs, FlowArgs, KindArg, PhaseArgs, SampleArgs, TiltArg, VerifyArgs};
use crate::model_file::{parse_model_spec, ModelSpec, Strictness};
use crate::output::{opt_real, real, write_atomic, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone)]
struct Check {
    name: String,
    lambda: Option<f64>,
    value: f64,
    threshold: f64,
    bound: Bound,
    skip: bool,
}

impl Check {
    fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.value <= self.threshold,
            Bound::AtLeast => self.value >= self.threshold,
        }
    }

    fn status(&self) -> &'static str {
        if self.skip {
            "skip"
        } else if self.passed() {
            "pass"
        } else {
            "fail"
        }
    }
}

fn check(name: impl Into<String>, lambda: Option<f64>, value: f64, threshold: f64, bound: Bound) -> Check {
    Check {
        name: name.into(),
        lambda,
        value,
        threshold,
        bound,
        skip: false,
    }
}

fn validate_lambdas(lambdas: &[f64]) -> Result<(), CliError> {
    if lambdas.is_empty() {
        return Err(CliError::Usage("--lambda needs at least one value".into()));
    }
    match lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        Some(l) => Err(CliError::Usage(format!("lambda = {l} is outside [0, 1]"))),
        None => Ok(()),
    }
}

fn curvature_scale(model: &Model, rho: &[f64]) -> Result<f64, CliError> {
    let mut s = 1.0;
    for c in model.edge_costs(rho)? {
        s += c.hamiltonian_curvature(0.0)?;
    }
    Ok(s)
}

fn run_checks(model: &Model, args: &VerifyArgs) -> Result<Vec<Check>, CliError> {
    let tol = args.tol;
    let mut rng = replica_rng(args.seed, 0);
    let points: Vec<(Vec<f64>, Vec<f64>)> = (0..args.points.max(1))
        .map(|_| {
            let rho = fixtures::random_interior_state(model, &mut rng);
            let j = fixtures::random_flux(model, &mut rng);
            (rho, j)
        })
        .collect();
    let nl = args.lambda.len();
    let mut identity = 0.0_f64;
    let mut decomposition = vec![[0.0_f64; 3]; nl];
    let mut fisher_min = vec![f64::INFINITY; nl];
    let mut ortho = 0.0_f64;
    let mut reversal = 0.0_f64;
    for (rho, j) in &points {
        identity = identity.max(quasipotential_identity_residual(model, rho)?.abs() / curvature_scale(model, rho)?);
        let ft = forces(model, rho)?;
        for (k, &lambda) in args.lambda.iter().enumerate() {
            for (slot, rep) in decomposition[k].iter_mut().zip(decomposition_residuals(model, rho, j, lambda)?) {
                *slot = slot.max(rep.residual.abs() / (1.0 + rep.lagrangian.abs()));
            }
            for g in [&ft.force, &ft.symmetric, &ft.antisymmetric] {
                fisher_min[k] = fisher_min[k].min(fisher(model, rho, g, lambda)?);
            }
        }
        let o = orthogonality(model, rho)?;
        for v in [o.theta_sym_asym, o.theta_asym_sym, o.split_asym, o.split_sym] {
            ortho = ortho.max(v.abs());
        }
        let l = fluxdec_core::models::lagrangian(model, rho, j)?;
        reversal = reversal.max(reversal_residual(model, rho, j)?.abs() / (1.0 + l.abs()));
    }
    let mut fir_min = vec![f64::INFINITY; nl];
    for (rho, j) in points.iter().take(25) {
        let u = model.continuity().apply(j)?;
        for (k, &lambda) in args.lambda.iter().enumerate() {
            fir_min[k] = fir_min[k].min(fir_gap(model, rho, &u, lambda)?);
        }
    }

    let inexact = matches!(model, Model::LatticeGas(l) if l.has_drift());
    let mut out = vec![Check {
        skip: inexact,
        ..check("quasipotential-identity", None, identity, tol, Bound::AtMost)
    }];
    for (k, &lambda) in args.lambda.iter().enumerate() {
        for (name, v) in ["decomposition-F", "decomposition-Fsym", "decomposition-Fasym"]
            .iter()
            .zip(decomposition[k])
        {
            out.push(check(*name, Some(lambda), v, tol, Bound::AtMost));
        }
    }
    for (k, &lambda) in args.lambda.iter().enumerate() {
        out.push(Check {
            skip: inexact,
            ..check("fisher-nonnegative", Some(lambda), fisher_min[k], -1e-3 * tol, Bound::AtLeast)
        });
    }
    out.push(Check {
        skip: inexact,
        ..check("orthogonality", None, ortho, tol, Bound::AtMost)
    });
    for (k, &lambda) in args.lambda.iter().enumerate() {
        out.push(Check {
            skip: inexact,
            ..check("fir-inequality", Some(lambda), fir_min[k], -tol, Bound::AtLeast)
        });
    }
    out.push(check("reversal", None, reversal, 10.0 * tol, Bound::AtMost));

    if matches!(model, Model::Ipfg(_) | Model::ZeroRange(_)) {
        let mut skew = 0.0_f64;
        for (rho, _) in points.iter().take(20) {
            skew = skew.max(skewness(&poisson_rho(model, rho)?));
        }
        out.push(check("poisson-skew", None, skew, 1e-3 * tol, Bound::AtMost));
    }
    if let Model::Ipfg(p) = model {
        let n = p.n_states();
        let mut jac = 0.0_f64;
        for _ in 0..20 {
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
            let g: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            jac = jac.max(jacobi_residual_omega(p, &w, [&g[0], &g[1], &g[2]])?.abs());
        }
        out.push(check("jacobi", None, jac, 10.0 * tol, Bound::AtMost));
    }
    Ok(out)
}

pub fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    validate_lambdas(&args.lambda)?;
    if !(args.tol > 0.0) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    let model = parse_model_spec(&args.model, Strictness::Lenient)?;
    let checks = run_checks(&model, args)?;
    let mut table = Table::new(["check", "lambda", "value", "threshold", "status"]);
    for c in &checks {
        table.push(vec![
            c.name.clone(),
            c.lambda.map(|l| l.to_string()).unwrap_or_default(),
            real(c.value),
            real(c.threshold),
            c.status().into(),
        ]);
    }
    table.write(args.out.as_deref())?;
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| c.status() == "fail")
        .map(|c| match c.lambda {
            Some(l) => format!("{} (lambda = {l})", c.name),
            None => c.name.clone(),
        })
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

fn integrate_options(tol: f64, dt: Option<f64>) -> Result<IntegrateOptions, CliError> {
    if !(tol > 0.0) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    Ok(IntegrateOptions {
        tolerances: Tolerances {
            rtol: tol,
            atol: 1e-2 * tol,
        },
        output_dt: dt,
        ..Default::default()
    })
}

/// Halfway between the equilibrium and a mass-preserving corner; a
/// sinusoidal bump for lattice gases.
fn default_rho0(model: &Model) -> Result<Vec<f64>, CliError> {
    let pi = model
        .equilibrium()
        .ok_or_else(|| CliError::Usage("--rho0 is required for this model".into()))?;
    Ok(match model {
        Model::LatticeGas(l) => {
            let m = pi.len() as f64;
            let top = pi.iter().copied().fold(0.0, f64::max);
            let amp = match l.mobility() {
                Mobility::Independent => 0.2,
                Mobility::Exclusion => 0.2 * (1.0_f64).min((1.0 - top) / top.max(1e-300)),
            };
            let raw: Vec<f64> = pi
                .iter()
                .enumerate()
                .map(|(k, p)| p * (1.0 + amp * (2.0 * std::f64::consts::PI * (k as f64 + 0.5) / m).sin()))
                .collect();
            let scale = pi.iter().sum::<f64>() / raw.iter().sum::<f64>();
            raw.iter().map(|v| v * scale).collect()
        }
        _ => {
            let mass: f64 = pi.iter().sum();
            let mut rho: Vec<f64> = pi.iter().map(|p| 0.5 * p).collect();
            rho[0] += 0.5 * mass;
            rho
        }
    })
}

fn flow_kind(kind: KindArg, lambda: f64, field: TiltArg) -> Result<FlowKind, CliError> {
    Ok(match kind {
        KindArg::Full => FlowKind::Full,
        KindArg::Sym => FlowKind::Symmetric,
        KindArg::Asym => FlowKind::Antisymmetric,
        KindArg::Tilted => {
            validate_lambdas(&[lambda])?;
            let field = match field {
                TiltArg::Force => TiltField::Force,
                TiltArg::Sym => TiltField::Symmetric,
                TiltArg::Asym => TiltField::Antisymmetric,
            };
            FlowKind::Tilted { field, lambda }
        }
    })
}

pub fn flow(args: &FlowArgs) -> Result<(), CliError> {
    let model = parse_model_spec(&args.model, Strictness::Strict)?;
    let kind = flow_kind(args.kind, args.lambda, args.tilt_field)?;
    let opts = integrate_options(args.tol, args.dt)?;
    let rho0 = match &args.rho0 {
        Some(r) => r.clone(),
        None => default_rho0(&model)?,
    };
    let tr = integrate_flow(&model, &kind, &rho0, args.t_final, &opts)?;
    let (n, e) = (model.state_dim(), model.flux_dim());
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|k| format!("rho_{k}")));
    header.extend((1..=e).map(|k| format!("j_{k}")));
    header.extend(["V", "E", "min_rho", "edi_residual"].map(String::from));
    let mut table = Table::new(header);
    for k in 0..tr.len() {
        let mut row = vec![real(tr.times[k])];
        row.extend(tr.states[k].iter().copied().map(real));
        row.extend(tr.fluxes[k].iter().copied().map(real));
        row.push(opt_real(tr.quasipotential[k]));
        row.push(opt_real(tr.energy[k]));
        row.push(real(tr.min_density[k]));
        row.push(opt_real(tr.edi[k]));
        table.push(row);
    }
    table.write(args.out.as_deref())?;
    if tr.boundary_hit {
        eprintln!("flow reached the boundary at t = {}", tr.final_time());
    }
    Ok(())
}

pub fn phase(args: &PhaseArgs) -> Result<(), CliError> {
    let model = parse_model_spec(&args.model, Strictness::Strict)?;
    if model.state_dim() != 3 {
        return Err(CliError::Usage("phase portraits need a three-state model".into()));
    }
    if !(args.dt > 0.0) {
        return Err(CliError::Usage("--dt must be positive".into()));
    }
    let opts = integrate_options(args.tol, Some(args.dt))?;
    let mut table = Table::new([
        "layer", "record", "arc", "t", "rho_1", "rho_2", "rho_3", "u_1", "u_2", "u_3", "V", "E", "period",
    ]);
    let dphi = model.continuity();
    for kind in [FlowKind::Full, FlowKind::Symmetric, FlowKind::Antisymmetric] {
        let portrait = phase_portrait(&model, &kind, args.grid, args.t_final, &opts)?;
        let layer = kind.name();
        for (p, u) in &portrait.field {
            let mut row = vec![layer.to_string(), "field".into(), String::new(), String::new()];
            row.extend(p.iter().copied().map(real));
            row.extend(u.iter().copied().map(real));
            row.extend([String::new(), String::new(), String::new()]);
            table.push(row);
        }
        for (a, arc) in portrait.arcs.iter().enumerate() {
            let tr = &arc.trajectory;
            let period = opt_real(arc.period.as_ref().map(|p| p.period));
            for k in 0..tr.len() {
                let mut row = vec![layer.to_string(), "arc".into(), a.to_string(), real(tr.times[k])];
                row.extend(tr.states[k].iter().copied().map(real));
                row.extend(dphi.apply(&tr.fluxes[k])?.into_iter().map(real));
                row.push(opt_real(tr.quasipotential[k]));
                row.push(opt_real(tr.energy[k]));
                row.push(period.clone());
                table.push(row);
            }
        }
    }
    table.write(args.out.as_deref())
}

pub fn sample(args: &SampleArgs) -> Result<(), CliError> {
    let base = match &args.model {
        Some(p) => parse_model_spec(p, Strictness::Strict)?,
        None => fixtures::two_state_ipfg(),
    };
    if args.n.is_empty() || args.n.contains(&0) {
        return Err(CliError::Usage("--n needs positive particle numbers".into()));
    }
    if args.replicas < 2 {
        return Err(CliError::Usage("--replicas must be at least 2".into()));
    }
    if !(args.t_final > 0.0) {
        return Err(CliError::Usage("--t-final must be positive".into()));
    }
    let model = match &args.tilt {
        Some(z) => tilt_rates(&base, z)?,
        None => base.clone(),
    };
    let rho0 = match &args.rho0 {
        Some(r) => r.clone(),
        None => {
            let pi = base.equilibrium().unwrap_or_default();
            let mut r = vec![0.0; pi.len()];
            r[0] = pi.iter().sum();
            r
        }
    };
    let reference = integrate_flow(&model, &FlowKind::Full, &rho0, args.t_final, &IntegrateOptions::default())?
        .final_state()
        .to_vec();
    let opts = GillespieOptions::default();
    let mut stats = Vec::with_capacity(args.n.len());
    let mut largest: Option<(u64, Vec<SamplePath>)> = None;
    for &n in &args.n {
        let paths = run_replicas(&model, n, &rho0, args.t_final, args.replicas, args.seed, &opts)?;
        stats.push(summarize(&paths, &reference, args.seed)?);
        if largest.as_ref().is_none_or(|(m, _)| n > *m) {
            largest = Some((n, paths));
        }
    }
    let mut ns: Vec<u64> = args.n.clone();
    ns.sort_unstable();
    ns.dedup();
    let slope = if ns.len() >= 2 {
        let x: Vec<f64> = stats.iter().map(|s| s.n as f64).collect();
        let y: Vec<f64> = stats.iter().map(|s| s.mean_error).collect();
        Some(log_log_slope(&x, &y)?)
    } else {
        None
    };
    let mut table = Table::new(["n", "mean_err", "var", "slope"]);
    for s in &stats {
        let var: f64 = s.variance.last().map_or(f64::NAN, |v| v.iter().sum());
        table.push(vec![s.n.to_string(), real(s.mean_error), real(var), opt_real(slope)]);
    }
    table.write(args.out.as_deref())?;

    if let (Some(path), Some((n, paths))) = (&args.paths, largest) {
        let dim = model.state_dim();
        let mut header = vec!["n".to_string(), "replica".into(), "t".into()];
        header.extend((1..=dim).map(|k| format!("rho_{k}")));
        let mut t = Table::new(header);
        for (r, p) in paths.iter().enumerate() {
            for (time, st) in p.times.iter().zip(&p.states) {
                let mut row = vec![n.to_string(), r.to_string(), real(*time)];
                row.extend(st.density().into_iter().map(real));
                t.push(row);
            }
        }
        t.write(Some(path))?;
    }
    Ok(())
}

pub fn write_fixtures(args: &FixturesArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out)?;
    for (name, model) in fixtures::bundled() {
        let json = ModelSpec::from_model(&model)?.to_json();
        let path = args.out.join(format!("{name}.json"));
        write_atomic(&path, |f| {
            use std::io::Write;
            writeln!(f, "{json}")?;
            Ok(())
        })?;
        eprintln!("wrote {}", display(&path));
    }
    Ok(())
}

fn display(p: &Path) -> String {
    p.display().to_string()
}
