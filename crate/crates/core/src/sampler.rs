//! Exact stochastic simulation of the n-particle processes, with density
//! and integrated net flux tracking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp1};
use rayon::prelude::*;

use crate::entropy::EdgeCost;
use crate::error::{check_len, Error, Result};
use crate::flows::{integrate_flow, FlowKind, IntegrateOptions};
use crate::models::Model;

/// Integer configuration: node or species counts and net jump counts per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParticleState {
    pub counts: Vec<i64>,
    /// Particle number, or system volume for reaction networks.
    pub n: u64,
    pub flux_counts: Vec<i64>,
}

impl ParticleState {
    pub fn density(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.n as f64).collect()
    }

    pub fn flux(&self) -> Vec<f64> {
        self.flux_counts.iter().map(|&w| w as f64 / self.n as f64).collect()
    }
}

/// Rounds `n rho` to integers with total `round(n sum rho)` by
/// largest-remainder apportionment.
pub fn initial_counts(rho: &[f64], n: u64) -> Result<Vec<i64>> {
    if n == 0 {
        return Err(Error::Domain("particle number must be positive".into()));
    }
    if let Some(r) = rho.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
        return Err(Error::Domain(format!("initial density has entry {r}")));
    }
    let scaled: Vec<f64> = rho.iter().map(|r| r * n as f64).collect();
    let total = scaled.iter().sum::<f64>().round() as i64;
    let mut counts: Vec<i64> = scaled.iter().map(|s| s.floor() as i64).collect();
    let mut order: Vec<usize> = (0..rho.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut missing = total - counts.iter().sum::<i64>();
    for &i in order.iter().cycle() {
        if missing <= 0 {
            break;
        }
        counts[i] += 1;
        missing -= 1;
    }
    Ok(counts)
}

#[derive(Debug, Clone)]
pub struct GillespieOptions {
    /// Number of equally spaced checkpoints in `[0, T]`, capped at 10^4.
    pub checkpoints: usize,
    /// Verify `counts = counts0 + dphi(flux_counts)` after every event.
    pub check_continuity: bool,
}

impl Default for GillespieOptions {
    fn default() -> Self {
        Self {
            checkpoints: 100,
            check_continuity: false,
        }
    }
}

pub const MAX_CHECKPOINTS: usize = 10_000;

/// Checkpointed path of one replica.
#[derive(Debug, Clone)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub states: Vec<ParticleState>,
    pub events: u64,
    /// Time at which the total rate vanished, if it did.
    pub absorbed_at: Option<f64>,
    /// Time integral of the density over `[0, T]`.
    pub occupation: Vec<f64>,
}

impl SamplePath {
    pub fn terminal(&self) -> &ParticleState {
        self.states.last().expect("path has a terminal state")
    }
}

fn edge_rates(model: &Model, rho: &[f64]) -> Result<Vec<(f64, f64)>> {
    model
        .edge_costs(rho)?
        .into_iter()
        .map(|c| match c {
            EdgeCost::Cosh(r) => Ok((r.forward, r.backward)),
            EdgeCost::Quadratic { .. } => Err(Error::Unsupported(
                "particle simulation needs jump rates; quadratic costs have none".into(),
            )),
        })
        .collect()
}

/// Simulates the n-particle process on `[0, t_final]` with the
/// exponential-clock construction. Edge `e` fires forward at rate
/// `n a_e(counts / n)` and backward at `n b_e(counts / n)`.
pub fn gillespie<R: Rng + ?Sized>(
    model: &Model,
    n: u64,
    rho0: &[f64],
    t_final: f64,
    rng: &mut R,
    opts: &GillespieOptions,
) -> Result<SamplePath> {
    check_len("initial state", model.state_dim(), rho0.len())?;
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::Domain(format!("final time {t_final} must be finite and non-negative")));
    }
    let dphi = model.continuity();
    let n_edges = model.flux_dim();
    let jumps: Vec<Vec<(usize, i64)>> = (0..n_edges).map(|e| dphi.jump(e)).collect();
    let counts0 = initial_counts(rho0, n)?;
    let mut state = ParticleState {
        counts: counts0.clone(),
        n,
        flux_counts: vec![0; n_edges],
    };
    let k = opts.checkpoints.clamp(1, MAX_CHECKPOINTS);
    let grid: Vec<f64> = (0..=k).map(|i| t_final * i as f64 / k as f64).collect();
    let mut path = SamplePath {
        times: Vec::with_capacity(k + 1),
        states: Vec::with_capacity(k + 1),
        events: 0,
        absorbed_at: None,
        occupation: vec![0.0; rho0.len()],
    };
    let nf = n as f64;
    let mut t = 0.0;
    let mut next_grid = 0;
    let mut intensities = vec![0.0; 2 * n_edges];
    loop {
        let rho = state.density();
        for (e, (a, b)) in edge_rates(model, &rho)?.into_iter().enumerate() {
            // A jump that would leave a negative count is disabled.
            let feasible = |sign: i64| jumps[e].iter().all(|&(x, d)| state.counts[x] + sign * d >= 0);
            intensities[2 * e] = if feasible(1) { nf * a } else { 0.0 };
            intensities[2 * e + 1] = if feasible(-1) { nf * b } else { 0.0 };
        }
        let total: f64 = intensities.iter().sum();
        let wait = if total > 0.0 {
            let u: f64 = Exp1.sample(rng);
            u / total
        } else {
            f64::INFINITY
        };
        let t_next = t + wait;
        while next_grid < grid.len() && grid[next_grid] <= t_next.min(t_final) {
            path.times.push(grid[next_grid]);
            path.states.push(state.clone());
            next_grid += 1;
        }
        let horizon = t_next.min(t_final);
        for (o, r) in path.occupation.iter_mut().zip(&rho) {
            *o += r * (horizon - t);
        }
        if total <= 0.0 {
            path.absorbed_at = Some(t);
            break;
        }
        if t_next > t_final {
            break;
        }
        let mut pick = rng.gen::<f64>() * total;
        let mut idx = intensities.len() - 1;
        for (i, w) in intensities.iter().enumerate() {
            if pick < *w {
                idx = i;
                break;
            }
            pick -= w;
        }
        while intensities[idx] == 0.0 {
            idx -= 1;
        }
        let (e, sign) = (idx / 2, if idx % 2 == 0 { 1 } else { -1 });
        for &(x, d) in &jumps[e] {
            state.counts[x] += sign * d;
        }
        state.flux_counts[e] += sign;
        path.events += 1;
        t = t_next;
        if opts.check_continuity {
            let mut expect = counts0.clone();
            for (e, &w) in state.flux_counts.iter().enumerate() {
                for &(x, d) in &jumps[e] {
                    expect[x] += w * d;
                }
            }
            if expect != state.counts {
                return Err(Error::ModelInvalid {
                    invariant: "continuity",
                    detail: format!("counts {:?} differ from {:?} after event {}", state.counts, expect, path.events),
                });
            }
        }
    }
    while next_grid < grid.len() {
        path.times.push(grid[next_grid]);
        path.states.push(state.clone());
        next_grid += 1;
    }
    Ok(path)
}

/// Generator for replica `replica` of a campaign seeded with `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Runs replicas in parallel; the result is ordered by replica index.
pub fn run_replicas(
    model: &Model,
    n: u64,
    rho0: &[f64],
    t_final: f64,
    replicas: usize,
    seed: u64,
    opts: &GillespieOptions,
) -> Result<Vec<SamplePath>> {
    (0..replicas)
        .into_par_iter()
        .map(|r| gillespie(model, n, rho0, t_final, &mut replica_rng(seed, r as u64), opts))
        .collect()
}

/// Replica statistics at one particle number.
#[derive(Debug, Clone)]
pub struct SampleStats {
    pub n: u64,
    pub times: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
    pub variance: Vec<Vec<f64>>,
    /// `|rho^(n)(T) - rho_ODE(T)|_1` per replica.
    pub terminal_errors: Vec<f64>,
    pub mean_error: f64,
    pub replicas: usize,
    pub seed: u64,
}

/// Per-time mean and unbiased variance of the density across replicas,
/// and terminal L1 errors against `reference`.
pub fn summarize(paths: &[SamplePath], reference: &[f64], seed: u64) -> Result<SampleStats> {
    let first = paths
        .first()
        .ok_or_else(|| Error::Domain("at least one replica is required".into()))?;
    let r = paths.len() as f64;
    let dim = reference.len();
    let times = first.times.clone();
    let mut mean = vec![vec![0.0; dim]; times.len()];
    let mut variance = vec![vec![0.0; dim]; times.len()];
    for (k, (m, v)) in mean.iter_mut().zip(variance.iter_mut()).enumerate() {
        let values: Vec<Vec<f64>> = paths.iter().map(|p| p.states[k].density()).collect();
        for x in 0..dim {
            let mu = values.iter().map(|d| d[x]).sum::<f64>() / r;
            m[x] = mu;
            v[x] = if paths.len() > 1 {
                values.iter().map(|d| (d[x] - mu).powi(2)).sum::<f64>() / (r - 1.0)
            } else {
                0.0
            };
        }
    }
    let terminal_errors: Vec<f64> = paths
        .iter()
        .map(|p| {
            p.terminal()
                .density()
                .iter()
                .zip(reference)
                .map(|(a, b)| (a - b).abs())
                .sum()
        })
        .collect();
    let mean_error = terminal_errors.iter().sum::<f64>() / r;
    Ok(SampleStats {
        n: first.terminal().n,
        times,
        mean,
        variance,
        terminal_errors,
        mean_error,
        replicas: paths.len(),
        seed,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Domain("slope needs at least two matched points".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if !(sxx > 0.0) || !sxy.is_finite() {
        return Err(Error::Domain("degenerate data for slope".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone)]
pub struct LlnReport {
    pub stats: Vec<SampleStats>,
    pub reference: Vec<f64>,
    pub slope: f64,
}

/// Terminal L1 error of the empirical density against the full flow for
/// each particle number, and the fitted log-log slope.
pub fn lln_error(
    model: &Model,
    ns: &[u64],
    rho0: &[f64],
    t_final: f64,
    replicas: usize,
    seed: u64,
) -> Result<LlnReport> {
    if ns.len() < 3 {
        return Err(Error::Domain("at least three particle numbers are required".into()));
    }
    let (lo, hi) = (*ns.iter().min().unwrap(), *ns.iter().max().unwrap());
    if (hi as f64) < 100.0 * lo as f64 {
        return Err(Error::Domain("particle numbers must span two decades".into()));
    }
    let reference = integrate_flow(model, &FlowKind::Full, rho0, t_final, &IntegrateOptions::default())?
        .final_state()
        .to_vec();
    let opts = GillespieOptions::default();
    let stats = ns
        .iter()
        .map(|&n| summarize(&run_replicas(model, n, rho0, t_final, replicas, seed, &opts)?, &reference, seed))
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let y: Vec<f64> = stats.iter().map(|s| s.mean_error).collect();
    Ok(LlnReport {
        slope: log_log_slope(&x, &y)?,
        stats,
        reference,
    })
}

/// I.i.d. multinomial `(n, pi) / n` samples.
pub fn sample_invariant<R: Rng + ?Sized>(model: &Model, n: u64, count: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let pi = match model {
        Model::Ipfg(m) => m.pi(),
        _ => {
            return Err(Error::Unsupported(format!(
                "invariant sampling needs a product-form model, got {}",
                model.family()
            )))
        }
    };
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut left = n;
        let mut mass = 1.0;
        let mut sample = vec![0.0; pi.len()];
        for (x, &p) in pi.iter().enumerate() {
            let k = if x + 1 == pi.len() || mass <= 0.0 {
                left
            } else {
                let q = (p / mass).clamp(0.0, 1.0);
                Binomial::new(left, q)
                    .map_err(|e| Error::Domain(e.to_string()))?
                    .sample(rng)
            };
            sample[x] = k as f64 / n as f64;
            left -= k;
            mass -= p;
        }
        out.push(sample);
    }
    Ok(out)
}

fn ln_factorial(k: u64) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

/// `-(1/n) log P(counts)` for the multinomial `(n, pi)` law.
pub fn multinomial_rate(pi: &[f64], counts: &[u64]) -> Result<f64> {
    check_len("counts", pi.len(), counts.len())?;
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(Error::Domain("counts must not all be zero".into()));
    }
    let mut log_p = ln_factorial(n);
    for (&k, &p) in counts.iter().zip(pi) {
        log_p -= ln_factorial(k);
        if k > 0 {
            log_p += k as f64 * p.ln();
        }
    }
    Ok(-log_p / n as f64)
}
