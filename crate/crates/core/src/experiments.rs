//! Trajectory-level studies: the vanishing-viscosity ladder, two-solution
//! stability through the difference good unknowns, and the matching
//! conditions for the outer flow.

use std::sync::Arc;
use std::thread;

use crate::error::{Error, Result};
use crate::field::{divide, Field};
use crate::grid::Grid;
use crate::norms::{conormal_sq, weighted_l2_sq, NormSpec};
use crate::pde::time_jet;
use crate::solver::{Solver, SolverConfig, StopReason, Trajectory};
use crate::sources::{bootstrap_time_derivatives, SourceBundle};
use crate::state::{Physics, State};

/// Default viscosity ladder.
pub const SWEEP_LADDER: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
/// Order and weight of the norm used for ladder differences.
pub const SWEEP_NORM: NormSpec = NormSpec { m: 2, l: 0.0, set: crate::norms::IndexSet::Full };
/// Added to squared norms before taking logarithms in the growth fit.
pub const GRONWALL_FLOOR: f64 = 1e-28;
/// Relative slack of the fitted envelope.
pub const GRONWALL_TOLERANCE: f64 = 0.05;
/// Times closer than this are treated as the same output instant.
const TIME_MATCH: f64 = 1e-9;

/// Compatibility sources bootstrapped from the physical fields of `initial`.
pub fn sources_for(initial: &State, depth: usize) -> Result<Arc<SourceBundle>> {
    let b = bootstrap_time_derivatives(
        &initial.density(),
        &initial.velocity(),
        &initial.magnetic(),
        depth,
        initial.physics,
    )?;
    Ok(Arc::new(b))
}

/// Runs the solver on every configuration, at most `workers` at a time
/// (`0` means all at once), keeping input order.
fn run_all(jobs: Vec<(SolverConfig, State, Option<Arc<SourceBundle>>)>, workers: usize) -> Vec<Result<Trajectory>> {
    let width = if workers == 0 { jobs.len().max(1) } else { workers };
    let mut out = Vec::with_capacity(jobs.len());
    for batch in jobs.chunks(width) {
        thread::scope(|scope| {
            let handles: Vec<_> = batch
                .iter()
                .map(|(cfg, s0, src)| scope.spawn(move || Solver::new(*cfg).with_sources(src.clone()).run(s0)))
                .collect();
            out.extend(handles.into_iter().map(|h| h.join().expect("solver thread panicked")));
        })
    }
    out
}

/// Indices `(i, j)` of output times shared by two trajectories.
fn matched_times(a: &Trajectory, b: &Trajectory) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut j = 0;
    for (i, sa) in a.states.iter().enumerate() {
        while j < b.states.len() && b.states[j].time < sa.time - TIME_MATCH {
            j += 1;
        }
        if j < b.states.len() && (b.states[j].time - sa.time).abs() <= TIME_MATCH {
            out.push((i, j));
        }
    }
    out
}

/// States of a trajectory on which the monitors held.
fn unbreached(traj: &Trajectory) -> &[State] {
    match traj.stop {
        StopReason::Completed => &traj.states,
        StopReason::Breach { .. } => &traj.states[..traj.states.len() - 1],
    }
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub eps: f64,
    /// The run completed without breaching a monitor.
    pub valid: bool,
    pub unbreached_until: f64,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub eps_ladder: Vec<f64>,
    pub entries: Vec<SweepEntry>,
    /// Output times at which all rungs are compared.
    pub times: Vec<f64>,
    /// `pairwise_diffs[k][i]`: difference between rungs `k` and `k + 1` at `times[i]`.
    pub pairwise_diffs: Vec<Vec<f64>>,
    /// Reduction factor `diff[k] / diff[k + 1]` at the last common time.
    pub rates: Vec<f64>,
    /// Geometric mean of `rates`; `None` when fewer than two differences exist.
    pub fitted_rate: Option<f64>,
}

impl SweepResult {
    /// Differences strictly decrease down the ladder at every compared time
    /// after the start. `None` with fewer than two differences.
    pub fn strictly_decreasing(&self) -> Option<bool> {
        if self.pairwise_diffs.len() < 2 {
            return None;
        }
        let t0 = self.times.first().copied().unwrap_or(0.0);
        let ok = (0..self.times.len())
            .filter(|&i| self.times[i] > t0 + TIME_MATCH)
            .all(|i| self.pairwise_diffs.windows(2).all(|w| w[1][i] < w[0][i]));
        Some(ok)
    }

    pub fn rates_summary(&self) -> String {
        match self.fitted_rate {
            Some(r) => format!("{r:.6}"),
            None => "not computed".to_string(),
        }
    }
}

/// Conormal distance between two states, time derivatives from each state's
/// own equations.
pub fn conormal_distance(a: &State, b: &State, spec: NormSpec) -> Result<f64> {
    let ja = time_jet(a, spec.m)?;
    let jb = time_jet(b, spec.m)?;
    let mut total = 0.0;
    for (la, lb) in [(&ja.rho, &jb.rho), (&ja.u, &jb.u), (&ja.h, &jb.h)] {
        let diff: Vec<Field> = la.iter().zip(lb.iter()).map(|(x, y)| x - y).collect();
        total += conormal_sq(&diff, spec)?;
    }
    Ok(total.sqrt())
}

/// Runs the regularized system for each viscosity in `ladder` (strictly
/// decreasing) from the same data and compares neighbouring rungs.
pub fn eps_sweep(initial: &State, template: &SolverConfig, ladder: &[f64], source_depth: usize) -> Result<SweepResult> {
    eps_sweep_with_workers(initial, template, ladder, source_depth, 0)
}

/// [`eps_sweep`] with at most `workers` concurrent runs (`0`: one per rung).
pub fn eps_sweep_with_workers(
    initial: &State,
    template: &SolverConfig,
    ladder: &[f64],
    source_depth: usize,
    workers: usize,
) -> Result<SweepResult> {
    if ladder.is_empty() {
        return Err(Error::InvalidInput("viscosity ladder is empty".into()));
    }
    if ladder.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) || ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput(format!("ladder must be strictly decreasing in (0, 1], got {ladder:?}")));
    }
    let sources = sources_for(initial, source_depth)?;
    let jobs = ladder
        .iter()
        .map(|&eps| {
            let mut cfg = *template;
            cfg.physics = template.physics.with_eps(eps);
            let mut s0 = initial.clone();
            s0.physics = cfg.physics;
            (cfg, s0, Some(sources.clone()))
        })
        .collect();
    let runs: Vec<Trajectory> = run_all(jobs, workers).into_iter().collect::<Result<_>>()?;
    let entries = ladder
        .iter()
        .zip(&runs)
        .map(|(&eps, t)| SweepEntry {
            eps,
            valid: matches!(t.stop, StopReason::Completed),
            unbreached_until: t.unbreached_until(),
            steps: t.steps,
        })
        .collect();

    // times present in every run before any breach
    let mut times: Vec<f64> = unbreached(&runs[0]).iter().map(|s| s.time).collect();
    for r in &runs[1..] {
        let other: Vec<f64> = unbreached(r).iter().map(|s| s.time).collect();
        times.retain(|t| other.iter().any(|o| (o - t).abs() <= TIME_MATCH));
    }
    fn find(traj: &Trajectory, t: f64) -> &State {
        traj.states.iter().find(|s| (s.time - t).abs() <= TIME_MATCH).expect("matched time")
    }
    let mut pairwise_diffs = Vec::new();
    for w in runs.windows(2) {
        let row = times
            .iter()
            .map(|&t| conormal_distance(find(&w[0], t), find(&w[1], t), SWEEP_NORM))
            .collect::<Result<Vec<_>>>()?;
        pairwise_diffs.push(row);
    }
    let rates: Vec<f64> =
        pairwise_diffs.windows(2).map(|w| w[0].last().unwrap_or(&0.0) / w[1].last().unwrap_or(&0.0)).collect();
    let fitted_rate = if rates.is_empty() {
        None
    } else {
        Some((rates.iter().map(|r| r.ln()).sum::<f64>() / rates.len() as f64).exp())
    };
    Ok(SweepResult { eps_ladder: ladder.to_vec(), entries, times, pairwise_diffs, rates, fitted_rate })
}

/// Good unknowns of the difference of two solutions:
/// `w_i = w_bar - eta_w phi_bar` with `phi_bar = int_0^y h_bar` and weights
/// `eta = d_y (rho2, u2, h2) / h2` from the second (physical) solution.
#[derive(Debug, Clone)]
pub struct DiffGoodUnknowns {
    pub time: f64,
    pub eta1: Field,
    pub eta2: Field,
    pub eta3: Field,
    pub phi_bar: Field,
    pub rho_bar: Field,
    pub u_bar: Field,
    pub h_bar: Field,
    pub rho_i: Field,
    pub u_i: Field,
    pub h_i: Field,
}

impl DiffGoodUnknowns {
    pub fn reconstruction_defect(&self) -> f64 {
        [
            (&self.rho_bar, &self.rho_i, &self.eta1),
            (&self.u_bar, &self.u_i, &self.eta2),
            (&self.h_bar, &self.h_i, &self.eta3),
        ]
        .iter()
        .map(|(bar, i, eta)| (*bar - &(*i + &(*eta * &self.phi_bar))).max_abs())
        .fold(0.0, f64::max)
    }

    /// `||(rho_i, u_i, h_i)||^2_{L^2}`.
    pub fn norm_sq(&self) -> f64 {
        weighted_l2_sq(&self.rho_i, 0.0) + weighted_l2_sq(&self.u_i, 0.0) + weighted_l2_sq(&self.h_i, 0.0)
    }

    /// `||(rho_bar, u_bar, h_bar)||^2_{L^2}`.
    pub fn raw_norm_sq(&self) -> f64 {
        weighted_l2_sq(&self.rho_bar, 0.0) + weighted_l2_sq(&self.u_bar, 0.0) + weighted_l2_sq(&self.h_bar, 0.0)
    }
}

pub fn diff_good_unknowns(first: &State, second: &State, delta_floor: f64) -> Result<DiffGoodUnknowns> {
    if !Arc::ptr_eq(&first.grid, &second.grid) && first.grid.y() != second.grid.y() {
        return Err(Error::InvalidInput("the two solutions live on different grids".into()));
    }
    let h2 = second.magnetic();
    let min = h2.min();
    if !(delta_floor > 0.0) || !(min >= delta_floor) {
        return Err(Error::MagneticFloor { min, floor: delta_floor });
    }
    let eta1 = divide(&second.rho.dy(), &h2);
    let eta2 = divide(&second.shear(), &h2);
    let eta3 = divide(&second.h.dy(), &h2);
    let rho_bar = &first.rho - &second.rho;
    let u_bar = &first.u - &second.u;
    let h_bar = &first.h - &second.h;
    let phi_bar = h_bar.cumulative_y();
    Ok(DiffGoodUnknowns {
        time: first.time,
        rho_i: &rho_bar - &(&eta1 * &phi_bar),
        u_i: &u_bar - &(&eta2 * &phi_bar),
        h_i: &h_bar - &(&eta3 * &phi_bar),
        eta1,
        eta2,
        eta3,
        phi_bar,
        rho_bar,
        u_bar,
        h_bar,
    })
}

/// Least-squares line `log(n + floor) ~ a + c t`; returns `(a, c)`.
pub fn log_linear_fit(times: &[f64], values: &[f64]) -> (f64, f64) {
    let n = times.len() as f64;
    let logs: Vec<f64> = values.iter().map(|v| (v + GRONWALL_FLOOR).ln()).collect();
    let mt = times.iter().sum::<f64>() / n;
    let ml = logs.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, l) in times.iter().zip(&logs) {
        sxy += (t - mt) * (l - ml);
        sxx += (t - mt) * (t - mt);
    }
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (ml - c * mt, c)
}

#[derive(Debug, Clone)]
pub struct StabilityResult {
    pub times: Vec<f64>,
    /// `||(rho_i, u_i, h_i)||^2` per time.
    pub norm_sq: Vec<f64>,
    /// Raw difference `||(rho_bar, u_bar, h_bar)||^2` per time.
    pub raw_norm_sq: Vec<f64>,
    /// Largest reconstruction defect over the series.
    pub reconstruction_defect: f64,
    /// Fitted growth rate of the squared norm.
    pub gronwall_c: f64,
    /// `max (n(t) + floor) / ((n(0) + floor) e^{C t})`.
    pub envelope_ratio: f64,
    pub envelope_ok: bool,
    /// Both runs completed without a monitor breach.
    pub unbreached: bool,
}

/// Evolves two data sets with the same configuration and tracks the
/// difference good unknowns on the common unbreached interval.
pub fn stability_pair(
    first: &State,
    second: &State,
    cfg: &SolverConfig,
    sources: Option<(Arc<SourceBundle>, Arc<SourceBundle>)>,
) -> Result<StabilityResult> {
    stability_pair_with_workers(first, second, cfg, sources, 0)
}

/// [`stability_pair`] with the two runs executed `workers` at a time.
pub fn stability_pair_with_workers(
    first: &State,
    second: &State,
    cfg: &SolverConfig,
    sources: Option<(Arc<SourceBundle>, Arc<SourceBundle>)>,
    workers: usize,
) -> Result<StabilityResult> {
    let (s1, s2) = match sources {
        Some((a, b)) => (Some(a), Some(b)),
        None => (None, None),
    };
    let runs = run_all(vec![(*cfg, first.clone(), s1), (*cfg, second.clone(), s2)], workers);
    let mut runs = runs.into_iter();
    let a = runs.next().expect("two runs")?;
    let b = runs.next().expect("two runs")?;
    let completed = matches!(a.stop, StopReason::Completed) && matches!(b.stop, StopReason::Completed);
    let floor = cfg.delta0 / 2.0;
    let (la, lb) = (unbreached(&a).len(), unbreached(&b).len());
    let mut times = Vec::new();
    let mut norm_sq = Vec::new();
    let mut raw_norm_sq = Vec::new();
    let mut defect: f64 = 0.0;
    for (i, j) in matched_times(&a, &b) {
        if i >= la || j >= lb {
            break;
        }
        let d = diff_good_unknowns(&a.states[i], &b.states[j], floor)?;
        defect = defect.max(d.reconstruction_defect());
        times.push(d.time);
        norm_sq.push(d.norm_sq());
        raw_norm_sq.push(d.raw_norm_sq());
    }
    if times.is_empty() {
        return Err(Error::Precondition("the two runs share no output time".into()));
    }
    let (_, c) = log_linear_fit(&times, &norm_sq);
    let base = norm_sq[0] + GRONWALL_FLOOR;
    let t0 = times[0];
    let envelope_ratio = times
        .iter()
        .zip(&norm_sq)
        .map(|(t, n)| (n + GRONWALL_FLOOR) / (base * (c * (t - t0)).exp()))
        .fold(0.0, f64::max);
    Ok(StabilityResult {
        times,
        norm_sq,
        raw_norm_sq,
        reconstruction_defect: defect,
        gronwall_c: c,
        envelope_ratio,
        envelope_ok: envelope_ratio <= 1.0 + GRONWALL_TOLERANCE,
        unbreached: completed,
    })
}

/// Outer-flow traces `(theta, U, H)` as functions of `(t, x)`.
pub struct OuterTraces<'a> {
    pub theta: &'a dyn Fn(f64, f64) -> f64,
    pub u: &'a dyn Fn(f64, f64) -> f64,
    pub h: &'a dyn Fn(f64, f64) -> f64,
}

/// Residuals of the three matching relations on the x nodes, with constant
/// outer pressure.
#[derive(Debug, Clone)]
pub struct MatchingResidual {
    pub x: Vec<f64>,
    /// `theta_t + U theta_x`
    pub transport: Vec<f64>,
    /// `theta U_t + theta U U_x - H H_x`
    pub momentum: Vec<f64>,
    /// `H_t + U H_x - H U_x`
    pub induction: Vec<f64>,
}

impl MatchingResidual {
    pub fn sup(&self) -> [f64; 3] {
        let m = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        [m(&self.transport), m(&self.momentum), m(&self.induction)]
    }
}

/// Fourth-order central difference.
fn central(f: impl Fn(f64) -> f64, z: f64) -> f64 {
    const STEP: f64 = 1e-3;
    (8.0 * (f(z + STEP) - f(z - STEP)) - (f(z + 2.0 * STEP) - f(z - 2.0 * STEP))) / (12.0 * STEP)
}

/// Evaluates the matching relations at time `t` on the x nodes of `grid`.
pub fn matching_check(traces: &OuterTraces<'_>, grid: &Grid, t: f64) -> MatchingResidual {
    let x = grid.x().to_vec();
    let mut out = MatchingResidual { x: x.clone(), transport: vec![], momentum: vec![], induction: vec![] };
    for &xi in &x {
        let (th, u, h) = ((traces.theta)(t, xi), (traces.u)(t, xi), (traces.h)(t, xi));
        let dt = |f: &dyn Fn(f64, f64) -> f64| central(|s| f(s, xi), t);
        let dx = |f: &dyn Fn(f64, f64) -> f64| central(|s| f(t, s), xi);
        out.transport.push(dt(traces.theta) + u * dx(traces.theta));
        out.momentum.push(th * dt(traces.u) + th * u * dx(traces.u) - h * dx(traces.h));
        out.induction.push(dt(traces.h) + u * dx(traces.h) - h * dx(traces.u));
    }
    out
}

/// Data for the monitor-persistence study: `h1 = 1 - 0.5 cos x e^{-y^2}`
/// (so `h1 >= 0.5`), `u1 = 1 - e^{-y} - a sin x y e^{-y^2}` and
/// `rho = 1 + b cos x e^{-y^2}`.
pub fn persistence_data(grid: &Arc<Grid>, physics: Physics, delta0: f64, a: f64, b: f64) -> Result<State> {
    let rho = Field::from_fn(grid, |x, y| b * x.cos() * (-y * y).exp());
    let u = Field::from_fn(grid, |x, y| -a * x.sin() * y * (-y * y).exp());
    let h = Field::from_fn(grid, |x, y| -0.5 * x.cos() * (-y * y).exp());
    State::new(rho, u, h, physics, 0.0, delta0)
}

/// Two smooth data sets for the viscosity ladder.
pub fn sweep_data(grid: &Arc<Grid>, physics: Physics, delta0: f64, which: usize) -> Result<State> {
    match which {
        0 => persistence_data(grid, physics, delta0, 0.3, 0.01),
        1 => {
            let rho = Field::from_fn(grid, |x, y| 0.01 * (2.0 * x).sin() * (1.0 + y * y) * (-y * y).exp());
            let u = Field::from_fn(grid, |x, y| 0.2 * (x + 1.0).cos() * y * (-0.5 * y * y).exp());
            let h = Field::from_fn(grid, |x, y| 0.3 * (2.0 * x).cos() * (1.0 - y * y) * (-y * y).exp());
            State::new(rho, u, h, physics, 0.0, delta0)
        }
        _ => Err(Error::InvalidInput(format!("no sweep data set {which}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, GridSpec};

    #[test]
    fn matching_for_constant_outer_state() {
        let g = build_grid(GridSpec::new(16, 16, 12.0, 1.0, 0.01)).unwrap();
        let one = |_: f64, _: f64| 1.0;
        let r = matching_check(&OuterTraces { theta: &one, u: &one, h: &one }, &g, 0.3);
        assert_eq!(r.sup(), [0.0; 3]);
        let c = |_: f64, _: f64| 2.5;
        let r = matching_check(&OuterTraces { theta: &c, u: &one, h: &c }, &g, 0.0);
        assert_eq!(r.sup(), [0.0; 3]);
    }

    #[test]
    fn matching_for_sheared_magnetic_trace() {
        // U = theta = 1, H = 1 + 0.1 sin x: induction = 0.1 cos x and the
        // momentum relation leaves -H H_x
        let g = build_grid(GridSpec::new(32, 16, 12.0, 1.0, 0.01)).unwrap();
        let one = |_: f64, _: f64| 1.0;
        let h = |_: f64, x: f64| 1.0 + 0.1 * x.sin();
        let r = matching_check(&OuterTraces { theta: &one, u: &one, h: &h }, &g, 0.0);
        for (i, &x) in r.x.iter().enumerate() {
            assert!((r.induction[i] - 0.1 * x.cos()).abs() < 1e-10);
            assert!((r.momentum[i] + (1.0 + 0.1 * x.sin()) * 0.1 * x.cos()).abs() < 1e-10);
            assert_eq!(r.transport[i], 0.0);
        }
    }

    #[test]
    fn difference_unknowns() {
        let g = build_grid(GridSpec::new(16, 64, 12.0, 2.0, 0.01)).unwrap();
        let p = Physics::default();
        let s2 = persistence_data(&g, p, 0.25, 0.3, 0.01).unwrap();
        let d = diff_good_unknowns(&s2, &s2, 0.125).unwrap();
        assert_eq!(d.norm_sq(), 0.0);
        // density-only difference: phi_bar = 0 and the unknowns are raw
        let mut s1 = s2.clone();
        s1.rho = &s1.rho + &Field::from_fn(&g, |x, y| 1e-6 * x.sin() * (-y * y).exp());
        let d = diff_good_unknowns(&s1, &s2, 0.125).unwrap();
        assert_eq!(d.phi_bar.max_abs(), 0.0);
        assert_eq!((&d.rho_i - &d.rho_bar).max_abs(), 0.0);
        assert_eq!(d.norm_sq(), d.raw_norm_sq());
        let s3 = persistence_data(&g, p, 0.25, 0.2, 0.0).unwrap();
        let d = diff_good_unknowns(&s3, &s2, 0.125).unwrap();
        assert!(d.reconstruction_defect() < 1e-15);
        assert!(matches!(diff_good_unknowns(&s3, &s2, 0.6), Err(Error::MagneticFloor { .. })));
    }

    #[test]
    fn log_fit_recovers_rate() {
        let t: Vec<f64> = (0..10).map(|k| 0.1 * k as f64).collect();
        let v: Vec<f64> = t.iter().map(|t| 1e-8 * (1.7 * t).exp()).collect();
        let (_, c) = log_linear_fit(&t, &v);
        assert!((c - 1.7).abs() < 1e-9);
        let (_, c) = log_linear_fit(&t, &[0.0; 10]);
        assert!(c.abs() < 1e-20);
    }

    #[test]
    fn sweep_is_independent_of_worker_count() {
        let g = build_grid(GridSpec::new(8, 32, 12.0, 2.0, 0.01)).unwrap();
        let p = Physics::new(1.0, 1.0, 0.1);
        let s = sweep_data(&g, p, 0.25, 1).unwrap();
        let cfg = SolverConfig { physics: p, t_end: 0.04, output_every: 0.02, ..SolverConfig::default() };
        let ladder = [0.1, 0.05, 0.025];
        let all = eps_sweep(&s, &cfg, &ladder, 2).unwrap();
        let serial = eps_sweep_with_workers(&s, &cfg, &ladder, 2, 1).unwrap();
        assert_eq!(all.pairwise_diffs, serial.pairwise_diffs);
        assert_eq!(all.times, serial.times);
    }

    #[test]
    fn ladder_validation() {
        let g = build_grid(GridSpec::new(8, 32, 12.0, 2.0, 0.01)).unwrap();
        let s = State::equilibrium(&g, Physics::default(), 0.25);
        let cfg = SolverConfig::default();
        assert!(eps_sweep(&s, &cfg, &[], 2).is_err());
        assert!(eps_sweep(&s, &cfg, &[0.01, 0.1], 2).is_err());
    }
}
