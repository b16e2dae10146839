//! Time integration of the shifted regularized system.
//!
//! All second-derivative terms are implicit, advection and coupling terms are
//! explicit. A step solves, in delta form, the approximately factored system
//! `(I - a dt Lx)(I - a dt Ly) dw = rhs` with a periodic tridiagonal sweep in
//! x followed by a tridiagonal sweep in y. `imex-be` is the single predictor
//! stage (`a = 1`); `imex-cn` adds a trapezoidal corrector (`a = 1/2`) whose
//! explicit part averages the right-hand sides at both time levels, which
//! makes the scheme second order in time.
//!
//! Boundary rows: `d_y rho = d_y h = 0` at the wall through a ghost node,
//! `u` held at its wall value, and every unknown held at the truncation row.

pub mod manufactured;
pub mod tridiag;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::norms::weighted_linf;
use crate::pde::time_jet;
use crate::sources::SourceBundle;
use crate::state::{derive_secondary, Physics, State, DEFAULT_DELTA0};

pub use manufactured::{Forcing, Manufactured, ManufacturedForcing};
use tridiag::{solve_cyclic, solve_tridiagonal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    ImexBe,
    #[default]
    ImexCn,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::ImexBe => "imex-be",
            Scheme::ImexCn => "imex-cn",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "imex-be" => Ok(Scheme::ImexBe),
            "imex-cn" => Ok(Scheme::ImexCn),
            other => Err(Error::InvalidInput(format!("unknown scheme `{other}` (expected imex-be or imex-cn)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub physics: Physics,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub cfl_safety: f64,
    pub delta0: f64,
    /// Weight index used by the density monitor threshold.
    pub l: f64,
    /// Spacing of stored trajectory snapshots.
    pub output_every: f64,
    /// Stop at the first monitor breach.
    pub enforce_monitors: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            physics: Physics::default(),
            dt: 0.01,
            t_end: 0.5,
            scheme: Scheme::ImexCn,
            cfl_safety: 0.5,
            delta0: DEFAULT_DELTA0,
            l: 2.0,
            output_every: 0.05,
            enforce_monitors: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.physics.validate()?;
        let positive =
            [("dt", self.dt), ("t_end", self.t_end), ("output_every", self.output_every), ("delta0", self.delta0)];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidInput(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety)));
        }
        if !(self.l > 0.5) {
            return Err(Error::InvalidInput(format!("l must exceed 1/2, got {}", self.l)));
        }
        Ok(())
    }
}

/// Runtime check of the a priori assumptions, with `delta = delta0 / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorStatus {
    pub time: f64,
    /// `min (h + 1)`
    pub h_floor: f64,
    /// `max |rho - 1|`
    pub rho_sup: f64,
    /// `|| d_y (u - exp(-y)) ||_{L^inf_1}`
    pub shear_sup: f64,
    /// `1/2 <= rho <= 3/2` everywhere.
    pub rho_band_ok: bool,
    pub breached: bool,
}

impl fmt::Display for MonitorStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "h_floor = {:.6}, rho_sup = {:.6}, shear_sup = {:.6}, rho_band_ok = {}, breached = {}",
            self.h_floor, self.rho_sup, self.shear_sup, self.rho_band_ok, self.breached
        )
    }
}

/// Threshold on `max |rho - 1|`: `(2l - 1) delta^2 / 2`.
pub fn density_threshold(delta: f64, l: f64) -> f64 {
    (2.0 * l - 1.0) * delta * delta / 2.0
}

pub fn monitor(state: &State, delta0: f64, l: f64) -> MonitorStatus {
    let delta = delta0 / 2.0;
    let h_floor = state.h.min() + 1.0;
    let rho_sup = state.rho.max_abs();
    let shear_sup = weighted_linf(&state.shear(), 1.0);
    let rho_band_ok = state.rho.min() >= -0.5 && state.rho.max() <= 0.5;
    let breached = !(h_floor >= delta) || !(rho_sup <= density_threshold(delta, l)) || !(shear_sup <= 1.0 / delta);
    MonitorStatus { time: state.time, h_floor, rho_sup, shear_sup, rho_band_ok, breached }
}

/// Diffusion coefficients of one unknown: `cx d_xx + cy d_yy`, and its wall condition.
struct Diffusion {
    cx: Vec<f64>,
    cy: Vec<f64>,
    dirichlet_wall: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    Completed,
    /// A monitor breached at `time`; `last_unbreached` is the previous step time.
    Breach {
        time: f64,
        last_unbreached: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub monitors: Vec<MonitorStatus>,
    pub stop: StopReason,
    pub steps: usize,
    /// Step size used on each output interval.
    pub step_sizes: Vec<f64>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.time).collect()
    }
    pub fn final_state(&self) -> &State {
        self.states.last().expect("trajectory holds the initial state")
    }
    /// End of the interval on which every monitor held.
    pub fn unbreached_until(&self) -> f64 {
        match self.stop {
            StopReason::Completed => self.final_state().time,
            StopReason::Breach { last_unbreached, .. } => last_unbreached,
        }
    }
}

/// Ratio above which the density source is flagged relative to transport.
pub const SOURCE_FLAG_RATIO: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct Solver {
    pub cfg: SolverConfig,
    pub sources: Option<Arc<SourceBundle>>,
    pub forcing: Option<Arc<dyn Forcing>>,
}

impl Solver {
    pub fn new(cfg: SolverConfig) -> Self {
        Solver { cfg, sources: None, forcing: None }
    }

    pub fn with_sources(mut self, sources: Option<Arc<SourceBundle>>) -> Self {
        self.sources = sources;
        self
    }

    pub fn with_forcing(mut self, forcing: Arc<dyn Forcing>) -> Self {
        self.forcing = Some(forcing);
        self
    }

    fn prepare(&self, state: &State) -> State {
        let mut s = state.clone();
        s.physics = self.cfg.physics;
        s.sources = self.sources.clone();
        s
    }

    /// Full time derivative with held boundary rows set to zero.
    pub fn rhs(&self, state: &State) -> Result<[Field; 3]> {
        let jet = time_jet(state, 1)?;
        let mut out = [jet.rho[1].clone(), jet.u[1].clone(), jet.h[1].clone()];
        if let Some(f) = &self.forcing {
            let extra = f.eval(&state.grid, state.time);
            for (o, e) in out.iter_mut().zip(extra.iter()) {
                *o = &*o + e;
            }
        }
        let ny = state.grid.ny();
        for (k, o) in out.iter_mut().enumerate() {
            let v = o.values_mut();
            v.column_mut(ny - 1).fill(0.0);
            if k == 1 {
                v.column_mut(0).fill(0.0);
            }
        }
        Ok(out)
    }

    fn diffusion(&self, state: &State) -> [Diffusion; 3] {
        let p = self.cfg.physics;
        let n = state.grid.nx() * state.grid.ny();
        let inv_rho: Vec<f64> = state.rho.values().iter().map(|r| 1.0 / (1.0 + r)).collect();
        [
            Diffusion { cx: vec![p.eps; n], cy: vec![p.eps; n], dirichlet_wall: false },
            Diffusion {
                cx: inv_rho.iter().map(|r| p.eps * r).collect(),
                cy: inv_rho.iter().map(|r| p.mu * r).collect(),
                dirichlet_wall: true,
            },
            Diffusion { cx: vec![p.eps; n], cy: vec![p.kappa; n], dirichlet_wall: false },
        ]
    }

    /// `(I - a Lx)^{-1}` then `(I - a Ly)^{-1}` applied to `rhs`.
    fn implicit_solve(&self, grid: &Grid, d: &Diffusion, a: f64, rhs: &Field) -> Field {
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut w = rhs.values().as_standard_layout().into_owned();
        let top = ny - 1;
        let first = if d.dirichlet_wall { 1 } else { 0 };
        if self.cfg.physics.eps > 0.0 {
            let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
            let mut lower = vec![0.0; nx];
            let mut diag = vec![0.0; nx];
            let mut line = vec![0.0; nx];
            for j in first..top {
                for i in 0..nx {
                    let c = a * d.cx[i * ny + j] * inv_dx2;
                    lower[i] = -c;
                    diag[i] = 1.0 + 2.0 * c;
                    line[i] = w[[i, j]];
                }
                solve_cyclic(&lower, &diag, &lower, &mut line);
                for i in 0..nx {
                    w[[i, j]] = line[i];
                }
            }
        }
        let h0 = grid.y()[1] - grid.y()[0];
        let mut lower = vec![0.0; ny];
        let mut diag = vec![1.0; ny];
        let mut upper = vec![0.0; ny];
        let mut scratch = vec![0.0; ny];
        let data = w.as_slice_mut().expect("standard layout");
        for i in 0..nx {
            let row = i * ny;
            if d.dirichlet_wall {
                lower[0] = 0.0;
                diag[0] = 1.0;
                upper[0] = 0.0;
            } else {
                let c = a * d.cy[row] * 2.0 / (h0 * h0);
                lower[0] = 0.0;
                diag[0] = 1.0 + c;
                upper[0] = -c;
            }
            for j in 1..top {
                let (lo, di, up) = grid.dyy_coefficients(j);
                let c = a * d.cy[row + j];
                lower[j] = -c * lo;
                diag[j] = 1.0 - c * di;
                upper[j] = -c * up;
            }
            lower[top] = 0.0;
            diag[top] = 1.0;
            upper[top] = 0.0;
            let line = &mut data[row..row + ny];
            if d.dirichlet_wall {
                line[0] = 0.0;
            }
            line[top] = 0.0;
            solve_tridiagonal(&lower, &diag, &upper, line, &mut scratch);
        }
        Field::from_array(rhs.grid(), w).expect("grid shape")
    }

    /// `Lx w + Ly w` with the implicit stencils, held rows zero.
    fn apply_diffusion(&self, grid: &Grid, d: &Diffusion, w: &Field) -> Field {
        let (nx, ny) = (grid.nx(), grid.ny());
        let xx = grid.dxx_compact(w.values());
        let yy = grid.dyy_neumann(w.values());
        let mut out = grid.zeros();
        for i in 0..nx {
            for j in 0..ny {
                let k = i * ny + j;
                out[[i, j]] = d.cx[k] * xx[[i, j]] + d.cy[k] * yy[[i, j]];
            }
            out[[i, ny - 1]] = 0.0;
            if d.dirichlet_wall {
                out[[i, 0]] = 0.0;
            }
        }
        Field::from_array(w.grid(), out).expect("grid shape")
    }

    fn advance(&self, base: &State, delta: [Field; 3], time: f64) -> State {
        let [dr, du, dh] = delta;
        let mut s = base.clone();
        s.rho = &base.rho + &dr;
        s.u = &base.u + &du;
        s.h = &base.h + &dh;
        s.time = time;
        derive_secondary(s)
    }

    /// One step of size `dt` without monitor checks.
    pub fn step_raw(&self, state: &State, dt: f64) -> Result<State> {
        let state = self.prepare(state);
        let grid = state.grid.clone();
        let t_new = state.time + dt;
        let r0 = self.rhs(&state)?;
        let diff0 = self.diffusion(&state);
        let predictor: [Field; 3] = std::array::from_fn(|k| self.implicit_solve(&grid, &diff0[k], dt, &(&r0[k] * dt)));
        let star = self.advance(&state, predictor.clone(), t_new);
        let next = match self.cfg.scheme {
            Scheme::ImexBe => star,
            Scheme::ImexCn => {
                let r1 = self.rhs(&star)?;
                let mut mid = state.clone();
                mid.rho = (&state.rho + &star.rho) * 0.5;
                let diff = self.diffusion(&mid);
                let half = 0.5 * dt;
                let corrector: [Field; 3] = std::array::from_fn(|k| {
                    let lin = self.apply_diffusion(&grid, &diff[k], &predictor[k]);
                    let rhs = (&r0[k] + &r1[k] - lin) * half;
                    self.implicit_solve(&grid, &diff[k], half, &rhs)
                });
                self.advance(&state, corrector, t_new)
            }
        };
        if !next.is_finite() {
            return Err(Error::Diverged { time: t_new });
        }
        Ok(next)
    }

    /// Largest step allowed by the advective CFL condition.
    pub fn stable_dt(&self, state: &State) -> f64 {
        let grid = &state.grid;
        let u1 = state.velocity();
        let h1 = state.magnetic();
        let rho = state.density();
        let mut rate: f64 = 0.0;
        let (nx, ny) = (grid.nx(), grid.ny());
        for i in 0..nx {
            for j in 0..ny {
                let alfven = h1.values()[[i, j]].abs() / rho.values()[[i, j]].max(1e-3).sqrt();
                let tangential = (u1.values()[[i, j]].abs() + alfven) / grid.dx();
                let normal = (state.v.values()[[i, j]].abs() + state.g.values()[[i, j]].abs()) / grid.dy_at(j);
                rate = rate.max(tangential).max(normal);
            }
        }
        if rate > 0.0 {
            self.cfg.cfl_safety / rate
        } else {
            f64::INFINITY
        }
    }

    /// Integrates from `initial` to `cfg.t_end`, storing a snapshot every `cfg.output_every`.
    pub fn run(&self, initial: &State) -> Result<Trajectory> {
        self.cfg.validate()?;
        let mut state = self.prepare(initial);
        let first = monitor(&state, self.cfg.delta0, self.cfg.l);
        if self.cfg.enforce_monitors && first.breached {
            return Err(Error::Precondition(format!("initial data violate the monitors: {first}")));
        }
        let mut traj = Trajectory {
            states: vec![state.clone()],
            monitors: vec![first],
            stop: StopReason::Completed,
            steps: 0,
            step_sizes: Vec::new(),
            warnings: Vec::new(),
        };
        if let Some(w) = self.source_warning(&state)? {
            traj.warnings.push(w);
        }
        let t0 = state.time;
        let span = self.cfg.t_end - t0;
        if !(span > 0.0) {
            return Ok(traj);
        }
        let intervals = ((span / self.cfg.output_every) - 1e-9).ceil().max(1.0) as usize;
        for k in 1..=intervals {
            let target = if k == intervals { self.cfg.t_end } else { t0 + k as f64 * self.cfg.output_every };
            let length = target - state.time;
            let cap = self.cfg.dt.min(self.stable_dt(&state));
            let n = ((length / cap) - 1e-9).ceil().max(1.0) as usize;
            let dt = length / n as f64;
            traj.step_sizes.push(dt);
            for s in 0..n {
                let previous_time = state.time;
                let mut next = self.step_raw(&state, dt)?;
                if s + 1 == n {
                    next.time = target;
                }
                traj.steps += 1;
                let status = monitor(&next, self.cfg.delta0, self.cfg.l);
                if self.cfg.enforce_monitors && status.breached {
                    traj.stop = StopReason::Breach { time: next.time, last_unbreached: previous_time };
                    traj.states.push(next);
                    traj.monitors.push(status);
                    return Ok(traj);
                }
                state = next;
            }
            traj.monitors.push(monitor(&state, self.cfg.delta0, self.cfg.l));
            traj.states.push(state.clone());
        }
        Ok(traj)
    }

    /// Flags a density source larger than 1% of the density transport.
    fn source_warning(&self, state: &State) -> Result<Option<String>> {
        let Some(bundle) = &self.sources else { return Ok(None) };
        let eps = self.cfg.physics.eps;
        if eps == 0.0 {
            return Ok(None);
        }
        let r = bundle.derivative_at(state.time, 0);
        let source = ((r[0].dx() + r[1].dy()) * eps).max_abs();
        let transport = (state.velocity() * state.rho.dx() + &state.v * &state.rho.dy()).max_abs();
        if source > SOURCE_FLAG_RATIO * transport && source > 0.0 {
            Ok(Some(format!(
                "density source {source:.3e} exceeds {:.0}% of transport {transport:.3e} at t = {}",
                100.0 * SOURCE_FLAG_RATIO,
                state.time
            )))
        } else {
            Ok(None)
        }
    }
}

/// One step of size `min(cfg.dt, CFL limit)`; errors on breach or divergence.
pub fn step(state: &State, cfg: &SolverConfig, sources: Option<Arc<SourceBundle>>) -> Result<State> {
    cfg.validate()?;
    let before = monitor(state, cfg.delta0, cfg.l);
    if cfg.enforce_monitors && before.breached {
        return Err(Error::MonitorBreach { time: state.time, status: Box::new(before) });
    }
    let solver = Solver::new(*cfg).with_sources(sources);
    let dt = cfg.dt.min(solver.stable_dt(state));
    let next = solver.step_raw(state, dt)?;
    let after = monitor(&next, cfg.delta0, cfg.l);
    if cfg.enforce_monitors && after.breached {
        return Err(Error::MonitorBreach { time: next.time, status: Box::new(after) });
    }
    Ok(next)
}

/// Runs the solver with optional compatibility sources.
pub fn run(initial: &State, cfg: &SolverConfig, bundle: Option<Arc<SourceBundle>>) -> Result<Trajectory> {
    Solver::new(*cfg).with_sources(bundle).run(initial)
}

/// `exact d_t w - (discrete rhs(w) + forcing)` for manufactured fields sampled at `state.time`.
///
/// The discrete operator uses `state.physics`; the forcing uses `forcing_physics`.
pub fn pde_residual(state: &State, solution: &Manufactured, forcing_physics: Physics) -> Result<[Field; 3]> {
    solution.validate(&state.grid)?;
    let mut plain = state.clone();
    plain.sources = None;
    let jet = time_jet(&plain, 1)?;
    let discrete = [&jet.rho[1], &jet.u[1], &jet.h[1]];
    let exact = solution.time_derivatives(&state.grid, state.time);
    let forcing =
        ManufacturedForcing { solution: solution.clone(), physics: forcing_physics }.eval(&state.grid, state.time);
    Ok(std::array::from_fn(|k| &exact[k] - discrete[k] - &forcing[k]))
}
