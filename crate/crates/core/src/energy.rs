//! Energy functionals tracked by the a priori estimates, per time slice and
//! along a trajectory.
//!
//! All sums of squares use the weight `(1 + y)^l` and conormal derivatives with
//! time derivatives from the equations. The slice quantities are
//!
//! * `E`: `sum ||Z^a (rho, u, h)||^2_{L^2_l}` over `|a| <= m` with at most
//!   `m - 1` tangential derivatives,
//! * `Q`: the sup aggregate of low-order tangential and normal derivatives,
//!   including `v / phi`,
//! * `X = 1 + E + ||(rho_m, u_m, h_m)||^2 + ||d_y (rho, u, h)||^2_{H^{m-1}_l} + ||d_y rho||^2_{H^{1,inf}_1}`,
//!   with the good unknowns summed over every tangential index of order `m`,
//! * `Y`, which replaces `E` and the good unknowns by the full `H^m_l` norm,
//! * the dissipation rates `Dx`, `Dy`.
//!
//! Along a trajectory, `Theta` is the running sup of `Y` plus time integrals of
//! its dissipation, and `Xi` the same built on `X`.

use std::fmt;

use crate::cancellation::build_good_unknowns;
use crate::error::{Error, Result};
use crate::field::{Field, MultiIndex};
use crate::norms::{
    conormal_sq, conormal_sq_with, conormal_sup_sq, map_levels, weighted_l2_sq, weighted_linf, IndexSet, NormSpec,
};
use crate::pde::time_jet;
use crate::solver::{monitor, MonitorStatus, Trajectory};
use crate::state::State;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub time: f64,
    pub e_ml: f64,
    /// Sup aggregate at this instant.
    pub q: f64,
    /// Running sup of `q` from the start of the trajectory.
    pub q_running: f64,
    pub x_ml: f64,
    pub y_ml: f64,
    /// `sup Y` plus the time integral of `theta_rate`; equals `y_ml` on a single slice.
    pub theta: f64,
    /// `sup X` plus the time integral of `xi_rate`; equals `x_ml` on a single slice.
    pub xi: f64,
    pub dx: f64,
    pub dy: f64,
    /// Dissipation integrand of `theta` at this instant.
    pub theta_rate: f64,
    /// Dissipation integrand of `xi` at this instant.
    pub xi_rate: f64,
    /// Monitors evaluated with the report's weight `l`; the density threshold
    /// is negative, hence always breached, for `l <= 1/2`.
    pub monitor: MonitorStatus,
}

impl EnergyReport {
    /// CSV column names, in the order of [`EnergyReport::row`].
    pub const COLUMNS: [&'static str; 17] = [
        "time",
        "E_ml",
        "Q",
        "Q_running",
        "X_ml",
        "Y_ml",
        "Theta_ml",
        "Xi_ml",
        "Dx_ml",
        "Dy_ml",
        "theta_rate",
        "xi_rate",
        "h_floor",
        "rho_sup",
        "shear_sup",
        "rho_band_ok",
        "breached",
    ];

    pub fn row(&self) -> [f64; 17] {
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        [
            self.time,
            self.e_ml,
            self.q,
            self.q_running,
            self.x_ml,
            self.y_ml,
            self.theta,
            self.xi,
            self.dx,
            self.dy,
            self.theta_rate,
            self.xi_rate,
            self.monitor.h_floor,
            self.monitor.rho_sup,
            self.monitor.shear_sup,
            flag(self.monitor.rho_band_ok),
            flag(self.monitor.breached),
        ]
    }
}

impl fmt::Display for EnergyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t = {:.4}: E = {:.6e}, Q = {:.6e}, X = {:.6e}, Y = {:.6e}, Theta = {:.6e}, Xi = {:.6e}",
            self.time, self.e_ml, self.q, self.x_ml, self.y_ml, self.theta, self.xi
        )
    }
}

/// `v / phi` with `phi = y / (1 + y)`; on the wall row the limit `(1 + y) d_y v`.
pub fn over_phi(v: &Field) -> Field {
    let y = v.grid().y().to_vec();
    let dy = v.dy();
    let mut out = v.clone();
    let (nx, ny) = v.values().dim();
    let vals = out.values_mut();
    for i in 0..nx {
        vals[[i, 0]] = dy.values()[[i, 0]];
        for j in 1..ny {
            vals[[i, j]] *= (1.0 + y[j]) / y[j];
        }
    }
    out
}

/// Tangential indices of order exactly `m`.
fn top_tangential(m: usize) -> impl Iterator<Item = MultiIndex> {
    (0..=m).map(move |t| MultiIndex::tangential(t, m - t))
}

/// All slice functionals; the trajectory slots hold their single-slice values.
pub fn instantaneous_functionals(state: &State, m: usize, l: f64, delta0: f64) -> Result<EnergyReport> {
    if m == 0 {
        return Err(Error::InvalidInput("energy functionals need m >= 1".into()));
    }
    let floor = delta0 / 2.0;
    let min_h = state.h.min() + 1.0;
    if !(floor > 0.0) || !(min_h >= floor) {
        return Err(Error::MagneticFloor { min: min_h, floor });
    }
    let p = state.physics;
    let jet = time_jet(state, m)?;
    let unknowns = [(&jet.rho, p.eps), (&jet.u, p.mu), (&jet.h, p.kappa)];
    let capped = NormSpec::new(m, l, IndexSet::TangentialCapped);
    let full = NormSpec::full(m, l);
    let lower = NormSpec::full(m - 1, l);
    let sup1 = NormSpec::full(1, 1.0);

    let mut e_ml = 0.0;
    let mut full_sq = 0.0;
    let mut dy_lower = 0.0;
    let mut dx_rate = 0.0;
    let mut dy_rate = 0.0;
    let mut theta_rate = 0.0;
    let mut second = 0.0;
    for (levels, c) in unknowns {
        let dy_levels = map_levels(levels, Field::dy);
        e_ml += conormal_sq(levels, capped)?;
        full_sq += conormal_sq(levels, full)?;
        dy_lower += conormal_sq(&dy_levels, lower)?;
        dy_rate += c * conormal_sq_with(levels, capped, Field::dy)?;
        theta_rate += c * conormal_sq(&dy_levels, full)?;
        second += c * conormal_sq(&map_levels(levels, Field::dyy), lower)?;
        if p.eps > 0.0 {
            dx_rate += p.eps * conormal_sq_with(levels, capped, Field::dx)?;
            theta_rate += p.eps * conormal_sq(&map_levels(levels, Field::dx), full)?;
            second += p.eps * conormal_sq(&map_levels(&dy_levels, Field::dx), lower)?;
        }
    }
    let rho_y_sup = conormal_sup_sq(&map_levels(&jet.rho, Field::dy), sup1, f64::INFINITY)?;

    let mut good_sq = 0.0;
    for alpha in top_tangential(m) {
        let gu = build_good_unknowns(state, &jet, alpha)?;
        for (w, c) in [(&gu.rho_m, p.eps), (&gu.u_m, p.mu), (&gu.h_m, p.kappa)] {
            good_sq += weighted_l2_sq(w, l);
            dy_rate += c * weighted_l2_sq(&w.dy(), l);
            if p.eps > 0.0 {
                dx_rate += p.eps * weighted_l2_sq(&w.dx(), l);
            }
        }
    }

    let q = sup_aggregate(&jet)?;
    let x_ml = 1.0 + e_ml + good_sq + dy_lower + rho_y_sup;
    let y_ml = 1.0 + full_sq + dy_lower + rho_y_sup;
    Ok(EnergyReport {
        time: state.time,
        e_ml,
        q,
        q_running: q,
        x_ml,
        y_ml,
        theta: y_ml,
        xi: x_ml,
        dx: dx_rate,
        dy: dy_rate,
        theta_rate: theta_rate + second,
        xi_rate: second + dx_rate + dy_rate,
        monitor: monitor(state, delta0, l),
    })
}

/// `||Z_t rho||^2_{L^inf_0} + ||(u, h)||^2_{H^{1,inf}_{0,tan}} + ||(v, g)||^2_{H^{1,inf}_{1,tan}}
/// + ||(d_y rho, d_y u, d_y h, v / phi)||^2_{H^{1,inf}_1}`.
fn sup_aggregate(jet: &crate::pde::TimeJet) -> Result<f64> {
    let inf = f64::INFINITY;
    let tan0 = NormSpec::new(1, 0.0, IndexSet::Tangential);
    let tan1 = NormSpec::new(1, 1.0, IndexSet::Tangential);
    let sup1 = NormSpec::full(1, 1.0);
    let mut q = weighted_linf(&jet.rho[1], 0.0).powi(2) + weighted_linf(&jet.rho[0].dx(), 0.0).powi(2);
    q += conormal_sup_sq(&jet.u, tan0, inf)? + conormal_sup_sq(&jet.h, tan0, inf)?;
    q += conormal_sup_sq(&jet.v, tan1, inf)? + conormal_sup_sq(&jet.g, tan1, inf)?;
    for levels in [&jet.rho, &jet.u, &jet.h] {
        q += conormal_sup_sq(&map_levels(levels, Field::dy), sup1, inf)?;
    }
    q += conormal_sup_sq(&map_levels(&jet.v, over_phi), sup1, inf)?;
    Ok(q)
}

/// Slice functionals along a trajectory with `Q` as a running sup and `Theta`,
/// `Xi` accumulated (running sup plus trapezoid integrals of the rates).
pub fn trajectory_report(trajectory: &Trajectory, m: usize, l: f64, delta0: f64) -> Result<Vec<EnergyReport>> {
    let mut out: Vec<EnergyReport> = Vec::with_capacity(trajectory.states.len());
    let (mut sup_y, mut sup_x, mut sup_q) = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let (mut int_theta, mut int_xi) = (0.0, 0.0);
    for state in &trajectory.states {
        let mut r = instantaneous_functionals(state, m, l, delta0)?;
        if let Some(prev) = out.last() {
            let dt = r.time - prev.time;
            int_theta += 0.5 * dt * (prev.theta_rate + r.theta_rate);
            int_xi += 0.5 * dt * (prev.xi_rate + r.xi_rate);
        }
        sup_y = sup_y.max(r.y_ml);
        sup_x = sup_x.max(r.x_ml);
        sup_q = sup_q.max(r.q);
        r.q_running = sup_q;
        r.theta = sup_y + int_theta;
        r.xi = sup_x + int_xi;
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, GridSpec};
    use crate::norms::{multi_indices, zderiv_levels};
    use crate::state::{background, Physics};
    use approx::assert_relative_eq;

    fn grid() -> std::sync::Arc<crate::grid::Grid> {
        build_grid(GridSpec::new(16, 400, 20.0, 2.0, 0.01)).unwrap()
    }

    fn wavy(g: &std::sync::Arc<crate::grid::Grid>, c: f64) -> State {
        let rho = Field::from_fn(g, |x, y| c * 0.02 * x.cos() * (-y * y).exp());
        let u = Field::from_fn(g, |x, y| c * (0.1 * x.sin() * y * (-y * y).exp() + (-y).exp()));
        let h = Field::from_fn(g, |x, y| c * 0.2 * (x + 0.5).cos() * (1.0 - 2.0 * y * y) * (-y * y).exp());
        State::new(rho, u, h, Physics::default(), 0.0, 0.25).unwrap()
    }

    #[test]
    fn equilibrium_values() {
        // u = e^{-y}: the sup aggregate sees ||u||_inf = 1, ||(1+y) d_y u|| = 1
        // and ||y e^{-y}||_inf = e^{-1}
        let g = grid();
        let s = State::equilibrium(&g, Physics::default(), 0.25);
        let r = instantaneous_functionals(&s, 2, 2.0, 0.25).unwrap();
        let e2 = (-2.0f64).exp();
        assert_relative_eq!(r.q, 2.0 + e2, max_relative = 1e-3);
        assert!(r.e_ml > 0.0);
        assert_eq!(r.dx, 0.0);
        assert!(r.x_ml >= 1.0 && r.y_ml >= 1.0);
        // only u = e^{-y} contributes: no tangential or time structure
        let bg = [background(&g), Field::zeros(&g), Field::zeros(&g)];
        assert_relative_eq!(
            r.e_ml,
            conormal_sq(&bg, NormSpec::new(2, 2.0, IndexSet::TangentialCapped)).unwrap(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            r.x_ml - r.e_ml,
            r.y_ml - conormal_sq(&bg, NormSpec::full(2, 2.0)).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn zero_shifted_state() {
        // u1 = 1 - e^{-y} is not steady: du/dt = -mu e^{-y} is the only
        // nonzero piece, with ||e^{-y}||^2_{L^2_2} = 2 pi * 21/4
        let g = grid();
        let z = Field::zeros(&g);
        let mu = 0.7;
        let s = State::new(z.clone(), z.clone(), z, Physics::new(mu, 1.0, 0.01), 0.0, 0.25).unwrap();
        let r = instantaneous_functionals(&s, 1, 2.0, 0.25).unwrap();
        assert_eq!(r.e_ml, 0.0);
        let expected = 1.0 + mu * mu * 2.0 * std::f64::consts::PI * 5.25;
        assert_relative_eq!(r.y_ml, expected, max_relative = 1e-4);
        assert_relative_eq!(r.x_ml, r.y_ml, max_relative = 1e-14);
    }

    #[test]
    fn energy_is_homogeneous_without_time_derivatives() {
        // m = 1 keeps only Z2 powers in E, so no substituted levels enter
        let g = grid();
        let e1 = instantaneous_functionals(&wavy(&g, 1.0), 1, 2.0, 0.25).unwrap().e_ml;
        let e3 = instantaneous_functionals(&wavy(&g, 3.0), 1, 2.0, 0.25).unwrap().e_ml;
        assert_relative_eq!(e3, 9.0 * e1, max_relative = 1e-12);
    }

    #[test]
    fn energy_equals_sum_over_indices() {
        let g = grid();
        let s = wavy(&g, 1.0);
        let r = instantaneous_functionals(&s, 2, 2.0, 0.25).unwrap();
        let jet = time_jet(&s, 2).unwrap();
        let mut total = 0.0;
        for levels in [&jet.rho, &jet.u, &jet.h] {
            for a in multi_indices(2, IndexSet::TangentialCapped) {
                total += weighted_l2_sq(&zderiv_levels(levels, a).unwrap(), 2.0);
            }
        }
        assert_relative_eq!(r.e_ml, total, max_relative = 1e-13);
        assert!(r.q.is_finite() && r.dy > 0.0 && r.dx > 0.0);
    }

    #[test]
    fn over_phi_uses_wall_limit() {
        let g = grid();
        let v = Field::from_profile(&g, |y| y * (-y).exp());
        let w = over_phi(&v);
        let y = g.y();
        assert!((w.values()[[0, 0]] - 1.0).abs() < 1e-3);
        assert_relative_eq!(w.values()[[0, 5]], (1.0 + y[5]) * (-y[5]).exp(), max_relative = 1e-12);
    }

    #[test]
    fn rejects_floor_violation() {
        let g = grid();
        let z = Field::zeros(&g);
        let s = State::new(z.clone(), z, Field::constant(&g, -0.9), Physics::default(), 0.0, 0.25).unwrap();
        assert!(matches!(instantaneous_functionals(&s, 2, 2.0, 0.25), Err(Error::MagneticFloor { .. })));
    }
}
