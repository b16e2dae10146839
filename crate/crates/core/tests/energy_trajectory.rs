//! Trajectory-level behaviour of the energy functionals.

use std::sync::Arc;

use blmhd::energy::{trajectory_report, EnergyReport};
use blmhd::solver::{Solver, SolverConfig};
use blmhd::{build_grid, Field, Grid, GridSpec, Physics, State};

fn grid() -> Arc<Grid> {
    build_grid(GridSpec::new(16, 256, 20.0, 2.0, 0.005)).unwrap()
}

/// `(1, 1, 1 + h0(y))`: velocity and density stay put, `h` decays by heat flow.
fn decaying_magnetic_state(g: &Arc<Grid>, physics: Physics) -> State {
    let one = Field::constant(g, 1.0);
    let h1 = Field::from_profile(g, |y| {
        let z = y / 3.0;
        1.0 + 0.3 * (1.0 - 2.0 * z * z) * (-z * z).exp()
    });
    State::from_physical(&one, &one, &h1, physics, 0.0, 0.25).unwrap()
}

fn report(initial: &State, output_every: f64, m: usize, l: f64) -> Vec<EnergyReport> {
    let cfg = SolverConfig { physics: initial.physics, dt: 0.005, t_end: 1.0, output_every, ..SolverConfig::default() };
    let traj = Solver::new(cfg).run(initial).unwrap();
    trajectory_report(&traj, m, l, 0.25).unwrap()
}

fn integral_of_rates(rep: &[EnergyReport]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = vec![0.0];
    for w in rep.windows(2) {
        acc += 0.5 * (w[1].time - w[0].time) * (w[0].theta_rate + w[1].theta_rate);
        out.push(acc);
    }
    out
}

#[test]
fn equilibrium_theta_grows_only_by_background_dissipation() {
    // the shifted velocity at the equilibrium is exp(-y), whose normal
    // dissipation accumulates linearly while every slice quantity stays fixed
    let g = grid();
    let s = State::equilibrium(&g, Physics::new(1.0, 1.0, 0.01), 0.25);
    let rep = report(&s, 0.1, 2, 2.0);
    let first = rep[0];
    assert!(first.theta_rate > 0.0);
    for r in &rep {
        assert_eq!(r.y_ml, first.y_ml);
        assert_eq!(r.e_ml, first.e_ml);
        assert_eq!(r.theta_rate, first.theta_rate);
        let expected = first.y_ml + r.time * first.theta_rate;
        assert!((r.theta - expected).abs() <= 1e-12 * expected, "{} {}", r.theta, expected);
    }
}

#[test]
fn decaying_field_keeps_initial_sup() {
    let g = grid();
    let s = decaying_magnetic_state(&g, Physics::new(1.0, 1.0, 0.01));
    for (m, l) in [(1, 0.0), (2, 2.0)] {
        let rep = report(&s, 0.05, m, l);
        for w in rep.windows(2) {
            assert!(w[1].e_ml <= w[0].e_ml * (1.0 + 1e-12), "E grew at t = {}", w[1].time);
            assert!(w[1].theta >= w[0].theta);
            assert!(w[1].q_running >= w[0].q_running);
        }
        let integrals = integral_of_rates(&rep);
        for (r, int) in rep.iter().zip(&integrals) {
            // the sup part of Theta never leaves its initial value
            assert!((r.theta - int - rep[0].y_ml).abs() <= 1e-10 * r.theta);
        }
        assert!(integrals.last().unwrap() > &0.0);
        assert!(rep.last().unwrap().y_ml < rep[0].y_ml);
    }
}

#[test]
fn stride_halving_converges_at_trapezoid_order() {
    let g = grid();
    let s = decaying_magnetic_state(&g, Physics::new(1.0, 1.0, 0.01));
    for (m, l) in [(1, 0.0), (2, 2.0)] {
        let theta: Vec<f64> =
            [0.1, 0.05, 0.025].iter().map(|&every| report(&s, every, m, l).last().unwrap().theta).collect();
        let coarse = (theta[0] - theta[1]).abs();
        let fine = (theta[1] - theta[2]).abs();
        assert!(coarse / fine >= 3.5, "m={m}: {coarse:e} {fine:e}");
        assert!(fine <= 1e-3 * theta[2]);
    }
}

#[test]
fn report_rows_follow_columns() {
    let g = grid();
    let s = decaying_magnetic_state(&g, Physics::default());
    let rep = report(&s, 0.5, 1, 2.0);
    for r in &rep {
        let row = r.row();
        assert_eq!(row.len(), EnergyReport::COLUMNS.len());
        assert_eq!(row[0], r.time);
        assert_eq!(row[1], r.e_ml);
        assert_eq!(row[6], r.theta);
        assert_eq!(row[16], 0.0);
    }
}
