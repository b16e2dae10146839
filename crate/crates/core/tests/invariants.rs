//! Property tests for the structural invariants of norms, fields, good
//! unknowns, the heat estimate and the solver.

use std::sync::Arc;

use proptest::prelude::*;

use blmhd::cancellation::good_unknowns;
use blmhd::heat::{heat_bound, HeatProblem};
use blmhd::inequalities::hardy_check;
use blmhd::norms::{conormal_norm, weighted_l2, IndexSet, NormSpec};
use blmhd::solver::{Solver, SolverConfig};
use blmhd::sources::SourceBundle;
use blmhd::state::background;
use blmhd::{build_grid, Field, Grid, GridSpec, MultiIndex, Physics, State};

fn grid() -> Arc<Grid> {
    build_grid(GridSpec::new(16, 96, 12.0, 2.0, 0.01)).unwrap()
}

/// Smooth decaying field `amp cos(k x + shift) y^p exp(-width y^2)`.
#[derive(Debug, Clone, Copy)]
struct Bump {
    amp: f64,
    k: f64,
    shift: f64,
    power: i32,
    width: f64,
}

impl Bump {
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.amp * (self.k * x + self.shift).cos() * y.powi(self.power) * (-self.width * y * y).exp()
    }
    fn field(&self, g: &Arc<Grid>) -> Field {
        Field::from_fn(g, |x, y| self.eval(x, y))
    }
}

fn bump(amp: std::ops::Range<f64>, min_power: i32) -> impl Strategy<Value = Bump> {
    (amp, 0..3u8, 0.0..std::f64::consts::TAU, min_power..3i32, 0.5..2.0f64)
        .prop_map(|(amp, k, shift, power, width)| Bump { amp, k: k as f64, shift, power, width })
}

/// A field together with three surrogate time levels.
fn levels(f: &Field) -> Vec<Field> {
    vec![f.clone(), f.dx(), f.dxx(), f.dx_n(3)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn conormal_norm_is_homogeneous(b in bump(-1.0..1.0, 0), c in -5.0..5.0f64, m in 0usize..3, l in 0.0..3.0f64) {
        let g = grid();
        let f = b.field(&g);
        let spec = NormSpec::full(m, l);
        let base = conormal_norm(&levels(&f), spec).unwrap();
        let scaled = conormal_norm(&levels(&f.scale(c)), spec).unwrap();
        prop_assert!((scaled - c.abs() * base).abs() <= 1e-12 * (1.0 + c.abs() * base));
    }

    #[test]
    fn conormal_norm_is_monotone(b in bump(-1.0..1.0, 0), m in 1usize..3, l in 0.0..2.0f64, dl in 0.0..1.0f64) {
        let g = grid();
        let lv = levels(&b.field(&g));
        let full = conormal_norm(&lv, NormSpec::new(m, l, IndexSet::Full)).unwrap();
        let capped = conormal_norm(&lv, NormSpec::new(m, l, IndexSet::TangentialCapped)).unwrap();
        let tangential = conormal_norm(&lv, NormSpec::new(m, l, IndexSet::Tangential)).unwrap();
        let higher = conormal_norm(&lv, NormSpec::full(m + 1, l)).unwrap();
        prop_assert!(full >= capped);
        prop_assert!(full >= tangential);
        prop_assert!(higher >= full);
        let f = &lv[0];
        prop_assert!(weighted_l2(f, l + dl) >= weighted_l2(f, l));
    }

    #[test]
    fn tangential_and_conormal_derivatives_commute(b in bump(-1.0..1.0, 0)) {
        let g = grid();
        let f = b.field(&g);
        let a = f.dx().z2();
        let c = f.z2().dx();
        prop_assert!((&a - &c).max_abs() <= 1e-12 * (1.0 + a.max_abs()));
    }

    #[test]
    fn stream_function_vanishes_on_the_wall(h in bump(-0.4..0.4, 0), u in bump(-0.3..0.3, 1)) {
        let g = grid();
        let s = State::new(Field::zeros(&g), &u.field(&g) + &background(&g), h.field(&g), Physics::default(), 0.0, 0.25).unwrap();
        prop_assert_eq!(s.psi.wall_max(), 0.0);
        prop_assert_eq!(s.v.wall_max(), 0.0);
        prop_assert_eq!(s.g.wall_max(), 0.0);
        // d_y psi reproduces h up to the differentiation error of the grid
        let err = (&s.psi.dy() - &s.h).max_abs();
        prop_assert!(err <= 0.05 * (1e-3 + s.h.max_abs()), "{}", err);
    }

    #[test]
    fn good_unknowns_reconstruct_tangential_derivatives(
        rho in bump(-0.05..0.05, 0),
        u in bump(-0.3..0.3, 1),
        h in bump(-0.4..0.4, 0),
        t in 0usize..2,
        x in 0usize..2,
    ) {
        prop_assume!(t + x > 0);
        let g = grid();
        let s = State::new(rho.field(&g), &u.field(&g) + &background(&g), h.field(&g), Physics::default(), 0.0, 0.25).unwrap();
        let gu = good_unknowns(&s, MultiIndex::tangential(t, x), 0.125).unwrap();
        prop_assert!(gu.reconstruction_defect() <= 1e-13);
    }

    #[test]
    fn hardy_holds_in_sharp_form(b in bump(0.1..1.0, 1), lambda in 0.0..2.5f64) {
        let g = build_grid(GridSpec::new(8, 1024, 30.0, 3.0, 0.01)).unwrap();
        let r = hardy_check(&b.field(&g), lambda).unwrap();
        prop_assert!(r.ratio <= 1.0 + 1e-2, "{}", r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn heat_flow_obeys_the_maximum_principle(amp in 0.1..2.0f64, decay in 0.3..2.0f64, eps in 1e-4..1e-1f64, forced in any::<bool>()) {
        let f0 = move |x: f64| amp * x * (-decay * x).exp();
        let g = move |t: f64, x: f64| (3.0 * t).sin() * x * (-x).exp();
        let p = if forced {
            HeatProblem::sampled(eps, 30.0, 1201, f0, Some(&g), 1.0, 10, vec![0.5, 1.0])
        } else {
            HeatProblem::sampled(eps, 30.0, 1201, f0, None, 1.0, 1, vec![0.5, 1.0])
        };
        let b = heat_bound(&p).unwrap();
        prop_assert!(b.max_principle_excess <= 1e-10, "{}", b.max_principle_excess);
    }

    #[test]
    fn source_polynomial_derivatives_are_consistent(c in proptest::collection::vec(-2.0..2.0f64, 3), t in 0.0..1.0f64) {
        let g = build_grid(GridSpec::new(8, 16, 12.0, 1.0, 0.01)).unwrap();
        let lv = |v: f64| -> [Field; 4] { std::array::from_fn(|_| Field::constant(&g, v)) };
        let b = SourceBundle::from_levels(c.iter().map(|&v| lv(v)).collect()).unwrap();
        let value = b.derivative_at(t, 0)[0].values()[[0, 0]];
        let slope = b.derivative_at(t, 1)[0].values()[[0, 0]];
        prop_assert!((value - (c[0] + c[1] * t + 0.5 * c[2] * t * t)).abs() <= 1e-14);
        prop_assert!((slope - (c[1] + c[2] * t)).abs() <= 1e-14);
        prop_assert_eq!(b.derivative_at(t, 3)[0].max_abs(), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn solver_is_deterministic_and_holds_the_far_field(
        rho in bump(-0.01..0.01, 0),
        u in bump(-0.2..0.2, 1),
        h in bump(-0.3..0.3, 0),
    ) {
        let g = grid();
        let physics = Physics::new(1.0, 1.0, 0.01);
        let s0 = State::new(rho.field(&g), &u.field(&g) + &background(&g), h.field(&g), physics, 0.0, 0.25).unwrap();
        let cfg = SolverConfig { physics, t_end: 0.2, output_every: 0.1, enforce_monitors: false, ..SolverConfig::default() };
        let a = Solver::new(cfg).run(&s0).unwrap();
        let b = Solver::new(cfg).run(&s0).unwrap();
        prop_assert_eq!(a.states.len(), b.states.len());
        for (x, y) in a.states.iter().zip(&b.states) {
            prop_assert_eq!(x.time, y.time);
            for (p, q) in [(&x.rho, &y.rho), (&x.u, &y.u), (&x.h, &y.h)] {
                prop_assert!(p.values().iter().zip(q.values().iter()).all(|(m, n)| m.to_bits() == n.to_bits()));
            }
            // far-field rows keep their initial (exponentially small) values
            for (now, start) in [(&x.rho, &s0.rho), (&x.u, &s0.u), (&x.h, &s0.h)] {
                prop_assert!((now - start).far_field_max() <= 1e-8);
            }
        }
    }
}
