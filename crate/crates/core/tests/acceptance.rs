//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Runs with a custom harness so the summary lines are always printed.

#![allow(clippy::type_complexity)]

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use blmhd::cancellation::{
    good_unknowns, interior_l2, interior_sup, norm_equivalence_check, slice_residual, GoodField, TransportSign,
};
use blmhd::energy::instantaneous_functionals;
use blmhd::experiments::{
    eps_sweep, persistence_data, sources_for, stability_pair, sweep_data, StabilityResult, SWEEP_LADDER,
};
use blmhd::heat::{heat_bound_check, HeatProblem, EPS_LADDER, HEAT_PROFILES, HEAT_SPREAD_LIMIT};
use blmhd::inequalities::{hardy_check, HARDY_PROFILES};
use blmhd::norms::weighted_l2;
use blmhd::pde::time_jet;
use blmhd::solver::{Manufactured, ManufacturedForcing, Solver, SolverConfig, StopReason};
use blmhd::sources::bootstrap_time_derivatives;
use blmhd::state::background;
use blmhd::{build_grid, Field, GridSpec, MultiIndex, Physics, State};

const HARDY_TOLERANCE: f64 = 1e-2;
const HARDY_REFINEMENT_FACTOR: f64 = 2.0;
/// Changes below this are treated as converged to rounding.
const ROUNDING_CHANGE: f64 = 1e-12;
const APPENDIX_TOLERANCE: f64 = 1e-2;
const MAX_PRINCIPLE_SLACK: f64 = 1e-10;
const EQUILIBRIUM_DRIFT: f64 = 1e-8;
const EQUILIBRIUM_STEPS: usize = 1000;
const SCHEME_ORDER: f64 = 1.8;
const HEAT_ORACLE_TOLERANCE: f64 = 1e-4;
const MIN_PERSISTENCE: f64 = 0.1;
const PERSISTENCE_SPREAD: f64 = 0.2;
const IDENTICAL_PAIR_DIFF: f64 = 1e-12;
const PERTURBED_PAIR_DIFF: f64 = 1e-4;
const GRONWALL_REFINEMENT: f64 = 0.3;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

fn hardy_sharp_form() -> Outcome {
    let levels = [512usize, 1024, 2048];
    let grids: Vec<_> = levels.iter().map(|&ny| build_grid(GridSpec::new(8, ny, 40.0, 3.0, 0.01)).unwrap()).collect();
    let mut worst_ratio: f64 = 0.0;
    let mut worst_refinement = f64::INFINITY;
    let mut failures = Vec::new();
    for (name, profile) in HARDY_PROFILES {
        for lambda in [0.0, 1.0, 2.0] {
            let ratios: Vec<f64> = grids
                .iter()
                .map(|g| {
                    let f = Field::from_fn(g, |x, y| (1.0 + 0.5 * x.cos()) * profile(y));
                    hardy_check(&f, lambda).map(|r| r.ratio).unwrap_or(f64::INFINITY)
                })
                .collect();
            let finest = ratios[2];
            worst_ratio = worst_ratio.max(finest);
            let (c1, c2) = ((ratios[1] - ratios[0]).abs(), (ratios[2] - ratios[1]).abs());
            let refined = c2 <= ROUNDING_CHANGE || c1 >= HARDY_REFINEMENT_FACTOR * c2;
            if c2 > ROUNDING_CHANGE {
                worst_refinement = worst_refinement.min(c1 / c2);
            }
            if !(finest <= 1.0 + HARDY_TOLERANCE) || !refined {
                failures.push(format!("{name} lambda={lambda}"));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "36 cases, max ratio {worst_ratio:.4} at ny=2048, min change reduction per doubling {worst_refinement:.2}{}",
            if failures.is_empty() { String::new() } else { format!(", failing: {failures:?}") }
        ),
    )
}

fn stream_function_constants() -> Outcome {
    let g = build_grid(GridSpec::new(64, 481, 12.0, 2.0, 0.01)).unwrap();
    let bump = |y: f64| (1.0 - 2.0 * y * y) * (-y * y).exp();
    type Data = Box<dyn Fn(f64, f64) -> [f64; 3]>;
    let corpus: Vec<Data> = vec![
        Box::new(move |x, y| [0.0, 0.0, 0.5 * x.sin() * bump(y)]),
        Box::new(move |x, y| {
            [0.05 * x.sin() * (-y * y).exp(), 0.2 * x.cos() * y * (-y * y).exp(), 0.3 * x.cos() * bump(y)]
        }),
        Box::new(move |x, y| [0.0, 0.1 * (2.0 * x).sin() * y * (-y).exp(), 0.4 * (2.0 * x).sin() * bump(y)]),
        Box::new(move |x, y| [0.02 * x.cos() * (1.0 + y) * (-y).exp(), 0.0, 0.2 * x.sin() * (1.0 - y) * (-y).exp()]),
        Box::new(move |x, y| {
            [
                0.0,
                0.3 * (x + 1.0).sin() * y * (-y * y).exp(),
                0.15 * x.cos() * (3.0 - 12.0 * y * y + 4.0 * y.powi(4)) * (-y * y).exp(),
            ]
        }),
        Box::new(move |x, y| {
            [
                0.03 * (2.0 * x).cos() * (-y * y).exp(),
                0.1 * x.sin() * y * y * (-y).exp(),
                0.45 * (x + 0.5).cos() * bump(y),
            ]
        }),
        Box::new(move |x, y| [0.0, 0.0, 0.25 * (x.sin() + 0.5 * (3.0 * x).cos()) * bump(y)]),
        Box::new(move |x, y| {
            [0.04 * x.sin() * (-y * y).exp(), 0.25 * x.sin() * y * (-y * y).exp(), 0.3 * x.sin() * bump(0.7 * y)]
        }),
        Box::new(move |x, y| {
            [0.0, 0.15 * x.cos() * y * (-0.5 * y * y).exp(), 0.35 * (2.0 * x).cos() * (1.0 - y) * (-y).exp()]
        }),
        Box::new(move |x, y| {
            [
                0.05 * x.cos() * (1.0 + y) * (-y).exp(),
                0.2 * (2.0 * x).cos() * y * (-y * y).exp(),
                0.2 * (x - 1.0).sin() * bump(1.5 * y),
            ]
        }),
    ];
    let indices = [
        MultiIndex::tangential(0, 1),
        MultiIndex::tangential(0, 2),
        MultiIndex::tangential(1, 0),
        MultiIndex::tangential(1, 1),
    ];
    let (l, delta) = (2.0, 0.5);
    let mut checked = 0;
    let mut covered = [false; 10];
    let mut skipped = 0;
    let mut worst: f64 = 0.0;
    let mut defect: f64 = 0.0;
    let mut failures = Vec::new();
    for (k, data) in corpus.iter().enumerate() {
        let rho = Field::from_fn(&g, |x, y| data(x, y)[0]);
        let u = &Field::from_fn(&g, |x, y| data(x, y)[1]) + &background(&g);
        let h = Field::from_fn(&g, |x, y| data(x, y)[2]);
        let state = State::new(rho, u, h, Physics::default(), 0.0, 0.25).unwrap();
        for a in indices {
            let report = match norm_equivalence_check(&state, a, l, delta) {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("state {k} ({},{}): {e}", a.t, a.x));
                    continue;
                }
            };
            defect = defect.max(good_unknowns(&state, a, delta).unwrap().reconstruction_defect());
            // the Hardy step behind these bounds needs Z^a psi to decay
            if !report.decay_hypothesis {
                skipped += 1;
                continue;
            }
            checked += 1;
            covered[k] = true;
            for r in &report.reports {
                worst = worst.max(r.ratio);
                if !(r.ratio <= 1.0 + APPENDIX_TOLERANCE) {
                    failures.push(format!("state {k} ({},{}) {}: {:.4}", a.t, a.x, r.name, r.ratio));
                }
            }
        }
    }
    let passed = failures.is_empty() && covered.iter().all(|&c| c) && defect <= 1e-14;
    outcome(
        passed,
        format!(
            "{checked} (state, index) pairs x 5 bounds covering {}/10 states, {skipped} without decaying stream function skipped, max ratio {worst:.4}, reconstruction defect {defect:.1e}{}",
            covered.iter().filter(|&&c| c).count(),
            if failures.is_empty() { String::new() } else { format!(", failing: {failures:?}") }
        ),
    )
}

fn heat_uniformity() -> Outcome {
    let mut worst_spread: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for (name, f0) in HEAT_PROFILES {
        let fam = heat_bound_check(name, &EPS_LADDER, |e| {
            HeatProblem::sampled(e, 30.0, 3001, f0, None, 1.0, 1, vec![0.25, 0.5, 1.0])
        })
        .unwrap();
        let excess = fam.bounds.iter().map(|b| b.max_principle_excess).fold(f64::NEG_INFINITY, f64::max);
        worst_excess = worst_excess.max(excess);
        worst_spread = worst_spread.max(fam.spread);
        worst_ratio = worst_ratio.max(fam.report.ratio);
        if !fam.report.passed || excess > MAX_PRINCIPLE_SLACK {
            failures.push(name);
        }
    }
    let steady = |_t: f64, x: f64| x * (-x).exp();
    let oscillating = |t: f64, x: f64| (2.0 * t).cos() * x * x * (-x).exp();
    let forced: [(&str, &dyn Fn(f64, f64) -> f64, fn(f64) -> f64); 2] =
        [("forced x e^-x", &steady, |_| 0.0), ("forced oscillating", &oscillating, |x| -(-x).exp_m1() * (-x).exp())];
    for (name, g, f0) in forced {
        let fam = heat_bound_check(name, &EPS_LADDER, |e| {
            HeatProblem::sampled(e, 30.0, 1501, f0, Some(g), 1.0, 20, vec![0.25, 0.5, 1.0])
        })
        .unwrap();
        worst_spread = worst_spread.max(fam.spread);
        worst_ratio = worst_ratio.max(fam.report.ratio);
        if !fam.report.passed {
            failures.push(name);
        }
    }
    outcome(
        failures.is_empty() && worst_spread <= HEAT_SPREAD_LIMIT,
        format!(
            "6 problems, max spread {worst_spread:.3} (limit {HEAT_SPREAD_LIMIT}), max ratio {worst_ratio:.3}, max-principle excess {worst_excess:.2e}{}",
            if failures.is_empty() { String::new() } else { format!(", failing: {failures:?}") }
        ),
    )
}

fn equilibrium_preservation() -> Outcome {
    let g = build_grid(GridSpec::new(64, 128, 12.0, 2.0, 0.001)).unwrap();
    let physics = Physics::new(1.0, 1.0, 0.01);
    let s0 = State::equilibrium(&g, physics, 0.25);
    let cfg = SolverConfig {
        physics,
        dt: 0.001,
        t_end: EQUILIBRIUM_STEPS as f64 * 0.001,
        output_every: 0.1,
        cfl_safety: 1.0,
        ..SolverConfig::default()
    };
    let traj = Solver::new(cfg).run(&s0).unwrap();
    let e0 = instantaneous_functionals(&s0, 2, 2.0, 0.25).unwrap().e_ml;
    let drift = traj
        .states
        .iter()
        .map(|s| (instantaneous_functionals(s, 2, 2.0, 0.25).unwrap().e_ml - e0).abs())
        .fold(0.0, f64::max);
    let completed = matches!(traj.stop, StopReason::Completed);
    outcome(
        completed && traj.steps >= EQUILIBRIUM_STEPS && drift <= EQUILIBRIUM_DRIFT,
        format!(
            "{} steps at 64x128, E_2,2(0) = {e0:.6}, max drift {drift:.2e} (limit {EQUILIBRIUM_DRIFT:.0e})",
            traj.steps
        ),
    )
}

fn manufactured_convergence() -> Outcome {
    let solution = Manufactured::standard();
    let mut lines = Vec::new();
    let mut passed = true;
    for eps in [0.0, 0.01] {
        let physics = Physics::new(1.0, 1.0, eps);
        let errors: Vec<f64> = [(16usize, 33usize, 0.02), (32, 65, 0.01), (64, 129, 0.005)]
            .iter()
            .map(|&(nx, ny, dt)| {
                let g = build_grid(GridSpec::new(nx, ny, 12.0, 2.0, dt)).unwrap();
                let s0 = solution.state(&g, 0.0, physics, 0.25).unwrap();
                let cfg = SolverConfig {
                    physics,
                    dt,
                    t_end: 0.5,
                    output_every: 0.5,
                    enforce_monitors: false,
                    cfl_safety: 1.0,
                    ..SolverConfig::default()
                };
                let forcing = Arc::new(ManufacturedForcing { solution: solution.clone(), physics });
                let traj = Solver::new(cfg).with_forcing(forcing).run(&s0).unwrap();
                let fin = traj.final_state();
                let exact = solution.exact_fields(&g, fin.time);
                [&fin.rho - &exact[0], &fin.u - &exact[1], &fin.h - &exact[2]]
                    .iter()
                    .map(|e| weighted_l2(e, 0.0))
                    .fold(0.0, f64::max)
            })
            .collect();
        let orders = [order(errors[0], errors[1]), order(errors[1], errors[2])];
        passed &= orders.iter().all(|&p| p >= SCHEME_ORDER);
        lines.push(format!("eps={eps}: orders {:.3}/{:.3}", orders[0], orders[1]));
    }
    outcome(passed, format!("imex-cn, three levels, {}", lines.join("; ")))
}

fn heat_reduction() -> Outcome {
    let y_max: f64 = 12.0;
    let mu = 0.8;
    let t_end = 0.5;
    let profile = |y: f64| 1.0 - (-y).exp() - 0.3 * y * (-y).exp();
    // sine-series oracle on [0, y_max] with the linear lift between the walls
    let top = profile(y_max);
    let quad = 40_000;
    let step = y_max / quad as f64;
    let coefficients: Vec<f64> = (1..=400)
        .map(|n| {
            let k = n as f64 * PI / y_max;
            let mut s = 0.0;
            for i in 0..=quad {
                let z = i as f64 * step;
                let w = if i == 0 || i == quad {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                s += w * (profile(z) - top * z / y_max) * (k * z).sin();
            }
            2.0 / y_max * s * step / 3.0
        })
        .collect();
    let oracle = |y: f64| {
        coefficients.iter().enumerate().fold(top * y / y_max, |acc, (i, b)| {
            let k = (i + 1) as f64 * PI / y_max;
            acc + b * (-mu * k * k * t_end).exp() * (k * y).sin()
        })
    };
    let g = build_grid(GridSpec::new(64, 256, y_max, 2.0, 0.01)).unwrap();
    let physics = Physics::new(mu, 1.0, 0.01);
    let one = Field::constant(&g, 1.0);
    let s0 = State::from_physical(&one, &Field::from_profile(&g, profile), &one, physics, 0.0, 0.25).unwrap();
    let cfg = SolverConfig { physics, dt: 0.01, t_end, output_every: t_end, ..SolverConfig::default() };
    let traj = Solver::new(cfg).run(&s0).unwrap();
    let fin = traj.final_state();
    let exact = Field::from_profile(&g, oracle);
    let rel = weighted_l2(&(&fin.velocity() - &exact), 0.0) / weighted_l2(&exact, 0.0);
    let x_spread = fin.velocity().dx().max_abs();
    outcome(
        rel <= HEAT_ORACLE_TOLERANCE && (fin.time - t_end).abs() < 1e-12,
        format!("64x256 at t={t_end}: relative L2 error {rel:.2e} (limit {HEAT_ORACLE_TOLERANCE:.0e}), max |d_x u1| {x_spread:.1e}"),
    )
}

fn good_unknown_algebra() -> Outcome {
    let solution = Manufactured::standard();
    let indices = [
        MultiIndex::tangential(0, 1),
        MultiIndex::tangential(1, 0),
        MultiIndex::tangential(1, 1),
        MultiIndex::tangential(0, 2),
    ];
    let fields = [GoodField::Rho, GoodField::U, GoodField::H];
    let mut defect: f64 = 0.0;
    // [interior sup, interior L2, full L2, wall row]
    let mut worst = [f64::INFINITY; 4];
    let mut failures = Vec::new();
    for eps in [0.0, 0.01] {
        let physics = Physics::new(1.0, 1.5, eps);
        for a in indices {
            let mut errors = Vec::new();
            for (nx, ny) in [(64usize, 192usize), (128, 384), (256, 768)] {
                let g = build_grid(GridSpec::new(nx, ny, 12.0, 2.0, 0.01)).unwrap();
                let s = solution.state(&g, 0.3, physics, 0.25).unwrap();
                defect = defect.max(good_unknowns(&s, a, 0.125).unwrap().reconstruction_defect());
                let level: Vec<[f64; 4]> = fields
                    .iter()
                    .map(|&w| {
                        let r = slice_residual(&s, a, w, TransportSign::Derived, 0.125).unwrap();
                        [interior_sup(&r), interior_l2(&r, 0.0), weighted_l2(&r, 0.0), r.wall_max()]
                    })
                    .collect();
                errors.push(level);
            }
            for (k, w) in fields.iter().enumerate() {
                let orders: Vec<f64> = (0..4).map(|n| order(errors[1][k][n], errors[2][k][n])).collect();
                for n in 0..4 {
                    // a residual that is already zero has nothing left to converge
                    if errors[2][k][n] > 0.0 {
                        worst[n] = worst[n].min(orders[n]);
                    }
                }
                if !(orders[0] >= SCHEME_ORDER && orders[1] >= SCHEME_ORDER) {
                    failures.push(format!(
                        "{} eps={eps} ({},{}): {:.2}/{:.2}",
                        w.name(),
                        a.t,
                        a.x,
                        orders[0],
                        orders[1]
                    ));
                }
            }
        }
    }
    outcome(
        failures.is_empty() && defect <= 1e-14,
        format!(
            "reconstruction defect {defect:.1e}; residual orders on the finest pair, above the wall: min sup {:.2}, min L2 {:.2}; including the Neumann wall row: min L2 {:.2}, wall row {:.2}{}",
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            if failures.is_empty() { String::new() } else { format!(", failing: {failures:?}") }
        ),
    )
}

fn monitor_persistence() -> Outcome {
    let g = build_grid(GridSpec::new(64, 128, 12.0, 2.0, 0.01)).unwrap();
    let delta0 = 0.25;
    let mut lengths = Vec::new();
    for eps in [0.1, 0.01, 0.001] {
        let physics = Physics::new(1.0, 1.0, eps);
        let s0 = persistence_data(&g, physics, delta0, 3.0, 0.0175).unwrap();
        let sources = sources_for(&s0, 2).unwrap();
        let cfg = SolverConfig { physics, t_end: 1.0, output_every: 0.05, delta0, ..SolverConfig::default() };
        let traj = Solver::new(cfg).with_sources(Some(sources)).run(&s0).unwrap();
        lengths.push(traj.unbreached_until());
    }
    let s0 = persistence_data(&g, Physics::default(), delta0, 3.0, 0.0175).unwrap();
    let floor = s0.magnetic().min();
    let hi = lengths.iter().copied().fold(0.0, f64::max);
    let lo = lengths.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = (hi - lo) / hi;
    outcome(
        floor >= 2.0 * delta0 && lo >= MIN_PERSISTENCE && spread <= PERSISTENCE_SPREAD,
        format!(
            "min h1(0) = {floor:.3}, unbreached lengths {lengths:?} for eps 0.1/0.01/0.001 (horizon 1.0), spread {:.1}%",
            100.0 * spread
        ),
    )
}

fn vanishing_viscosity() -> Outcome {
    let g = build_grid(GridSpec::new(48, 96, 12.0, 2.0, 0.01)).unwrap();
    let physics = Physics::new(1.0, 1.0, SWEEP_LADDER[0]);
    let cfg = SolverConfig { physics, t_end: 0.5, output_every: 0.1, ..SolverConfig::default() };
    let mut passed = true;
    let mut lines = Vec::new();
    for which in [0, 1] {
        let s0 = sweep_data(&g, physics, 0.25, which).unwrap();
        let sweep = eps_sweep(&s0, &cfg, &SWEEP_LADDER, 2).unwrap();
        let ok = sweep.strictly_decreasing() == Some(true) && sweep.entries.iter().all(|e| e.valid);
        passed &= ok;
        let last: Vec<String> = sweep.pairwise_diffs.iter().map(|d| format!("{:.3e}", d.last().unwrap())).collect();
        lines.push(format!("data {which}: diffs at t=0.5 {last:?}, rate {}", sweep.rates_summary()));
    }
    outcome(passed, format!("ladder {SWEEP_LADDER:?}; {}", lines.join("; ")))
}

fn stability_run(nx: usize, ny: usize, perturbed: bool) -> StabilityResult {
    let g = build_grid(GridSpec::new(nx, ny, 12.0, 2.0, 0.01)).unwrap();
    let physics = Physics::new(1.0, 1.0, 0.1);
    let first = sweep_data(&g, physics, 0.25, 0).unwrap();
    let second = if perturbed {
        let bump = Field::from_fn(&g, |x, y| 1e-6 * (4.0 * x).cos() * (-y * y).exp());
        State::new(&first.rho + &bump, first.u.clone(), first.h.clone(), physics, 0.0, 0.25).unwrap()
    } else {
        first.clone()
    };
    let cfg = SolverConfig { physics, t_end: 0.5, output_every: 0.05, ..SolverConfig::default() };
    let sources = (sources_for(&first, 2).unwrap(), sources_for(&second, 2).unwrap());
    stability_pair(&first, &second, &cfg, Some(sources)).unwrap()
}

fn uniqueness_shadow() -> Outcome {
    let same = stability_run(64, 128, false);
    let same_max = same.norm_sq.iter().chain(&same.raw_norm_sq).copied().fold(0.0, f64::max).sqrt();
    let coarse = stability_run(64, 128, true);
    let fine = stability_run(128, 256, true);
    let max_norm = fine.norm_sq.iter().copied().fold(0.0, f64::max).sqrt();
    let c_change = (coarse.gronwall_c / fine.gronwall_c - 1.0).abs();
    let passed = same_max <= IDENTICAL_PAIR_DIFF
        && coarse.envelope_ok
        && fine.envelope_ok
        && coarse.unbreached
        && fine.unbreached
        && max_norm <= PERTURBED_PAIR_DIFF
        && c_change <= GRONWALL_REFINEMENT
        && fine.reconstruction_defect <= 1e-14;
    outcome(
        passed,
        format!(
            "identical pair max diff {same_max:.1e}; perturbed: C = {:.4} (64x128) / {:.4} (128x256), change {:.1}%, envelope {:.4}/{:.4}, max norm {max_norm:.2e}",
            coarse.gronwall_c,
            fine.gronwall_c,
            100.0 * c_change,
            coarse.envelope_ratio,
            fine.envelope_ratio
        ),
    )
}

fn source_bootstrap() -> Outcome {
    let g = build_grid(GridSpec::new(32, 64, 12.0, 2.0, 0.01)).unwrap();
    let one = Field::constant(&g, 1.0);
    let bundle = bootstrap_time_derivatives(&one, &one, &one, 3, Physics::default()).unwrap();
    let outer_max = (0..bundle.depth()).flat_map(|i| bundle.level(i).iter().map(Field::max_abs)).fold(0.0, f64::max);

    let mut errors = Vec::new();
    for (nx, ny) in [(16usize, 48usize), (32, 96), (64, 192), (128, 384)] {
        let g = build_grid(GridSpec::new(nx, ny, 12.0, 2.0, 0.01)).unwrap();
        let plain = sweep_data(&g, Physics::new(1.0, 1.0, 0.0), 0.25, 1).unwrap();
        let mut regularized = plain.clone().with_sources(Some(sources_for(&plain, 2).unwrap()));
        regularized.physics = Physics::new(1.0, 1.0, 0.1);
        let a = time_jet(&plain, 1).unwrap();
        let b = time_jet(&regularized, 1).unwrap();
        errors.push([(&a.rho[1] - &b.rho[1]).max_abs(), (&a.u[1] - &b.u[1]).max_abs(), (&a.h[1] - &b.h[1]).max_abs()]);
    }
    let n = errors.len();
    let orders: Vec<f64> = (0..3).map(|k| order(errors[n - 2][k], errors[n - 1][k])).collect();
    outcome(
        outer_max == 0.0 && orders.iter().all(|&p| p >= SCHEME_ORDER),
        format!(
            "outer-state sources max |r| = {outer_max:e}; first time derivative agreement orders (rho, u, h) {:.2}/{:.2}/{:.2}",
            orders[0], orders[1], orders[2]
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, u64); 11] = [
        ("Hardy sharp form", hardy_sharp_form, 10),
        ("stream-function constants", stream_function_constants, 30),
        ("uniform heat estimate", heat_uniformity, 20),
        ("equilibrium preservation", equilibrium_preservation, 60),
        ("manufactured convergence", manufactured_convergence, 300),
        ("x-independent heat reduction", heat_reduction, 60),
        ("good-unknown algebra", good_unknown_algebra, 300),
        ("monitor persistence", monitor_persistence, 300),
        ("vanishing viscosity", vanishing_viscosity, 600),
        ("stability pair", uniqueness_shadow, 600),
        ("source bootstrap", source_bootstrap, 60),
    ];
    let mut failed = 0;
    for (k, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let ok = result.passed && in_time;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{:.1}s of {budget}s]",
            k + 1,
            if ok { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
