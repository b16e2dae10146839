//! The verbs: each runs one study from a config, writes its artifacts and
//! reports its assertions.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde_json::{json, Map, Value};

use blmhd::cancellation::{
    good_unknowns, interior_l2, interior_sup, norm_equivalence_check, slice_residual, GoodField, TransportSign,
    MAX_TIME_ORDER,
};
use blmhd::energy::{instantaneous_functionals, trajectory_report, EnergyReport};
use blmhd::experiments::{eps_sweep_with_workers, sources_for, stability_pair_with_workers, SWEEP_NORM};
use blmhd::heat::{heat_bound_check, HeatProblem, EPS_LADDER, HEAT_CONSTANT, HEAT_PROFILES};
use blmhd::inequalities::{hardy_check, sobolev_check, InequalityReport, HARDY_PROFILES};
use blmhd::norms::{b_norms, state_conormal_norm, IndexSet, NormSpec};
use blmhd::pde::Unknown;
use blmhd::solver::{MonitorStatus, Solver, StopReason};
use blmhd::{Field, Grid, MultiIndex, State};

use crate::config::RunConfig;
use crate::manifest::Suite;
use crate::output::{write_csv, write_snapshot, Cell, OutputError, Snapshot};

/// Reconstruction identities are exact up to rounding.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-12;
/// Maximum-principle slack for unforced heat problems.
pub const MAX_PRINCIPLE_SLACK: f64 = 1e-10;
/// Hardy weights of the default corpus.
pub const HARDY_WEIGHTS: [f64; 3] = [0.0, 1.0, 2.0];
/// Grid points of the default heat problems.
const HEAT_POINTS: usize = 1501;
/// The Hardy corpus needs a domain on which its profiles have decayed.
const INEQUALITY_Y_MAX: f64 = 40.0;
const INEQUALITY_STRETCH: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Verb {
    Simulate,
    VerifyInequalities,
    Cancellation,
    Sweep,
    Stability,
    Norms,
}

impl Verb {
    pub fn name(&self) -> &'static str {
        match self {
            Verb::Simulate => "simulate",
            Verb::VerifyInequalities => "verify-inequalities",
            Verb::Cancellation => "cancellation",
            Verb::Sweep => "sweep",
            Verb::Stability => "stability",
            Verb::Norms => "norms",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Numerics(#[from] blmhd::Error),
    #[error(transparent)]
    Output(#[from] OutputError),
}

/// What a verb produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub suites: Vec<Suite>,
    pub warnings: Vec<String>,
    /// Verb-specific results for the JSON summary.
    pub results: Map<String, Value>,
    pub outputs: Vec<PathBuf>,
}

struct Writer<'a> {
    dir: &'a Path,
    outputs: Vec<PathBuf>,
}

impl Writer<'_> {
    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<Cell>]) -> Result<(), OutputError> {
        let path = self.dir.join(name);
        write_csv(&path, header, rows)?;
        self.outputs.push(path);
        Ok(())
    }
}

pub fn run_verb(verb: Verb, cfg: &RunConfig, out_dir: &Path, seed: Option<u64>) -> Result<Outcome, CommandError> {
    let mut w = Writer { dir: out_dir, outputs: Vec::new() };
    let mut outcome = match verb {
        Verb::Simulate => simulate(cfg, &mut w)?,
        Verb::VerifyInequalities => verify_inequalities(cfg, &mut w, seed)?,
        Verb::Cancellation => cancellation(cfg, &mut w)?,
        Verb::Sweep => sweep(cfg, &mut w)?,
        Verb::Stability => stability(cfg, &mut w)?,
        Verb::Norms => norms(cfg, &mut w)?,
    };
    outcome.outputs = w.outputs;
    Ok(outcome)
}

fn source_warning(cfg: &RunConfig) -> Option<String> {
    let depth = cfg.experiment.source_depth;
    (cfg.physics.eps > 0.0 && depth <= cfg.monitors.m).then(|| {
        format!(
            "compatibility sources match time levels 0..{} of the data; the order-{} norms also use level {}",
            depth.saturating_sub(1),
            cfg.monitors.m,
            cfg.monitors.m
        )
    })
}

const DIFFERENCE_WEIGHT_WARNING: &str = "difference norms use the unweighted L^2 (l = 0)";

fn sources(cfg: &RunConfig, s0: &State) -> blmhd::Result<Option<Arc<blmhd::sources::SourceBundle>>> {
    if cfg.experiment.source_depth == 0 {
        Ok(None)
    } else {
        sources_for(s0, cfg.experiment.source_depth).map(Some)
    }
}

fn monitor_json(m: &MonitorStatus) -> Value {
    json!({
        "time": m.time,
        "h_floor": m.h_floor,
        "rho_sup": m.rho_sup,
        "shear_sup": m.shear_sup,
        "rho_band_ok": m.rho_band_ok,
        "breached": m.breached,
    })
}

fn report_json(r: &EnergyReport) -> Value {
    let map: Map<String, Value> =
        EnergyReport::COLUMNS.iter().zip(r.row()).map(|(k, v)| (k.to_string(), json!(v))).collect();
    Value::Object(map)
}

fn energy_rows(reports: &[EnergyReport]) -> Vec<Vec<Cell>> {
    reports.iter().map(|r| r.row().iter().map(|&v| Cell::Num(v)).collect()).collect()
}

fn simulate(cfg: &RunConfig, w: &mut Writer<'_>) -> Result<Outcome, CommandError> {
    let grid = cfg.build_grid()?;
    let s0 = cfg.initial_state(&grid)?;
    let solver = Solver::new(cfg.solver_config()).with_sources(sources(cfg, &s0)?);
    let traj = solver.run(&s0)?;
    let reports = trajectory_report(&traj, cfg.monitors.m, cfg.monitors.l, cfg.monitors.delta0)?;
    w.csv("energy.csv", &EnergyReport::COLUMNS, &energy_rows(&reports))?;
    if cfg.solver.snapshots {
        let dir = w.dir.join("snapshots");
        crate::output::create_dir(&dir)?;
        for (k, s) in traj.states.iter().enumerate() {
            let path = dir.join(format!("state_{k:04}.bin"));
            write_snapshot(&path, &Snapshot::from_state(s))?;
            w.outputs.push(path);
        }
    }

    let mut run = Suite::new("run");
    let stop = match traj.stop {
        StopReason::Completed => json!({ "completed": true }),
        StopReason::Breach { time, last_unbreached } => {
            json!({ "completed": false, "breach_time": time, "last_unbreached": last_unbreached })
        }
    };
    run.check(matches!(traj.stop, StopReason::Completed), || {
        format!("monitor breach, unbreached until t = {}", traj.unbreached_until())
    });
    run.check(reports.iter().all(|r| r.row().iter().all(|v| v.is_finite())), || "non-finite energy functional".into());
    let mut monitors = Suite::new("monitors");
    for m in &traj.monitors {
        monitors.check(!m.breached, || format!("t = {}: {m}", m.time));
    }

    let mut warnings: Vec<String> = traj.warnings.clone();
    warnings.extend(source_warning(cfg));
    let mut results = Map::new();
    results.insert("data".into(), json!(cfg.experiment.data.name()));
    results.insert("steps".into(), json!(traj.steps));
    results.insert("stop".into(), stop);
    results.insert("unbreached_until".into(), json!(traj.unbreached_until()));
    results.insert("final".into(), reports.last().map(report_json).unwrap_or(Value::Null));
    results.insert("monitor_history".into(), Value::Array(traj.monitors.iter().map(monitor_json).collect()));
    Ok(Outcome { suites: vec![run, monitors], warnings, results, ..Outcome::default() })
}

/// One corpus instance of the inequality check.
enum Instance {
    Hardy { profile: usize, lambda: f64 },
    Sobolev { profile: usize },
    Heat { profile: usize },
}

const INEQUALITY_HEADER: [&str; 10] =
    ["inequality", "test_function", "parameter", "lhs", "rhs", "ratio", "constant", "tolerance", "passed", "metadata"];

fn inequality_row(test_function: &str, parameter: String, r: &InequalityReport) -> Vec<Cell> {
    vec![
        r.name.as_str().into(),
        test_function.into(),
        parameter.into(),
        r.lhs.into(),
        r.rhs.into(),
        r.ratio.into(),
        r.constant.into(),
        r.tolerance.into(),
        r.passed.into(),
        r.metadata.as_str().into(),
    ]
}

fn verify_inequalities(cfg: &RunConfig, w: &mut Writer<'_>, seed: Option<u64>) -> Result<Outcome, CommandError> {
    let mut spec = cfg.grid_spec();
    spec.y_max = spec.y_max.max(INEQUALITY_Y_MAX);
    spec.stretch = spec.stretch.max(INEQUALITY_STRETCH);
    let grid = Arc::new(Grid::new(spec, cfg.grid.x_derivative)?);
    let mut instances = Vec::new();
    for profile in 0..HARDY_PROFILES.len() {
        for lambda in HARDY_WEIGHTS {
            instances.push(Instance::Hardy { profile, lambda });
        }
        instances.push(Instance::Sobolev { profile });
    }
    instances.extend((0..HEAT_PROFILES.len()).map(|profile| Instance::Heat { profile }));
    if let Some(seed) = seed {
        instances.shuffle(&mut StdRng::seed_from_u64(seed));
    }

    let mut hardy = Suite::new("hardy");
    let mut sobolev = Suite::new("sobolev");
    let mut heat = Suite::new("heat");
    let mut rows = Vec::new();
    let mut worst = Map::new();
    let mut record = |key: &str, ratio: f64| {
        let entry = worst.entry(key.to_string()).or_insert(json!(0.0));
        if ratio > entry.as_f64().unwrap_or(0.0) {
            *entry = json!(ratio);
        }
    };
    for inst in instances {
        match inst {
            Instance::Hardy { profile, lambda } => {
                let (name, f) = HARDY_PROFILES[profile];
                let field = Field::from_fn(&grid, |x, y| (1.0 + 0.5 * x.cos()) * f(y));
                match hardy_check(&field, lambda) {
                    Ok(r) => {
                        hardy.check(r.passed, || format!("{name} lambda={lambda}: ratio {}", r.ratio));
                        record("hardy", r.ratio);
                        rows.push(inequality_row(name, format!("lambda={lambda}"), &r));
                    }
                    Err(e) => hardy.check(false, || format!("{name} lambda={lambda}: {e}")),
                }
            }
            Instance::Sobolev { profile } => {
                let (name, f) = HARDY_PROFILES[profile];
                let field = Field::from_fn(&grid, |x, y| (1.0 + 0.5 * x.cos()) * f(y));
                let r = sobolev_check(&field);
                sobolev.check(r.passed, || format!("{name}: ratio {}", r.ratio));
                record("sobolev", r.ratio);
                rows.push(inequality_row(name, "-".into(), &r));
            }
            Instance::Heat { profile } => {
                let (name, f0) = HEAT_PROFILES[profile];
                let fam = heat_bound_check("heat", &EPS_LADDER, |e| {
                    HeatProblem::sampled(e, 30.0, HEAT_POINTS, f0, None, 1.0, 1, vec![0.25, 0.5, 1.0])
                })?;
                for b in &fam.bounds {
                    let r = InequalityReport::with_constant(
                        "heat",
                        b.numerator,
                        b.denominator,
                        HEAT_CONSTANT,
                        0.0,
                        format!("max_principle_excess={:e}", b.max_principle_excess),
                    );
                    let ok = r.passed && b.max_principle_excess <= MAX_PRINCIPLE_SLACK;
                    heat.check(ok, || {
                        format!("{name} eps={}: ratio {}, excess {:e}", b.eps, r.ratio, b.max_principle_excess)
                    });
                    record("heat", r.ratio);
                    rows.push(inequality_row(name, format!("eps={}", b.eps), &r));
                }
                heat.check(fam.report.passed, || format!("{name}: spread {}", fam.spread));
                rows.push(inequality_row(name, "eps-ladder".into(), &fam.report));
            }
        }
    }
    w.csv("inequalities.csv", &INEQUALITY_HEADER, &rows)?;
    let mut results = Map::new();
    results.insert("rows".into(), json!(rows.len()));
    results
        .insert("grid".into(), json!({ "nx": spec.nx, "ny": spec.ny, "y_max": spec.y_max, "stretch": spec.stretch }));
    results.insert("max_ratio".into(), Value::Object(worst));
    Ok(Outcome { suites: vec![hardy, sobolev, heat], results, ..Outcome::default() })
}

fn cancellation(cfg: &RunConfig, w: &mut Writer<'_>) -> Result<Outcome, CommandError> {
    let grid = cfg.build_grid()?;
    let state = cfg.initial_state(&grid)?;
    let delta = cfg.monitors.delta0 / 2.0;
    let l = cfg.monitors.l;
    let mut indices = Vec::new();
    for t in 0..=MAX_TIME_ORDER.min(cfg.monitors.m) {
        for x in 0..=(cfg.monitors.m - t) {
            if t + x > 0 {
                indices.push(MultiIndex::tangential(t, x));
            }
        }
    }

    let mut identities = Suite::new("reconstruction");
    let mut bounds = Suite::new("stream-function bounds");
    let mut bound_rows = Vec::new();
    let mut residual_rows = Vec::new();
    let mut skipped = 0;
    for &a in &indices {
        let label = format!("({},{})", a.t, a.x);
        let gu = good_unknowns(&state, a, delta)?;
        let defect = gu.reconstruction_defect();
        identities.check(defect <= RECONSTRUCTION_TOLERANCE, || format!("{label}: defect {defect:e}"));
        for which in GoodField::ALL {
            let r = slice_residual(&state, a, which, TransportSign::Derived, delta)?;
            residual_rows.push(vec![
                a.t.into(),
                a.x.into(),
                which.name().into(),
                interior_sup(&r).into(),
                interior_l2(&r, l).into(),
                r.wall_max().into(),
            ]);
        }
        let report = norm_equivalence_check(&state, a, l, delta)?;
        if !report.decay_hypothesis {
            skipped += 1;
        }
        for r in &report.reports {
            if report.decay_hypothesis {
                bounds.check(r.passed, || format!("{label} {}: ratio {}", r.name, r.ratio));
            }
            bound_rows.push(vec![
                a.t.into(),
                a.x.into(),
                r.name.as_str().into(),
                r.lhs.into(),
                r.rhs.into(),
                r.ratio.into(),
                r.passed.into(),
                report.decay_hypothesis.into(),
            ]);
        }
    }
    w.csv(
        "stream_function_bounds.csv",
        &["index_t", "index_x", "bound", "lhs", "rhs", "ratio", "passed", "decay_hypothesis"],
        &bound_rows,
    )?;
    w.csv(
        "good_unknown_residuals.csv",
        &["index_t", "index_x", "equation", "interior_sup", "interior_l2", "wall_sup"],
        &residual_rows,
    )?;
    let mut results = Map::new();
    results.insert("data".into(), json!(cfg.experiment.data.name()));
    results.insert("indices".into(), json!(indices.iter().map(|a| [a.t, a.x]).collect::<Vec<_>>()));
    results.insert("delta".into(), json!(delta));
    results.insert("skipped_without_decay".into(), json!(skipped));
    let mut warnings = Vec::new();
    if bounds.checked == 0 {
        warnings.push(format!(
            "no index has a decaying stream function for `{}` data; bounds unchecked",
            cfg.experiment.data.name()
        ));
    }
    Ok(Outcome { suites: vec![identities, bounds], warnings, results, ..Outcome::default() })
}

fn sweep(cfg: &RunConfig, w: &mut Writer<'_>) -> Result<Outcome, CommandError> {
    let grid = cfg.build_grid()?;
    let ladder = &cfg.experiment.ladder;
    let s0 = cfg.initial_state(&grid)?;
    let result =
        eps_sweep_with_workers(&s0, &cfg.solver_config(), ladder, cfg.experiment.source_depth, cfg.experiment.workers)?;

    let mut header = vec!["time".to_string()];
    header.extend(ladder.windows(2).map(|p| format!("diff_{}_{}", p[0], p[1])));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<Cell>> = result
        .times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            std::iter::once(Cell::Num(t)).chain(result.pairwise_diffs.iter().map(|d| Cell::Num(d[i]))).collect()
        })
        .collect();
    w.csv("sweep.csv", &header, &rows)?;

    let mut runs = Suite::new("runs");
    for e in &result.entries {
        runs.check(e.valid, || format!("eps={}: breached, unbreached until t = {}", e.eps, e.unbreached_until));
    }
    let mut cauchy = Suite::new("cauchy");
    let decreasing = result.strictly_decreasing();
    if let Some(ok) = decreasing {
        cauchy.check(ok, || "pairwise differences do not decrease down the ladder".into());
    }
    let mut results = Map::new();
    results.insert("eps_ladder".into(), json!(ladder));
    results.insert(
        "entries".into(),
        Value::Array(
            result
                .entries
                .iter()
                .map(|e| json!({ "eps": e.eps, "valid": e.valid, "unbreached_until": e.unbreached_until, "steps": e.steps }))
                .collect(),
        ),
    );
    results.insert("norm".into(), json!({ "m": SWEEP_NORM.m, "l": SWEEP_NORM.l }));
    results.insert(
        "final_diffs".into(),
        json!(result.pairwise_diffs.iter().map(|d| d.last().copied()).collect::<Vec<_>>()),
    );
    results.insert("reduction_factors".into(), json!(result.rates));
    results.insert("rates".into(), json!(result.rates_summary()));
    results.insert("strictly_decreasing".into(), json!(decreasing));
    let mut warnings = vec![DIFFERENCE_WEIGHT_WARNING.to_string()];
    warnings.extend(source_warning(cfg));
    Ok(Outcome { suites: vec![runs, cauchy], warnings, results, ..Outcome::default() })
}

fn stability(cfg: &RunConfig, w: &mut Writer<'_>) -> Result<Outcome, CommandError> {
    let grid = cfg.build_grid()?;
    let first = cfg.initial_state(&grid)?;
    let amp = cfg.experiment.perturbation;
    let bump = Field::from_fn(&grid, |x, y| amp * (4.0 * x).cos() * (-y * y).exp());
    let second =
        State::new(&first.rho + &bump, first.u.clone(), first.h.clone(), first.physics, first.time, first.delta0)?;
    let pair_sources = match (sources(cfg, &first)?, sources(cfg, &second)?) {
        (Some(a), Some(b)) => Some((a, b)),
        _ => None,
    };
    let r = stability_pair_with_workers(&first, &second, &cfg.solver_config(), pair_sources, cfg.experiment.workers)?;
    let rows: Vec<Vec<Cell>> = r
        .times
        .iter()
        .zip(&r.norm_sq)
        .zip(&r.raw_norm_sq)
        .map(|((&t, &n), &raw)| vec![t.into(), n.into(), raw.into()])
        .collect();
    w.csv("stability.csv", &["time", "norm_sq", "raw_norm_sq"], &rows)?;

    let mut suite = Suite::new("gronwall");
    suite.check(r.unbreached, || "a run breached its monitors".into());
    suite.check(r.envelope_ok, || format!("envelope ratio {}", r.envelope_ratio));
    suite.check(r.gronwall_c.is_finite(), || "fitted rate is not finite".into());
    suite.check(r.reconstruction_defect <= RECONSTRUCTION_TOLERANCE, || {
        format!("reconstruction defect {:e}", r.reconstruction_defect)
    });
    let mut results = Map::new();
    results.insert("perturbation".into(), json!(amp));
    results.insert("gronwall_c".into(), json!(r.gronwall_c));
    results.insert("envelope_ratio".into(), json!(r.envelope_ratio));
    results.insert("envelope_ok".into(), json!(r.envelope_ok));
    results.insert("unbreached".into(), json!(r.unbreached));
    results.insert("reconstruction_defect".into(), json!(r.reconstruction_defect));
    let mut warnings = vec![DIFFERENCE_WEIGHT_WARNING.to_string()];
    warnings.extend(source_warning(cfg));
    Ok(Outcome { suites: vec![suite], warnings, results, ..Outcome::default() })
}

fn norms(cfg: &RunConfig, w: &mut Writer<'_>) -> Result<Outcome, CommandError> {
    let grid = cfg.build_grid()?;
    let state = cfg.initial_state(&grid)?;
    let (m, l) = (cfg.monitors.m, cfg.monitors.l);
    let mut values: Vec<(String, f64)> = Vec::new();
    for (name, which) in [("rho", Unknown::Rho), ("u", Unknown::U), ("h", Unknown::H)] {
        for (set_name, set) in [("full", IndexSet::Full), ("tangential", IndexSet::Tangential)] {
            let v = state_conormal_norm(&state, which, NormSpec::new(m, l, set))?;
            values.push((format!("{name}_{set_name}"), v));
        }
    }
    let b = b_norms(&state.density(), &state.velocity(), &state.magnetic(), m, l, state.physics)?;
    values.push(("b_bar".into(), b.b_bar));
    values.push(("b_hat".into(), b.b_hat));
    values.push(("b_hat_near_wall".into(), b.b_hat_near_wall));
    let e = instantaneous_functionals(&state, m, l, cfg.monitors.delta0)?;
    for (k, v) in EnergyReport::COLUMNS.iter().zip(e.row()).skip(1) {
        values.push((k.to_string(), v));
    }
    let rows: Vec<Vec<Cell>> = values.iter().map(|(k, v)| vec![k.as_str().into(), (*v).into()]).collect();
    w.csv("norms.csv", &["quantity", "value"], &rows)?;
    let mut finite = Suite::new("finite");
    for (k, v) in &values {
        finite.check(v.is_finite(), || format!("{k} = {v}"));
    }
    let mut results = Map::new();
    results.insert("m".into(), json!(m));
    results.insert("l".into(), json!(l));
    results.insert("values".into(), Value::Object(values.into_iter().map(|(k, v)| (k, json!(v))).collect()));
    Ok(Outcome { suites: vec![finite], results, ..Outcome::default() })
}
