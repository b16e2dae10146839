//! INI-style run configuration.
//!
//! ```text
//! [grid]        nx, ny (required), y_max, stretch, x_derivative
//! [physics]     mu, kappa, eps
//! [solver]      dt, t_end, scheme, cfl_safety, output_every, enforce_monitors, snapshots
//! [monitors]    delta0, l, m
//! [experiment]  data, amplitude, density, source_depth, ladder, perturbation, workers
//! ```
//!
//! `experiment.data` is one of `equilibrium`, `persistence`, `mixed` or
//! `zero-flux`; `amplitude` and `density` scale the velocity and density
//! perturbations of `persistence` and `zero-flux`.
//!
//! Lines are `key = value`; blank lines and lines starting with `#` or `;`
//! are ignored. Every key except `grid.nx` and `grid.ny` has a default.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};
use thiserror::Error;

use blmhd::experiments::{persistence_data, sweep_data};
use blmhd::solver::{Scheme, SolverConfig};
use blmhd::state::background;
use blmhd::{Field, Grid, GridSpec, Physics, State, XDerivative};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("duplicate key `{key}` at lines {first} and {second}")]
    Duplicate { key: String, first: usize, second: usize },

    #[error("missing required key `{0}`")]
    Missing(String),

    #[error("line {line}: `{key}`: cannot parse {value:?}: {message}")]
    Parse { key: String, line: usize, value: String, message: String },

    #[error("`{key}` out of range: {message}")]
    Range { key: String, message: String },
}

impl ConfigError {
    fn range(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Range { key: key.to_string(), message: message.into() }
    }
}

/// Every accepted key with its default; `None` marks a required key.
const SCHEMA: &[(&str, &str, Option<&str>)] = &[
    ("grid", "nx", None),
    ("grid", "ny", None),
    ("grid", "y_max", Some("12")),
    ("grid", "stretch", Some("2")),
    ("grid", "x_derivative", Some("fourth-order")),
    ("physics", "mu", Some("1")),
    ("physics", "kappa", Some("1")),
    ("physics", "eps", Some("0.01")),
    ("solver", "dt", Some("0.01")),
    ("solver", "t_end", Some("0.5")),
    ("solver", "scheme", Some("imex-cn")),
    ("solver", "cfl_safety", Some("0.5")),
    ("solver", "output_every", Some("0.05")),
    ("solver", "enforce_monitors", Some("true")),
    ("solver", "snapshots", Some("false")),
    ("monitors", "delta0", Some("0.25")),
    ("monitors", "l", Some("2")),
    ("monitors", "m", Some("2")),
    ("experiment", "data", Some("persistence")),
    ("experiment", "amplitude", Some("0.3")),
    ("experiment", "density", Some("0.01")),
    ("experiment", "source_depth", Some("2")),
    ("experiment", "ladder", Some("0.1, 0.05, 0.025, 0.0125")),
    ("experiment", "perturbation", Some("1e-6")),
    ("experiment", "workers", Some("0")),
];

/// Initial data families selectable by `experiment.data`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataSet {
    /// `(rho, u1, h1) = (1, 1, 1)`.
    Equilibrium,
    /// `h1 = 1 - 0.5 cos x e^{-y^2}`, velocity amplitude `amplitude`, density amplitude `density`.
    Persistence,
    /// Mixed-mode data with all three unknowns excited.
    Mixed,
    /// Magnetic profile with zero flux, so the stream function decays.
    ZeroFlux,
}

impl DataSet {
    pub fn name(&self) -> &'static str {
        match self {
            DataSet::Equilibrium => "equilibrium",
            DataSet::Persistence => "persistence",
            DataSet::Mixed => "mixed",
            DataSet::ZeroFlux => "zero-flux",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSection {
    pub nx: usize,
    pub ny: usize,
    pub y_max: f64,
    pub stretch: f64,
    pub x_derivative: XDerivative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSection {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub cfl_safety: f64,
    pub output_every: f64,
    pub enforce_monitors: bool,
    pub snapshots: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorSection {
    pub delta0: f64,
    pub l: f64,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSection {
    pub data: DataSet,
    pub amplitude: f64,
    pub density: f64,
    pub source_depth: usize,
    pub ladder: Vec<f64>,
    pub perturbation: f64,
    /// Concurrent runs in the sweep and stability harnesses; 0 runs all at once.
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSection,
    pub physics: Physics,
    pub solver: SolverSection,
    pub monitors: MonitorSection,
    pub experiment: ExperimentSection,
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}

/// Raw value of a key and the line it came from (0 for defaults).
struct Entry {
    value: String,
    line: usize,
}

fn known(section: &str, key: &str) -> bool {
    SCHEMA.iter().any(|(s, k, _)| *s == section && *k == key)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut entries: HashMap<String, Entry> = HashMap::new();
    let mut section: Option<(String, usize)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Syntax {
                    line,
                    message: format!("unterminated section header {trimmed:?}"),
                })?
                .trim();
            if !SCHEMA.iter().any(|(s, _, _)| *s == name) {
                return Err(ConfigError::UnknownSection { line, name: name.to_string() });
            }
            section = Some((name.to_string(), line));
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line, message: format!("expected `key = value`, got {trimmed:?}") })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Syntax { line, message: "empty key".into() });
        }
        let Some((sec, _)) = &section else {
            return Err(ConfigError::Syntax { line, message: format!("key `{key}` appears before any section") });
        };
        let full = format!("{sec}.{key}");
        if !known(sec, key) {
            return Err(ConfigError::UnknownKey { line, key: full });
        }
        if let Some(prev) = entries.get(&full) {
            return Err(ConfigError::Duplicate { key: full, first: prev.line, second: line });
        }
        entries.insert(full, Entry { value: value.trim().to_string(), line });
    }
    for (sec, key, default) in SCHEMA {
        let full = format!("{sec}.{key}");
        if let std::collections::hash_map::Entry::Vacant(slot) = entries.entry(full.clone()) {
            match default {
                Some(d) => {
                    slot.insert(Entry { value: d.to_string(), line: 0 });
                }
                None => return Err(ConfigError::Missing(full)),
            }
        }
    }
    let cfg = Typed { entries: &entries }.build()?;
    cfg.validate()?;
    Ok(cfg)
}

struct Typed<'a> {
    entries: &'a HashMap<String, Entry>,
}

impl Typed<'_> {
    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let e = &self.entries[key];
        e.value.parse().map_err(|err: T::Err| ConfigError::Parse {
            key: key.to_string(),
            line: e.line,
            value: e.value.clone(),
            message: err.to_string(),
        })
    }

    fn choice<T: Copy>(&self, key: &str, options: &[(&str, T)]) -> Result<T, ConfigError> {
        let e = &self.entries[key];
        options.iter().find(|(name, _)| *name == e.value).map(|(_, v)| *v).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            ConfigError::Parse {
                key: key.to_string(),
                line: e.line,
                value: e.value.clone(),
                message: format!("expected one of {}", names.join(", ")),
            }
        })
    }

    fn list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let e = &self.entries[key];
        e.value
            .split(',')
            .map(|item| {
                item.trim().parse::<f64>().map_err(|err| ConfigError::Parse {
                    key: key.to_string(),
                    line: e.line,
                    value: e.value.clone(),
                    message: err.to_string(),
                })
            })
            .collect()
    }

    fn build(&self) -> Result<RunConfig, ConfigError> {
        Ok(RunConfig {
            grid: GridSection {
                nx: self.parse("grid.nx")?,
                ny: self.parse("grid.ny")?,
                y_max: self.parse("grid.y_max")?,
                stretch: self.parse("grid.stretch")?,
                x_derivative: self.choice(
                    "grid.x_derivative",
                    &[("fourth-order", XDerivative::FourthOrder), ("spectral", XDerivative::Spectral)],
                )?,
            },
            physics: Physics::new(self.parse("physics.mu")?, self.parse("physics.kappa")?, self.parse("physics.eps")?),
            solver: SolverSection {
                dt: self.parse("solver.dt")?,
                t_end: self.parse("solver.t_end")?,
                scheme: self.choice("solver.scheme", &[("imex-cn", Scheme::ImexCn), ("imex-be", Scheme::ImexBe)])?,
                cfl_safety: self.parse("solver.cfl_safety")?,
                output_every: self.parse("solver.output_every")?,
                enforce_monitors: self.parse("solver.enforce_monitors")?,
                snapshots: self.parse("solver.snapshots")?,
            },
            monitors: MonitorSection {
                delta0: self.parse("monitors.delta0")?,
                l: self.parse("monitors.l")?,
                m: self.parse("monitors.m")?,
            },
            experiment: ExperimentSection {
                data: self.choice(
                    "experiment.data",
                    &[
                        ("equilibrium", DataSet::Equilibrium),
                        ("persistence", DataSet::Persistence),
                        ("mixed", DataSet::Mixed),
                        ("zero-flux", DataSet::ZeroFlux),
                    ],
                )?,
                amplitude: self.parse("experiment.amplitude")?,
                density: self.parse("experiment.density")?,
                source_depth: self.parse("experiment.source_depth")?,
                ladder: self.list("experiment.ladder")?,
                perturbation: self.parse("experiment.perturbation")?,
                workers: self.parse("experiment.workers")?,
            },
        })
    }
}

fn check(key: &str, value: f64, ok: bool, expected: &str) -> Result<(), ConfigError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::range(key, format!("{value} (expected {expected})")))
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.grid;
        for (key, n) in [("grid.nx", g.nx), ("grid.ny", g.ny)] {
            if n < blmhd::grid::MIN_POINTS {
                return Err(ConfigError::range(key, format!("{n} (expected >= {})", blmhd::grid::MIN_POINTS)));
            }
        }
        check("grid.y_max", g.y_max, g.y_max >= blmhd::grid::MIN_Y_MAX, ">= 10")?;
        check("grid.stretch", g.stretch, g.stretch >= 0.0, ">= 0")?;
        let p = &self.physics;
        check("physics.mu", p.mu, p.mu > 0.0, "> 0")?;
        check("physics.kappa", p.kappa, p.kappa > 0.0, "> 0")?;
        check("physics.eps", p.eps, p.eps >= 0.0, ">= 0")?;
        let s = &self.solver;
        check("solver.dt", s.dt, s.dt > 0.0, "> 0")?;
        check("solver.t_end", s.t_end, s.t_end > 0.0, "> 0")?;
        check("solver.cfl_safety", s.cfl_safety, s.cfl_safety > 0.0 && s.cfl_safety <= 1.0, "in (0, 1]")?;
        check("solver.output_every", s.output_every, s.output_every > 0.0, "> 0")?;
        let m = &self.monitors;
        check("monitors.delta0", m.delta0, m.delta0 > 0.0, "> 0")?;
        check("monitors.l", m.l, m.l > 0.5, "> 1/2")?;
        if m.m > 4 {
            return Err(ConfigError::range("monitors.m", format!("{} (expected <= 4)", m.m)));
        }
        let e = &self.experiment;
        check("experiment.amplitude", e.amplitude, true, "finite")?;
        check("experiment.density", e.density, e.density.abs() < 0.5, "|density| < 1/2")?;
        check("experiment.perturbation", e.perturbation, true, "finite")?;
        if e.ladder.is_empty() {
            return Err(ConfigError::range("experiment.ladder", "empty"));
        }
        if e.ladder.iter().any(|v| !(*v > 0.0 && *v <= 1.0)) || e.ladder.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(ConfigError::range(
                "experiment.ladder",
                format!("{:?} (expected strictly decreasing in (0, 1])", e.ladder),
            ));
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::new(self.grid.nx, self.grid.ny, self.grid.y_max, self.grid.stretch, self.solver.dt)
    }

    pub fn build_grid(&self) -> blmhd::Result<Arc<Grid>> {
        Ok(Arc::new(Grid::new(self.grid_spec(), self.grid.x_derivative)?))
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            physics: self.physics,
            dt: self.solver.dt,
            t_end: self.solver.t_end,
            scheme: self.solver.scheme,
            cfl_safety: self.solver.cfl_safety,
            delta0: self.monitors.delta0,
            l: self.monitors.l,
            output_every: self.solver.output_every,
            enforce_monitors: self.solver.enforce_monitors,
        }
    }

    pub fn initial_state(&self, grid: &Arc<Grid>) -> blmhd::Result<State> {
        let e = &self.experiment;
        let delta0 = self.monitors.delta0;
        match e.data {
            DataSet::Equilibrium => Ok(State::equilibrium(grid, self.physics, delta0)),
            DataSet::Persistence => persistence_data(grid, self.physics, delta0, e.amplitude, e.density),
            DataSet::Mixed => sweep_data(grid, self.physics, delta0, 1),
            DataSet::ZeroFlux => {
                let rho = Field::from_fn(grid, |x, y| e.density * x.sin() * (-y * y).exp());
                let u = Field::from_fn(grid, |x, y| e.amplitude * x.cos() * y * (-y * y).exp());
                let h = Field::from_fn(grid, |x, y| 0.3 * x.cos() * (1.0 - 2.0 * y * y) * (-y * y).exp());
                State::new(rho, &u + &background(grid), h, self.physics, 0.0, delta0)
            }
        }
    }

    /// Every effective value in schema order, one `key = value` per line.
    pub fn canonical_text(&self) -> String {
        let scheme = self.solver.scheme.name();
        let x_derivative = match self.grid.x_derivative {
            XDerivative::FourthOrder => "fourth-order",
            XDerivative::Spectral => "spectral",
        };
        let ladder: Vec<String> = self.experiment.ladder.iter().map(|v| format_f64(*v)).collect();
        let values: Vec<String> = vec![
            self.grid.nx.to_string(),
            self.grid.ny.to_string(),
            format_f64(self.grid.y_max),
            format_f64(self.grid.stretch),
            x_derivative.to_string(),
            format_f64(self.physics.mu),
            format_f64(self.physics.kappa),
            format_f64(self.physics.eps),
            format_f64(self.solver.dt),
            format_f64(self.solver.t_end),
            scheme.to_string(),
            format_f64(self.solver.cfl_safety),
            format_f64(self.solver.output_every),
            self.solver.enforce_monitors.to_string(),
            self.solver.snapshots.to_string(),
            format_f64(self.monitors.delta0),
            format_f64(self.monitors.l),
            self.monitors.m.to_string(),
            self.experiment.data.name().to_string(),
            format_f64(self.experiment.amplitude),
            format_f64(self.experiment.density),
            self.experiment.source_depth.to_string(),
            ladder.join(", "),
            format_f64(self.experiment.perturbation),
            self.experiment.workers.to_string(),
        ];
        debug_assert_eq!(values.len(), SCHEMA.len());
        let mut out = String::new();
        let mut current = "";
        for ((sec, key, _), value) in SCHEMA.iter().zip(&values) {
            if *sec != current {
                if !current.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{sec}]");
                current = sec;
            }
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }

    /// Hex SHA-256 of [`RunConfig::canonical_text`].
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.canonical_text().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Shortest representation that parses back to the same bits.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[grid]\nnx = 64\nny = 128\n";

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!((c.grid.nx, c.grid.ny), (64, 128));
        assert_eq!(c.physics, Physics::new(1.0, 1.0, 0.01));
        assert_eq!(c.monitors, MonitorSection { delta0: 0.25, l: 2.0, m: 2 });
        let experiment = ExperimentSection {
            data: DataSet::Persistence,
            amplitude: 0.3,
            density: 0.01,
            source_depth: 2,
            ladder: blmhd::experiments::SWEEP_LADDER.to_vec(),
            perturbation: 1e-6,
            workers: 0,
        };
        assert_eq!(c.experiment, experiment);
        assert_eq!(c.solver_config(), SolverConfig::default());
        assert_eq!(c.grid.x_derivative, XDerivative::FourthOrder);
    }

    #[test]
    fn negative_eps_names_the_key() {
        let e = parse_config(&format!("{MINIMAL}[physics]\neps = -1\n")).unwrap_err();
        assert!(matches!(&e, ConfigError::Range { key, .. } if key == "physics.eps"), "{e}");
        assert!(e.to_string().contains("physics.eps"));
    }

    #[test]
    fn duplicate_key_cites_both_lines() {
        let e = parse_config("[grid]\nnx = 64\nny = 128\n\n[physics]\nmu = 1\n# again\nmu = 2\n").unwrap_err();
        assert!(matches!(e, ConfigError::Duplicate { first: 6, second: 8, .. }), "{e}");
        assert!(e.to_string().contains("lines 6 and 8"));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(parse_config("[grid]\nnx = 64\n").unwrap_err(), ConfigError::Missing(k) if k == "grid.ny"));
        assert!(matches!(
            parse_config(&format!("{MINIMAL}[physics]\nnu = 1\n")).unwrap_err(),
            ConfigError::UnknownKey { line: 5, .. }
        ));
        assert!(matches!(parse_config("[mesh]\n").unwrap_err(), ConfigError::UnknownSection { line: 1, .. }));
        assert!(matches!(parse_config("nx = 3\n").unwrap_err(), ConfigError::Syntax { line: 1, .. }));
        assert!(matches!(parse_config("[grid]\nnx 64\n").unwrap_err(), ConfigError::Syntax { line: 2, .. }));
        assert!(matches!(parse_config("[grid]\nnx = many\nny = 8\n").unwrap_err(), ConfigError::Parse { line: 2, .. }));
        assert!(matches!(
            parse_config(&format!("{MINIMAL}[solver]\nscheme = rk4\n")).unwrap_err(),
            ConfigError::Parse { line: 5, .. }
        ));
        assert!(matches!(
            parse_config(&format!("{MINIMAL}[experiment]\nladder = 0.01, 0.1\n")).unwrap_err(),
            ConfigError::Range { key, .. } if key == "experiment.ladder"
        ));
        assert!(matches!(
            parse_config(&format!("{MINIMAL}[monitors]\nl = 0.5\n")).unwrap_err(),
            ConfigError::Range { key, .. } if key == "monitors.l"
        ));
    }

    #[test]
    fn canonical_text_reparses_to_the_same_config() {
        let text = "; comment\n[physics]\neps=0.1\n[grid]\n  ny = 96\nnx=32\n[experiment]\nladder = 0.1,0.01\n";
        let c = parse_config(text).unwrap();
        let canonical = c.canonical_text();
        let again = parse_config(&canonical).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.canonical_text(), canonical);
        assert_eq!(again.digest(), c.digest());
        assert!(canonical.starts_with("[grid]\nnx = 32\nny = 96\n"));
    }

    #[test]
    fn digest_is_pinned() {
        // frozen from an external sha256 of the canonical text; any formatting
        // change alters every manifest
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.digest(), "b0389ca267c69df62b2d6f6c45f27ad61fadce72ebb485b2ad5a838280e032fd");
        let other = parse_config("[grid]\nnx = 64\nny = 128\n[physics]\neps = 0.02\n").unwrap();
        assert_ne!(other.digest(), c.digest());
    }
}
