//! Command-line driver for the MHD boundary-layer laboratory: config
//! loading, the study verbs and their artifacts.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::SystemTime;

use serde_json::{json, Value};

use crate::commands::{run_verb, CommandError, Verb};
use crate::config::RunConfig;
use crate::manifest::{RunManifest, SuiteSummary};
use crate::output::{create_dir, write_json, OutputError};

#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    pub seed: Option<u64>,
    /// Open-question warnings count as failures.
    pub strict: bool,
}

fn timestamp() -> String {
    humantime::format_rfc3339_millis(SystemTime::now()).to_string()
}

/// Failure list of a run that could not produce results.
pub fn failure_summary(verb: Option<Verb>, kind: &str, message: &str) -> Value {
    json!({
        "verb": verb.map(|v| v.name()),
        "passed": false,
        "failures": [format!("{kind}: {message}")],
    })
}

/// Runs `verb`, writing its artifacts plus `config.ini` (canonical),
/// `summary.json` and `manifest.json` into `out_dir`.
pub fn run_command(verb: Verb, cfg: &RunConfig, out_dir: &Path, opts: Options) -> Result<RunManifest, CommandError> {
    let started = timestamp();
    create_dir(out_dir)?;
    let config_path = out_dir.join("config.ini");
    std::fs::write(&config_path, cfg.canonical_text())
        .map_err(|source| OutputError::Io { path: config_path.clone(), source })?;
    let outcome = match run_verb(verb, cfg, out_dir, opts.seed) {
        Ok(o) => o,
        Err(e) => {
            let kind = match e {
                CommandError::Numerics(_) => "numerics",
                CommandError::Output(_) => "output",
            };
            let _ = write_json(&out_dir.join("summary.json"), &failure_summary(Some(verb), kind, &e.to_string()));
            return Err(e);
        }
    };

    let mut failures: Vec<String> =
        outcome.suites.iter().flat_map(|s| s.failures.iter().map(move |f| format!("{}: {f}", s.name))).collect();
    if opts.strict {
        failures.extend(outcome.warnings.iter().map(|w| format!("strict: {w}")));
    }
    let passed = failures.is_empty();
    let suites: Vec<SuiteSummary> = outcome.suites.iter().map(SuiteSummary::from).collect();
    let summary_path = out_dir.join("summary.json");
    let summary = json!({
        "verb": verb.name(),
        "passed": passed,
        "failures": failures,
        "warnings": outcome.warnings,
        "suites": suites,
        "results": outcome.results,
    });
    write_json(&summary_path, &summary)?;

    let mut outputs: Vec<PathBuf> = vec![config_path];
    outputs.extend(outcome.outputs);
    outputs.push(summary_path);
    let manifest_path = out_dir.join("manifest.json");
    outputs.push(manifest_path.clone());
    let manifest = RunManifest {
        verb: verb.name().to_string(),
        config_digest: cfg.digest(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        started,
        finished: timestamp(),
        seed: opts.seed,
        strict: opts.strict,
        passed,
        suites,
        outputs,
    };
    write_json(&manifest_path, &manifest)?;
    Ok(manifest)
}
