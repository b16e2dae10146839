use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use blmhd_cli::commands::{CommandError, Verb};
use blmhd_cli::config::load_config;
use blmhd_cli::output::write_json;
use blmhd_cli::{failure_summary, run_command, Options};

/// Exit codes: 0 all assertions passed, 1 an assertion failed, 2 bad config,
/// 3 numerical or filesystem error.
#[derive(Debug, Parser)]
#[command(name = "blmhd", version, about = "MHD boundary-layer laboratory")]
struct Cli {
    #[arg(value_enum)]
    verb: Verb,
    /// INI run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Directory for the artifacts.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Shuffles the inequality corpus; numerics are deterministic regardless.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Treat open-question warnings as failures.
    #[arg(long)]
    strict: bool,
}

fn fail(cli: &Cli, kind: &str, message: String, code: u8) -> ExitCode {
    let summary = failure_summary(Some(cli.verb), kind, &message);
    eprintln!("error: {message}");
    println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
    if std::fs::create_dir_all(&cli.out).is_ok() {
        let _ = write_json(&cli.out.join("summary.json"), &summary);
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => return fail(&cli, "config", e.to_string(), 2),
    };
    let opts = Options { seed: cli.seed, strict: cli.strict };
    match run_command(cli.verb, &cfg, &cli.out, opts) {
        Ok(manifest) => {
            let line = serde_json::json!({
                "verb": manifest.verb,
                "passed": manifest.passed,
                "config_digest": manifest.config_digest,
                "manifest": cli.out.join("manifest.json"),
            });
            println!("{line}");
            if manifest.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let kind = match e {
                CommandError::Numerics(_) => "numerics",
                CommandError::Output(_) => "output",
            };
            eprintln!("error: {e}");
            println!(
                "{}",
                serde_json::to_string(&failure_summary(Some(cli.verb), kind, &e.to_string()))
                    .expect("summary serializes")
            );
            ExitCode::from(3)
        }
    }
}
