use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use nullcone::cli::{convergence_sweep, load_config, run_scenario};
use nullcone::Error;

/// Radial wave runs, radiation-field extraction and energy diagnostics.
#[derive(Parser)]
#[command(name = "nullcone", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write energies, radiation, cones and a report.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config and NULLCONE_OUT).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat a configuration under grid refinement and report observed orders.
    Sweep {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into())
}

fn execute(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load_config(&config).with_context(|| format!("loading {}", config.display()))?;
            let dir = cfg.output_dir(out.as_deref(), &stem(&config));
            let outcome = run_scenario(&cfg)?;
            outcome.write(&dir)?;
            for c in &outcome.report.checks {
                println!(
                    "{:<40} {:>14.6e} <= {:<10e} {}",
                    c.name,
                    c.value,
                    c.tolerance,
                    if c.pass { "PASS" } else { "FAIL" }
                );
            }
            println!("wrote {}", dir.display());
            Ok(outcome.report.pass)
        }
        Command::Sweep { config, levels, out } => {
            let cfg = load_config(&config).with_context(|| format!("loading {}", config.display()))?;
            let dir = cfg.output_dir(out.as_deref(), &stem(&config));
            let rep = convergence_sweep(&cfg, levels)?;
            rep.write(&dir)?;
            print!("{}", rep.csv()?);
            println!(
                "{} order band [{}, {}]: {}",
                rep.method,
                rep.order_band.0,
                rep.order_band.1,
                if rep.pass { "PASS" } else { "FAIL" }
            );
            println!("wrote {}", dir.display());
            Ok(rep.pass)
        }
    }
}

fn error_object(err: &anyhow::Error) -> serde_json::Value {
    let kind = err
        .chain()
        .find_map(|e| e.downcast_ref::<Error>())
        .map_or("error", Error::kind);
    let mut obj = serde_json::json!({
        "error": {
            "kind": kind,
            "message": format!("{err:#}"),
        }
    });
    if let Some(Error::ConfigSchema { key, .. }) = err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        obj["error"]["key"] = key.clone().into();
    }
    if let Some(Error::ConfigParse { line, column, .. }) = err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        obj["error"]["line"] = (*line).into();
        obj["error"]["column"] = (*column).into();
    }
    obj
}

fn main() -> ExitCode {
    // usage errors exit 1; 2 is reserved for failed checks
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("{}", error_object(&e));
            ExitCode::from(1)
        }
    }
}
