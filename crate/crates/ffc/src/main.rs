//! `ffc` — nonlinear Finsler connections from moving-frame data.

use clap::{Args, Parser, Subcommand};
use ffc::commands::{self, Overrides};
use ffc::config::{Problem, ProblemConfig};
use ffc::CmdError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ffc",
    version,
    about = "Compute and verify nonlinear Finsler connections for metrics in moving-frame form",
    after_help = "Exit codes: 0 success, 1 check/tolerance failure, 2 input error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Problem config (JSON, version 1).
    #[arg(long)]
    config: PathBuf,
    /// Write the machine-readable output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the residual tolerance from the config.
    #[arg(long)]
    tol: Option<f64>,
    /// Override the sampling seed from the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Verify homogeneity and the Cartan/metricity conditions over samples.
    Check(Common),
    /// Emit connection data (G, N, constraints, residuals) as JSON lines.
    Connection(Common),
    /// Integrate the configured geodesic and emit a CSV table.
    Geodesic(Common),
    /// Cross-check the frame formulas against the holonomic route.
    OracleCompare(Common),
    /// Write the builtin example configs to disk.
    Examples {
        /// Target directory (created if missing).
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn load(common: &Common) -> Result<Problem, CmdError> {
    let text = std::fs::read_to_string(&common.config).map_err(|e| {
        CmdError::input(format!("cannot read {}: {e}", common.config.display()))
    })?;
    ProblemConfig::from_json(&text)?.build()
}

/// `--out` wins over the config's per-command default path.
fn out_path(common: &Common, from_config: Option<&String>) -> Option<PathBuf> {
    common
        .out
        .clone()
        .or_else(|| from_config.map(PathBuf::from))
}

fn emit(out: &Option<PathBuf>, payload: &str) -> Result<(), CmdError> {
    match out {
        Some(path) => std::fs::write(path, payload)
            .map_err(|e| CmdError::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CmdError> {
    match cli.command {
        Command::Check(common) => {
            let problem = load(&common)?;
            let out = out_path(
                &common,
                problem.config.output.as_ref().and_then(|o| o.check.as_ref()),
            );
            let overrides = Overrides {
                tol: common.tol,
                seed: common.seed,
            };
            let report = commands::cmd_check(&problem, overrides)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            eprintln!(
                "check: {} samples, homogeneity {:.3e}, cartan {:.3e}, metricity {:.3e} (tol {:.1e})",
                report.samples,
                report.homogeneity_max,
                report.cartan_max,
                report.metricity_max,
                report.tolerance
            );
            match &out {
                Some(_) => emit(&out, &(json + "\n"))?,
                None => println!("{json}"),
            }
            if report.pass {
                Ok(())
            } else {
                Err(CmdError::check("residuals exceed tolerance".into()))
            }
        }
        Command::Connection(common) => {
            let problem = load(&common)?;
            let out = out_path(
                &common,
                problem
                    .config
                    .output
                    .as_ref()
                    .and_then(|o| o.connection.as_ref()),
            );
            let overrides = Overrides {
                tol: common.tol,
                seed: common.seed,
            };
            let records = commands::cmd_connection(&problem, overrides)?;
            emit(&out, &commands::records_to_jsonl(&records))
        }
        Command::Geodesic(common) => {
            let problem = load(&common)?;
            let out = out_path(
                &common,
                problem
                    .config
                    .output
                    .as_ref()
                    .and_then(|o| o.geodesic.as_ref()),
            );
            let table = commands::cmd_geodesic(&problem)?;
            eprintln!(
                "geodesic: {} samples, L drift {:.3e}, max |C_I| {:.3e}",
                table.rows.len(),
                table.l_drift,
                table.max_constraint
            );
            emit(&out, &table.to_csv())
        }
        Command::OracleCompare(common) => {
            let problem = load(&common)?;
            let out = out_path(
                &common,
                problem
                    .config
                    .output
                    .as_ref()
                    .and_then(|o| o.oracle_compare.as_ref()),
            );
            let overrides = Overrides {
                tol: common.tol,
                seed: common.seed,
            };
            let report = commands::cmd_oracle_compare(&problem, overrides)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            match &out {
                Some(_) => emit(&out, &(json + "\n"))?,
                None => println!("{json}"),
            }
            eprintln!(
                "oracle-compare: {} samples, max |G_frame - G_holonomic| = {:.3e} (tol {:.1e})",
                report.samples, report.max_difference, report.tolerance
            );
            if report.pass {
                Ok(())
            } else {
                Err(CmdError::check("oracle disagreement exceeds tolerance".into()))
            }
        }
        Command::Examples { out } => {
            let paths = commands::cmd_examples(&out)?;
            for p in paths {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ffc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
