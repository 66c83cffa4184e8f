//! Command-line front end: run configuration, simulations, verification
//! suites, sweeps and data export.

pub mod check;
pub mod config;
pub mod exit;
pub mod export;
pub mod ledger;
pub mod manifest;
pub mod simulate;
pub mod snapshot;
pub mod sweep;
pub mod verify;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::exit::{CliError, CliResult, Exit};
use crate::export::What;
use crate::sweep::Axis;
use crate::verify::{LemmaOptions, Suite};

/// Relative output directories resolve against this directory when set.
pub const OUTPUT_ROOT_ENV: &str = "GDNLS_OUTPUT_ROOT";

#[derive(Debug, Parser)]
#[command(name = "gdnls", version, about = "Spectral solver and diagnostics for derivative nonlinear Schrödinger equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (TOML); built-in defaults when omitted.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, overriding the configuration and the environment.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for randomized corpora, overriding the configuration.
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the hypotheses of the local theory for the configured datum.
    CheckData(Common),
    /// Evolve the configured datum and record the norm ledger.
    Simulate(Common),
    /// Run a property suite and report each check.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        suite: Suite,
        /// Lemma constants to compare against instead of the bundled ones.
        #[arg(long, value_name = "PATH")]
        baseline: Option<PathBuf>,
        /// Recalibrate the lemma constants and write them here.
        #[arg(long, value_name = "PATH")]
        write_baseline: Option<PathBuf>,
    },
    /// Run the cross product of parameter axes.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `name=v1,v2,...` with name one of c0, alpha, t_w, mu_phase; repeatable.
        #[arg(long = "axis", value_name = "SPEC", required = true)]
        axes: Vec<Axis>,
        /// Concurrent cells; defaults to the available parallelism.
        #[arg(long, value_name = "N")]
        workers: Option<usize>,
    },
    /// Write tab-separated series from a run directory.
    Export {
        #[arg(long, value_name = "DIR")]
        run: PathBuf,
        #[arg(long, value_enum)]
        what: What,
        /// Snapshot index in the manifest; negative counts from the end.
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        snapshot: i64,
        /// Destination directory (default `<run>/export`).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

/// Output directory: `--out`, else the configured directory, resolved
/// against `GDNLS_OUTPUT_ROOT` when relative.
pub fn resolve_output(configured: &Path, cli_out: Option<&Path>, env_root: Option<&Path>) -> PathBuf {
    if let Some(out) = cli_out {
        return out.to_path_buf();
    }
    match env_root {
        Some(root) if configured.is_relative() => root.join(configured),
        _ => configured.to_path_buf(),
    }
}

fn load(common: &Common) -> CliResult<(RunConfig, PathBuf)> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let env_root = std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from);
    let dir = resolve_output(&cfg.output.directory, common.out.as_deref(), env_root.as_deref());
    cfg.output.directory = dir.clone();
    Ok((cfg, dir))
}

pub fn execute(cli: Cli) -> CliResult<Exit> {
    match cli.command {
        Command::CheckData(common) => {
            let (cfg, dir) = load(&common)?;
            Ok(check::check_data(&cfg, &dir)?.1)
        }
        Command::Simulate(common) => {
            let (cfg, dir) = load(&common)?;
            let r = simulate::simulate(&cfg, &dir)?;
            println!(
                "{}: t = {} after {} ledger rows, status {}",
                dir.display(),
                r.t_reached,
                r.ledger_rows,
                serde_json::to_string(&r.status).unwrap_or_default()
            );
            if let Some(s) = &r.soliton {
                println!("soliton peak drift {:.3e} (dx = {:.3e})", s.drift, s.dx);
            }
            Ok(r.exit())
        }
        Command::Verify {
            common,
            suite,
            baseline,
            write_baseline,
        } => {
            let (cfg, dir) = load(&common)?;
            let opts = LemmaOptions {
                baseline,
                write_baseline,
            };
            Ok(verify::verify(&cfg, suite, &opts, &dir)?.1)
        }
        Command::Sweep { common, axes, workers } => {
            let (cfg, dir) = load(&common)?;
            let workers = workers
                .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
                .unwrap_or(1);
            if workers == 0 {
                return Err(CliError::config(anyhow::anyhow!("--workers must be at least 1")));
            }
            let rows = sweep::sweep(&cfg, &axes, workers, &dir)?;
            let failed = rows.iter().filter(|r| r.exit_code != 0).count();
            println!("{} cells, {failed} with a nonzero exit code; summary in {}", rows.len(), dir.join(sweep::SUMMARY_FILE).display());
            Ok(Exit::Success)
        }
        Command::Export {
            run,
            what,
            snapshot,
            out,
        } => {
            let path = export::export(&run, what, snapshot, out.as_deref())?;
            println!("{}", path.display());
            Ok(Exit::Success)
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Exit::Config.code() } else { Exit::Success.code() };
        }
    };
    match execute(cli) {
        Ok(exit) => exit.code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit.code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_resolution_order() {
        let root = Path::new("/data");
        assert_eq!(resolve_output(Path::new("runs/a"), None, None), PathBuf::from("runs/a"));
        assert_eq!(resolve_output(Path::new("runs/a"), None, Some(root)), PathBuf::from("/data/runs/a"));
        assert_eq!(resolve_output(Path::new("/abs"), None, Some(root)), PathBuf::from("/abs"));
        assert_eq!(resolve_output(Path::new("runs/a"), Some(Path::new("x")), Some(root)), PathBuf::from("x"));
    }

    #[test]
    fn usage_errors_map_to_exit_one() {
        assert_eq!(run(["gdnls", "frobnicate"]), 1);
        assert_eq!(run(["gdnls", "verify", "--suite", "nonsense"]), 1);
        assert_eq!(run(["gdnls", "sweep", "--axis", "c9=1"]), 1);
        assert_eq!(run(["gdnls", "--help"]), 0);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
