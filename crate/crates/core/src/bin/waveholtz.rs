//! Command-line front end for the WaveHoltz experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use waveholtz::experiment::verify::{cmd_verify, Level, VerifyOptions};
use waveholtz::experiment::{cmd_iterate, cmd_spectrum, cmd_sweep, ExperimentConfig, RunContext, RunSummary};
use waveholtz::Error;

/// Time-domain iteration for the Helmholtz equation: spectra, iteration
/// histories and frequency sweeps.
///
/// Settings are resolved in this order, later winning: built-in defaults,
/// the `--config` file, then `--set` overrides.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// TOML experiment file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Frequencies run concurrently in a sweep.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Seed for sampled checks; recorded in the manifest.
    #[arg(long, global = true, value_name = "S", default_value_t = 0)]
    seed: u64,
    /// Override one config value, e.g. `--set time.cfl=0.25`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues of the semi-discrete operator with `ε*`, `κ` and `ρ`.
    Spectrum,
    /// Iterate to tolerance and record the residual history.
    Iterate,
    /// Iteration counts and rates over a frequency sweep.
    Sweep,
    /// Run the built-in consistency checks.
    Verify {
        #[arg(long, value_enum, default_value = "quick")]
        level: LevelArg,
        /// Perturb the filter transfer function; the filter checks must fail.
        #[arg(long)]
        corrupt_filter: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::Configuration(format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut table: toml::Table =
        toml::from_str(&text).map_err(|e| Error::Configuration(e.to_string()))?;
    for set in &cli.sets {
        apply_override(&mut table, set)?;
    }
    let text = toml::to_string(&table).map_err(|e| Error::Configuration(e.to_string()))?;
    ExperimentConfig::from_toml(&text)
}

/// `a.b=value`, where `value` is TOML or else a bare string.
fn apply_override(table: &mut toml::Table, set: &str) -> Result<(), Error> {
    let (key, raw) = set
        .split_once('=')
        .ok_or_else(|| Error::Configuration(format!("--set expects KEY=VALUE, got {set}")))?;
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        node = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Configuration(format!("{key}: {part} is not a table")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn report(summary: &RunSummary, out: &std::path::Path) {
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    for f in &summary.failures {
        eprintln!("failed: {f}");
    }
    for fit in &summary.fits {
        println!("fit {}: slope {:.4} over {} points", fit.quantity, fit.slope, fit.points);
    }
    println!("wrote {} files to {}", summary.files.len(), out.display());
}

fn run(cli: &Cli) -> Result<u8, Error> {
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(Error::Configuration("--workers must be at least 1".into()));
    }
    let ctx = RunContext {
        out: cli.out.clone(),
        workers,
        seed: cli.seed,
    };
    if let Command::Verify { level, corrupt_filter } = cli.command {
        let opts = VerifyOptions {
            level: match level {
                LevelArg::Quick => Level::Quick,
                LevelArg::Full => Level::Full,
            },
            corrupt_filter,
        };
        let (summary, checks) = cmd_verify(opts, &ctx)?;
        for c in &checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            println!("{tag} {}: {}", c.check, c.detail);
        }
        report(&summary, &ctx.out);
        return Ok(if checks.iter().all(|c| c.passed) { 0 } else { 1 });
    }
    let cfg = load_config(cli)?;
    if cfg.is_large_2d() {
        eprintln!("warning: 2D frequencies above the desk scale can take minutes to hours");
    }
    let summary = match cli.command {
        Command::Spectrum => cmd_spectrum(&cfg, &ctx)?,
        Command::Iterate => cmd_iterate(&cfg, &ctx)?,
        Command::Sweep => cmd_sweep(&cfg, &ctx)?,
        Command::Verify { .. } => unreachable!(),
    };
    report(&summary, &ctx.out);
    Ok(if summary.failures.is_empty() { 0 } else { 3 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
