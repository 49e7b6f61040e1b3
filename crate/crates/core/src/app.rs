//! Command-line driver: `spectra`, `run` and `check`.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags, unknown scenario,
//! malformed configuration), 2 for runtime failures and failed checks.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::check::run_checks;
use crate::config::Mode;
use crate::decompose::{decompose_biexcitons, write_decomposition_csv, write_tiles_csv, PRODUCT_THRESHOLD};
use crate::ensemble::{run_ensemble, write_outputs};
use crate::error::Error;
use crate::scenarios::{resolve_config, resolve_scenario, ResolvedScenario};
use crate::spectra::diagonalize;
use crate::units::internal_to_mhz;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "flexagg", version, about = "Exciton dynamics in flexible Rydberg aggregates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Diagonalize the mean geometry and write spectra and decomposition reports.
    Spectra {
        #[command(flatten)]
        source: Source,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Propagate a trajectory ensemble and write densities and populations.
    Run {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        overrides: Overrides,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the built-in oracle suite.
    Check,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in scenario name.
    #[arg(long)]
    scenario: Option<String>,
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Overrides {
    #[arg(long)]
    n_traj: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Nuclear time step (us).
    #[arg(long)]
    dt: Option<f64>,
    /// `fssh` or `fixed-surface`.
    #[arg(long)]
    mode: Option<Mode>,
    /// Final time (us).
    #[arg(long)]
    t_final: Option<f64>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn resolve(source: &Source) -> Result<ResolvedScenario, Failure> {
    match (&source.scenario, &source.config) {
        (Some(name), _) => Ok(resolve_scenario(name)?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            resolve_config(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
        }
        (None, None) => Err(Failure::Usage("need --scenario or --config".into())),
    }
}

fn write_config(dir: &Path, scenario: &ResolvedScenario) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), scenario.config.to_toml())?;
    Ok(())
}

fn spectra(source: &Source, out: &Path, stdout: &mut dyn Write) -> Result<(), Failure> {
    let scenario = resolve(source)?;
    writeln!(stdout, "# scenario {}\n{}", scenario.name, scenario.config.to_toml())?;
    write_config(out, &scenario)?;
    let cfg = &scenario.config;
    let model = cfg.model()?;
    let spectrum = diagonalize(&model.hamiltonian(&cfg.positions_um)?)?;

    let mut energies = csv::Writer::from_writer(BufWriter::new(File::create(out.join("spectrum.csv"))?));
    energies
        .write_record(["state", "energy_rad_per_us", "energy_mhz"])
        .map_err(Error::from)?;
    for (k, e) in spectrum.energies.iter().enumerate() {
        energies
            .write_record([(k + 1).to_string(), format!("{e:.10e}"), format!("{:.10e}", internal_to_mhz(*e))])
            .map_err(Error::from)?;
    }
    energies.flush()?;
    write_tiles_csv(BufWriter::new(File::create(out.join("tiles.csv"))?), &spectrum, model.basis())?;

    if let (2, Some(partition)) = (cfg.n_excitations, &scenario.partition) {
        let report = decompose_biexcitons(&spectrum, model.basis(), cfg.interaction(), partition, PRODUCT_THRESHOLD)?;
        write_decomposition_csv(BufWriter::new(File::create(out.join("decomposition.csv"))?), &spectrum, &report)?;
        for (k, verdict) in report.verdicts.iter().enumerate() {
            writeln!(stdout, "state {:>2}: {verdict}", k + 1)?;
        }
    }
    writeln!(stdout, "wrote {}", out.display())?;
    Ok(())
}

fn run(
    source: &Source,
    overrides: &Overrides,
    out: &Path,
    workers: Option<usize>,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let mut scenario = resolve(source)?;
    if scenario.static_only {
        return Err(Failure::Usage(format!(
            "scenario `{}` is a static spectrum; use `spectra`",
            scenario.name
        )));
    }
    let cfg = &mut scenario.config;
    if let Some(n) = overrides.n_traj {
        cfg.n_traj = n;
    }
    if let Some(seed) = overrides.seed {
        cfg.rng_seed = seed;
    }
    if let Some(dt) = overrides.dt {
        cfg.dt_us = dt;
    }
    if let Some(mode) = overrides.mode {
        cfg.mode = mode;
    }
    if let Some(t) = overrides.t_final {
        cfg.t_final_us = t;
    }
    cfg.validate()?;
    writeln!(stdout, "# scenario {}\n{}", scenario.name, cfg.to_toml())?;
    write_config(out, &scenario)?;
    let cfg = &scenario.config;
    let model = cfg.model()?;
    let run = run_ensemble(cfg, &model, scenario.initial_surface(), workers)?;
    let mut extra = vec![("scenario", format!("{:?}", scenario.name))];
    if let Some(f) = scenario.reference_fidelity {
        extra.push(("reference_fidelity", format!("{f:.6}")));
    }
    write_outputs(out, cfg, &run, &extra)?;
    writeln!(
        stdout,
        "{} trajectories ({} aborted), {} hop records, max energy drift {:.2e}; wrote {}",
        run.observables.n_traj,
        run.aborted.len(),
        run.hops.len(),
        run.max_energy_drift,
        out.display()
    )?;
    Ok(())
}

fn check(stdout: &mut dyn Write) -> Result<(), Failure> {
    let outcomes = run_checks()?;
    for o in &outcomes {
        writeln!(stdout, "{o}")?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(Failure::Runtime(format!("{failed} check(s) failed")));
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command, writing
/// reports to `stdout` and diagnostics to `stderr`. Returns the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = match &cli.command {
        Command::Spectra { source, out } => spectra(source, out, stdout),
        Command::Run {
            source,
            overrides,
            out,
            workers,
        } => run(source, overrides, out, *workers, stdout),
        Command::Check => check(stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_RUNTIME
        }
    }
}
