//! CSV and metadata files of an ensemble run.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::EnsembleRun;
use crate::config::AggregateConfig;
use crate::error::Result;

fn writer(dir: &Path, name: &str) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(dir.join(name))?)))
}

/// Writes `density_e.csv`, `density_rho.csv`, `density_atoms.csv`,
/// `populations.csv`, `hops.csv` and `meta.toml` into `dir`.
///
/// Surface and atom indices are 1-based.
pub fn write_outputs(dir: &Path, cfg: &AggregateConfig, run: &EnsembleRun, extra_meta: &[(&str, String)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let obs = &run.observables;
    let grid = obs.grid;

    let mut e = writer(dir, "density_e.csv")?;
    let mut rho = writer(dir, "density_rho.csv")?;
    e.write_record(["t", "r", "value"])?;
    rho.write_record(["t", "r", "value"])?;
    for (ti, t) in obs.times.iter().enumerate() {
        for b in 0..grid.n_bins {
            let t = format!("{t:.6}");
            let r = format!("{:.6}", grid.center(b));
            e.write_record([t.as_str(), r.as_str(), &format!("{:.10e}", obs.e(ti, b))])?;
            rho.write_record([t.as_str(), r.as_str(), &format!("{:.10e}", obs.rho(ti, b))])?;
        }
    }
    e.flush()?;
    rho.flush()?;

    let mut atoms = writer(dir, "density_atoms.csv")?;
    atoms.write_record(["t", "atom", "r", "value"])?;
    for (ti, t) in obs.times.iter().enumerate() {
        for a in 0..obs.n_atoms {
            for b in 0..grid.n_bins {
                let v = obs.rho_atom(a, ti, b);
                if v == 0.0 {
                    continue;
                }
                atoms.write_record([
                    format!("{t:.6}"),
                    (a + 1).to_string(),
                    format!("{:.6}", grid.center(b)),
                    format!("{v:.10e}"),
                ])?;
            }
        }
    }
    atoms.flush()?;

    let mut pops = writer(dir, "populations.csv")?;
    pops.write_record(["t", "k", "p", "f"])?;
    for (ti, t) in obs.times.iter().enumerate() {
        for k in 0..obs.n_states {
            pops.write_record([
                format!("{t:.6}"),
                (k + 1).to_string(),
                format!("{:.10e}", obs.population(ti, k)),
                format!("{:.10e}", obs.fraction(ti, k)),
            ])?;
        }
    }
    pops.flush()?;

    let mut hops = writer(dir, "hops.csv")?;
    hops.write_record(["trajectory", "t", "from", "to", "accepted", "frustrated", "kinetic_adjustment"])?;
    for (i, h) in &run.hops {
        hops.write_record([
            (i + 1).to_string(),
            format!("{:.6}", h.t),
            (h.from + 1).to_string(),
            (h.to + 1).to_string(),
            h.accepted.to_string(),
            h.frustrated.to_string(),
            format!("{:.10e}", h.kinetic_adjustment),
        ])?;
    }
    hops.flush()?;

    let mut meta = BufWriter::new(File::create(dir.join("meta.toml"))?);
    writeln!(meta, "[config]")?;
    write!(meta, "{}", cfg.to_toml())?;
    writeln!(meta, "\n[results]")?;
    writeln!(meta, "seed = {}", cfg.rng_seed)?;
    writeln!(meta, "e0 = {:.10e}", obs.e0())?;
    writeln!(meta, "rho0 = {:.10e}", obs.rho0())?;
    writeln!(meta, "n_traj_effective = {}", obs.n_traj)?;
    writeln!(meta, "aborted = {}", run.aborted.len())?;
    writeln!(meta, "capped_couplings = {}", run.events.capped_couplings)?;
    writeln!(meta, "renormalizations = {}", run.events.renormalizations)?;
    writeln!(meta, "gauge_flags = {}", run.events.gauge_flags)?;
    writeln!(meta, "max_energy_drift = {:.6e}", run.max_energy_drift)?;
    for (k, v) in extra_meta {
        writeln!(meta, "{k} = {v}")?;
    }
    meta.flush()?;
    Ok(())
}
