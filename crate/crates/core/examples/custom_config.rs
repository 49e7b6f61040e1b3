//! Runs a small ensemble from a TOML configuration and writes the CSV
//! outputs that the plotting scripts read.
//!
//! Run: `cargo run --release --example custom_config [config.toml] [out_dir]`

use std::path::PathBuf;

use flexagg::ensemble::{run_ensemble, write_outputs};
use flexagg::scenarios::resolve_config;

const DEFAULT: &str = r#"
n_atoms = 3
n_excitations = 1
positions_um = [0.0, 2.5, 7.5]
n_traj = 32
t_final_us = 1.0
initial_surface = 2
mode = "fssh"
rng_seed = 11
"#;

fn main() -> flexagg::Result<()> {
    let mut args = std::env::args().skip(1);
    let text = match args.next() {
        Some(path) => std::fs::read_to_string(path)?,
        None => DEFAULT.to_string(),
    };
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("flexagg-custom"));

    let scenario = resolve_config(&text)?;
    let cfg = &scenario.config;
    print!("{}", cfg.to_toml());
    let model = cfg.model()?;
    let run = run_ensemble(cfg, &model, scenario.initial_surface(), None)?;
    let obs = &run.observables;
    let last = obs.times.len() - 1;
    let pops: Vec<String> = (0..obs.n_states).map(|k| format!("{:.3}", obs.population(last, k))).collect();
    println!("final populations: {}", pops.join(" "));
    println!("mean final positions: {:?}", obs.mean_positions(last));
    write_outputs(&out, cfg, &run, &[])?;
    println!("wrote {}", out.display());
    Ok(())
}
