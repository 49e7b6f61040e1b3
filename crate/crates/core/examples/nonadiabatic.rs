//! Surface hopping on the doubly dislocated chain started on its ninth
//! surface: populations, hop consistency and splitting of atomic densities.
//!
//! Run: `cargo run --release --example nonadiabatic [n_traj] [out_dir]`

use std::path::PathBuf;

use flexagg::ensemble::analysis::{atom_modes, consistency_gap, surfaces_above};
use flexagg::ensemble::{run_ensemble, write_outputs};
use flexagg::scenarios::resolve_scenario;

fn main() -> flexagg::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_traj: usize = args.next().map(|s| s.parse().expect("n_traj")).unwrap_or(64);
    let out = args.next().map(PathBuf::from);

    let mut scenario = resolve_scenario("nonadiabatic")?;
    scenario.config.n_traj = n_traj;
    let cfg = &scenario.config;
    let model = cfg.model()?;
    let run = run_ensemble(cfg, &model, scenario.initial_surface(), None)?;
    let obs = &run.observables;

    println!("{:>6}  populations p / fractions f of surfaces 7, 8, 9", "t/us");
    for ti in (0..obs.times.len()).step_by(15) {
        let cols: Vec<String> = (6..9)
            .map(|k| format!("{:.2}/{:.2}", obs.population(ti, k), obs.fraction(ti, k)))
            .collect();
        println!("{:6.2}  {}", obs.times[ti], cols.join("  "));
    }
    let involved: Vec<usize> = surfaces_above(obs, 0.1).iter().map(|k| k + 1).collect();
    println!("surfaces above 0.1: {involved:?}");
    println!("max |p - f| = {:.3}, {} hop records", consistency_gap(obs), run.hops.len());
    let t1 = obs.time_index(1.0);
    let modes: Vec<usize> = (0..cfg.n_atoms).map(|a| atom_modes(obs, a, t1, 0.1)).collect();
    println!("density peaks per atom at t = 1 us: {modes:?}");
    if let Some(dir) = out {
        write_outputs(&dir, cfg, &run, &[("scenario", "\"nonadiabatic\"".into())])?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}
