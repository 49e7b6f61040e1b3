//! Colliding exciton pulses on the doubly dislocated chain: surface
//! population, mirror symmetry and excitation transfer across the center.
//!
//! Run: `cargo run --release --example collision [n_traj] [out_dir]`

use std::path::PathBuf;

use flexagg::ensemble::analysis::mirror_asymmetry;
use flexagg::ensemble::{run_ensemble, write_outputs};
use flexagg::scenarios::resolve_scenario;

fn main() -> flexagg::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_traj: usize = args.next().map(|s| s.parse().expect("n_traj")).unwrap_or(64);
    let out = args.next().map(PathBuf::from);

    let mut scenario = resolve_scenario("collision")?;
    scenario.config.n_traj = n_traj;
    let cfg = &scenario.config;
    let model = cfg.model()?;
    let surface = scenario.initial_surface();
    println!(
        "initial surface {} (fidelity {:.3} to the reference)",
        surface + 1,
        scenario.reference_fidelity.unwrap_or(1.0)
    );
    let run = run_ensemble(cfg, &model, surface, None)?;
    let obs = &run.observables;

    println!("{:>6} {:>10} {:>10}", "t/us", "p_ini", "transfer");
    for ti in (0..obs.times.len()).step_by(10) {
        println!(
            "{:6.2} {:10.4} {:10.4}",
            obs.times[ti],
            obs.population(ti, surface),
            obs.midline_transfer(ti).unwrap_or(0.0)
        );
    }
    let center = 0.5 * (cfg.positions_um[0] + cfg.positions_um[cfg.n_atoms - 1]);
    println!(
        "mirror asymmetry {:.4} (Monte Carlo scale 3/sqrt(N) = {:.4})",
        mirror_asymmetry(obs, center, 2.0)?,
        3.0 / (obs.n_traj as f64).sqrt()
    );
    if let Some(dir) = out {
        write_outputs(&dir, cfg, &run, &[("scenario", "\"collision\"".into())])?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}
