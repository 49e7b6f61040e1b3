//! Exciton routing by a gate chain: the same incoming pulse is reflected or
//! transmitted depending on the exciton state of the gate.
//!
//! Run: `cargo run --release --example gate [n_traj]`

use flexagg::ensemble::analysis::routing;
use flexagg::ensemble::run_ensemble;
use flexagg::scenarios::resolve_scenario;

fn main() -> flexagg::Result<()> {
    let n_traj: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("n_traj"))
        .unwrap_or(16);
    for name in ["gate-a", "gate-b"] {
        let mut scenario = resolve_scenario(name)?;
        scenario.config.n_traj = n_traj;
        let cfg = &scenario.config;
        let model = cfg.model()?;
        let run = run_ensemble(cfg, &model, scenario.initial_surface(), None)?;
        let obs = &run.observables;
        let last = obs.times.len() - 1;
        let (left, right) = (cfg.positions_um[0], cfg.positions_um[cfg.n_atoms - 1]);
        let r = routing(obs, last, left, right);
        println!(
            "{name}: surface {} (fidelity {:.3}), at t = {:.1} us reflected {:.3}, transmitted {:.3} (share {:.2} / {:.2})",
            scenario.initial_surface() + 1,
            scenario.reference_fidelity.unwrap_or(1.0),
            obs.times[last],
            r.reflected,
            r.transmitted,
            r.reflected_share(),
            r.transmitted_share()
        );
        let weights: Vec<String> = (0..cfg.n_atoms)
            .map(|a| format!("{:.2}", obs.atom_excitation(last, a)))
            .collect();
        println!("  final excitation per atom: {}", weights.join(" "));
    }
    Ok(())
}
