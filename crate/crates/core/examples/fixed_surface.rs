//! Single trajectories from the regular chain held on the repulsive (top)
//! and attractive (bottom) surfaces, with no initial velocity.
//!
//! Run: `cargo run --release --example fixed_surface`

use flexagg::dynamics::{run_trajectory, InitialCondition};
use flexagg::scenarios::resolve_scenario;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> flexagg::Result<()> {
    for name in ["fixed-surface", "fixed-surface-attractive"] {
        let scenario = resolve_scenario(name)?;
        let cfg = &scenario.config;
        let model = cfg.model()?;
        let initial = InitialCondition {
            positions: cfg.positions_um.clone(),
            velocities: vec![0.0; cfg.n_atoms],
            surface: scenario.initial_surface(),
        };
        let traj = run_trajectory(cfg, &model, &initial, ChaCha8Rng::seed_from_u64(cfg.rng_seed))?;
        println!("{name}: surface {}", scenario.initial_surface() + 1);
        println!("{:>6}  nearest-neighbor gaps (um)", "t/us");
        for snap in traj.snapshots.iter().step_by(25) {
            let gaps: Vec<String> = snap.positions.windows(2).map(|w| format!("{:7.3}", w[1] - w[0])).collect();
            println!("{:6.2}  {}", snap.t, gaps.join(" "));
        }
        println!("max relative energy drift {:.2e}\n", traj.max_energy_drift());
    }
    Ok(())
}
