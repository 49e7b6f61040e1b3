//! Runs the built-in self-checks, then compares analytic forces and
//! couplings with finite differences on a few random chains.
//!
//! Run: `cargo run --release --example oracles`

use flexagg::check::{coupling_fd_error, force_fd_error, random_chain, COUPLING_FD_STEP_UM, run_checks, FD_STEP_UM};
use flexagg::{AggregateConfig, ExcitationBasis, ExcitonModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> flexagg::Result<()> {
    for outcome in run_checks()? {
        println!("{outcome}");
    }

    let model = ExcitonModel::new(ExcitationBasis::new(5, 2)?, AggregateConfig::default().interaction());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    println!("\n{:<40} {:>12} {:>14}", "geometry (um)", "force error", "coupling error");
    for _ in 0..5 {
        let pos = random_chain(&mut rng, 5, 2.0, 8.0);
        let mut force = 0.0f64;
        let mut coupling = 0.0f64;
        for k in 0..model.dim() {
            force = force.max(force_fd_error(&model, &pos, k, FD_STEP_UM)?);
            if k + 1 < model.dim() {
                coupling = coupling.max(coupling_fd_error(&model, &pos, k, k + 1, COUPLING_FD_STEP_UM)?);
            }
        }
        let label: Vec<String> = pos.iter().map(|x| format!("{x:.2}")).collect();
        println!("{:<40} {:>12.1e} {:>14.1e}", label.join(" "), force, coupling);
    }
    Ok(())
}
