//! Bi-exciton spectrum of the regular five-atom chain: energies, reflection
//! parities and the amplitude tiles of the top state.
//!
//! Run: `cargo run --release --example spectra_homogeneous`

use flexagg::scenarios::resolve_scenario;
use flexagg::spectra::diagonalize;
use flexagg::units::internal_to_mhz;

fn main() -> flexagg::Result<()> {
    let scenario = resolve_scenario("homog5")?;
    let cfg = &scenario.config;
    let model = cfg.model()?;
    let spectrum = diagonalize(&model.hamiltonian(&cfg.positions_um)?)?;
    let mirror = model.basis().reflection();

    println!("positions {:?} um", cfg.positions_um);
    println!("{:>5} {:>12} {:>10} {:>10}", "state", "E (MHz)", "parity", "residual");
    for (k, e) in spectrum.energies.iter().enumerate() {
        let (parity, residual) = spectrum.parity(k, &mirror);
        let name = if parity > 0.0 { "even" } else { "odd" };
        println!("{:>5} {:>12.3} {:>10} {:>10.1e}", k + 1, internal_to_mhz(*e), name, residual);
    }

    let top = spectrum.dim() - 1;
    println!("\namplitudes of state {}:", top + 1);
    for (i, c) in spectrum.vector(top).iter().enumerate() {
        println!("  {:<6} {:+.4}", model.basis().label(i), c);
    }
    Ok(())
}
