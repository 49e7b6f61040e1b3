//! Classifies the bi-excitons of the chain with a dislocated end pair as
//! products of sub-chain excitons, inverted states or entangled states.
//!
//! Run: `cargo run --release --example decompose_dislocated [threshold]`

use flexagg::decompose::{decompose_biexcitons, PRODUCT_THRESHOLD};
use flexagg::scenarios::resolve_scenario;
use flexagg::spectra::diagonalize;

fn main() -> flexagg::Result<()> {
    let threshold = std::env::args()
        .nth(1)
        .map(|s| s.parse::<f64>().expect("threshold must be a number"))
        .unwrap_or(PRODUCT_THRESHOLD);
    let scenario = resolve_scenario("disloc5")?;
    let cfg = &scenario.config;
    let model = cfg.model()?;
    let partition = scenario.partition.as_ref().expect("disloc5 defines a partition");
    let spectrum = diagonalize(&model.hamiltonian(&cfg.positions_um)?)?;
    let report = decompose_biexcitons(&spectrum, model.basis(), cfg.interaction(), partition, threshold)?;

    println!("positions {:?} um, threshold {threshold}", cfg.positions_um);
    for (k, verdict) in report.verdicts.iter().enumerate() {
        println!("state {:>2}: {verdict}", k + 1);
    }
    for kind in ["product", "filled", "inverted", "entangled"] {
        println!("{kind:>9}: {}", report.count(kind));
    }

    println!("\nlargest amplitudes of state 1:");
    let v = spectrum.vector(0);
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()));
    for &i in order.iter().take(6) {
        println!("  {:<6} {:+.4}", model.basis().label(i), v[i]);
    }
    Ok(())
}
