//! Effective lifetime of an aggregate with a mix of s and p Rydberg states.
//!
//! Run: `cargo run --release --example lifetime [tau_s tau_p n_s n_p]`

use flexagg::units::lifetime_estimate;

fn main() -> flexagg::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (tau_s, tau_p, n_s, n_p) = match args.as_slice() {
        [a, b, c, d] => (
            a.parse().expect("tau_s"),
            b.parse().expect("tau_p"),
            c.parse().expect("n_s"),
            d.parse().expect("n_p"),
        ),
        _ => (70.0, 232.0, 3, 2),
    };
    let tau = lifetime_estimate(tau_s, tau_p, n_s, n_p)?;
    println!("{n_s} atoms in s ({tau_s} us) and {n_p} in p ({tau_p} us): {tau:.2} us");
    Ok(())
}
