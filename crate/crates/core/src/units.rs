//! Internal unit system.
//!
//! Lengths are in micrometres, times in microseconds and energies in angular
//! frequency units (rad/us) with the reduced Planck constant equal to one.
//! Masses are then measured in hbar * us / um^2.

use std::f64::consts::TAU;

use crate::error::{invalid, Result};

/// Reduced Planck constant in J s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;

/// Atomic mass used for all dynamics (kg).
pub const DEFAULT_MASS_KG: f64 = 1.0e-26;

/// Resonant dipole-dipole coefficient in MHz um^3.
pub const DEFAULT_C3_MHZ_UM3: f64 = 976.0;

/// Van der Waals coefficient in MHz um^6, in the convention where the
/// electronic diagonal is `-C6 / R^6`. The negative value makes the
/// short-range wall repulsive.
pub const DEFAULT_C6_MHZ_UM6: f64 = -5400.0;

/// Converts a dispersion coefficient quoted in MHz um^k (a linear frequency)
/// to rad/us um^k.
///
/// This is the only place where the factor 2 pi enters the model.
pub fn mhz_to_internal(coefficient_mhz: f64) -> f64 {
    TAU * coefficient_mhz
}

/// Inverse of [`mhz_to_internal`].
pub fn internal_to_mhz(coefficient: f64) -> f64 {
    coefficient / TAU
}

/// Converts a mass in kg to hbar * us / um^2.
pub fn mass_to_internal(mass_kg: f64) -> f64 {
    const UM: f64 = 1.0e-6;
    const US: f64 = 1.0e-6;
    mass_kg * UM * UM / (HBAR_SI * US)
}

/// Ground-state velocity width `hbar / (M sigma)` in um/us for an internal
/// mass and a position width in um.
pub fn velocity_width(mass: f64, sigma: f64) -> f64 {
    if sigma > 0.0 {
        1.0 / (mass * sigma)
    } else {
        0.0
    }
}

/// Aggregate lifetime `(n_p / tau_p + n_s / tau_s)^-1` for `n_s` atoms in
/// the lower and `n_p` atoms in the upper Rydberg state.
pub fn lifetime_estimate(tau_s: f64, tau_p: f64, n_s: u32, n_p: u32) -> Result<f64> {
    if !(tau_s > 0.0 && tau_p > 0.0) {
        return Err(invalid(format!(
            "lifetimes must be positive, got tau_s = {tau_s}, tau_p = {tau_p}"
        )));
    }
    if n_s + n_p == 0 {
        return Err(invalid("at least one atom is required"));
    }
    let rate = f64::from(n_p) / tau_p + f64::from(n_s) / tau_s;
    Ok(1.0 / rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_conversion_matches_hand_value() {
        // 1e-26 kg * 1e-12 m^2 / (1.054571817e-34 J s * 1e-6 s)
        let hand = 1.0e-38 / 1.054_571_817e-40;
        let m = mass_to_internal(1.0e-26);
        assert!(((m - hand) / hand).abs() < 1e-6);
        assert!((m - 94.825_2).abs() < 1e-3);
    }

    #[test]
    fn mhz_conversion_multiplies_by_two_pi() {
        assert!((mhz_to_internal(976.0) - 6132.388_859_8).abs() < 1e-6);
        assert!((internal_to_mhz(mhz_to_internal(5400.0)) - 5400.0).abs() < 1e-9);
    }

    #[test]
    fn velocity_width_for_default_trap() {
        // hbar / (M sigma) with hbar = 1.0546e-34 J s, M = 1e-26 kg, sigma = 0.3 um
        let hand = 1.0546e-34 / (1.0e-26 * 0.3e-6) * 1.0e-6 / 1.0e-6;
        let v = velocity_width(mass_to_internal(1.0e-26), 0.3);
        assert!((v - 0.035).abs() < 5e-4);
        assert!(((v - hand) / hand).abs() < 1e-4);
        assert_eq!(velocity_width(94.8, 0.0), 0.0);
    }

    #[test]
    fn lifetime_values() {
        let tau = lifetime_estimate(70.0, 232.0, 3, 2).unwrap();
        assert!((tau - 19.4).abs() < 0.05, "{tau}");
        assert!((lifetime_estimate(42.0, 42.0, 1, 0).unwrap() - 42.0).abs() < 1e-12);
        assert!((lifetime_estimate(70.0, 232.0, 5, 0).unwrap() - 14.0).abs() < 1e-12);
    }

    #[test]
    fn lifetime_rejects_bad_input() {
        assert!(lifetime_estimate(0.0, 232.0, 3, 2).is_err());
        assert!(lifetime_estimate(70.0, -1.0, 3, 2).is_err());
        assert!(lifetime_estimate(70.0, 232.0, 0, 0).is_err());
    }
}
