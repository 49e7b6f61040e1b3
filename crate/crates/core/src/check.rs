//! Self-test oracles: finite-difference forces and couplings, dimer
//! analytics and energy conservation along trajectories.
//!
//! The oracle functions are public so that test suites can run them on their
//! own geometries; [`run_checks`] bundles a quick default selection.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::ExcitationBasis;
use crate::config::{AggregateConfig, Mode};
use crate::dynamics::{
    nonadiabatic_coupling, run_trajectory, step_electronic, surface_force, DegeneracyGuard,
    InitialCondition,
};
use crate::error::Result;
use crate::hamiltonian::ExcitonModel;
use crate::spectra::{align_gauge, diagonalize};
use crate::units::lifetime_estimate;

/// Finite-difference step for forces (um).
pub const FD_STEP_UM: f64 = 1e-6;
/// Finite-difference step for couplings (um). Couplings between distant
/// surfaces are small, and the overlap difference loses most of its digits
/// to roundoff at the force step.
pub const COUPLING_FD_STEP_UM: f64 = 1e-5;
/// Relative tolerance of Hellmann-Feynman forces against finite differences.
pub const FORCE_TOLERANCE: f64 = 1e-5;
/// Relative tolerance of coupling vectors against finite differences.
pub const COUPLING_TOLERANCE: f64 = 1e-4;
/// Relative energy drift allowed between hops.
pub const DRIFT_TOLERANCE: f64 = 1e-3;

/// Chain of `n` atoms with neighbor gaps drawn uniformly from `[min_gap, max_gap)`.
pub fn random_chain(rng: &mut impl Rng, n: usize, min_gap: f64, max_gap: f64) -> Vec<f64> {
    let mut x = 0.0;
    (0..n)
        .map(|i| {
            if i > 0 {
                x += rng.random_range(min_gap..max_gap);
            }
            x
        })
        .collect()
}

fn scaled_error(exact: &[f64], approx: &[f64]) -> f64 {
    let scale = exact.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let err = exact.iter().zip(approx).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale == 0.0 {
        err
    } else {
        err / scale
    }
}

/// Largest deviation of the force on `surface` from the central difference
/// of the surface energy, relative to the largest force component.
pub fn force_fd_error(model: &ExcitonModel, positions: &[f64], surface: usize, step: f64) -> Result<f64> {
    let spectrum = diagonalize(&model.hamiltonian(positions)?)?;
    let force = surface_force(model, &spectrum, surface)?;
    let mut fd = vec![0.0; positions.len()];
    for (a, out) in fd.iter_mut().enumerate() {
        let mut plus = positions.to_vec();
        plus[a] += step;
        let mut minus = positions.to_vec();
        minus[a] -= step;
        let ep = diagonalize(&model.hamiltonian(&plus)?)?.energies[surface];
        let em = diagonalize(&model.hamiltonian(&minus)?)?.energies[surface];
        *out = -(ep - em) / (2.0 * step);
    }
    Ok(scaled_error(&force, &fd))
}

/// Largest deviation of the coupling `d_ki` from the finite difference of
/// the overlap `<zeta_k(R)|zeta_i(R')>` (gauge-aligned), relative to the
/// largest component.
///
/// Central differences at `step` and `step / 2` are Richardson-combined:
/// close atom pairs make the second-order truncation error too large at
/// any step where roundoff is still small.
pub fn coupling_fd_error(model: &ExcitonModel, positions: &[f64], k: usize, i: usize, step: f64) -> Result<f64> {
    let spectrum = diagonalize(&model.hamiltonian(positions)?)?;
    let d = nonadiabatic_coupling(model, &spectrum, k, i, DegeneracyGuard::default())?.vector;
    let zk = spectrum.vector(k);
    let central = |a: usize, h: f64| -> Result<f64> {
        let mut plus = positions.to_vec();
        plus[a] += h;
        let mut minus = positions.to_vec();
        minus[a] -= h;
        let (sp, _) = align_gauge(diagonalize(&model.hamiltonian(&plus)?)?, &spectrum)?;
        let (sm, _) = align_gauge(diagonalize(&model.hamiltonian(&minus)?)?, &spectrum)?;
        Ok(zk
            .iter()
            .zip(sp.vector(i).iter().zip(sm.vector(i)))
            .map(|(z, (p, m))| z * (p - m))
            .sum::<f64>()
            / (2.0 * h))
    };
    let mut fd = vec![0.0; positions.len()];
    for (a, out) in fd.iter_mut().enumerate() {
        *out = (4.0 * central(a, 0.5 * step)? - central(a, step)?) / 3.0;
    }
    Ok(scaled_error(&d, &fd))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, passed, detail }
}

fn default_model(n: usize, q: usize) -> Result<ExcitonModel> {
    let cfg = AggregateConfig::default();
    Ok(ExcitonModel::new(ExcitationBasis::new(n, q)?, cfg.interaction()))
}

fn check_basis() -> Result<CheckOutcome> {
    let b = ExcitationBasis::new(5, 2)?;
    let ok = b.len() == 10 && b.label(0) == "|1,2>" && b.label(9) == "|4,5>";
    Ok(outcome("basis", ok, format!("{} states, first {}, last {}", b.len(), b.label(0), b.label(9))))
}

fn check_dimer() -> Result<CheckOutcome> {
    let m = default_model(2, 1)?;
    let d = 5.0;
    let j = m.interaction().c3 / (d * d * d);
    let s = diagonalize(&m.hamiltonian(&[0.0, d])?)?;
    let shift = m.vdw_shift(&[0.0, d]);
    let err = (s.energies[0] - (shift - j)).abs().max((s.energies[1] - (shift + j)).abs());
    let ok = err < 1e-10 * j && (j - 49.06).abs() < 0.01;
    Ok(outcome("dimer", ok, format!("J = {j:.4} rad/us, energy error {err:.1e}")))
}

fn check_rabi() -> Result<CheckOutcome> {
    let m = default_model(2, 1)?;
    let h = m.hamiltonian(&[0.0, 5.0])?.matrix;
    let j = h[(0, 1)];
    let mut c = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    let dt = 1e-4;
    let mut worst = 0.0f64;
    for step in 1..=2000 {
        step_electronic(&mut c, &h, &h, dt, 10);
        let t = step as f64 * dt;
        worst = worst.max((c[0].norm_sqr() - (j * t).cos().powi(2)).abs());
    }
    let period = PI / j;
    Ok(outcome(
        "rabi",
        worst < 1e-8,
        format!("period {period:.5} us, max population error {worst:.1e}"),
    ))
}

fn check_forces(rng: &mut ChaCha8Rng, samples: usize) -> Result<CheckOutcome> {
    let m = default_model(5, 2)?;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let pos = random_chain(rng, 5, 2.0, 8.0);
        for surface in 0..m.dim() {
            worst = worst.max(force_fd_error(&m, &pos, surface, FD_STEP_UM)?);
        }
    }
    Ok(outcome(
        "forces",
        worst < FORCE_TOLERANCE,
        format!("{samples} geometries, max relative error {worst:.1e}"),
    ))
}

fn check_couplings(rng: &mut ChaCha8Rng, samples: usize) -> Result<CheckOutcome> {
    let m = default_model(5, 2)?;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let pos = random_chain(rng, 5, 2.0, 8.0);
        for k in 0..m.dim() {
            for i in 0..m.dim() {
                if k != i {
                    worst = worst.max(coupling_fd_error(&m, &pos, k, i, COUPLING_FD_STEP_UM)?);
                }
            }
        }
    }
    Ok(outcome(
        "couplings",
        worst < COUPLING_TOLERANCE,
        format!("{samples} geometries, max relative error {worst:.1e}"),
    ))
}

fn check_drift() -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for (positions, surface, mode) in [
        (vec![0.0, 5.0, 10.0, 15.0, 20.0], 9, Mode::FixedSurface),
        (vec![0.0, 2.5, 7.5, 12.5, 15.0], 8, Mode::Fssh),
    ] {
        let cfg = AggregateConfig {
            positions_um: positions.clone(),
            mode,
            t_final_us: 0.5,
            ..AggregateConfig::default()
        };
        let m = cfg.model()?;
        let initial = InitialCondition {
            positions,
            velocities: vec![0.0; 5],
            surface,
        };
        let traj = run_trajectory(&cfg, &m, &initial, ChaCha8Rng::seed_from_u64(cfg.rng_seed))?;
        worst = worst.max(traj.max_energy_drift());
    }
    Ok(outcome(
        "energy-drift",
        worst < DRIFT_TOLERANCE,
        format!("max relative drift between hops {worst:.1e}"),
    ))
}

fn check_lifetime() -> Result<CheckOutcome> {
    let tau = lifetime_estimate(70.0, 232.0, 3, 2)?;
    Ok(outcome("lifetime", (tau - 19.4).abs() < 0.05, format!("{tau:.3} us")))
}

/// Runs the built-in oracle suite.
pub fn run_checks() -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    Ok(vec![
        check_basis()?,
        check_dimer()?,
        check_rabi()?,
        check_forces(&mut rng, 10)?,
        check_couplings(&mut rng, 10)?,
        check_drift()?,
        check_lifetime()?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_chain_is_sorted_with_bounded_gaps() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_chain(&mut rng, 6, 2.0, 3.0);
        assert_eq!(x[0], 0.0);
        assert!(x.windows(2).all(|w| (2.0..3.0).contains(&(w[1] - w[0]))));
    }

    #[test]
    fn fd_oracles_agree_on_a_dislocated_chain() {
        let m = default_model(5, 2).unwrap();
        let pos = [0.0, 5.0, 10.0, 15.0, 17.5];
        assert!(force_fd_error(&m, &pos, 4, FD_STEP_UM).unwrap() < FORCE_TOLERANCE);
        assert!(coupling_fd_error(&m, &pos, 8, 7, COUPLING_FD_STEP_UM).unwrap() < COUPLING_TOLERANCE);
    }

    #[test]
    fn suite_passes() {
        for outcome in run_checks().unwrap() {
            assert!(outcome.passed, "{outcome}");
        }
    }
}
