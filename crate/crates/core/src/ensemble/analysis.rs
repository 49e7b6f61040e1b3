//! Scalar summaries of an ensemble used to judge its qualitative behavior:
//! population consistency, mirror symmetry, routing and multimodality.

use super::EnsembleObservables;
use crate::error::{invalid, Result};

/// `max_{t,k} |p_k(t) - f_k(t)|`: mean adiabatic population against the
/// fraction of trajectories on each surface.
pub fn consistency_gap(obs: &EnsembleObservables) -> f64 {
    let mut worst = 0.0f64;
    for ti in 0..obs.times.len() {
        for k in 0..obs.n_states {
            worst = worst.max((obs.population(ti, k) - obs.fraction(ti, k)).abs());
        }
    }
    worst
}

/// Surfaces (0-based) whose mean population exceeds `threshold` at any frame.
pub fn surfaces_above(obs: &EnsembleObservables, threshold: f64) -> Vec<usize> {
    (0..obs.n_states)
        .filter(|&k| (0..obs.times.len()).any(|ti| obs.population(ti, k) > threshold))
        .collect()
}

/// Largest mirror asymmetry of the excitation density about `center`.
///
/// The density is integrated over windows of width `window` placed
/// symmetrically on both sides of `center`; the result is
/// `max_{t,j} |W_j^+ - W_j^-| / q`, a quantity whose Monte Carlo error
/// scales like `1/sqrt(N_traj)`. `center` and `window` must fall on bin
/// edges of the ensemble grid.
pub fn mirror_asymmetry(obs: &EnsembleObservables, center: f64, window: f64) -> Result<f64> {
    let g = obs.grid;
    let on_edge = |x: f64| (x / g.bin_width - (x / g.bin_width).round()).abs() < 1e-9;
    let offset = center - g.start;
    if !on_edge(offset) || !on_edge(window) || window <= 0.0 {
        return Err(invalid(format!(
            "midline {center} and window {window} must lie on the {} um bin grid",
            g.bin_width
        )));
    }
    let c = (offset / g.bin_width).round() as usize;
    let w = (window / g.bin_width).round() as usize;
    let reach = c.min(g.n_bins.saturating_sub(c));
    let mut worst = 0.0f64;
    for ti in 0..obs.times.len() {
        let mut j = 0;
        while j < reach {
            let end = (j + w).min(reach);
            let right: f64 = (c + j..c + end).map(|b| obs.e(ti, b)).sum();
            let left: f64 = (c - end..c - j).map(|b| obs.e(ti, b)).sum();
            worst = worst.max((right - left).abs() * g.bin_width / obs.q as f64);
            j = end;
        }
    }
    Ok(worst)
}

/// Excitation weight that has left a chain initially spanning `[left, right]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Routing {
    /// Weight beyond the left end.
    pub reflected: f64,
    /// Weight beyond the right end.
    pub transmitted: f64,
}

impl Routing {
    /// Share of the outgoing weight on the reflected side.
    pub fn reflected_share(&self) -> f64 {
        let total = self.reflected + self.transmitted;
        if total > 0.0 {
            self.reflected / total
        } else {
            0.0
        }
    }

    pub fn transmitted_share(&self) -> f64 {
        let total = self.reflected + self.transmitted;
        if total > 0.0 {
            self.transmitted / total
        } else {
            0.0
        }
    }
}

/// Excitation weight in bins centered outside `[left, right]` at frame `ti`.
pub fn routing(obs: &EnsembleObservables, ti: usize, left: f64, right: f64) -> Routing {
    let g = obs.grid;
    let mut out = Routing {
        reflected: 0.0,
        transmitted: 0.0,
    };
    for b in 0..g.n_bins {
        let r = g.center(b);
        let w = obs.e(ti, b) * g.bin_width;
        if r < left {
            out.reflected += w;
        } else if r > right {
            out.transmitted += w;
        }
    }
    out
}

/// Number of peaks of a sampled density after `[1, 2, 1] / 4` smoothing,
/// counting only peaks whose prominence is at least `min_prominence` times
/// the height of the tallest one.
pub fn count_modes(density: &[f64], min_prominence: f64) -> usize {
    let n = density.len();
    let at = |i: isize| -> f64 {
        if i < 0 || i >= n as isize {
            0.0
        } else {
            density[i as usize]
        }
    };
    let s: Vec<f64> = (0..n as isize)
        .map(|i| 0.25 * at(i - 1) + 0.5 * at(i) + 0.25 * at(i + 1))
        .collect();
    let top = s.iter().fold(0.0f64, |m, &x| m.max(x));
    if top <= 0.0 {
        return 0;
    }
    let value = |i: isize| if i < 0 || i >= n as isize { 0.0 } else { s[i as usize] };
    let mut modes = 0;
    for i in 0..n as isize {
        let h = value(i);
        if !(h > value(i - 1) && h >= value(i + 1)) {
            continue;
        }
        // Lowest point on each side before the density climbs above `h`.
        let col = |step: isize| {
            let mut j = i;
            let mut low = h;
            loop {
                j += step;
                let v = value(j);
                low = low.min(v);
                if v > h || j < 0 || j >= n as isize {
                    return low;
                }
            }
        };
        if h - col(-1).max(col(1)) >= min_prominence * top {
            modes += 1;
        }
    }
    modes
}

/// [`count_modes`] applied to the marginal density of `atom` at frame `ti`.
pub fn atom_modes(obs: &EnsembleObservables, atom: usize, ti: usize, min_prominence: f64) -> usize {
    let density: Vec<f64> = (0..obs.grid.n_bins).map(|b| obs.rho_atom(atom, ti, b)).collect();
    count_modes(&density, min_prominence)
}
