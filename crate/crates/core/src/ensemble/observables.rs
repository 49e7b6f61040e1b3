//! Space-time binned ensemble observables.
//!
//! Accumulators hold plain sums so that partial ensembles merge by addition;
//! normalization happens in the accessors.

use crate::basis::ExcitationBasis;
use crate::dynamics::Trajectory;
use crate::error::{invalid, Result};
use nalgebra::DVector;
use num_complex::Complex64;

/// Probability that `atom` carries a p-excitation.
pub fn excitation_weight(coeffs: &DVector<Complex64>, basis: &ExcitationBasis, atom: usize) -> f64 {
    basis
        .states()
        .iter()
        .zip(coeffs.iter())
        .filter(|(s, _)| s.contains(&atom))
        .map(|(_, c)| c.norm_sqr())
        .sum()
}

/// [`excitation_weight`] for every atom at once.
pub fn excitation_weights(coeffs: &DVector<Complex64>, basis: &ExcitationBasis) -> Vec<f64> {
    let mut out = vec![0.0; basis.n_atoms()];
    for (state, c) in basis.states().iter().zip(coeffs.iter()) {
        let p = c.norm_sqr();
        for &a in state {
            out[a] += p;
        }
    }
    out
}

/// Uniform bins `[start + i w, start + (i + 1) w)`. Positions outside the
/// grid are counted in the edge bins so that every atom is binned once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceGrid {
    pub start: f64,
    pub bin_width: f64,
    pub n_bins: usize,
}

impl SpaceGrid {
    /// Grid covering `[lo - margin, hi + margin]`.
    pub fn covering(lo: f64, hi: f64, margin: f64, bin_width: f64) -> Self {
        let start = lo - margin;
        let n_bins = (((hi + margin) - start) / bin_width).ceil().max(1.0) as usize;
        Self {
            start,
            bin_width,
            n_bins,
        }
    }

    pub fn bin(&self, r: f64) -> usize {
        let i = ((r - self.start) / self.bin_width).floor();
        if i <= 0.0 {
            0
        } else {
            (i as usize).min(self.n_bins - 1)
        }
    }

    pub fn center(&self, bin: usize) -> f64 {
        self.start + (bin as f64 + 0.5) * self.bin_width
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleObservables {
    pub times: Vec<f64>,
    pub grid: SpaceGrid,
    pub n_atoms: usize,
    pub n_states: usize,
    pub q: usize,
    pub n_traj: usize,
    e_sum: Vec<f64>,
    rho_sum: Vec<f64>,
    atom_counts: Vec<u64>,
    pop_sum: Vec<f64>,
    surface_counts: Vec<u64>,
    atom_excitation_sum: Vec<f64>,
    split: Option<Midline>,
    transfer_sum: Vec<f64>,
}

/// Dividing point used for [`EnsembleObservables::midline_transfer`].
#[derive(Debug, Clone, Copy, PartialEq)]
struct Midline {
    at: f64,
    band: f64,
}

impl Midline {
    /// Share of an atom at `x` attributed to the left half.
    fn left_share(&self, x: f64) -> f64 {
        if x < self.at - self.band {
            1.0
        } else if x > self.at + self.band {
            0.0
        } else {
            0.5
        }
    }
}

impl EnsembleObservables {
    pub fn new(times: Vec<f64>, grid: SpaceGrid, n_atoms: usize, n_states: usize, q: usize) -> Self {
        let nt = times.len();
        Self {
            e_sum: vec![0.0; nt * grid.n_bins],
            rho_sum: vec![0.0; nt * grid.n_bins],
            atom_counts: vec![0; n_atoms * nt * grid.n_bins],
            pop_sum: vec![0.0; nt * n_states],
            surface_counts: vec![0; nt * n_states],
            atom_excitation_sum: vec![0.0; nt * n_atoms],
            split: None,
            transfer_sum: vec![0.0; nt],
            times,
            grid,
            n_atoms,
            n_states,
            q,
            n_traj: 0,
        }
    }

    /// Also accumulate the excitation weight moved across `midline`: per
    /// trajectory, the change of the weight carried by atoms left of the
    /// midline since t = 0, in absolute value. Atoms closer than `band` to
    /// the midline count half to each side.
    pub fn with_midline(mut self, midline: f64, band: f64) -> Self {
        self.split = Some(Midline { at: midline, band });
        self
    }

    /// Empty accumulator with the same grids.
    pub fn empty_like(&self) -> Self {
        let mut out = Self::new(self.times.clone(), self.grid, self.n_atoms, self.n_states, self.q);
        out.split = self.split;
        out
    }

    pub fn add_trajectory(&mut self, traj: &Trajectory) -> Result<()> {
        if traj.snapshots.len() != self.times.len() {
            return Err(invalid(format!(
                "trajectory has {} frames, grid has {}",
                traj.snapshots.len(),
                self.times.len()
            )));
        }
        let nb = self.grid.n_bins;
        let nt = self.times.len();
        for (ti, snap) in traj.snapshots.iter().enumerate() {
            if (snap.t - self.times[ti]).abs() > 1e-9 * self.times[ti].abs().max(1.0)
                || snap.positions.len() != self.n_atoms
                || snap.populations.len() != self.n_states
            {
                return Err(invalid(format!("frame {ti} does not match the ensemble grid")));
            }
            for (a, (&r, &w)) in snap.positions.iter().zip(&snap.atom_weights).enumerate() {
                let b = self.grid.bin(r);
                self.e_sum[ti * nb + b] += w;
                self.rho_sum[ti * nb + b] += 1.0;
                self.atom_counts[(a * nt + ti) * nb + b] += 1;
            }
            for (k, p) in snap.populations.iter().enumerate() {
                self.pop_sum[ti * self.n_states + k] += p;
            }
            self.surface_counts[ti * self.n_states + snap.surface] += 1;
            for (a, &w) in snap.atom_weights.iter().enumerate() {
                self.atom_excitation_sum[ti * self.n_atoms + a] += w;
            }
            if let Some(mid) = self.split {
                let left = |snap: &crate::dynamics::Snapshot| -> f64 {
                    snap.positions
                        .iter()
                        .zip(&snap.atom_weights)
                        .map(|(&x, &w)| w * mid.left_share(x))
                        .sum()
                };
                self.transfer_sum[ti] += (left(snap) - left(&traj.snapshots[0])).abs() / self.q as f64;
            }
        }
        self.n_traj += 1;
        Ok(())
    }

    /// Adds another partial ensemble on identical grids.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.times != other.times
            || self.grid != other.grid
            || self.n_atoms != other.n_atoms
            || self.n_states != other.n_states
            || self.split != other.split
        {
            return Err(invalid("cannot merge observables on different grids"));
        }
        self.e_sum.iter_mut().zip(&other.e_sum).for_each(|(a, b)| *a += b);
        self.rho_sum.iter_mut().zip(&other.rho_sum).for_each(|(a, b)| *a += b);
        self.atom_counts.iter_mut().zip(&other.atom_counts).for_each(|(a, b)| *a += b);
        self.pop_sum.iter_mut().zip(&other.pop_sum).for_each(|(a, b)| *a += b);
        self.surface_counts
            .iter_mut()
            .zip(&other.surface_counts)
            .for_each(|(a, b)| *a += b);
        self.atom_excitation_sum
            .iter_mut()
            .zip(&other.atom_excitation_sum)
            .for_each(|(a, b)| *a += b);
        self.transfer_sum.iter_mut().zip(&other.transfer_sum).for_each(|(a, b)| *a += b);
        self.n_traj += other.n_traj;
        Ok(())
    }

    fn norm(&self) -> f64 {
        1.0 / (self.n_traj.max(1) as f64 * self.grid.bin_width)
    }

    /// Weighted excitation density `e(r, t)` (per um); integrates to `q`.
    pub fn e(&self, ti: usize, bin: usize) -> f64 {
        self.e_sum[ti * self.grid.n_bins + bin] * self.norm()
    }

    /// Atomic density `rho(r, t)` (per um); integrates to `N`.
    pub fn rho(&self, ti: usize, bin: usize) -> f64 {
        self.rho_sum[ti * self.grid.n_bins + bin] * self.norm()
    }

    /// Marginal density of a single atom; integrates to one.
    pub fn rho_atom(&self, atom: usize, ti: usize, bin: usize) -> f64 {
        let nt = self.times.len();
        self.atom_counts[(atom * nt + ti) * self.grid.n_bins + bin] as f64 * self.norm()
    }

    /// Mean adiabatic population of surface `k`.
    pub fn population(&self, ti: usize, k: usize) -> f64 {
        self.pop_sum[ti * self.n_states + k] / self.n_traj.max(1) as f64
    }

    /// Number of trajectories on surface `k`.
    pub fn surface_count(&self, ti: usize, k: usize) -> u64 {
        self.surface_counts[ti * self.n_states + k]
    }

    /// Fraction of trajectories on surface `k`.
    pub fn fraction(&self, ti: usize, k: usize) -> f64 {
        self.surface_count(ti, k) as f64 / self.n_traj.max(1) as f64
    }

    /// Mean probability that `atom` carries an excitation.
    pub fn atom_excitation(&self, ti: usize, atom: usize) -> f64 {
        self.atom_excitation_sum[ti * self.n_atoms + atom] / self.n_traj.max(1) as f64
    }

    /// Mean fraction of the total excitation weight that has crossed the
    /// midline by frame `ti`, if enabled with [`Self::with_midline`].
    pub fn midline_transfer(&self, ti: usize) -> Option<f64> {
        self.split
            .map(|_| self.transfer_sum[ti] / self.n_traj.max(1) as f64)
    }

    /// `max_{r,t} e(r, t)`
    pub fn e0(&self) -> f64 {
        self.e_sum.iter().fold(0.0f64, |m, &x| m.max(x)) * self.norm()
    }

    /// `max_{r,t} rho(r, t)`
    pub fn rho0(&self) -> f64 {
        self.rho_sum.iter().fold(0.0f64, |m, &x| m.max(x)) * self.norm()
    }

    /// Mean position of each atom at frame `ti`, from the marginal densities.
    pub fn mean_positions(&self, ti: usize) -> Vec<f64> {
        (0..self.n_atoms)
            .map(|a| {
                (0..self.grid.n_bins)
                    .map(|b| self.rho_atom(a, ti, b) * self.grid.center(b))
                    .sum::<f64>()
                    * self.grid.bin_width
            })
            .collect()
    }

    /// Nearest time-grid index to `t`.
    pub fn time_index(&self, t: f64) -> usize {
        let mut best = 0;
        for (i, &ti) in self.times.iter().enumerate() {
            if (ti - t).abs() < (self.times[best] - t).abs() {
                best = i;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{EventCounts, Snapshot};

    fn basis() -> ExcitationBasis {
        ExcitationBasis::new(5, 2).unwrap()
    }

    #[test]
    fn weight_of_basis_state() {
        let b = basis();
        let mut c = DVector::from_element(10, Complex64::new(0.0, 0.0));
        c[0] = Complex64::new(1.0, 0.0);
        let w = excitation_weights(&c, &b);
        assert_eq!(w, vec![1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(excitation_weight(&c, &b, 1), 1.0);
        assert_eq!(excitation_weight(&c, &b, 4), 0.0);
    }

    #[test]
    fn uniform_superposition_weight() {
        let b = basis();
        let amp = Complex64::new(0.0, (0.1f64).sqrt());
        let c = DVector::from_element(10, amp);
        // each atom is in 4 of the 10 pairs
        for a in 0..5 {
            assert!((excitation_weight(&c, &b, a) - 0.4).abs() < 1e-12);
        }
        assert!((excitation_weights(&c, &b).iter().sum::<f64>() - 2.0).abs() < 1e-12);
    }

    fn static_trajectory(n_frames: usize) -> Trajectory {
        let snaps = (0..=n_frames)
            .map(|i| Snapshot {
                t: i as f64 * 0.01,
                positions: vec![0.0, 5.0, 10.0, 15.0, 20.0],
                velocities: vec![0.0; 5],
                surface: 3,
                populations: {
                    let mut p = vec![0.0; 10];
                    p[3] = 1.0;
                    p
                },
                atom_weights: vec![0.4; 5],
                energy: 0.0,
            })
            .collect();
        Trajectory {
            snapshots: snaps,
            hops: vec![],
            events: EventCounts::default(),
            min_gauge_overlap: 1.0,
        }
    }

    #[test]
    fn static_trajectory_gives_unit_spikes() {
        let grid = SpaceGrid::covering(0.0, 20.0, 2.0, 0.25);
        let times: Vec<f64> = (0..=3).map(|i| i as f64 * 0.01).collect();
        let mut obs = EnsembleObservables::new(times, grid, 5, 10, 2);
        obs.add_trajectory(&static_trajectory(3)).unwrap();
        for ti in 0..4 {
            let total: f64 = (0..grid.n_bins).map(|b| obs.rho(ti, b)).sum::<f64>() * 0.25;
            assert!((total - 5.0).abs() < 1e-12);
            let e_total: f64 = (0..grid.n_bins).map(|b| obs.e(ti, b)).sum::<f64>() * 0.25;
            assert!((e_total - 2.0).abs() < 1e-12);
            let occupied = (0..grid.n_bins).filter(|&b| obs.rho(ti, b) > 0.0).count();
            assert_eq!(occupied, 5);
            assert_eq!(obs.fraction(ti, 3), 1.0);
            assert_eq!(obs.population(ti, 3), 1.0);
        }
        assert_eq!(obs.mean_positions(0)[1], grid.center(grid.bin(5.0)));
        assert!((obs.atom_excitation(0, 2) - 0.4).abs() < 1e-12);
        assert_eq!(obs.midline_transfer(0), None);
    }

    #[test]
    fn midline_transfer_of_a_moving_atom() {
        let grid = SpaceGrid::covering(0.0, 20.0, 2.0, 0.25);
        let mut traj = static_trajectory(2);
        // atom 2 (weight 0.4) moves into the band, then across it
        traj.snapshots[1].positions[1] = 10.0;
        traj.snapshots[2].positions[1] = 12.0;
        let mut obs = EnsembleObservables::new(vec![0.0, 0.01, 0.02], grid, 5, 10, 2).with_midline(10.0, 1.0);
        obs.add_trajectory(&traj).unwrap();
        assert_eq!(obs.midline_transfer(0), Some(0.0));
        assert!((obs.midline_transfer(1).unwrap() - 0.1).abs() < 1e-12);
        assert!((obs.midline_transfer(2).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_positions_land_in_edge_bins() {
        let grid = SpaceGrid::covering(0.0, 1.0, 0.0, 0.25);
        assert_eq!(grid.bin(-7.0), 0);
        assert_eq!(grid.bin(99.0), grid.n_bins - 1);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let grid = SpaceGrid::covering(0.0, 20.0, 2.0, 0.25);
        let mut obs = EnsembleObservables::new(vec![0.0, 0.01], grid, 5, 10, 2);
        assert!(obs.add_trajectory(&static_trajectory(3)).is_err());
        let other = EnsembleObservables::new(vec![0.0], grid, 5, 10, 2);
        assert!(obs.merge(&other).is_err());
    }
}
