//! Quantum-classical propagation of a single trajectory.
//!
//! Atoms move classically on the active Born-Oppenheimer surface (velocity
//! Verlet). The electronic state is carried in the diabatic product basis,
//! where the Hamiltonian is smooth in the geometry, and fewest-switches hops
//! between surfaces are attempted once per nuclear step.

mod electronic;
mod forces;

pub use electronic::{adiabatic_amplitudes, step_electronic, RENORM_TOLERANCE};
pub use forces::{
    nonadiabatic_coupling, surface_force, Coupling, DegeneracyGuard, DEFAULT_D_MAX,
    DEFAULT_EPS_DEG,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::{AggregateConfig, Mode};
use crate::ensemble::excitation_weights;
use crate::error::{invalid, Error, Result};
use crate::hamiltonian::ExcitonModel;
use crate::spectra::{align_gauge, diagonalize, ExcitonSpectrum};

/// Closest approach (um) before a trajectory is abandoned.
pub const DEFAULT_R_MIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsParams {
    /// Atomic mass in internal units.
    pub mass: f64,
    pub dt: f64,
    pub n_sub: usize,
    pub mode: Mode,
    pub freeze_coefficients: bool,
    pub reverse_on_frustrated: bool,
    pub guard: DegeneracyGuard,
    pub r_min: f64,
}

impl DynamicsParams {
    pub fn from_config(cfg: &AggregateConfig) -> Self {
        Self {
            mass: cfg.mass(),
            dt: cfg.dt_us,
            n_sub: cfg.n_sub_electronic,
            mode: cfg.mode,
            freeze_coefficients: cfg.freeze_coefficients,
            reverse_on_frustrated: cfg.reverse_on_frustrated,
            guard: DegeneracyGuard::default(),
            r_min: DEFAULT_R_MIN,
        }
    }

    fn coefficients_frozen(&self) -> bool {
        self.mode == Mode::FixedSurface && self.freeze_coefficients
    }
}

#[derive(Debug, Clone)]
pub struct TrajectoryState {
    pub t: f64,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    /// Amplitudes in the diabatic product basis.
    pub coeffs: DVector<Complex64>,
    /// Active surface (0-based energy index).
    pub surface: usize,
    /// Gauge-aligned spectrum at `positions`.
    pub spectrum: ExcitonSpectrum,
    pub hamiltonian: DMatrix<f64>,
    pub force: Vec<f64>,
    pub rng: ChaCha8Rng,
}

impl TrajectoryState {
    pub fn kinetic_energy(&self, mass: f64) -> f64 {
        0.5 * mass * self.velocities.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn total_energy(&self, mass: f64) -> f64 {
        self.kinetic_energy(mass) + self.spectrum.energies[self.surface]
    }

    pub fn adiabatic_populations(&self) -> Vec<f64> {
        adiabatic_amplitudes(&self.spectrum.vectors, &self.coeffs)
            .iter()
            .map(|z| z.norm_sqr())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopRecord {
    pub t: f64,
    pub from: usize,
    pub to: usize,
    pub accepted: bool,
    pub frustrated: bool,
    /// Change of kinetic energy caused by the hop (rad/us).
    pub kinetic_adjustment: f64,
}

/// Initial nuclear configuration of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialCondition {
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    /// 0-based energy index; the electronic state starts in this eigenstate.
    pub surface: usize,
}

/// Output frame of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub surface: usize,
    /// `|<zeta_k|Psi>|^2`
    pub populations: Vec<f64>,
    /// Probability that each atom carries an excitation.
    pub atom_weights: Vec<f64>,
    pub energy: f64,
}

/// Counters for events that are logged rather than treated as errors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventCounts {
    pub capped_couplings: usize,
    pub renormalizations: usize,
    pub gauge_flags: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub hops: Vec<HopRecord>,
    pub events: EventCounts,
    /// Smallest diagonal overlap between consecutive spectra.
    pub min_gauge_overlap: f64,
}

impl Trajectory {
    /// Largest change of the total energy since the last accepted hop (or
    /// the start), relative to the energy at that reference point.
    pub fn max_energy_drift(&self) -> f64 {
        let Some(first) = self.snapshots.first() else {
            return 0.0;
        };
        let mut worst = 0.0f64;
        let mut reference = first.energy;
        let mut hops = self.hops.iter().filter(|h| h.accepted).peekable();
        for w in self.snapshots.windows(2) {
            let mut hopped = false;
            while hops.peek().is_some_and(|h| h.t <= w[1].t + 1e-12) {
                hops.next();
                hopped = true;
            }
            if hopped {
                reference = w[1].energy;
                continue;
            }
            let scale = reference.abs().max(f64::MIN_POSITIVE);
            worst = worst.max((w[1].energy - reference).abs() / scale);
        }
        worst
    }
}

pub struct Propagator<'m> {
    model: &'m ExcitonModel,
    params: DynamicsParams,
}

impl<'m> Propagator<'m> {
    pub fn new(model: &'m ExcitonModel, params: DynamicsParams) -> Self {
        Self { model, params }
    }

    pub fn params(&self) -> &DynamicsParams {
        &self.params
    }

    pub fn model(&self) -> &ExcitonModel {
        self.model
    }

    pub fn initial_state(&self, initial: &InitialCondition, rng: ChaCha8Rng) -> Result<TrajectoryState> {
        let n = self.model.n_atoms();
        if initial.positions.len() != n || initial.velocities.len() != n {
            return Err(invalid(format!("initial condition must have {n} atoms")));
        }
        let h = self.model.hamiltonian(&initial.positions)?;
        let spectrum = diagonalize(&h)?;
        if initial.surface >= spectrum.dim() {
            return Err(invalid(format!(
                "initial surface {} out of range for {} states",
                initial.surface + 1,
                spectrum.dim()
            )));
        }
        let coeffs = DVector::from_iterator(
            spectrum.dim(),
            spectrum
                .vector(initial.surface)
                .iter()
                .map(|&x| Complex64::new(x, 0.0)),
        );
        let force = surface_force(self.model, &spectrum, initial.surface)?;
        Ok(TrajectoryState {
            t: 0.0,
            positions: initial.positions.clone(),
            velocities: initial.velocities.clone(),
            coeffs,
            surface: initial.surface,
            spectrum,
            hamiltonian: h.matrix,
            force,
            rng,
        })
    }

    /// Velocity-Verlet step on the active surface. Re-diagonalizes and
    /// gauge-aligns the spectrum at the new geometry. Returns the Hamiltonian
    /// at the start of the step and the smallest gauge overlap.
    pub fn step_nuclear(&self, state: &mut TrajectoryState) -> Result<(DMatrix<f64>, f64, bool)> {
        let dt = self.params.dt;
        let inv_m = 1.0 / self.params.mass;
        for ((x, v), f) in state
            .positions
            .iter_mut()
            .zip(state.velocities.iter_mut())
            .zip(&state.force)
        {
            *v += 0.5 * dt * f * inv_m;
            *x += dt * *v;
        }
        self.check_distances(state)?;
        let h = self.model.hamiltonian(&state.positions)?;
        let fresh = diagonalize(&h)?;
        let (spectrum, report) = align_gauge(fresh, &state.spectrum)?;
        state.spectrum = spectrum;
        let h_old = std::mem::replace(&mut state.hamiltonian, h.matrix);
        state.force = surface_force(self.model, &state.spectrum, state.surface)?;
        for (v, f) in state.velocities.iter_mut().zip(&state.force) {
            *v += 0.5 * dt * f * inv_m;
        }
        state.t += dt;
        Ok((h_old, report.min_overlap, report.near_degenerate))
    }

    fn check_distances(&self, state: &TrajectoryState) -> Result<()> {
        let x = &state.positions;
        for a in 0..x.len() {
            for b in a + 1..x.len() {
                if (x[a] - x[b]).abs() < self.params.r_min {
                    return Err(Error::Collision {
                        t: state.t + self.params.dt,
                        a: a + 1,
                        b: b + 1,
                        r_min: self.params.r_min,
                    });
                }
            }
        }
        Ok(())
    }

    /// Fewest-switches hop attempt with the state at the end of a step.
    ///
    /// One uniform number is drawn per attempt. Returns the record of an
    /// accepted or frustrated hop and the number of capped couplings.
    pub fn attempt_hop(&self, state: &mut TrajectoryState) -> Result<(Option<HopRecord>, usize)> {
        let dt = self.params.dt;
        let gamma = state.surface;
        let amps = adiabatic_amplitudes(&state.spectrum.vectors, &state.coeffs);
        let pop = amps[gamma].norm_sqr();
        let xi: f64 = state.rng.random();
        if pop <= 0.0 {
            return Ok((None, 0));
        }
        let mut capped = 0;
        let mut cumulative = 0.0;
        let mut target = None;
        for k in 0..state.spectrum.dim() {
            if k == gamma {
                continue;
            }
            let d = nonadiabatic_coupling(self.model, &state.spectrum, gamma, k, self.params.guard)?;
            capped += d.capped as usize;
            let vd: f64 = state.velocities.iter().zip(&d.vector).map(|(v, d)| v * d).sum();
            // Re(c_gamma^* c_k) (v . d_gamma,k)
            let flow = (amps[gamma].conj() * amps[k]).re * vd;
            let g = (2.0 * dt * flow / pop).max(0.0);
            cumulative += g;
            if target.is_none() && xi < cumulative {
                target = Some((k, d.vector));
            }
        }
        let Some((k, d)) = target else {
            return Ok((None, capped));
        };
        let gap = state.spectrum.energies[k] - state.spectrum.energies[gamma];
        let m = self.params.mass;
        // solve 1/2 M |v + alpha d|^2 = 1/2 M |v|^2 - gap for alpha
        let a = 0.5 * m * d.iter().map(|x| x * x).sum::<f64>();
        let b = m * state.velocities.iter().zip(&d).map(|(v, x)| v * x).sum::<f64>();
        let disc = b * b - 4.0 * a * gap;
        let mut record = HopRecord {
            t: state.t,
            from: gamma,
            to: k,
            accepted: false,
            frustrated: false,
            kinetic_adjustment: 0.0,
        };
        if a <= 0.0 || disc < 0.0 {
            record.frustrated = true;
            if self.params.reverse_on_frustrated && a > 0.0 {
                let alpha = -b / a;
                for (v, x) in state.velocities.iter_mut().zip(&d) {
                    *v += alpha * x;
                }
            }
            return Ok((Some(record), capped));
        }
        let alpha = if b < 0.0 {
            (-b - disc.sqrt()) / (2.0 * a)
        } else {
            (-b + disc.sqrt()) / (2.0 * a)
        };
        for (v, x) in state.velocities.iter_mut().zip(&d) {
            *v += alpha * x;
        }
        state.surface = k;
        state.force = surface_force(self.model, &state.spectrum, k)?;
        record.accepted = true;
        record.kinetic_adjustment = -gap;
        Ok((Some(record), capped))
    }

    /// One full step: nuclei, electrons, then a hop attempt in FSSH mode.
    pub fn step(&self, state: &mut TrajectoryState, events: &mut EventCounts) -> Result<(Option<HopRecord>, f64)> {
        let (h_old, overlap, flagged) = self.step_nuclear(state)?;
        events.gauge_flags += flagged as usize;
        if !self.params.coefficients_frozen() {
            let renorm = step_electronic(
                &mut state.coeffs,
                &h_old,
                &state.hamiltonian,
                self.params.dt,
                self.params.n_sub,
            );
            events.renormalizations += renorm as usize;
        }
        if self.params.mode == Mode::Fssh {
            let (hop, capped) = self.attempt_hop(state)?;
            events.capped_couplings += capped;
            return Ok((hop, overlap));
        }
        Ok((None, overlap))
    }

    pub fn snapshot(&self, state: &TrajectoryState) -> Snapshot {
        Snapshot {
            t: state.t,
            positions: state.positions.clone(),
            velocities: state.velocities.clone(),
            surface: state.surface,
            populations: state.adiabatic_populations(),
            atom_weights: excitation_weights(&state.coeffs, self.model.basis()),
            energy: state.total_energy(self.params.mass),
        }
    }

    /// Propagates from `initial` and records `n_frames + 1` snapshots spaced
    /// by `steps_per_frame` nuclear steps.
    pub fn run(
        &self,
        initial: &InitialCondition,
        rng: ChaCha8Rng,
        n_frames: usize,
        steps_per_frame: usize,
    ) -> Result<Trajectory> {
        let mut state = self.initial_state(initial, rng)?;
        let mut snapshots = Vec::with_capacity(n_frames + 1);
        let mut hops = Vec::new();
        let mut events = EventCounts::default();
        let mut min_overlap = 1.0f64;
        snapshots.push(self.snapshot(&state));
        for frame in 1..=n_frames {
            for _ in 0..steps_per_frame {
                let (hop, overlap) = self.step(&mut state, &mut events)?;
                min_overlap = min_overlap.min(overlap);
                if let Some(hop) = hop {
                    hops.push(hop);
                }
            }
            // keep the frame times on the exact output grid
            state.t = frame as f64 * steps_per_frame as f64 * self.params.dt;
            snapshots.push(self.snapshot(&state));
        }
        Ok(Trajectory {
            snapshots,
            hops,
            events,
            min_gauge_overlap: min_overlap,
        })
    }
}

/// Runs one trajectory with the integration settings of `cfg`.
pub fn run_trajectory(
    cfg: &AggregateConfig,
    model: &ExcitonModel,
    initial: &InitialCondition,
    rng: ChaCha8Rng,
) -> Result<Trajectory> {
    Propagator::new(model, DynamicsParams::from_config(cfg)).run(
        initial,
        rng,
        cfg.n_frames(),
        cfg.steps_per_frame(),
    )
}
