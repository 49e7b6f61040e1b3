//! Trajectory swarms: initial sampling, parallel propagation and
//! aggregation of ensemble observables.
//!
//! Trajectory `i` draws its initial condition and all of its hop decisions
//! from stream `i` of a ChaCha generator seeded with the root seed.
//! Trajectories are grouped into fixed-size chunks; chunks run in parallel
//! and their partial sums are folded in chunk order, so results do not
//! depend on the number of worker threads.

pub mod analysis;
mod observables;
mod output;
mod sampler;

pub use observables::{excitation_weight, excitation_weights, EnsembleObservables, SpaceGrid};
pub use output::write_outputs;
pub use sampler::{sample_initials, InitialSampler};

use rayon::prelude::*;

use crate::config::AggregateConfig;
use crate::dynamics::{DynamicsParams, EventCounts, HopRecord, InitialCondition, Propagator};
use crate::error::{invalid, Result};
use crate::hamiltonian::ExcitonModel;

const CHUNK: usize = 16;

/// Half-width of the central band that counts as neither side of the chain
/// when tracking [`EnsembleObservables::midline_transfer`].
pub const MIDLINE_BAND_UM: f64 = 1.0;

#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub observables: EnsembleObservables,
    /// `(trajectory index, record)` for every accepted or frustrated hop.
    pub hops: Vec<(usize, HopRecord)>,
    /// Trajectories that were abandoned, with the reason.
    pub aborted: Vec<(usize, String)>,
    pub events: EventCounts,
    pub min_gauge_overlap: f64,
    /// Largest `|E(t) - E(0)|` between hops, relative to `|E(0)|`, over all
    /// trajectories.
    pub max_energy_drift: f64,
}

impl EnsembleRun {
    pub fn n_traj_effective(&self) -> usize {
        self.observables.n_traj
    }
}

pub fn sampler_for(cfg: &AggregateConfig) -> InitialSampler {
    InitialSampler::new(cfg.positions_um.clone(), cfg.sigma_um, cfg.mass(), cfg.rng_seed)
}

pub fn empty_observables(cfg: &AggregateConfig, model: &ExcitonModel) -> EnsembleObservables {
    let times = (0..=cfg.n_frames())
        .map(|i| (i * cfg.steps_per_frame()) as f64 * cfg.dt_us)
        .collect();
    let lo = cfg.positions_um[0];
    let hi = cfg.positions_um[cfg.n_atoms - 1];
    let grid = SpaceGrid::covering(lo, hi, cfg.grid_margin_um, cfg.bin_width_um);
    EnsembleObservables::new(times, grid, cfg.n_atoms, model.dim(), cfg.n_excitations)
        .with_midline(0.5 * (lo + hi), MIDLINE_BAND_UM)
}

struct ChunkResult {
    observables: EnsembleObservables,
    hops: Vec<(usize, HopRecord)>,
    aborted: Vec<(usize, String)>,
    events: EventCounts,
    min_overlap: f64,
    drift: f64,
}

/// Runs `cfg.n_traj` trajectories starting on the 0-based surface
/// `initial_surface`, using `workers` threads (all cores when `None`).
pub fn run_ensemble(
    cfg: &AggregateConfig,
    model: &ExcitonModel,
    initial_surface: usize,
    workers: Option<usize>,
) -> Result<EnsembleRun> {
    cfg.validate()?;
    if initial_surface >= model.dim() {
        return Err(invalid("initial surface out of range"));
    }
    let sampler = sampler_for(cfg);
    let params = DynamicsParams::from_config(cfg);
    let template = empty_observables(cfg, model);
    let propagator = Propagator::new(model, params);

    let run_chunk = |chunk: usize| -> Result<ChunkResult> {
        let mut out = ChunkResult {
            observables: template.empty_like(),
            hops: Vec::new(),
            aborted: Vec::new(),
            events: EventCounts::default(),
            min_overlap: 1.0,
            drift: 0.0,
        };
        let end = ((chunk + 1) * CHUNK).min(cfg.n_traj);
        for i in chunk * CHUNK..end {
            let mut rng = sampler.rng_for(i as u64);
            let (positions, velocities) = sampler.draw(&mut rng);
            let initial = InitialCondition {
                positions,
                velocities,
                surface: initial_surface,
            };
            match propagator.run(&initial, rng, cfg.n_frames(), cfg.steps_per_frame()) {
                Ok(traj) => {
                    out.observables.add_trajectory(&traj)?;
                    out.hops.extend(traj.hops.iter().map(|h| (i, *h)));
                    out.events.capped_couplings += traj.events.capped_couplings;
                    out.events.renormalizations += traj.events.renormalizations;
                    out.events.gauge_flags += traj.events.gauge_flags;
                    out.min_overlap = out.min_overlap.min(traj.min_gauge_overlap);
                    out.drift = out.drift.max(traj.max_energy_drift());
                }
                Err(e @ crate::Error::Collision { .. }) | Err(e @ crate::Error::SingularGeometry(..)) => {
                    log::warn!("trajectory {i} aborted: {e}");
                    out.aborted.push((i, e.to_string()));
                }
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    };

    let n_chunks = cfg.n_traj.div_ceil(CHUNK);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        pool = pool.num_threads(w.max(1));
    }
    let pool = pool
        .build()
        .map_err(|e| invalid(format!("cannot build worker pool: {e}")))?;
    let chunks: Vec<Result<ChunkResult>> =
        pool.install(|| (0..n_chunks).into_par_iter().map(run_chunk).collect());

    let mut run = EnsembleRun {
        observables: template,
        hops: Vec::new(),
        aborted: Vec::new(),
        events: EventCounts::default(),
        min_gauge_overlap: 1.0,
        max_energy_drift: 0.0,
    };
    for chunk in chunks {
        let chunk = chunk?;
        run.observables.merge(&chunk.observables)?;
        run.hops.extend(chunk.hops);
        run.aborted.extend(chunk.aborted);
        run.events.capped_couplings += chunk.events.capped_couplings;
        run.events.renormalizations += chunk.events.renormalizations;
        run.events.gauge_flags += chunk.events.gauge_flags;
        run.min_gauge_overlap = run.min_gauge_overlap.min(chunk.min_overlap);
        run.max_energy_drift = run.max_energy_drift.max(chunk.drift);
    }
    Ok(run)
}
