use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::units::velocity_width;

/// Uncorrelated Gaussian initial positions and velocities, as for atoms
/// released from the ground state of independent harmonic traps.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialSampler {
    pub mean: Vec<f64>,
    pub sigma: f64,
    pub sigma_v: f64,
    pub seed: u64,
}

impl InitialSampler {
    /// Velocity width is `hbar / (M sigma)` for the internal mass `mass`.
    pub fn new(mean: Vec<f64>, sigma: f64, mass: f64, seed: u64) -> Self {
        Self {
            mean,
            sigma,
            sigma_v: velocity_width(mass, sigma),
            seed,
        }
    }

    /// Independent stream for trajectory `index`; the same stream later
    /// drives that trajectory's hop decisions.
    pub fn rng_for(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Draws positions then velocities, always `2 N` normal deviates.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
        let positions = self
            .mean
            .iter()
            .map(|&m| {
                let z: f64 = StandardNormal.sample(rng);
                m + self.sigma * z
            })
            .collect();
        let velocities = self
            .mean
            .iter()
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                self.sigma_v * z
            })
            .collect();
        (positions, velocities)
    }
}

/// Initial positions and velocities of the first `n_traj` trajectories.
pub fn sample_initials(sampler: &InitialSampler, n_traj: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    (0..n_traj as u64)
        .map(|i| sampler.draw(&mut sampler.rng_for(i)))
        .collect()
}
