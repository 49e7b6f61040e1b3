//! Run configuration.
//!
//! Configuration files are flat TOML with the unit in every key name. All
//! dispersion coefficients are stored as quoted (MHz um^k) and converted only
//! when a model is built.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::basis::{binomial, ExcitationBasis};
use crate::error::{Error, Result};
use crate::hamiltonian::{ExcitonModel, Interaction};
use crate::units::{
    mass_to_internal, DEFAULT_C3_MHZ_UM3, DEFAULT_C6_MHZ_UM6, DEFAULT_MASS_KG,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Newtonian motion on one Born-Oppenheimer surface, no hops.
    FixedSurface,
    /// Fewest-switches surface hopping.
    Fssh,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::FixedSurface => "fixed-surface",
            Mode::Fssh => "fssh",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-surface" | "fixed" => Ok(Mode::FixedSurface),
            "fssh" => Ok(Mode::Fssh),
            other => Err(Error::Config(format!(
                "unknown mode `{other}` (expected `fixed-surface` or `fssh`)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AggregateConfig {
    pub n_atoms: usize,
    pub n_excitations: usize,
    /// Mean atom positions at t = 0, strictly increasing.
    pub positions_um: Vec<f64>,
    pub c3_mhz_um3: f64,
    /// Coefficient of the `-C6 / R^6` diagonal; negative means repulsive.
    pub c6_mhz_um6: f64,
    pub mass_kg: f64,
    /// Position width of the initial Gaussian; the velocity width follows.
    pub sigma_um: f64,
    pub n_traj: usize,
    pub dt_us: f64,
    pub n_sub_electronic: usize,
    pub t_final_us: f64,
    pub output_stride_us: f64,
    /// 1-based energy index of the initial Born-Oppenheimer surface.
    pub initial_surface: usize,
    pub mode: Mode,
    /// Keep the electronic coefficients constant in fixed-surface mode.
    pub freeze_coefficients: bool,
    /// Reverse the velocity component along the coupling on frustrated hops.
    pub reverse_on_frustrated: bool,
    pub bin_width_um: f64,
    /// Extra room on each side of the chain for the density grid.
    pub grid_margin_um: f64,
    pub rng_seed: u64,
}

impl Default for AggregateConfig {
    fn default() -> Self {
        Self {
            n_atoms: 5,
            n_excitations: 2,
            positions_um: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            c3_mhz_um3: DEFAULT_C3_MHZ_UM3,
            c6_mhz_um6: DEFAULT_C6_MHZ_UM6,
            mass_kg: DEFAULT_MASS_KG,
            sigma_um: 0.3,
            n_traj: 2000,
            dt_us: 1.0e-4,
            n_sub_electronic: 10,
            t_final_us: 1.5,
            output_stride_us: 1.0e-2,
            initial_surface: 1,
            mode: Mode::Fssh,
            freeze_coefficients: true,
            reverse_on_frustrated: false,
            bin_width_um: 0.25,
            grid_margin_um: 8.0,
            rng_seed: 1,
        }
    }
}

fn field_error(field: &str, msg: impl fmt::Display) -> Error {
    Error::Config(format!("field `{field}`: {msg}"))
}

impl AggregateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_atoms < 2 {
            return Err(field_error("n_atoms", "need at least two atoms"));
        }
        if !(1..=2).contains(&self.n_excitations) || self.n_excitations >= self.n_atoms {
            return Err(field_error(
                "n_excitations",
                format!("must be 1 or 2 and below n_atoms, got {}", self.n_excitations),
            ));
        }
        if self.positions_um.len() != self.n_atoms {
            return Err(field_error(
                "positions_um",
                format!("expected {} entries, got {}", self.n_atoms, self.positions_um.len()),
            ));
        }
        if !self.positions_um.iter().all(|x| x.is_finite())
            || self.positions_um.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(field_error("positions_um", "must be finite and strictly increasing"));
        }
        let n_states = binomial(self.n_atoms, self.n_excitations);
        if self.initial_surface == 0 || self.initial_surface > n_states {
            return Err(field_error(
                "initial_surface",
                format!("must lie in 1..={n_states}, got {}", self.initial_surface),
            ));
        }
        for (name, value) in [
            ("mass_kg", self.mass_kg),
            ("dt_us", self.dt_us),
            ("output_stride_us", self.output_stride_us),
            ("bin_width_um", self.bin_width_um),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(field_error(name, format!("must be positive, got {value}")));
            }
        }
        if !(self.t_final_us >= 0.0) {
            return Err(field_error("t_final_us", "must be non-negative"));
        }
        if !(self.sigma_um >= 0.0) {
            return Err(field_error("sigma_um", "must be non-negative"));
        }
        if !(self.grid_margin_um >= 0.0) {
            return Err(field_error("grid_margin_um", "must be non-negative"));
        }
        if self.n_traj == 0 {
            return Err(field_error("n_traj", "need at least one trajectory"));
        }
        if self.n_sub_electronic == 0 {
            return Err(field_error("n_sub_electronic", "need at least one substep"));
        }
        let ratio = self.output_stride_us / self.dt_us;
        if (ratio - ratio.round()).abs() > 1e-6 * ratio {
            return Err(field_error(
                "output_stride_us",
                "must be an integer multiple of dt_us",
            ));
        }
        Ok(())
    }

    pub fn interaction(&self) -> Interaction {
        Interaction::from_mhz(self.c3_mhz_um3, self.c6_mhz_um6)
    }

    pub fn mass(&self) -> f64 {
        mass_to_internal(self.mass_kg)
    }

    pub fn model(&self) -> Result<ExcitonModel> {
        let basis = ExcitationBasis::new(self.n_atoms, self.n_excitations)?;
        Ok(ExcitonModel::new(basis, self.interaction()))
    }

    /// Nuclear steps between two output frames.
    pub fn steps_per_frame(&self) -> usize {
        (self.output_stride_us / self.dt_us).round() as usize
    }

    /// Number of output frames after t = 0.
    pub fn n_frames(&self) -> usize {
        (self.t_final_us / self.output_stride_us).round() as usize
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
