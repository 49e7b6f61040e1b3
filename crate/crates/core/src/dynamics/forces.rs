//! Hellmann-Feynman forces and non-adiabatic coupling vectors.

use crate::error::{invalid, Result};
use crate::hamiltonian::ExcitonModel;
use crate::spectra::ExcitonSpectrum;

/// Energy gap below which non-adiabatic couplings are capped.
pub const DEFAULT_EPS_DEG: f64 = 1e-6;
/// Cap on the magnitude of a coupling component (1/um).
pub const DEFAULT_D_MAX: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegeneracyGuard {
    pub eps_deg: f64,
    pub d_max: f64,
}

impl Default for DegeneracyGuard {
    fn default() -> Self {
        Self {
            eps_deg: DEFAULT_EPS_DEG,
            d_max: DEFAULT_D_MAX,
        }
    }
}

/// `-<zeta_s| dH/dr_a |zeta_s>` for every atom `a`.
pub fn surface_force(
    model: &ExcitonModel,
    spectrum: &ExcitonSpectrum,
    surface: usize,
) -> Result<Vec<f64>> {
    if surface >= spectrum.dim() {
        return Err(invalid(format!(
            "surface {} out of range for {} states",
            surface + 1,
            spectrum.dim()
        )));
    }
    let v = spectrum.vector(surface);
    let mut force = model.gradient_element(&spectrum.geometry, v, v);
    force.iter_mut().for_each(|f| *f = -*f);
    Ok(force)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    /// `d_ki = <zeta_k| grad zeta_i>`, one component per atom.
    pub vector: Vec<f64>,
    /// Set when the gap was below `eps_deg` and components were clamped.
    pub capped: bool,
}

/// `d_ki[a] = <zeta_k| dH/dr_a |zeta_i> / (O_i - O_k)`.
pub fn nonadiabatic_coupling(
    model: &ExcitonModel,
    spectrum: &ExcitonSpectrum,
    k: usize,
    i: usize,
    guard: DegeneracyGuard,
) -> Result<Coupling> {
    if k == i {
        return Err(invalid("non-adiabatic coupling needs two different states"));
    }
    let n = spectrum.dim();
    if k >= n || i >= n {
        return Err(invalid(format!("state index out of range for {n} states")));
    }
    let numerator =
        model.gradient_element(&spectrum.geometry, spectrum.vector(k), spectrum.vector(i));
    let gap = spectrum.energies[i] - spectrum.energies[k];
    if gap.abs() >= guard.eps_deg {
        return Ok(Coupling {
            vector: numerator.into_iter().map(|x| x / gap).collect(),
            capped: false,
        });
    }
    let gap = if gap == 0.0 { guard.eps_deg } else { gap };
    let vector = numerator
        .into_iter()
        .map(|x| (x / gap).clamp(-guard.d_max, guard.d_max))
        .collect();
    log::debug!("capped coupling between states {} and {}", k + 1, i + 1);
    Ok(Coupling {
        vector,
        capped: true,
    })
}
