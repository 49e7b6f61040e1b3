//! Built-in scenarios: chain geometries, initial-state selection and the
//! configuration overrides of each named run.
//!
//! Initial surfaces are chosen by overlap rather than by energy index where
//! the target state is described by its character: the eigenstate of the
//! mean geometry with the largest fidelity to a reference vector wins.

use nalgebra::DVector;

use crate::basis::ExcitationBasis;
use crate::config::{AggregateConfig, Mode};
use crate::decompose::{tensor_embed, Partition};
use crate::error::{Error, Result};
use crate::hamiltonian::{ExcitonModel, Interaction};
use crate::spectra::diagonalize;

/// Regular lattice constant (um).
pub const LATTICE_UM: f64 = 5.0;
/// Separation of a dislocated pair (um).
pub const DISLOCATION_UM: f64 = 2.5;

/// The gate pulse needs longer than the other scenarios to leave the chain.
pub const GATE_T_FINAL_US: f64 = 5.0;
/// Starting from rest, the outer pairs on the attractive surface meet after
/// about 3.4 us.
pub const ATTRACTIVE_T_FINAL_US: f64 = 5.0;

/// Chain layouts.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// Equally spaced atoms.
    Regular { n: usize, d: f64 },
    /// The last two atoms are `a` apart, all others `d`.
    DislocatedEnd { n: usize, d: f64, a: f64 },
    /// The first two atoms are `a` apart, all others `d`.
    DislocatedStart { n: usize, d: f64, a: f64 },
    /// Both end pairs are `a` apart, all others `d`.
    DoublyDislocated { n: usize, d: f64, a: f64 },
}

impl Geometry {
    pub fn positions(&self) -> Vec<f64> {
        let (n, gaps): (usize, Box<dyn Fn(usize) -> f64>) = match *self {
            Geometry::Regular { n, d } => (n, Box::new(move |_| d)),
            Geometry::DislocatedEnd { n, d, a } => {
                (n, Box::new(move |i| if i + 2 == n { a } else { d }))
            }
            Geometry::DislocatedStart { n, d, a } => {
                (n, Box::new(move |i| if i == 0 { a } else { d }))
            }
            Geometry::DoublyDislocated { n, d, a } => {
                (n, Box::new(move |i| if i == 0 || i + 2 == n { a } else { d }))
            }
        };
        let mut out = Vec::with_capacity(n);
        let mut x = 0.0;
        for i in 0..n {
            out.push(x);
            x += gaps(i);
        }
        out
    }
}

/// How the initial Born-Oppenheimer surface is picked.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceRule {
    /// 1-based energy index at the mean geometry.
    Index(usize),
    /// Eigenstate of the mean geometry with maximal overlap to a reference
    /// state, given in the two-excitation basis.
    MaxFidelity { reference: Reference },
}

/// Reference states for [`SurfaceRule::MaxFidelity`].
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    /// 1-based eigenstate `k` of another geometry.
    Eigenstate { geometry: Geometry, k: usize },
    /// 1-based eigenstate `k` of another geometry with all amplitude on the
    /// listed (1-based) atoms removed before renormalizing.
    Suppressed { geometry: Geometry, k: usize, atoms: Vec<usize> },
    /// Product of single-exciton eigenstates (1-based indices) of the two
    /// isolated sub-chains `a` and `b` (1-based atoms) of the mean geometry.
    Product { a: Vec<usize>, k_a: usize, b: Vec<usize>, k_b: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: &'static str,
    pub summary: &'static str,
    pub geometry: Geometry,
    pub q: usize,
    pub rule: SurfaceRule,
    pub mode: Mode,
    /// Static spectra only; `run` refuses these.
    pub static_only: bool,
    /// Partition (1-based atoms) used for decomposition reports.
    pub partition: Option<(Vec<usize>, Vec<usize>)>,
    pub t_final_us: f64,
}

/// A scenario turned into a complete configuration.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub name: String,
    pub config: AggregateConfig,
    pub static_only: bool,
    /// 0-based partition for decomposition reports.
    pub partition: Option<Partition>,
    /// Fidelity of the chosen surface to the reference state, when the
    /// surface was chosen by overlap.
    pub reference_fidelity: Option<f64>,
}

impl ResolvedScenario {
    /// 0-based initial surface.
    pub fn initial_surface(&self) -> usize {
        self.config.initial_surface - 1
    }
}

pub const SCENARIO_NAMES: [&str; 8] = [
    "homog5",
    "disloc5",
    "fixed-surface",
    "fixed-surface-attractive",
    "collision",
    "gate-a",
    "gate-b",
    "nonadiabatic",
];

fn regular() -> Geometry {
    Geometry::Regular { n: 5, d: LATTICE_UM }
}

fn dislocated_end() -> Geometry {
    Geometry::DislocatedEnd { n: 5, d: LATTICE_UM, a: DISLOCATION_UM }
}

fn doubly_dislocated() -> Geometry {
    Geometry::DoublyDislocated { n: 5, d: LATTICE_UM, a: DISLOCATION_UM }
}

pub fn scenario(name: &str) -> Result<ScenarioSpec> {
    let base = |name, summary, geometry, rule, mode| ScenarioSpec {
        name,
        summary,
        geometry,
        q: 2,
        rule,
        mode,
        static_only: false,
        partition: None,
        t_final_us: 1.5,
    };
    let spec = match name {
        "homog5" => ScenarioSpec {
            static_only: true,
            partition: Some((vec![1, 2, 3], vec![4, 5])),
            ..base(
                "homog5",
                "regular five-atom chain, bi-exciton spectrum",
                regular(),
                SurfaceRule::Index(1),
                Mode::FixedSurface,
            )
        },
        "disloc5" => ScenarioSpec {
            static_only: true,
            partition: Some((vec![1, 2, 3], vec![4, 5])),
            ..base(
                "disloc5",
                "chain with a dislocated end pair, bi-exciton decomposition",
                dislocated_end(),
                SurfaceRule::Index(1),
                Mode::FixedSurface,
            )
        },
        "fixed-surface" => base(
            "fixed-surface",
            "regular chain held on the all-in-phase (repulsive) surface",
            regular(),
            SurfaceRule::Index(10),
            Mode::FixedSurface,
        ),
        "fixed-surface-attractive" => ScenarioSpec {
            t_final_us: ATTRACTIVE_T_FINAL_US,
            ..base(
                "fixed-surface-attractive",
                "regular chain held on the lowest (attractive) surface",
                regular(),
                SurfaceRule::Index(1),
                Mode::FixedSurface,
            )
        },
        "collision" => base(
            "collision",
            "two repulsive dimers at both ends launch colliding exciton pulses",
            doubly_dislocated(),
            SurfaceRule::MaxFidelity {
                reference: Reference::Suppressed { geometry: regular(), k: 10, atoms: vec![3] },
            },
            Mode::Fssh,
        ),
        "gate-a" => ScenarioSpec {
            partition: Some((vec![3, 4, 5], vec![1, 2])),
            t_final_us: GATE_T_FINAL_US,
            ..base(
                "gate-a",
                "incoming pulse from a dislocated pair, gate chain in its second exciton",
                Geometry::DislocatedStart { n: 5, d: LATTICE_UM, a: DISLOCATION_UM },
                SurfaceRule::MaxFidelity {
                    reference: Reference::Product { a: vec![3, 4, 5], k_a: 2, b: vec![1, 2], k_b: 2 },
                },
                Mode::Fssh,
            )
        },
        "gate-b" => ScenarioSpec {
            partition: Some((vec![3, 4, 5], vec![1, 2])),
            t_final_us: GATE_T_FINAL_US,
            ..base(
                "gate-b",
                "incoming pulse from a dislocated pair, gate chain in its third exciton",
                Geometry::DislocatedStart { n: 5, d: LATTICE_UM, a: DISLOCATION_UM },
                SurfaceRule::MaxFidelity {
                    reference: Reference::Product { a: vec![3, 4, 5], k_a: 3, b: vec![1, 2], k_b: 2 },
                },
                Mode::Fssh,
            )
        },
        "nonadiabatic" => base(
            "nonadiabatic",
            "doubly dislocated chain started on its ninth surface",
            doubly_dislocated(),
            SurfaceRule::Index(9),
            Mode::Fssh,
        ),
        other => {
            return Err(Error::Config(format!(
                "unknown scenario `{other}` (known: {})",
                SCENARIO_NAMES.join(", ")
            )))
        }
    };
    Ok(spec)
}

fn to_zero_based(atoms: &[usize]) -> Vec<usize> {
    atoms.iter().map(|a| a - 1).collect()
}

fn eigenvector(model: &ExcitonModel, geometry: &Geometry, k: usize) -> Result<DVector<f64>> {
    let spectrum = diagonalize(&model.hamiltonian(&geometry.positions())?)?;
    if k == 0 || k > spectrum.dim() {
        return Err(Error::Config(format!("reference state {k} out of range")));
    }
    Ok(DVector::from_column_slice(spectrum.vector(k - 1)))
}

/// Single-exciton eigenvector `k` (1-based) of the isolated sub-chain.
fn sub_chain_state(interaction: Interaction, positions: &[f64], atoms: &[usize], k: usize) -> Result<Vec<f64>> {
    let sub: Vec<f64> = atoms.iter().map(|&a| positions[a]).collect();
    let model = ExcitonModel::new(ExcitationBasis::new(sub.len(), 1)?, interaction);
    let spectrum = diagonalize(&model.hamiltonian(&sub)?)?;
    if k == 0 || k > spectrum.dim() {
        return Err(Error::Config(format!("sub-chain state {k} out of range")));
    }
    Ok(spectrum.vector(k - 1).to_vec())
}

/// Builds the reference vector in the basis of `model` at `positions`.
pub fn reference_state(model: &ExcitonModel, positions: &[f64], reference: &Reference) -> Result<DVector<f64>> {
    match reference {
        Reference::Eigenstate { geometry, k } => eigenvector(model, geometry, *k),
        Reference::Suppressed { geometry, k, atoms } => {
            let mut v = eigenvector(model, geometry, *k)?;
            let atoms = to_zero_based(atoms);
            for (idx, tuple) in model.basis().states().iter().enumerate() {
                if tuple.iter().any(|a| atoms.contains(a)) {
                    v[idx] = 0.0;
                }
            }
            let norm = v.norm();
            if norm == 0.0 {
                return Err(Error::Config("suppressed reference state vanishes".into()));
            }
            Ok(v / norm)
        }
        Reference::Product { a, k_a, b, k_b } => {
            let partition = Partition::new(to_zero_based(a), to_zero_based(b), model.n_atoms())?;
            let phi_a = sub_chain_state(model.interaction(), positions, partition.a(), *k_a)?;
            let phi_b = sub_chain_state(model.interaction(), positions, partition.b(), *k_b)?;
            tensor_embed(&phi_a, &phi_b, &partition, model.basis())
        }
    }
}

/// Picks the 0-based eigenstate of `model` at `positions` that maximizes the
/// fidelity to `reference`. Returns `(index, fidelity)`.
pub fn best_match(model: &ExcitonModel, positions: &[f64], reference: &DVector<f64>) -> Result<(usize, f64)> {
    let spectrum = diagonalize(&model.hamiltonian(positions)?)?;
    let mut best = (0, -1.0);
    for k in 0..spectrum.dim() {
        let overlap: f64 = spectrum.vector(k).iter().zip(reference.iter()).map(|(x, y)| x * y).sum();
        let fidelity = overlap * overlap;
        if fidelity > best.1 + 1e-12 {
            best = (k, fidelity);
        }
    }
    Ok(best)
}

impl ScenarioSpec {
    /// Fills in a default configuration with this scenario's geometry, mode
    /// and initial surface.
    pub fn resolve(&self) -> Result<ResolvedScenario> {
        let positions = self.geometry.positions();
        let mut config = AggregateConfig {
            n_atoms: positions.len(),
            n_excitations: self.q,
            positions_um: positions.clone(),
            mode: self.mode,
            t_final_us: self.t_final_us,
            ..AggregateConfig::default()
        };
        let model = config.model()?;
        let (surface, reference_fidelity) = match &self.rule {
            SurfaceRule::Index(k) => (*k, None),
            SurfaceRule::MaxFidelity { reference } => {
                let target = reference_state(&model, &positions, reference)?;
                let (k, f) = best_match(&model, &positions, &target)?;
                (k + 1, Some(f))
            }
        };
        config.initial_surface = surface;
        config.validate()?;
        let partition = match &self.partition {
            Some((a, b)) => Some(Partition::new(to_zero_based(a), to_zero_based(b), positions.len())?),
            None => None,
        };
        Ok(ResolvedScenario {
            name: self.name.to_string(),
            config,
            static_only: self.static_only,
            partition,
            reference_fidelity,
        })
    }
}

/// Resolves a built-in scenario by name.
pub fn resolve_scenario(name: &str) -> Result<ResolvedScenario> {
    scenario(name)?.resolve()
}

/// Resolves a configuration file; the partition defaults to splitting off
/// the last two atoms.
pub fn resolve_config(text: &str) -> Result<ResolvedScenario> {
    let config = AggregateConfig::from_toml(text)?;
    let partition = if config.n_atoms > 2 {
        Some(Partition::split_at(config.n_atoms - 2, config.n_atoms)?)
    } else {
        None
    };
    Ok(ResolvedScenario {
        name: "config".into(),
        config,
        static_only: false,
        partition,
        reference_fidelity: None,
    })
}
