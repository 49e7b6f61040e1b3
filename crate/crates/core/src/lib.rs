//! Multi-exciton dynamics in flexible Rydberg aggregates.
//!
//! Chains of Rydberg atoms sharing one or two p-excitations through resonant
//! dipole-dipole hopping. The crate builds the exciton Hamiltonians, their
//! Born-Oppenheimer surfaces and bi-exciton decompositions, and propagates
//! ensembles of quantum-classical trajectories with fewest-switches surface
//! hopping.

pub mod app;
pub mod basis;
pub mod check;
pub mod config;
pub mod decompose;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod hamiltonian;
pub mod spectra;
pub mod scenarios;
pub mod units;

pub use basis::ExcitationBasis;
pub use config::{AggregateConfig, Mode};
pub use error::{Error, Result};
pub use hamiltonian::{ElectronicHamiltonian, ExcitonModel, Interaction};
pub use spectra::{diagonalize, ExcitonSpectrum};
