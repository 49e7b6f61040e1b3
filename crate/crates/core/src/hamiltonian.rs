//! Electronic Hamiltonian of a 1D Rydberg chain and its geometry gradient.
//!
//! Off-diagonal elements connect product states that differ by moving one
//! p-excitation from atom `x` to atom `y`, with amplitude `C3 / R_xy^3`. For
//! two excitations this is exactly the sum of the four Kronecker-delta terms
//! of the bi-exciton coupling; for one excitation it is the plain hopping
//! matrix.
//!
//! The diagonal is the van der Waals shift `-sum_{l<k} C6 / R_lk^6`, equal on
//! every basis state. The ordered-pair sum with a factor one half counts each
//! pair twice, so it equals the unordered sum used here.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{ExcitationBasis, Hop};
use crate::error::{invalid, Error, Result};
use crate::units::mhz_to_internal;

/// Dispersion coefficients in internal units (rad/us um^3 and rad/us um^6).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub c3: f64,
    pub c6: f64,
}

impl Interaction {
    pub fn from_mhz(c3_mhz_um3: f64, c6_mhz_um6: f64) -> Self {
        Self {
            c3: mhz_to_internal(c3_mhz_um3),
            c6: mhz_to_internal(c6_mhz_um6),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectronicHamiltonian {
    pub matrix: DMatrix<f64>,
    pub geometry: Vec<f64>,
}

impl ElectronicHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// A basis together with its coupling structure, reused for every geometry
/// along a trajectory.
#[derive(Debug, Clone)]
pub struct ExcitonModel {
    basis: ExcitationBasis,
    interaction: Interaction,
    hops: Vec<Hop>,
}

impl ExcitonModel {
    pub fn new(basis: ExcitationBasis, interaction: Interaction) -> Self {
        let hops = basis.hops();
        Self {
            basis,
            interaction,
            hops,
        }
    }

    pub fn basis(&self) -> &ExcitationBasis {
        &self.basis
    }

    pub fn interaction(&self) -> Interaction {
        self.interaction
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn n_atoms(&self) -> usize {
        self.basis.n_atoms()
    }

    pub fn check_geometry(&self, positions: &[f64]) -> Result<()> {
        check_geometry(positions, self.n_atoms())
    }

    /// State-independent van der Waals shift.
    pub fn vdw_shift(&self, positions: &[f64]) -> f64 {
        let mut shift = 0.0;
        for l in 0..positions.len() {
            for k in l + 1..positions.len() {
                let r = (positions[l] - positions[k]).abs();
                shift -= self.interaction.c6 / r.powi(6);
            }
        }
        shift
    }

    pub fn hamiltonian(&self, positions: &[f64]) -> Result<ElectronicHamiltonian> {
        self.check_geometry(positions)?;
        let n = self.dim();
        let mut matrix = DMatrix::from_diagonal_element(n, n, self.vdw_shift(positions));
        let c3 = self.interaction.c3;
        for hop in &self.hops {
            let r = (positions[hop.from] - positions[hop.to]).abs();
            let v = c3 / (r * r * r);
            matrix[(hop.i, hop.j)] += v;
            matrix[(hop.j, hop.i)] += v;
        }
        Ok(ElectronicHamiltonian {
            matrix,
            geometry: positions.to_vec(),
        })
    }

    /// Entrywise derivative of the Hamiltonian with respect to the coordinate
    /// of `atom`.
    pub fn gradient(&self, positions: &[f64], atom: usize) -> Result<DMatrix<f64>> {
        self.check_geometry(positions)?;
        if atom >= self.n_atoms() {
            return Err(invalid(format!(
                "atom index {} out of range for {} atoms",
                atom + 1,
                self.n_atoms()
            )));
        }
        let n = self.dim();
        let mut diag = 0.0;
        for k in 0..positions.len() {
            if k != atom {
                diag += self.vdw_derivative(positions[atom] - positions[k]);
            }
        }
        let mut matrix = DMatrix::from_diagonal_element(n, n, diag);
        for hop in &self.hops {
            let dv = if hop.from == atom {
                self.dipole_derivative(positions[hop.from] - positions[hop.to])
            } else if hop.to == atom {
                -self.dipole_derivative(positions[hop.from] - positions[hop.to])
            } else {
                continue;
            };
            matrix[(hop.i, hop.j)] += dv;
            matrix[(hop.j, hop.i)] += dv;
        }
        Ok(matrix)
    }

    /// `<u| dH/dr_a |w>` for every atom `a`, without forming the gradient
    /// matrices. Geometry must already be validated.
    pub fn gradient_element(&self, positions: &[f64], u: &[f64], w: &[f64]) -> Vec<f64> {
        let n_atoms = self.n_atoms();
        let mut out = vec![0.0; n_atoms];
        let overlap: f64 = u.iter().zip(w).map(|(a, b)| a * b).sum();
        if overlap != 0.0 {
            for l in 0..n_atoms {
                for k in l + 1..n_atoms {
                    let d = self.vdw_derivative(positions[l] - positions[k]) * overlap;
                    out[l] += d;
                    out[k] -= d;
                }
            }
        }
        for hop in &self.hops {
            let weight = u[hop.i] * w[hop.j] + u[hop.j] * w[hop.i];
            if weight == 0.0 {
                continue;
            }
            let d = self.dipole_derivative(positions[hop.from] - positions[hop.to]) * weight;
            out[hop.from] += d;
            out[hop.to] -= d;
        }
        out
    }

    /// d/dx (C3 / |x|^3)
    fn dipole_derivative(&self, x: f64) -> f64 {
        let r = x.abs();
        -3.0 * self.interaction.c3 * x.signum() / (r * r * r * r)
    }

    /// d/dx (-C6 / |x|^6)
    fn vdw_derivative(&self, x: f64) -> f64 {
        let r = x.abs();
        6.0 * self.interaction.c6 * x.signum() / r.powi(7)
    }
}

pub(crate) fn check_geometry(positions: &[f64], n_atoms: usize) -> Result<()> {
    if positions.len() != n_atoms {
        return Err(invalid(format!(
            "expected {} positions, got {}",
            n_atoms,
            positions.len()
        )));
    }
    if let Some(i) = positions.iter().position(|x| !x.is_finite()) {
        return Err(invalid(format!("position of atom {} is not finite", i + 1)));
    }
    for l in 0..n_atoms {
        for k in l + 1..n_atoms {
            if positions[l] == positions[k] {
                return Err(Error::SingularGeometry(l + 1, k + 1));
            }
        }
    }
    Ok(())
}

/// Hamiltonian for `basis` at `positions`, with coefficients already in
/// internal units.
pub fn build_hamiltonian(
    basis: &ExcitationBasis,
    positions: &[f64],
    c3: f64,
    c6: f64,
) -> Result<ElectronicHamiltonian> {
    ExcitonModel::new(basis.clone(), Interaction { c3, c6 }).hamiltonian(positions)
}

pub fn hamiltonian_gradient(
    basis: &ExcitationBasis,
    positions: &[f64],
    c3: f64,
    c6: f64,
    atom: usize,
) -> Result<DMatrix<f64>> {
    ExcitonModel::new(basis.clone(), Interaction { c3, c6 }).gradient(positions, atom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::mhz_to_internal;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn paper_constants() -> (f64, f64) {
        (mhz_to_internal(976.0), mhz_to_internal(-5400.0))
    }

    #[test]
    fn dimer_coupling() {
        let b = ExcitationBasis::new(2, 1).unwrap();
        let (c3, _) = paper_constants();
        let h = build_hamiltonian(&b, &[0.0, 5.0], c3, 0.0).unwrap();
        let expected = TAU * 976.0 / 125.0;
        assert!((h.matrix[(0, 1)] - expected).abs() < 1e-12);
        assert!((expected - 49.06).abs() < 0.01);
        assert_eq!(h.matrix[(0, 0)], 0.0);
    }

    #[test]
    fn biexciton_coupling_rules() {
        let b = ExcitationBasis::new(5, 2).unwrap();
        let pos = [0.0, 5.0, 10.0, 15.0, 20.0];
        let c3 = 1.0;
        let h = build_hamiltonian(&b, &pos, c3, 0.0).unwrap();
        let i12 = b.index_of(&[0, 1]).unwrap();
        let i23 = b.index_of(&[1, 2]).unwrap();
        let i34 = b.index_of(&[2, 3]).unwrap();
        // |1,2> -> |2,3> moves the excitation from atom 1 to atom 3
        assert!((h.matrix[(i12, i23)] - 1.0 / 1000.0).abs() < 1e-15);
        assert_eq!(h.matrix[(i12, i34)], 0.0);
    }

    #[test]
    fn vdw_diagonal_sign() {
        let b = ExcitationBasis::new(3, 1).unwrap();
        let pos = [0.0, 2.0, 5.0];
        let c6 = 7.0;
        let h = build_hamiltonian(&b, &pos, 0.0, c6).unwrap();
        let expected = -(c6 / 2f64.powi(6) + c6 / 5f64.powi(6) + c6 / 3f64.powi(6));
        for i in 0..3 {
            assert!((h.matrix[(i, i)] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn coincident_atoms_rejected() {
        let b = ExcitationBasis::new(3, 1).unwrap();
        let err = build_hamiltonian(&b, &[0.0, 1.0, 1.0], 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::SingularGeometry(2, 3)));
        assert!(hamiltonian_gradient(&b, &[0.0, 1.0, 1.0], 1.0, 1.0, 0).is_err());
        assert!(hamiltonian_gradient(&b, &[0.0, 1.0, 2.0], 1.0, 1.0, 3).is_err());
    }

    #[test]
    fn dimer_gradient_matches_finite_difference() {
        let b = ExcitationBasis::new(2, 1).unwrap();
        let (c3, c6) = paper_constants();
        let pos = [0.0, 5.0];
        let step = 1e-6;
        for atom in 0..2 {
            let g = hamiltonian_gradient(&b, &pos, c3, c6, atom).unwrap();
            let mut plus = pos;
            let mut minus = pos;
            plus[atom] += step;
            minus[atom] -= step;
            let hp = build_hamiltonian(&b, &plus, c3, c6).unwrap().matrix;
            let hm = build_hamiltonian(&b, &minus, c3, c6).unwrap().matrix;
            let fd = (hp - hm) / (2.0 * step);
            for (a, e) in g.iter().zip(fd.iter()) {
                assert!((a - e).abs() <= 1e-6 * e.abs().max(1e-3), "{a} vs {e}");
            }
        }
    }

    #[test]
    fn uncoupled_entries_have_zero_gradient() {
        let b = ExcitationBasis::new(5, 2).unwrap();
        let pos = [0.0, 4.0, 9.5, 15.0, 17.5];
        let i12 = b.index_of(&[0, 1]).unwrap();
        let i34 = b.index_of(&[2, 3]).unwrap();
        for atom in 0..5 {
            let g = hamiltonian_gradient(&b, &pos, 3.0, 2.0, atom).unwrap();
            assert_eq!(g[(i12, i34)], 0.0);
        }
    }

    #[test]
    fn biexciton_sub_block_reproduces_single_exciton_hamiltonian() {
        // states |k, 5> with k in 1..4 hop among atoms 1..4 like a q = 1 chain
        let b2 = ExcitationBasis::new(5, 2).unwrap();
        let b1 = ExcitationBasis::new(4, 1).unwrap();
        let pos = [0.0, 4.0, 9.5, 15.0, 17.5];
        let h2 = build_hamiltonian(&b2, &pos, 3.0, 0.0).unwrap().matrix;
        let h1 = build_hamiltonian(&b1, &pos[..4], 3.0, 0.0).unwrap().matrix;
        let idx: Vec<usize> = (0..4).map(|k| b2.index_of(&[k, 4]).unwrap()).collect();
        for r in 0..4 {
            for c in 0..4 {
                assert!((h2[(idx[r], idx[c])] - h1[(r, c)]).abs() < 1e-15);
            }
        }
    }

    fn random_chain(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(1.0f64..6.0, n - 1).prop_map(|gaps| {
            let mut pos = vec![0.0];
            for g in gaps {
                let last = *pos.last().unwrap();
                pos.push(last + g);
            }
            pos
        })
    }

    proptest! {
        #[test]
        fn symmetric_with_constant_diagonal(pos in random_chain(5)) {
            let b = ExcitationBasis::new(5, 2).unwrap();
            let (c3, c6) = paper_constants();
            let h = build_hamiltonian(&b, &pos, c3, c6).unwrap().matrix;
            prop_assert_eq!(&h, &h.transpose());
            for i in 1..h.nrows() {
                prop_assert_eq!(h[(i, i)], h[(0, 0)]);
            }
        }

        #[test]
        fn gradient_is_translation_invariant(pos in random_chain(5)) {
            let b = ExcitationBasis::new(5, 2).unwrap();
            let (c3, c6) = paper_constants();
            let mut total = DMatrix::zeros(b.len(), b.len());
            let mut scale = 0.0f64;
            for a in 0..5 {
                let g = hamiltonian_gradient(&b, &pos, c3, c6, a).unwrap();
                scale = scale.max(g.amax());
                total += g;
            }
            prop_assert!(total.amax() <= 1e-12 * scale);
        }

        #[test]
        fn gradient_element_matches_matrix(pos in random_chain(4), seed in 0u64..1000) {
            let b = ExcitationBasis::new(4, 2).unwrap();
            let model = ExcitonModel::new(b, Interaction { c3: 3.0, c6: -2.0 });
            let n = model.dim();
            let u: Vec<f64> = (0..n).map(|i| ((i as u64 * 7 + seed) % 11) as f64 - 5.0).collect();
            let w: Vec<f64> = (0..n).map(|i| ((i as u64 * 3 + seed) % 5) as f64 - 2.0).collect();
            let fast = model.gradient_element(&pos, &u, &w);
            for a in 0..4 {
                let g = model.gradient(&pos, a).unwrap();
                let mut slow = 0.0;
                for r in 0..n { for c in 0..n { slow += u[r] * g[(r, c)] * w[c]; } }
                prop_assert!((fast[a] - slow).abs() <= 1e-10 * (1.0 + slow.abs()));
            }
        }
    }
}
