//! Exciton spectra: Born-Oppenheimer energies with gauge-fixed eigenvectors.

use std::cmp::Ordering;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Result};
use crate::hamiltonian::ElectronicHamiltonian;

/// Eigen-decomposition of an electronic Hamiltonian at one geometry.
///
/// `energies` are ascending and column `k` of `vectors` belongs to
/// `energies[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitonSpectrum {
    pub energies: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub geometry: Vec<f64>,
}

impl ExcitonSpectrum {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Eigenvector `k` as a contiguous slice.
    pub fn vector(&self, k: usize) -> &[f64] {
        let n = self.dim();
        &self.vectors.as_slice()[k * n..(k + 1) * n]
    }

    fn vector_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.dim();
        &mut self.vectors.as_mut_slice()[k * n..(k + 1) * n]
    }

    /// Reflection parity of eigenvector `k`: `(+1 | -1, residual)`, where the
    /// residual is `max_i |v[i] - parity * v[mirror[i]]|` and `mirror` is a
    /// basis permutation such as [`ExcitationBasis::reflection`].
    ///
    /// [`ExcitationBasis::reflection`]: crate::basis::ExcitationBasis::reflection
    pub fn parity(&self, k: usize, mirror: &[usize]) -> (f64, f64) {
        let v = self.vector(k);
        let residual = |sign: f64| {
            v.iter()
                .zip(mirror)
                .fold(0.0f64, |m, (x, &j)| m.max((x - sign * v[j]).abs()))
        };
        let (even, odd) = (residual(1.0), residual(-1.0));
        if even <= odd {
            (1.0, even)
        } else {
            (-1.0, odd)
        }
    }

    /// Largest `|H v_k - E_k v_k|` over all `k`.
    pub fn max_residual(&self, h: &DMatrix<f64>) -> f64 {
        (0..self.dim())
            .map(|k| {
                let v = self.vectors.column(k);
                (h * v - v * self.energies[k]).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|V^T V - 1|`.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.dim();
        let gram = self.vectors.transpose() * &self.vectors;
        (gram - DMatrix::<f64>::identity(n, n)).amax()
    }
}

/// Index of the largest-magnitude component; the first one wins ties.
fn dominant_index(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() * (1.0 + 1e-9) {
            best = i;
        }
    }
    best
}

/// Dense symmetric diagonalization with ascending energies and the sign of
/// every eigenvector fixed so that its largest entry is positive.
pub fn diagonalize(h: &ElectronicHamiltonian) -> Result<ExcitonSpectrum> {
    let m = &h.matrix;
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(invalid(format!(
            "Hamiltonian must be square and non-empty, got {}x{}",
            n,
            m.ncols()
        )));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in i + 1..n {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(invalid(format!(
                    "Hamiltonian is not symmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }

    let eig = SymmetricEigen::new(m.clone());
    let tol = 1e-10 * scale;
    let dominant: Vec<usize> = (0..n)
        .map(|k| dominant_index(eig.eigenvectors.column(k).as_slice()))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        if (ea - eb).abs() <= tol {
            dominant[a].cmp(&dominant[b])
        } else {
            ea.partial_cmp(&eb).unwrap_or(Ordering::Equal)
        }
    });

    let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    let mut spectrum = ExcitonSpectrum {
        energies,
        vectors,
        geometry: h.geometry.clone(),
    };
    for k in 0..n {
        let v = spectrum.vector_mut(k);
        if v[dominant_index(v)] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(spectrum)
}

/// Outcome of aligning a spectrum with its predecessor on a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeReport {
    /// Smallest `|<previous_k|current_k>|` after alignment.
    pub min_overlap: f64,
    /// Set when some state lost its identity between the two geometries,
    /// i.e. its diagonal overlap fell below one half.
    pub near_degenerate: bool,
}

/// Flips the sign of every eigenvector whose overlap with the same-index
/// eigenvector of `previous` is negative. Energy ordering is untouched.
pub fn align_gauge(
    mut current: ExcitonSpectrum,
    previous: &ExcitonSpectrum,
) -> Result<(ExcitonSpectrum, GaugeReport)> {
    let n = current.dim();
    if previous.dim() != n {
        return Err(invalid(format!(
            "cannot align spectra of dimension {} and {}",
            n,
            previous.dim()
        )));
    }
    let mut min_overlap = f64::INFINITY;
    for k in 0..n {
        let overlap: f64 = current
            .vector(k)
            .iter()
            .zip(previous.vector(k))
            .map(|(a, b)| a * b)
            .sum();
        if overlap < 0.0 {
            current.vector_mut(k).iter_mut().for_each(|x| *x = -*x);
        }
        min_overlap = min_overlap.min(overlap.abs());
    }
    Ok((
        current,
        GaugeReport {
            min_overlap,
            near_degenerate: min_overlap < 0.5,
        },
    ))
}
