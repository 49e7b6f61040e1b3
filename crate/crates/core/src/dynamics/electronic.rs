//! Electronic amplitudes in the diabatic product basis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Norm drift above which the amplitudes are renormalized.
pub const RENORM_TOLERANCE: f64 = 1e-10;

/// `-i H c` for a symmetric `h` stored column-major in `h` (`n * n`).
fn derivative(h: &[f64], c: &[Complex64], out: &mut [Complex64]) {
    let n = c.len();
    for (r, o) in out.iter_mut().enumerate() {
        // row r of a symmetric matrix is its column r, which is contiguous
        let row = &h[r * n..(r + 1) * n];
        let (mut re, mut im) = (0.0, 0.0);
        for (hk, ck) in row.iter().zip(c) {
            re += hk * ck.re;
            im += hk * ck.im;
        }
        *o = Complex64::new(im, -re);
    }
}

/// `out = a + s * b`
fn axpy(a: &[Complex64], s: f64, b: &[Complex64], out: &mut [Complex64]) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = x + y * s;
    }
}

/// Advances `coeffs` over one nuclear step of length `dt` with `n_sub`
/// fourth-order Runge-Kutta substeps. The Hamiltonian is interpolated
/// linearly between `h_start` and `h_end`.
///
/// Returns `true` when the norm drifted by more than [`RENORM_TOLERANCE`] and
/// was restored.
pub fn step_electronic(
    coeffs: &mut DVector<Complex64>,
    h_start: &DMatrix<f64>,
    h_end: &DMatrix<f64>,
    dt: f64,
    n_sub: usize,
) -> bool {
    let n = coeffs.len();
    let h_sub = dt / n_sub as f64;
    let (h0, h1) = (h_start.as_slice(), h_end.as_slice());
    let interpolate = |frac: f64, out: &mut Vec<f64>| {
        out.clear();
        out.extend(h0.iter().zip(h1).map(|(a, b)| a + (b - a) * frac));
    };
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut h_lo = h0.to_vec();
    let mut h_mid = Vec::with_capacity(n * n);
    let mut h_hi = Vec::with_capacity(n * n);
    let c = coeffs.as_mut_slice();
    for s in 0..n_sub {
        interpolate((s as f64 + 0.5) / n_sub as f64, &mut h_mid);
        interpolate((s + 1) as f64 / n_sub as f64, &mut h_hi);
        derivative(&h_lo, c, &mut k1);
        axpy(c, 0.5 * h_sub, &k1, &mut tmp);
        derivative(&h_mid, &tmp, &mut k2);
        axpy(c, 0.5 * h_sub, &k2, &mut tmp);
        derivative(&h_mid, &tmp, &mut k3);
        axpy(c, h_sub, &k3, &mut tmp);
        derivative(&h_hi, &tmp, &mut k4);
        for i in 0..n {
            c[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h_sub / 6.0);
        }
        std::mem::swap(&mut h_lo, &mut h_hi);
    }
    let norm = coeffs.norm();
    if (norm - 1.0).abs() > RENORM_TOLERANCE {
        *coeffs /= Complex64::new(norm, 0.0);
        log::trace!("renormalized electronic amplitudes (norm was {norm})");
        true
    } else {
        false
    }
}

/// Adiabatic amplitudes `<zeta_k|Psi>` for every column of `vectors`.
pub fn adiabatic_amplitudes(vectors: &DMatrix<f64>, coeffs: &DVector<Complex64>) -> DVector<Complex64> {
    let n = coeffs.len();
    DVector::from_fn(n, |k, _| {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..n {
            acc += coeffs[r] * vectors[(r, k)];
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rabi_oscillation_in_frozen_dimer() {
        // |sp> <-> |ps> with coupling J: P_sp(t) = cos^2(J t), period pi / J
        let j = 49.06;
        let h = DMatrix::from_row_slice(2, 2, &[0.0, j, j, 0.0]);
        let mut c = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let dt = 1e-4;
        let mut t = 0.0;
        for _ in 0..(0.5 * PI / j / dt).round() as usize * 2 {
            step_electronic(&mut c, &h, &h, dt, 10);
            t += dt;
            let expected = (j * t).cos().powi(2);
            assert!((c[0].norm_sqr() - expected).abs() < 1e-8);
        }
        // after one full period pi / J the population is back on |sp>
        assert!((t - PI / j).abs() < dt);
    }

    #[test]
    fn eigenstate_is_stationary_and_norm_kept() {
        let h = DMatrix::from_row_slice(3, 3, &[1.0, 40.0, 5.0, 40.0, -2.0, 30.0, 5.0, 30.0, 0.5]);
        let eig = nalgebra::SymmetricEigen::new(h.clone());
        let v = eig.eigenvectors.column(1);
        let mut c = v.map(|x| Complex64::new(x, 0.0));
        let mut renorms = 0;
        for _ in 0..10_000 {
            renorms += step_electronic(&mut c, &h, &h, 1e-4, 10) as usize;
        }
        let pops = adiabatic_amplitudes(&eig.eigenvectors, &c).map(|z| z.norm_sqr());
        assert!((pops[1] - 1.0).abs() < 1e-8);
        assert!((c.norm() - 1.0).abs() < 1e-8);
        assert_eq!(renorms, 0);
    }
}
