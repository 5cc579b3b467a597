//! Wall-normal Poisson solves and the Biot-Savart reconstruction.
//!
//! In the sine basis the operator `Delta_k = -k^2 + d2/dy2` with Dirichlet
//! conditions is diagonal with eigenvalues `-(k^2 + mu_n^2)`, so the inverse
//! is a division. `k = 0` is allowed: the eigenvalues stay negative.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::field::{SpectralField, YRepr};
use crate::grid::{mode_lambda, mode_mu};

/// Solve `Delta_k phi = omega`, `phi(+-1) = 0`, in sine coefficients.
pub fn poisson_solve(omega: &[Complex64], k: i64) -> Vec<Complex64> {
    let k2 = (k * k) as f64;
    omega
        .iter()
        .enumerate()
        .map(|(m, c)| -c / (k2 + mode_lambda(m)))
        .collect()
}

/// Apply `Delta_k` in sine coefficients (the inverse check of `poisson_solve`).
pub fn apply_delta_k(phi: &[Complex64], k: i64) -> Vec<Complex64> {
    let k2 = (k * k) as f64;
    phi.iter()
        .enumerate()
        .map(|(m, c)| -c * (k2 + mode_lambda(m)))
        .collect()
}

/// Velocity from vorticity: `u = (d_y phi, -d_x phi)` with `Delta phi = omega`.
///
/// `u1` carries cosine content (it does not vanish on the walls); `u2` stays
/// in the sine basis, so the no-penetration condition `u2(+-1) = 0` is exact.
pub fn biot_savart(omega: &SpectralField) -> Result<(SpectralField, SpectralField), CoreError> {
    omega.expect_repr(YRepr::Sine)?;
    let k_max = omega.k_max();
    let n_y = omega.n_y();
    let mut u1 = SpectralField::zeros(k_max, n_y);
    u1.set_repr(YRepr::Cosine);
    let mut u2 = SpectralField::zeros(k_max, n_y);
    for (k, w) in omega.iter() {
        let phi = poisson_solve(w, k);
        let ik = Complex64::new(0.0, k as f64);
        let u1k = u1.mode_mut(k);
        for (m, p) in phi.iter().enumerate() {
            u1k[m] = p * mode_mu(m);
        }
        let u2k = u2.mode_mut(k);
        for (m, p) in phi.iter().enumerate() {
            u2k[m] = -ik * p;
        }
    }
    Ok((u1, u2))
}
