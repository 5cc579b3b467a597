//! Green's functions of the wall-normal elliptic operators.
//!
//! `green_k` is the kernel of `(-k^2 + d2/dy2)^{-1}` with homogeneous
//! Dirichlet conditions on [-1, 1]; `green_zero` the `k = 0` counterpart for
//! `d2/dy2`. Large |k| evaluations go through scaled exponentials so that no
//! intermediate sinh overflows; the crossover sits at |k| = 30 and the two
//! branches are unit-tested against each other there.

use crate::error::CoreError;

const SCALED_BRANCH_CUTOFF: f64 = 30.0;

/// `G_k(y, y')` for `k != 0`.
pub fn green_k(k: i64, y: f64, yp: f64) -> Result<f64, CoreError> {
    if k == 0 {
        return Err(CoreError::ZeroWavenumber);
    }
    let kappa = k.unsigned_abs() as f64;
    Ok(green_kappa(kappa, y, yp))
}

#[inline]
fn green_kappa(kappa: f64, y: f64, yp: f64) -> f64 {
    let (lo, hi) = if y <= yp { (y, yp) } else { (yp, y) };
    let a = kappa * (1.0 - hi);
    let b = kappa * (1.0 + lo);
    if kappa <= SCALED_BRANCH_CUTOFF {
        -a.sinh() * b.sinh() / (kappa * (2.0 * kappa).sinh())
    } else {
        // sinh(a) sinh(b) / sinh(2k) = e^{a+b-2k} (1-e^{-2a})(1-e^{-2b}) / (2 (1-e^{-4k}))
        let expo = (a + b - 2.0 * kappa).exp();
        let num = (1.0 - (-2.0 * a).exp()) * (1.0 - (-2.0 * b).exp());
        let den = 2.0 * (1.0 - (-4.0 * kappa).exp());
        -expo * num / (den * kappa)
    }
}

/// Diagonal value `G_k(y, y)`.
pub fn green_k_diag(k: i64, y: f64) -> Result<f64, CoreError> {
    green_k(k, y, y)
}

/// Green's function of `d2/dy2` with Dirichlet conditions; used for the
/// `k = 0` stream correction.
pub fn green_zero(y: f64, yp: f64) -> f64 {
    let (lo, hi) = if y <= yp { (y, yp) } else { (yp, y) };
    (1.0 + lo) * (hi - 1.0) / 2.0
}

/// Commutator kernel `H_k(y, y') = -sinh(k(y+y'))/sinh(2k)`, evaluated with
/// `|k|`; bounded by 1 in magnitude on the square.
pub fn commutator_kernel(k: i64, y: f64, yp: f64) -> Result<f64, CoreError> {
    if k == 0 {
        return Err(CoreError::ZeroWavenumber);
    }
    let kappa = k.unsigned_abs() as f64;
    let zeta = y + yp;
    if kappa <= SCALED_BRANCH_CUTOFF {
        Ok(-(kappa * zeta).sinh() / (2.0 * kappa).sinh())
    } else {
        let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
        let az = zeta.abs();
        let expo = (kappa * (az - 2.0)).exp();
        let num = 1.0 - (-2.0 * kappa * az).exp();
        let den = 1.0 - (-4.0 * kappa).exp();
        Ok(-sign * expo * num / den)
    }
}
