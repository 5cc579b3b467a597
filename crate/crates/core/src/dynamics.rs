//! Time integration of the linearized per-mode system and the full
//! nonlinear perturbation system.
//!
//! The stiff diffusion `nu Delta_k` is diagonal in the sine basis and is
//! advanced by its exact exponential through an integrating-factor RK4; the
//! transport, stream-feedback, and nonlinear terms are treated explicitly.
//! The background shear is advanced by the exact heat semigroup at the stage
//! times, so no splitting error enters through U(t).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::CoreError;
use crate::field::{SpectralField, YRepr};
use crate::grid::{mode_lambda, ChannelGrid, SineBasis};
use crate::poisson::poisson_solve;
use crate::shear::ShearProfile;

/// RK4 stability radius on the imaginary axis, with a safety margin.
const ADVECTIVE_STABILITY: f64 = 2.5;

/// State of one linearized x-mode.
#[derive(Debug, Clone)]
pub struct LinearModeState {
    pub k: i64,
    pub t: f64,
    pub nu: f64,
    pub omega: Vec<Complex64>,
    pub profile: ShearProfile,
}

impl LinearModeState {
    pub fn new(k: i64, omega: Vec<Complex64>, profile: ShearProfile) -> Result<Self, CoreError> {
        if k == 0 {
            return Err(CoreError::ZeroWavenumber);
        }
        let nu = profile.nu();
        Ok(Self {
            k,
            t: 0.0,
            nu,
            omega,
            profile,
        })
    }
}

/// Shared machinery for one grid: transform tables and truncation.
pub struct LinearSolver {
    grid: ChannelGrid,
    basis: SineBasis,
    cutoff: usize,
    /// verification hook: drop the `ikU` and `ikU''` terms, leaving pure
    /// diffusion
    pub disable_transport: bool,
}

impl LinearSolver {
    pub fn new(grid: ChannelGrid) -> Self {
        let basis = SineBasis::for_grid(&grid);
        let cutoff = grid.y_dealias_cutoff();
        Self {
            grid,
            basis,
            cutoff,
            disable_transport: false,
        }
    }

    pub fn grid(&self) -> &ChannelGrid {
        &self.grid
    }

    pub fn basis(&self) -> &SineBasis {
        &self.basis
    }

    fn truncate(&self, coeffs: &mut [Complex64]) {
        for c in coeffs.iter_mut().skip(self.cutoff) {
            *c = Complex64::ZERO;
        }
    }

    /// Explicit part of the right-hand side: `-ik U w + ik U'' phi`,
    /// multiplications on collocation values, projected back to the sine
    /// band. The diffusion term is handled by the integrating factor in
    /// `step`, but `rhs` returns the full right-hand side including it.
    pub fn rhs(&self, state: &LinearModeState) -> Result<Vec<Complex64>, CoreError> {
        let mut rhs = self.explicit_rhs(&state.omega, &state.profile, state.k)?;
        let k2 = (state.k * state.k) as f64;
        for (m, r) in rhs.iter_mut().enumerate() {
            *r -= state.nu * (k2 + mode_lambda(m)) * state.omega[m];
        }
        Ok(rhs)
    }

    fn explicit_rhs(
        &self,
        omega: &[Complex64],
        profile: &ShearProfile,
        k: i64,
    ) -> Result<Vec<Complex64>, CoreError> {
        if self.disable_transport {
            return Ok(vec![Complex64::ZERO; omega.len()]);
        }
        let ik = Complex64::new(0.0, k as f64);
        let w_values = self.basis.synthesize(omega)?;
        let phi = poisson_solve(omega, k);
        let phi_values = self.basis.synthesize(&phi)?;
        let u = profile.u_values();
        let upp = profile.u_double_prime();
        let prod: Vec<Complex64> = (0..omega.len())
            .map(|j| ik * (-u[j] * w_values[j] + upp[j] * phi_values[j]))
            .collect();
        let mut coeffs = self.basis.analyze(&prod)?;
        self.truncate(&mut coeffs);
        Ok(coeffs)
    }

    /// Advective stability bound on dt for this state.
    pub fn dt_bound(&self, state: &LinearModeState) -> f64 {
        let speed = state.k.unsigned_abs() as f64
            * (state.profile.u_max() + state.profile.u_double_prime_max());
        if speed <= 0.0 {
            f64::INFINITY
        } else {
            ADVECTIVE_STABILITY / speed
        }
    }

    /// One integrating-factor RK4 step. The profile advances by the exact
    /// heat semigroup at the stage times.
    pub fn step(&self, state: &LinearModeState, dt: f64) -> Result<LinearModeState, CoreError> {
        if dt < 0.0 {
            return Err(CoreError::NegativeDt(dt));
        }
        if dt == 0.0 {
            return Ok(state.clone());
        }
        let bound = self.dt_bound(state);
        if dt > bound {
            return Err(CoreError::CflViolation { dt, bound });
        }
        let n = state.omega.len();
        let k2 = (state.k * state.k) as f64;
        let e_half: Vec<f64> = (0..n)
            .map(|m| (-state.nu * (k2 + mode_lambda(m)) * dt / 2.0).exp())
            .collect();

        let p0 = &state.profile;
        let p_half = p0.heat_step(dt / 2.0, &self.basis, self.grid.y_nodes())?;
        let p_full = p0.heat_step(dt, &self.basis, self.grid.y_nodes())?;

        let n1 = self.explicit_rhs(&state.omega, p0, state.k)?;
        let u2 = combine(
            &state.omega,
            &n1,
            dt / 2.0,
            Some(&e_half),
            CombineOrder::SumThenScale,
        );
        let n2 = self.explicit_rhs(&u2, &p_half, state.k)?;
        let u3 = combine(
            &state.omega,
            &n2,
            dt / 2.0,
            Some(&e_half),
            CombineOrder::ScaleStateOnly,
        );
        let n3 = self.explicit_rhs(&u3, &p_half, state.k)?;
        let u4 = combine4(&state.omega, &n3, dt, &e_half);
        let n4 = self.explicit_rhs(&u4, &p_full, state.k)?;

        let mut omega = vec![Complex64::ZERO; n];
        for m in 0..n {
            let e1 = e_half[m];
            let e2 = e1 * e1;
            omega[m] =
                e2 * state.omega[m] + dt / 6.0 * (e2 * n1[m] + 2.0 * e1 * (n2[m] + n3[m]) + n4[m]);
        }

        Ok(LinearModeState {
            k: state.k,
            t: state.t + dt,
            nu: state.nu,
            omega,
            profile: p_full,
        })
    }
}

enum CombineOrder {
    /// E (w + a n)
    SumThenScale,
    /// E w + a n
    ScaleStateOnly,
}

fn combine(
    w: &[Complex64],
    nterm: &[Complex64],
    a: f64,
    e: Option<&[f64]>,
    order: CombineOrder,
) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; w.len()];
    for m in 0..w.len() {
        let f = e.map_or(1.0, |e| e[m]);
        out[m] = match order {
            CombineOrder::SumThenScale => f * (w[m] + a * nterm[m]),
            CombineOrder::ScaleStateOnly => f * w[m] + a * nterm[m],
        };
    }
    out
}

/// `E^2 w + dt E n`
fn combine4(w: &[Complex64], nterm: &[Complex64], dt: f64, e_half: &[f64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; w.len()];
    for m in 0..w.len() {
        let e1 = e_half[m];
        out[m] = e1 * e1 * w[m] + dt * e1 * nterm[m];
    }
    out
}

/// Full nonlinear perturbation state.
#[derive(Debug, Clone)]
pub struct NonlinearState {
    pub t: f64,
    pub nu: f64,
    pub omega: SpectralField,
    pub profile: ShearProfile,
}

impl NonlinearState {
    pub fn new(omega: SpectralField, profile: ShearProfile) -> Result<Self, CoreError> {
        omega.expect_repr(YRepr::Sine)?;
        let nu = profile.nu();
        Ok(Self {
            t: 0.0,
            nu,
            omega,
            profile,
        })
    }
}

/// Pseudo-spectral stepper for the nonlinear system: x-FFT products with the
/// symmetric 2/3 truncation, sine-basis products in y, integrating-factor
/// RK4 in time.
pub struct NonlinearSolver {
    grid: ChannelGrid,
    basis: SineBasis,
    cutoff_y: usize,
    k_max: i64,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl NonlinearSolver {
    pub fn new(grid: ChannelGrid) -> Self {
        let basis = SineBasis::for_grid(&grid);
        let cutoff_y = grid.y_dealias_cutoff();
        let k_max = grid.max_wavenumber();
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(grid.n_x());
        let fft_inv = planner.plan_fft_inverse(grid.n_x());
        Self {
            grid,
            basis,
            cutoff_y,
            k_max,
            fft_fwd,
            fft_inv,
        }
    }

    pub fn grid(&self) -> &ChannelGrid {
        &self.grid
    }

    pub fn basis(&self) -> &SineBasis {
        &self.basis
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    fn check_state(&self, state: &NonlinearState) -> Result<(), CoreError> {
        if state.omega.k_max() != self.k_max || state.omega.n_y() != self.grid.n_y() {
            return Err(CoreError::Mismatch(format!(
                "state shape ({}, {}) does not match solver grid ({}, {})",
                state.omega.k_max(),
                state.omega.n_y(),
                self.k_max,
                self.grid.n_y()
            )));
        }
        state.omega.expect_repr(YRepr::Sine)
    }

    fn truncate(&self, coeffs: &mut [Complex64]) {
        for c in coeffs.iter_mut().skip(self.cutoff_y) {
            *c = Complex64::ZERO;
        }
    }

    /// The advective nonlinearity `(u . grad omega)_k` for all retained
    /// modes, fully dealiased. The zero-frequency feedback of nonzero modes
    /// is the `k = 0` output row.
    pub fn convolution(&self, omega: &SpectralField) -> Result<SpectralField, CoreError> {
        omega.expect_repr(YRepr::Sine)?;
        let n_x = self.grid.n_x();
        let n_y = self.grid.n_y();
        let k_max = self.k_max;

        // per-mode node values of the four factors
        let mut u1 = vec![vec![Complex64::ZERO; n_y]; (2 * k_max + 1) as usize];
        let mut u2 = u1.clone();
        let mut wx = u1.clone();
        let mut wy = u1.clone();
        for (k, w) in omega.iter() {
            let idx = (k + k_max) as usize;
            let phi = poisson_solve(w, k);
            let ik = Complex64::new(0.0, k as f64);
            u1[idx] = self.basis.synthesize_derivative(&phi)?;
            let phi_vals = self.basis.synthesize(&phi)?;
            u2[idx] = phi_vals.iter().map(|p| -ik * p).collect();
            let w_vals = self.basis.synthesize(w)?;
            wx[idx] = w_vals.iter().map(|v| ik * v).collect();
            wy[idx] = self.basis.synthesize_derivative(w)?;
        }

        // row-by-row in y: gather modes, go to x space, multiply, return
        let mut out_modes = vec![vec![Complex64::ZERO; n_y]; (2 * k_max + 1) as usize];
        let mut row_u1 = vec![Complex64::ZERO; n_x];
        let mut row_u2 = vec![Complex64::ZERO; n_x];
        let mut row_wx = vec![Complex64::ZERO; n_x];
        let mut row_wy = vec![Complex64::ZERO; n_x];
        for j in 0..n_y {
            for row in [&mut row_u1, &mut row_u2, &mut row_wx, &mut row_wy] {
                row.iter_mut().for_each(|c| *c = Complex64::ZERO);
            }
            for k in -k_max..=k_max {
                let idx = (k + k_max) as usize;
                let bin = ((k + n_x as i64) % n_x as i64) as usize;
                row_u1[bin] = u1[idx][j];
                row_u2[bin] = u2[idx][j];
                row_wx[bin] = wx[idx][j];
                row_wy[bin] = wy[idx][j];
            }
            self.fft_inv.process(&mut row_u1);
            self.fft_inv.process(&mut row_u2);
            self.fft_inv.process(&mut row_wx);
            self.fft_inv.process(&mut row_wy);
            // pointwise transport term
            for i in 0..n_x {
                row_u1[i] = row_u1[i] * row_wx[i] + row_u2[i] * row_wy[i];
            }
            self.fft_fwd.process(&mut row_u1);
            let scale = 1.0 / n_x as f64;
            for k in -k_max..=k_max {
                let idx = (k + k_max) as usize;
                let bin = ((k + n_x as i64) % n_x as i64) as usize;
                out_modes[idx][j] = row_u1[bin] * scale;
            }
        }

        // back to sine coefficients with the y-direction truncation
        let mut out = SpectralField::zeros(k_max, n_y);
        for k in -k_max..=k_max {
            let idx = (k + k_max) as usize;
            let mut coeffs = self.basis.analyze(&out_modes[idx])?;
            self.truncate(&mut coeffs);
            out.mode_mut(k).copy_from_slice(&coeffs);
        }
        Ok(out)
    }

    /// Explicit right-hand side (everything except the diffusion handled by
    /// the integrating factor): `-ik U w_k + ik U'' phi_k - (u . grad w)_k`.
    fn explicit_rhs(
        &self,
        omega: &SpectralField,
        profile: &ShearProfile,
    ) -> Result<SpectralField, CoreError> {
        let conv = self.convolution(omega)?;
        let u = profile.u_values();
        let upp = profile.u_double_prime();
        let mut out = SpectralField::zeros(self.k_max, self.grid.n_y());
        for (k, w) in omega.iter() {
            let ik = Complex64::new(0.0, k as f64);
            let mut coeffs = if k == 0 {
                vec![Complex64::ZERO; self.grid.n_y()]
            } else {
                let w_values = self.basis.synthesize(w)?;
                let phi = poisson_solve(w, k);
                let phi_values = self.basis.synthesize(&phi)?;
                let prod: Vec<Complex64> = (0..w.len())
                    .map(|j| ik * (-u[j] * w_values[j] + upp[j] * phi_values[j]))
                    .collect();
                let mut c = self.basis.analyze(&prod)?;
                self.truncate(&mut c);
                c
            };
            for (m, c) in coeffs.iter_mut().enumerate() {
                *c -= conv.mode(k)[m];
            }
            out.mode_mut(k).copy_from_slice(&coeffs);
        }
        Ok(out)
    }

    /// Full right-hand side including diffusion (diagnostics; stepping uses
    /// the integrating factor instead).
    pub fn rhs(&self, state: &NonlinearState) -> Result<SpectralField, CoreError> {
        self.check_state(state)?;
        let mut rhs = self.explicit_rhs(&state.omega, &state.profile)?;
        for k in -self.k_max..=self.k_max {
            let k2 = (k * k) as f64;
            let src = state.omega.mode(k);
            let dst = rhs.mode_mut(k);
            for (m, r) in dst.iter_mut().enumerate() {
                *r -= state.nu * (k2 + mode_lambda(m)) * src[m];
            }
        }
        Ok(rhs)
    }

    /// Physical-space velocity maxima `(max |U + u1|, max |u2|)`.
    pub fn velocity_extrema(&self, state: &NonlinearState) -> Result<(f64, f64), CoreError> {
        self.check_state(state)?;
        let n_x = self.grid.n_x();
        let k_max = self.k_max;
        let mut max_u1 = 0.0_f64;
        let mut max_u2 = 0.0_f64;
        let mut u1 = vec![vec![Complex64::ZERO; self.grid.n_y()]; (2 * k_max + 1) as usize];
        let mut u2 = u1.clone();
        for (k, w) in state.omega.iter() {
            let idx = (k + k_max) as usize;
            let phi = poisson_solve(w, k);
            let ik = Complex64::new(0.0, k as f64);
            u1[idx] = self.basis.synthesize_derivative(&phi)?;
            u2[idx] = self
                .basis
                .synthesize(&phi)?
                .iter()
                .map(|p| -ik * p)
                .collect();
        }
        let mut row1 = vec![Complex64::ZERO; n_x];
        let mut row2 = vec![Complex64::ZERO; n_x];
        for j in 0..self.grid.n_y() {
            row1.iter_mut().for_each(|c| *c = Complex64::ZERO);
            row2.iter_mut().for_each(|c| *c = Complex64::ZERO);
            for k in -k_max..=k_max {
                let idx = (k + k_max) as usize;
                let bin = ((k + n_x as i64) % n_x as i64) as usize;
                row1[bin] = u1[idx][j];
                row2[bin] = u2[idx][j];
            }
            self.fft_inv.process(&mut row1);
            self.fft_inv.process(&mut row2);
            let base = state.profile.u_values()[j];
            for i in 0..n_x {
                max_u1 = max_u1.max((base + row1[i].re).abs());
                max_u2 = max_u2.max(row2[i].re.abs());
            }
        }
        Ok((max_u1, max_u2))
    }

    /// Advective CFL bound for the current state.
    pub fn dt_bound(&self, state: &NonlinearState) -> Result<f64, CoreError> {
        let (u1, u2) = self.velocity_extrema(state)?;
        let mut bound = f64::INFINITY;
        if u1 > 0.0 {
            bound = bound.min(self.grid.dx() / u1 * ADVECTIVE_STABILITY / 2.8);
        }
        if u2 > 0.0 {
            bound = bound.min(self.grid.spacing() / u2 * ADVECTIVE_STABILITY / 2.8);
        }
        // x-transport also acts mode-wise like |k U|
        let speed = self.k_max as f64 * (state.profile.u_max() + u1);
        if speed > 0.0 {
            bound = bound.min(ADVECTIVE_STABILITY / speed);
        }
        Ok(bound)
    }

    /// One integrating-factor RK4 step of the coupled system.
    pub fn step(&self, state: &NonlinearState, dt: f64) -> Result<NonlinearState, CoreError> {
        self.check_state(state)?;
        if dt < 0.0 {
            return Err(CoreError::NegativeDt(dt));
        }
        if dt == 0.0 {
            return Ok(state.clone());
        }
        let bound = self.dt_bound(state)?;
        if dt > bound {
            return Err(CoreError::CflViolation { dt, bound });
        }
        let n_y = self.grid.n_y();
        let k_max = self.k_max;
        let e_half: Vec<Vec<f64>> = (-k_max..=k_max)
            .map(|k| {
                let k2 = (k * k) as f64;
                (0..n_y)
                    .map(|m| (-state.nu * (k2 + mode_lambda(m)) * dt / 2.0).exp())
                    .collect()
            })
            .collect();

        let p0 = &state.profile;
        let p_half = p0.heat_step(dt / 2.0, &self.basis, self.grid.y_nodes())?;
        let p_full = p0.heat_step(dt, &self.basis, self.grid.y_nodes())?;

        let apply =
            |src: &SpectralField, nterm: &SpectralField, a: f64, scale_n: bool| -> SpectralField {
                let mut out = SpectralField::zeros(k_max, n_y);
                for k in -k_max..=k_max {
                    let e = &e_half[(k + k_max) as usize];
                    let s = src.mode(k);
                    let nt = nterm.mode(k);
                    let o = out.mode_mut(k);
                    for m in 0..n_y {
                        o[m] = if scale_n {
                            e[m] * (s[m] + a * nt[m])
                        } else {
                            e[m] * s[m] + a * nt[m]
                        };
                    }
                }
                out
            };

        let n1 = self.explicit_rhs(&state.omega, p0)?;
        let s2 = apply(&state.omega, &n1, dt / 2.0, true);
        let n2 = self.explicit_rhs(&s2, &p_half)?;
        let s3 = apply(&state.omega, &n2, dt / 2.0, false);
        let n3 = self.explicit_rhs(&s3, &p_half)?;
        // s4 = E^2 w + dt E n3
        let mut s4 = SpectralField::zeros(k_max, n_y);
        for k in -k_max..=k_max {
            let e = &e_half[(k + k_max) as usize];
            let s = state.omega.mode(k);
            let nt = n3.mode(k);
            let o = s4.mode_mut(k);
            for m in 0..n_y {
                o[m] = e[m] * e[m] * s[m] + dt * e[m] * nt[m];
            }
        }
        let n4 = self.explicit_rhs(&s4, &p_full)?;

        let mut omega = SpectralField::zeros(k_max, n_y);
        for k in -k_max..=k_max {
            let e = &e_half[(k + k_max) as usize];
            let s = state.omega.mode(k);
            let o = omega.mode_mut(k);
            let (a, b, c, d) = (n1.mode(k), n2.mode(k), n3.mode(k), n4.mode(k));
            for m in 0..n_y {
                let e1 = e[m];
                let e2 = e1 * e1;
                o[m] = e2 * s[m] + dt / 6.0 * (e2 * a[m] + 2.0 * e1 * (b[m] + c[m]) + d[m]);
            }
        }

        Ok(NonlinearState {
            t: state.t + dt,
            nu: state.nu,
            omega,
            profile: p_full,
        })
    }

    /// Quadrature energy flux `Re <u . grad w, w>` over the whole channel;
    /// conserved (zero) by the divergence-free transport.
    pub fn energy_flux(&self, omega: &SpectralField) -> Result<f64, CoreError> {
        let conv = self.convolution(omega)?;
        let mut acc = 0.0;
        for (k, w) in omega.iter() {
            let c = conv.mode(k);
            let s: Complex64 = c.iter().zip(w).map(|(a, b)| a * b.conj()).sum();
            acc += s.re;
        }
        Ok(acc)
    }
}
