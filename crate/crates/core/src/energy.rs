//! Hypocoercive energy functional, dissipation functionals, aggregation, and
//! the budget verifiers.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::grid::{dy_norm_sq, dyy_norm_sq, l2_norm_sq, mode_lambda, SineBasis};
use crate::poisson::poisson_solve;
use crate::sio::SioOperator;

/// Constant ledger: the coupling constants of the energy functional plus the
/// run parameters they are tied to. `k0` is an analysis constant with no
/// computable definition; it is an input here and `validate` reports which
/// of the constraint inequalities the resulting constants satisfy.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    pub c_alpha: f64,
    pub c_beta: f64,
    pub c_tau: f64,
    pub delta_star: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub k0: f64,
    pub m: f64,
    /// exponent of the optional `|k|^{-delta}` weakening of the damping
    /// weights; 0 reproduces the clean statements
    pub delta: f64,
    pub nu: f64,
}

impl EnergyLedger {
    /// The worked example: `c_tau = 1/(64 K0)`, `c_alpha = K0^-9`,
    /// `c_beta = K0^-6`, `delta0 < (64 K0)^-2`, with `delta_star = 1/64`.
    pub fn defaults(nu: f64, k0: f64) -> Self {
        Self {
            c_alpha: k0.powi(-9),
            c_beta: k0.powi(-6),
            c_tau: 1.0 / (64.0 * k0),
            delta_star: 1.0 / 64.0,
            delta0: 0.5 / (64.0 * k0).powi(2),
            delta1: 0.1,
            k0,
            m: 0.75,
            delta: 0.0,
            nu,
        }
    }

    /// Degenerate ledger: plain L2 energy, for the identity cross-checks.
    pub fn degenerate(nu: f64) -> Self {
        Self {
            c_alpha: 0.0,
            c_beta: 0.0,
            c_tau: 0.0,
            ..Self::defaults(nu, 64.0)
        }
    }

    /// Check the constraint inequalities; returns one line per violation.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                v.push(msg);
            }
        };
        check(
            self.c_tau < 1.0 / (32.0 * self.k0),
            format!(
                "c_tau = {:.3e} >= 1/(32 K0) = {:.3e}",
                self.c_tau,
                1.0 / (32.0 * self.k0)
            ),
        );
        check(
            self.k0 * self.delta0 < self.c_tau / 32.0,
            format!(
                "K0 delta0 = {:.3e} >= c_tau/32 = {:.3e}",
                self.k0 * self.delta0,
                self.c_tau / 32.0
            ),
        );
        let ca_bound = (1.0 / (8.0 * self.k0 * self.delta0)).min(1.0);
        check(
            self.c_alpha < ca_bound,
            format!(
                "c_alpha = {:.3e} >= min(1/(8 K0 delta0), 1) = {:.3e}",
                self.c_alpha, ca_bound
            ),
        );
        check(
            self.c_alpha / self.c_beta < 1.0 / (25.0 * self.k0),
            format!(
                "c_alpha/c_beta = {:.3e} >= 1/(25 K0) = {:.3e}",
                self.c_alpha / self.c_beta,
                1.0 / (25.0 * self.k0)
            ),
        );
        check(
            self.c_beta * self.c_beta / (2.0 * self.c_alpha) < 1.0 / (25.0 * self.k0 * self.k0),
            format!(
                "c_beta^2/(2 c_alpha) = {:.3e} >= 1/(25 K0^2) = {:.3e}",
                self.c_beta * self.c_beta / (2.0 * self.c_alpha),
                1.0 / (25.0 * self.k0 * self.k0)
            ),
        );
        check(
            self.c_beta * self.c_beta <= 0.25 * self.c_alpha + 0.25 * (1.0 - self.c_tau),
            format!(
                "coercivity: c_beta^2 = {:.3e} > c_alpha/4 + (1 - c_tau)/4 = {:.3e}",
                self.c_beta * self.c_beta,
                0.25 * self.c_alpha + 0.25 * (1.0 - self.c_tau)
            ),
        );
        check(self.k0 >= 32.0, format!("K0 = {} < 32", self.k0));
        v
    }
}

/// The five nonnegative dissipation terms of one mode.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DissipationParts {
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    pub tau_alpha: f64,
}

impl DissipationParts {
    /// Ledger-weighted total `D_k`.
    pub fn total(&self, ledger: &EnergyLedger) -> f64 {
        self.gamma
            + ledger.c_alpha * self.alpha
            + ledger.c_beta * self.beta
            + ledger.c_tau * self.tau
            + ledger.c_tau * ledger.c_alpha * self.tau_alpha
    }
}

/// Per-mode energy: the five-term hypocoercive functional. All inner
/// products are evaluated in the shared sine-node quadrature (exact for the
/// coefficient pairs, the node rule for the operator terms).
pub fn energy_k(
    omega: &[Complex64],
    k: i64,
    ledger: &EnergyLedger,
    sio: &SioOperator,
    basis: &SineBasis,
) -> Result<f64, CoreError> {
    if k == 0 {
        return Err(CoreError::ZeroWavenumber);
    }
    if sio.k != k {
        return Err(CoreError::MissingOperator(k));
    }
    let nu = ledger.nu;
    let ak = k.unsigned_abs() as f64;
    let l2 = l2_norm_sq(omega);
    let dy = dy_norm_sq(omega);

    let mut e = l2 + ledger.c_alpha * nu.powf(2.0 / 3.0) * ak.powf(-2.0 / 3.0) * dy;

    if ledger.c_beta != 0.0 {
        e -= ledger.c_beta
            * nu.powf(1.0 / 3.0)
            * ak.powf(-4.0 / 3.0)
            * beta_cross_term(omega, k, basis)?;
    }

    if ledger.c_tau != 0.0 {
        let w_values = basis.synthesize(omega)?;
        e += ledger.c_tau * sio.quadratic_form(&w_values)?;
        if ledger.c_alpha != 0.0 {
            let dw_values = basis.synthesize_derivative(omega)?;
            e += ledger.c_tau
                * ledger.c_alpha
                * nu.powf(2.0 / 3.0)
                * ak.powf(-2.0 / 3.0)
                * sio.quadratic_form(&dw_values)?;
        }
    }
    Ok(e)
}

/// `Re <ik w, d_y w>` by the node quadrature.
pub fn beta_cross_term(omega: &[Complex64], k: i64, basis: &SineBasis) -> Result<f64, CoreError> {
    let w = basis.synthesize(omega)?;
    let dw = basis.synthesize_derivative(omega)?;
    let ik = Complex64::new(0.0, k as f64);
    let s: Complex64 = w.iter().zip(&dw).map(|(a, b)| (ik * a) * b.conj()).sum();
    Ok(basis.spacing() * s.re)
}

/// The five dissipation terms for one mode.
pub fn dissipation_k(omega: &[Complex64], k: i64, ledger: &EnergyLedger) -> DissipationParts {
    let nu = ledger.nu;
    let ak = (k.unsigned_abs() as f64).max(f64::MIN_POSITIVE);
    let k2 = (k * k) as f64;
    let l2 = l2_norm_sq(omega);
    let dy = dy_norm_sq(omega);
    let dyy = dyy_norm_sq(omega);
    let grad = k2 * l2 + dy;

    let phi = poisson_solve(omega, k);
    let mut phi_l2 = 0.0;
    let mut phi_dy = 0.0;
    let mut phi_dyy = 0.0;
    for (m, p) in phi.iter().enumerate() {
        let n = p.norm_sqr();
        phi_l2 += n;
        phi_dy += mode_lambda(m) * n;
        phi_dyy += mode_lambda(m) * mode_lambda(m) * n;
    }
    let grad_phi = k2 * phi_l2 + phi_dy;
    let grad_dy_phi = k2 * phi_dy + phi_dyy;

    DissipationParts {
        gamma: nu * grad,
        alpha: nu.powf(5.0 / 3.0) * ak.powf(-2.0 / 3.0) * (k2 * dy + dyy),
        beta: nu.powf(1.0 / 3.0) * ak.powf(2.0 / 3.0) * l2,
        tau: ak.powf(2.0 - ledger.delta) * grad_phi,
        tau_alpha: nu.powf(2.0 / 3.0) * ak.powf(4.0 / 3.0 - ledger.delta) * grad_dy_phi,
    }
}

/// `|k|^{2-delta} ||grad_k phi_k||^2`, the inviscid-damping integrand.
pub fn damping_integrand(omega: &[Complex64], k: i64, ledger: &EnergyLedger) -> f64 {
    dissipation_k(omega, k, ledger).tau
}

/// Energy/dissipation record of one nonzero mode at one sample time.
#[derive(Debug, Clone)]
pub struct ModeEnergy {
    pub k: i64,
    pub e_k: f64,
    pub d: DissipationParts,
}

/// Aggregated energy and dissipation at one sample time.
#[derive(Debug, Clone)]
pub struct EnergySnapshot {
    pub t: f64,
    pub e0: f64,
    pub e_neq: f64,
    pub e: f64,
    pub d0: f64,
    pub d_neq: f64,
    pub d_e: f64,
    pub d: f64,
    pub per_mode: Vec<ModeEnergy>,
}

/// Combine per-mode records and the mean mode into the weighted aggregates.
/// Weights: `|k|^{2m}` on nonzero modes, time factors `exp(2 delta* nu t)` on
/// the mean and `exp(2 delta* nu^{1/3} t)` on the rest.
pub fn aggregate(
    t: f64,
    omega0: &[Complex64],
    per_mode: Vec<ModeEnergy>,
    ledger: &EnergyLedger,
) -> EnergySnapshot {
    let nu = ledger.nu;
    let w_slow = (2.0 * ledger.delta_star * nu * t).exp();
    let w_fast = (2.0 * ledger.delta_star * nu.powf(1.0 / 3.0) * t).exp();

    let l2_0 = l2_norm_sq(omega0);
    let dy_0 = dy_norm_sq(omega0);
    let dyy_0 = dyy_norm_sq(omega0);
    let e0 = w_slow * (l2_0 + ledger.c_alpha * nu.powf(2.0 / 3.0) * dy_0);
    let d0 = w_slow * (nu * dy_0 + ledger.c_alpha * nu * nu.powf(2.0 / 3.0) * dyy_0);

    let mut e_neq = 0.0;
    let mut d_neq = 0.0;
    let mut de_sum = 0.0;
    for rec in &per_mode {
        let ak = rec.k.unsigned_abs() as f64;
        let wk = ak.powf(2.0 * ledger.m);
        e_neq += w_fast * wk * rec.e_k;
        d_neq += w_fast * wk * rec.d.total(ledger);
        de_sum += w_fast * ak.powf(2.0 * ledger.m + 2.0 / 3.0) * rec.e_k;
    }
    let d_e = nu * e0 + nu.powf(1.0 / 3.0) * de_sum;

    EnergySnapshot {
        t,
        e0,
        e_neq,
        e: e0 + e_neq,
        d0,
        d_neq,
        d_e,
        d: d0 + d_neq + d_e,
        per_mode,
    }
}

/// Time series of one linear mode, sampled uniformly.
#[derive(Debug, Clone, Default)]
pub struct LinearSeries {
    pub k: i64,
    pub t: Vec<f64>,
    pub e_k: Vec<f64>,
    pub d_total: Vec<f64>,
    pub d_parts: Vec<DissipationParts>,
    pub norm_l2: Vec<f64>,
}

/// One verified sample of the linear budget.
#[derive(Debug, Clone, Copy)]
pub struct BudgetSample {
    pub t: f64,
    pub e_k: f64,
    pub d_k: f64,
    pub de_dt: f64,
    /// `dE/dt + 8 delta* D_k + 8 delta* nu^{1/3} |k|^{2/3} E_k`; nonpositive
    /// when the budget holds
    pub defect: f64,
    pub violation: bool,
    /// endpoint stencil or pre-transient sample
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct LinearBudgetReport {
    pub k: i64,
    pub samples: Vec<BudgetSample>,
    pub violations: usize,
    pub unflagged_violations: usize,
    pub pass_fraction: f64,
    /// largest delta* for which every interior sample satisfies the budget
    pub empirical_delta_star: f64,
    /// max over samples of the weighted-energy-plus-damping ratio
    /// `(e^{2 d* nu^{1/3}|k|^{2/3} t} E + (c_tau/4) Q) / E(0)`
    pub integrated_ratio: f64,
    /// accumulated damping integral `Q(t_end)`
    pub damping_integral: f64,
    /// largest constant c such that `e^{..} E + (c/4) Q <= E(0)` on the run
    pub best_damping_constant: f64,
    pub initial_energy: f64,
    pub ledger_violations: Vec<String>,
    pub scale_d: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Verify the per-mode decay budget along a uniformly sampled trajectory:
/// centered differences of `E_k` against `-8 delta* D_k - 8 delta* nu^{1/3}
/// |k|^{2/3} E_k`, plus the integrated damping inequality.
///
/// `transient_time`: violations at samples earlier than this are flagged as
/// transient (reported, not hidden); endpoint stencils are flagged likewise.
pub fn verify_linear_budget(
    series: &LinearSeries,
    ledger: &EnergyLedger,
    transient_time: f64,
) -> Result<LinearBudgetReport, CoreError> {
    let n = series.t.len();
    if n < 3 {
        return Err(CoreError::ShortWindow(n));
    }
    let dt = series.t[1] - series.t[0];
    for w in series.t.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1e-300) {
            return Err(CoreError::NonUniformSamples);
        }
    }
    let ak = series.k.unsigned_abs() as f64;
    let nu = ledger.nu;
    let rate_weight = 8.0 * ledger.delta_star * nu.powf(1.0 / 3.0) * ak.powf(2.0 / 3.0);

    let scale_d = series.d_total.iter().fold(0.0_f64, |a, &d| a.max(d));
    let tolerance = 1e-6 * scale_d;

    let de_dt = |i: usize| -> f64 {
        if i == 0 {
            (-3.0 * series.e_k[0] + 4.0 * series.e_k[1] - series.e_k[2]) / (2.0 * dt)
        } else if i == n - 1 {
            (3.0 * series.e_k[n - 1] - 4.0 * series.e_k[n - 2] + series.e_k[n - 3]) / (2.0 * dt)
        } else {
            (series.e_k[i + 1] - series.e_k[i - 1]) / (2.0 * dt)
        }
    };

    let mut samples = Vec::with_capacity(n);
    let mut violations = 0usize;
    let mut unflagged = 0usize;
    let mut empirical = f64::INFINITY;
    for i in 0..n {
        let d = de_dt(i);
        let defect = d + 8.0 * ledger.delta_star * series.d_total[i] + rate_weight * series.e_k[i];
        let endpoint = i == 0 || i == n - 1;
        let flagged = endpoint || series.t[i] < transient_time;
        let violation = defect > tolerance;
        if violation {
            violations += 1;
            if !flagged {
                unflagged += 1;
            }
        }
        if !endpoint {
            let denom =
                8.0 * (series.d_total[i] + nu.powf(1.0 / 3.0) * ak.powf(2.0 / 3.0) * series.e_k[i]);
            if denom > 0.0 {
                empirical = empirical.min((-d / denom).max(0.0));
            }
        }
        samples.push(BudgetSample {
            t: series.t[i],
            e_k: series.e_k[i],
            d_k: series.d_total[i],
            de_dt: d,
            defect,
            violation,
            flagged,
        });
    }

    // integrated inviscid damping: Q(t) = int e^{2 d* nu^{1/3}|k|^{2/3} s} D_tau ds
    let growth = 2.0 * ledger.delta_star * nu.powf(1.0 / 3.0) * ak.powf(2.0 / 3.0);
    let mut q = 0.0;
    let mut integrated_ratio: f64 = 0.0;
    let mut best_c = f64::INFINITY;
    let e0 = series.e_k[0];
    for i in 1..n {
        let f_prev = (growth * series.t[i - 1]).exp() * series.d_parts[i - 1].tau;
        let f_cur = (growth * series.t[i]).exp() * series.d_parts[i].tau;
        q += 0.5 * dt * (f_prev + f_cur);
        let weighted_e = (growth * series.t[i]).exp() * series.e_k[i];
        if e0 > 0.0 {
            integrated_ratio = integrated_ratio.max((weighted_e + 0.25 * ledger.c_tau * q) / e0);
            if q > 0.0 {
                best_c = best_c.min(4.0 * (e0 - weighted_e) / q);
            }
        }
    }
    if !best_c.is_finite() {
        best_c = 0.0;
    }

    let ledger_violations = ledger.validate();
    let pass_fraction = 1.0 - violations as f64 / n as f64;
    let pass = unflagged == 0 && integrated_ratio <= 1.0 + 1e-12 && ledger_violations.is_empty();

    Ok(LinearBudgetReport {
        k: series.k,
        samples,
        violations,
        unflagged_violations: unflagged,
        pass_fraction,
        empirical_delta_star: if empirical.is_finite() {
            empirical
        } else {
            0.0
        },
        integrated_ratio,
        damping_integral: q,
        best_damping_constant: best_c,
        initial_energy: e0,
        ledger_violations,
        scale_d,
        tolerance,
        pass,
    })
}

#[derive(Debug, Clone)]
pub struct BootstrapReport {
    /// fitted smallest constant making `dE/dt + 4 delta* D <= sqrt(C0 E/nu) D`
    pub c0_fitted: f64,
    /// `sup_t E(t) / E(0)` over samples after the first
    pub sup_ratio: f64,
    pub monotone_bound_holds: bool,
    /// `E(0) <= delta*^2 nu / C0` with the fitted constant
    pub smallness_satisfied: bool,
    /// `sup E + 2 delta* int D <= E(0)`
    pub integrated_holds: bool,
    pub dissipation_integral: f64,
    pub violations: usize,
    pub samples: usize,
}

/// Verify the nonlinear bootstrap inequality along a uniformly sampled run.
pub fn verify_nonlinear_bootstrap(
    snapshots: &[EnergySnapshot],
    ledger: &EnergyLedger,
) -> Result<BootstrapReport, CoreError> {
    let n = snapshots.len();
    if n < 3 {
        return Err(CoreError::ShortWindow(n));
    }
    let dt = snapshots[1].t - snapshots[0].t;
    for w in snapshots.windows(2) {
        if ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt.max(1e-300) {
            return Err(CoreError::NonUniformSamples);
        }
    }
    let nu = ledger.nu;
    let e: Vec<f64> = snapshots.iter().map(|s| s.e).collect();
    let d: Vec<f64> = snapshots.iter().map(|s| s.d).collect();

    let mut c0: f64 = 0.0;
    let mut violations = 0usize;
    for i in 1..n - 1 {
        let de = (e[i + 1] - e[i - 1]) / (2.0 * dt);
        let excess = de + 4.0 * ledger.delta_star * d[i];
        if excess > 0.0 {
            violations += 1;
            if d[i] > 0.0 && e[i] > 0.0 {
                // needed C0 so that excess <= sqrt(C0 E / nu) D
                let root = excess / d[i];
                c0 = c0.max(root * root * nu / e[i]);
            }
        }
    }

    let e0 = e[0];
    let sup_after_first = e.iter().skip(1).fold(0.0_f64, |a, &v| a.max(v));
    let sup_ratio = if e0 > 0.0 { sup_after_first / e0 } else { 0.0 };
    let monotone = sup_ratio <= 1.0 + 1e-12;

    let mut d_int = 0.0;
    for i in 1..n {
        d_int += 0.5 * dt * (d[i - 1] + d[i]);
    }
    let integrated = sup_after_first + 2.0 * ledger.delta_star * d_int <= e0 * (1.0 + 1e-12);
    let smallness = if c0 > 0.0 {
        e0 <= ledger.delta_star * ledger.delta_star * nu / c0
    } else {
        true
    };

    Ok(BootstrapReport {
        c0_fitted: c0,
        sup_ratio,
        monotone_bound_holds: monotone,
        smallness_satisfied: smallness,
        integrated_holds: integrated,
        dissipation_integral: d_int,
        violations,
        samples: n,
    })
}

/// Least-squares exponential decay rate of a positive series on a window:
/// returns `(rate, r2)` with `rate = -slope` of `log(v)` against `t`.
pub fn fit_decay_rate(
    t: &[f64],
    values: &[f64],
    window: std::ops::Range<usize>,
) -> Result<(f64, f64), CoreError> {
    if t.len() != values.len() {
        return Err(CoreError::LengthMismatch {
            expected: t.len(),
            got: values.len(),
        });
    }
    let lo = window.start;
    let hi = window.end.min(t.len());
    if hi - lo < 10 {
        return Err(CoreError::ShortWindow(hi.saturating_sub(lo)));
    }
    let mut xs = Vec::with_capacity(hi - lo);
    let mut ys = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        if values[i] <= 0.0 {
            return Err(CoreError::NonpositiveFit(values[i]));
        }
        xs.push(t[i]);
        ys.push(values[i].ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy <= f64::EPSILON * n * my.abs().max(1.0) {
        1.0 // constant series: perfect fit of slope 0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok((-slope, r2))
}
