//! Acceptance suite: one check per criterion, each printing a pass/fail
//! line (run with `-- --nocapture` to see them on success).
//!
//! Criterion 2 lives in its own test because it fails for a documented
//! numerical reason: the commutator kernel concentrates on a corner layer of
//! width 1/k, so its discrete norm at feasible resolutions underestimates
//! the large-k operators, and the discrete Hilbert-transform norm converges
//! only logarithmically. The diagnostics it prints demonstrate both effects.

use std::sync::OnceLock;
use std::time::Instant;

use couette_cli::config::RunConfig;
use couette_cli::runner;
use couette_cli::sweeps;
use couette_core::{
    assemble_commutator, assemble_sio, operator_audit, poisson::apply_delta_k, poisson_solve,
    sio::commutator_residual_norm, ChannelGrid, EnergyLedger, NonlinearSolver, OperatorAuditRow,
    SineBasis, SpectralField,
};
use num_complex::Complex64;

struct Audit {
    rows: Vec<OperatorAuditRow>,
    secs: f64,
}

fn audit(n_y: usize) -> &'static Audit {
    static A256: OnceLock<Audit> = OnceLock::new();
    static A512: OnceLock<Audit> = OnceLock::new();
    let cell = match n_y {
        256 => &A256,
        512 => &A512,
        _ => panic!("unexpected resolution"),
    };
    cell.get_or_init(|| {
        let start = Instant::now();
        let grid = ChannelGrid::new(4, n_y, 1.0).unwrap();
        let ledger = EnergyLedger::defaults(1e-4, 64.0);
        let ks: Vec<i64> = (1..=64).collect();
        let rows = operator_audit(&grid, &ks, ledger.c_tau, ledger.delta).unwrap();
        Audit {
            rows,
            secs: start.elapsed().as_secs_f64(),
        }
    })
}

fn check(name: &str, result: Result<String, String>, failures: &mut Vec<String>) {
    match result {
        Ok(detail) => println!("{name}: PASS — {detail}"),
        Err(detail) => {
            println!("{name}: FAIL — {detail}");
            failures.push(format!("{name}: {detail}"));
        }
    }
}

#[test]
fn acceptance_criteria() {
    let mut failures = Vec::new();

    check(
        "criterion 1 (operator boundedness)",
        criterion_1(),
        &mut failures,
    );
    check(
        "criterion 3 (self-adjointness)",
        criterion_3(),
        &mut failures,
    );
    check(
        "criterion 4 (commutator identity)",
        criterion_4(),
        &mut failures,
    );
    check(
        "criterion 5 (enhanced-dissipation scaling)",
        criterion_5(),
        &mut failures,
    );
    let budget_runs = criteria_6_7_runs();
    check(
        "criterion 6 (linear budget)",
        criterion_6(&budget_runs),
        &mut failures,
    );
    check(
        "criterion 7 (inviscid damping integral)",
        criterion_7(&budget_runs),
        &mut failures,
    );
    check(
        "criterion 8 (nonlinear bootstrap)",
        criterion_8(),
        &mut failures,
    );
    check(
        "criterion 9 (falsification sensitivity)",
        criterion_9(),
        &mut failures,
    );
    check(
        "criterion 10 (oracle equivalences)",
        criterion_10(),
        &mut failures,
    );

    assert!(
        failures.is_empty(),
        "failed criteria:\n{}",
        failures.join("\n")
    );
}

fn criterion_1() -> Result<String, String> {
    let a256 = audit(256);
    let a512 = audit(512);
    let max256 = a256.rows.iter().map(|r| r.norm_j).fold(0.0, f64::max);
    let max512 = a512.rows.iter().map(|r| r.norm_j).fold(0.0, f64::max);
    if !max256.is_finite() || !max512.is_finite() {
        return Err("non-finite operator norm".into());
    }
    let drift = (max512 - max256).abs() / max256;
    let secs = a256.secs + a512.secs;
    if drift > 0.05 {
        return Err(format!(
            "max |J_k| drifts {:.2}% under doubling (256: {max256:.5}, 512: {max512:.5})",
            100.0 * drift
        ));
    }
    if secs > 120.0 {
        return Err(format!("runtime {secs:.1}s exceeds 2 min"));
    }
    Ok(format!(
        "max over k in 1..=64 of |J_k|: {max256:.5} at n_y=256, {max512:.5} at n_y=512 ({:.2}% change, {secs:.1}s)",
        100.0 * drift
    ))
}

#[test]
fn acceptance_criterion_2_commutator_scaling() {
    let a256 = audit(256);
    let a512 = audit(512);
    let h256: Vec<f64> = a256.rows.iter().map(|r| r.norm_h_over_k).collect();
    let h512: Vec<f64> = a512.rows.iter().map(|r| r.norm_h_over_k).collect();
    let max = h256.iter().cloned().fold(0.0, f64::max);
    let min = h256.iter().cloned().fold(f64::MAX, f64::min);
    let range_factor = max / min;
    let worst_drift = h256
        .iter()
        .zip(&h512)
        .map(|(a, b)| (b - a).abs() / a)
        .fold(0.0, f64::max);
    println!(
        "criterion 2 (commutator scaling): range factor {range_factor:.2} (need < 3), \
         worst per-k drift under doubling {:.1}% (need <= 5%)",
        100.0 * worst_drift
    );
    // diagnostic: the discrete norm is a function of k * h (corner layer of
    // width 1/k), so the large-k values at fixed n_y are resolution-starved,
    // not a kernel error; pairs with equal k * h collapse onto each other
    let pair_a = h256[31]; // k = 32 at n_y = 256
    let pair_b = h512[63]; // k = 64 at n_y = 512, same k * h
    println!(
        "  self-similarity: |H|/k at (k=32, n=256) = {pair_a:.4} vs (k=64, n=512) = {pair_b:.4} \
         (equal k*h, relative gap {:.1e})",
        (pair_a - pair_b).abs() / pair_a
    );
    println!(
        "  measured |H|/k at k=1: {:.4} (256) -> {:.4} (512); at k=64: {:.4} -> {:.4}",
        h256[0], h512[0], h256[63], h512[63]
    );
    assert!(
        range_factor < 3.0 && worst_drift <= 0.05,
        "criterion 2 fails as stated: the kernel concentrates on a width-1/k corner layer, so \
         |H_k|/k at n_y = 256 under-resolves large k (range factor {range_factor:.2} >= 3) and \
         refinement moves the under-resolved values by {:.0}% >> 5%. The continuum ratio tends \
         to a k-uniform limit (the discrete values collapse onto a single function of k*h), but \
         reaching 5%-converged norms at k = 64 needs n_y beyond 10^5, far outside the stated \
         2-minute budget.",
        100.0 * worst_drift
    );
}

fn criterion_3() -> Result<String, String> {
    let mut worst = 0.0_f64;
    for rows in [&audit(256).rows, &audit(512).rows] {
        for r in rows.iter() {
            worst = worst.max(r.selfadj_residual);
        }
    }
    if worst <= 1e-8 {
        Ok(format!(
            "weighted symmetry residual <= {worst:.1e} for every assembled k"
        ))
    } else {
        Err(format!("residual {worst:.3e} exceeds 1e-8"))
    }
}

fn criterion_4() -> Result<String, String> {
    let mut f = vec![Complex64::ZERO; 128];
    for m in 0..12 {
        f[m] = Complex64::new(
            1.0 / (1.0 + m as f64).powi(3),
            0.4 / (1.0 + m as f64).powi(4),
        );
    }
    let mut residuals = Vec::new();
    for n_y in [128usize, 256, 512] {
        let grid = ChannelGrid::new(4, n_y, 1.0).unwrap();
        let basis = SineBasis::for_grid(&grid);
        let sio = assemble_sio(2, &grid, 0.0).unwrap();
        let com = assemble_commutator(2, &grid).unwrap();
        let mut fr = f.clone();
        fr.resize(n_y, Complex64::ZERO);
        residuals.push(commutator_residual_norm(&sio, &com, &basis, &fr).unwrap());
    }
    let order1 = (residuals[0] / residuals[1]).log2();
    let order2 = (residuals[1] / residuals[2]).log2();
    if order1 >= 1.0 && order2 >= 1.0 {
        Ok(format!(
            "residuals {:.3e} -> {:.3e} -> {:.3e} over n_y 128/256/512 (orders {order1:.2}, {order2:.2})",
            residuals[0], residuals[1], residuals[2]
        ))
    } else {
        Err(format!(
            "empirical orders {order1:.2}, {order2:.2} below 1 ({residuals:?})"
        ))
    }
}

fn criterion_5() -> Result<String, String> {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = RunConfig::from_toml(&format!(
        r#"
mode = "linear-single-k"
nu = 1e-4
t_end = 100.0
dt = 0.05
sample_interval = 0.25
seed = 7
quiet = true
output_dir = "{}"

[grid]
n_x = 8
n_y = 256

[perturbation]
preset = "random_band 7 1 80 1.0"

[linear]
k = 1
"#,
        dir.path().join("sweep").display()
    ))
    .map_err(|e| e.to_string())?;
    let (rows, slope, _) =
        sweeps::sweep_nu(&base, &[1e-3, 1e-4, 1e-5], Some(5.0)).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let slope = slope.ok_or("slope not computed")?;
    if rows.iter().any(|r| r.status != "completed") {
        return Err("a child run did not complete".into());
    }
    if (slope.slope - 1.0 / 3.0).abs() > 0.08 {
        return Err(format!(
            "log-log slope {:.4} outside 1/3 +- 0.08",
            slope.slope
        ));
    }
    if secs > 600.0 {
        return Err(format!("runtime {secs:.0}s exceeds 10 min"));
    }
    let rates: Vec<String> = rows
        .iter()
        .map(|r| format!("nu={:.0e}: {:.4e}", r.nu, r.rate.unwrap_or(f64::NAN)))
        .collect();
    Ok(format!(
        "slope {:.4} +- {:.4} (target 1/3 +- 0.08); rates {}; {secs:.0}s",
        slope.slope,
        2.0 * slope.stderr,
        rates.join(", ")
    ))
}

struct BudgetRuns {
    /// (nu, record)
    by_nu: Vec<(f64, couette_cli::RunRecord)>,
}

fn criteria_6_7_runs() -> BudgetRuns {
    let ledger = EnergyLedger::defaults(1e-4, 64.0);
    let shear_amp = ledger.delta0 / 2.0;
    let dir = tempfile::tempdir().unwrap();
    let mut by_nu = Vec::new();
    for nu in [1e-3f64, 1e-4, 1e-5] {
        let t_end = 30.0 * nu.powf(-1.0 / 3.0);
        let cfg = RunConfig::from_toml(&format!(
            r#"
mode = "linear-all-k"
nu = {nu:e}
t_end = {t_end:.6}
dt = 0.05
sample_interval = 0.5
seed = 42
quiet = true
output_dir = "{}"

[grid]
n_x = 16
n_y = 256

[shear]
preset = "random_h4 1 {shear_amp:.17e}"

[perturbation]
preset = "random_band 42 4 6 1.0"

[linear]
ks = [1, 2, 4]
"#,
            dir.path().join(format!("nu_{nu:.0e}")).display()
        ))
        .unwrap();
        assert!(cfg.validate().is_empty(), "{:?}", cfg.validate());
        let outcome = runner::execute(&cfg, false).unwrap();
        assert_eq!(
            outcome.record.status, "completed",
            "budget run diverged at nu = {nu:e}"
        );
        by_nu.push((nu, outcome.record));
    }
    BudgetRuns { by_nu }
}

fn criterion_6(runs: &BudgetRuns) -> Result<String, String> {
    let (_, record) = runs
        .by_nu
        .iter()
        .find(|(nu, _)| (*nu - 1e-4).abs() < 1e-18)
        .ok_or("missing nu = 1e-4 run")?;
    let mut details = Vec::new();
    for b in &record.budget {
        if b.pass_fraction < 0.99 {
            return Err(format!(
                "k = {}: defect within tolerance at only {:.2}% of samples",
                b.k,
                100.0 * b.pass_fraction
            ));
        }
        if b.unflagged_violations > 0 {
            return Err(format!(
                "k = {}: {} violations outside the transient/endpoint stencils",
                b.k, b.unflagged_violations
            ));
        }
        details.push(format!(
            "k={}: {:.2}% clean, {} flagged, empirical delta* {:.2e}",
            b.k,
            100.0 * b.pass_fraction,
            b.violations,
            b.empirical_delta_star
        ));
    }
    if record.budget.len() != 3 {
        return Err("expected budget reports for k in {1, 2, 4}".into());
    }
    Ok(details.join("; "))
}

fn criterion_7(runs: &BudgetRuns) -> Result<String, String> {
    let ledger = EnergyLedger::defaults(1e-4, 64.0);
    let mut q_over_e0 = std::collections::BTreeMap::new();
    let mut worst_prop_ratio = 0.0_f64;
    for (nu, record) in &runs.by_nu {
        for b in &record.budget {
            // diagnostic only: the combined inequality (weighted energy
            // plus (c_tau/4) Q against E(0)) dips above 1 by O(1e-4) inside
            // the flagged transient when delta* sits at the default
            worst_prop_ratio = worst_prop_ratio.max(b.integrated_ratio);
            let bound = 4.0 * b.initial_energy / ledger.c_tau;
            if b.damping_integral > bound {
                return Err(format!(
                    "nu = {nu:e}, k = {}: damping integral {:.3e} above 4 E(0)/c_tau = {:.3e}",
                    b.k, b.damping_integral, bound
                ));
            }
            q_over_e0.insert(
                (format!("{nu:e}"), b.k),
                b.damping_integral / b.initial_energy,
            );
        }
    }
    let mut ratios = Vec::new();
    for k in [1i64, 2, 4] {
        let lo = q_over_e0[&("1e-3".to_string(), k)];
        let hi = q_over_e0[&("1e-5".to_string(), k)];
        let ratio = hi / lo;
        if ratio > 2.0 {
            return Err(format!(
                "k = {k}: accumulated damping grows by {ratio:.2}x from nu = 1e-3 to 1e-5"
            ));
        }
        ratios.push(format!("k={k}: {ratio:.2}x"));
    }
    Ok(format!(
        "Q <= 4 E(0)/c_tau on all nine runs; nu-uniformity ratios {}; worst combined-inequality ratio {worst_prop_ratio:.4}",
        ratios.join(", ")
    ))
}

fn criterion_8() -> Result<String, String> {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let nu = 1e-4f64;
    let t_end = 5.0 * nu.powf(-1.0 / 3.0);

    // linear reference rate at the same viscosity
    let lin = RunConfig::from_toml(&format!(
        r#"
mode = "linear-single-k"
nu = {nu:e}
t_end = {t_end:.6}
dt = 0.02
sample_interval = 0.25
seed = 9
quiet = true
output_dir = "{}"

[grid]
n_x = 8
n_y = 128

[perturbation]
preset = "random_band 9 1 40 1.0"
"#,
        dir.path().join("linear_ref").display()
    ))
    .map_err(|e| e.to_string())?;
    let lin_outcome = runner::execute(&lin, false).map_err(|e| e.to_string())?;
    let lin_rate = lin_outcome
        .record
        .rates
        .iter()
        .find(|r| r.label == "omega_l2_k1")
        .ok_or("linear reference rate missing")?
        .rate;

    let cfg = RunConfig::from_toml(&format!(
        r#"
mode = "nonlinear"
nu = {nu:e}
t_end = {t_end:.6}
dt = 0.02
sample_interval = 0.5
seed = 9
quiet = true
output_dir = "{}"

[grid]
n_x = 32
n_y = 128

[ledger]
m = 0.75

[shear]
preset = "random_h4 1 1.4901161193847656e-8"

[perturbation]
preset = "random_band 9 4 40 1.0"
epsilon_over_sqrt_nu = 0.05
"#,
        dir.path().join("nonlinear").display()
    ))
    .map_err(|e| e.to_string())?;
    let outcome = runner::execute(&cfg, false).map_err(|e| e.to_string())?;
    if outcome.record.status != "completed" {
        return Err(format!("run status {}", outcome.record.status));
    }
    let boot = outcome
        .record
        .bootstrap
        .as_ref()
        .ok_or("no bootstrap report")?;
    if !boot.monotone_bound_holds {
        return Err(format!(
            "sup E/E(0) = {:.4} exceeds 1 after the first sample",
            boot.sup_ratio
        ));
    }
    let eneq_rate = outcome
        .record
        .rates
        .iter()
        .find(|r| r.label == "E_neq")
        .ok_or("E_neq rate missing")?
        .rate;
    let ledger = cfg.build_ledger();
    // E_neq is quadratic in the field and carries the exponential weight
    let predicted = 2.0 * lin_rate - 2.0 * ledger.delta_star * nu.powf(1.0 / 3.0);
    let ratio = eneq_rate / predicted;
    let secs = start.elapsed().as_secs_f64();
    if !(0.5..=2.0).contains(&ratio) {
        return Err(format!(
            "E_neq rate {eneq_rate:.4e} vs linear prediction {predicted:.4e} (factor {ratio:.2})"
        ));
    }
    if secs > 900.0 {
        return Err(format!("runtime {secs:.0}s exceeds 15 min"));
    }
    Ok(format!(
        "sup E/E(0) = {:.4} (monotone), E_neq rate {eneq_rate:.3e} = {ratio:.2}x linear prediction; {secs:.0}s",
        boot.sup_ratio
    ))
}

fn criterion_9() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = RunConfig::from_toml(&format!(
        r#"
mode = "linear-single-k"
nu = 1e-3
t_end = 20.0
dt = 0.05
sample_interval = 0.25
seed = 5
quiet = true
strict = true
output_dir = "{}"

[grid]
n_x = 8
n_y = 96

[ledger]
c_tau = 0.9

[perturbation]
preset = "single_mode 1 1 1.0"
"#,
        dir.path().join("broken").display()
    ))
    .map_err(|e| e.to_string())?;
    let outcome = runner::execute(&cfg, false).map_err(|e| e.to_string())?;
    let budget = outcome.record.budget.first().ok_or("no budget report")?;
    if budget.pass {
        return Err("verifier passed a deliberately broken ledger".into());
    }
    if budget.ledger_violations.is_empty() {
        return Err("no ledger-constraint violations reported".into());
    }
    if outcome.exit != runner::EXIT_BUDGET {
        return Err(format!(
            "strict mode exit code {} (expected 4)",
            outcome.exit
        ));
    }
    Ok(format!(
        "verifier reports {} ledger violations (first: {}) and strict mode exits 4",
        budget.ledger_violations.len(),
        budget.ledger_violations[0]
    ))
}

fn criterion_10() -> Result<String, String> {
    // (a) Poisson residual across wavenumbers
    let n = 128usize;
    let mut w = vec![Complex64::ZERO; n];
    for (m, c) in w.iter_mut().enumerate() {
        *c = Complex64::new((m as f64 * 0.73).sin(), (m as f64 * 0.39).cos())
            / (1.0 + m as f64).sqrt();
    }
    for k in [0i64, 1, 3, 17, 64] {
        let phi = poisson_solve(&w, k);
        let back = apply_delta_k(&phi, k);
        let num: f64 = w
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den: f64 = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if num / den > 1e-10 {
            return Err(format!("poisson residual {:.3e} at k = {k}", num / den));
        }
    }

    // (b) Green's function against a 2048-point finite-difference solve
    let k = 2i64;
    let n_fd = 2048usize;
    let h = 2.0 / (n_fd as f64 + 1.0);
    let nodes: Vec<f64> = (1..=n_fd).map(|j| -1.0 + h * j as f64).collect();
    let jp = 700usize;
    let k2 = (k * k) as f64;
    let mut diag = vec![-k2 - 2.0 / (h * h); n_fd];
    let off = 1.0 / (h * h);
    let mut rhs = vec![0.0; n_fd];
    rhs[jp] = 1.0 / h;
    let sup = vec![off; n_fd];
    for i in 1..n_fd {
        let wgt = off / diag[i - 1];
        diag[i] -= wgt * sup[i - 1];
        rhs[i] -= wgt * rhs[i - 1];
    }
    let mut sol = vec![0.0; n_fd];
    sol[n_fd - 1] = rhs[n_fd - 1] / diag[n_fd - 1];
    for i in (0..n_fd - 1).rev() {
        sol[i] = (rhs[i] - sup[i] * sol[i + 1]) / diag[i];
    }
    let mut green_dev = 0.0_f64;
    for (j, &y) in nodes.iter().enumerate() {
        green_dev =
            green_dev.max((sol[j] - couette_core::green::green_k(k, y, nodes[jp]).unwrap()).abs());
    }
    if green_dev > 1e-4 {
        return Err(format!(
            "green-function vs direct solve deviation {green_dev:.3e}"
        ));
    }

    // (c) two-mode convolution against the direct sum
    let grid = ChannelGrid::new(16, 33, 2.0 / 3.0).unwrap();
    let solver = NonlinearSolver::new(grid.clone());
    let basis = solver.basis().clone();
    let cutoff = grid.y_dealias_cutoff();
    let mut f = SpectralField::zeros(solver.k_max(), 33);
    for m in 0..cutoff {
        f.mode_mut(1)[m] =
            Complex64::new((m as f64).sin(), (m as f64 * 0.5).cos()) / (1.0 + m as f64).powi(2);
        f.mode_mut(2)[m] = Complex64::new((m as f64 * 0.3).cos(), (m as f64 * 0.8).sin())
            / (1.0 + m as f64).powi(2);
    }
    f.enforce_reality();
    let conv = solver.convolution(&f).unwrap();
    let mut direct = vec![Complex64::ZERO; 33];
    for (ka, kb) in [(1i64, 2i64), (2, 1)] {
        let phi = poisson_solve(f.mode(ka), ka);
        let u1 = basis.synthesize_derivative(&phi).unwrap();
        let phi_v = basis.synthesize(&phi).unwrap();
        let ika = Complex64::new(0.0, ka as f64);
        let ikb = Complex64::new(0.0, kb as f64);
        let w_v = basis.synthesize(f.mode(kb)).unwrap();
        let wy = basis.synthesize_derivative(f.mode(kb)).unwrap();
        for j in 0..33 {
            direct[j] += u1[j] * (ikb * w_v[j]) + (-ika * phi_v[j]) * wy[j];
        }
    }
    let mut direct_coeffs = basis.analyze(&direct).unwrap();
    for c in direct_coeffs.iter_mut().skip(cutoff) {
        *c = Complex64::ZERO;
    }
    let scale = direct_coeffs.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let conv_dev = conv
        .mode(3)
        .iter()
        .zip(&direct_coeffs)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if conv_dev > 1e-10 * scale.max(1.0) {
        return Err(format!(
            "convolution vs direct sum deviation {conv_dev:.3e}"
        ));
    }

    // (d) energy-flux conservation
    let mut g = SpectralField::zeros(solver.k_max(), 33);
    let mut x = 0.37_f64;
    for k in 0..=solver.k_max() {
        for m in 0..cutoff {
            x = (x * 9301.0 + 49297.0) % 233280.0;
            let re = 2.0 * (x / 233280.0) - 1.0;
            x = (x * 9301.0 + 49297.0) % 233280.0;
            let im = if k == 0 {
                0.0
            } else {
                2.0 * (x / 233280.0) - 1.0
            };
            g.mode_mut(k)[m] = Complex64::new(re, im) / ((1.0 + k as f64) * (1.0 + m as f64));
        }
    }
    g.enforce_reality();
    let flux = solver.energy_flux(&g).unwrap();
    let gscale = g.l2_norm_sq();
    if flux.abs() > 1e-9 * gscale.max(1.0) {
        return Err(format!("energy flux {flux:.3e} above 1e-9 x scale"));
    }

    Ok(format!(
        "poisson <= 1e-10; green vs FD {green_dev:.2e} <= 1e-4; convolution {conv_dev:.2e}; flux {:.2e}",
        flux.abs()
    ))
}
