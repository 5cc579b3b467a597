//! End-to-end execution of the four run modes, with sampling, divergence
//! detection, verification, and artifact emission.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use couette_core::{
    aggregate, assemble_sio, dissipation_k, energy_k, fit_decay_rate, operator_audit,
    verify_linear_budget, verify_nonlinear_bootstrap, ChannelGrid, Checkpoint, CoreError,
    EnergyLedger, LinearModeState, LinearSeries, LinearSolver, ModeEnergy, NonlinearSolver,
    NonlinearState, PerturbationPreset, ShearPreset, ShearProfile, SineBasis, SpectralField,
};

use crate::config::{RunConfig, RunMode};
use crate::io;
use crate::record::{BootstrapSummary, BudgetSummary, Outputs, RateFit, RunRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug)]
pub struct Outcome {
    pub record: RunRecord,
    pub record_path: PathBuf,
    pub exit: i32,
}

/// Execute a validated configuration end to end. Deterministic given the
/// seed; all artifacts land in `cfg.output_dir`.
pub fn execute(cfg: &RunConfig, verbose_verdicts: bool) -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let out_dir = PathBuf::from(&cfg.output_dir);
    std::fs::create_dir_all(&out_dir)?;
    let warnings = cfg.warnings();
    if !cfg.quiet {
        for w in &warnings {
            eprintln!("warning: {w}");
        }
    }

    let mut record = RunRecord {
        status: "completed".into(),
        mode: cfg.mode.to_string(),
        content_hash: cfg.content_hash(),
        wall_clock_secs: 0.0,
        warnings,
        outputs: Outputs::default(),
        rates: Vec::new(),
        budget: Vec::new(),
        bootstrap: None,
        config: cfg.canonical_toml(),
    };

    let mut exit = EXIT_OK;
    match cfg.mode {
        RunMode::OperatorAudit => run_operator_audit(cfg, &out_dir, &mut record)?,
        RunMode::LinearSingleK => {
            exit = run_linear(
                cfg,
                &[cfg.linear.k],
                &out_dir,
                &mut record,
                verbose_verdicts,
            )?
        }
        RunMode::LinearAllK => {
            exit = run_linear(cfg, &cfg.linear.ks, &out_dir, &mut record, verbose_verdicts)?
        }
        RunMode::Nonlinear => exit = run_nonlinear(cfg, &out_dir, &mut record, verbose_verdicts)?,
    }

    record.wall_clock_secs = start.elapsed().as_secs_f64();
    let record_path = record.save(&out_dir)?;
    if !cfg.quiet {
        println!("record: {}", record_path.display());
    }
    Ok(Outcome {
        record,
        record_path,
        exit,
    })
}

fn build_grid(cfg: &RunConfig) -> anyhow::Result<ChannelGrid> {
    Ok(ChannelGrid::new(
        cfg.grid.n_x,
        cfg.grid.n_y,
        cfg.grid.dealias_fraction,
    )?)
}

fn build_shear(
    cfg: &RunConfig,
    basis: &SineBasis,
    y_nodes: &[f64],
    ledger: &EnergyLedger,
) -> anyhow::Result<(ShearProfile, Vec<String>)> {
    let mut warnings = Vec::new();
    let coeffs = match &cfg.shear.file {
        Some(path) => couette_core::load_shear_values(Path::new(path), basis)?,
        None => ShearPreset::parse(&cfg.shear.preset)?.coefficients(basis.len()),
    };
    let h4 = couette_core::sobolev_norm_h4(&coeffs);
    if h4 > ledger.delta0 {
        warnings.push(format!(
            "shear H4 norm {h4:.3e} exceeds ledger delta0 = {:.3e}; budget hypotheses not met",
            ledger.delta0
        ));
    }
    Ok((ShearProfile::new(coeffs, cfg.nu, basis, y_nodes)?, warnings))
}

fn build_perturbation(
    cfg: &RunConfig,
    grid: &ChannelGrid,
    ledger: &EnergyLedger,
) -> anyhow::Result<SpectralField> {
    let preset = PerturbationPreset::parse(&cfg.perturbation.preset)?;
    let mut field = preset.realize(grid, ledger.m, cfg.nu)?;
    if let Some(c) = cfg.perturbation.epsilon_over_sqrt_nu {
        let target = c * cfg.nu.sqrt();
        let now = couette_core::anisotropic_norm(&field, ledger.m, cfg.nu);
        if now > 0.0 {
            field.scale(target / now);
        }
    }
    Ok(field)
}

/// Fixed step size for the whole run: configured dt, or the advective bound
/// scaled by the CFL factor, then adjusted so the horizon is an integer
/// number of steps (budget checks need uniform spacing).
fn fix_dt(cfg: &RunConfig, bound: f64) -> (f64, usize, usize) {
    let dt0 = cfg
        .dt
        .unwrap_or_else(|| (cfg.cfl * bound).min(cfg.sample_interval));
    let steps = (cfg.t_end / dt0).ceil().max(1.0) as usize;
    let dt = cfg.t_end / steps as f64;
    let sample_every = ((cfg.sample_interval / dt).round() as usize).max(1);
    (dt, steps, sample_every)
}

fn fit_window_start(t: &[f64], nu: f64) -> usize {
    let n = t.len();
    let t_min = 2.0 * nu.powf(-1.0 / 3.0);
    let lo = t
        .iter()
        .position(|&x| x >= t_min)
        .unwrap_or(n / 3)
        .max(n / 3);
    if n - lo < 10 {
        n / 3
    } else {
        lo
    }
}

fn run_operator_audit(
    cfg: &RunConfig,
    out_dir: &Path,
    record: &mut RunRecord,
) -> anyhow::Result<()> {
    let grid = build_grid(cfg)?;
    let ledger = cfg.build_ledger();
    let ks: Vec<i64> = (cfg.audit.k_min..=cfg.audit.k_max).collect();
    let rows = operator_audit(&grid, &ks, ledger.c_tau, ledger.delta)?;
    let path = out_dir.join("operator_audit.csv");
    io::write_audit_csv(&path, &rows)?;
    record.outputs.audit_csv = Some("operator_audit.csv".into());
    if !cfg.quiet {
        let jmax = rows.iter().map(|r| r.norm_j).fold(0.0, f64::max);
        println!(
            "operator audit: {} wavenumbers, max |J_k| = {jmax:.6}",
            rows.len()
        );
    }
    Ok(())
}

struct LinearRunResult {
    k: i64,
    series: LinearSeries,
    diverged: bool,
    final_state: LinearModeState,
}

fn run_linear(
    cfg: &RunConfig,
    ks: &[i64],
    out_dir: &Path,
    record: &mut RunRecord,
    verbose: bool,
) -> anyhow::Result<i32> {
    let grid = build_grid(cfg)?;
    let ledger = cfg.build_ledger();
    let mut solver = LinearSolver::new(grid.clone());
    solver.disable_transport = cfg.disable_transport;
    let basis = solver.basis().clone();
    let (profile, shear_warnings) = build_shear(cfg, &basis, grid.y_nodes(), &ledger)?;
    record.warnings.extend(shear_warnings);
    let field = build_perturbation(cfg, &grid, &ledger)?;

    let mut results: Vec<LinearRunResult> = Vec::new();
    for &k in ks {
        let omega0 = field.mode(k).to_vec();
        if omega0.iter().all(|c| c.norm_sqr() == 0.0) && cfg.perturbation.preset != "zero" {
            record.warnings.push(format!(
                "initial data has no content at k = {k}; run is trivial"
            ));
        }
        let sio = assemble_sio(k, &grid, ledger.delta)?;
        let state0 = LinearModeState::new(k, omega0, profile.clone())?;
        let (dt, steps, sample_every) = fix_dt(cfg, solver.dt_bound(&state0));

        let mut series = LinearSeries {
            k,
            ..Default::default()
        };
        let mut state = state0;
        let mut diverged = false;
        let mut e_first = None;
        for i in 0..=steps {
            if i % sample_every == 0 {
                let e = energy_k(&state.omega, k, &ledger, &sio, &basis)?;
                let d = dissipation_k(&state.omega, k, &ledger);
                series.t.push(state.t);
                series.e_k.push(e);
                series.d_total.push(d.total(&ledger));
                series.d_parts.push(d);
                series
                    .norm_l2
                    .push(state.omega.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt());
                let e0 = *e_first.get_or_insert(e);
                if !e.is_finite() || e > cfg.divergence_factor * e0.max(f64::MIN_POSITIVE) {
                    diverged = true;
                    break;
                }
            }
            if i < steps {
                state = solver.step(&state, dt)?;
            }
        }
        results.push(LinearRunResult {
            k,
            series,
            diverged,
            final_state: state,
        });
    }

    // per-k long CSV plus the norm series
    let mut per_k_rows = Vec::new();
    let mut norm_rows = Vec::new();
    for r in &results {
        for i in 0..r.series.t.len() {
            per_k_rows.push(io::PerKRow {
                t: r.series.t[i],
                k: r.k,
                e_k: r.series.e_k[i],
                d: r.series.d_parts[i],
            });
            norm_rows.push((r.series.t[i], r.k, r.series.norm_l2[i]));
        }
    }
    io::write_per_k_csv(&out_dir.join("energy_per_k.csv"), &per_k_rows)?;
    io::write_norms_csv(&out_dir.join("norms.csv"), &norm_rows)?;
    record.outputs.per_k_csv = Some("energy_per_k.csv".into());
    record.outputs.norms_csv = Some("norms.csv".into());

    // final checkpoint holding every evolved mode
    let k_abs_max = ks.iter().map(|k| k.unsigned_abs()).max().unwrap_or(1) as i64;
    let mut chk_field = SpectralField::zeros(k_abs_max, cfg.grid.n_y);
    for r in &results {
        chk_field
            .mode_mut(r.k)
            .copy_from_slice(&r.final_state.omega);
        let conj: Vec<_> = r.final_state.omega.iter().map(|c| c.conj()).collect();
        chk_field.mode_mut(-r.k).copy_from_slice(&conj);
    }
    let profile_final = results
        .first()
        .map(|r| r.final_state.profile.clone())
        .unwrap_or_else(|| profile.clone());
    write_final_checkpoint(cfg, out_dir, record, chk_field, &profile_final)?;

    // verification and rate fits
    let mut any_diverged = false;
    let mut any_unflagged = false;
    let transient_time = 2.0 * cfg.nu.powf(-1.0 / 3.0);
    for r in &results {
        if r.diverged {
            any_diverged = true;
            continue;
        }
        if r.series.t.len() >= 10 {
            let lo = fit_window_start(&r.series.t, cfg.nu);
            match fit_decay_rate(&r.series.t, &r.series.norm_l2, lo..r.series.t.len()) {
                Ok((rate, r2)) => record.rates.push(RateFit {
                    label: format!("omega_l2_k{}", r.k),
                    rate,
                    r2,
                    window_t_min: r.series.t[lo],
                }),
                Err(e) => record.warnings.push(format!("rate fit k={}: {e}", r.k)),
            }
        }
        if r.series.t.len() >= 3 {
            let report = verify_linear_budget(&r.series, &ledger, transient_time)?;
            if verbose || !cfg.quiet {
                println!(
                    "budget k={}: {} ({} samples, {} violations, {} unflagged, empirical delta* = {:.3e}, integrated ratio = {:.3})",
                    r.k,
                    if report.pass { "PASS" } else { "FAIL" },
                    report.samples.len(),
                    report.violations,
                    report.unflagged_violations,
                    report.empirical_delta_star,
                    report.integrated_ratio
                );
                for v in &report.ledger_violations {
                    println!("  ledger: {v}");
                }
            }
            if report.unflagged_violations > 0 || !report.ledger_violations.is_empty() {
                any_unflagged = true;
            }
            record.budget.push(BudgetSummary::from_report(&report));
        }
    }

    if any_diverged {
        record.status = "diverged".into();
        return Ok(EXIT_DIVERGED);
    }
    if cfg.strict && any_unflagged {
        return Ok(EXIT_BUDGET);
    }
    Ok(EXIT_OK)
}

fn run_nonlinear(
    cfg: &RunConfig,
    out_dir: &Path,
    record: &mut RunRecord,
    verbose: bool,
) -> anyhow::Result<i32> {
    let grid = build_grid(cfg)?;
    let ledger = cfg.build_ledger();
    let solver = NonlinearSolver::new(grid.clone());
    let basis = solver.basis().clone();
    let (profile, shear_warnings) = build_shear(cfg, &basis, grid.y_nodes(), &ledger)?;
    record.warnings.extend(shear_warnings);
    let field = build_perturbation(cfg, &grid, &ledger)?;

    let mut sios = BTreeMap::new();
    for k in grid.wavenumbers() {
        if k != 0 {
            sios.insert(k, assemble_sio(k, &grid, ledger.delta)?);
        }
    }

    let state0 = NonlinearState::new(field, profile)?;
    let (dt, steps, sample_every) = fix_dt(cfg, solver.dt_bound(&state0)?);

    let mut snaps = Vec::new();
    let mut state = state0;
    let mut diverged = false;
    let mut e_first: Option<f64> = None;
    for i in 0..=steps {
        if i % sample_every == 0 {
            let mut per = Vec::new();
            for (k, w) in state.omega.iter() {
                if k == 0 {
                    continue;
                }
                per.push(ModeEnergy {
                    k,
                    e_k: energy_k(w, k, &ledger, &sios[&k], &basis)?,
                    d: dissipation_k(w, k, &ledger),
                });
            }
            let snap = aggregate(state.t, state.omega.mode(0), per, &ledger);
            let e0 = *e_first.get_or_insert(snap.e);
            let blown =
                !snap.e.is_finite() || snap.e > cfg.divergence_factor * e0.max(f64::MIN_POSITIVE);
            snaps.push(snap);
            if blown {
                diverged = true;
                break;
            }
        }
        if i < steps {
            match solver.step(&state, dt) {
                Ok(next) => state = next,
                // a mid-run CFL failure means the advective speed blew past
                // the fixed step; classified with the divergence path
                Err(CoreError::CflViolation { .. }) => {
                    diverged = true;
                    record
                        .warnings
                        .push(format!("advective CFL exceeded at t = {:.3}", state.t));
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }

    io::write_aggregate_csv(&out_dir.join("energy.csv"), &snaps)?;
    record.outputs.energy_csv = Some("energy.csv".into());
    if cfg.per_k_csv {
        let mut rows = Vec::new();
        for s in &snaps {
            for m in &s.per_mode {
                rows.push(io::PerKRow {
                    t: s.t,
                    k: m.k,
                    e_k: m.e_k,
                    d: m.d,
                });
            }
        }
        io::write_per_k_csv(&out_dir.join("energy_per_k.csv"), &rows)?;
        record.outputs.per_k_csv = Some("energy_per_k.csv".into());
    }
    write_final_checkpoint(cfg, out_dir, record, state.omega.clone(), &state.profile)?;

    if snaps.len() >= 10 && !diverged {
        let t: Vec<f64> = snaps.iter().map(|s| s.t).collect();
        let eneq: Vec<f64> = snaps.iter().map(|s| s.e_neq).collect();
        if eneq.iter().all(|&v| v > 0.0) {
            let lo = fit_window_start(&t, cfg.nu);
            match fit_decay_rate(&t, &eneq, lo..t.len()) {
                Ok((rate, r2)) => record.rates.push(RateFit {
                    label: "E_neq".into(),
                    rate,
                    r2,
                    window_t_min: t[lo],
                }),
                Err(e) => record.warnings.push(format!("rate fit E_neq: {e}")),
            }
        }
    }

    let mut strict_fail = false;
    if snaps.len() >= 3 {
        let report = verify_nonlinear_bootstrap(&snaps, &ledger)?;
        if verbose || !cfg.quiet {
            println!(
                "bootstrap: sup E/E(0) = {:.4} ({}), C0 fitted = {:.3e}, integrated {}",
                report.sup_ratio,
                if report.monotone_bound_holds {
                    "monotone"
                } else {
                    "NOT monotone"
                },
                report.c0_fitted,
                if report.integrated_holds {
                    "PASS"
                } else {
                    "FAIL"
                }
            );
        }
        strict_fail = !report.monotone_bound_holds && report.smallness_satisfied;
        record.bootstrap = Some(BootstrapSummary::from_report(&report));
    }

    if diverged {
        record.status = "diverged".into();
        return Ok(EXIT_DIVERGED);
    }
    if cfg.strict && strict_fail {
        return Ok(EXIT_BUDGET);
    }
    Ok(EXIT_OK)
}

fn write_final_checkpoint(
    cfg: &RunConfig,
    out_dir: &Path,
    record: &mut RunRecord,
    omega: SpectralField,
    profile: &ShearProfile,
) -> anyhow::Result<()> {
    let hash_prefix = u64::from_str_radix(&cfg.content_hash()[..16], 16).unwrap_or(0);
    let chk = Checkpoint {
        n_x: cfg.grid.n_x as u32,
        n_y: cfg.grid.n_y as u32,
        nu: cfg.nu,
        t: profile.t(),
        params_hash: hash_prefix,
        omega,
        shear_coeffs: profile.w_coeffs().to_vec(),
    };
    let name = "final.chk";
    couette_core::write_checkpoint(&out_dir.join(name), &chk)?;
    record.outputs.checkpoints.push(name.into());
    record.outputs.checkpoints.push(format!("{name}.meta.toml"));
    Ok(())
}
