//! Parameter sweeps: independent child runs in a worker pool, one output
//! directory per child, tables assembled after the join.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{RunConfig, RunMode};
use crate::io::fmt;
use crate::runner::{self, EXIT_OK};

#[derive(Debug, Clone)]
pub struct NuRow {
    pub nu: f64,
    pub k: i64,
    pub rate: Option<f64>,
    pub r2: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, Copy)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
}

/// Per-viscosity decay-rate table with the log-log slope of rate against nu.
/// The slope is emitted only when at least three viscosities spanning two
/// decades all completed; a diverged child leaves a partial table.
pub fn sweep_nu(
    base: &RunConfig,
    nus: &[f64],
    t_end_over_nu_cbrt: Option<f64>,
) -> anyhow::Result<(Vec<NuRow>, Option<SlopeFit>, i32)> {
    if base.mode != RunMode::LinearSingleK {
        anyhow::bail!("sweep-nu requires mode = \"linear-single-k\" in the base config");
    }
    let out_root = PathBuf::from(&base.output_dir);
    std::fs::create_dir_all(&out_root)?;

    let mut children: Vec<RunConfig> = Vec::new();
    for &nu in nus {
        let mut child = base.clone();
        child.nu = nu;
        if let Some(scale) = t_end_over_nu_cbrt {
            child.t_end = scale * nu.powf(-1.0 / 3.0);
        }
        child.output_dir = out_root
            .join(format!("nu_{nu:.3e}"))
            .to_string_lossy()
            .into_owned();
        child.quiet = true;
        children.push(child);
    }

    let results: Vec<anyhow::Result<runner::Outcome>> = children
        .par_iter()
        .map(|c| runner::execute(c, false))
        .collect();

    let mut rows = Vec::new();
    for (child, result) in children.iter().zip(results) {
        let row = match result {
            Ok(outcome) => {
                let rate = outcome
                    .record
                    .rates
                    .iter()
                    .find(|r| r.label == format!("omega_l2_k{}", child.linear.k));
                NuRow {
                    nu: child.nu,
                    k: child.linear.k,
                    rate: rate.map(|r| r.rate),
                    r2: rate.map(|r| r.r2),
                    status: outcome.record.status.clone(),
                }
            }
            Err(e) => NuRow {
                nu: child.nu,
                k: child.linear.k,
                rate: None,
                r2: None,
                status: format!("error: {e}"),
            },
        };
        rows.push(row);
    }
    rows.sort_by(|a, b| b.nu.partial_cmp(&a.nu).unwrap());

    let slope = fit_slope(&rows, nus);
    write_nu_table(&out_root.join("sweep_nu.csv"), &rows, slope)?;

    let exit = if rows.iter().any(|r| r.status != "completed") {
        runner::EXIT_DIVERGED
    } else {
        EXIT_OK
    };
    Ok((rows, slope, exit))
}

fn fit_slope(rows: &[NuRow], nus: &[f64]) -> Option<SlopeFit> {
    if nus.len() < 3 {
        return None;
    }
    let max = nus.iter().cloned().fold(f64::MIN, f64::max);
    let min = nus.iter().cloned().fold(f64::MAX, f64::min);
    if max / min < 99.0 {
        return None; // need at least two decades
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.status == "completed")
        .filter_map(|r| r.rate.map(|rate| (r.nu.ln(), rate.ln())))
        .collect();
    if pts.len() != rows.len() || pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let sse: f64 = pts
        .iter()
        .map(|p| {
            let pred = my + slope * (p.0 - mx);
            (p.1 - pred) * (p.1 - pred)
        })
        .sum();
    let df = (n - 2.0).max(1.0);
    let stderr = (sse / df / sxx).sqrt();
    Some(SlopeFit { slope, stderr })
}

fn write_nu_table(path: &Path, rows: &[NuRow], slope: Option<SlopeFit>) -> anyhow::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "nu,k,rate,r2,status")?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{}",
            fmt(r.nu),
            r.k,
            r.rate.map(fmt).unwrap_or_default(),
            r.r2.map(fmt).unwrap_or_default(),
            r.status
        )?;
    }
    if let Some(s) = slope {
        writeln!(
            f,
            "# loglog_slope,{},stderr,{}",
            fmt(s.slope),
            fmt(s.stderr)
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct EpsRow {
    pub coeff: f64,
    pub epsilon: f64,
    pub classification: String,
    pub sup_eneq_ratio: Option<f64>,
    pub rate: Option<f64>,
    pub rate_matches_linear: Option<bool>,
    pub status: String,
}

/// Threshold scan in the perturbation size `eps = c sqrt(nu)`. Outcomes land
/// in {damped, departed, diverged}; the raw series stay on disk so the
/// boundary can be re-classified with a different factor.
pub fn sweep_epsilon(
    base: &RunConfig,
    coeffs: &[f64],
) -> anyhow::Result<(Vec<EpsRow>, Option<(f64, f64)>, i32)> {
    if base.mode != RunMode::Nonlinear {
        anyhow::bail!("sweep-epsilon requires mode = \"nonlinear\" in the base config");
    }
    let out_root = PathBuf::from(&base.output_dir);
    std::fs::create_dir_all(&out_root)?;

    // linear reference rate at k = 1 for the damped classification
    let mut lin = base.clone();
    lin.mode = RunMode::LinearSingleK;
    lin.linear.k = 1;
    lin.perturbation.preset = "random_band 1 1 24 1.0".into();
    lin.perturbation.epsilon_over_sqrt_nu = None;
    lin.output_dir = out_root.join("linear_ref").to_string_lossy().into_owned();
    lin.quiet = true;
    let lin_outcome = runner::execute(&lin, false)?;
    let lin_rate = lin_outcome
        .record
        .rates
        .iter()
        .find(|r| r.label == "omega_l2_k1")
        .map(|r| r.rate);

    let mut children: Vec<(f64, RunConfig)> = Vec::new();
    for &c in coeffs {
        let mut child = base.clone();
        child.perturbation.epsilon_over_sqrt_nu = Some(c);
        child.output_dir = out_root
            .join(format!("eps_{c:.3e}"))
            .to_string_lossy()
            .into_owned();
        child.quiet = true;
        children.push((c, child));
    }

    let results: Vec<anyhow::Result<runner::Outcome>> = children
        .par_iter()
        .map(|(_, c)| runner::execute(c, false))
        .collect();

    let mut rows = Vec::new();
    for ((c, child), result) in children.iter().zip(results) {
        let eps = c * base.nu.sqrt();
        let row = match result {
            Ok(outcome) => classify(*c, eps, child, &outcome, base, lin_rate)?,
            Err(e) => EpsRow {
                coeff: *c,
                epsilon: eps,
                classification: "diverged".into(),
                sup_eneq_ratio: None,
                rate: None,
                rate_matches_linear: None,
                status: format!("error: {e}"),
            },
        };
        rows.push(row);
    }
    rows.sort_by(|a, b| a.coeff.partial_cmp(&b.coeff).unwrap());

    // empirical transition band: largest damped coefficient, smallest
    // departed-or-diverged coefficient
    let max_damped = rows
        .iter()
        .filter(|r| r.classification == "damped")
        .map(|r| r.coeff)
        .fold(f64::NAN, f64::max);
    let min_departed = rows
        .iter()
        .filter(|r| r.classification != "damped")
        .map(|r| r.coeff)
        .fold(f64::NAN, f64::min);
    let band = if max_damped.is_nan() || min_departed.is_nan() {
        None
    } else {
        Some((max_damped, min_departed))
    };

    write_eps_table(&out_root.join("sweep_epsilon.csv"), &rows, band)?;
    Ok((rows, band, EXIT_OK))
}

fn classify(
    coeff: f64,
    epsilon: f64,
    child: &RunConfig,
    outcome: &runner::Outcome,
    base: &RunConfig,
    lin_rate: Option<f64>,
) -> anyhow::Result<EpsRow> {
    if outcome.record.status == "diverged" {
        return Ok(EpsRow {
            coeff,
            epsilon,
            classification: "diverged".into(),
            sup_eneq_ratio: None,
            rate: None,
            rate_matches_linear: None,
            status: outcome.record.status.clone(),
        });
    }
    // read the emitted aggregate series back (record integrity is part of
    // the contract)
    let csv = PathBuf::from(&child.output_dir).join("energy.csv");
    let (header, data) = crate::io::read_csv(&csv)?;
    let col = |name: &str| header.iter().position(|h| h == name);
    let ieneq = col("Eneq").ok_or_else(|| anyhow::anyhow!("missing Eneq column"))?;
    let eneq: Vec<f64> = data.iter().map(|r| r[ieneq]).collect();
    let e0 = eneq.first().copied().unwrap_or(0.0);

    // sustained growth: three consecutive samples above the threshold
    let threshold = base.departed_factor * e0;
    let mut streak = 0usize;
    let mut departed = false;
    let mut sup = 0.0f64;
    for &v in eneq.iter().skip(1) {
        sup = sup.max(v);
        if e0 > 0.0 && v > threshold {
            streak += 1;
            if streak >= 3 {
                departed = true;
            }
        } else {
            streak = 0;
        }
    }

    let rate = outcome
        .record
        .rates
        .iter()
        .find(|r| r.label == "E_neq")
        .map(|r| r.rate);
    let rate_matches = match (rate, lin_rate) {
        (Some(nl), Some(lin)) if lin > 0.0 => {
            // E_neq carries the exponential time weight and is quadratic in
            // the field
            let ledger = base.build_ledger();
            let predicted = 2.0 * lin - 2.0 * ledger.delta_star * base.nu.powf(1.0 / 3.0);
            Some(nl >= predicted / 2.0 && nl <= predicted * 2.0)
        }
        _ => None,
    };

    Ok(EpsRow {
        coeff,
        epsilon,
        classification: if departed {
            "departed".into()
        } else {
            "damped".into()
        },
        sup_eneq_ratio: if e0 > 0.0 { Some(sup / e0) } else { Some(0.0) },
        rate,
        rate_matches_linear: rate_matches,
        status: outcome.record.status.clone(),
    })
}

fn write_eps_table(path: &Path, rows: &[EpsRow], band: Option<(f64, f64)>) -> anyhow::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "coeff,epsilon,classification,sup_eneq_ratio,rate,rate_matches_linear,status"
    )?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{}",
            fmt(r.coeff),
            fmt(r.epsilon),
            r.classification,
            r.sup_eneq_ratio.map(fmt).unwrap_or_default(),
            r.rate.map(fmt).unwrap_or_default(),
            r.rate_matches_linear
                .map(|b| b.to_string())
                .unwrap_or_default(),
            r.status
        )?;
    }
    if let Some((lo, hi)) = band {
        writeln!(f, "# transition_band,{},{}", fmt(lo), fmt(hi))?;
    }
    Ok(())
}
