//! Deterministic CSV emission. Floats are printed with a fixed scientific
//! format so identical runs produce byte-identical files.

use std::io::Write;
use std::path::Path;

use couette_core::{DissipationParts, EnergySnapshot, OperatorAuditRow};

pub fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

pub struct PerKRow {
    pub t: f64,
    pub k: i64,
    pub e_k: f64,
    pub d: DissipationParts,
}

pub fn write_per_k_csv(path: &Path, rows: &[PerKRow]) -> anyhow::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "t,k,Ek,Dk_gamma,Dk_alpha,Dk_beta,Dk_tau,Dk_taualpha")?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{}",
            fmt(r.t),
            r.k,
            fmt(r.e_k),
            fmt(r.d.gamma),
            fmt(r.d.alpha),
            fmt(r.d.beta),
            fmt(r.d.tau),
            fmt(r.d.tau_alpha)
        )?;
    }
    Ok(())
}

pub fn write_aggregate_csv(path: &Path, snaps: &[EnergySnapshot]) -> anyhow::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "t,E0,Eneq,E,D0,Dneq,DE,D")?;
    for s in snaps {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{}",
            fmt(s.t),
            fmt(s.e0),
            fmt(s.e_neq),
            fmt(s.e),
            fmt(s.d0),
            fmt(s.d_neq),
            fmt(s.d_e),
            fmt(s.d)
        )?;
    }
    Ok(())
}

pub fn write_norms_csv(path: &Path, rows: &[(f64, i64, f64)]) -> anyhow::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "t,k,norm_l2")?;
    for (t, k, n) in rows {
        writeln!(f, "{},{},{}", fmt(*t), k, fmt(*n))?;
    }
    Ok(())
}

pub fn write_audit_csv(path: &Path, rows: &[OperatorAuditRow]) -> anyhow::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "k,norm_J,norm_H_over_k,selfadj_residual,coercivity_min_eig,n_y"
    )?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{}",
            r.k,
            fmt(r.norm_j),
            fmt(r.norm_h_over_k),
            fmt(r.selfadj_residual),
            fmt(r.coercivity_min_eig),
            r.n_y
        )?;
    }
    Ok(())
}

/// Minimal CSV reader for the fit-rates subcommand: header plus float/int
/// columns.
pub fn read_csv(path: &Path) -> anyhow::Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| anyhow::anyhow!("empty csv"))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| anyhow::anyhow!("{}:{}: {e}", path.display(), i + 2))?;
        if row.len() != header.len() {
            anyhow::bail!(
                "{}:{}: expected {} columns",
                path.display(),
                i + 2,
                header.len()
            );
        }
        rows.push(row);
    }
    Ok((header, rows))
}
