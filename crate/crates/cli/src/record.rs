//! Persistent run record: config echo, content hash, artifact paths, fitted
//! rates, verification verdicts, wall-clock stats.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use couette_core::{BootstrapReport, LinearBudgetReport};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Outputs {
    pub energy_csv: Option<String>,
    pub per_k_csv: Option<String>,
    pub norms_csv: Option<String>,
    pub audit_csv: Option<String>,
    pub sweep_csv: Option<String>,
    #[serde(default)]
    pub checkpoints: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateFit {
    pub label: String,
    pub rate: f64,
    pub r2: f64,
    pub window_t_min: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetSummary {
    pub k: i64,
    pub pass: bool,
    pub samples: usize,
    pub violations: usize,
    pub unflagged_violations: usize,
    pub pass_fraction: f64,
    pub empirical_delta_star: f64,
    pub integrated_ratio: f64,
    pub damping_integral: f64,
    pub best_damping_constant: f64,
    pub initial_energy: f64,
    #[serde(default)]
    pub ledger_violations: Vec<String>,
}

impl BudgetSummary {
    pub fn from_report(r: &LinearBudgetReport) -> Self {
        Self {
            k: r.k,
            pass: r.pass,
            samples: r.samples.len(),
            violations: r.violations,
            unflagged_violations: r.unflagged_violations,
            pass_fraction: r.pass_fraction,
            empirical_delta_star: r.empirical_delta_star,
            integrated_ratio: r.integrated_ratio,
            damping_integral: r.damping_integral,
            best_damping_constant: r.best_damping_constant,
            initial_energy: r.initial_energy,
            ledger_violations: r.ledger_violations.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub c0_fitted: f64,
    pub sup_ratio: f64,
    pub monotone_bound_holds: bool,
    pub smallness_satisfied: bool,
    pub integrated_holds: bool,
    pub dissipation_integral: f64,
    pub violations: usize,
    pub samples: usize,
}

impl BootstrapSummary {
    pub fn from_report(r: &BootstrapReport) -> Self {
        Self {
            c0_fitted: r.c0_fitted,
            sup_ratio: r.sup_ratio,
            monotone_bound_holds: r.monotone_bound_holds,
            smallness_satisfied: r.smallness_satisfied,
            integrated_holds: r.integrated_holds,
            dissipation_integral: r.dissipation_integral,
            violations: r.violations,
            samples: r.samples,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub status: String,
    pub mode: String,
    pub content_hash: String,
    pub wall_clock_secs: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
    pub outputs: Outputs,
    #[serde(default)]
    pub rates: Vec<RateFit>,
    #[serde(default)]
    pub budget: Vec<BudgetSummary>,
    pub bootstrap: Option<BootstrapSummary>,
    /// canonical echo of the resolved configuration
    pub config: String,
}

impl RunRecord {
    pub fn save(&self, dir: &Path) -> anyhow::Result<PathBuf> {
        let path = dir.join("record.toml");
        let text = toml::to_string(self).map_err(|e| anyhow::anyhow!("record: {e}"))?;
        std::fs::write(&path, text)?;
        Ok(path)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| anyhow::anyhow!("record: {e}"))
    }

    /// Every referenced artifact must exist on disk.
    pub fn verify_outputs(&self, dir: &Path) -> Vec<String> {
        let mut missing = Vec::new();
        let mut check = |p: &Option<String>| {
            if let Some(p) = p {
                if !dir.join(p).exists() {
                    missing.push(p.clone());
                }
            }
        };
        check(&self.outputs.energy_csv);
        check(&self.outputs.per_k_csv);
        check(&self.outputs.norms_csv);
        check(&self.outputs.audit_csv);
        check(&self.outputs.sweep_csv);
        for c in &self.outputs.checkpoints {
            if !dir.join(c).exists() {
                missing.push(c.clone());
            }
        }
        missing
    }
}
