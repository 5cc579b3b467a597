//! Run configuration: strict TOML with `key = value` tables. Unknown keys
//! are errors. Validation collects every violated field before reporting.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use couette_core::EnergyLedger;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    LinearSingleK,
    LinearAllK,
    Nonlinear,
    OperatorAudit,
}

impl std::fmt::Display for RunMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RunMode::LinearSingleK => "linear-single-k",
            RunMode::LinearAllK => "linear-all-k",
            RunMode::Nonlinear => "nonlinear",
            RunMode::OperatorAudit => "operator-audit",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_n_x")]
    pub n_x: usize,
    #[serde(default = "default_n_y")]
    pub n_y: usize,
    #[serde(default = "default_dealias")]
    pub dealias_fraction: f64,
}

fn default_n_x() -> usize {
    32
}
fn default_n_y() -> usize {
    128
}
fn default_dealias() -> f64 {
    2.0 / 3.0
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_x: default_n_x(),
            n_y: default_n_y(),
            dealias_fraction: default_dealias(),
        }
    }
}

/// Ledger overrides; anything left unset comes from the worked default
/// instance for the given `k0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerConfig {
    #[serde(default = "default_k0")]
    pub k0: f64,
    pub c_alpha: Option<f64>,
    pub c_beta: Option<f64>,
    pub c_tau: Option<f64>,
    pub delta_star: Option<f64>,
    pub delta0: Option<f64>,
    pub delta1: Option<f64>,
    pub m: Option<f64>,
    pub delta: Option<f64>,
}

fn default_k0() -> f64 {
    64.0
}

impl Default for LedgerConfig {
    fn default() -> Self {
        Self {
            k0: default_k0(),
            c_alpha: None,
            c_beta: None,
            c_tau: None,
            delta_star: None,
            delta0: None,
            delta1: None,
            m: None,
            delta: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShearConfig {
    /// "zero" | "single_mode n amp" | "random_h4 seed amp"
    #[serde(default = "default_shear_preset")]
    pub preset: String,
    /// one-column text file of W values on the nodes; overrides `preset`
    pub file: Option<String>,
}

fn default_shear_preset() -> String {
    "zero".into()
}

impl Default for ShearConfig {
    fn default() -> Self {
        Self {
            preset: default_shear_preset(),
            file: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    /// "zero" | "single_mode k n amp" | "random_band seed k_band n_band eps"
    #[serde(default = "default_pert_preset")]
    pub preset: String,
    /// when set, rescale the realized field so the anisotropic norm equals
    /// `epsilon_over_sqrt_nu * sqrt(nu)`
    pub epsilon_over_sqrt_nu: Option<f64>,
}

fn default_pert_preset() -> String {
    "zero".into()
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self {
            preset: default_pert_preset(),
            epsilon_over_sqrt_nu: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearConfig {
    /// mode for linear-single-k
    #[serde(default = "default_k")]
    pub k: i64,
    /// modes for linear-all-k
    #[serde(default = "default_ks")]
    pub ks: Vec<i64>,
}

fn default_k() -> i64 {
    1
}
fn default_ks() -> Vec<i64> {
    vec![1, 2, 4]
}

impl Default for LinearConfig {
    fn default() -> Self {
        Self {
            k: default_k(),
            ks: default_ks(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    #[serde(default = "default_k_min")]
    pub k_min: i64,
    #[serde(default = "default_k_max")]
    pub k_max: i64,
}

fn default_k_min() -> i64 {
    1
}
fn default_k_max() -> i64 {
    64
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            k_min: default_k_min(),
            k_max: default_k_max(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: RunMode,
    pub nu: f64,
    pub t_end: f64,
    /// fixed step; when absent the step is set once from the advective CFL
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub quiet: bool,
    /// abort when the tracked energy exceeds this multiple of its initial value
    #[serde(default = "default_divergence_factor")]
    pub divergence_factor: f64,
    /// sweep-epsilon classification boundary
    #[serde(default = "default_departed_factor")]
    pub departed_factor: f64,
    /// verification hook: drop the transport and feedback terms
    #[serde(default)]
    pub disable_transport: bool,
    /// additionally emit the per-k long-format energy CSV on nonlinear runs
    #[serde(default)]
    pub per_k_csv: bool,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub ledger: LedgerConfig,
    #[serde(default)]
    pub shear: ShearConfig,
    #[serde(default)]
    pub perturbation: PerturbationConfig,
    #[serde(default)]
    pub linear: LinearConfig,
    #[serde(default)]
    pub audit: AuditConfig,
}

fn default_cfl() -> f64 {
    0.5
}
fn default_sample_interval() -> f64 {
    0.5
}
fn default_output_dir() -> String {
    "runs/out".into()
}
fn default_divergence_factor() -> f64 {
    1e6
}
fn default_departed_factor() -> f64 {
    2.0
}

impl RunConfig {
    pub fn from_path(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| anyhow::anyhow!("config: {e}"))?;
        Ok(cfg)
    }

    /// Every violated field, not just the first.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.nu > 0.0) {
            v.push(format!("nu = {} must be > 0", self.nu));
        }
        if !(self.t_end > 0.0) {
            v.push(format!("t_end = {} must be > 0", self.t_end));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                v.push(format!("dt = {dt} must be > 0"));
            }
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            v.push(format!("cfl = {} must be in (0, 1]", self.cfl));
        }
        if !(self.sample_interval > 0.0) {
            v.push(format!(
                "sample_interval = {} must be > 0",
                self.sample_interval
            ));
        }
        if !(self.divergence_factor > 1.0) {
            v.push(format!(
                "divergence_factor = {} must be > 1",
                self.divergence_factor
            ));
        }
        if self.grid.n_y < 8 {
            v.push(format!("grid.n_y = {} must be >= 8", self.grid.n_y));
        }
        if self.grid.n_x < 1 {
            v.push(format!("grid.n_x = {} must be >= 1", self.grid.n_x));
        }
        if !(self.grid.dealias_fraction > 0.0 && self.grid.dealias_fraction <= 1.0) {
            v.push(format!(
                "grid.dealias_fraction = {} must be in (0, 1]",
                self.grid.dealias_fraction
            ));
        }
        let band = {
            let from_fraction =
                (self.grid.dealias_fraction * self.grid.n_x as f64 / 2.0).floor() as i64;
            from_fraction.min((self.grid.n_x as i64 - 1) / 2).max(0)
        };
        if self.mode == RunMode::LinearSingleK {
            if self.linear.k == 0 {
                v.push("linear.k must be nonzero".into());
            } else if self.linear.k.abs() > band {
                v.push(format!(
                    "linear.k = {} outside retained band |k| <= {band}",
                    self.linear.k
                ));
            }
        }
        if self.mode == RunMode::LinearAllK {
            if self.linear.ks.is_empty() {
                v.push("linear.ks must be nonempty".into());
            }
            for &k in &self.linear.ks {
                if k == 0 {
                    v.push("linear.ks must not contain 0".into());
                } else if k.abs() > band {
                    v.push(format!(
                        "linear.ks entry {k} outside retained band |k| <= {band}"
                    ));
                }
            }
        }
        if self.audit.k_min < 1 || self.audit.k_max < self.audit.k_min {
            v.push(format!(
                "audit range [{}, {}] must satisfy 1 <= k_min <= k_max",
                self.audit.k_min, self.audit.k_max
            ));
        }
        if let Some(c) = self.perturbation.epsilon_over_sqrt_nu {
            if c < 0.0 {
                v.push(format!(
                    "perturbation.epsilon_over_sqrt_nu = {c} must be >= 0"
                ));
            }
        }
        if couette_core::ShearPreset::parse(&self.shear.preset).is_err()
            && self.shear.file.is_none()
        {
            v.push(format!(
                "shear.preset = {:?} is not a known preset",
                self.shear.preset
            ));
        }
        if couette_core::PerturbationPreset::parse(&self.perturbation.preset).is_err() {
            v.push(format!(
                "perturbation.preset = {:?} is not a known preset",
                self.perturbation.preset
            ));
        }
        v
    }

    /// Warnings that do not reject the run (exploration allowed).
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let ledger = self.build_ledger();
        if !(ledger.m > 2.0 / 3.0 && ledger.m < 1.0) {
            w.push(format!("ledger.m = {} is outside (2/3, 1)", ledger.m));
        }
        for msg in ledger.validate() {
            w.push(format!("ledger constraint: {msg}"));
        }
        w
    }

    pub fn build_ledger(&self) -> EnergyLedger {
        let mut ledger = EnergyLedger::defaults(self.nu, self.ledger.k0);
        if let Some(x) = self.ledger.c_alpha {
            ledger.c_alpha = x;
        }
        if let Some(x) = self.ledger.c_beta {
            ledger.c_beta = x;
        }
        if let Some(x) = self.ledger.c_tau {
            ledger.c_tau = x;
        }
        if let Some(x) = self.ledger.delta_star {
            ledger.delta_star = x;
        }
        if let Some(x) = self.ledger.delta0 {
            ledger.delta0 = x;
        }
        if let Some(x) = self.ledger.delta1 {
            ledger.delta1 = x;
        }
        if let Some(x) = self.ledger.m {
            ledger.m = x;
        }
        if let Some(x) = self.ledger.delta {
            ledger.delta = x;
        }
        ledger
    }

    /// Canonical text echo of the resolved configuration.
    pub fn canonical_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Content hash of the canonical echo.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical_toml().as_bytes());
        let digest = h.finalize();
        let mut s = String::with_capacity(64);
        for b in digest {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }
}
