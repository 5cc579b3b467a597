//! Command-line surface: simulation runs, operator and energy audits,
//! parameter sweeps, and rate fitting.
//!
//! Exit codes: 0 success, 2 config error, 3 diverged, 4 budget violation in
//! strict mode.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use couette_cli::config::{self, RunConfig};
use couette_cli::runner::{self, EXIT_CONFIG, EXIT_OK};
use couette_cli::{io, schema, sweeps};

#[derive(Parser)]
#[command(
    name = "couette",
    version,
    about = "Pseudo-spectral near-Couette channel runs and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOverrides {
    /// configuration file (TOML)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// override output_dir
    #[arg(long, value_name = "DIR")]
    output_dir: Option<String>,
    /// override seed
    #[arg(long)]
    seed: Option<u64>,
    /// override nu
    #[arg(long)]
    nu: Option<f64>,
    /// override t_end
    #[arg(long)]
    t_end: Option<f64>,
    /// suppress progress output
    #[arg(long)]
    quiet: bool,
    /// exit 4 when a budget verification fails
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the configured run mode end to end
    Simulate(CommonOverrides),
    /// Assemble the singular integral operators and emit the audit CSV
    OperatorAudit {
        #[command(flatten)]
        common: CommonOverrides,
        /// override grid.n_y
        #[arg(long)]
        n_y: Option<usize>,
        /// override audit.k_min
        #[arg(long)]
        k_min: Option<i64>,
        /// override audit.k_max
        #[arg(long)]
        k_max: Option<i64>,
    },
    /// Run the configured trajectory and print the budget verdicts
    EnergyAudit(CommonOverrides),
    /// Repeat a linear run across viscosities and fit the rate scaling
    SweepNu {
        #[command(flatten)]
        common: CommonOverrides,
        /// comma-separated viscosities
        #[arg(long, value_delimiter = ',', required = true)]
        nus: Vec<f64>,
        /// set each child's t_end to this multiple of nu^(-1/3)
        #[arg(long)]
        t_end_over_nu_cbrt: Option<f64>,
    },
    /// Repeat a nonlinear run across perturbation sizes eps = c sqrt(nu)
    SweepEpsilon {
        #[command(flatten)]
        common: CommonOverrides,
        /// comma-separated coefficients c
        #[arg(long, value_delimiter = ',', required = true)]
        coeffs: Vec<f64>,
    },
    /// Fit exponential decay rates from an emitted CSV
    FitRates {
        /// input CSV (norms or energy series)
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// column to fit
        #[arg(long, default_value = "norm_l2")]
        column: String,
        /// restrict to rows with this wavenumber (long-format CSVs)
        #[arg(long)]
        k: Option<i64>,
        /// discard samples before this time
        #[arg(long)]
        t_min: Option<f64>,
        /// fit on the trailing fraction of samples
        #[arg(long, default_value_t = 2.0 / 3.0)]
        window_fraction: f64,
    },
    /// Print the full annotated configuration schema
    ShowConfigSchema,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    ExitCode::from(code as u8)
}

fn load_config(common: &CommonOverrides) -> Result<RunConfig, i32> {
    let mut cfg = match RunConfig::from_path(&common.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return Err(EXIT_CONFIG);
        }
    };
    if let Some(d) = &common.output_dir {
        cfg.output_dir = d.clone();
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(nu) = common.nu {
        cfg.nu = nu;
    }
    if let Some(t) = common.t_end {
        cfg.t_end = t;
    }
    cfg.quiet |= common.quiet;
    cfg.strict |= common.strict;
    let violations = cfg.validate();
    if !violations.is_empty() {
        eprintln!("config error: {} violation(s):", violations.len());
        for v in &violations {
            eprintln!("  - {v}");
        }
        return Err(EXIT_CONFIG);
    }
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = match load_config(&common) {
                Ok(c) => c,
                Err(code) => return Ok(code),
            };
            Ok(runner::execute(&cfg, false)?.exit)
        }
        Command::OperatorAudit {
            common,
            n_y,
            k_min,
            k_max,
        } => {
            let mut cfg = match load_config(&common) {
                Ok(c) => c,
                Err(code) => return Ok(code),
            };
            cfg.mode = config::RunMode::OperatorAudit;
            if let Some(n) = n_y {
                cfg.grid.n_y = n;
            }
            if let Some(k) = k_min {
                cfg.audit.k_min = k;
            }
            if let Some(k) = k_max {
                cfg.audit.k_max = k;
            }
            let violations = cfg.validate();
            if !violations.is_empty() {
                for v in &violations {
                    eprintln!("config error: {v}");
                }
                return Ok(EXIT_CONFIG);
            }
            Ok(runner::execute(&cfg, false)?.exit)
        }
        Command::EnergyAudit(common) => {
            let cfg = match load_config(&common) {
                Ok(c) => c,
                Err(code) => return Ok(code),
            };
            Ok(runner::execute(&cfg, true)?.exit)
        }
        Command::SweepNu {
            common,
            nus,
            t_end_over_nu_cbrt,
        } => {
            let cfg = match load_config(&common) {
                Ok(c) => c,
                Err(code) => return Ok(code),
            };
            let (rows, slope, exit) = sweeps::sweep_nu(&cfg, &nus, t_end_over_nu_cbrt)?;
            for r in &rows {
                println!(
                    "nu = {:.3e}  k = {}  rate = {}  ({})",
                    r.nu,
                    r.k,
                    r.rate
                        .map(|x| format!("{x:.6e}"))
                        .unwrap_or_else(|| "-".into()),
                    r.status
                );
            }
            match slope {
                Some(s) => println!(
                    "log-log slope = {:.4} +- {:.4} (2 sigma band [{:.4}, {:.4}])",
                    s.slope,
                    2.0 * s.stderr,
                    s.slope - 2.0 * s.stderr,
                    s.slope + 2.0 * s.stderr
                ),
                None => println!("slope omitted (need >= 3 completed runs spanning 2 decades)"),
            }
            Ok(exit)
        }
        Command::SweepEpsilon { common, coeffs } => {
            let cfg = match load_config(&common) {
                Ok(c) => c,
                Err(code) => return Ok(code),
            };
            let (rows, band, exit) = sweeps::sweep_epsilon(&cfg, &coeffs)?;
            for r in &rows {
                println!(
                    "c = {:<10.3e} eps = {:.3e}  {}  (sup Eneq/Eneq0 = {})",
                    r.coeff,
                    r.epsilon,
                    r.classification,
                    r.sup_eneq_ratio
                        .map(|x| format!("{x:.3}"))
                        .unwrap_or_else(|| "-".into())
                );
            }
            match band {
                Some((lo, hi)) => println!("transition band: c in [{lo:.3e}, {hi:.3e}]"),
                None => println!("no transition observed in the scanned range"),
            }
            Ok(exit)
        }
        Command::FitRates {
            input,
            column,
            k,
            t_min,
            window_fraction,
        } => {
            let (header, rows) = io::read_csv(&input)?;
            let t_idx = header
                .iter()
                .position(|h| h == "t")
                .ok_or_else(|| anyhow::anyhow!("no t column in {}", input.display()))?;
            let c_idx = header
                .iter()
                .position(|h| h == &column)
                .ok_or_else(|| anyhow::anyhow!("no {column} column in {}", input.display()))?;
            let k_idx = header.iter().position(|h| h == "k");
            let filtered: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| match (k, k_idx) {
                    (Some(kk), Some(ki)) => (r[ki] as i64) == kk,
                    _ => true,
                })
                .map(|r| (r[t_idx], r[c_idx]))
                .collect();
            if filtered.is_empty() {
                anyhow::bail!("no samples selected");
            }
            let t: Vec<f64> = filtered.iter().map(|p| p.0).collect();
            let v: Vec<f64> = filtered.iter().map(|p| p.1).collect();
            let n = t.len();
            let lo_fraction = ((1.0 - window_fraction.clamp(0.0, 1.0)) * n as f64) as usize;
            let lo = match t_min {
                Some(tm) => t.iter().position(|&x| x >= tm).unwrap_or(lo_fraction),
                None => lo_fraction,
            };
            let (rate, r2) = couette_core::fit_decay_rate(&t, &v, lo..n)?;
            println!(
                "{column}{}: rate = {rate:.6e}  r2 = {r2:.6}  window t >= {:.4} ({} samples)",
                k.map(|kk| format!(" (k = {kk})")).unwrap_or_default(),
                t[lo],
                n - lo
            );
            Ok(EXIT_OK)
        }
        Command::ShowConfigSchema => {
            print!("{}", schema::SCHEMA);
            Ok(EXIT_OK)
        }
    }
}
