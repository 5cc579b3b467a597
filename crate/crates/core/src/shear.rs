//! Background shear state: the wall-vanishing vorticity perturbation W is
//! advanced by the exact Dirichlet heat semigroup, and the velocity profile
//! U is rebuilt from it through the stream correction.
//!
//! With `Psi'' = W`, `Psi(+-1) = 0`, the profile is `U = y + Psi'`, so
//! `U' = 1 + W` and `U'' = W'`. All three are recomputed from the sine
//! coefficients of W rather than assumed, so discretization inconsistencies
//! show up in the reconstruction tests instead of hiding.

use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CoreError;
use crate::grid::{mode_lambda, mode_mu, SineBasis};

const BOUNDARY_TRACE_TOL: f64 = 1e-10;

/// Shear state at one instant: sine coefficients of W plus the reconstructed
/// profile on the collocation nodes. Immutable snapshot; stepping returns a
/// fresh value.
#[derive(Debug, Clone)]
pub struct ShearProfile {
    t: f64,
    nu: f64,
    w_coeffs: Vec<f64>,
    u_values: Vec<f64>,
    u_prime: Vec<f64>,
    u_double_prime: Vec<f64>,
}

impl ShearProfile {
    pub fn new(
        w_coeffs: Vec<f64>,
        nu: f64,
        basis: &SineBasis,
        y_nodes: &[f64],
    ) -> Result<Self, CoreError> {
        if w_coeffs.len() != basis.len() {
            return Err(CoreError::LengthMismatch {
                expected: basis.len(),
                got: w_coeffs.len(),
            });
        }
        let (u_values, u_prime, u_double_prime) = reconstruct_shear(&w_coeffs, basis, y_nodes)?;
        Ok(Self {
            t: 0.0,
            nu,
            w_coeffs,
            u_values,
            u_prime,
            u_double_prime,
        })
    }

    /// Couette: W = 0, U = y.
    pub fn couette(nu: f64, basis: &SineBasis, y_nodes: &[f64]) -> Self {
        Self::new(vec![0.0; basis.len()], nu, basis, y_nodes).expect("zero profile is valid")
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn w_coeffs(&self) -> &[f64] {
        &self.w_coeffs
    }

    pub fn u_values(&self) -> &[f64] {
        &self.u_values
    }

    pub fn u_prime(&self) -> &[f64] {
        &self.u_prime
    }

    pub fn u_double_prime(&self) -> &[f64] {
        &self.u_double_prime
    }

    pub fn u_max(&self) -> f64 {
        self.u_values.iter().fold(0.0_f64, |a, &v| a.max(v.abs()))
    }

    pub fn u_double_prime_max(&self) -> f64 {
        self.u_double_prime
            .iter()
            .fold(0.0_f64, |a, &v| a.max(v.abs()))
    }

    /// Advance W by the heat semigroup: coefficient n decays by
    /// `exp(-nu mu_n^2 dt)`. Exact, so two half steps equal one full step.
    pub fn heat_step(
        &self,
        dt: f64,
        basis: &SineBasis,
        y_nodes: &[f64],
    ) -> Result<Self, CoreError> {
        if dt < 0.0 {
            return Err(CoreError::NegativeDt(dt));
        }
        let w: Vec<f64> = self
            .w_coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| c * (-self.nu * mode_lambda(m) * dt).exp())
            .collect();
        let (u_values, u_prime, u_double_prime) = reconstruct_shear(&w, basis, y_nodes)?;
        Ok(Self {
            t: self.t + dt,
            nu: self.nu,
            w_coeffs: w,
            u_values,
            u_prime,
            u_double_prime,
        })
    }

    /// Discrete H1 norm of W; the heat semigroup contracts it.
    pub fn w_h1_norm(&self) -> f64 {
        self.w_coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| (1.0 + mode_lambda(m)) * c * c)
            .sum::<f64>()
            .sqrt()
    }

    pub fn w_h4_norm(&self) -> f64 {
        sobolev_norm_h4(&self.w_coeffs)
    }
}

/// Rebuild `(U, U', U'')` on the nodes from the sine coefficients of W.
pub fn reconstruct_shear(
    w_coeffs: &[f64],
    basis: &SineBasis,
    y_nodes: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), CoreError> {
    // stream correction Psi: psi_n = -w_n / mu_n^2, so d_y Psi has cosine
    // coefficients -w_n / mu_n
    let dpsi: Vec<f64> = w_coeffs
        .iter()
        .enumerate()
        .map(|(m, c)| -c / mode_mu(m))
        .collect();
    let correction = basis.synthesize_cosine_real(&dpsi)?;
    let u_values: Vec<f64> = y_nodes
        .iter()
        .zip(&correction)
        .map(|(&y, &c)| y + c)
        .collect();

    let w_values = basis.synthesize_real(w_coeffs)?;
    let u_prime: Vec<f64> = w_values.iter().map(|w| 1.0 + w).collect();

    // U'' = d3/dy3 Psi: cosine coefficients  mu_n w_n (equivalently d_y W)
    let dw: Vec<f64> = w_coeffs
        .iter()
        .enumerate()
        .map(|(m, c)| c * mode_mu(m))
        .collect();
    let u_double_prime = basis.synthesize_cosine_real(&dw)?;

    Ok((u_values, u_prime, u_double_prime))
}

/// Discrete H4 norm: sine-mode weights `(1 + mu_n^2)^4` against `|c_n|^2`,
/// square-rooted.
pub fn sobolev_norm_h4(w_coeffs: &[f64]) -> f64 {
    w_coeffs
        .iter()
        .enumerate()
        .map(|(m, c)| {
            let wgt = (1.0 + mode_lambda(m)).powi(4);
            wgt * c * c
        })
        .sum::<f64>()
        .sqrt()
}

/// Named initial shear perturbations.
#[derive(Debug, Clone, PartialEq)]
pub enum ShearPreset {
    Zero,
    /// `amp * sin(n pi (y+1)/2)`
    SingleMode {
        n: usize,
        amp: f64,
    },
    /// band-limited random coefficients rescaled to H4 norm `amp`
    RandomH4 {
        seed: u64,
        amp: f64,
    },
}

impl ShearPreset {
    /// Parse the compact form: "zero" | "single_mode n amp" | "random_h4 seed amp".
    pub fn parse(text: &str) -> Result<Self, CoreError> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        match parts.as_slice() {
            ["zero"] => Ok(Self::Zero),
            ["single_mode", n, amp] => {
                let n: usize = n
                    .parse()
                    .map_err(|_| CoreError::Mismatch(format!("bad mode index {n:?}")))?;
                if n == 0 {
                    return Err(CoreError::Mismatch("mode index starts at 1".into()));
                }
                let amp: f64 = amp
                    .parse()
                    .map_err(|_| CoreError::Mismatch(format!("bad amplitude {amp:?}")))?;
                Ok(Self::SingleMode { n, amp })
            }
            ["random_h4", seed, amp] => {
                let seed: u64 = seed
                    .parse()
                    .map_err(|_| CoreError::Mismatch(format!("bad seed {seed:?}")))?;
                let amp: f64 = amp
                    .parse()
                    .map_err(|_| CoreError::Mismatch(format!("bad amplitude {amp:?}")))?;
                Ok(Self::RandomH4 { seed, amp })
            }
            _ => Err(CoreError::Mismatch(format!(
                "unknown shear preset {text:?}; expected \"zero\", \"single_mode n amp\" or \"random_h4 seed amp\""
            ))),
        }
    }

    pub fn coefficients(&self, n_y: usize) -> Vec<f64> {
        match *self {
            Self::Zero => vec![0.0; n_y],
            Self::SingleMode { n, amp } => {
                let mut w = vec![0.0; n_y];
                if n >= 1 && n <= n_y {
                    w[n - 1] = amp;
                }
                w
            }
            Self::RandomH4 { seed, amp } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let band = (n_y / 3).max(4).min(n_y);
                let mut w = vec![0.0; n_y];
                for (m, c) in w.iter_mut().enumerate().take(band) {
                    let r: f64 = rng.random_range(-1.0..1.0);
                    *c = r / (1.0 + mode_lambda(m)).powi(2);
                }
                let norm = sobolev_norm_h4(&w);
                if norm > 0.0 {
                    let s = amp / norm;
                    for c in &mut w {
                        *c *= s;
                    }
                }
                w
            }
        }
    }
}

/// Load W from a one-column numeric text file of values on the interior
/// nodes. Rejects data whose reconstructed boundary trace exceeds 1e-10
/// (the compatibility condition W(+-1) = 0).
pub fn load_shear_values(path: &Path, basis: &SineBasis) -> Result<Vec<f64>, CoreError> {
    let text = std::fs::read_to_string(path)?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            CoreError::Mismatch(format!(
                "{}:{}: not a number: {line:?}",
                path.display(),
                lineno + 1
            ))
        })?;
        values.push(v);
    }
    if values.len() != basis.len() {
        return Err(CoreError::LengthMismatch {
            expected: basis.len(),
            got: values.len(),
        });
    }
    let coeffs = basis.analyze_real(&values)?;
    // trace of the sine interpolant at the walls
    let cplx: Vec<num_complex::Complex64> = coeffs
        .iter()
        .map(|&c| num_complex::Complex64::new(c, 0.0))
        .collect();
    for (side, y) in [(-1i8, -1.0), (1i8, 1.0)] {
        let trace = basis.eval_sine_at(&cplx, y).norm();
        if trace > BOUNDARY_TRACE_TOL {
            return Err(CoreError::BoundaryTrace { side, value: trace });
        }
    }
    Ok(coeffs)
}
