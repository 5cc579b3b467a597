//! Initial perturbation generators and the anisotropic norm used to size
//! them.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CoreError;
use crate::field::SpectralField;
use crate::grid::{dy_norm_sq, l2_norm_sq, ChannelGrid};

/// `sum_{j<=1} || <d_x>^{m - j/3} (nu^{1/3} d_y)^j w ||_{L2}`; the size in
/// which the perturbation threshold is measured.
pub fn anisotropic_norm(field: &SpectralField, m: f64, nu: f64) -> f64 {
    let mut term0 = 0.0;
    let mut term1 = 0.0;
    for (k, w) in field.iter() {
        let jx = 1.0 + (k * k) as f64;
        term0 += jx.powf(m) * l2_norm_sq(w);
        term1 += jx.powf(m - 1.0 / 3.0) * dy_norm_sq(w);
    }
    term0.sqrt() + nu.powf(2.0 / 3.0).sqrt() * term1.sqrt()
}

/// Named initial perturbations for the vorticity field.
#[derive(Debug, Clone, PartialEq)]
pub enum PerturbationPreset {
    Zero,
    /// `amp` times the sine mode `n` at wavenumbers `+-k`
    SingleMode {
        k: i64,
        n: usize,
        amp: f64,
    },
    /// band-limited random data normalized so the anisotropic norm is `epsilon`
    RandomBand {
        seed: u64,
        k_band: i64,
        n_band: usize,
        epsilon: f64,
    },
}

impl PerturbationPreset {
    pub fn parse(text: &str) -> Result<Self, CoreError> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        let bad = |what: &str, v: &str| CoreError::Mismatch(format!("bad {what} {v:?}"));
        match parts.as_slice() {
            ["zero"] => Ok(Self::Zero),
            ["single_mode", k, n, amp] => Ok(Self::SingleMode {
                k: k.parse().map_err(|_| bad("wavenumber", k))?,
                n: n.parse().map_err(|_| bad("mode index", n))?,
                amp: amp.parse().map_err(|_| bad("amplitude", amp))?,
            }),
            ["random_band", seed, k_band, n_band, eps] => Ok(Self::RandomBand {
                seed: seed.parse().map_err(|_| bad("seed", seed))?,
                k_band: k_band.parse().map_err(|_| bad("k band", k_band))?,
                n_band: n_band.parse().map_err(|_| bad("n band", n_band))?,
                epsilon: eps.parse().map_err(|_| bad("epsilon", eps))?,
            }),
            _ => Err(CoreError::Mismatch(format!(
                "unknown perturbation preset {text:?}; expected \"zero\", \"single_mode k n amp\" or \"random_band seed k_band n_band eps\""
            ))),
        }
    }

    /// Realize the preset on a grid. Random data is drawn inside the dealias
    /// band and rescaled after projection so the anisotropic norm equals the
    /// requested epsilon exactly.
    pub fn realize(&self, grid: &ChannelGrid, m: f64, nu: f64) -> Result<SpectralField, CoreError> {
        let k_max = grid.max_wavenumber();
        let n_y = grid.n_y();
        match *self {
            Self::Zero => Ok(SpectralField::zeros(k_max, n_y)),
            Self::SingleMode { k, n, amp } => {
                if k.abs() > k_max {
                    return Err(CoreError::Mismatch(format!(
                        "wavenumber {k} outside retained band |k| <= {k_max}"
                    )));
                }
                if n == 0 || n > grid.y_dealias_cutoff() {
                    return Err(CoreError::Mismatch(format!(
                        "mode {n} outside the dealiased band 1..={}",
                        grid.y_dealias_cutoff()
                    )));
                }
                let mut f = SpectralField::zeros(k_max, n_y);
                f.mode_mut(k)[n - 1] = Complex64::new(amp, 0.0);
                f.enforce_reality();
                Ok(f)
            }
            Self::RandomBand {
                seed,
                k_band,
                n_band,
                epsilon,
            } => {
                let kb = k_band.min(k_max).max(1);
                let nb = n_band.min(grid.y_dealias_cutoff()).max(1);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut f = SpectralField::zeros(k_max, n_y);
                for k in 1..=kb {
                    for n in 0..nb {
                        let re: f64 = rng.random_range(-1.0..1.0);
                        let im: f64 = rng.random_range(-1.0..1.0);
                        f.mode_mut(k)[n] = Complex64::new(re, im);
                    }
                }
                f.enforce_reality();
                let norm = anisotropic_norm(&f, m, nu);
                if norm > 0.0 {
                    f.scale(epsilon / norm);
                }
                Ok(f)
            }
        }
    }
}
