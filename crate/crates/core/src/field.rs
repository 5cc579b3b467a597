//! Spectral fields: per-wavenumber complex coefficient stacks with an
//! explicit wall-normal representation tag.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::grid::SineBasis;

/// Wall-normal representation of the stored vectors. Differentiation maps
/// sine content to cosine content, which no longer vanishes on the walls, so
/// the tag travels with the data instead of being implied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YRepr {
    /// Coefficients of `sin(n pi (y+1)/2)`.
    Sine,
    /// Coefficients of `cos(n pi (y+1)/2)`.
    Cosine,
    /// Point values on the interior nodes.
    Grid,
}

/// A field on the channel: one complex vector of length `n_y` per retained
/// wavenumber `k in -k_max ..= k_max`.
#[derive(Debug, Clone)]
pub struct SpectralField {
    k_max: i64,
    n_y: usize,
    repr: YRepr,
    modes: Vec<Vec<Complex64>>,
}

impl SpectralField {
    pub fn zeros(k_max: i64, n_y: usize) -> Self {
        assert!(k_max >= 0);
        let count = (2 * k_max + 1) as usize;
        Self {
            k_max,
            n_y,
            repr: YRepr::Sine,
            modes: vec![vec![Complex64::ZERO; n_y]; count],
        }
    }

    pub fn from_modes(
        k_max: i64,
        repr: YRepr,
        modes: Vec<Vec<Complex64>>,
    ) -> Result<Self, CoreError> {
        let count = (2 * k_max + 1) as usize;
        if modes.len() != count {
            return Err(CoreError::LengthMismatch {
                expected: count,
                got: modes.len(),
            });
        }
        let n_y = modes[0].len();
        if let Some(bad) = modes.iter().find(|m| m.len() != n_y) {
            return Err(CoreError::LengthMismatch {
                expected: n_y,
                got: bad.len(),
            });
        }
        Ok(Self {
            k_max,
            n_y,
            repr,
            modes,
        })
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn repr(&self) -> YRepr {
        self.repr
    }

    pub fn set_repr(&mut self, repr: YRepr) {
        self.repr = repr;
    }

    pub fn expect_repr(&self, expected: YRepr) -> Result<(), CoreError> {
        if self.repr != expected {
            return Err(CoreError::WrongRepr {
                expected,
                got: self.repr,
            });
        }
        Ok(())
    }

    #[inline]
    fn idx(&self, k: i64) -> usize {
        debug_assert!(k.abs() <= self.k_max);
        (k + self.k_max) as usize
    }

    pub fn mode(&self, k: i64) -> &[Complex64] {
        &self.modes[self.idx(k)]
    }

    pub fn mode_mut(&mut self, k: i64) -> &mut Vec<Complex64> {
        let i = self.idx(k);
        &mut self.modes[i]
    }

    pub fn wavenumbers(&self) -> impl Iterator<Item = i64> {
        -self.k_max..=self.k_max
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &[Complex64])> {
        let k_max = self.k_max;
        self.modes
            .iter()
            .enumerate()
            .map(move |(i, m)| (i as i64 - k_max, m.as_slice()))
    }

    pub fn scale(&mut self, s: f64) {
        for m in &mut self.modes {
            for c in m.iter_mut() {
                *c *= s;
            }
        }
    }

    /// Max deviation from the conjugate symmetry `c_{-k} = conj(c_k)` that a
    /// real-valued function must satisfy.
    pub fn reality_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for k in 0..=self.k_max {
            let plus = self.mode(k);
            let minus = self.mode(-k);
            for (a, b) in plus.iter().zip(minus) {
                worst = worst.max((b - a.conj()).norm());
            }
        }
        worst
    }

    /// Overwrite `c_{-k}` with `conj(c_k)` and project `c_0` onto reals.
    pub fn enforce_reality(&mut self) {
        for k in 1..=self.k_max {
            let plus: Vec<Complex64> = self.mode(k).iter().map(|c| c.conj()).collect();
            self.mode_mut(-k).copy_from_slice(&plus);
        }
        for c in self.mode_mut(0).iter_mut() {
            *c = Complex64::new(c.re, 0.0);
        }
    }

    /// Reconstructed wall values; exact zero for sine content, the summed
    /// endpoint values for cosine content.
    pub fn dirichlet_trace_residual(&self, _basis: &SineBasis) -> f64 {
        match self.repr {
            YRepr::Sine => 0.0,
            YRepr::Cosine => {
                let mut worst = 0.0_f64;
                for (_, m) in self.iter() {
                    let at_lo: Complex64 = m.iter().sum();
                    let at_hi: Complex64 = m
                        .iter()
                        .enumerate()
                        .map(|(i, c)| if (i + 1) % 2 == 0 { *c } else { -*c })
                        .sum();
                    worst = worst.max(at_lo.norm()).max(at_hi.norm());
                }
                worst
            }
            YRepr::Grid => f64::NAN,
        }
    }

    /// Total squared L2 norm over the channel (sine representation),
    /// `sum_k ||f_k||^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| m.iter().map(|c| c.norm_sqr()).sum::<f64>())
            .sum()
    }
}
