//! Flat binary checkpoints with a structured-text sidecar.
//!
//! Layout (all little-endian):
//!
//! ```text
//! magic     8 bytes  "CCHKPT01"
//! version   u32
//! n_x       u32
//! n_y       u32
//! n_modes   u32      (= 2 k_max + 1)
//! nu        f64
//! t         f64
//! hash      u64      (caller-supplied parameter hash)
//! modes     n_modes blocks: i64 wavenumber, then n_y complex128 (re, im)
//! shear     n_y f64  (sine coefficients of W)
//! ```
//!
//! The sidecar `<path>.meta.toml` repeats the header fields as text.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::CoreError;
use crate::field::SpectralField;

const MAGIC: &[u8; 8] = b"CCHKPT01";
const VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub n_x: u32,
    pub n_y: u32,
    pub nu: f64,
    pub t: f64,
    pub params_hash: u64,
    pub omega: SpectralField,
    pub shear_coeffs: Vec<f64>,
}

pub fn write_checkpoint(path: &Path, chk: &Checkpoint) -> Result<(), CoreError> {
    let n_modes = (2 * chk.omega.k_max() + 1) as u32;
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&chk.n_x.to_le_bytes());
    buf.extend_from_slice(&chk.n_y.to_le_bytes());
    buf.extend_from_slice(&n_modes.to_le_bytes());
    buf.extend_from_slice(&chk.nu.to_le_bytes());
    buf.extend_from_slice(&chk.t.to_le_bytes());
    buf.extend_from_slice(&chk.params_hash.to_le_bytes());
    for (k, mode) in chk.omega.iter() {
        buf.extend_from_slice(&k.to_le_bytes());
        for c in mode {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    for w in &chk.shear_coeffs {
        buf.extend_from_slice(&w.to_le_bytes());
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;

    let meta = format!(
        "format = \"channel-checkpoint\"\nversion = {VERSION}\nn_x = {}\nn_y = {}\nn_modes = {}\nnu = {:e}\nt = {:e}\nparams_hash = \"{:016x}\"\n",
        chk.n_x, chk.n_y, n_modes, chk.nu, chk.t, chk.params_hash
    );
    std::fs::write(meta_path(path), meta)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint, CoreError> {
    let mut f = std::fs::File::open(path)?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf)?;
    let mut pos = 0usize;

    let take = |pos: &mut usize, len: usize| -> Result<&[u8], CoreError> {
        if *pos + len > buf.len() {
            return Err(CoreError::Checkpoint("truncated file".into()));
        }
        let s = &buf[*pos..*pos + len];
        *pos += len;
        Ok(s)
    };

    if take(&mut pos, 8)? != MAGIC {
        return Err(CoreError::Checkpoint("bad magic".into()));
    }
    let rd_u32 = |pos: &mut usize| -> Result<u32, CoreError> {
        Ok(u32::from_le_bytes(take(pos, 4)?.try_into().unwrap()))
    };
    let rd_u64 = |pos: &mut usize| -> Result<u64, CoreError> {
        Ok(u64::from_le_bytes(take(pos, 8)?.try_into().unwrap()))
    };
    let rd_i64 = |pos: &mut usize| -> Result<i64, CoreError> {
        Ok(i64::from_le_bytes(take(pos, 8)?.try_into().unwrap()))
    };
    let rd_f64 = |pos: &mut usize| -> Result<f64, CoreError> {
        Ok(f64::from_le_bytes(take(pos, 8)?.try_into().unwrap()))
    };

    let version = rd_u32(&mut pos)?;
    if version != VERSION {
        return Err(CoreError::Checkpoint(format!(
            "unsupported version {version}"
        )));
    }
    let n_x = rd_u32(&mut pos)?;
    let n_y = rd_u32(&mut pos)? as usize;
    let n_modes = rd_u32(&mut pos)? as usize;
    if n_modes % 2 == 0 {
        return Err(CoreError::Checkpoint(format!("even mode count {n_modes}")));
    }
    let nu = rd_f64(&mut pos)?;
    let t = rd_f64(&mut pos)?;
    let params_hash = rd_u64(&mut pos)?;

    let k_max = ((n_modes - 1) / 2) as i64;
    let mut omega = SpectralField::zeros(k_max, n_y);
    for expect_k in -k_max..=k_max {
        let k = rd_i64(&mut pos)?;
        if k != expect_k {
            return Err(CoreError::Checkpoint(format!(
                "mode order mismatch: found {k}, expected {expect_k}"
            )));
        }
        let mode = omega.mode_mut(k);
        for c in mode.iter_mut() {
            let re = rd_f64(&mut pos)?;
            let im = rd_f64(&mut pos)?;
            *c = Complex64::new(re, im);
        }
    }
    let mut shear_coeffs = vec![0.0; n_y];
    for w in shear_coeffs.iter_mut() {
        *w = rd_f64(&mut pos)?;
    }
    if pos != buf.len() {
        return Err(CoreError::Checkpoint(format!(
            "{} trailing bytes",
            buf.len() - pos
        )));
    }
    Ok(Checkpoint {
        n_x,
        n_y: n_y as u32,
        nu,
        t,
        params_hash,
        omega,
        shear_coeffs,
    })
}

pub fn meta_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.toml");
    std::path::PathBuf::from(s)
}
