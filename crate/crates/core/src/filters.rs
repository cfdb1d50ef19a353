//! Fourier-multiplier filters in the detector variable `s`.
//!
//! Every built-in filter depends only on the `ds`-frequency σ:
//!
//! | kind     | p(σ)      |
//! |----------|-----------|
//! | fbp      | \|σ\|/(4π) |
//! | lambda   | σ²/(4π)   |
//! | dds      | iσ        |
//! | identity | 1         |

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::transforms::Sinogram;
use crate::{Error, Result};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    Fbp,
    Lambda,
    Dds,
    Identity,
}

impl FilterKind {
    pub const ALL: [FilterKind; 4] = [
        FilterKind::Fbp,
        FilterKind::Lambda,
        FilterKind::Dds,
        FilterKind::Identity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FilterKind::Fbp => "fbp",
            FilterKind::Lambda => "lambda",
            FilterKind::Dds => "dds",
            FilterKind::Identity => "identity",
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FilterKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown filter '{s}' (expected fbp, lambda, dds or identity)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    /// Raised-cosine roll-off starting at this fraction of Nyquist. `None` leaves
    /// the multiplier untouched.
    pub apodize: Option<f64>,
}

impl FilterSpec {
    pub fn new(kind: FilterKind) -> Self {
        FilterSpec { kind, apodize: None }
    }

    pub fn with_apodization(kind: FilterKind, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::Parse(format!(
                "apodization fraction must lie in (0, 1], got {fraction}"
            )));
        }
        Ok(FilterSpec {
            kind,
            apodize: Some(fraction),
        })
    }
}

impl From<FilterKind> for FilterSpec {
    fn from(kind: FilterKind) -> Self {
        FilterSpec::new(kind)
    }
}

/// Principal symbol `p(σ)` of the filter at `ds`-frequency σ.
pub fn filter_symbol(kind: FilterKind, sigma: f64) -> Complex64 {
    match kind {
        FilterKind::Fbp => Complex64::new(sigma.abs() / FOUR_PI, 0.0),
        FilterKind::Lambda => Complex64::new(sigma * sigma / FOUR_PI, 0.0),
        FilterKind::Dds => Complex64::new(0.0, sigma),
        FilterKind::Identity => Complex64::new(1.0, 0.0),
    }
}

fn apodization(sigma: f64, nyquist: f64, fraction: f64) -> f64 {
    let start = fraction * nyquist;
    let a = sigma.abs();
    if a <= start || nyquist <= start {
        1.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI * (a - start) / (nyquist - start)).cos())
    }
}

/// Multiplier applied to each bin of a length-`len` transform.
fn multiplier(spec: &FilterSpec, len: usize, ds: f64) -> Vec<Complex64> {
    let nyquist = std::f64::consts::PI / ds;
    (0..len)
        .map(|k| {
            let signed = if k <= len / 2 {
                k as f64
            } else {
                k as f64 - len as f64
            };
            let sigma = std::f64::consts::TAU * signed / (len as f64 * ds);
            let p = filter_symbol(spec.kind, sigma);
            match spec.apodize {
                Some(fr) => p * apodization(sigma, nyquist, fr),
                None => p,
            }
        })
        .collect()
}

/// Padded transform length: the next power of two at least twice the row length.
pub fn padded_len(n_s: usize) -> usize {
    (2 * n_s).next_power_of_two()
}

/// Filter each angle row; returns the result and, per row, the Euclidean norm
/// of the imaginary part discarded after the inverse transform.
pub(crate) fn apply_filter_with_residue(g: &Sinogram, spec: &FilterSpec) -> (Sinogram, Vec<f64>) {
    let grid = *g.grid();
    if spec.kind == FilterKind::Identity && spec.apodize.is_none() {
        return (g.clone(), vec![0.0; grid.n_phi()]);
    }
    let n_s = grid.n_s();
    let len = padded_len(n_s);
    let mult = multiplier(spec, len, grid.d_s());
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let scale = 1.0 / len as f64;

    let mut out = Sinogram::zeros(grid);
    let mut residue = vec![0.0; grid.n_phi()];
    out.par_rows_mut()
        .zip(residue.par_iter_mut())
        .enumerate()
        .for_each(|(i, (row, res))| {
            let mut buf = vec![Complex64::new(0.0, 0.0); len];
            for (b, &v) in buf.iter_mut().zip(g.row(i)) {
                b.re = v;
            }
            fwd.process(&mut buf);
            for (b, m) in buf.iter_mut().zip(&mult) {
                *b *= m;
            }
            inv.process(&mut buf);
            let mut imag = 0.0;
            for (o, b) in row.iter_mut().zip(&buf[..n_s]) {
                *o = b.re * scale;
                imag += (b.im * scale).powi(2);
            }
            *res = imag.sqrt();
        });
    (out, residue)
}

/// Apply `P` row by row: zero-pad, transform in `s`, multiply by `p(σ_k)`
/// with `σ_k = 2πk/(NΔs)`, invert, truncate and keep the real part.
pub fn apply_filter(g: &Sinogram, spec: &FilterSpec) -> Sinogram {
    apply_filter_with_residue(g, spec).0
}
