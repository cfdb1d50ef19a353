//! Angular cutoffs: the hard indicator of `(a, b)` and a smooth cutoff that
//! is one on `[a', b']` and vanishes outside `(a, b)`.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::transforms::Sinogram;
use crate::{wrap_angle, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffSpec {
    /// Full data.
    None,
    /// Indicator of the open interval `(a, b)`.
    Hard { a: f64, b: f64 },
    /// Polynomial smoothstep ramps on `[a, a']` and `[b', b]`.
    Smooth {
        a: f64,
        b: f64,
        a_inner: f64,
        b_inner: f64,
        order: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffKind {
    None,
    Hard,
    Smooth,
}

impl CutoffKind {
    pub fn name(&self) -> &'static str {
        match self {
            CutoffKind::None => "none",
            CutoffKind::Hard => "hard",
            CutoffKind::Smooth => "smooth",
        }
    }
}

impl fmt::Display for CutoffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CutoffKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(CutoffKind::None),
            "hard" => Ok(CutoffKind::Hard),
            "smooth" => Ok(CutoffKind::Smooth),
            _ => Err(Error::Parse(format!(
                "unknown cutoff '{s}' (expected hard, smooth or none)"
            ))),
        }
    }
}

fn check_range(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidCutoff("non-finite endpoint".into()));
    }
    if !(0.0 <= a && a < b && b <= TAU) {
        return Err(Error::InvalidCutoff(format!(
            "need 0 <= a < b <= 2π, got a={a}, b={b}"
        )));
    }
    if b - a >= TAU {
        return Err(Error::InvalidCutoff(
            "limited range must be shorter than 2π; use the none cutoff for full data".into(),
        ));
    }
    Ok(())
}

impl CutoffSpec {
    pub fn hard(a: f64, b: f64) -> Result<Self> {
        check_range(a, b)?;
        Ok(CutoffSpec::Hard { a, b })
    }

    pub fn smooth(a: f64, b: f64, a_inner: f64, b_inner: f64, order: u32) -> Result<Self> {
        check_range(a, b)?;
        if !(a < a_inner && a_inner < b_inner && b_inner < b) {
            return Err(Error::InvalidCutoff(format!(
                "need a < a' < b' < b, got a={a}, a'={a_inner}, b'={b_inner}, b={b}"
            )));
        }
        if order < 2 {
            return Err(Error::InvalidCutoff(format!("order must be at least 2, got {order}")));
        }
        Ok(CutoffSpec::Smooth {
            a,
            b,
            a_inner,
            b_inner,
            order,
        })
    }

    /// Smooth cutoff whose plateau is `(a, b)` shrunk by `transition` on each side.
    pub fn smooth_with_transition(a: f64, b: f64, transition: f64, order: u32) -> Result<Self> {
        Self::smooth(a, b, a + transition, b - transition, order)
    }

    /// Re-run the constructor checks, for values built directly from the variants.
    pub fn validated(self) -> Result<Self> {
        match self {
            CutoffSpec::None => Ok(self),
            CutoffSpec::Hard { a, b } => Self::hard(a, b),
            CutoffSpec::Smooth {
                a,
                b,
                a_inner,
                b_inner,
                order,
            } => Self::smooth(a, b, a_inner, b_inner, order),
        }
    }

    pub fn kind(&self) -> CutoffKind {
        match self {
            CutoffSpec::None => CutoffKind::None,
            CutoffSpec::Hard { .. } => CutoffKind::Hard,
            CutoffSpec::Smooth { .. } => CutoffKind::Smooth,
        }
    }

    /// Support interval `(a, b)`; `(0, 2π)` for full data.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            CutoffSpec::None => (0.0, TAU),
            CutoffSpec::Hard { a, b } | CutoffSpec::Smooth { a, b, .. } => (a, b),
        }
    }

    /// Interval on which the cutoff equals one.
    pub fn plateau(&self) -> (f64, f64) {
        match *self {
            CutoffSpec::None => (0.0, TAU),
            CutoffSpec::Hard { a, b } => (a, b),
            CutoffSpec::Smooth {
                a_inner, b_inner, ..
            } => (a_inner, b_inner),
        }
    }

    /// Value at `phi`, taken modulo 2π.
    pub fn eval(&self, phi: f64) -> f64 {
        let phi = wrap_angle(phi);
        match *self {
            CutoffSpec::None => 1.0,
            CutoffSpec::Hard { a, b } => {
                if a < phi && phi < b {
                    1.0
                } else {
                    0.0
                }
            }
            CutoffSpec::Smooth {
                a,
                b,
                a_inner,
                b_inner,
                order,
            } => {
                if phi <= a || phi >= b {
                    0.0
                } else if phi < a_inner {
                    smoothstep(order, (phi - a) / (a_inner - a))
                } else if phi <= b_inner {
                    1.0
                } else {
                    smoothstep(order, (b - phi) / (b - b_inner))
                }
            }
        }
    }
}

/// Polynomial of degree `2k − 1` rising from 0 to 1 on `[0, 1]` whose first
/// `k − 1` derivatives vanish at both ends:
/// `S_k(x) = x^k Σ_{j<k} C(k−1+j, j) (1 − x)^j`.
pub fn smoothstep(k: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let y = 1.0 - x;
    let mut sum = 0.0;
    let mut binom = 1.0;
    let mut ypow = 1.0;
    for j in 0..k {
        sum += binom * ypow;
        // C(k−1+j+1, j+1) = C(k−1+j, j) · (k+j)/(j+1)
        binom *= (k + j) as f64 / (j + 1) as f64;
        ypow *= y;
    }
    x.powi(k as i32) * sum
}

/// Multiply each angle row by the cutoff value at its angle.
pub fn apply_cutoff(g: &Sinogram, c: &CutoffSpec) -> Sinogram {
    let grid = *g.grid();
    let mut out = g.clone();
    if matches!(c, CutoffSpec::None) {
        return out;
    }
    for (i, row) in out.rows_mut().enumerate() {
        let w = c.eval(grid.phi(i));
        if w != 1.0 {
            row.iter_mut().for_each(|v| *v *= w);
        }
    }
    out
}
