//! Discrete weighted Radon transform and its dual.
//!
//! Data live on `[0, 2π) × [-s_max, s_max]`. Limited angular ranges are
//! never expressed by shrinking the grid; they are applied as cutoffs.

use rayon::prelude::*;

use crate::geometry::Phantom;
use crate::{dot, theta, theta_perp, Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinogramGrid {
    n_phi: usize,
    n_s: usize,
    s_max: f64,
}

impl SinogramGrid {
    pub fn new(n_phi: usize, n_s: usize, s_max: f64) -> Result<Self> {
        if n_phi == 0 {
            return Err(Error::InvalidGrid("n_phi must be positive".into()));
        }
        if n_s < 3 || n_s % 2 == 0 {
            return Err(Error::InvalidGrid(format!("n_s must be odd and >= 3, got {n_s}")));
        }
        if !(s_max >= SQRT_2) || !s_max.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "s_max must be at least sqrt(2) to cover the image square, got {s_max}"
            )));
        }
        Ok(SinogramGrid { n_phi, n_s, s_max })
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn d_phi(&self) -> f64 {
        std::f64::consts::TAU / self.n_phi as f64
    }

    pub fn d_s(&self) -> f64 {
        2.0 * self.s_max / (self.n_s - 1) as f64
    }

    pub fn phi(&self, i: usize) -> f64 {
        i as f64 * self.d_phi()
    }

    /// Detector position of sample `j`; exactly antisymmetric about the centre sample.
    pub fn s(&self, j: usize) -> f64 {
        let c = (self.n_s / 2) as f64;
        (j as f64 - c) * self.d_s()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    grid: SinogramGrid,
    values: Vec<f64>,
}

impl Sinogram {
    pub fn zeros(grid: SinogramGrid) -> Self {
        Sinogram {
            grid,
            values: vec![0.0; grid.n_phi * grid.n_s],
        }
    }

    pub fn from_values(grid: SinogramGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_phi * grid.n_s {
            return Err(Error::GridMismatch(format!(
                "expected {} values for a {}x{} sinogram, got {}",
                grid.n_phi * grid.n_s,
                grid.n_phi,
                grid.n_s,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::GridMismatch("sinogram values must be finite".into()));
        }
        Ok(Sinogram { grid, values })
    }

    /// Sample `f(φ_i, s_j)` on every grid point.
    pub fn from_fn(grid: SinogramGrid, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let mut values = vec![0.0; grid.n_phi * grid.n_s];
        values
            .par_chunks_mut(grid.n_s)
            .enumerate()
            .for_each(|(i, row)| {
                let phi = grid.phi(i);
                for (j, v) in row.iter_mut().enumerate() {
                    *v = f(phi, grid.s(j));
                }
            });
        Sinogram { grid, values }
    }

    pub fn grid(&self) -> &SinogramGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n_s + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.grid.n_s;
        &self.values[i * n..(i + 1) * n]
    }

    pub(crate) fn rows_mut(&mut self) -> std::slice::ChunksMut<'_, f64> {
        self.values.chunks_mut(self.grid.n_s)
    }

    pub(crate) fn par_rows_mut(&mut self) -> rayon::slice::ChunksMut<'_, f64> {
        let n = self.grid.n_s;
        self.values.par_chunks_mut(n)
    }

    /// Linear interpolation of row `i` at detector position `s`; zero outside the grid.
    #[inline]
    pub fn interp(&self, i: usize, s: f64) -> f64 {
        interp_row(self.row(i), s, self.grid.s_max, self.grid.d_s())
    }

    /// `Σ g h Δφ Δs`, the discrete `L²(Ξ)` pairing.
    pub fn inner(&self, other: &Sinogram) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("sinogram grids differ".into()));
        }
        let sum: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(sum * self.grid.d_phi() * self.grid.d_s())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[inline]
fn interp_row(row: &[f64], s: f64, s_max: f64, ds: f64) -> f64 {
    let pos = (s + s_max) / ds;
    if !(pos >= 0.0) {
        return 0.0;
    }
    let j0 = pos.floor() as usize;
    let frac = pos - j0 as f64;
    match (row.get(j0), row.get(j0 + 1)) {
        (Some(&v0), Some(&v1)) => v0 + frac * (v1 - v0),
        (Some(&v0), None) if frac == 0.0 => v0,
        _ => 0.0,
    }
}

/// Square image on `[-1, 1]²`; row index runs along y, column index along x.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    n: usize,
    values: Vec<f64>,
}

impl Image {
    pub fn zeros(n: usize) -> Self {
        Image {
            n,
            values: vec![0.0; n * n],
        }
    }

    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::GridMismatch(format!(
                "expected {} values for a {n}x{n} image, got {}",
                n * n,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::GridMismatch("image values must be finite".into()));
        }
        Ok(Image { n, values })
    }

    /// Sample `f` at every pixel centre.
    pub fn from_fn(n: usize, f: impl Fn([f64; 2]) -> f64 + Sync) -> Self {
        let mut values = vec![0.0; n * n];
        values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let y = pixel_center(n, i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = f([pixel_center(n, j), y]);
            }
        });
        Image { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pixel_size(&self) -> f64 {
        2.0 / self.n as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Centre of pixel `(i, j)`.
    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [pixel_center(self.n, j), pixel_center(self.n, i)]
    }

    /// Continuous pixel coordinates `(row, col)` of a point.
    pub fn to_pixel(&self, x: [f64; 2]) -> (f64, f64) {
        let h = self.pixel_size();
        ((x[1] + 1.0) / h - 0.5, (x[0] + 1.0) / h - 0.5)
    }

    /// Bilinear interpolation between pixel centres, zero-extended outside the grid.
    pub fn bilinear(&self, x: [f64; 2]) -> f64 {
        let (r, c) = self.to_pixel(x);
        let r0 = r.floor();
        let c0 = c.floor();
        let fr = r - r0;
        let fc = c - c0;
        let (r0, c0) = (r0 as i64, c0 as i64);
        let at = |i: i64, j: i64| -> f64 {
            if i < 0 || j < 0 || i >= self.n as i64 || j >= self.n as i64 {
                0.0
            } else {
                self.values[i as usize * self.n + j as usize]
            }
        };
        let top = at(r0, c0) * (1.0 - fc) + at(r0, c0 + 1) * fc;
        let bottom = at(r0 + 1, c0) * (1.0 - fc) + at(r0 + 1, c0 + 1) * fc;
        top * (1.0 - fr) + bottom * fr
    }

    /// `Σ f g h²`, the discrete `L²(ℝ²)` pairing.
    pub fn inner(&self, other: &Image) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::GridMismatch("image sizes differ".into()));
        }
        let h = self.pixel_size();
        let sum: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(sum * h * h)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Image {
        Image {
            n: self.n,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

#[inline]
fn pixel_center(n: usize, k: usize) -> f64 {
    -1.0 + (k as f64 + 0.5) * 2.0 / n as f64
}

/// Weight `μ(φ, x)` of the transform. Both kinds are smooth, positive and
/// 2π-periodic in φ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSpec {
    /// `μ ≡ c` with `c > 0`.
    Constant(f64),
    /// `μ(φ, x) = exp(c x·θ(φ))`, not symmetric under `(φ, s) → (φ + π, −s)`.
    Exponential(f64),
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Constant(1.0)
    }
}

impl WeightSpec {
    pub fn constant(c: f64) -> Result<Self> {
        WeightSpec::Constant(c).validated()
    }

    pub fn exponential(c: f64) -> Result<Self> {
        WeightSpec::Exponential(c).validated()
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            WeightSpec::Constant(c) if !(c > 0.0) || !c.is_finite() => Err(Error::InvalidWeight(
                format!("constant weight must be positive, got {c}"),
            )),
            WeightSpec::Exponential(c) if !c.is_finite() => {
                Err(Error::InvalidWeight("exponential rate must be finite".into()))
            }
            w => Ok(w),
        }
    }

    #[inline]
    pub fn eval(&self, phi: f64, x: [f64; 2]) -> f64 {
        match *self {
            WeightSpec::Constant(c) => c,
            WeightSpec::Exponential(c) => (c * dot(x, theta(phi))).exp(),
        }
    }

    /// Value on the line `L(φ, s)`, where `x·θ(φ) = s`; both kinds are constant along lines.
    #[inline]
    pub fn on_line(&self, s: f64) -> f64 {
        match *self {
            WeightSpec::Constant(c) => c,
            WeightSpec::Exponential(c) => (c * s).exp(),
        }
    }

    pub fn is_unit(&self) -> bool {
        *self == WeightSpec::Constant(1.0)
    }
}

/// Exact `R₁f` of an ellipse phantom.
pub fn forward_analytic(phantom: &Phantom, grid: SinogramGrid) -> Sinogram {
    Sinogram::from_fn(grid, |phi, s| phantom.line_integral(phi, s))
}

/// Exact `R_μ f` of an ellipse phantom. Both weight kinds are constant on
/// each line, so this is the unweighted chord sum scaled by `μ` on the line.
pub fn forward_analytic_weighted(phantom: &Phantom, weight: WeightSpec, grid: SinogramGrid) -> Sinogram {
    Sinogram::from_fn(grid, |phi, s| weight.on_line(s) * phantom.line_integral(phi, s))
}

/// Function sampled by the numeric projector.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Image(&'a Image),
    Phantom(&'a Phantom),
}

impl Source<'_> {
    #[inline]
    fn eval(&self, x: [f64; 2]) -> f64 {
        match self {
            Source::Image(img) => img.bilinear(x),
            Source::Phantom(p) => p.density_at(x),
        }
    }

    /// Half width of the square outside of which the source vanishes.
    fn support_radius(&self) -> f64 {
        match self {
            // zero extension reaches one pixel past the outer centres
            Source::Image(img) => 1.0 + img.pixel_size(),
            Source::Phantom(_) => 1.0,
        }
    }
}

/// Range of `t` for which `base + t·dir` stays in `[-r, r]²`.
fn slab_interval(base: [f64; 2], dir: [f64; 2], r: f64) -> Option<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for k in 0..2 {
        if dir[k].abs() < 1e-15 {
            if base[k].abs() > r {
                return None;
            }
        } else {
            let t1 = (-r - base[k]) / dir[k];
            let t2 = (r - base[k]) / dir[k];
            lo = lo.max(t1.min(t2));
            hi = hi.min(t1.max(t2));
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Quadrature approximation of `R_μ f`.
///
/// Composite midpoint rule along `x(t) = sθ(φ) + tθ⊥(φ)` for
/// `t ∈ [−√2 − s_max, √2 + s_max]` with the given `step`. Midpoints outside
/// the source support are skipped since the integrand vanishes there.
pub fn forward_numeric(
    source: Source<'_>,
    weight: WeightSpec,
    grid: SinogramGrid,
    step: f64,
) -> Result<Sinogram> {
    let weight = weight.validated()?;
    if !(step > 0.0) || step > grid.d_s() * (1.0 + 1e-12) {
        return Err(Error::InvalidStep {
            step,
            max: grid.d_s(),
        });
    }
    let t_start = -(SQRT_2 + grid.s_max);
    let n_t = ((2.0 * (SQRT_2 + grid.s_max)) / step).ceil() as i64;
    let r = source.support_radius();
    let mut out = Sinogram::zeros(grid);
    out.par_rows_mut().enumerate().for_each(|(i, row)| {
        let phi = grid.phi(i);
        let th = theta(phi);
        let tp = theta_perp(phi);
        for (j, v) in row.iter_mut().enumerate() {
            let s = grid.s(j);
            let base = [s * th[0], s * th[1]];
            let Some((lo, hi)) = slab_interval(base, tp, r) else {
                continue;
            };
            let k_lo = (((lo - t_start) / step - 0.5).floor() as i64).max(0);
            let k_hi = (((hi - t_start) / step - 0.5).ceil() as i64).min(n_t - 1);
            let mut acc = 0.0;
            for k in k_lo..=k_hi {
                let t = t_start + (k as f64 + 0.5) * step;
                let x = [base[0] + t * tp[0], base[1] + t * tp[1]];
                let f = source.eval(x);
                if f != 0.0 {
                    acc += f * weight.eval(phi, x);
                }
            }
            *v = acc * step;
        }
    });
    Ok(out)
}

/// Discrete weighted backprojection `R*_ν g(x) = Σ_i g(φ_i, x·θ(φ_i)) ν(φ_i, x) Δφ`.
pub fn backproject(g: &Sinogram, weight: WeightSpec, n: usize) -> Result<Image> {
    let weight = weight.validated()?;
    if n == 0 {
        return Err(Error::ImageTooSmall(n));
    }
    let grid = *g.grid();
    let trig: Vec<(f64, [f64; 2])> = (0..grid.n_phi)
        .map(|i| {
            let phi = grid.phi(i);
            (phi, theta(phi))
        })
        .collect();
    let s_max = grid.s_max;
    let ds = grid.d_s();
    let d_phi = grid.d_phi();
    let mut img = Image::zeros(n);
    img.values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let y = pixel_center(n, i);
        for (j, v) in row.iter_mut().enumerate() {
            let x = [pixel_center(n, j), y];
            let mut acc = 0.0;
            for (k, &(phi, th)) in trig.iter().enumerate() {
                let s = dot(x, th);
                let val = interp_row(g.row(k), s, s_max, ds);
                acc += match weight {
                    WeightSpec::Constant(c) => val * c,
                    WeightSpec::Exponential(_) => val * weight.eval(phi, x),
                };
            }
            *v = acc * d_phi;
        }
    });
    Ok(img)
}
