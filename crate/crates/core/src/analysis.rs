//! Measuring predicted singularities in reconstructions.
//!
//! The detector is the magnitude of the 5-point Laplacian. Artifact lines
//! are measured outside the (dilated) phantom support and compared with
//! control lines at the same offsets rotated by ±π/7 and ±2π/7.

use std::f64::consts::PI;

use crate::geometry::Phantom;
use crate::microlocal::{ArtifactLine, Prediction};
use crate::transforms::Image;
use crate::{angle_distance, theta, theta_perp, Error, Result};

/// Angular offsets of the control lines.
pub const CONTROL_ROTATIONS: [f64; 4] = [PI / 7.0, -PI / 7.0, 2.0 * PI / 7.0, -2.0 * PI / 7.0];

/// Pixels added around the phantom support before measuring artifacts.
pub const DEFAULT_DILATION: usize = 3;

/// `|Δf|` with the 5-point stencil, scaled by `1/h²`. The outer ring of pixels is zero.
pub fn highpass(img: &Image) -> Result<Image> {
    let n = img.n();
    if n < 3 {
        return Err(Error::ImageTooSmall(n));
    }
    let h = img.pixel_size();
    let inv_h2 = 1.0 / (h * h);
    let v = img.values();
    let mut out = vec![0.0; n * n];
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let c = v[i * n + j];
            let lap = v[(i - 1) * n + j] + v[(i + 1) * n + j] + v[i * n + j - 1] + v[i * n + j + 1]
                - 4.0 * c;
            out[i * n + j] = lap.abs() * inv_h2;
        }
    }
    Image::from_values(n, out)
}

/// Pixels excluded from artifact measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionMask {
    n: usize,
    excluded: Vec<bool>,
}

impl ExclusionMask {
    pub fn empty(n: usize) -> Self {
        ExclusionMask {
            n,
            excluded: vec![false; n * n],
        }
    }

    /// Phantom support dilated by a disk of `dilation` pixels.
    pub fn from_phantom(phantom: &Phantom, n: usize, dilation: usize) -> Self {
        let support = Image::from_fn(n, |x| if phantom.in_support(x) { 1.0 } else { 0.0 });
        let r = dilation as i64;
        let mut excluded = vec![false; n * n];
        for i in 0..n as i64 {
            for j in 0..n as i64 {
                if support.get(i as usize, j as usize) == 0.0 {
                    continue;
                }
                for di in -r..=r {
                    for dj in -r..=r {
                        if di * di + dj * dj > r * r {
                            continue;
                        }
                        let (ii, jj) = (i + di, j + dj);
                        if ii >= 0 && jj >= 0 && ii < n as i64 && jj < n as i64 {
                            excluded[ii as usize * n + jj as usize] = true;
                        }
                    }
                }
            }
        }
        ExclusionMask { n, excluded }
    }

    /// Whether every pixel is excluded.
    pub fn full(n: usize) -> Self {
        ExclusionMask {
            n,
            excluded: vec![true; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_excluded(&self, i: usize, j: usize) -> bool {
        self.excluded[i * self.n + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineStats {
    pub mean: f64,
    pub max: f64,
    pub samples: usize,
}

/// Sample a highpass image along `x·θ(φ) = s`, half a pixel apart, skipping
/// excluded pixels and the zeroed outer ring. `Ok(None)` when no sample survives.
pub fn profile_highpass(
    hp: &Image,
    phi: f64,
    s: f64,
    exclusion: &ExclusionMask,
) -> Result<Option<LineStats>> {
    let th = theta(phi);
    let tp = theta_perp(phi);
    // support function of the unit square
    if s.abs() > th[0].abs() + th[1].abs() {
        return Err(Error::LineMissesImage { phi, s });
    }
    if exclusion.n() != hp.n() {
        return Err(Error::GridMismatch("exclusion mask and image sizes differ".into()));
    }
    let n = hp.n();
    let h = hp.pixel_size();
    let base = [s * th[0], s * th[1]];
    // stay between the centres of the second and second-to-last pixels
    let r = 1.0 - 1.5 * h;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for k in 0..2 {
        if tp[k].abs() < 1e-15 {
            if base[k].abs() > r {
                return Ok(None);
            }
        } else {
            let t1 = (-r - base[k]) / tp[k];
            let t2 = (r - base[k]) / tp[k];
            lo = lo.max(t1.min(t2));
            hi = hi.min(t1.max(t2));
        }
    }
    if lo > hi {
        return Ok(None);
    }
    let step = 0.5 * h;
    let count = ((hi - lo) / step).floor() as usize + 1;
    let mut sum = 0.0;
    let mut max: f64 = 0.0;
    let mut samples = 0;
    for k in 0..count {
        let t = lo + k as f64 * step;
        let x = [base[0] + t * tp[0], base[1] + t * tp[1]];
        let (pr, pc) = hp.to_pixel(x);
        let (i, j) = (pr.round() as usize, pc.round() as usize);
        if i >= n || j >= n || exclusion.is_excluded(i, j) {
            continue;
        }
        let v = hp.bilinear(x);
        sum += v;
        max = max.max(v);
        samples += 1;
    }
    Ok((samples > 0).then(|| LineStats {
        mean: sum / samples as f64,
        max,
        samples,
    }))
}

/// Highpass statistics of `img` along a line, outside the exclusion mask.
pub fn line_profile(
    img: &Image,
    phi: f64,
    s: f64,
    exclusion: &ExclusionMask,
) -> Result<Option<LineStats>> {
    profile_highpass(&highpass(img)?, phi, s, exclusion)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineReport {
    pub line: ArtifactLine,
    /// Mean highpass along the predicted line, `None` when fully excluded.
    pub mean: Option<f64>,
    pub control_mean: Option<f64>,
    pub controls_used: usize,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResponse {
    pub point: [f64; 2],
    pub component: usize,
    pub visible: bool,
    pub response: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArtifactReport {
    pub lines: Vec<LineReport>,
    pub points: Vec<PointResponse>,
    pub visible_mean: f64,
    pub invisible_mean: f64,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
}

impl ArtifactReport {
    /// Visible over invisible mean edge response.
    pub fn contrast(&self) -> f64 {
        self.visible_mean / self.invisible_mean
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.lines.iter().filter_map(|l| l.ratio).collect()
    }
}

/// Largest highpass value within `radius` pixels of `x`.
fn point_response(hp: &Image, x: [f64; 2], radius: f64) -> f64 {
    let (pr, pc) = hp.to_pixel(x);
    let n = hp.n() as i64;
    let r = radius.ceil() as i64;
    let (ci, cj) = (pr.round() as i64, pc.round() as i64);
    let mut best: f64 = 0.0;
    for i in (ci - r).max(0)..=(ci + r).min(n - 1) {
        for j in (cj - r).max(0)..=(cj + r).min(n - 1) {
            let d2 = (i as f64 - pr).powi(2) + (j as f64 - pc).powi(2);
            if d2 <= radius * radius {
                best = best.max(hp.get(i as usize, j as usize));
            }
        }
    }
    best
}

/// Pixel radius searched around each wavefront point for the edge response.
pub const POINT_RADIUS: f64 = 1.5;

fn same_point(p: &[f64; 2], q: &[f64; 2]) -> bool {
    (p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12
}

/// Compare a reconstruction with a prediction.
///
/// Each predicted line gets the ratio of its mean highpass response
/// (outside the dilated support) to the mean over its control lines. Each
/// wavefront point gets the largest highpass value within
/// [`POINT_RADIUS`] pixels; a point counts as visible when any of its
/// covectors is visible.
pub fn artifact_strength(
    recon: &Image,
    prediction: &Prediction,
    phantom: &Phantom,
) -> Result<ArtifactReport> {
    let hp = highpass(recon)?;
    let mask = ExclusionMask::from_phantom(phantom, recon.n(), DEFAULT_DILATION);
    artifact_strength_with(&hp, prediction, &mask)
}

/// [`artifact_strength`] on a precomputed highpass image and mask.
pub fn artifact_strength_with(
    hp: &Image,
    prediction: &Prediction,
    mask: &ExclusionMask,
) -> Result<ArtifactReport> {
    let tau = prediction
        .visible
        .iter()
        .chain(&prediction.invisible)
        .map(|e| e.angular_tolerance)
        .fold(0.0, f64::max);
    let predicted_angles: Vec<f64> = prediction.artifacts.iter().map(|l| l.phi).collect();
    // lines at φ and φ + π coincide, so compare modulo π
    let near_predicted = |phi: f64| {
        predicted_angles.iter().any(|&p| {
            let d = angle_distance(phi, p);
            d.min(PI - d) < 3.0 * tau
        })
    };

    let mut lines = Vec::with_capacity(prediction.artifacts.len());
    for line in &prediction.artifacts {
        let mean = profile_highpass(hp, line.phi, line.s, mask)?.map(|st| st.mean);
        let mut control_sum = 0.0;
        let mut controls_used = 0;
        for rot in CONTROL_ROTATIONS {
            let phi = line.phi + rot;
            if near_predicted(phi) {
                continue;
            }
            for s in [line.s, -line.s] {
                if let Ok(Some(st)) = profile_highpass(hp, phi, s, mask) {
                    control_sum += st.mean;
                    controls_used += 1;
                }
            }
        }
        let control_mean = (controls_used > 0).then(|| control_sum / controls_used as f64);
        let ratio = match (mean, control_mean) {
            (Some(m), Some(c)) if c > 0.0 => Some(m / c),
            _ => None,
        };
        lines.push(LineReport {
            line: *line,
            mean,
            control_mean,
            controls_used,
            ratio,
        });
    }

    let mut points: Vec<PointResponse> = Vec::new();
    for e in &prediction.visible {
        if !points.iter().any(|p| p.component == e.component && same_point(&p.point, &e.point)) {
            points.push(PointResponse {
                point: e.point,
                component: e.component,
                visible: true,
                response: point_response(hp, e.point, POINT_RADIUS),
            });
        }
    }
    for e in &prediction.invisible {
        if !points.iter().any(|p| p.component == e.component && same_point(&p.point, &e.point)) {
            points.push(PointResponse {
                point: e.point,
                component: e.component,
                visible: false,
                response: point_response(hp, e.point, POINT_RADIUS),
            });
        }
    }
    let group_mean = |vis: bool| {
        let (sum, count) = points
            .iter()
            .filter(|p| p.visible == vis)
            .fold((0.0, 0usize), |(s, c), p| (s + p.response, c + 1));
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    };
    let visible_mean = group_mean(true);
    let invisible_mean = group_mean(false);

    let ratios: Vec<f64> = lines.iter().filter_map(|l| l.ratio).collect();
    let min_ratio = ratios.iter().copied().reduce(f64::min);
    let max_ratio = ratios.iter().copied().reduce(f64::max);
    Ok(ArtifactReport {
        lines,
        points,
        visible_mean,
        invisible_mean,
        min_ratio,
        max_ratio,
    })
}

/// Mean edge response over wavefront points having a covector with direction
/// strictly inside `(lo, hi)`.
pub fn edge_response_in(hp: &Image, prediction: &Prediction, lo: f64, hi: f64) -> Option<f64> {
    let mut seen: Vec<[f64; 2]> = Vec::new();
    let mut sum = 0.0;
    for e in prediction.visible.iter().chain(&prediction.invisible) {
        let d = crate::wrap_angle(e.normal_angle - lo);
        if d > 0.0 && d < hi - lo && !seen.iter().any(|p| same_point(p, &e.point)) {
            seen.push(e.point);
            sum += point_response(hp, e.point, POINT_RADIUS);
        }
    }
    (!seen.is_empty()).then(|| sum / seen.len() as f64)
}
