//! Ellipse phantoms.
//!
//! A phantom is a sum of weighted ellipse indicators. Both its line
//! integrals and its wavefront set are known in closed form: every boundary
//! point carries the conormal direction (with both signs, since the
//! indicator jumps across the boundary).

use crate::transforms::Image;
use crate::{dot, theta, wrap_angle, Error, Result};

/// Slack allowed when checking that an ellipse fits in `[-1, 1]²`.
const CONTAINMENT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub center: [f64; 2],
    /// Semi-axis along the tilted x-axis.
    pub a: f64,
    /// Semi-axis along the tilted y-axis.
    pub b: f64,
    /// Rotation of the first semi-axis, radians in `[0, π)`.
    pub tilt: f64,
    pub density: f64,
}

impl Ellipse {
    pub fn new(center: [f64; 2], a: f64, b: f64, tilt: f64, density: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidEllipse(format!(
                "semi-axes must be positive, got ({a}, {b})"
            )));
        }
        if !center.iter().all(|c| c.is_finite()) || !tilt.is_finite() || !density.is_finite() {
            return Err(Error::InvalidEllipse("non-finite parameter".into()));
        }
        let tilt = tilt.rem_euclid(std::f64::consts::PI);
        let e = Ellipse {
            center,
            a,
            b,
            tilt,
            density,
        };
        let [hx, hy] = e.half_extent();
        if center[0].abs() + hx > 1.0 + CONTAINMENT_SLACK
            || center[1].abs() + hy > 1.0 + CONTAINMENT_SLACK
        {
            return Err(Error::InvalidEllipse(format!(
                "ellipse at ({}, {}) with semi-axes ({a}, {b}) leaves the unit square",
                center[0], center[1]
            )));
        }
        Ok(e)
    }

    /// Disk of the given radius and density.
    pub fn disk(center: [f64; 2], radius: f64, density: f64) -> Result<Self> {
        Self::new(center, radius, radius, 0.0, density)
    }

    /// Half widths of the axis-aligned bounding box.
    pub fn half_extent(&self) -> [f64; 2] {
        let (s, c) = self.tilt.sin_cos();
        [
            (self.a * self.a * c * c + self.b * self.b * s * s).sqrt(),
            (self.a * self.a * s * s + self.b * self.b * c * c).sqrt(),
        ]
    }

    /// Coordinates of `x` in the ellipse frame, scaled so the ellipse is the unit disk.
    fn to_disk(&self, x: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.tilt.sin_cos();
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        [(c * dx + s * dy) / self.a, (-s * dx + c * dy) / self.b]
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        let [u, v] = self.to_disk(x);
        u * u + v * v <= 1.0
    }

    /// Boundary point at disk-parameter angle `t`.
    pub fn boundary_point(&self, t: f64) -> [f64; 2] {
        let (st, ct) = t.sin_cos();
        let (s, c) = self.tilt.sin_cos();
        let u = self.a * ct;
        let v = self.b * st;
        [self.center[0] + c * u - s * v, self.center[1] + s * u + c * v]
    }

    /// Outward normal angle in `[0, 2π)` at disk-parameter angle `t`.
    pub fn normal_angle(&self, t: f64) -> f64 {
        let (st, ct) = t.sin_cos();
        let (s, c) = self.tilt.sin_cos();
        let u = ct / self.a;
        let v = st / self.b;
        wrap_angle((s * u + c * v).atan2(c * u - s * v))
    }

    /// Density times the length of `L(φ, s) ∩ ellipse`.
    ///
    /// With `t = Rᵀθ(φ)` and `w = (a t₁, b t₂)` the line becomes `u·w = s − c·θ`
    /// in disk coordinates, so the chord is `2ab√(1 − d²)/‖w‖` with
    /// `d = (s − c·θ)/‖w‖`.
    pub fn chord_length(&self, phi: f64, s: f64) -> f64 {
        let th = theta(phi);
        let (sn, cs) = self.tilt.sin_cos();
        let t1 = cs * th[0] + sn * th[1];
        let t2 = -sn * th[0] + cs * th[1];
        let rho = (self.a * self.a * t1 * t1 + self.b * self.b * t2 * t2).sqrt();
        let d = (s - dot(self.center, th)) / rho;
        if d.abs() >= 1.0 {
            return 0.0;
        }
        self.density * 2.0 * self.a * self.b * (1.0 - d * d).sqrt() / rho
    }
}

/// One element `(x, ±θ(φ) dx)` of a wavefront set.
///
/// `normal_angle` is the direction `φ` of the covector; when `both_signs`
/// is set the element stands for both `θ(φ)` and `−θ(φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavefrontElement {
    pub point: [f64; 2],
    pub normal_angle: f64,
    pub both_signs: bool,
    /// Index of the phantom component whose boundary carries the element.
    pub component: usize,
    /// Half the normal-angle gap to the neighbouring samples on the same boundary.
    pub angular_tolerance: f64,
}

impl WavefrontElement {
    /// Covector directions represented by the element, paired with their sign
    /// relative to the outward normal.
    pub fn directions(&self) -> impl Iterator<Item = (f64, i8)> {
        let opposite = self
            .both_signs
            .then(|| (wrap_angle(self.normal_angle + std::f64::consts::PI), -1));
        std::iter::once((self.normal_angle, 1)).chain(opposite)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    components: Vec<Ellipse>,
}

impl Phantom {
    pub fn new(components: Vec<Ellipse>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyPhantom);
        }
        Ok(Phantom { components })
    }

    pub fn components(&self) -> &[Ellipse] {
        &self.components
    }

    /// Three-ellipse asymmetric configuration used as the default experiment.
    pub fn reference() -> Self {
        let components = vec![
            Ellipse::new([0.05, -0.04], 0.68, 0.52, 0.3, 1.0),
            Ellipse::new([-0.28, 0.18], 0.16, 0.10, 0.6, 0.5),
            Ellipse::new([0.30, -0.22], 0.12, 0.20, 1.1, -0.4),
        ];
        Phantom {
            components: components.into_iter().map(|e| e.expect("reference phantom")).collect(),
        }
    }

    /// Total density at `x`.
    pub fn density_at(&self, x: [f64; 2]) -> f64 {
        self.components
            .iter()
            .filter(|e| e.contains(x))
            .map(|e| e.density)
            .sum()
    }

    /// Whether `x` lies in the union of the components.
    pub fn in_support(&self, x: [f64; 2]) -> bool {
        self.components.iter().any(|e| e.contains(x))
    }

    /// Exact unweighted line integral over `L(φ, s)`.
    pub fn line_integral(&self, phi: f64, s: f64) -> f64 {
        self.components.iter().map(|e| e.chord_length(phi, s)).sum()
    }
}

/// Sample the phantom at pixel centres of an `n × n` grid over `[-1, 1]²`.
pub fn rasterize(phantom: &Phantom, n: usize) -> Result<Image> {
    if n < 16 {
        return Err(Error::ImageTooSmall(n));
    }
    Ok(Image::from_fn(n, |x| phantom.density_at(x)))
}

/// Boundary samples of every component with their outward normals.
///
/// `m` points per ellipse, uniform in the disk-parameter angle. Coincident
/// boundaries of different components are reported independently.
pub fn wavefront_oracle(phantom: &Phantom, m: usize) -> Result<Vec<WavefrontElement>> {
    if m < 8 {
        return Err(Error::InvalidEllipse(format!(
            "need at least 8 boundary samples per component, got {m}"
        )));
    }
    let mut out = Vec::with_capacity(m * phantom.components.len());
    for (ci, e) in phantom.components.iter().enumerate() {
        let params: Vec<f64> = (0..m)
            .map(|k| std::f64::consts::TAU * k as f64 / m as f64)
            .collect();
        let normals: Vec<f64> = params.iter().map(|&t| e.normal_angle(t)).collect();
        for k in 0..m {
            let prev = normals[(k + m - 1) % m];
            let next = normals[(k + 1) % m];
            let gap = crate::angle_distance(normals[k], prev).max(crate::angle_distance(normals[k], next));
            out.push(WavefrontElement {
                point: e.boundary_point(params[k]),
                normal_angle: normals[k],
                both_signs: true,
                component: ci,
                angular_tolerance: 0.5 * gap,
            });
        }
    }
    Ok(out)
}
