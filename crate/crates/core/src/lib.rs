//! Simulation, reconstruction and artifact prediction for limited-angle
//! tomography with the weighted (generalized) Radon transform.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: ellipse phantoms with exact line integrals and exact
//!   boundary wavefront samples.
//! - [`transforms`]: sinogram/image grids, the weighted forward projector
//!   and the weighted backprojector.
//! - [`filters`]: Fourier-multiplier filters acting in the detector variable.
//! - [`cutoffs`]: hard and smooth angular cutoffs.
//! - [`pipeline`]: cutoff, filter and backprojection composed into a
//!   reconstruction operator.
//! - [`microlocal`]: canonical-relation maps, visible/artifact set
//!   prediction, the principal symbol of the reconstruction operator and
//!   ellipticity checks.
//! - [`analysis`]: measuring predicted singularities and artifact lines in
//!   actual reconstructions.
//! - [`io`]: CSV and 16-bit PGM serialisation.

pub mod analysis;
pub mod cutoffs;
pub mod filters;
pub mod geometry;
pub mod io;
pub mod microlocal;
pub mod pipeline;
pub mod transforms;

mod error;

pub use error::{Error, Result};

/// Unit vector `(cos φ, sin φ)`.
#[inline]
pub fn theta(phi: f64) -> [f64; 2] {
    let (s, c) = phi.sin_cos();
    [c, s]
}

/// Unit vector `(-sin φ, cos φ)`, perpendicular to [`theta`].
#[inline]
pub fn theta_perp(phi: f64) -> [f64; 2] {
    let (s, c) = phi.sin_cos();
    [-s, c]
}

#[inline]
pub(crate) fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Reduce an angle to `[0, 2π)`.
#[inline]
pub fn wrap_angle(phi: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let r = phi.rem_euclid(tau);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= tau {
        0.0
    } else {
        r
    }
}

/// Smallest absolute difference between two angles, in `[0, π]`.
#[inline]
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(std::f64::consts::TAU - d)
}
