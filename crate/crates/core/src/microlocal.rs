//! Microlocal bookkeeping for the weighted line transform.
//!
//! An image covector `(x, ξ dx)` has exactly two preimages on the canonical
//! relation of `R_μ`, the data covectors `λ₀(x, ξ)` and `λ₁(x, ξ)` sitting
//! over the angles `φ₀` (where `ξ` points along `θ(φ₀)`) and `φ₁ = φ₀ + π`.
//! Limited data on `(a, b)` keep the singularities whose direction lies in
//! `(a, b)` and may add artifacts along lines tangent to singularities whose
//! direction is exactly `a` or `b`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cutoffs::CutoffSpec;
use crate::filters::{filter_symbol, FilterKind};
use crate::geometry::{wavefront_oracle, Phantom, WavefrontElement};
use crate::transforms::WeightSpec;
use crate::{angle_distance, dot, theta, theta_perp, wrap_angle, Error, Result};

/// `(φ, s; ν dφ + α ds)` in `T*(Ξ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataCovector {
    pub phi: f64,
    pub s: f64,
    pub nu: f64,
    pub alpha: f64,
}

/// `(x, ξ dx)` in `T*(ℝ²) \ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageCovector {
    pub x: [f64; 2],
    pub xi: [f64; 2],
}

impl ImageCovector {
    pub fn new(x: [f64; 2], xi: [f64; 2]) -> Result<Self> {
        if xi == [0.0, 0.0] {
            return Err(Error::ZeroCovector);
        }
        Ok(ImageCovector { x, xi })
    }

    pub fn norm(&self) -> f64 {
        self.xi[0].hypot(self.xi[1])
    }
}

/// Line `{x : x·θ(φ) = s}` along which a singularity at `generator` with
/// covector `covector_sign·θ(φ)` may spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArtifactLine {
    pub phi: f64,
    pub s: f64,
    pub generator: [f64; 2],
    pub covector_sign: i8,
}

/// Angle in `[0, 2π)` with `ξ = ‖ξ‖θ(φ₀)`.
pub fn phi0(xi: [f64; 2]) -> Result<f64> {
    if xi == [0.0, 0.0] {
        return Err(Error::ZeroCovector);
    }
    Ok(wrap_angle(xi[1].atan2(xi[0])))
}

/// Angle in `[0, 2π)` with `ξ = −‖ξ‖θ(φ₁)`.
pub fn phi1(xi: [f64; 2]) -> Result<f64> {
    Ok(wrap_angle(phi0(xi)? + PI))
}

pub fn lambda0(c: &ImageCovector) -> Result<DataCovector> {
    let phi = phi0(c.xi)?;
    let r = c.norm();
    Ok(DataCovector {
        phi,
        s: dot(c.x, theta(phi)),
        nu: -r * dot(c.x, theta_perp(phi)),
        alpha: r,
    })
}

pub fn lambda1(c: &ImageCovector) -> Result<DataCovector> {
    let phi = phi1(c.xi)?;
    let r = c.norm();
    Ok(DataCovector {
        phi,
        s: dot(c.x, theta(phi)),
        nu: r * dot(c.x, theta_perp(phi)),
        alpha: -r,
    })
}

/// Image covector reached from a data covector through the transposed
/// canonical relation: `x = sθ(φ) − (ν/α)θ⊥(φ)`, `ξ = αθ(φ)`.
pub fn canonical_back(d: &DataCovector) -> Result<ImageCovector> {
    if d.alpha == 0.0 || !d.alpha.is_finite() {
        return Err(Error::NotOnCanonicalRelation);
    }
    let th = theta(d.phi);
    let tp = theta_perp(d.phi);
    let t = -d.nu / d.alpha;
    Ok(ImageCovector {
        x: [d.s * th[0] + t * tp[0], d.s * th[1] + t * tp[1]],
        xi: [d.alpha * th[0], d.alpha * th[1]],
    })
}

fn is_full_range(a: f64, b: f64) -> bool {
    b - a >= TAU
}

/// Whether the direction lies in the open interval `(a, b)` (mod 2π).
fn in_open_range(direction: f64, a: f64, b: f64) -> bool {
    if is_full_range(a, b) {
        return true;
    }
    let d = wrap_angle(direction);
    let lo = wrap_angle(a);
    let width = b - a;
    let off = wrap_angle(d - lo);
    off > 0.0 && off < width
}

/// Split every element into its oriented covectors.
fn oriented(wf: &[WavefrontElement]) -> impl Iterator<Item = WavefrontElement> + '_ {
    wf.iter().flat_map(|e| {
        e.directions().map(move |(dir, _)| WavefrontElement {
            normal_angle: dir,
            both_signs: false,
            ..*e
        })
    })
}

/// Oriented covectors of `wf` split into those with direction in `(a, b)` and the rest.
pub fn partition(
    wf: &[WavefrontElement],
    a: f64,
    b: f64,
) -> (Vec<WavefrontElement>, Vec<WavefrontElement>) {
    oriented(wf).partition(|e| in_open_range(e.normal_angle, a, b))
}

/// Oriented covectors of `wf` whose direction lies in `(a, b)`. Each
/// returned element has `both_signs == false` and carries the direction
/// of the visible covector.
pub fn visible_set(wf: &[WavefrontElement], a: f64, b: f64) -> Vec<WavefrontElement> {
    oriented(wf)
        .filter(|e| in_open_range(e.normal_angle, a, b))
        .collect()
}

/// Lines generated by wavefront elements whose direction equals `a` or `b`.
///
/// Each element matches an endpoint when its direction is within its own
/// `angular_tolerance`. Among the matches of one component boundary, one
/// endpoint and one covector sign, only the closest is kept, so a convex
/// boundary contributes exactly its tangency point.
pub fn artifact_lines(wf: &[WavefrontElement], a: f64, b: f64) -> Vec<ArtifactLine> {
    if is_full_range(a, b) {
        return Vec::new();
    }
    let mut components: Vec<usize> = wf.iter().map(|e| e.component).collect();
    components.sort_unstable();
    components.dedup();

    let mut lines = Vec::new();
    for &comp in &components {
        for endpoint in [a, b] {
            for sign in [1i8, -1] {
                let best = wf
                    .iter()
                    .filter(|e| e.component == comp)
                    .filter_map(|e| {
                        let (dir, _) = e.directions().find(|&(_, sg)| sg == sign)?;
                        let dist = angle_distance(dir, endpoint);
                        (dist <= e.angular_tolerance * (1.0 + 1e-9)).then_some((dist, e))
                    })
                    .min_by(|x, y| x.0.total_cmp(&y.0));
                if let Some((_, e)) = best {
                    lines.push(ArtifactLine {
                        phi: endpoint,
                        s: dot(e.point, theta(endpoint)),
                        generator: e.point,
                        covector_sign: sign,
                    });
                }
            }
        }
    }
    lines
}

/// Principal symbol of `R*_ν P K R_μ` at `(x, ξ)`:
///
/// `σ = (2π/‖ξ‖) Σ_{i=0,1} cutoff(φᵢ) p(αᵢ) ν(φᵢ, x) μ(φᵢ, x)`
///
/// with `(φᵢ, αᵢ)` taken from `λᵢ(x, ξ)`.
pub fn symbol_l(
    c: &ImageCovector,
    cutoff: &CutoffSpec,
    filter: FilterKind,
    mu: WeightSpec,
    nu: WeightSpec,
) -> Result<Complex64> {
    let [t0, t1] = symbol_terms(c, filter, mu, nu)?;
    let l0 = lambda0(c)?;
    let l1 = lambda1(c)?;
    let sum = t0 * cutoff.eval(l0.phi) + t1 * cutoff.eval(l1.phi);
    Ok(sum * (TAU / c.norm()))
}

/// The two bracketed terms of the symbol without the cutoff factor.
fn symbol_terms(
    c: &ImageCovector,
    filter: FilterKind,
    mu: WeightSpec,
    nu: WeightSpec,
) -> Result<[Complex64; 2]> {
    let l0 = lambda0(c)?;
    let l1 = lambda1(c)?;
    let term = |l: &DataCovector| {
        filter_symbol(filter, l.alpha) * (nu.eval(l.phi, c.x) * mu.eval(l.phi, c.x))
    };
    Ok([term(&l0), term(&l1)])
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipticityReport {
    /// Smallest `|σ|·‖ξ‖/(2π)` over the samples, divided by the larger of
    /// the two cutoff-free terms at that sample.
    pub min_normalized: f64,
    pub argmin: Option<ImageCovector>,
    pub elliptic: bool,
    /// Filter symbol real and single-signed on the sampled data covectors.
    pub case_same_sign: bool,
    /// `b − a < π` and the filter symbol nonzero on the sampled data covectors.
    pub case_short_range: bool,
    pub samples: usize,
}

pub const ELLIPTIC_THRESHOLD: f64 = 1e-9;

/// Sample covectors in `V_(a', b')` and test whether the symbol stays away from zero.
///
/// Positions are uniform in `[-1, 1]²`, directions uniform in the plateau of
/// the cutoff with a random sign, magnitudes log-uniform in `[0.1, 100]`.
pub fn ellipticity_check(
    cutoff: &CutoffSpec,
    filter: FilterKind,
    mu: WeightSpec,
    nu: WeightSpec,
    n_samples: usize,
    seed: u64,
) -> Result<EllipticityReport> {
    let cutoff = cutoff.validated()?;
    let mu = mu.validated()?;
    let nu = nu.validated()?;
    let (lo, hi) = cutoff.plateau();
    let (a, b) = cutoff.range();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut min_normalized = f64::INFINITY;
    let mut argmin = None;
    let mut sign_of_p: Option<f64> = None;
    let mut p_real_single_signed = true;
    let mut p_nonzero = true;

    for _ in 0..n_samples {
        let x = [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
        let mut dir = rng.random_range(lo..hi);
        if dir == lo {
            dir = 0.5 * (lo + hi);
        }
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let mag = 10f64.powf(rng.random_range(-1.0..2.0));
        let th = theta(dir);
        let c = ImageCovector::new(x, [sign * mag * th[0], sign * mag * th[1]])?;

        for l in [lambda0(&c)?, lambda1(&c)?] {
            let p = filter_symbol(filter, l.alpha);
            if p.norm() == 0.0 {
                p_nonzero = false;
            }
            if p.im != 0.0 || p.re == 0.0 {
                p_real_single_signed = false;
            } else {
                let sg = p.re.signum();
                match sign_of_p {
                    None => sign_of_p = Some(sg),
                    Some(prev) if prev != sg => p_real_single_signed = false,
                    _ => {}
                }
            }
        }

        let terms = symbol_terms(&c, filter, mu, nu)?;
        let scale = terms[0].norm().max(terms[1].norm());
        let sigma = symbol_l(&c, &cutoff, filter, mu, nu)?;
        let normalized = if scale > 0.0 {
            sigma.norm() * c.norm() / TAU / scale
        } else {
            0.0
        };
        if normalized < min_normalized {
            min_normalized = normalized;
            argmin = Some(c);
        }
    }
    if n_samples == 0 {
        min_normalized = 0.0;
    }

    Ok(EllipticityReport {
        min_normalized,
        argmin,
        elliptic: n_samples > 0 && min_normalized > ELLIPTIC_THRESHOLD,
        case_same_sign: n_samples > 0 && p_real_single_signed,
        case_short_range: n_samples > 0 && b - a < PI && p_nonzero,
        samples: n_samples,
    })
}

/// Predicted wavefront content of a limited-angle reconstruction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Prediction {
    pub a: f64,
    pub b: f64,
    pub visible: Vec<WavefrontElement>,
    pub invisible: Vec<WavefrontElement>,
    pub artifacts: Vec<ArtifactLine>,
    pub notes: Vec<String>,
}

/// Visible/invisible split of the phantom's boundary covectors plus the
/// artifact lines generated at the range endpoints.
pub fn predict(phantom: Option<&Phantom>, a: f64, b: f64, m: usize) -> Result<Prediction> {
    if !(a < b) {
        return Err(Error::InvalidCutoff(format!("need a < b, got a={a}, b={b}")));
    }
    let mut notes = Vec::new();
    if is_full_range(a, b) {
        notes.push(
            "full angular range: every direction is visible and no endpoint artifacts are \
             predicted; a hard cutoff at 0 = 2π would still be a discontinuity of the data"
                .to_string(),
        );
    } else if b - a >= PI {
        notes.push(format!(
            "b - a = {:.6} >= π: visible singularities are not guaranteed to be recovered",
            b - a
        ));
    }
    let Some(phantom) = phantom else {
        return Ok(Prediction {
            a,
            b,
            notes,
            ..Default::default()
        });
    };
    let wf = wavefront_oracle(phantom, m)?;
    let (visible, invisible) = partition(&wf, a, b);
    let artifacts = artifact_lines(&wf, a, b);
    Ok(Prediction {
        a,
        b,
        visible,
        invisible,
        artifacts,
        notes,
    })
}
