//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any fails.
//!
//! Reference configuration: n = 256, 360 angles, 363 detector samples, s_max = 1.5.

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use latomo::analysis::{artifact_strength, edge_response_in, highpass, ArtifactReport};
use latomo::cutoffs::CutoffSpec;
use latomo::filters::FilterKind;
use latomo::geometry::{rasterize, Ellipse, Phantom};
use latomo::microlocal::{
    canonical_back, ellipticity_check, lambda0, lambda1, predict, symbol_l, ImageCovector,
};
use latomo::pipeline::{DataSource, Reconstruction};
use latomo::transforms::{
    backproject, forward_numeric, Image, Sinogram, SinogramGrid, Source, WeightSpec,
};
use latomo::{theta, wrap_angle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 256;
const N_PHI: usize = 360;
const N_S: usize = 363;
const S_MAX: f64 = 1.5;

const ADJOINT_TOL: f64 = 1e-2;
const ADJOINT_BUDGET: Duration = Duration::from_secs(30);
const RMSE_FRACTION: f64 = 0.05;
const SYMBOL_TOL: f64 = 1e-12;
const DDS_SYMBOL_TOL: f64 = 1e-15;
const SYMBOL_BUDGET: Duration = Duration::from_secs(1);
const NULL_RATIO: f64 = 1e-2;
const ROUND_TRIP_TOL: f64 = 1e-12;
const ARTIFACT_RATIO: f64 = 5.0;
const FULL_BAND: (f64, f64) = (0.5, 2.0);
const REDUCTION: f64 = 0.60;
const EDGE_DROP: f64 = 0.20;
const CONTRAST: f64 = 3.0;
const RATE_SLACK: f64 = 0.35;

const RANGE: (f64, f64) = (FRAC_PI_4, 3.0 * FRAC_PI_4);
const TRANSITION: f64 = PI / 12.0;
const ORDER: u32 = 5;
const WF_SAMPLES: usize = 720;

struct Outcome {
    pass: bool,
    detail: String,
}

fn grid() -> SinogramGrid {
    SinogramGrid::new(N_PHI, N_S, S_MAX).unwrap()
}

fn run(phantom: &Phantom, filter: FilterKind, cutoff: CutoffSpec) -> Image {
    Reconstruction::new(filter, cutoff, N)
        .run(DataSource::Phantom(phantom, grid()))
        .unwrap()
}

fn random_covector(rng: &mut ChaCha8Rng) -> ImageCovector {
    let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    let dir = rng.random_range(0.0..TAU);
    let mag = 10f64.powf(rng.random_range(-1.0..2.0));
    let th = theta(dir);
    ImageCovector::new(x, [mag * th[0], mag * th[1]]).unwrap()
}

// Smooth test function pair: Gaussians under a (1 − |x|²)² taper, and
// trigonometric-in-angle times Gaussian-in-offset data.
struct SmoothPair {
    bumps: Vec<([f64; 2], f64, f64)>,
    modes: Vec<(f64, f64, f64, f64, f64)>,
}

impl SmoothPair {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let bumps = (0..3)
            .map(|_| {
                (
                    [rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4)],
                    rng.random_range(0.12..0.3),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        let modes = (0..3)
            .map(|k| {
                (
                    k as f64,
                    rng.random_range(0.0..TAU),
                    rng.random_range(-0.5..0.5),
                    rng.random_range(0.15..0.35),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        SmoothPair { bumps, modes }
    }

    fn f(&self, x: [f64; 2]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if r2 >= 1.0 {
            return 0.0;
        }
        let taper = (1.0 - r2) * (1.0 - r2);
        let sum: f64 = self
            .bumps
            .iter()
            .map(|&(c, w, amp)| {
                let d2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
                amp * (-d2 / (2.0 * w * w)).exp()
            })
            .sum();
        taper * sum
    }

    fn g(&self, phi: f64, s: f64) -> f64 {
        self.modes
            .iter()
            .map(|&(k, psi, s0, w, amp)| {
                amp * (k * phi + psi).cos() * (-(s - s0).powi(2) / (2.0 * w * w)).exp()
            })
            .sum()
    }
}

fn adjoint_error(pair: &SmoothPair, n: usize, weight: WeightSpec) -> f64 {
    let n_s = ((S_MAX * n as f64) as usize) | 1;
    let grid = SinogramGrid::new(2 * n, n_s, S_MAX).unwrap();
    let f = Image::from_fn(n, |x| pair.f(x));
    let g = Sinogram::from_fn(grid, |phi, s| pair.g(phi, s));
    let rf = forward_numeric(Source::Image(&f), weight, grid, 0.5 * grid.d_s()).unwrap();
    let lhs = rf.inner(&g).unwrap();
    let rhs = f.inner(&backproject(&g, weight, n).unwrap()).unwrap();
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let weight = WeightSpec::exponential(0.25).unwrap();
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    let mut rows = Vec::new();
    for _ in 0..5 {
        let pair = SmoothPair::random(&mut rng);
        let errs: Vec<f64> = [64, 128, 256].iter().map(|&n| adjoint_error(&pair, n, weight)).collect();
        monotone &= errs[0] > errs[1] && errs[1] > errs[2];
        worst = worst.max(errs[1]);
        rows.push(format!("{:.1e}/{:.1e}/{:.1e}", errs[0], errs[1], errs[2]));
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: worst < ADJOINT_TOL && monotone && elapsed < ADJOINT_BUDGET,
        detail: format!(
            "max rel. error at 128 {worst:.2e} (< {ADJOINT_TOL:e}); 64/128/256 per pair [{}]; strictly decreasing {monotone}; {:.1}s",
            rows.join(", "),
            elapsed.as_secs_f64()
        ),
    }
}

fn criterion_2() -> Outcome {
    let phantom = Phantom::reference();
    let truth = rasterize(&phantom, N).unwrap();
    let recon = run(&phantom, FilterKind::Fbp, CutoffSpec::None);
    let h = truth.pixel_size();
    let (lo, hi) = truth
        .values()
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    // interior: density constant within two pixels in every direction
    let (mut se, mut count) = (0.0, 0usize);
    for i in 0..N {
        for j in 0..N {
            let x = truth.point(i, j);
            let v = phantom.density_at(x);
            let interior = (0..16).all(|k| {
                let t = k as f64 * PI / 8.0;
                phantom.density_at([x[0] + 2.0 * h * t.cos(), x[1] + 2.0 * h * t.sin()]) == v
            });
            if interior {
                let e = recon.get(i, j) - v;
                se += e * e;
                count += 1;
            }
        }
    }
    let rel = (se / count as f64).sqrt() / (hi - lo);
    Outcome {
        pass: rel < RMSE_FRACTION,
        detail: format!("interior RMSE / density range {rel:.4} (< {RMSE_FRACTION}) over {count} px"),
    }
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let unit = WeightSpec::default();
    let (mut e_fbp, mut e_lambda, mut e_dds): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let c = random_covector(&mut rng);
        let s = |k| symbol_l(&c, &CutoffSpec::None, k, unit, unit).unwrap();
        e_fbp = e_fbp.max((s(FilterKind::Fbp) - 1.0).norm());
        e_lambda = e_lambda.max((s(FilterKind::Lambda) - c.norm()).norm());
        e_dds = e_dds.max(s(FilterKind::Dds).norm());
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: e_fbp <= SYMBOL_TOL
            && e_lambda <= SYMBOL_TOL
            && e_dds <= DDS_SYMBOL_TOL
            && elapsed < SYMBOL_BUDGET,
        detail: format!(
            "max deviation fbp {e_fbp:.1e}, lambda {e_lambda:.1e}, dds {e_dds:.1e}; {:.3}s",
            elapsed.as_secs_f64()
        ),
    }
}

fn criterion_4() -> Outcome {
    let phantom = Phantom::reference();
    let dds = run(&phantom, FilterKind::Dds, CutoffSpec::None);
    let fbp = run(&phantom, FilterKind::Fbp, CutoffSpec::None);
    let ratio = dds.max_abs() / fbp.max_abs();
    Outcome {
        pass: ratio < NULL_RATIO,
        detail: format!("sup|dds| / sup|fbp| = {ratio:.2e} (< {NULL_RATIO:e})"),
    }
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut distinct = true;
    for _ in 0..1000 {
        let c = random_covector(&mut rng);
        let l0 = lambda0(&c).unwrap();
        let l1 = lambda1(&c).unwrap();
        distinct &= l0 != l1;
        for l in [l0, l1] {
            let back = canonical_back(&l).unwrap();
            let dx = (back.x[0] - c.x[0]).abs().max((back.x[1] - c.x[1]).abs());
            let dxi = (back.xi[0] - c.xi[0]).abs().max((back.xi[1] - c.xi[1]).abs()) / c.norm().max(1.0);
            worst = worst.max(dx).max(dxi);
        }
    }
    Outcome {
        pass: worst <= ROUND_TRIP_TOL && distinct,
        detail: format!("max round-trip error {worst:.1e} (<= {ROUND_TRIP_TOL:e}); lambda0 != lambda1 always: {distinct}"),
    }
}

struct LimitedAngle {
    hard: ArtifactReport,
    smooth: ArtifactReport,
    full: ArtifactReport,
}

fn unit_disk_runs() -> LimitedAngle {
    let disk = Phantom::new(vec![Ellipse::disk([0.0, 0.0], 1.0, 1.0).unwrap()]).unwrap();
    let pred = predict(Some(&disk), RANGE.0, RANGE.1, WF_SAMPLES).unwrap();
    let report = |cutoff| artifact_strength(&run(&disk, FilterKind::Lambda, cutoff), &pred, &disk).unwrap();
    LimitedAngle {
        hard: report(CutoffSpec::hard(RANGE.0, RANGE.1).unwrap()),
        smooth: report(CutoffSpec::smooth_with_transition(RANGE.0, RANGE.1, TRANSITION, ORDER).unwrap()),
        full: report(CutoffSpec::None),
    }
}

fn fmt_ratios(r: &ArtifactReport) -> String {
    r.lines
        .iter()
        .map(|l| l.ratio.map_or("none".to_string(), |v| format!("{v:.2}")))
        .collect::<Vec<_>>()
        .join(", ")
}

fn criterion_6(runs: &LimitedAngle) -> Outcome {
    let hard_ok = runs.hard.lines.len() == 4
        && runs.hard.lines.iter().all(|l| l.ratio.is_some_and(|r| r >= ARTIFACT_RATIO));
    let full_ok = runs.full.lines.len() == 4
        && runs
            .full
            .lines
            .iter()
            .all(|l| l.ratio.is_some_and(|r| (FULL_BAND.0..=FULL_BAND.1).contains(&r)));
    Outcome {
        pass: hard_ok && full_ok,
        detail: format!(
            "hard-cutoff ratios [{}] (each >= {ARTIFACT_RATIO}); full-data ratios [{}] (within [{}, {}])",
            fmt_ratios(&runs.hard),
            fmt_ratios(&runs.full),
            FULL_BAND.0,
            FULL_BAND.1
        ),
    }
}

fn criterion_7(runs: &LimitedAngle) -> Outcome {
    let reductions: Vec<Option<f64>> = runs
        .hard
        .lines
        .iter()
        .zip(&runs.smooth.lines)
        .map(|(h, s)| match (h.ratio, s.ratio) {
            (Some(h), Some(s)) if h > 0.0 => Some(1.0 - s / h),
            _ => None,
        })
        .collect();
    let reduced = reductions.len() == 4 && reductions.iter().all(|r| r.is_some_and(|r| r >= REDUCTION));

    let phantom = Phantom::reference();
    let pred = predict(Some(&phantom), RANGE.0, RANGE.1, WF_SAMPLES).unwrap();
    let smooth = CutoffSpec::smooth_with_transition(RANGE.0, RANGE.1, TRANSITION, ORDER).unwrap();
    let (lo, hi) = smooth.plateau();
    let edge = |c| {
        let hp = highpass(&run(&phantom, FilterKind::Lambda, c)).unwrap();
        edge_response_in(&hp, &pred, lo, hi).unwrap()
    };
    let hard_edge = edge(CutoffSpec::hard(RANGE.0, RANGE.1).unwrap());
    let smooth_edge = edge(smooth);
    let drop = 1.0 - smooth_edge / hard_edge;
    Outcome {
        pass: reduced && drop < EDGE_DROP,
        detail: format!(
            "ratio reductions [{}] (each >= {:.0}%); plateau edge response drop {:.1}% (< {:.0}%)",
            reductions
                .iter()
                .map(|r| r.map_or("none".to_string(), |v| format!("{:.1}%", 100.0 * v)))
                .collect::<Vec<_>>()
                .join(", "),
            100.0 * REDUCTION,
            100.0 * drop,
            100.0 * EDGE_DROP
        ),
    }
}

fn criterion_8() -> Outcome {
    let phantom = Phantom::reference();
    let pred = predict(Some(&phantom), RANGE.0, RANGE.1, WF_SAMPLES).unwrap();
    let recon = run(&phantom, FilterKind::Lambda, CutoffSpec::hard(RANGE.0, RANGE.1).unwrap());
    let report = artifact_strength(&recon, &pred, &phantom).unwrap();
    let contrast = report.contrast();
    Outcome {
        pass: contrast >= CONTRAST,
        detail: format!(
            "visible mean {:.3e} / invisible mean {:.3e} = {contrast:.2} (>= {CONTRAST})",
            report.visible_mean, report.invisible_mean
        ),
    }
}

fn criterion_9() -> Outcome {
    let weights = [
        WeightSpec::default(),
        WeightSpec::constant(2.5).unwrap(),
        WeightSpec::exponential(0.7).unwrap(),
        WeightSpec::exponential(-1.2).unwrap(),
    ];
    let cutoffs = [
        CutoffSpec::smooth_with_transition(RANGE.0, RANGE.1, TRANSITION, ORDER).unwrap(),
        CutoffSpec::smooth_with_transition(0.3, 0.3 + 1.4 * PI, TRANSITION, ORDER).unwrap(),
        CutoffSpec::hard(RANGE.0, RANGE.1).unwrap(),
        CutoffSpec::hard(1.0, 1.0 + 0.9 * PI).unwrap(),
    ];
    let mut case1 = 0;
    let mut total = 0;
    let mut seed = 90;
    for filter in [FilterKind::Lambda, FilterKind::Fbp] {
        for mu in weights {
            for cutoff in &cutoffs {
                seed += 1;
                let r = ellipticity_check(cutoff, filter, mu, mu, 2000, seed).unwrap();
                total += 1;
                if r.elliptic && r.case_same_sign {
                    case1 += 1;
                }
            }
        }
    }
    let short = [
        CutoffSpec::hard(RANGE.0, RANGE.1).unwrap(),
        CutoffSpec::smooth_with_transition(RANGE.0, RANGE.1, TRANSITION, ORDER).unwrap(),
    ];
    let case2 = short.iter().all(|c| {
        let r = ellipticity_check(c, FilterKind::Dds, WeightSpec::default(), WeightSpec::default(), 2000, 7)
            .unwrap();
        r.elliptic && r.case_short_range && !r.case_same_sign
    });
    let full = ellipticity_check(
        &CutoffSpec::None,
        FilterKind::Dds,
        WeightSpec::default(),
        WeightSpec::default(),
        2000,
        8,
    )
    .unwrap();
    Outcome {
        pass: case1 == total && case2 && !full.elliptic,
        detail: format!(
            "lambda/fbp elliptic via same-sign case {case1}/{total}; dds short range elliptic via short-range case {case2}; dds full range elliptic {} (min normalized {:.1e})",
            full.elliptic, full.min_normalized
        ),
    }
}

fn central_diff(f: impl Fn(f64) -> f64, x: f64, j: u32, h: f64) -> f64 {
    // j-th central difference: Σ (−1)^m C(j, m) f(x + (j/2 − m) h) / h^j
    let mut sum = 0.0;
    let mut binom = 1.0;
    for m in 0..=j {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * f(x + (j as f64 / 2.0 - m as f64) * h);
        binom = binom * (j - m) as f64 / (m + 1) as f64;
    }
    sum / h.powi(j as i32)
}

fn criterion_10() -> Outcome {
    let c = CutoffSpec::smooth_with_transition(RANGE.0, RANGE.1, TRANSITION, ORDER).unwrap();
    let (a, b) = c.range();
    let (ai, bi) = c.plateau();
    let mut worst: f64 = 0.0;
    let mut vanishing = true;
    for x in [a, ai, bi, b] {
        for j in 1..ORDER {
            let steps = [TRANSITION / 64.0, TRANSITION / 128.0, TRANSITION / 256.0];
            let d: Vec<f64> = steps.iter().map(|&h| central_diff(|p| c.eval(wrap_angle(p)), x, j, h).abs()).collect();
            vanishing &= d[0] > d[1] && d[1] > d[2];
            let expect = (ORDER - j) as f64;
            for w in d.windows(2) {
                worst = worst.max(((w[0] / w[1]).log2() - expect).abs());
            }
        }
    }
    Outcome {
        pass: vanishing && worst < RATE_SLACK,
        detail: format!(
            "derivatives 1..{} at the four junctions shrink under refinement: {vanishing}; max |observed order - (k - j)| {worst:.3} (< {RATE_SLACK})",
            ORDER - 1
        ),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "adjoint consistency", criterion_1()),
        (2, "full-data FBP exactness", criterion_2()),
        (3, "symbol identities", criterion_3()),
        (4, "null operator", criterion_4()),
        (5, "canonical relation round trip", criterion_5()),
    ];
    let runs = unit_disk_runs();
    results.push((6, "artifact-line prediction", criterion_6(&runs)));
    results.push((7, "artifact reduction", criterion_7(&runs)));
    results.push((8, "visible vs invisible", criterion_8()));
    results.push((9, "ellipticity verdicts", criterion_9()));
    results.push((10, "cutoff regularity", criterion_10()));

    let mut failed = 0;
    for (k, name, o) in &results {
        println!("criterion {k:>2} {:<4} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.1}s)",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
