//! Measures the quantities behind the acceptance thresholds at the
//! reference configuration (n = 256, 360 angles, 363 detector samples).
//!
//! `cargo run --release -p latomo --example calibrate -- 1440` repeats the
//! measurements with another number of view angles.

use std::f64::consts::{FRAC_PI_4, PI};
use std::time::Instant;

use latomo::analysis::{artifact_strength, edge_response_in, highpass};
use latomo::cutoffs::CutoffSpec;
use latomo::filters::FilterKind;
use latomo::geometry::{rasterize, Ellipse, Phantom};
use latomo::microlocal::predict;
use latomo::pipeline::{DataSource, Reconstruction};
use latomo::transforms::SinogramGrid;

fn main() {
    let n_phi = std::env::args()
        .nth(1)
        .map(|v| v.parse().expect("angle count"))
        .unwrap_or(360);
    let grid = SinogramGrid::new(n_phi, 363, 1.5).unwrap();
    println!("{n_phi} angles");
    let n = 256;
    let t = Instant::now();

    let reference = Phantom::reference();
    let truth = rasterize(&reference, n).unwrap();
    let fbp = Reconstruction::new(FilterKind::Fbp, CutoffSpec::None, n)
        .run(DataSource::Phantom(&reference, grid))
        .unwrap();
    let range = truth.values().iter().cloned().fold(f64::MIN, f64::max)
        - truth.values().iter().cloned().fold(f64::MAX, f64::min);
    let (mut se_all, mut se_int, mut n_int) = (0.0, 0.0, 0usize);
    let h = 2.0 / n as f64;
    for i in 0..n {
        for j in 0..n {
            let x = truth.point(i, j);
            let e = fbp.get(i, j) - truth.get(i, j);
            se_all += e * e;
            let near_edge = (0..8).any(|k| {
                let a = k as f64 * PI / 4.0;
                reference.density_at([x[0] + 2.0 * h * a.cos(), x[1] + 2.0 * h * a.sin()])
                    != truth.get(i, j)
            });
            if !near_edge {
                se_int += e * e;
                n_int += 1;
            }
        }
    }
    println!(
        "fbp rmse/range: full {:.4}  interior {:.4} ({} px)  [{:?}]",
        (se_all / (n * n) as f64).sqrt() / range,
        (se_int / n_int as f64).sqrt() / range,
        n_int,
        t.elapsed()
    );

    let dds = Reconstruction::new(FilterKind::Dds, CutoffSpec::None, n)
        .run(DataSource::Phantom(&reference, grid))
        .unwrap();
    println!("dds/fbp sup ratio {:.3e}", dds.max_abs() / fbp.max_abs());

    let (a, b) = (FRAC_PI_4, 3.0 * FRAC_PI_4);
    for (label, phantom) in [
        ("disk r=0.5", Phantom::new(vec![Ellipse::disk([0.0, 0.0], 0.5, 1.0).unwrap()]).unwrap()),
        ("unit disk", Phantom::new(vec![Ellipse::disk([0.0, 0.0], 1.0, 1.0).unwrap()]).unwrap()),
        ("reference", reference.clone()),
    ] {
        let pred = predict(Some(&phantom), a, b, 720).unwrap();
        let full_pred = pred.clone();
        let hard = CutoffSpec::hard(a, b).unwrap();
        let smooth = CutoffSpec::smooth_with_transition(a, b, PI / 12.0, 5).unwrap();
        for filter in [FilterKind::Lambda, FilterKind::Fbp] {
            let run = |c: CutoffSpec| {
                Reconstruction::new(filter, c, n)
                    .run(DataSource::Phantom(&phantom, grid))
                    .unwrap()
            };
            let rh = run(hard);
            let rs = run(smooth);
            let rf = run(CutoffSpec::None);
            let report_h = artifact_strength(&rh, &pred, &phantom).unwrap();
            let report_s = artifact_strength(&rs, &pred, &phantom).unwrap();
            let report_f = artifact_strength(&rf, &full_pred, &phantom).unwrap();
            println!("== {label} {filter}");
            for k in 0..report_h.lines.len() {
                let l = &report_h.lines[k];
                println!(
                    "  line phi={:.3} s={:+.3}: hard {:?} smooth {:?} full {:?}",
                    l.line.phi, l.line.s, l.ratio, report_s.lines[k].ratio, report_f.lines[k].ratio
                );
            }
            println!(
                "  contrast hard {:.3} smooth {:.3} full {:.3}",
                report_h.contrast(),
                report_s.contrast(),
                report_f.contrast()
            );
            let (lo, hi) = smooth.plateau();
            let eh = edge_response_in(&highpass(&rh).unwrap(), &pred, lo, hi).unwrap();
            let es = edge_response_in(&highpass(&rs).unwrap(), &pred, lo, hi).unwrap();
            println!("  plateau edge response hard {eh:.4e} smooth {es:.4e} drop {:.3}", 1.0 - es / eh);
        }
    }
    let id = Reconstruction::new(FilterKind::Identity, CutoffSpec::None, n)
        .run(DataSource::Phantom(&reference, grid))
        .unwrap();
    let pred = predict(Some(&reference), a, b, 720).unwrap();
    let r = artifact_strength(&id, &pred, &reference).unwrap();
    println!("identity contrast {:.3}", r.contrast());
    println!("total {:?}", t.elapsed());
}
