use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use latomo::analysis::{artifact_strength, edge_response_in, highpass, ArtifactReport};
use latomo::cutoffs::CutoffSpec;
use latomo::io::{
    artifact_lines_csv, encode_pgm16, image_to_csv, report_csv, report_summary, sinogram_from_csv,
    sinogram_to_csv, wavefront_csv, write_file,
};
use latomo::microlocal::{ellipticity_check, predict, symbol_l, ImageCovector, Prediction};
use latomo::pipeline::{DataSource, Reconstruction};
use latomo::transforms::{forward_analytic_weighted, Image, Sinogram};

use crate::config::ExperimentConfig;

pub const SINOGRAM_CSV: &str = "sinogram.csv";
pub const SINOGRAM_PGM: &str = "sinogram.pgm";
pub const SINOGRAM_SCALE: &str = "sinogram.scale";
pub const RECON_CSV: &str = "reconstruction.csv";
pub const RECON_PGM: &str = "reconstruction.pgm";
pub const RECON_SCALE: &str = "reconstruction.scale";
pub const WAVEFRONT_CSV: &str = "wavefront.csv";
pub const ARTIFACTS_CSV: &str = "artifact_lines.csv";
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_TXT: &str = "report.txt";
pub const ELLIPTICITY_TXT: &str = "ellipticity.txt";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const CONFIG_TOML: &str = "config.toml";

pub struct Output {
    dir: PathBuf,
}

impl Output {
    /// Create the directory and record the effective config in it.
    pub fn create(cfg: &ExperimentConfig) -> Result<Self> {
        let dir = PathBuf::from(&cfg.output.dir);
        fs::create_dir_all(&dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        let out = Output { dir };
        out.write(CONFIG_TOML, cfg.to_toml().as_bytes())?;
        Ok(out)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        write_file(&path, bytes).with_context(|| format!("cannot write {}", path.display()))
    }

    fn write_pgm(&self, pgm: &str, sidecar: &str, values: &[f64], width: usize, height: usize) -> Result<()> {
        let (bytes, scale) = encode_pgm16(values, width, height);
        self.write(pgm, &bytes)?;
        self.write(sidecar, scale.sidecar().as_bytes())
    }
}

fn simulate(cfg: &ExperimentConfig) -> Result<Sinogram> {
    let (mu, _) = cfg.weights()?;
    Ok(forward_analytic_weighted(&cfg.phantom()?, mu, cfg.grid()?))
}

fn reconstruction(cfg: &ExperimentConfig) -> Result<Reconstruction> {
    let (mu, nu) = cfg.weights()?;
    Ok(Reconstruction::new(cfg.filter()?, cfg.cutoff()?, cfg.image.n).with_weights(mu, nu))
}

fn prediction(cfg: &ExperimentConfig) -> Result<Prediction> {
    let (a, b) = cfg.cutoff()?.range();
    Ok(predict(Some(&cfg.phantom()?), a, b, cfg.predict.samples)?)
}

pub fn sinogram(cfg: &ExperimentConfig, out: &Output) -> Result<()> {
    let g = simulate(cfg)?;
    out.write(SINOGRAM_CSV, sinogram_to_csv(&g).as_bytes())?;
    out.write_pgm(SINOGRAM_PGM, SINOGRAM_SCALE, g.values(), g.grid().n_s(), g.grid().n_phi())?;
    println!(
        "sinogram {} x {} written to {}",
        g.grid().n_phi(),
        g.grid().n_s(),
        out.dir.display()
    );
    Ok(())
}

/// Reconstruct from the configured phantom, or from a sinogram CSV when `input` is set.
pub fn reconstruct(cfg: &ExperimentConfig, input: Option<&Path>, out: &Output) -> Result<()> {
    let rec = reconstruction(cfg)?;
    let img = match input {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            let g = sinogram_from_csv(&text).with_context(|| format!("cannot parse {}", path.display()))?;
            rec.run(DataSource::Sinogram(&g))?
        }
        None => rec.run(DataSource::Phantom(&cfg.phantom()?, cfg.grid()?))?,
    };
    write_image(&img, out)?;
    println!(
        "reconstruction {n} x {n} ({}, {}) written to {}",
        rec.filter.kind,
        rec.cutoff.kind(),
        out.dir.display(),
        n = img.n()
    );
    Ok(())
}

fn write_image(img: &Image, out: &Output) -> Result<()> {
    out.write(RECON_CSV, image_to_csv(img).as_bytes())?;
    out.write_pgm(RECON_PGM, RECON_SCALE, img.values(), img.n(), img.n())
}

pub fn predict_cmd(cfg: &ExperimentConfig, out: &Output) -> Result<()> {
    let p = prediction(cfg)?;
    out.write(WAVEFRONT_CSV, wavefront_csv(&p).as_bytes())?;
    out.write(ARTIFACTS_CSV, artifact_lines_csv(&p).as_bytes())?;
    println!(
        "range ({:.6}, {:.6}): {} visible, {} invisible covectors, {} artifact lines",
        p.a,
        p.b,
        p.visible.len(),
        p.invisible.len(),
        p.artifacts.len()
    );
    for note in &p.notes {
        println!("note: {note}");
    }
    Ok(())
}

struct Check {
    name: String,
    pass: bool,
}

fn verify_checks(cfg: &ExperimentConfig, report: &ArtifactReport) -> Vec<Check> {
    let v = &cfg.verify;
    let mut checks = Vec::new();
    let invisible = report.points.iter().filter(|p| !p.visible).count();
    if v.min_contrast > 0.0 && invisible > 0 {
        let c = report.contrast();
        checks.push(Check {
            name: format!("contrast {c:.3} >= {}", v.min_contrast),
            pass: c >= v.min_contrast,
        });
    }
    let ratios: Vec<Option<f64>> = report.lines.iter().map(|l| l.ratio).collect();
    if let Some(lo) = v.min_artifact_ratio {
        for (k, r) in ratios.iter().enumerate() {
            checks.push(Check {
                name: format!("line {k} ratio {} >= {lo}", fmt_opt(*r)),
                pass: r.is_some_and(|r| r >= lo),
            });
        }
    }
    if let Some(hi) = v.max_artifact_ratio {
        for (k, r) in ratios.iter().enumerate() {
            checks.push(Check {
                name: format!("line {k} ratio {} <= {hi}", fmt_opt(*r)),
                pass: r.is_some_and(|r| r <= hi),
            });
        }
    }
    checks
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "absent".into(), |x| format!("{x:.3}"))
}

/// Returns whether every configured threshold holds.
pub fn verify(cfg: &ExperimentConfig, out: &Output) -> Result<bool> {
    let phantom = cfg.phantom()?;
    let img = reconstruction(cfg)?.run(DataSource::Phantom(&phantom, cfg.grid()?))?;
    let p = prediction(cfg)?;
    let report = artifact_strength(&img, &p, &phantom)?;
    let checks = verify_checks(cfg, &report);

    let mut text = report_summary(&report);
    for note in &p.notes {
        let _ = writeln!(text, "note: {note}");
    }
    for c in &checks {
        let _ = writeln!(text, "{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
    }
    let ok = checks.iter().all(|c| c.pass);
    let _ = writeln!(text, "verify: {}", if ok { "ok" } else { "failed" });

    write_image(&img, out)?;
    out.write(WAVEFRONT_CSV, wavefront_csv(&p).as_bytes())?;
    out.write(ARTIFACTS_CSV, artifact_lines_csv(&p).as_bytes())?;
    out.write(REPORT_CSV, report_csv(&report).as_bytes())?;
    out.write(REPORT_TXT, text.as_bytes())?;
    print!("{text}");
    Ok(ok)
}

/// Fixed-point rendering that keeps a trailing `.0` for whole numbers.
fn fmt_real(x: f64) -> String {
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0');
    if s.ends_with('.') {
        format!("{s}0")
    } else {
        s.to_string()
    }
}

pub fn symbol(cfg: &ExperimentConfig, x: [f64; 2], xi: [f64; 2]) -> Result<()> {
    let (mu, nu) = cfg.weights()?;
    let c = ImageCovector::new(x, xi)?;
    let v = symbol_l(&c, &cfg.cutoff()?, cfg.filter()?.kind, mu, nu)?;
    if v.im == 0.0 {
        println!("{}", fmt_real(v.re));
    } else {
        println!("{}{}{}i", fmt_real(v.re), if v.im < 0.0 { "-" } else { "+" }, fmt_real(v.im.abs()));
    }
    Ok(())
}

pub fn ellipticity(cfg: &ExperimentConfig, out: &Output) -> Result<()> {
    let (mu, nu) = cfg.weights()?;
    let filter = cfg.filter()?.kind;
    let cutoff = cfg.cutoff()?;
    let r = ellipticity_check(&cutoff, filter, mu, nu, cfg.ellipticity.samples, cfg.seed)?;
    let mut text = String::new();
    let _ = writeln!(text, "{}", if r.elliptic { "elliptic" } else { "not elliptic" });
    let _ = writeln!(text, "filter {filter}, cutoff {}, {} samples, seed {}", cutoff.kind(), r.samples, cfg.seed);
    let _ = writeln!(text, "min normalized symbol {:.6e}", r.min_normalized);
    if let Some(c) = r.argmin {
        let _ = writeln!(text, "attained at x = ({:.6}, {:.6}), xi = ({:.6}, {:.6})", c.x[0], c.x[1], c.xi[0], c.xi[1]);
    }
    let _ = writeln!(text, "real single-signed filter symbol: {}", r.case_same_sign);
    let _ = writeln!(text, "range shorter than pi with nonzero filter symbol: {}", r.case_short_range);
    out.write(ELLIPTICITY_TXT, text.as_bytes())?;
    print!("{text}");
    Ok(())
}

/// Artifact strength and plateau edge response across smooth transition widths.
/// The first row (transition 0) is the hard cutoff.
pub fn sweep(cfg: &ExperimentConfig, widths: &[f64], out: &Output) -> Result<()> {
    let base = cfg.cutoff()?;
    let (CutoffSpec::Hard { a, b } | CutoffSpec::Smooth { a, b, .. }) = base else {
        bail!("sweep needs a limited range: set cutoff.kind to hard or smooth");
    };
    let phantom = cfg.phantom()?;
    let grid = cfg.grid()?;
    let p = prediction(cfg)?;
    let rec = reconstruction(cfg)?;
    let mut csv = String::from("transition,min_ratio,max_ratio,contrast,plateau_edge_response\n");
    let mut rows = vec![(0.0, CutoffSpec::hard(a, b)?)];
    for &w in widths {
        let c = CutoffSpec::smooth_with_transition(a, b, w, cfg.cutoff.order)
            .with_context(|| format!("transition {w}"))?;
        rows.push((w, c));
    }
    // edge response is always compared on the narrowest plateau of the sweep
    let (lo, hi) = rows.iter().fold((a, b), |(lo, hi), (_, c)| {
        let (l, h) = c.plateau();
        (lo.max(l), hi.min(h))
    });
    for (w, cutoff) in rows {
        let img = Reconstruction { cutoff, ..rec }.run(DataSource::Phantom(&phantom, grid))?;
        let report = artifact_strength(&img, &p, &phantom)?;
        let edge = edge_response_in(&highpass(&img)?, &p, lo, hi);
        let _ = writeln!(
            csv,
            "{w:?},{},{},{:?},{}",
            report.min_ratio.map_or("absent".into(), |x| format!("{x:?}")),
            report.max_ratio.map_or("absent".into(), |x| format!("{x:?}")),
            report.contrast(),
            edge.map_or("absent".into(), |x| format!("{x:?}"))
        );
        println!(
            "transition {w:.4}: ratios [{}, {}], contrast {:.3}, plateau edge {}",
            fmt_opt(report.min_ratio),
            fmt_opt(report.max_ratio),
            report.contrast(),
            edge.map_or("absent".into(), |x| format!("{x:.4e}"))
        );
    }
    out.write(SWEEP_CSV, csv.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_formatting() {
        assert_eq!(fmt_real(1.0), "1.0");
        assert_eq!(fmt_real(0.9999999999999998), "1.0");
        assert_eq!(fmt_real(-0.25), "-0.25");
        assert_eq!(fmt_real(0.0), "0.0");
    }
}
