use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use latomo::geometry::{rasterize, Phantom};
use latomo::io::{decode_pgm16, image_from_csv, sinogram_from_csv, PgmScale};
use latomo::transforms::{backproject, forward_analytic, WeightSpec};
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn latomo(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latomo"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ok(o: Output) -> Output {
    assert!(
        o.status.success(),
        "status {:?}\nstdout:\n{}\nstderr:\n{}",
        o.status,
        stdout(&o),
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn small_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("small.toml");
    let text = format!("[grid]\nn_phi = 90\nn_s = 97\ns_max = 1.5\n\n[image]\nn = 64\n{extra}");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn sinogram_is_finite_symmetric_and_reproducible() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(latomo(&["sinogram"], &a));
    ok(latomo(&["sinogram", "--threads", "1"], &b));

    let csv_a = fs::read(a.join("sinogram.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.join("sinogram.csv")).unwrap());
    assert_eq!(fs::read(a.join("sinogram.pgm")).unwrap(), fs::read(b.join("sinogram.pgm")).unwrap());

    let g = sinogram_from_csv(std::str::from_utf8(&csv_a).unwrap()).unwrap();
    assert!(g.values().iter().all(|v| v.is_finite()));
    let (n_phi, n_s) = (g.grid().n_phi(), g.grid().n_s());
    assert_eq!((n_phi, n_s), (360, 363));
    for i in 0..n_phi / 2 {
        for j in 0..n_s {
            let d = (g.get(i, j) - g.get(i + n_phi / 2, n_s - 1 - j)).abs();
            assert!(d < 1e-12, "row {i} sample {j}: {d}");
        }
    }

    let scale = PgmScale::parse_sidecar(&fs::read_to_string(a.join("sinogram.scale")).unwrap()).unwrap();
    let (decoded, w, h) = decode_pgm16(&fs::read(a.join("sinogram.pgm")).unwrap(), scale).unwrap();
    assert_eq!((w, h), (n_s, n_phi));
    for (x, y) in decoded.iter().zip(g.values()) {
        assert!((x - y).abs() <= 0.5 * scale.scale + 1e-12);
    }
}

#[test]
fn full_range_fbp_matches_the_phantom() {
    let tmp = TempDir::new().unwrap();
    let cfg = configs().join("full_fbp.toml");
    ok(latomo(&["--config", cfg.to_str().unwrap(), "reconstruct"], tmp.path()));
    let img = image_from_csv(&fs::read_to_string(tmp.path().join("reconstruction.csv")).unwrap()).unwrap();
    assert!(tmp.path().join("reconstruction.pgm").exists());
    assert!(tmp.path().join("reconstruction.scale").exists());

    let phantom = Phantom::reference();
    let truth = rasterize(&phantom, img.n()).unwrap();
    let h = img.pixel_size();
    let (mut se, mut count) = (0.0, 0usize);
    for i in 0..img.n() {
        for j in 0..img.n() {
            let x = img.point(i, j);
            let v = phantom.density_at(x);
            let interior = (0..16).all(|k| {
                let t = k as f64 * std::f64::consts::PI / 8.0;
                phantom.density_at([x[0] + 2.0 * h * t.cos(), x[1] + 2.0 * h * t.sin()]) == v
            });
            if interior {
                se += (img.get(i, j) - truth.get(i, j)).powi(2);
                count += 1;
            }
        }
    }
    // density range of the reference phantom is 1.1
    let rel = (se / count as f64).sqrt() / 1.1;
    assert!(rel < 0.05, "interior rmse fraction {rel}");
}

#[test]
fn identity_without_cutoff_is_plain_backprojection() {
    let tmp = TempDir::new().unwrap();
    ok(latomo(&["reconstruct", "--filter", "identity", "--cutoff", "none"], tmp.path()));
    let img = image_from_csv(&fs::read_to_string(tmp.path().join("reconstruction.csv")).unwrap()).unwrap();

    let grid = latomo::transforms::SinogramGrid::new(360, 363, 1.5).unwrap();
    let expected = backproject(&forward_analytic(&Phantom::reference(), grid), WeightSpec::default(), 256).unwrap();
    assert_eq!(img, expected);
}

#[test]
fn reconstruct_from_sinogram_file_matches_direct_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path(), "");
    let cfg = cfg.to_str().unwrap();
    let (s, d, f) = (tmp.path().join("s"), tmp.path().join("d"), tmp.path().join("f"));
    ok(latomo(&["--config", cfg, "sinogram"], &s));
    ok(latomo(&["--config", cfg, "reconstruct"], &d));
    let input = s.join("sinogram.csv");
    ok(latomo(&["--config", cfg, "reconstruct", "--input", input.to_str().unwrap()], &f));
    assert_eq!(
        fs::read(d.join("reconstruction.csv")).unwrap(),
        fs::read(f.join("reconstruction.csv")).unwrap()
    );
}

#[test]
fn reference_experiment_verifies() {
    let tmp = TempDir::new().unwrap();
    let cfg = configs().join("reference.toml");
    let o = ok(latomo(&["--config", cfg.to_str().unwrap(), "verify"], tmp.path()));
    assert!(stdout(&o).contains("verify: ok"));
    for name in ["report.csv", "report.txt", "wavefront.csv", "artifact_lines.csv", "reconstruction.csv", "config.toml"] {
        assert!(tmp.path().join(name).exists(), "{name}");
    }
    let recorded = fs::read_to_string(tmp.path().join("config.toml")).unwrap();
    assert!(recorded.contains("kind = \"lambda\""));
}

#[test]
fn verify_exit_status_follows_thresholds() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path(), "\n[verify]\nmin_contrast = 1000.0\n");
    let o = latomo(&["--config", cfg.to_str().unwrap(), "verify"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL contrast"));
}

#[test]
fn symbol_of_full_data_fbp_is_one() {
    let tmp = TempDir::new().unwrap();
    for (x, xi) in [(["0.3", "-0.2"], ["1.5", "-4"]), (["0", "0"], ["0", "1"]), (["-0.9", "0.7"], ["-30", "12"])] {
        let o = ok(latomo(
            &["symbol", "--filter", "fbp", "--cutoff", "none", "--x", x[0], x[1], "--xi", xi[0], xi[1]],
            tmp.path(),
        ));
        assert_eq!(stdout(&o).trim(), "1.0");
    }
    let o = latomo(&["symbol", "--x", "0", "0", "--xi", "0", "0"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ellipticity_verdicts() {
    let tmp = TempDir::new().unwrap();
    let o = ok(latomo(&["ellipticity", "--filter", "dds", "--cutoff", "none"], tmp.path()));
    assert_eq!(stdout(&o).lines().next(), Some("not elliptic"));
    let o = ok(latomo(&["ellipticity", "--filter", "dds", "--cutoff", "hard"], tmp.path()));
    assert_eq!(stdout(&o).lines().next(), Some("elliptic"));
    let o = ok(latomo(&["ellipticity", "--filter", "lambda", "--cutoff", "smooth"], tmp.path()));
    assert_eq!(stdout(&o).lines().next(), Some("elliptic"));
    assert!(tmp.path().join("ellipticity.txt").exists());

    let again = ok(latomo(&["ellipticity", "--filter", "lambda", "--cutoff", "smooth"], tmp.path()));
    assert_eq!(stdout(&o), stdout(&again));
}

#[test]
fn predict_unit_disk_lines() {
    let tmp = TempDir::new().unwrap();
    let cfg = configs().join("unit_disk.toml");
    ok(latomo(&["--config", cfg.to_str().unwrap(), "predict"], tmp.path()));
    let text = fs::read_to_string(tmp.path().join("artifact_lines.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("phi,s,gen_x,gen_y"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!((r[1].abs() - 1.0).abs() < 1e-9);
        let th = [r[0].cos(), r[0].sin()];
        assert!((r[2] * th[0] + r[3] * th[1] - r[1]).abs() < 1e-12);
    }
    let wf = fs::read_to_string(tmp.path().join("wavefront.csv")).unwrap();
    assert!(wf.starts_with("x,y,angle,visible\n"));
}

#[test]
fn sweep_writes_one_row_per_width() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path(), "");
    ok(latomo(&["--config", cfg.to_str().unwrap(), "sweep", "--widths", "0.1,0.2"], tmp.path()));
    let text = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "transition,min_ratio,max_ratio,contrast,plateau_edge_response");
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("0.0,"));

    let o = latomo(&["--config", cfg.to_str().unwrap(), "sweep", "--cutoff", "none"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_are_reported() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "[grid]\nn_phi = 90\nresolution = 3\n").unwrap();
    let o = latomo(&["--config", bad.to_str().unwrap(), "sinogram"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("resolution"));

    let o = latomo(&["sinogram", "--cutoff", "smooth", "--a", "2", "--b", "1"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cutoff"));

    let missing = tmp.path().join("missing.toml");
    let o = latomo(&["--config", missing.to_str().unwrap(), "predict"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}
