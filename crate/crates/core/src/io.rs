//! File formats.
//!
//! - Sinogram CSV: first row `n_phi,n_s,s_max`, then one row of `n_s` values per angle.
//! - Image CSV: first row `n`, then one row of `n` values per image row (increasing y).
//! - 16-bit binary PGM (`P5`, maxval 65535, big-endian samples) with an affine
//!   scale sidecar: `value = offset + scale * sample`. The first PGM row is the
//!   last data row so images appear with y pointing up.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::analysis::ArtifactReport;
use crate::microlocal::Prediction;
use crate::transforms::{Image, Sinogram, SinogramGrid};
use crate::{Error, Result};

fn write_row(out: &mut String, values: &[f64]) {
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        // shortest representation that round-trips
        let _ = write!(out, "{v:?}");
    }
    out.push('\n');
}

pub fn sinogram_to_csv(g: &Sinogram) -> String {
    let grid = g.grid();
    let mut out = String::new();
    let _ = writeln!(out, "{},{},{:?}", grid.n_phi(), grid.n_s(), grid.s_max());
    for i in 0..grid.n_phi() {
        write_row(&mut out, g.row(i));
    }
    out
}

pub fn image_to_csv(img: &Image) -> String {
    let n = img.n();
    let mut out = String::new();
    let _ = writeln!(out, "{n}");
    for row in img.values().chunks(n) {
        write_row(&mut out, row);
    }
    out
}

fn parse_fields(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {lineno}: '{}': {e}", t.trim())))
        })
        .collect()
}

pub fn sinogram_from_csv(text: &str) -> Result<Sinogram> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty sinogram file".into()))?;
    let h: Vec<&str> = header.split(',').map(str::trim).collect();
    if h.len() != 3 {
        return Err(Error::Parse("sinogram header must be 'n_phi,n_s,s_max'".into()));
    }
    let n_phi: usize = h[0].parse().map_err(|e| Error::Parse(format!("n_phi: {e}")))?;
    let n_s: usize = h[1].parse().map_err(|e| Error::Parse(format!("n_s: {e}")))?;
    let s_max: f64 = h[2].parse().map_err(|e| Error::Parse(format!("s_max: {e}")))?;
    let grid = SinogramGrid::new(n_phi, n_s, s_max)?;
    let mut values = Vec::with_capacity(n_phi * n_s);
    for (lineno, line) in lines {
        let row = parse_fields(line, lineno + 1)?;
        if row.len() != n_s {
            return Err(Error::Parse(format!(
                "line {}: expected {n_s} values, got {}",
                lineno + 1,
                row.len()
            )));
        }
        values.extend(row);
    }
    Sinogram::from_values(grid, values)
}

pub fn image_from_csv(text: &str) -> Result<Image> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty image file".into()))?;
    let n: usize = header
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("image header: {e}")))?;
    let mut values = Vec::with_capacity(n * n);
    for (lineno, line) in lines {
        let row = parse_fields(line, lineno + 1)?;
        if row.len() != n {
            return Err(Error::Parse(format!(
                "line {}: expected {n} values, got {}",
                lineno + 1,
                row.len()
            )));
        }
        values.extend(row);
    }
    Image::from_values(n, values)
}

/// Affine map between stored 16-bit samples and data values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgmScale {
    pub offset: f64,
    pub scale: f64,
}

impl PgmScale {
    pub fn sidecar(&self) -> String {
        format!(
            "# value = offset + scale * sample\noffset = {:?}\nscale = {:?}\n",
            self.offset, self.scale
        )
    }

    pub fn parse_sidecar(text: &str) -> Result<Self> {
        let mut offset = None;
        let mut scale = None;
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad sidecar line '{line}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("sidecar {}: {e}", k.trim())))?;
            match k.trim() {
                "offset" => offset = Some(v),
                "scale" => scale = Some(v),
                other => return Err(Error::Parse(format!("unknown sidecar key '{other}'"))),
            }
        }
        match (offset, scale) {
            (Some(offset), Some(scale)) => Ok(PgmScale { offset, scale }),
            _ => Err(Error::Parse("sidecar needs offset and scale".into())),
        }
    }
}

/// Encode a `width × height` grid (row-major, first row at the bottom) as 16-bit PGM.
pub fn encode_pgm16(values: &[f64], width: usize, height: usize) -> (Vec<u8>, PgmScale) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if values.is_empty() { (0.0, 0.0) } else { (lo, hi) };
    let scale = if hi > lo { (hi - lo) / 65535.0 } else { 1.0 };
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    out.reserve(2 * width * height);
    for row in values.chunks(width).rev() {
        for &v in row {
            let q = ((v - lo) / scale).round().clamp(0.0, 65535.0) as u16;
            out.extend_from_slice(&q.to_be_bytes());
        }
    }
    (out, PgmScale { offset: lo, scale })
}

/// Decode a 16-bit PGM written by [`encode_pgm16`], returning rows bottom-first.
pub fn decode_pgm16(bytes: &[u8], scale: PgmScale) -> Result<(Vec<f64>, usize, usize)> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Parse("truncated PGM header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    if fields[0] != "P5" || fields[3] != "65535" {
        return Err(Error::Parse("expected a 16-bit P5 PGM".into()));
    }
    let width: usize = fields[1].parse().map_err(|e| Error::Parse(format!("PGM width: {e}")))?;
    let height: usize = fields[2].parse().map_err(|e| Error::Parse(format!("PGM height: {e}")))?;
    let data = bytes.get(pos..).unwrap_or_default();
    if data.len() != 2 * width * height {
        return Err(Error::Parse("PGM payload size mismatch".into()));
    }
    let rows: Vec<Vec<f64>> = data
        .chunks(2 * width)
        .map(|r| {
            r.chunks(2)
                .map(|b| scale.offset + scale.scale * u16::from_be_bytes([b[0], b[1]]) as f64)
                .collect()
        })
        .collect();
    Ok((rows.into_iter().rev().flatten().collect(), width, height))
}

pub fn write_file(path: &std::path::Path, bytes: &[u8]) -> io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(bytes)?;
    f.flush()
}

/// `x,y,angle,visible` for every oriented covector of the prediction.
pub fn wavefront_csv(p: &Prediction) -> String {
    let mut out = String::from("x,y,angle,visible\n");
    for (set, flag) in [(&p.visible, 1), (&p.invisible, 0)] {
        for e in set {
            let _ = writeln!(
                out,
                "{:?},{:?},{:?},{flag}",
                e.point[0], e.point[1], e.normal_angle
            );
        }
    }
    out
}

/// `phi,s,gen_x,gen_y` for every predicted artifact line.
pub fn artifact_lines_csv(p: &Prediction) -> String {
    let mut out = String::from("phi,s,gen_x,gen_y\n");
    for l in &p.artifacts {
        let _ = writeln!(
            out,
            "{:?},{:?},{:?},{:?}",
            l.phi, l.s, l.generator[0], l.generator[1]
        );
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_else(|| "absent".into())
}

/// Per-line and per-point measurements.
pub fn report_csv(r: &ArtifactReport) -> String {
    let mut out = String::from("kind,phi,s,x,y,value,control,ratio\n");
    for l in &r.lines {
        let _ = writeln!(
            out,
            "line,{:?},{:?},{:?},{:?},{},{},{}",
            l.line.phi,
            l.line.s,
            l.line.generator[0],
            l.line.generator[1],
            opt(l.mean),
            opt(l.control_mean),
            opt(l.ratio)
        );
    }
    for p in &r.points {
        let kind = if p.visible { "visible" } else { "invisible" };
        let _ = writeln!(
            out,
            "{kind},,,{:?},{:?},{:?},,",
            p.point[0], p.point[1], p.response
        );
    }
    out
}

/// Human-readable summary of a report.
pub fn report_summary(r: &ArtifactReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "artifact lines: {}", r.lines.len());
    for l in &r.lines {
        let _ = writeln!(
            out,
            "  phi={:.4} s={:+.4}  line={}  control={}  ratio={}",
            l.line.phi,
            l.line.s,
            opt(l.mean),
            opt(l.control_mean),
            l.ratio.map(|x| format!("{x:.3}")).unwrap_or_else(|| "absent".into())
        );
    }
    let n_vis = r.points.iter().filter(|p| p.visible).count();
    let _ = writeln!(
        out,
        "edge response: visible {:.4e} over {} points, invisible {:.4e} over {} points, contrast {:.3}",
        r.visible_mean,
        n_vis,
        r.invisible_mean,
        r.points.len() - n_vis,
        r.contrast()
    );
    out
}
