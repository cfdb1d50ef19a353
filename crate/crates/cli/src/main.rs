//! `latomo`: limited-angle tomography experiments from a TOML config.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::commands::Output;
use crate::config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(name = "latomo", version, about = "Limited-angle tomography: simulate, reconstruct, predict and verify artifacts")]
struct Cli {
    /// Experiment config (TOML). Built-in reference experiment when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overrides output.dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs serially.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// fbp | lambda | dds | identity
    #[arg(long, global = true)]
    filter: Option<String>,
    /// Raised-cosine band limit as a fraction of Nyquist.
    #[arg(long, global = true)]
    apodize: Option<f64>,
    /// none | hard | smooth
    #[arg(long, global = true)]
    cutoff: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    b: Option<f64>,
    /// Smooth cutoff transition width in radians.
    #[arg(long, global = true)]
    transition: Option<f64>,
    /// Smoothstep order of the smooth cutoff.
    #[arg(long, global = true)]
    order: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate weighted line integrals of the phantom.
    Sinogram,
    /// Cutoff, filter and backproject.
    Reconstruct {
        /// Reconstruct from this sinogram CSV instead of simulating.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Visible and invisible boundary covectors and artifact lines.
    Predict,
    /// Measure artifacts and edge contrast; exit status 1 if a threshold fails.
    Verify,
    /// Principal symbol of the reconstruction operator at (x, xi).
    Symbol {
        #[arg(long, num_args = 2, value_names = ["X1", "X2"], allow_negative_numbers = true, required = true)]
        x: Vec<f64>,
        #[arg(long, num_args = 2, value_names = ["XI1", "XI2"], allow_negative_numbers = true, required = true)]
        xi: Vec<f64>,
    },
    /// Sampled ellipticity check of the reconstruction operator.
    Ellipticity,
    /// Artifact strength across smooth-cutoff transition widths.
    Sweep {
        /// Transition widths in radians.
        #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1, 0.2, 0.3])]
        widths: Vec<f64>,
    },
}

impl Cli {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read config {}", path.display()))?;
                ExperimentConfig::from_toml(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(f) = &self.filter {
            cfg.filter.kind = f.clone();
        }
        if self.apodize.is_some() {
            cfg.filter.apodize = self.apodize;
        }
        if let Some(c) = &self.cutoff {
            cfg.cutoff.kind = c.clone();
        }
        if let Some(a) = self.a {
            cfg.cutoff.a = a;
        }
        if let Some(b) = self.b {
            cfg.cutoff.b = b;
        }
        if let Some(t) = self.transition {
            cfg.cutoff.transition = t;
        }
        if let Some(k) = self.order {
            cfg.cutoff.order = k;
        }
        if let Some(dir) = &self.out {
            cfg.output.dir = dir.to_string_lossy().into_owned();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .context("cannot configure thread pool")?;
    }
    let cfg = cli.config()?;
    let out = || Output::create(&cfg);
    match &cli.command {
        Command::Sinogram => commands::sinogram(&cfg, &out()?)?,
        Command::Reconstruct { input } => commands::reconstruct(&cfg, input.as_deref(), &out()?)?,
        Command::Predict => commands::predict_cmd(&cfg, &out()?)?,
        Command::Verify => return commands::verify(&cfg, &out()?),
        Command::Symbol { x, xi } => commands::symbol(&cfg, [x[0], x[1]], [xi[0], xi[1]])?,
        Command::Ellipticity => commands::ellipticity(&cfg, &out()?)?,
        Command::Sweep { widths } => commands::sweep(&cfg, widths, &out()?)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
