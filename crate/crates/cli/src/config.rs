//! Experiment configuration, read from TOML. Unknown keys are rejected.

use std::f64::consts::{FRAC_PI_4, PI};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use latomo::cutoffs::{CutoffKind, CutoffSpec};
use latomo::filters::{FilterKind, FilterSpec};
use latomo::geometry::{Ellipse, Phantom};
use latomo::transforms::{SinogramGrid, WeightSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Seed for the only randomized step, ellipticity sampling.
    pub seed: u64,
    pub phantom: PhantomSection,
    pub grid: GridSection,
    pub image: ImageSection,
    pub weights: WeightSection,
    pub filter: FilterSection,
    pub cutoff: CutoffSection,
    pub predict: PredictSection,
    pub ellipticity: EllipticitySection,
    pub output: OutputSection,
    pub verify: VerifySection,
}

/// A missing `[phantom]` section means the reference preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSection {
    /// `reference` or `unit-disk`; leave unset when listing ellipses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ellipses: Vec<EllipseEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipseEntry {
    pub center_x: f64,
    pub center_y: f64,
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub tilt: f64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n_phi: usize,
    pub n_s: usize,
    pub s_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImageSection {
    pub n: usize,
}

/// `constant` weights take the value `param`; `exponential` weights are
/// `exp(param · x·θ)`. The backprojection weight falls back to the forward one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightSection {
    pub mu_kind: String,
    pub mu_param: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_param: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSection {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub apodize: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutoffSection {
    pub kind: String,
    pub a: f64,
    pub b: f64,
    /// Width of each smooth transition band.
    pub transition: f64,
    pub order: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictSection {
    /// Boundary samples per ellipse.
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EllipticitySection {
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

/// Thresholds checked by `verify`. A zero `min_contrast` disables that check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub min_contrast: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_artifact_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_artifact_ratio: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 7,
            phantom: PhantomSection::default(),
            grid: GridSection::default(),
            image: ImageSection::default(),
            weights: WeightSection::default(),
            filter: FilterSection::default(),
            cutoff: CutoffSection::default(),
            predict: PredictSection::default(),
            ellipticity: EllipticitySection::default(),
            output: OutputSection::default(),
            verify: VerifySection::default(),
        }
    }
}

impl Default for PhantomSection {
    fn default() -> Self {
        PhantomSection {
            preset: Some("reference".into()),
            ellipses: Vec::new(),
        }
    }
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            n_phi: 360,
            n_s: 363,
            s_max: 1.5,
        }
    }
}

impl Default for ImageSection {
    fn default() -> Self {
        ImageSection { n: 256 }
    }
}

impl Default for WeightSection {
    fn default() -> Self {
        WeightSection {
            mu_kind: "constant".into(),
            mu_param: 1.0,
            nu_kind: None,
            nu_param: None,
        }
    }
}

impl Default for FilterSection {
    fn default() -> Self {
        FilterSection {
            kind: "lambda".into(),
            apodize: None,
        }
    }
}

impl Default for CutoffSection {
    fn default() -> Self {
        CutoffSection {
            kind: "hard".into(),
            a: FRAC_PI_4,
            b: 3.0 * FRAC_PI_4,
            transition: PI / 12.0,
            order: 5,
        }
    }
}

impl Default for PredictSection {
    fn default() -> Self {
        PredictSection { samples: 720 }
    }
}

impl Default for EllipticitySection {
    fn default() -> Self {
        EllipticitySection { samples: 2000 }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: "out".into() }
    }
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            min_contrast: 3.0,
            min_artifact_ratio: None,
            max_artifact_ratio: None,
        }
    }
}

fn weight(kind: &str, param: f64, key: &str) -> Result<WeightSpec> {
    let w = match kind {
        "constant" => WeightSpec::constant(param),
        "exponential" => WeightSpec::exponential(param),
        other => bail!("weights.{key}_kind: expected \"constant\" or \"exponential\", got {other:?}"),
    };
    w.with_context(|| format!("weights.{key}_param"))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    /// Check every section, so that commands fail before doing any work.
    pub fn validate(&self) -> Result<()> {
        self.phantom()?;
        self.grid()?;
        self.weights()?;
        self.filter()?;
        self.cutoff()?;
        if self.image.n < 16 {
            bail!("image.n: need at least 16 pixels, got {}", self.image.n);
        }
        if self.predict.samples < 8 {
            bail!("predict.samples: need at least 8, got {}", self.predict.samples);
        }
        if self.ellipticity.samples == 0 {
            bail!("ellipticity.samples: need at least 1");
        }
        if self.output.dir.is_empty() {
            bail!("output.dir: must not be empty");
        }
        let v = &self.verify;
        if !(v.min_contrast >= 0.0) {
            bail!("verify.min_contrast: need a nonnegative number");
        }
        if let (Some(lo), Some(hi)) = (v.min_artifact_ratio, v.max_artifact_ratio) {
            if lo > hi {
                bail!("verify: min_artifact_ratio {lo} exceeds max_artifact_ratio {hi}");
            }
        }
        Ok(())
    }

    pub fn phantom(&self) -> Result<Phantom> {
        let p = &self.phantom;
        match (&p.preset, p.ellipses.is_empty()) {
            (Some(_), false) => bail!("phantom: set either `preset` or `ellipses`, not both"),
            (None, true) => bail!("phantom: set `preset` or list at least one [[phantom.ellipses]]"),
            (Some(name), true) => match name.as_str() {
                "reference" => Ok(Phantom::reference()),
                "unit-disk" => Ok(Phantom::new(vec![Ellipse::disk([0.0, 0.0], 1.0, 1.0)?])?),
                other => bail!("phantom.preset: expected \"reference\" or \"unit-disk\", got {other:?}"),
            },
            (None, false) => {
                let ellipses = p
                    .ellipses
                    .iter()
                    .enumerate()
                    .map(|(k, e)| {
                        Ellipse::new([e.center_x, e.center_y], e.a, e.b, e.tilt, e.density)
                            .with_context(|| format!("phantom.ellipses[{k}]"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Phantom::new(ellipses)?)
            }
        }
    }

    pub fn grid(&self) -> Result<SinogramGrid> {
        let g = &self.grid;
        SinogramGrid::new(g.n_phi, g.n_s, g.s_max).context("grid")
    }

    /// Forward and backprojection weights.
    pub fn weights(&self) -> Result<(WeightSpec, WeightSpec)> {
        let w = &self.weights;
        let mu = weight(&w.mu_kind, w.mu_param, "mu")?;
        let nu = match (&w.nu_kind, w.nu_param) {
            (None, None) => mu,
            (kind, param) => weight(
                kind.as_deref().unwrap_or(&w.mu_kind),
                param.unwrap_or(w.mu_param),
                "nu",
            )?,
        };
        Ok((mu, nu))
    }

    pub fn filter(&self) -> Result<FilterSpec> {
        let kind: FilterKind = self.filter.kind.parse().context("filter.kind")?;
        match self.filter.apodize {
            None => Ok(FilterSpec::new(kind)),
            Some(f) => FilterSpec::with_apodization(kind, f).context("filter.apodize"),
        }
    }

    pub fn cutoff(&self) -> Result<CutoffSpec> {
        let c = &self.cutoff;
        let kind: CutoffKind = c.kind.parse().context("cutoff.kind")?;
        let spec = match kind {
            CutoffKind::None => Ok(CutoffSpec::None),
            CutoffKind::Hard => CutoffSpec::hard(c.a, c.b),
            CutoffKind::Smooth => CutoffSpec::smooth_with_transition(c.a, c.b, c.transition, c.order),
        };
        spec.context("cutoff")
    }
}
