//! Run configuration: the spectral-data JSON schema plus `grid`,
//! `integrator`, `output` and `validate` sections.
//!
//! Precedence is flag, then file, then preset, then built-in default. Every
//! command fills in what it used and writes the result to `config.json`, so
//! feeding that file back reproduces the run.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use nls5::evolve::Scheme;
use nls5::presets::{preset, Preset, Provenance, Reduction, PRESET_NAMES};
use nls5::spectral_data::validate_spectral_set;
use nls5::{Complex64, ModelCoefficients, SpectralDatum, SpectralSet};
use serde::{Deserialize, Serialize};

use crate::{input, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub coeffs: Option<ModelCoefficients>,
    pub solitons: Option<Vec<SpectralDatum>>,
    pub grid: GridSection,
    pub integrator: IntegratorSection,
    pub output: OutputSection,
    pub validate: ValidateSection,
    pub figure: Option<u32>,
}

/// `x_min`/`x_max` left empty means a box fitted to the solution.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub dt: Option<f64>,
    pub t_start: Option<f64>,
    /// Run length from `t_start`.
    pub duration: Option<f64>,
    pub scheme: Option<Scheme>,
    pub monitor_stride: Option<usize>,
    pub dealias: Option<bool>,
    pub compare_exact: Option<bool>,
    pub init: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    pub suite: Option<Suite>,
    pub zetas: Option<Vec<[f64; 2]>>,
    pub dt_fd: Option<f64>,
    pub horizon: Option<f64>,
    /// Presets checked when no spectral data is given.
    pub presets: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    All,
    Residual,
    ZeroCurvature,
    Conservation,
    Convergence,
}

impl Suite {
    pub fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

pub const DEFAULT_OUT: &str = "nls5-out";

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(input)?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display())).map_err(input)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    pub fn preset(&self) -> Result<Option<Preset>> {
        self.preset.as_deref().map(lookup).transpose()
    }

    /// `--zeta` replaces the solitons; `--alpha-k`/`--beta-k` alone edit the
    /// existing ones by position.
    pub fn override_data(&mut self, zetas: &[Complex64], alphas: &[Complex64], betas: &[Complex64]) -> Result<()> {
        if zetas.is_empty() && alphas.is_empty() && betas.is_empty() {
            return Ok(());
        }
        let one = Complex64::new(1.0, 0.0);
        let mut data = if zetas.is_empty() {
            self.base_data()?.ok_or_else(|| input(anyhow!("--alpha-k/--beta-k need solitons from --zeta, --preset or --config")))?
        } else {
            zetas.iter().map(|&z| SpectralDatum::new(z, one, one)).collect()
        };
        if alphas.len() > data.len() || betas.len() > data.len() {
            return Err(input(anyhow!(
                "{} solitons but {} --alpha-k and {} --beta-k values",
                data.len(),
                alphas.len(),
                betas.len()
            )));
        }
        for (d, &a) in data.iter_mut().zip(alphas) {
            d.alpha_k = a;
        }
        for (d, &b) in data.iter_mut().zip(betas) {
            d.beta_k = b;
        }
        self.solitons = Some(data);
        Ok(())
    }

    /// Applies a reduction to the coefficients in effect and pins the result.
    pub fn reduce(&mut self, r: Option<Reduction>) -> Result<()> {
        if let Some(r) = r {
            self.coeffs = Some(r.apply(self.base_coeffs()?));
        }
        Ok(())
    }

    fn base_data(&self) -> Result<Option<Vec<SpectralDatum>>> {
        Ok(match &self.solitons {
            Some(d) => Some(d.clone()),
            None => self.preset()?.map(|p| p.set.data),
        })
    }

    fn base_coeffs(&self) -> Result<ModelCoefficients> {
        Ok(match self.coeffs {
            Some(k) => k,
            None => self.preset()?.map(|p| p.set.coeffs).unwrap_or(DEFAULT_COEFFS),
        })
    }

    pub fn has_spectral_data(&self) -> bool {
        self.solitons.is_some() || self.preset.is_some()
    }

    /// The spectral set in effect, validated, with a provenance label.
    pub fn spectral_set(&self) -> Result<(SpectralSet, String)> {
        self.spectral_set_for(self.preset.as_deref())
    }

    /// As [`RunConfig::spectral_set`] but with `preset_name` as the base.
    pub fn spectral_set_for(&self, preset_name: Option<&str>) -> Result<(SpectralSet, String)> {
        let p = preset_name.map(lookup).transpose()?;
        let data = match (&self.solitons, &p) {
            (Some(d), _) => d.clone(),
            (None, Some(p)) => p.set.data.clone(),
            (None, None) => return Err(input(anyhow!("no spectral data: give --zeta, --preset or a config with \"solitons\""))),
        };
        let coeffs = self.coeffs.or(p.as_ref().map(|p| p.set.coeffs)).unwrap_or(DEFAULT_COEFFS);
        let set = SpectralSet::new(data, coeffs);
        let report = validate_spectral_set(&set);
        if !report.is_valid() {
            return Err(input(anyhow!("invalid spectral data: {report}")));
        }
        Ok((set.clone(), label(p.as_ref(), &set)))
    }
}

/// Coefficients used when neither a preset nor the user supplies any.
pub const DEFAULT_COEFFS: ModelCoefficients = ModelCoefficients { c3: 1.0, c4: 1.0, c5: 1.0 };

pub fn lookup(name: &str) -> Result<Preset> {
    preset(name).ok_or_else(|| input(anyhow!("unknown preset {name:?} (expected one of {})", PRESET_NAMES.join(", "))))
}

pub fn provenance_name(p: Provenance) -> &'static str {
    match p {
        Provenance::Published => "published",
        Provenance::Reconstruction => "reconstruction",
    }
}

fn label(p: Option<&Preset>, set: &SpectralSet) -> String {
    match p {
        Some(p) if p.set == *set => format!("{} ({})", p.name, provenance_name(p.provenance)),
        Some(p) => format!("user (modified {})", p.name),
        None => "user".into(),
    }
}
