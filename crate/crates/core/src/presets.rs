//! Named parameter sets.
//!
//! Figures 1-3 use the published one-soliton parameters
//! `a = 0.2, b = 0.3, xi = 0, c3 = c4 = c5 = 1`. The two-soliton figures do
//! not state their parameters; `figure4`/`figure5` are reconstructions that
//! produce a visible collision and are labelled as such.

use num_complex::Complex64;

use crate::spectral_data::{ModelCoefficients, SpectralDatum, SpectralSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Parameters printed with the figure.
    Published,
    /// Chosen here because the source gives none.
    Reconstruction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Modulus,
    Real,
    Imaginary,
}

impl Part {
    pub fn name(self) -> &'static str {
        match self {
            Part::Modulus => "abs",
            Part::Real => "re",
            Part::Imaginary => "im",
        }
    }

    pub fn of(self, z: Complex64) -> f64 {
        match self {
            Part::Modulus => z.norm(),
            Part::Real => z.re,
            Part::Imaginary => z.im,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub set: SpectralSet,
    pub provenance: Provenance,
    /// Spatial window of the surface plots.
    pub x_range: (f64, f64),
    /// Time window of the surface plots.
    pub t_range: (f64, f64),
    /// Fixed-time slices.
    pub slices: Vec<f64>,
    /// Quantities plotted.
    pub parts: Vec<Part>,
}

pub const PRESET_NAMES: [&str; 7] = ["figure1", "figure2", "figure3", "figure4", "figure5", "nls", "hirota"];

pub fn figure1_datum() -> SpectralDatum {
    SpectralDatum::from_xi(0.2, 0.3, 0.0)
}

pub fn two_soliton_data() -> Vec<SpectralDatum> {
    vec![SpectralDatum::from_xi(0.2, 0.3, 0.0), SpectralDatum::from_xi(-0.15, 0.25, 0.0)]
}

fn ones() -> ModelCoefficients {
    ModelCoefficients::new(1.0, 1.0, 1.0)
}

pub fn preset(name: &str) -> Option<Preset> {
    let one = |parts: Vec<Part>| Preset {
        name: "",
        set: SpectralSet::new(vec![figure1_datum()], ones()),
        provenance: Provenance::Published,
        x_range: (-20.0, 20.0),
        t_range: (-10.0, 10.0),
        slices: vec![-10.0, 0.0, 10.0],
        parts,
    };
    let two = |parts: Vec<Part>, slices: Vec<f64>| Preset {
        name: "",
        set: SpectralSet::new(two_soliton_data(), ones()),
        provenance: Provenance::Reconstruction,
        x_range: (-30.0, 30.0),
        t_range: (-30.0, 30.0),
        slices,
        parts,
    };
    let p = match name {
        "figure1" => Preset { name: "figure1", ..one(vec![Part::Modulus]) },
        "figure2" => Preset { name: "figure2", ..one(vec![Part::Real]) },
        "figure3" => Preset { name: "figure3", ..one(vec![Part::Imaginary]) },
        "figure4" => Preset { name: "figure4", ..two(vec![Part::Modulus, Part::Real, Part::Imaginary], vec![-30.0, 0.0, 30.0]) },
        "figure5" => Preset { name: "figure5", ..two(vec![Part::Modulus], vec![-20.0, 0.0, 20.0]) },
        "nls" => Preset {
            name: "nls",
            set: SpectralSet::new(vec![figure1_datum()], ModelCoefficients::NLS),
            provenance: Provenance::Reconstruction,
            ..one(vec![Part::Modulus])
        },
        "hirota" => Preset {
            name: "hirota",
            set: SpectralSet::new(vec![figure1_datum()], ModelCoefficients::new(1.0, 0.0, 0.0)),
            provenance: Provenance::Reconstruction,
            ..one(vec![Part::Modulus])
        },
        _ => return None,
    };
    Some(p)
}

/// Integrable reductions obtained by switching coefficients off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    /// `c = (0, 0, 0)`.
    Nls,
    /// Keep `c3` only.
    Hirota,
    /// Keep `c4` only.
    Fourth,
    /// Keep `c5` only.
    Fifth,
}

impl std::str::FromStr for Reduction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nls" => Ok(Reduction::Nls),
            "hirota" => Ok(Reduction::Hirota),
            "fourth" => Ok(Reduction::Fourth),
            "fifth" => Ok(Reduction::Fifth),
            _ => Err(format!("unknown reduction {s:?} (expected nls, hirota, fourth or fifth)")),
        }
    }
}

impl Reduction {
    pub fn apply(self, k: ModelCoefficients) -> ModelCoefficients {
        match self {
            Reduction::Nls => ModelCoefficients::NLS,
            Reduction::Hirota => ModelCoefficients::new(k.c3, 0.0, 0.0),
            Reduction::Fourth => ModelCoefficients::new(0.0, k.c4, 0.0),
            Reduction::Fifth => ModelCoefficients::new(0.0, 0.0, k.c5),
        }
    }
}
