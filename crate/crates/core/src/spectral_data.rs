//! Reflectionless scattering data and the soliton phase functions.
//!
//! Equation coefficients are named by the order of the term they multiply:
//! `c3` (third order), `c4` (fourth order) and `c5` (fifth order). A set of
//! spectral data is a list of eigenvalues in the upper half-plane together
//! with their norming vectors `(alpha_k, beta_k)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute distance below which two eigenvalues count as coincident.
pub const DUPLICATE_EIGENVALUE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("non-finite input to {0}")]
    NonFinite(&'static str),
    #[error("norming constant alpha is zero; xi = ln|alpha| is undefined")]
    ZeroAlpha,
}

/// Real coefficients of the third-, fourth- and fifth-order terms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelCoefficients {
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
}

impl ModelCoefficients {
    pub const NLS: ModelCoefficients = ModelCoefficients { c3: 0.0, c4: 0.0, c5: 0.0 };

    pub fn new(c3: f64, c4: f64, c5: f64) -> Self {
        Self { c3, c4, c5 }
    }

    pub fn is_finite(&self) -> bool {
        self.c3.is_finite() && self.c4.is_finite() && self.c5.is_finite()
    }

    /// Time-frequency polynomial `16 c5 z^5 - 8 c4 z^4 - 4 c3 z^3 + z^2`,
    /// evaluated in Horner form.
    pub fn dispersion_polynomial(&self, zeta: Complex64) -> Complex64 {
        let inner = Complex64::new(-8.0 * self.c4, 0.0) + zeta * 16.0 * self.c5;
        let inner = Complex64::new(-4.0 * self.c3, 0.0) + zeta * inner;
        let inner = Complex64::new(1.0, 0.0) + zeta * inner;
        zeta * zeta * inner
    }
}

/// One discrete eigenvalue with its norming vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDatum {
    #[serde(with = "complex_pair")]
    pub zeta: Complex64,
    #[serde(rename = "alpha", with = "complex_pair")]
    pub alpha_k: Complex64,
    #[serde(rename = "beta", with = "complex_pair")]
    pub beta_k: Complex64,
}

impl SpectralDatum {
    pub fn new(zeta: Complex64, alpha_k: Complex64, beta_k: Complex64) -> Self {
        Self { zeta, alpha_k, beta_k }
    }

    /// Datum with `beta = 1` and `|alpha| = e^xi`, real positive alpha.
    pub fn from_xi(a: f64, b: f64, xi: f64) -> Self {
        Self::new(Complex64::new(a, b), Complex64::new(xi.exp(), 0.0), Complex64::new(1.0, 0.0))
    }

    /// Rescales the norming vector to `(alpha/beta, 1)`. The N-soliton
    /// field is invariant under this change. Returns `None` when `beta = 0`.
    pub fn gauge_normalized(&self) -> Option<Self> {
        if self.beta_k == Complex64::new(0.0, 0.0) {
            return None;
        }
        Some(Self::new(self.zeta, self.alpha_k / self.beta_k, Complex64::new(1.0, 0.0)))
    }

    pub fn a(&self) -> f64 {
        self.zeta.re
    }

    pub fn b(&self) -> f64 {
        self.zeta.im
    }
}

/// The full reflectionless spectral data of an N-soliton.
///
/// Construction does not validate; use [`validate_spectral_set`] (or build a
/// `SolitonEvaluator`, which refuses invalid sets).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSet {
    pub coeffs: ModelCoefficients,
    #[serde(rename = "solitons")]
    pub data: Vec<SpectralDatum>,
}

impl SpectralSet {
    pub fn new(data: Vec<SpectralDatum>, coeffs: ModelCoefficients) -> Self {
        Self { coeffs, data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn with_coeffs(&self, coeffs: ModelCoefficients) -> Self {
        Self { coeffs, data: self.data.clone() }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spectral set serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptySet,
    NonFiniteCoefficients,
    NonFiniteDatum { index: usize },
    NotUpperHalfPlane { index: usize, im: f64 },
    ZeroNormingVector { index: usize },
    DuplicateEigenvalue { first: usize, second: usize, distance: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::EmptySet => write!(f, "spectral set has no solitons (N >= 1 required)"),
            Violation::NonFiniteCoefficients => write!(f, "equation coefficients must be finite"),
            Violation::NonFiniteDatum { index } => write!(f, "soliton {index}: non-finite entry"),
            Violation::NotUpperHalfPlane { index, im } => {
                write!(f, "soliton {index}: eigenvalue not in upper half-plane (Im = {im})")
            }
            Violation::ZeroNormingVector { index } => {
                write!(f, "soliton {index}: norming vector (alpha, beta) is zero")
            }
            Violation::DuplicateEigenvalue { first, second, distance } => write!(
                f,
                "duplicate eigenvalue: solitons {first} and {second} are {distance:e} apart"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "pass");
        }
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

/// Checks the hypotheses the soliton formula relies on. Violations are
/// collected rather than raised.
pub fn validate_spectral_set(set: &SpectralSet) -> ValidationReport {
    let mut violations = Vec::new();
    if set.data.is_empty() {
        violations.push(Violation::EmptySet);
    }
    if !set.coeffs.is_finite() {
        violations.push(Violation::NonFiniteCoefficients);
    }
    for (index, d) in set.data.iter().enumerate() {
        let finite = [d.zeta, d.alpha_k, d.beta_k].iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite {
            violations.push(Violation::NonFiniteDatum { index });
            continue;
        }
        if d.zeta.im <= 0.0 {
            violations.push(Violation::NotUpperHalfPlane { index, im: d.zeta.im });
        }
        if d.alpha_k.norm_sqr() == 0.0 && d.beta_k.norm_sqr() == 0.0 {
            violations.push(Violation::ZeroNormingVector { index });
        }
    }
    for i in 0..set.data.len() {
        for j in (i + 1)..set.data.len() {
            let distance = (set.data[i].zeta - set.data[j].zeta).norm();
            if distance < DUPLICATE_EIGENVALUE_TOL {
                violations.push(Violation::DuplicateEigenvalue { first: i, second: j, distance });
            }
        }
    }
    ValidationReport { violations }
}

/// Phase `theta = i zeta x + i (16 c5 z^5 - 8 c4 z^4 - 4 c3 z^3 + z^2) t`.
pub fn theta_phase(zeta: Complex64, coeffs: &ModelCoefficients, x: f64, t: f64) -> Result<Complex64, DomainError> {
    if !(zeta.re.is_finite() && zeta.im.is_finite() && x.is_finite() && t.is_finite() && coeffs.is_finite()) {
        return Err(DomainError::NonFinite("theta_phase"));
    }
    let i = Complex64::i();
    Ok(i * (zeta * x + coeffs.dispersion_polynomial(zeta) * t))
}

/// Position offset `xi = ln|alpha|`.
pub fn xi_offset(alpha_k: Complex64) -> Result<f64, DomainError> {
    if !(alpha_k.re.is_finite() && alpha_k.im.is_finite()) {
        return Err(DomainError::NonFinite("xi_offset"));
    }
    let modulus = alpha_k.norm();
    if modulus == 0.0 {
        return Err(DomainError::ZeroAlpha);
    }
    Ok(modulus.ln())
}

/// Serializes a complex number as a `[re, im]` pair.
pub mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}
