//! Exact N-soliton fields from reflectionless spectral data.
//!
//! The general engine builds the N x N kernel matrix
//!
//! ```text
//! m_kj = (conj(alpha_k) alpha_j e^{conj(theta_k) + theta_j}
//!         + conj(beta_k) beta_j e^{-conj(theta_k) - theta_j}) / (zeta_j - conj(zeta_k))
//! ```
//!
//! and evaluates `q = -2 sum_kj conj(alpha_j) beta_k e^{-theta_k + conj(theta_j)} (M^-1)_kj`
//! with one LU solve. Before solving, row k and column k are both scaled by
//! `e^{-|Re theta_k|}`; the same factors cancel out of `q`, so the field is
//! unchanged while no exponential can overflow.
//!
//! One- and two-soliton closed forms are provided as independent routes for
//! cross-checking the general engine.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{condition_number, CMatrix, Lu};
use crate::spectral_data::{
    theta_phase, validate_spectral_set, xi_offset, DomainError, ModelCoefficients, SpectralDatum, SpectralSet,
    ValidationReport,
};

/// Kernel condition numbers above this are treated as numerically singular.
pub const CONDITION_LIMIT: f64 = 1e14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid spectral set: {0}")]
    InvalidSet(ValidationReport),
    #[error("phase of soliton {index} is not representable at (x, t) = ({x}, {t})")]
    Range { index: usize, x: f64, t: f64 },
    #[error("kernel matrix numerically singular at (x, t) = ({x}, {t}), condition {condition:e}")]
    Degenerate { x: f64, t: f64, condition: f64 },
    #[error("precondition violated: {0}")]
    Contract(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Kernel matrix at a fixed `(x, t)`, without rebalancing.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub entries: CMatrix,
    pub x: f64,
    pub t: f64,
}

impl KernelMatrix {
    /// Largest `|m_jk + conj(m_kj)|` relative to the largest entry.
    pub fn skew_hermitian_defect(&self) -> f64 {
        let m = &self.entries;
        let n = m.dim();
        let mut scale: f64 = 0.0;
        let mut defect: f64 = 0.0;
        for k in 0..n {
            for j in 0..n {
                scale = scale.max(m.get(k, j).norm());
                defect = defect.max((m.get(j, k) + m.get(k, j).conj()).norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            defect / scale
        }
    }
}

fn phases(set: &SpectralSet, x: f64, t: f64) -> Result<Vec<Complex64>, EngineError> {
    set.data
        .iter()
        .enumerate()
        .map(|(index, d)| {
            let th = theta_phase(d.zeta, &set.coeffs, x, t).map_err(|_| EngineError::Range { index, x, t })?;
            if th.re.is_finite() && th.im.is_finite() {
                Ok(th)
            } else {
                Err(EngineError::Range { index, x, t })
            }
        })
        .collect()
}

fn cauchy_kernel(set: &SpectralSet, a: &[Complex64], b: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(set.len(), |k, j| {
        (a[k].conj() * a[j] + b[k].conj() * b[j]) / (set.data[j].zeta - set.data[k].zeta.conj())
    })
}

/// The unbalanced kernel matrix. Reports a range error naming the first
/// soliton whose exponentials overflow.
pub fn kernel_matrix(set: &SpectralSet, x: f64, t: f64) -> Result<KernelMatrix, EngineError> {
    let th = phases(set, x, t)?;
    let mut a = Vec::with_capacity(th.len());
    let mut b = Vec::with_capacity(th.len());
    for (index, (d, th)) in set.data.iter().zip(&th).enumerate() {
        let ea = d.alpha_k * th.exp();
        let eb = d.beta_k * (-th).exp();
        if !(ea.re.is_finite() && ea.im.is_finite() && eb.re.is_finite() && eb.im.is_finite()) {
            return Err(EngineError::Range { index, x, t });
        }
        a.push(ea);
        b.push(eb);
    }
    let entries = cauchy_kernel(set, &a, &b);
    if !entries.is_finite() {
        return Err(EngineError::Range { index: 0, x, t });
    }
    Ok(KernelMatrix { entries, x, t })
}

/// Evaluates the N-soliton field for one validated spectral set.
#[derive(Debug, Clone)]
pub struct SolitonEvaluator {
    set: SpectralSet,
}

impl SolitonEvaluator {
    pub fn new(set: SpectralSet) -> Result<Self, EngineError> {
        let report = validate_spectral_set(&set);
        if !report.is_valid() {
            return Err(EngineError::InvalidSet(report));
        }
        Ok(Self { set })
    }

    pub fn set(&self) -> &SpectralSet {
        &self.set
    }

    pub fn coeffs(&self) -> &ModelCoefficients {
        &self.set.coeffs
    }

    /// Balanced kernel and the scaled vectors `alpha_k e^{theta_k}`,
    /// `beta_k e^{-theta_k}`, all multiplied by `e^{-|Re theta_k|}`.
    fn balanced(&self, x: f64, t: f64) -> Result<(CMatrix, Vec<Complex64>, Vec<Complex64>), EngineError> {
        let th = phases(&self.set, x, t)?;
        let (a, b): (Vec<_>, Vec<_>) = self
            .set
            .data
            .iter()
            .zip(&th)
            .map(|(d, th)| {
                let r = th.re.abs();
                (d.alpha_k * (th - r).exp(), d.beta_k * (-th - r).exp())
            })
            .unzip();
        Ok((cauchy_kernel(&self.set, &a, &b), a, b))
    }

    /// `q(x, t)`.
    pub fn evaluate_q(&self, x: f64, t: f64) -> Result<Complex64, EngineError> {
        let (m, a, b) = self.balanced(x, t)?;
        let lu = Lu::factor(&m).map_err(|_| EngineError::Degenerate { x, t, condition: f64::INFINITY })?;
        let condition = m.norm1() * lu.inverse_norm1();
        if !(condition <= CONDITION_LIMIT) {
            return Err(EngineError::Degenerate { x, t, condition });
        }
        let rhs: Vec<Complex64> = a.iter().map(|z| z.conj()).collect();
        let y = lu.solve(&rhs);
        let s: Complex64 = b.iter().zip(&y).map(|(bk, yk)| bk * yk).sum();
        Ok(-2.0 * s)
    }

    /// Evaluates at many abscissae in parallel. Output order follows `xs`.
    pub fn evaluate_many(&self, xs: &[f64], t: f64) -> Result<Vec<Complex64>, EngineError> {
        xs.par_iter().map(|&x| self.evaluate_q(x, t)).collect()
    }

    /// Condition number of the balanced kernel at `(x, t)`.
    pub fn kernel_condition(&self, x: f64, t: f64) -> Result<f64, EngineError> {
        Ok(condition_number(&self.balanced(x, t)?.0))
    }
}

fn require_unit_beta(d: &SpectralDatum) -> Result<(), EngineError> {
    if d.beta_k != Complex64::new(1.0, 0.0) {
        return Err(EngineError::Contract(format!(
            "closed forms fix beta = 1; renormalize (alpha, beta) -> (alpha/beta, 1), got beta = {}",
            d.beta_k
        )));
    }
    Ok(())
}

/// `theta + conj(theta)` expanded in `(a, b)`.
fn phase_sum(a: f64, b: f64, k: &ModelCoefficients, x: f64, t: f64) -> f64 {
    let (a2, b2) = (a * a, b * b);
    let p = 80.0 * k.c5 * a2 * a2 - 160.0 * k.c5 * a2 * b2 + 16.0 * k.c5 * b2 * b2 - 32.0 * k.c4 * a2 * a
        + 32.0 * k.c4 * a * b2
        - 12.0 * k.c3 * a2
        + 4.0 * k.c3 * b2
        + 2.0 * a;
    -2.0 * b * (x + p * t)
}

/// `conj(theta) - theta` expanded in `(a, b)`; purely imaginary, returned as
/// its imaginary part.
fn phase_difference_im(a: f64, b: f64, k: &ModelCoefficients, x: f64, t: f64) -> f64 {
    let (a2, b2) = (a * a, b * b);
    let w = -160.0 * k.c5 * a * b2 * b2 + 320.0 * k.c5 * a2 * a * b2 - 96.0 * k.c4 * a2 * b2 - 24.0 * k.c3 * a * b2
        + 16.0 * k.c4 * a2 * a2
        - 32.0 * k.c5 * a2 * a2 * a
        + 8.0 * k.c3 * a2 * a
        + 16.0 * k.c4 * b2 * b2
        + 2.0 * b2
        - 2.0 * a2;
    -2.0 * a * x + w * t
}

/// One-soliton closed form in the `beta = 1` gauge:
/// `q = -2i conj(alpha) b e^{-xi} e^{conj(theta) - theta} sech(theta + conj(theta) + xi)`.
pub fn one_soliton_closed_form(d: &SpectralDatum, k: &ModelCoefficients, x: f64, t: f64) -> Result<Complex64, EngineError> {
    require_unit_beta(d)?;
    let xi = xi_offset(d.alpha_k)?;
    let (a, b) = (d.a(), d.b());
    if b <= 0.0 {
        return Err(EngineError::Contract("eigenvalue must lie in the upper half-plane".into()));
    }
    let arg = phase_sum(a, b, k, x, t) + xi;
    let sech = 1.0 / arg.cosh();
    let carrier = Complex64::from_polar(1.0, phase_difference_im(a, b, k, x, t));
    Ok(Complex64::new(0.0, -2.0) * d.alpha_k.conj() * b * (-xi).exp() * carrier * sech)
}

/// Two-soliton closed form with the cosh-form kernel entries, valid for
/// `beta_1 = beta_2 = 1` and `alpha_1 = alpha_2`.
pub fn two_soliton_closed_form(set: &SpectralSet, x: f64, t: f64) -> Result<Complex64, EngineError> {
    if set.len() != 2 {
        return Err(EngineError::Contract(format!("two-soliton form needs N = 2, got {}", set.len())));
    }
    let (d1, d2) = (&set.data[0], &set.data[1]);
    require_unit_beta(d1)?;
    require_unit_beta(d2)?;
    if d1.alpha_k != d2.alpha_k {
        return Err(EngineError::Contract("two-soliton form needs alpha_1 = alpha_2".into()));
    }
    let k = &set.coeffs;
    let th1 = theta_phase(d1.zeta, k, x, t)?;
    let th2 = theta_phase(d2.zeta, k, x, t)?;
    let xi1 = xi_offset(d1.alpha_k)?;
    let xi2 = xi_offset(d2.alpha_k)?;
    let (a1, b1, a2, b2) = (d1.a(), d1.b(), d2.a(), d2.b());
    let i = Complex64::i();

    let m11 = -i / b1 * xi1.exp() * (th1.conj() + th1 + xi1).cosh();
    let m12 = 2.0 * xi1.exp() / Complex64::new(a2 - a1, b1 + b2) * (th1.conj() + th2 + xi1).cosh();
    let m21 = 2.0 * xi2.exp() / Complex64::new(a1 - a2, b1 + b2) * (th2.conj() + th1 + xi2).cosh();
    let m22 = -i / b2 * xi2.exp() * (th2.conj() + th2 + xi2).cosh();

    let al1 = d1.alpha_k.conj();
    let al2 = d2.alpha_k.conj();
    let num = al1 * m22 * (-th1 + th1.conj()).exp() - al2 * m12 * (-th1 + th2.conj()).exp()
        - al1 * m21 * (-th2 + th1.conj()).exp()
        + al2 * m11 * (-th2 + th2.conj()).exp();
    Ok(-2.0 / (m11 * m22 - m12 * m21) * num)
}

/// Peak amplitude `2 |alpha| b e^{-xi}` of a one-soliton (`beta = 1`).
pub fn peak_amplitude(d: &SpectralDatum) -> Result<f64, EngineError> {
    require_unit_beta(d)?;
    let xi = xi_offset(d.alpha_k)?;
    Ok(2.0 * d.alpha_k.conj().norm() * d.b() * (-xi).exp())
}

/// Envelope velocity of a one-soliton with eigenvalue `a + ib`.
pub fn soliton_velocity(d: &SpectralDatum, k: &ModelCoefficients) -> f64 {
    let (a, b) = (d.a(), d.b());
    let (a2, b2) = (a * a, b * b);
    -80.0 * k.c5 * a2 * a2 + 160.0 * k.c5 * a2 * b2 - 16.0 * k.c5 * b2 * b2 + 32.0 * k.c4 * a2 * a
        - 32.0 * k.c4 * a * b2
        + 12.0 * k.c3 * a2
        - 4.0 * k.c3 * b2
        - 2.0 * a
}

/// Envelope centre of an isolated soliton at time `t`: `x = V t + xi / (2b)`
/// with `xi = ln|alpha/beta|`. Ignores collision-induced shifts.
pub fn soliton_center(d: &SpectralDatum, k: &ModelCoefficients, t: f64) -> f64 {
    let xi = (d.alpha_k.norm() / d.beta_k.norm()).ln();
    soliton_velocity(d, k) * t + xi / (2.0 * d.b())
}

/// Half-width of a centred domain on which the field stays below `tol` at
/// both ends for every time in `times`. Uses the `4 b e^{-2 b |x - x_c|}`
/// tail of each soliton plus an allowance for pairwise position shifts.
pub fn suggest_half_width(set: &SpectralSet, times: &[f64], tol: f64) -> f64 {
    let mut half: f64 = 0.0;
    for (k, d) in set.data.iter().enumerate() {
        let b = d.b();
        let tail = ((4.0 * b / tol).ln() / (2.0 * b)).max(0.0);
        let shift: f64 = set
            .data
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, e)| ((d.zeta - e.zeta.conj()).norm() / (d.zeta - e.zeta).norm()).ln().abs() / b)
            .sum();
        for &t in times {
            half = half.max(soliton_center(d, &set.coeffs, t).abs() + shift + tail);
        }
    }
    half
}
