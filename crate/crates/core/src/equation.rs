//! Pointwise right-hand side of the fifth-order NLS equation.
//!
//! Writing the equation as `i q_t + S[q] = 0`, these functions evaluate `S`
//! and its purely nonlinear part from the jet `[q, q_x, ..., q_xxxxx]` at one
//! grid point.

use num_complex::Complex64;

use crate::spectral_data::ModelCoefficients;

/// `[q, q_x, q_xx, q_xxx, q_xxxx, q_xxxxx]` at one point.
pub type Jet = [Complex64; 6];

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Linear part `q_xx/2 - i c3 q_xxx + c4 q_xxxx - i c5 q_xxxxx`.
pub fn linear_terms(d: &Jet, k: &ModelCoefficients) -> Complex64 {
    0.5 * d[2] - I * k.c3 * d[3] + k.c4 * d[4] - I * k.c5 * d[5]
}

/// Everything in `S` that is at least cubic in `q`.
pub fn nonlinear_terms(d: &Jet, k: &ModelCoefficients) -> Complex64 {
    let [q, q1, q2, q3, _, _] = *d;
    let (qc, q1c, q2c) = (q.conj(), q1.conj(), q2.conj());
    let a = q.norm_sqr();
    let cubic = a * q;
    let third = 6.0 * a * q1;
    let fourth = 6.0 * q1 * q1 * qc + 4.0 * q * q1.norm_sqr() + 8.0 * a * q2 + 2.0 * q * q * q2c + 6.0 * a * a * q;
    let fifth = 10.0 * a * q3
        + 30.0 * a * a * q1
        + 10.0 * q * q1 * q2c
        + 10.0 * q * q1c * q2
        + 20.0 * qc * q1 * q2
        + 10.0 * q1 * q1 * q1c;
    cubic - I * k.c3 * third + k.c4 * fourth - I * k.c5 * fifth
}

/// `S[q]`; the equation residual is `i q_t + spatial_terms`.
pub fn spatial_terms(d: &Jet, k: &ModelCoefficients) -> Complex64 {
    linear_terms(d, k) + nonlinear_terms(d, k)
}

/// Dispersion relation `Omega(k) = k^2/2 + c3 k^3 - c4 k^4 - c5 k^5`, so that
/// `e^{i(kx - Omega t)}` solves the linear part.
pub fn dispersion_omega(wavenumber: f64, k: &ModelCoefficients) -> f64 {
    let w = wavenumber;
    w * w * (0.5 + w * (k.c3 - w * (k.c4 + w * k.c5)))
}
