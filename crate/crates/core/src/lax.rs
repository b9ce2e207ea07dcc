//! Lax pair of the fifth-order NLS equation and its zero-curvature check.
//!
//! `Phi_x = U Phi`, `Phi_t = V Phi` with
//!
//! ```text
//! U = i [[zeta, conj(q)], [q, -zeta]],
//! V = sum_{c=0}^{5} i zeta^c [[A_c, conj(B_c)], [B_c, -A_c]].
//! ```
//!
//! Compatibility `U_t - V_x + [U, V] = 0` holds exactly when `q` solves the
//! equation, so evaluating it on exact solitons audits every `A_c`, `B_c`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::field::{jets, FieldError, Grid1D, TimeStencil, ZeroCurvatureEntry};
use crate::soliton::SolitonEvaluator;
use crate::spectral_data::ModelCoefficients;

pub type Mat2 = [[Complex64; 2]; 2];

/// `[q, q_x, q_xx, q_xxx, q_xxxx]` at one point.
pub type LaxJet = [Complex64; 5];

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

pub fn commutator(a: &Mat2, b: &Mat2) -> Mat2 {
    let (ab, ba) = (mat_mul(a, b), mat_mul(b, a));
    std::array::from_fn(|i| std::array::from_fn(|j| ab[i][j] - ba[i][j]))
}

pub fn trace(a: &Mat2) -> Complex64 {
    a[0][0] + a[1][1]
}

pub fn adjoint(a: &Mat2) -> Mat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i].conj()))
}

/// `U = i (zeta sigma + Q)`.
pub fn assemble_u(q: Complex64, zeta: Complex64) -> Mat2 {
    [[I * zeta, I * q.conj()], [I * q, -I * zeta]]
}

/// The coefficient lists `A_0..A_5`, `B_0..B_5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaxCoefficients {
    pub a: [Complex64; 6],
    pub b: [Complex64; 6],
}

pub fn lax_coefficients(jet: &LaxJet, k: &ModelCoefficients) -> LaxCoefficients {
    let [q, q1, q2, q3, q4] = *jet;
    let (qc, q1c, q2c, q3c) = (q.conj(), q1.conj(), q2.conj(), q3.conj());
    let (al, ga, de) = (k.c3, k.c4, k.c5);
    let m = q.norm_sqr();
    let m1 = q1.norm_sqr();
    // q_x* q - q_x q*
    let w = q1c * q - q1 * qc;
    // q_xx* q - |q_x|^2 + q_xx q*
    let s = q2c * q - m1 + q2 * qc;
    let c = |v: f64| Complex64::new(v, 0.0);

    let a5 = c(16.0 * de);
    let a4 = c(-8.0 * ga);
    let a3 = c(-4.0 * al - 8.0 * de * m);
    let a2 = 1.0 + 4.0 * ga * m + 4.0 * I * ga * w;
    let a1 = 2.0 * al * m + 6.0 * de * m * m - 2.0 * I * ga * w + 2.0 * de * s;
    let a0 = -0.5 * m - 3.0 * ga * m * m - I * al * w - ga * s - I * de * (q3c * q - q2c * q1 + q2 * q1c - q3 * qc)
        - 6.0 * I * de * w * m;

    let b5 = c(0.0);
    let b4 = 16.0 * de * q;
    let b3 = -8.0 * ga * q + 8.0 * I * de * q1;
    let b2 = -4.0 * al * q - 8.0 * de * m * q - 4.0 * I * ga * q1 - 4.0 * de * q2;
    let b1 = q + 4.0 * ga * m * q - 2.0 * I * al * q1 - 12.0 * I * de * m * q1 + 2.0 * ga * q2 - 2.0 * I * de * q3;
    let b0 = 2.0 * al * m * q + 6.0 * de * m * m * q + 0.5 * I * q1 + 6.0 * I * ga * m * q1 + al * q2
        + 2.0 * de * q2c * q * q
        + 4.0 * de * m1 * q
        + 6.0 * de * q1 * q1 * qc
        + 8.0 * de * q2 * m
        + I * ga * q3
        + de * q4;

    LaxCoefficients { a: [a0, a1, a2, a3, a4, a5], b: [b0, b1, b2, b3, b4, b5] }
}

/// `V` assembled from the coefficient lists.
pub fn assemble_v(jet: &LaxJet, zeta: Complex64, k: &ModelCoefficients) -> Mat2 {
    let LaxCoefficients { a, b } = lax_coefficients(jet, k);
    let mut v = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut zc = Complex64::new(1.0, 0.0);
    for c in 0..6 {
        let f = I * zc;
        v[0][0] += f * a[c];
        v[0][1] += f * b[c].conj();
        v[1][0] += f * b[c];
        v[1][1] -= f * a[c];
        zc *= zeta;
    }
    v
}

/// `V` in the split form: the vacuum dispersion `omega(zeta) sigma` plus the
/// potential part with `A_2`, `A_3` replaced by their `q`-dependent pieces.
pub fn assemble_v_split(jet: &LaxJet, zeta: Complex64, k: &ModelCoefficients) -> Mat2 {
    let LaxCoefficients { a, b } = lax_coefficients(jet, k);
    let q = jet[0];
    let w = jet[1].conj() * q - jet[1] * q.conj();
    let z2 = zeta * zeta;
    let z3 = z2 * zeta;
    let disp = I * k.dispersion_polynomial(zeta);
    let diag = disp + I * a[0] + I * zeta * a[1] + I * z2 * (4.0 * k.c4 * q.norm_sqr() + 4.0 * I * k.c4 * w)
        - 8.0 * I * z3 * k.c5 * q.norm_sqr();
    let mut off = [Complex64::new(0.0, 0.0); 2];
    let mut zc = Complex64::new(1.0, 0.0);
    for bc in b {
        off[0] += I * zc * bc.conj();
        off[1] += I * zc * bc;
        zc *= zeta;
    }
    [[diag, off[0]], [off[1], -diag]]
}

/// `U` and `V` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaxMatrices {
    pub u: Mat2,
    pub v: Mat2,
    pub zeta: Complex64,
    pub x: f64,
    pub t: f64,
}

impl LaxMatrices {
    pub fn at(jet: &LaxJet, zeta: Complex64, k: &ModelCoefficients, x: f64, t: f64) -> Self {
        Self { u: assemble_u(jet[0], zeta), v: assemble_v(jet, zeta, k), zeta, x, t }
    }
}

/// Entrywise maximum of `|U_t - V_x + UV - VU|` over the centre frame of a
/// stencil. `U_t` comes from the stencil, `V_x` is spectral.
pub fn zero_curvature_from_stencil(stencil: &TimeStencil, zeta: Complex64, k: &ModelCoefficients) -> f64 {
    let centre = stencil.centre();
    let ops = centre.grid.spectral_ops();
    let qt = stencil.time_derivative();
    let js = jets(&ops, &centre.values);
    let n = centre.grid.n;

    let us: Vec<Mat2> = centre.values.iter().map(|&q| assemble_u(q, zeta)).collect();
    let vs: Vec<Mat2> =
        js.par_iter().map(|d| assemble_v(&[d[0], d[1], d[2], d[3], d[4]], zeta, k)).collect();
    let mut vx = [[vec![], vec![]], [vec![], vec![]]];
    for (i, row) in vx.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let entry: Vec<Complex64> = vs.iter().map(|v| v[i][j]).collect();
            *slot = ops.derivative(&entry, 1);
        }
    }
    (0..n)
        .map(|p| {
            let ut: Mat2 = [[Complex64::new(0.0, 0.0), I * qt[p].conj()], [I * qt[p], Complex64::new(0.0, 0.0)]];
            let c = commutator(&us[p], &vs[p]);
            let mut worst: f64 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((ut[i][j] - vx[i][j][p] + c[i][j]).norm());
                }
            }
            worst
        })
        .fold(0.0, f64::max)
}

/// Zero-curvature residual of an exact solution at time `t`.
pub fn zero_curvature_residual(
    ev: &SolitonEvaluator,
    grid: &Grid1D,
    t: f64,
    zeta: Complex64,
    dt_fd: f64,
) -> Result<f64, FieldError> {
    if !(zeta.re.is_finite() && zeta.im.is_finite()) {
        return Err(FieldError::Parse(format!("spectral parameter must be finite, got {zeta}")));
    }
    let stencil = TimeStencil::from_evaluator(ev, grid, t, dt_fd)?;
    Ok(zero_curvature_from_stencil(&stencil, zeta, ev.coeffs()))
}

/// Residuals for several spectral parameters, shaped for a report.
pub fn zero_curvature_entries(
    ev: &SolitonEvaluator,
    grid: &Grid1D,
    t: f64,
    zetas: &[Complex64],
    dt_fd: f64,
) -> Result<Vec<ZeroCurvatureEntry>, FieldError> {
    let stencil = TimeStencil::from_evaluator(ev, grid, t, dt_fd)?;
    Ok(zetas
        .iter()
        .map(|&z| ZeroCurvatureEntry { zeta: [z.re, z.im], residual_inf: zero_curvature_from_stencil(&stencil, z, ev.coeffs()) })
        .collect())
}
