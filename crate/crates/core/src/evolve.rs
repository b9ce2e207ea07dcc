//! Time integration of the fifth-order NLS equation on a periodic grid.
//!
//! In Fourier space the equation reads `u_t = L u + N(u)` with the diagonal
//! linear symbol `L = -i Omega(k)` and the nonlinear part `N = i S_nl[q]`.
//! Both schemes integrate `L` exactly:
//!
//! * [`Scheme::Etdrk4`]: Cox-Matthews exponential time differencing RK4
//!   (default).
//! * [`Scheme::LawsonRk4`]: classical RK4 applied to `v = e^{-L t} u`.
//!
//! The Lawson form multiplies the nonlinear stage values by `e^{L dt}`,
//! which is unimodular but scrambles the phases of the high modes carrying
//! fifth-derivative nonlinearities; on soliton data it is unstable at the
//! step sizes used here. ETDRK4 keeps the same exact linear part and stays
//! stable.
//!
//! The nonlinear term is dealiased by zeroing modes with `|m| > n/3`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equation::{dispersion_omega, linear_terms, nonlinear_terms, Jet};
use crate::field::{mass, momentum, FieldError, FieldFrame, Grid1D};
use crate::fourier::SpectralOps;
use crate::spectral_data::ModelCoefficients;

/// Largest accepted time step.
pub const MAX_DT: f64 = 0.1;

/// Growth of `max |q|` over its initial value that is treated as blow-up.
pub const BLOWUP_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Etdrk4,
    LawsonRk4,
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "etdrk4" => Ok(Scheme::Etdrk4),
            "lawson_rk4" | "lawson-rk4" | "lawson" => Ok(Scheme::LawsonRk4),
            _ => Err(format!("unknown scheme {s:?} (expected etdrk4 or lawson_rk4)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    /// Absolute end time.
    pub t_end: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "one")]
    pub monitor_stride: usize,
    /// Switch for the nonlinear terms; off gives pure linear propagation.
    #[serde(default = "yes")]
    pub nonlinear: bool,
    #[serde(default = "yes")]
    pub dealias: bool,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self { dt, t_end, scheme: Scheme::default(), monitor_stride: 1, nonlinear: true, dealias: true }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.monitor_stride = stride;
        self
    }

    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn validate(&self) -> Result<(), EvolveError> {
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(EvolveError::BadConfig(format!("dt must lie in (0, {MAX_DT}], got {}", self.dt)));
        }
        if !self.t_end.is_finite() {
            return Err(EvolveError::BadConfig("t_end must be finite".into()));
        }
        if self.monitor_stride == 0 {
            return Err(EvolveError::BadConfig("monitor_stride must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("invalid integrator configuration: {0}")]
    BadConfig(String),
    #[error("solution blew up at step {step} (t = {t})")]
    BlowUp { step: usize, t: f64, last_good: Box<FieldFrame> },
    #[error("peak position ambiguous at t = {t}: several equal maxima")]
    Ambiguous { t: f64 },
    #[error("need at least {need} frames, got {got}")]
    TooFewFrames { need: usize, got: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `q_t` on the grid, derivatives spectral, no dealiasing.
pub fn rhs_eval(frame: &FieldFrame, coeffs: &ModelCoefficients) -> FieldFrame {
    let ops = frame.grid.spectral_ops();
    let d = ops.derivatives(&frame.values, 5);
    let values = (0..frame.grid.n)
        .map(|i| {
            let jet: Jet = std::array::from_fn(|j| d[j][i]);
            Complex64::i() * (linear_terms(&jet, coeffs) + nonlinear_terms(&jet, coeffs))
        })
        .collect();
    FieldFrame { grid: frame.grid, t: frame.t, values }
}

/// `phi_1, phi_2, phi_3` at `z`; Taylor series inside the unit disc.
fn phi123(z: Complex64) -> [Complex64; 3] {
    if z.norm() < 1.0 {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, slot) in out.iter_mut().enumerate() {
            // sum_j z^j / (j + k + 1)!
            let mut term = Complex64::new(1.0 / factorial(k + 1), 0.0);
            let mut s = term;
            for j in 1..30 {
                term = term * z / (j + k + 1) as f64;
                s += term;
            }
            *slot = s;
        }
        out
    } else {
        let ez = z.exp();
        let p1 = (ez - 1.0) / z;
        let p2 = (ez - 1.0 - z) / (z * z);
        let p3 = (ez - 1.0 - z - 0.5 * z * z) / (z * z * z);
        [p1, p2, p3]
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Fixed-step propagator for one grid, step size and coefficient set.
#[derive(Debug, Clone)]
pub struct Propagator {
    ops: SpectralOps,
    coeffs: ModelCoefficients,
    scheme: Scheme,
    dt: f64,
    nonlinear: bool,
    mask: Option<Vec<bool>>,
    d_sym: [Vec<Complex64>; 4],
    e_half: Vec<Complex64>,
    e_full: Vec<Complex64>,
    q_half: Vec<Complex64>,
    f: [Vec<Complex64>; 3],
}

impl Propagator {
    pub fn new(grid: &Grid1D, coeffs: ModelCoefficients, dt: f64, scheme: Scheme, nonlinear: bool, dealias: bool) -> Self {
        let ops = grid.spectral_ops();
        let lin: Vec<Complex64> =
            ops.wavenumbers().iter().map(|&k| Complex64::new(0.0, -dispersion_omega(k, &coeffs))).collect();
        let e_half = lin.iter().map(|l| (l * (0.5 * dt)).exp()).collect();
        let e_full = lin.iter().map(|l| (l * dt).exp()).collect();
        let q_half = lin.iter().map(|l| 0.5 * dt * phi123(l * (0.5 * dt))[0]).collect();
        let mut f: [Vec<Complex64>; 3] = Default::default();
        for l in &lin {
            let [p1, p2, p3] = phi123(l * dt);
            f[0].push(dt * (p1 - 3.0 * p2 + 4.0 * p3));
            f[1].push(dt * (2.0 * p2 - 4.0 * p3));
            f[2].push(dt * (4.0 * p3 - p2));
        }
        let d_sym = std::array::from_fn(|j| ops.derivative_symbol(j as u32));
        let mask = dealias.then(|| ops.two_thirds_mask());
        Self { ops, coeffs, scheme, dt, nonlinear, mask, d_sym, e_half, e_full, q_half, f }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Dealiased nonlinear term in Fourier space.
    fn nonlinear_hat(&self, u: &[Complex64]) -> Vec<Complex64> {
        let n = u.len();
        if !self.nonlinear {
            return vec![Complex64::new(0.0, 0.0); n];
        }
        let d: Vec<Vec<Complex64>> = self
            .d_sym
            .iter()
            .map(|sym| {
                let mut v: Vec<Complex64> = u.iter().zip(sym).map(|(a, s)| a * s).collect();
                self.ops.inverse(&mut v);
                v
            })
            .collect();
        let zero = Complex64::new(0.0, 0.0);
        let mut out: Vec<Complex64> = (0..n)
            .map(|i| {
                let jet: Jet = [d[0][i], d[1][i], d[2][i], d[3][i], zero, zero];
                Complex64::i() * nonlinear_terms(&jet, &self.coeffs)
            })
            .collect();
        self.ops.forward(&mut out);
        if let Some(mask) = &self.mask {
            out.iter_mut().zip(mask).filter(|(_, keep)| !**keep).for_each(|(z, _)| *z = zero);
        }
        out
    }

    /// One step in Fourier space.
    pub fn step_hat(&self, u: &[Complex64]) -> Vec<Complex64> {
        match self.scheme {
            Scheme::Etdrk4 => self.etdrk4(u),
            Scheme::LawsonRk4 => self.lawson(u),
        }
    }

    fn etdrk4(&self, u: &[Complex64]) -> Vec<Complex64> {
        let n = u.len();
        let (e, e2, q) = (&self.e_full, &self.e_half, &self.q_half);
        let nu = self.nonlinear_hat(u);
        let a: Vec<Complex64> = (0..n).map(|i| e2[i] * u[i] + q[i] * nu[i]).collect();
        let na = self.nonlinear_hat(&a);
        let b: Vec<Complex64> = (0..n).map(|i| e2[i] * u[i] + q[i] * na[i]).collect();
        let nb = self.nonlinear_hat(&b);
        let c: Vec<Complex64> = (0..n).map(|i| e2[i] * a[i] + q[i] * (2.0 * nb[i] - nu[i])).collect();
        let nc = self.nonlinear_hat(&c);
        let [f1, f2, f3] = &self.f;
        (0..n).map(|i| e[i] * u[i] + f1[i] * nu[i] + f2[i] * (na[i] + nb[i]) + f3[i] * nc[i]).collect()
    }

    fn lawson(&self, u: &[Complex64]) -> Vec<Complex64> {
        let n = u.len();
        let (e, e2, h) = (&self.e_full, &self.e_half, self.dt);
        let k1 = self.nonlinear_hat(u);
        let s2: Vec<Complex64> = (0..n).map(|i| e2[i] * (u[i] + 0.5 * h * k1[i])).collect();
        let k2 = self.nonlinear_hat(&s2);
        let s3: Vec<Complex64> = (0..n).map(|i| e2[i] * u[i] + 0.5 * h * k2[i]).collect();
        let k3 = self.nonlinear_hat(&s3);
        let s4: Vec<Complex64> = (0..n).map(|i| e[i] * u[i] + h * e2[i] * k3[i]).collect();
        let k4 = self.nonlinear_hat(&s4);
        (0..n)
            .map(|i| e[i] * u[i] + h / 6.0 * (e[i] * k1[i] + 2.0 * e2[i] * (k2[i] + k3[i]) + k4[i]))
            .collect()
    }

    pub fn to_hat(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut u = values.to_vec();
        self.ops.forward(&mut u);
        u
    }

    pub fn from_hat(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut v = u.to_vec();
        self.ops.inverse(&mut v);
        v
    }
}

/// One Lawson RK4 step of size `dt` with the 2/3 rule.
pub fn lawson_rk4_step(frame: &FieldFrame, dt: f64, coeffs: &ModelCoefficients) -> Result<FieldFrame, EvolveError> {
    single_step(frame, dt, coeffs, Scheme::LawsonRk4)
}

/// One step of the chosen scheme.
pub fn single_step(frame: &FieldFrame, dt: f64, coeffs: &ModelCoefficients, scheme: Scheme) -> Result<FieldFrame, EvolveError> {
    IntegratorConfig::new(dt, frame.t + dt).validate()?;
    let p = Propagator::new(&frame.grid, *coeffs, dt, scheme, true, true);
    let values = p.from_hat(&p.step_hat(&p.to_hat(&frame.values)));
    if !values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(EvolveError::BlowUp { step: 1, t: frame.t + dt, last_good: Box::new(frame.clone()) });
    }
    Ok(FieldFrame { grid: frame.grid, t: frame.t + dt, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorRecord {
    pub t: f64,
    pub mass: f64,
    pub momentum: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub frames: Vec<FieldFrame>,
    pub diagnostics: Vec<MonitorRecord>,
}

impl Trajectory {
    pub fn last(&self) -> &FieldFrame {
        self.frames.last().expect("trajectory holds the initial frame")
    }

    /// Largest `|mass(t) - mass(t0)| / mass(t0)`; zero for zero data.
    pub fn relative_mass_drift(&self) -> f64 {
        let m0 = self.diagnostics[0].mass;
        if m0 == 0.0 {
            return 0.0;
        }
        self.diagnostics.iter().map(|r| (r.mass - m0).abs() / m0).fold(0.0, f64::max)
    }

    /// Writes `frame_00000.csv, ...` and `index.json` into `dir`.
    pub fn export(&self, dir: &Path) -> Result<(), EvolveError> {
        #[derive(Serialize)]
        struct Entry<'a> {
            t: f64,
            file: &'a str,
            mass: f64,
            momentum: f64,
        }
        std::fs::create_dir_all(dir)?;
        let names: Vec<String> = (0..self.frames.len()).map(|i| format!("frame_{i:05}.csv")).collect();
        for (frame, name) in self.frames.iter().zip(&names) {
            let file = std::fs::File::create(dir.join(name))?;
            frame.write_csv(std::io::BufWriter::new(file))?;
        }
        let index: Vec<Entry> = self
            .diagnostics
            .iter()
            .zip(&names)
            .map(|(r, name)| Entry { t: r.t, file: name, mass: r.mass, momentum: r.momentum })
            .collect();
        std::fs::write(dir.join("index.json"), serde_json::to_string_pretty(&index).expect("index serializes"))?;
        Ok(())
    }
}

fn record(frame: &FieldFrame) -> MonitorRecord {
    MonitorRecord { t: frame.t, mass: mass(frame), momentum: momentum(frame) }
}

/// Number of steps and the step actually taken to land exactly on `t_end`.
fn step_plan(t0: f64, cfg: &IntegratorConfig) -> Result<(usize, f64), EvolveError> {
    let span = cfg.t_end - t0;
    if span < 0.0 {
        return Err(EvolveError::BadConfig(format!("t_end = {} precedes the initial time {t0}", cfg.t_end)));
    }
    let steps = (span / cfg.dt - 1e-9).ceil().max(0.0) as usize;
    Ok(if steps == 0 { (0, cfg.dt) } else { (steps, span / steps as f64) })
}

/// Integrates from `initial.t` to `cfg.t_end`, storing every
/// `monitor_stride`-th frame and always the last one.
pub fn run_simulation(initial: &FieldFrame, cfg: &IntegratorConfig, coeffs: &ModelCoefficients) -> Result<Trajectory, EvolveError> {
    cfg.validate()?;
    let grid = initial.grid.validated()?;
    if !grid.periodic {
        return Err(FieldError::NotPeriodic.into());
    }
    let (steps, dt) = step_plan(initial.t, cfg)?;
    let p = Propagator::new(&grid, *coeffs, dt, cfg.scheme, cfg.nonlinear, cfg.dealias);
    let limit = BLOWUP_FACTOR * initial.max_abs().max(1.0);
    let mut frames = vec![initial.clone()];
    let mut diagnostics = vec![record(initial)];
    let mut u = p.to_hat(&initial.values);
    let mut last_good = initial.clone();
    for step in 1..=steps {
        u = p.step_hat(&u);
        let t = initial.t + step as f64 * dt;
        let stored = step % cfg.monitor_stride == 0 || step == steps;
        let finite = u.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        let values = if finite || stored { p.from_hat(&u) } else { Vec::new() };
        if !finite || values.iter().any(|z| !(z.norm() <= limit)) {
            return Err(EvolveError::BlowUp { step, t, last_good: Box::new(last_good) });
        }
        last_good = FieldFrame { grid, t, values };
        if stored {
            diagnostics.push(record(&last_good));
            frames.push(last_good.clone());
        }
    }
    Ok(Trajectory { frames, diagnostics })
}

/// Centre of the dominant hump: grid argmax refined by a three-point parabola.
pub fn peak_position(frame: &FieldFrame) -> Result<f64, EvolveError> {
    let n = frame.grid.n;
    let abs: Vec<f64> = frame.values.iter().map(|z| z.norm()).collect();
    let (i, m) = frame.argmax();
    let near = |j: usize| j == i || j == (i + 1) % n || j == (i + n - 1) % n;
    if m <= 0.0 || abs.iter().enumerate().any(|(j, &v)| !near(j) && v >= m * (1.0 - 1e-12)) {
        return Err(EvolveError::Ambiguous { t: frame.t });
    }
    let (fm, f0, fp) = (abs[(i + n - 1) % n], abs[i], abs[(i + 1) % n]);
    let curv = fm - 2.0 * f0 + fp;
    let shift = if curv < 0.0 { 0.5 * (fm - fp) / curv } else { 0.0 };
    Ok(frame.grid.x(i) + shift * frame.grid.dx())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub x: f64,
    pub value: f64,
}

/// Local maxima of `|q|` above `min_fraction * max |q|`, each refined by a
/// three-point parabola, largest first.
pub fn local_peaks(frame: &FieldFrame, min_fraction: f64) -> Vec<Peak> {
    let n = frame.grid.n;
    let abs: Vec<f64> = frame.values.iter().map(|z| z.norm()).collect();
    let floor = min_fraction * frame.max_abs();
    let mut peaks: Vec<Peak> = (0..n)
        .filter_map(|i| {
            let (fm, f0, fp) = (abs[(i + n - 1) % n], abs[i], abs[(i + 1) % n]);
            if !(f0 > floor && f0 > fm && f0 >= fp) {
                return None;
            }
            let curv = fm - 2.0 * f0 + fp;
            let (shift, value) = if curv < 0.0 {
                (0.5 * (fm - fp) / curv, f0 - (fp - fm).powi(2) / (8.0 * curv))
            } else {
                (0.0, f0)
            };
            Some(Peak { x: frame.grid.x(i) + shift * frame.grid.dx(), value })
        })
        .collect();
    peaks.sort_by(|a, b| b.value.total_cmp(&a.value));
    peaks
}

/// Least-squares slope of the refined peak position against time.
pub fn track_peak_velocity(traj: &Trajectory) -> Result<f64, EvolveError> {
    if traj.frames.len() < 2 {
        return Err(EvolveError::TooFewFrames { need: 2, got: traj.frames.len() });
    }
    let pts: Vec<(f64, f64)> = traj.frames.iter().map(|f| Ok((f.t, peak_position(f)?))).collect::<Result<_, EvolveError>>()?;
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let xm = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - xm)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// `log2(e1 / e2)`; `NaN` when skipped.
    pub order: f64,
    /// `|u_dt - u_dt/2|_inf`.
    pub e1: f64,
    /// `|u_dt/2 - u_dt/4|_inf`.
    pub e2: f64,
    /// Set when `e1` sits at roundoff level and the ratio is meaningless.
    pub skipped: bool,
}

/// Step differences below this multiple of `max |q|` count as roundoff.
pub const CONVERGENCE_FLOOR: f64 = 1e-12;

/// Observed order from runs with `dt`, `dt/2`, `dt/4` to `cfg.t_end`.
pub fn self_convergence_order(initial: &FieldFrame, coeffs: &ModelCoefficients, cfg: &IntegratorConfig) -> Result<ConvergenceReport, EvolveError> {
    let run = |dt: f64| -> Result<FieldFrame, EvolveError> {
        let c = IntegratorConfig { dt, monitor_stride: usize::MAX, ..*cfg };
        Ok(run_simulation(initial, &c, coeffs)?.last().clone())
    };
    let u1 = run(cfg.dt)?;
    let u2 = run(cfg.dt / 2.0)?;
    let u4 = run(cfg.dt / 4.0)?;
    let e1 = u1.max_abs_difference(&u2);
    let e2 = u2.max_abs_difference(&u4);
    let floor = CONVERGENCE_FLOOR * u4.max_abs().max(1.0);
    let skipped = e1 < floor;
    let order = if skipped { f64::NAN } else { (e1 / e2).log2() };
    Ok(ConvergenceReport { order, e1, e2, skipped })
}
