//! `nls5 simulate`: numerical evolution with optional comparison against the
//! exact solution.

use std::io::BufReader;

use anyhow::{anyhow, Context};
use nls5::evolve::{local_peaks, run_simulation, EvolveError, IntegratorConfig, Peak, Scheme};
use nls5::field::{fitted_grid, sample_field, sample_field_unchecked, FieldFrame, Grid1D, Verdict};
use nls5::SolitonEvaluator;
use serde::Serialize;

use crate::config::RunConfig;
use crate::{failed, field_error, input, output, Result};

const DEFAULT_NX: usize = 2048;
const MIN_HALF: f64 = 30.0;
const DEFAULT_DT: f64 = 1e-3;
const DEFAULT_SPAN: f64 = 1.0;
/// Stored frames when no stride is given.
const TARGET_FRAMES: usize = 40;
/// Humps below this fraction of the maximum are not counted as peaks.
const PEAK_FLOOR: f64 = 0.1;
const EXACT_TOL: f64 = 1e-5;
const PEAK_TOL: f64 = 1e-3;

#[derive(Serialize)]
struct FrameRecord {
    t: f64,
    file: String,
    mass: f64,
    momentum: f64,
    error: Option<f64>,
}

#[derive(Serialize)]
struct Peaks {
    initial: Vec<Peak>,
    last: Vec<Peak>,
    /// `2 b_k`, largest first, when the data are spectral.
    expected: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct BlowUp {
    step: usize,
    t: f64,
    last_frame: String,
}

#[derive(Serialize)]
struct Diagnostics {
    label: String,
    scheme: Scheme,
    dt: f64,
    t_start: f64,
    t_end: f64,
    frames: Vec<FrameRecord>,
    relative_mass_drift: Option<f64>,
    max_error: Option<f64>,
    peaks: Option<Peaks>,
    verdicts: Vec<Verdict>,
    blow_up: Option<BlowUp>,
}

pub fn run(mut cfg: RunConfig) -> Result<bool> {
    let (initial, ev, label) = match cfg.integrator.init.clone() {
        Some(path) => {
            let file = std::fs::File::open(&path).with_context(|| format!("opening {}", path.display())).map_err(input)?;
            let frame = FieldFrame::read_csv(BufReader::new(file)).map_err(input)?;
            if cfg.integrator.compare_exact == Some(true) {
                return Err(input(anyhow!("--compare-exact needs spectral data, not --init")));
            }
            let coeffs = cfg.coeffs.or(cfg.preset()?.map(|p| p.set.coeffs)).unwrap_or(crate::config::DEFAULT_COEFFS);
            if !coeffs.is_finite() {
                return Err(input(anyhow!("coefficients must be finite")));
            }
            cfg.coeffs = Some(coeffs);
            cfg.integrator.t_start = Some(frame.t);
            (frame, None, format!("frame file {}", path.display()))
        }
        None => {
            let (set, label) = cfg.spectral_set()?;
            let ev = SolitonEvaluator::new(set.clone()).map_err(input)?;
            let t0 = cfg.integrator.t_start.unwrap_or(0.0);
            let t1 = t0 + cfg.integrator.duration.unwrap_or(DEFAULT_SPAN);
            if !(t0.is_finite() && t1.is_finite()) {
                return Err(input(anyhow!("start time and run length must be finite")));
            }
            let n = cfg.grid.n.unwrap_or(DEFAULT_NX);
            let grid = match (cfg.grid.x_min, cfg.grid.x_max) {
                (Some(a), Some(b)) => Grid1D::new(a, b, n).map_err(input)?,
                (None, None) => {
                    let times: Vec<f64> = (0..=10).map(|k| t0 + (t1 - t0) * k as f64 / 10.0).collect();
                    fitted_grid(&ev, &times, n, MIN_HALF).map_err(failed)?
                }
                _ => return Err(input(anyhow!("give both --xmin and --xmax or neither"))),
            };
            let frame = sample_field(&ev, &grid, t0).map_err(field_error)?;
            cfg.coeffs = Some(set.coeffs);
            cfg.solitons = Some(set.data.clone());
            cfg.integrator.t_start = Some(t0);
            (frame, Some(ev), label)
        }
    };
    let coeffs = cfg.coeffs.expect("coefficients resolved above");
    let s = &cfg.integrator;
    let dt = s.dt.unwrap_or(DEFAULT_DT);
    let duration = s.duration.unwrap_or(DEFAULT_SPAN);
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(input(anyhow!("run length must be non-negative and finite, got {duration}")));
    }
    let t_end = initial.t + duration;
    let steps = ((t_end - initial.t) / dt).ceil().max(1.0);
    let stride = s.monitor_stride.unwrap_or_else(|| (steps / TARGET_FRAMES as f64).ceil().max(1.0) as usize);
    let mut int = IntegratorConfig::new(dt, t_end).with_scheme(s.scheme.unwrap_or_default()).with_stride(stride);
    int.dealias = s.dealias.unwrap_or(true);
    int.validate().map_err(input)?;

    cfg.grid.x_min = Some(initial.grid.x_min);
    cfg.grid.x_max = Some(initial.grid.x_max);
    cfg.grid.n = Some(initial.grid.n);
    cfg.integrator.dt = Some(dt);
    cfg.integrator.duration = Some(duration);
    cfg.integrator.scheme = Some(int.scheme);
    cfg.integrator.monitor_stride = Some(stride);
    cfg.integrator.dealias = Some(int.dealias);
    cfg.integrator.compare_exact = Some(cfg.integrator.compare_exact.unwrap_or(false));
    let dir = output::echo(&cfg)?;

    let mut diag = Diagnostics {
        label,
        scheme: int.scheme,
        dt,
        t_start: initial.t,
        t_end,
        frames: Vec::new(),
        relative_mass_drift: None,
        max_error: None,
        peaks: None,
        verdicts: Vec::new(),
        blow_up: None,
    };
    let traj = match run_simulation(&initial, &int, &coeffs) {
        Ok(traj) => traj,
        Err(EvolveError::BlowUp { step, t, last_good }) => {
            let path = dir.join("last_good.csv");
            output::frame(&path, &last_good)?;
            eprintln!("solution blew up at step {step} (t = {t}); last good frame (t = {}) written to {}", last_good.t, path.display());
            diag.blow_up = Some(BlowUp { step, t, last_frame: "last_good.csv".into() });
            output::json(&dir.join("diagnostics.json"), &diag)?;
            return Ok(false);
        }
        Err(e @ EvolveError::BadConfig(_)) => return Err(input(e)),
        Err(e) => return Err(failed(e)),
    };
    traj.export(&dir).map_err(failed)?;

    let compare = cfg.integrator.compare_exact == Some(true);
    let mut max_error: f64 = 0.0;
    for (i, (f, r)) in traj.frames.iter().zip(&traj.diagnostics).enumerate() {
        let error = match (&ev, compare) {
            (Some(ev), true) => {
                let e = f.max_abs_difference(&sample_field_unchecked(ev, &f.grid, f.t).map_err(field_error)?);
                max_error = max_error.max(e);
                Some(e)
            }
            _ => None,
        };
        diag.frames.push(FrameRecord { t: f.t, file: format!("frame_{i:05}.csv"), mass: r.mass, momentum: r.momentum, error });
    }
    if compare {
        diag.max_error = Some(max_error);
        diag.verdicts.push(Verdict::below("max_error", max_error, EXACT_TOL));
    }
    if traj.diagnostics[0].mass > 0.0 {
        diag.relative_mass_drift = Some(traj.relative_mass_drift());
    }

    let first = local_peaks(&traj.frames[0], PEAK_FLOOR);
    let last = local_peaks(traj.last(), PEAK_FLOOR);
    let expected: Option<Vec<f64>> = ev.as_ref().map(|ev| {
        let mut v: Vec<f64> = ev.set().data.iter().map(|d| 2.0 * d.b()).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    });
    if let Some(exp) = &expected {
        // only meaningful when every soliton shows as its own hump at both ends
        if exp.len() > 1 && first.len() == exp.len() && last.len() == exp.len() {
            let change = first.iter().zip(&last).map(|(a, b)| (a.value - b.value).abs()).fold(0.0, f64::max);
            let miss = last.iter().zip(exp).map(|(p, e)| (p.value - e).abs()).fold(0.0, f64::max);
            diag.verdicts.push(Verdict::below("peak_change", change, PEAK_TOL));
            diag.verdicts.push(Verdict::below("peak_vs_expected", miss, PEAK_TOL));
        }
    }
    if !first.is_empty() {
        diag.peaks = Some(Peaks { initial: first, last, expected });
    }

    let pass = diag.verdicts.iter().all(|v| v.pass);
    for v in &diag.verdicts {
        println!("{} {} = {:.3e} (tol {:e})", if v.pass { "PASS" } else { "FAIL" }, v.name, v.value, v.tolerance);
    }
    output::json(&dir.join("diagnostics.json"), &diag)?;
    println!("{} frames written to {}", traj.frames.len(), dir.display());
    Ok(pass)
}
