//! `nls5 figures`: surface and slice data behind Figures 1-5.
//!
//! Surfaces are written long-format (`x,t,value`), time-major over a regular
//! grid, which contour tools read directly.

use anyhow::anyhow;
use nls5::soliton::{peak_amplitude, soliton_velocity};
use nls5::{Complex64, ModelCoefficients, SolitonEvaluator};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{lookup, provenance_name, RunConfig};
use crate::{failed, input, output, Result};

const DEFAULT_NX: usize = 201;
const DEFAULT_NT: usize = 201;

#[derive(Serialize)]
struct Axis {
    min: f64,
    max: f64,
    n: usize,
}

#[derive(Serialize)]
struct Surface {
    part: &'static str,
    file: String,
    min: f64,
    max: f64,
}

#[derive(Serialize)]
struct Slice {
    t: f64,
    file: String,
    max_abs: f64,
}

#[derive(Serialize)]
struct SolitonInfo {
    zeta: [f64; 2],
    alpha: [f64; 2],
    beta: [f64; 2],
    amplitude: f64,
    velocity: f64,
}

/// Crest of a one-soliton surface: `x = velocity * t + offset`.
#[derive(Serialize)]
struct Ridge {
    velocity: f64,
    offset: f64,
}

#[derive(Serialize)]
struct Metadata {
    figure: u32,
    preset: &'static str,
    provenance: &'static str,
    coeffs: ModelCoefficients,
    solitons: Vec<SolitonInfo>,
    x: Axis,
    t: Axis,
    surfaces: Vec<Surface>,
    slices: Vec<Slice>,
    ridge: Option<Ridge>,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

pub fn run(mut cfg: RunConfig) -> Result<bool> {
    let figure = cfg.figure.ok_or_else(|| input(anyhow!("--figure is required (1-5)")))?;
    if !(1..=5).contains(&figure) {
        return Err(input(anyhow!("unknown figure {figure} (expected 1-5)")));
    }
    let p = lookup(&format!("figure{figure}"))?;
    let ev = SolitonEvaluator::new(p.set.clone()).map_err(input)?;
    let (x_min, x_max) = match (cfg.grid.x_min, cfg.grid.x_max) {
        (Some(a), Some(b)) => (a, b),
        (None, None) => p.x_range,
        _ => return Err(input(anyhow!("give both --xmin and --xmax or neither"))),
    };
    let nx = cfg.grid.n.unwrap_or(DEFAULT_NX);
    if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min && nx >= 2) {
        return Err(input(anyhow!("need x_max > x_min and at least two points")));
    }
    let times = cfg.output.times.clone().unwrap_or_else(|| linspace(p.t_range.0, p.t_range.1, DEFAULT_NT));
    if times.is_empty() {
        return Err(input(anyhow!("empty time axis")));
    }

    cfg.figure = Some(figure);
    cfg.grid.x_min = Some(x_min);
    cfg.grid.x_max = Some(x_max);
    cfg.grid.n = Some(nx);
    cfg.output.times = Some(times.clone());
    let dir = output::echo(&cfg)?;

    let xs = linspace(x_min, x_max, nx);
    let rows: Vec<Vec<Complex64>> = times.par_iter().map(|&t| ev.evaluate_many(&xs, t)).collect::<std::result::Result<_, _>>().map_err(failed)?;

    let mut surfaces = Vec::new();
    for &part in &p.parts {
        let file = format!("figure{figure}_{}_surface.csv", part.name());
        let values = || rows.iter().flatten().map(|&z| part.of(z));
        let min = values().fold(f64::INFINITY, f64::min);
        let max = values().fold(f64::NEG_INFINITY, f64::max);
        let cells = times.iter().zip(&rows).flat_map(|(&t, row)| xs.iter().zip(row).map(move |(&x, &z)| vec![x, t, part.of(z)]));
        output::csv(&dir.join(&file), "x,t,value", cells)?;
        surfaces.push(Surface { part: part.name(), file, min, max });
    }

    let mut slices = Vec::new();
    for (i, &t) in p.slices.iter().enumerate() {
        let row = ev.evaluate_many(&xs, t).map_err(failed)?;
        let file = format!("figure{figure}_slice_{i}.csv");
        let cells = xs.iter().zip(&row).map(|(&x, &z)| vec![x, t, z.re, z.im, z.norm()]);
        output::csv(&dir.join(&file), "x,t,re,im,abs", cells)?;
        slices.push(Slice { t, file, max_abs: row.iter().map(|z| z.norm()).fold(0.0, f64::max) });
    }

    let k = p.set.coeffs;
    let solitons = p
        .set
        .data
        .iter()
        .map(|d| {
            Ok(SolitonInfo {
                zeta: [d.zeta.re, d.zeta.im],
                alpha: [d.alpha_k.re, d.alpha_k.im],
                beta: [d.beta_k.re, d.beta_k.im],
                amplitude: peak_amplitude(d).map_err(failed)?,
                velocity: soliton_velocity(d, &k),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ridge = match &p.set.data[..] {
        [d] => Some(Ridge { velocity: soliton_velocity(d, &k), offset: nls5::soliton::soliton_center(d, &k, 0.0) }),
        _ => None,
    };
    let provenance = provenance_name(p.provenance);
    println!("figure {figure} ({provenance} parameters): {} surfaces, {} slices in {}", surfaces.len(), slices.len(), dir.display());
    let meta = Metadata {
        figure,
        preset: p.name,
        provenance,
        coeffs: k,
        solitons,
        x: Axis { min: x_min, max: x_max, n: nx },
        t: Axis { min: times[0], max: times[times.len() - 1], n: times.len() },
        surfaces,
        slices,
        ridge,
    };
    output::json(&dir.join(format!("figure{figure}.json")), &meta)?;
    Ok(true)
}
