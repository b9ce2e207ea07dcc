//! Flag value parsers.

use nls5::evolve::Scheme;
use nls5::presets::Reduction;
use nls5::{Complex64, ModelCoefficients};

/// Most time lists are a handful of slices; this only guards against typos.
const MAX_TIMES: usize = 1_000_000;

/// `0.2+0.3i`, `-0.15+0.25i`, `2i`, `1`.
pub fn complex(s: &str) -> Result<Complex64, String> {
    s.trim().parse::<Complex64>().map_err(|_| format!("cannot read {s:?} as a complex number such as 0.2+0.3i"))
}

fn real(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("cannot read {s:?} as a number"))
}

/// `c3,c4,c5`. Non-finite values pass here and are rejected by validation.
pub fn coeffs(s: &str) -> Result<ModelCoefficients, String> {
    let v: Vec<f64> = s.split(',').map(real).collect::<Result<_, _>>()?;
    match v[..] {
        [c3, c4, c5] => Ok(ModelCoefficients::new(c3, c4, c5)),
        _ => Err(format!("expected three coefficients c3,c4,c5, got {s:?}")),
    }
}

/// Parsed `--t` value; a newtype so clap takes it as one argument.
#[derive(Debug, Clone, PartialEq)]
pub struct Times(pub Vec<f64>);

pub fn times(s: &str) -> Result<Times, String> {
    time_list(s).map(Times)
}

/// `t1,t2,...` or an inclusive range `start:step:end`.
fn time_list(s: &str) -> Result<Vec<f64>, String> {
    if !s.contains(':') {
        let v: Vec<f64> = s.split(',').map(real).collect::<Result<_, _>>()?;
        if v.iter().any(|t| !t.is_finite()) {
            return Err(format!("times must be finite, got {s:?}"));
        }
        return Ok(v);
    }
    let p: Vec<f64> = s.split(':').map(real).collect::<Result<_, _>>()?;
    let [start, step, end] = p[..] else {
        return Err(format!("expected start:step:end, got {s:?}"));
    };
    if !(start.is_finite() && end.is_finite() && step.is_finite() && step > 0.0 && end >= start) {
        return Err(format!("need finite start <= end and step > 0, got {s:?}"));
    }
    let count = ((end - start) / step + 1e-9).floor() + 1.0;
    if count > MAX_TIMES as f64 {
        return Err(format!("{s:?} gives more than {MAX_TIMES} times"));
    }
    Ok((0..count as usize).map(|k| start + k as f64 * step).collect())
}

pub fn scheme(s: &str) -> Result<Scheme, String> {
    s.parse()
}

pub fn reduction(s: &str) -> Result<Reduction, String> {
    s.parse()
}
