//! FFT plans and wavenumbers for a periodic grid.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse transforms of one length plus the matching wavenumbers
/// `k_m = 2 pi m / L`, `m` in the symmetric range `-n/2 .. n/2`.
#[derive(Clone)]
pub struct SpectralOps {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
    modes: Vec<i64>,
}

impl std::fmt::Debug for SpectralOps {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralOps").field("n", &self.n).finish()
    }
}

impl SpectralOps {
    /// `n` must be even; callers enforce power-of-two sizes.
    pub fn new(n: usize, length: f64) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let modes: Vec<i64> = (0..n as i64).map(|i| if i < n as i64 / 2 { i } else { i - n as i64 }).collect();
        let k = modes.iter().map(|&m| 2.0 * std::f64::consts::PI * m as f64 / length).collect();
        Self { n, fwd, inv, k, modes }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    /// Integer mode index of each FFT bin; the Nyquist bin reads `-n/2`.
    pub fn modes(&self) -> &[i64] {
        &self.modes
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    /// Inverse transform including the `1/n` normalization.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }

    /// Multiplier `(ik)^order` for every bin, with the Nyquist bin zeroed for
    /// odd orders.
    pub fn derivative_symbol(&self, order: u32) -> Vec<Complex64> {
        let nyq = self.n / 2;
        self.k
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                if i == nyq && order % 2 == 1 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, k).powu(order)
                }
            })
            .collect()
    }

    /// All derivatives `0..=max_order` from a single forward transform.
    pub fn derivatives(&self, values: &[Complex64], max_order: u32) -> Vec<Vec<Complex64>> {
        let mut hat = values.to_vec();
        self.forward(&mut hat);
        let mut out = vec![values.to_vec()];
        for order in 1..=max_order {
            let sym = self.derivative_symbol(order);
            let mut d: Vec<Complex64> = hat.iter().zip(&sym).map(|(h, s)| h * s).collect();
            self.inverse(&mut d);
            out.push(d);
        }
        out
    }

    pub fn derivative(&self, values: &[Complex64], order: u32) -> Vec<Complex64> {
        let mut hat = values.to_vec();
        self.forward(&mut hat);
        hat.iter_mut().zip(self.derivative_symbol(order)).for_each(|(h, s)| *h *= s);
        self.inverse(&mut hat);
        hat
    }

    /// True for bins kept by the 2/3 rule (`|m| <= n/3`).
    pub fn two_thirds_mask(&self) -> Vec<bool> {
        let cut = self.n as i64 / 3;
        self.modes.iter().map(|m| m.abs() <= cut).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let ops = SpectralOps::new(32, 5.0);
        let v: Vec<Complex64> = (0..32).map(|i| Complex64::new(i as f64, -(i as f64).sqrt())).collect();
        let mut w = v.clone();
        ops.forward(&mut w);
        ops.inverse(&mut w);
        for (a, b) in v.iter().zip(&w) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn wavenumbers_are_symmetric() {
        let ops = SpectralOps::new(8, 2.0 * std::f64::consts::PI);
        assert_eq!(ops.modes(), &[0, 1, 2, 3, -4, -3, -2, -1]);
        assert!((ops.wavenumbers()[3] - 3.0).abs() < 1e-15);
        assert_eq!(ops.derivative_symbol(1)[4], Complex64::new(0.0, 0.0));
        assert_eq!(ops.derivative_symbol(2)[4], Complex64::new(-16.0, 0.0));
    }

    #[test]
    fn two_thirds_mask_counts() {
        let ops = SpectralOps::new(48, 1.0);
        assert_eq!(ops.two_thirds_mask().iter().filter(|&&b| b).count(), 33);
    }
}
