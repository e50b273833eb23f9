//! Any-size 2-D FFT built from row and column passes.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Fft2 {
    width: usize,
    height: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish()
    }
}

impl Fft2 {
    pub(crate) fn new(width: usize, height: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            width,
            height,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.row_fwd, &self.col_fwd);
    }

    /// Inverse transform including the `1 / (width * height)` scaling.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.row_inv, &self.col_inv);
        let scale = 1.0 / (self.width * self.height) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    fn run(&self, data: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.width * self.height);
        rows.process(data);
        let mut t = transpose(data, self.width, self.height);
        cols.process(&mut t);
        let back = transpose(&t, self.height, self.width);
        data.copy_from_slice(&back);
    }
}

fn transpose(data: &[Complex64], width: usize, height: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for y in 0..height {
        for x in 0..width {
            out[x * height + y] = data[y * width + x];
        }
    }
    out
}

/// Signed frequency (cycles per pixel) of FFT bin `k` out of `n`.
pub(crate) fn bin_frequency(k: usize, n: usize) -> f64 {
    if k <= (n - 1) / 2 {
        k as f64 / n as f64
    } else {
        (k as f64 - n as f64) / n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_odd_size() {
        let (w, h) = (9, 7);
        let original: Vec<Complex64> = (0..w * h)
            .map(|i| Complex64::new((i * 31 % 17) as f64, 0.0))
            .collect();
        let mut data = original.clone();
        let fft = Fft2::new(w, h);
        fft.forward(&mut data);
        assert!((data[0].re - original.iter().map(|c| c.re).sum::<f64>()).abs() < 1e-9);
        fft.inverse(&mut data);
        for (a, b) in data.iter().zip(&original) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn bin_frequencies() {
        assert_eq!(bin_frequency(0, 8), 0.0);
        assert_eq!(bin_frequency(3, 8), 0.375);
        assert_eq!(bin_frequency(4, 8), -0.5);
        assert_eq!(bin_frequency(4, 7), -3.0 / 7.0);
    }
}
