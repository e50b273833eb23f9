//! Structural fidelity between a (range-aligned) HDR luminance plane and an
//! LDR luminance plane.
//!
//! Each Gaussian-weighted window contributes
//!
//! ```text
//! S_local = (2 ŝx ŝy + C1) / (ŝx² + ŝy² + C1) * (σxy + C2) / (σx σy + C2)
//! ```
//!
//! where `ŝ = Φ((σ − τ) / θ)` maps a raw local standard deviation to a
//! visibility probability. The score is the plain mean over all windows that
//! fit inside the image (no padding).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{ensure_same_dims, Plane, LDR_MAX};
use crate::math::{normal_cdf, normal_pdf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityParams {
    /// Odd window side in pixels.
    pub window_size: usize,
    /// Standard deviation of the Gaussian window weights.
    pub window_std: f64,
    pub c1: f64,
    pub c2: f64,
    /// Local std (in code values) at which the mapped std reaches 0.5.
    pub sigma_map_tau: f64,
    /// Spread of the mapping.
    pub sigma_map_theta: f64,
}

impl Default for FidelityParams {
    fn default() -> Self {
        FidelityParams {
            window_size: 11,
            window_std: 1.5,
            c1: 0.01,
            c2: 10.0,
            sigma_map_tau: 2.0,
            sigma_map_theta: 2.0 / 3.0,
        }
    }
}

impl FidelityParams {
    /// Sets `tau` and keeps the default `theta = tau / 3` relation.
    pub fn with_tau(mut self, tau: f64) -> Self {
        self.sigma_map_tau = tau;
        self.sigma_map_theta = tau / 3.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.window_size < 3 || self.window_size.is_multiple_of(2) {
            return bad(format!(
                "window_size must be odd and >= 3, got {}",
                self.window_size
            ));
        }
        if !(self.window_std > 0.0 && self.window_std.is_finite()) {
            return bad(format!(
                "window_std must be positive, got {}",
                self.window_std
            ));
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return bad(format!(
                "C1 and C2 must be positive, got {} and {}",
                self.c1, self.c2
            ));
        }
        if !(self.sigma_map_theta > 0.0 && self.sigma_map_tau.is_finite()) {
            return bad(format!(
                "sigma map needs finite tau and theta > 0, got {} and {}",
                self.sigma_map_tau, self.sigma_map_theta
            ));
        }
        Ok(())
    }

    /// Normalized 2-D Gaussian weights, row-major, `window_size²` entries.
    pub fn window_weights(&self) -> Vec<f64> {
        let n = self.window_size;
        let c = (n / 2) as f64;
        let g: Vec<f64> = (0..n)
            .map(|i| {
                let d = i as f64 - c;
                (-d * d / (2.0 * self.window_std * self.window_std)).exp()
            })
            .collect();
        let mut w: Vec<f64> = (0..n * n).map(|k| g[k / n] * g[k % n]).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        w
    }
}

/// Maps a raw local standard deviation into `(0, 1)`.
pub fn mapped_local_std(sigma: f64, params: &FidelityParams) -> f64 {
    normal_cdf((sigma - params.sigma_map_tau) / params.sigma_map_theta)
}

fn mapped_local_std_derivative(sigma: f64, params: &FidelityParams) -> f64 {
    normal_pdf((sigma - params.sigma_map_tau) / params.sigma_map_theta) / params.sigma_map_theta
}

/// Weighted second-order statistics of one window pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub cov: f64,
}

impl WindowStats {
    /// Two-pass weighted statistics; `weights` must sum to one.
    pub fn compute(xs: &[f64], ys: &[f64], weights: &[f64]) -> Self {
        let mut mean_x = 0.0;
        let mut mean_y = 0.0;
        for ((&x, &y), &w) in xs.iter().zip(ys).zip(weights) {
            mean_x += w * x;
            mean_y += w * y;
        }
        let (mut var_x, mut var_y, mut cov) = (0.0, 0.0, 0.0);
        for ((&x, &y), &w) in xs.iter().zip(ys).zip(weights) {
            let dx = x - mean_x;
            let dy = y - mean_y;
            var_x += w * (dx * dx);
            var_y += w * (dy * dy);
            cov += w * (dx * dy);
        }
        WindowStats {
            mean_x,
            mean_y,
            var_x,
            var_y,
            cov,
        }
    }

    pub fn s_local(&self, params: &FidelityParams) -> f64 {
        let sx = self.var_x.max(0.0).sqrt();
        let sy = self.var_y.max(0.0).sqrt();
        let mx = mapped_local_std(sx, params);
        let my = mapped_local_std(sy, params);
        let visibility = (2.0 * (mx * my) + params.c1) / (mx * mx + my * my + params.c1);
        // sqrt(v * v) == v exactly, so identical windows give exactly 1
        let sxsy = (self.var_x.max(0.0) * self.var_y.max(0.0)).sqrt();
        let structure = (self.cov + params.c2) / (sxsy + params.c2);
        visibility * structure
    }

    /// Statistics after adding `h` to the candidate sample at a position with
    /// weight `w` and values `(x, y)`.
    fn perturbed(&self, w: f64, x: f64, y: f64, h: f64) -> Self {
        WindowStats {
            mean_y: self.mean_y + w * h,
            var_y: self.var_y + 2.0 * w * h * (y - self.mean_y) + w * h * h * (1.0 - w),
            cov: self.cov + w * h * (x - self.mean_x),
            ..*self
        }
    }

    /// `(∂S/∂var_y, ∂S/∂cov)`.
    fn s_local_partials(&self, params: &FidelityParams) -> (f64, f64) {
        let sx = self.var_x.max(0.0).sqrt();
        let sy = self.var_y.max(0.0).sqrt();
        let mx = mapped_local_std(sx, params);
        let my = mapped_local_std(sy, params);
        let num = 2.0 * mx * my + params.c1;
        let den = mx * mx + my * my + params.c1;
        let visibility = num / den;
        let sden = sx * sy + params.c2;
        let structure = (self.cov + params.c2) / sden;

        let d_cov = visibility / sden;
        if sy <= f64::EPSILON {
            return (0.0, d_cov);
        }
        let d_vis_d_my = (2.0 * mx * den - num * 2.0 * my) / (den * den);
        let d_my_d_sy = mapped_local_std_derivative(sy, params);
        let d_struct_d_sy = -(self.cov + params.c2) * sx / (sden * sden);
        let d_s_d_sy = d_vis_d_my * d_my_d_sy * structure + visibility * d_struct_d_sy;
        (d_s_d_sy / (2.0 * sy), d_cov)
    }
}

/// Local fidelity of one window pair. Both patches are `window_size²`
/// samples in row-major order.
pub fn s_local(patch_x: &[f64], patch_y: &[f64], params: &FidelityParams) -> Result<f64> {
    params.validate()?;
    let n = params.window_size * params.window_size;
    if patch_x.len() != n || patch_y.len() != n {
        return Err(Error::InvalidParams(format!(
            "patches must hold {n} samples, got {} and {}",
            patch_x.len(),
            patch_y.len()
        )));
    }
    Ok(WindowStats::compute(patch_x, patch_y, &params.window_weights()).s_local(params))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityResult {
    /// Mean of the quality map.
    pub s: f64,
    /// One `S_local` per valid window position.
    pub quality_map: Plane,
}

impl FidelityResult {
    /// The exported fidelity component, `S` clamped to `[0, 1]`.
    pub fn component(&self) -> f64 {
        self.s.clamp(0.0, 1.0)
    }
}

struct WindowGrid {
    cols: usize,
    rows: usize,
    stats: Vec<WindowStats>,
}

fn window_grid(x: &Plane, y: &Plane, params: &FidelityParams) -> Result<WindowGrid> {
    params.validate()?;
    ensure_same_dims(x.dims(), y.dims())?;
    let n = params.window_size;
    let (width, height) = x.dims();
    if width < n || height < n {
        return Err(Error::ImageTooSmall {
            width,
            height,
            min: n,
        });
    }
    let cols = width - n + 1;
    let rows = height - n + 1;
    let weights = params.window_weights();
    let stats = (0..rows)
        .into_par_iter()
        .flat_map_iter(|wy| {
            let weights = &weights;
            let mut px = vec![0.0; n * n];
            let mut py = vec![0.0; n * n];
            (0..cols)
                .map(move |wx| {
                    for j in 0..n {
                        let row = (wy + j) * width + wx;
                        px[j * n..(j + 1) * n].copy_from_slice(&x.data()[row..row + n]);
                        py[j * n..(j + 1) * n].copy_from_slice(&y.data()[row..row + n]);
                    }
                    WindowStats::compute(&px, &py, weights)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(WindowGrid { cols, rows, stats })
}

/// Dense stride-1 sliding-window fidelity over the valid region.
pub fn structural_fidelity(
    x: &Plane,
    y: &Plane,
    params: &FidelityParams,
) -> Result<FidelityResult> {
    let grid = window_grid(x, y, params)?;
    let map: Vec<f64> = grid.stats.par_iter().map(|s| s.s_local(params)).collect();
    // ordered sequential reduction keeps the score independent of thread count
    let s = map.iter().sum::<f64>() / map.len() as f64;
    Ok(FidelityResult {
        s,
        quality_map: Plane::new(grid.cols, grid.rows, map)?,
    })
}

/// How the gradient of `S` with respect to the candidate plane is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradientMethod {
    /// Central differences with step [`FD_STEP`] per pixel.
    #[default]
    FiniteDifference,
    /// Closed-form chain rule through the window statistics.
    Analytic,
}

/// Finite-difference step in code values.
pub const FD_STEP: f64 = 0.05;

/// Gradient of `S(x, y)` with respect to every sample of `y`.
pub fn fidelity_gradient(
    x: &Plane,
    y: &Plane,
    params: &FidelityParams,
    method: GradientMethod,
) -> Result<Plane> {
    let grid = window_grid(x, y, params)?;
    let n = params.window_size;
    let weights = params.window_weights();
    let (width, height) = x.dims();
    let inv_m = 1.0 / grid.stats.len() as f64;

    let grad: Vec<f64> = match method {
        GradientMethod::FiniteDifference => (0..width * height)
            .into_par_iter()
            .map(|p| {
                let (px, py) = (p % width, p / width);
                let xv = x.data()[p];
                let yv = y.data()[p];
                let mut delta = 0.0;
                for wy in py.saturating_sub(n - 1)..=py.min(grid.rows - 1) {
                    for wx in px.saturating_sub(n - 1)..=px.min(grid.cols - 1) {
                        let w = weights[(py - wy) * n + (px - wx)];
                        let st = &grid.stats[wy * grid.cols + wx];
                        let plus = st.perturbed(w, xv, yv, FD_STEP).s_local(params);
                        let minus = st.perturbed(w, xv, yv, -FD_STEP).s_local(params);
                        delta += plus - minus;
                    }
                }
                delta * inv_m / (2.0 * FD_STEP)
            })
            .collect(),
        GradientMethod::Analytic => {
            let partials: Vec<(f64, f64)> = grid
                .stats
                .par_iter()
                .map(|s| s.s_local_partials(params))
                .collect();
            (0..width * height)
                .into_par_iter()
                .map(|p| {
                    let (px, py) = (p % width, p / width);
                    let xv = x.data()[p];
                    let yv = y.data()[p];
                    let mut g = 0.0;
                    for wy in py.saturating_sub(n - 1)..=py.min(grid.rows - 1) {
                        for wx in px.saturating_sub(n - 1)..=px.min(grid.cols - 1) {
                            let w = weights[(py - wy) * n + (px - wx)];
                            let k = wy * grid.cols + wx;
                            let st = &grid.stats[k];
                            let (d_var, d_cov) = partials[k];
                            g += w * (2.0 * (yv - st.mean_y) * d_var + (xv - st.mean_x) * d_cov);
                        }
                    }
                    g * inv_m
                })
                .collect()
        }
    };
    y.with_data(grad)
}

/// One gradient-ascent update `y + λ ∇_y S(x, y)`, clamped to `[0, 255]`.
pub fn fidelity_ascent_step(
    x: &Plane,
    y: &Plane,
    lambda: f64,
    params: &FidelityParams,
    method: GradientMethod,
) -> Result<Plane> {
    ensure_same_dims(x.dims(), y.dims())?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    if lambda == 0.0 {
        return Ok(y.clone());
    }
    let grad = fidelity_gradient(x, y, params, method)?;
    let data = y
        .data()
        .iter()
        .zip(grad.data())
        .map(|(&v, &g)| (v + lambda * g).clamp(0.0, LDR_MAX))
        .collect();
    y.with_data(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> FidelityParams {
        FidelityParams::default()
    }

    #[test]
    fn mapped_std_examples() {
        let p = params();
        assert_eq!(mapped_local_std(2.0, &p), 0.5);
        assert!((mapped_local_std(0.0, &p) - 0.001_349_898_031_630_093_3).abs() < 1e-15);
        assert_eq!(mapped_local_std(1e6, &p), 1.0);
    }

    #[test]
    fn weights_normalized_and_symmetric() {
        let w = params().window_weights();
        assert_eq!(w.len(), 121);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(w[0], w[120]);
        assert_eq!(w[10], w[110]);
    }

    #[test]
    fn s_local_examples() {
        let p = params();
        let patch: Vec<f64> = (0..121).map(|i| ((i * 37) % 101) as f64).collect();
        assert_eq!(s_local(&patch, &patch, &p).unwrap(), 1.0);
        let flat = vec![42.0; 121];
        assert_eq!(s_local(&flat, &vec![200.0; 121], &p).unwrap(), 1.0);
    }

    #[test]
    fn s_local_negated_patch() {
        // visibility factor is 1 (equal stds); structure factor (−σ² + C2)/(σ² + C2)
        let st = WindowStats {
            mean_x: 0.0,
            mean_y: 0.0,
            var_x: 100.0,
            var_y: 100.0,
            cov: -100.0,
        };
        let expected = (-100.0 + 10.0) / (100.0 + 10.0);
        assert!((st.s_local(&params()) - expected).abs() < 1e-15);
        assert!((expected - (-0.818_181_818_181_818_2)).abs() < 1e-12);
    }

    #[test]
    fn s_local_rejects_wrong_length() {
        assert!(s_local(&[0.0; 10], &[0.0; 10], &params()).is_err());
    }

    fn ramp(w: usize, h: usize, slope: f64) -> Plane {
        Plane::from_fn(w, h, |x, y| slope * x as f64 + 0.5 * y as f64).unwrap()
    }

    #[test]
    fn shifted_ramp_scores_one() {
        let x = ramp(32, 24, 6.0);
        let y = x.map(|v| v + 17.0);
        let r = structural_fidelity(&x, &y, &params()).unwrap();
        assert!((r.s - 1.0).abs() < 1e-6);
        assert_eq!(r.quality_map.dims(), (22, 14));
    }

    #[test]
    fn constant_candidate_scores_low() {
        let x = ramp(32, 32, 6.0);
        let reference = structural_fidelity(&x, &x.map(|v| v + 3.0), &params())
            .unwrap()
            .s;
        let flat = Plane::filled(32, 32, 128.0).unwrap();
        let s = structural_fidelity(&x, &flat, &params()).unwrap().s;
        assert!(s < 0.9 * reference, "{s} vs {reference}");
    }

    #[test]
    fn single_window() {
        let x = Plane::from_fn(11, 11, |i, j| (i * j) as f64).unwrap();
        let y = Plane::from_fn(11, 11, |i, j| (i + 2 * j) as f64).unwrap();
        let r = structural_fidelity(&x, &y, &params()).unwrap();
        assert_eq!(r.quality_map.data().len(), 1);
        assert_eq!(r.s, r.quality_map.data()[0]);
    }

    #[test]
    fn errors() {
        let a = Plane::filled(20, 20, 1.0).unwrap();
        let b = Plane::filled(21, 20, 1.0).unwrap();
        assert!(matches!(
            structural_fidelity(&a, &b, &params()),
            Err(Error::DimensionMismatch { .. })
        ));
        let small = Plane::filled(10, 30, 1.0).unwrap();
        assert!(matches!(
            structural_fidelity(&small, &small, &params()),
            Err(Error::ImageTooSmall { .. })
        ));
        let even = FidelityParams {
            window_size: 10,
            ..params()
        };
        assert!(even.validate().is_err());
        let zero_c = FidelityParams {
            c2: 0.0,
            ..params()
        };
        assert!(zero_c.validate().is_err());
        assert!(matches!(
            fidelity_ascent_step(&a, &b, 1.0, &params(), GradientMethod::Analytic),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_lambda_is_identity() {
        let x = ramp(16, 16, 3.0);
        let y = x.map(|v| (v * 0.7).sin() * 40.0 + 100.0);
        let out =
            fidelity_ascent_step(&x, &y, 0.0, &params(), GradientMethod::FiniteDifference).unwrap();
        assert_eq!(out, y);
    }

    #[test]
    fn perturbed_stats_match_recomputation() {
        let p = params();
        let w = p.window_weights();
        let xs: Vec<f64> = (0..121).map(|i| ((i * 13) % 29) as f64 * 3.0).collect();
        let mut ys: Vec<f64> = (0..121).map(|i| ((i * 7) % 31) as f64 * 2.0).collect();
        let base = WindowStats::compute(&xs, &ys, &w);
        let k = 47;
        let fast = base.perturbed(w[k], xs[k], ys[k], 0.3);
        ys[k] += 0.3;
        let slow = WindowStats::compute(&xs, &ys, &w);
        assert!((fast.var_y - slow.var_y).abs() < 1e-9);
        assert!((fast.cov - slow.cov).abs() < 1e-9);
        assert!((fast.mean_y - slow.mean_y).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn quality_map_bounded_and_flip_symmetric(seed: u64) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let x = Plane::from_fn(20, 17, |_, _| rng.random_range(0.0..255.0)).unwrap();
            let y = Plane::from_fn(20, 17, |_, _| rng.random_range(0.0..255.0)).unwrap();
            let r = structural_fidelity(&x, &y, &params()).unwrap();
            prop_assert!(r.quality_map.data().iter().all(|v| (-1.0..=1.0).contains(v)));
            let flipped = structural_fidelity(&x.flip_horizontal(), &y.flip_horizontal(), &params()).unwrap();
            prop_assert!((r.s - flipped.s).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&r.component()));
        }

        #[test]
        fn mapped_std_increasing(a in 0.0f64..4.0, d in 0.01f64..3.0) {
            let p = params();
            let lo = mapped_local_std(a, &p);
            let hi = mapped_local_std(a + d, &p);
            prop_assert!(hi > lo && lo > 0.0 && hi <= 1.0);
        }
    }
}
