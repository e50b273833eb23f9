//! Statistical naturalness of the LDR image from its global brightness and
//! contrast, each scored by a Gaussian CDF reflected about a switch point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Plane;
use crate::math::{mean_std, normal_cdf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaturalnessParams {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
    /// Reference mean; the reflected brightness branch uses `2 mu_r - mu`.
    pub mu_r: f64,
    /// Reference contrast; the reflected contrast branch uses `2 sigma_r - sigma`.
    pub sigma_r: f64,
    /// Brightness branch switch point.
    pub mu_e: f64,
    /// Contrast branch switch point.
    pub sigma_e: f64,
}

impl Default for NaturalnessParams {
    fn default() -> Self {
        Self::centered(116.0, 64.0)
    }
}

impl NaturalnessParams {
    /// Thresholds and switch points all placed at `(mu_r, sigma_r)` with the
    /// default spreads.
    pub fn centered(mu_r: f64, sigma_r: f64) -> Self {
        NaturalnessParams {
            t1: mu_r,
            t2: mu_r,
            t3: sigma_r,
            t4: sigma_r,
            theta1: 28.0,
            theta2: 28.0,
            theta3: 13.0,
            theta4: 13.0,
            mu_r,
            sigma_r,
            mu_e: mu_r,
            sigma_e: sigma_r,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let thetas = [self.theta1, self.theta2, self.theta3, self.theta4];
        if thetas.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidParams(format!(
                "theta values must be positive, got {thetas:?}"
            )));
        }
        let k = self.normalizer();
        if k.is_nan() || k <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "normalizer K must be positive, got {k}"
            )));
        }
        Ok(())
    }

    /// `K = Pm(mu_r) * Pd(sigma_r)`, the score of the reference statistics.
    pub fn normalizer(&self) -> f64 {
        pm(self.mu_r, self) * pd(self.sigma_r, self)
    }
}

/// Brightness likelihood of a global mean.
pub fn pm(mu: f64, p: &NaturalnessParams) -> f64 {
    if mu <= p.mu_e {
        normal_cdf((mu - p.t1) / p.theta1)
    } else {
        normal_cdf((2.0 * p.mu_r - mu - p.t2) / p.theta2)
    }
}

/// Contrast likelihood of a global standard deviation.
pub fn pd(sigma: f64, p: &NaturalnessParams) -> f64 {
    if sigma <= p.sigma_e {
        normal_cdf((sigma - p.t3) / p.theta3)
    } else {
        normal_cdf((2.0 * p.sigma_r - sigma - p.t4) / p.theta4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaturalnessResult {
    pub n: f64,
    pub pm: f64,
    pub pd: f64,
    pub mu: f64,
    pub sigma: f64,
}

/// `N = Pm(mu) Pd(sigma) / K` over the population mean and std of `y`,
/// clamped to `[0, 1]`.
pub fn statistical_naturalness(y: &Plane, params: &NaturalnessParams) -> Result<NaturalnessResult> {
    params.validate()?;
    let (mu, sigma) = mean_std(y.data());
    let pm = pm(mu, params);
    let pd = pd(sigma, params);
    let n = (pm * pd / params.normalizer()).clamp(0.0, 1.0);
    Ok(NaturalnessResult {
        n,
        pm,
        pd,
        mu,
        sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> NaturalnessParams {
        NaturalnessParams::default()
    }

    #[test]
    fn pm_examples() {
        let p = p();
        assert_eq!(pm(p.t1, &p), 0.5);
        assert_eq!(pm(2.0 * p.mu_r - p.t2, &p), 0.5);
        assert!((pm(p.mu_r - 10.0, &p) - pm(p.mu_r + 10.0, &p)).abs() < 1e-12);
    }

    #[test]
    fn pd_examples() {
        let p = p();
        assert_eq!(pd(p.t3, &p), 0.5);
        assert!((pd(0.0, &p) - 4.259_697_227_808_277e-7).abs() < 1e-18);
        let eps = 1e-9;
        assert_eq!(pd(p.sigma_r, &p), 0.5);
        assert!((pd(p.sigma_r + eps, &p) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn default_normalizer() {
        assert_eq!(p().normalizer(), 0.25);
    }

    #[test]
    fn uniform_image() {
        let y = Plane::filled(16, 16, 116.0).unwrap();
        let r = statistical_naturalness(&y, &p()).unwrap();
        assert_eq!(r.pm, 0.5);
        assert_eq!(r.sigma, 0.0);
        assert!((r.n - 8.519_394_455_616_555e-7).abs() < 1e-18);
    }

    #[test]
    fn two_level_image_is_maximal() {
        let y =
            Plane::from_fn(16, 16, |x, yy| if (x + yy) % 2 == 0 { 52.0 } else { 180.0 }).unwrap();
        let r = statistical_naturalness(&y, &p()).unwrap();
        assert!((r.mu - 116.0).abs() < 1e-12 && (r.sigma - 64.0).abs() < 1e-12);
        assert!((r.n - 1.0).abs() < 1e-9);
    }

    #[test]
    fn black_image_is_unnatural() {
        let y = Plane::filled(8, 8, 0.0).unwrap();
        assert!(statistical_naturalness(&y, &p()).unwrap().n < 1e-6);
    }

    #[test]
    fn invalid_theta() {
        let bad = NaturalnessParams { theta3: 0.0, ..p() };
        assert!(bad.validate().is_err());
    }
}
