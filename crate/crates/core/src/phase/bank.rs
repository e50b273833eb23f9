//! Frequency-domain log-Gabor filter bank.
//!
//! Each filter is the product of a radial log-Gabor transfer and an angular
//! Gaussian around its orientation. The angular term covers one half of the
//! frequency plane, so the spatial response of a filter is complex: its real
//! part is the even (symmetric) response and its imaginary part the odd
//! (antisymmetric) one.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use super::fft::{bin_frequency, Fft2};
use crate::error::{Error, Result};

/// Smallest plane side the bank accepts.
pub const MIN_BANK_SIZE: usize = 8;

const LOWPASS_CUTOFF: f64 = 0.45;
const LOWPASS_ORDER: i32 = 15;
const CACHE_CAPACITY: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterBankParams {
    pub n_scales: usize,
    pub n_orientations: usize,
    /// Wavelength of the finest scale, in pixels.
    pub min_wavelength: f64,
    /// Wavelength ratio between successive scales.
    pub scale_multiplier: f64,
    /// Ratio of the radial Gaussian's std to the center frequency (log axis).
    pub sigma_on_f: f64,
    /// Angular Gaussian std as a multiple of the orientation spacing.
    pub angular_spread: f64,
}

impl Default for FilterBankParams {
    fn default() -> Self {
        FilterBankParams {
            n_scales: 4,
            n_orientations: 4,
            min_wavelength: 3.0,
            scale_multiplier: 2.1,
            sigma_on_f: 0.55,
            angular_spread: 1.2,
        }
    }
}

impl FilterBankParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.n_scales >= 1
            && self.n_orientations >= 1
            && self.min_wavelength >= 2.0
            && self.scale_multiplier > 1.0
            && self.sigma_on_f > 0.0
            && self.sigma_on_f < 1.0
            && self.angular_spread > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "invalid filter bank parameters {self:?}"
            )))
        }
    }

    /// Angle of orientation `o` in radians, within `[0, π)`.
    pub fn orientation_angle(&self, o: usize) -> f64 {
        o as f64 * PI / self.n_orientations as f64
    }

    pub fn angular_sigma(&self) -> f64 {
        self.angular_spread * PI / self.n_orientations as f64
    }

    pub fn center_frequency(&self, scale: usize) -> f64 {
        1.0 / (self.min_wavelength * self.scale_multiplier.powi(scale as i32))
    }

    fn key(&self) -> [u64; 6] {
        [
            self.n_scales as u64,
            self.n_orientations as u64,
            self.min_wavelength.to_bits(),
            self.scale_multiplier.to_bits(),
            self.sigma_on_f.to_bits(),
            self.angular_spread.to_bits(),
        ]
    }
}

/// Log-Gabor radial transfer at frequency `f` for center `f0`.
pub fn radial_transfer(f: f64, f0: f64, sigma_on_f: f64) -> f64 {
    if f <= 0.0 {
        return 0.0;
    }
    let l = (f / f0).ln();
    let s = sigma_on_f.ln();
    (-(l * l) / (2.0 * s * s)).exp()
}

/// Angular Gaussian weight of frequency direction `theta` for a filter
/// oriented at `angle`.
pub fn angular_weight(theta: f64, angle: f64, sigma: f64) -> f64 {
    let d = (theta - angle).sin().atan2((theta - angle).cos());
    (-(d * d) / (2.0 * sigma * sigma)).exp()
}

#[derive(Debug)]
pub struct LogGaborBank {
    width: usize,
    height: usize,
    params: FilterBankParams,
    /// `n_scales` planes of radial transfer (low-pass applied, DC zero).
    radial: Vec<Vec<f64>>,
    /// `n_orientations` planes of angular weights.
    angular: Vec<Vec<f64>>,
    pub(crate) fft: Fft2,
}

impl LogGaborBank {
    pub fn new(width: usize, height: usize, params: &FilterBankParams) -> Result<Self> {
        params.validate()?;
        if width < MIN_BANK_SIZE || height < MIN_BANK_SIZE {
            return Err(Error::ImageTooSmall {
                width,
                height,
                min: MIN_BANK_SIZE,
            });
        }
        let n = width * height;
        let mut radius = Vec::with_capacity(n);
        let mut theta = Vec::with_capacity(n);
        for v in 0..height {
            let fy = bin_frequency(v, height);
            for u in 0..width {
                let fx = bin_frequency(u, width);
                radius.push(fx.hypot(fy));
                theta.push(fy.atan2(fx));
            }
        }
        let lowpass: Vec<f64> = radius
            .iter()
            .map(|&r| 1.0 / (1.0 + (r / LOWPASS_CUTOFF).powi(2 * LOWPASS_ORDER)))
            .collect();

        let radial = (0..params.n_scales)
            .map(|s| {
                let f0 = params.center_frequency(s);
                let mut plane: Vec<f64> = radius
                    .iter()
                    .zip(&lowpass)
                    .map(|(&r, &lp)| radial_transfer(r, f0, params.sigma_on_f) * lp)
                    .collect();
                plane[0] = 0.0;
                plane
            })
            .collect();
        let sigma = params.angular_sigma();
        let angular = (0..params.n_orientations)
            .map(|o| {
                let angle = params.orientation_angle(o);
                theta
                    .iter()
                    .map(|&t| angular_weight(t, angle, sigma))
                    .collect()
            })
            .collect();

        Ok(LogGaborBank {
            width,
            height,
            params: *params,
            radial,
            angular,
            fft: Fft2::new(width, height),
        })
    }

    /// Shared bank for this size and parameter set.
    pub fn cached(width: usize, height: usize, params: &FilterBankParams) -> Result<Arc<Self>> {
        type Key = (usize, usize, [u64; 6]);
        struct Cache {
            banks: HashMap<Key, Arc<LogGaborBank>>,
            order: VecDeque<Key>,
        }
        static CACHE: OnceLock<RwLock<Cache>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| {
            RwLock::new(Cache {
                banks: HashMap::new(),
                order: VecDeque::new(),
            })
        });
        let key = (width, height, params.key());
        if let Some(bank) = cache
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .banks
            .get(&key)
        {
            return Ok(bank.clone());
        }
        let bank = Arc::new(LogGaborBank::new(width, height, params)?);
        let mut guard = cache.write().unwrap_or_else(|e| e.into_inner());
        if let Some(existing) = guard.banks.get(&key) {
            return Ok(existing.clone());
        }
        if guard.order.len() >= CACHE_CAPACITY {
            if let Some(old) = guard.order.pop_front() {
                guard.banks.remove(&old);
            }
        }
        guard.order.push_back(key);
        guard.banks.insert(key, bank.clone());
        Ok(bank)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn params(&self) -> &FilterBankParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.radial.len() * self.angular.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Transfer function of the filter at `(scale, orientation)`, laid out
    /// like the unshifted FFT of the image.
    pub fn transfer(&self, scale: usize, orientation: usize) -> Vec<f64> {
        self.radial[scale]
            .iter()
            .zip(&self.angular[orientation])
            .map(|(r, a)| r * a)
            .collect()
    }

    pub(crate) fn radial(&self, scale: usize) -> &[f64] {
        &self.radial[scale]
    }

    pub(crate) fn angular(&self, orientation: usize) -> &[f64] {
        &self.angular[orientation]
    }

    /// Sum of angular weights over all orientations at every bin.
    pub fn orientation_coverage(&self) -> Vec<f64> {
        let n = self.width * self.height;
        (0..n)
            .map(|i| self.angular.iter().map(|a| a[i]).sum())
            .collect()
    }
}

/// Builds (or fetches from the shared cache) the bank for a plane size.
pub fn log_gabor_bank(
    width: usize,
    height: usize,
    params: &FilterBankParams,
) -> Result<Arc<LogGaborBank>> {
    LogGaborBank::cached(width, height, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dc_is_zero_for_every_filter() {
        let bank = LogGaborBank::new(33, 20, &FilterBankParams::default()).unwrap();
        assert_eq!(bank.len(), 16);
        for s in 0..4 {
            for o in 0..4 {
                assert_eq!(bank.transfer(s, o)[0], 0.0);
            }
        }
    }

    #[test]
    fn radial_peak_at_center() {
        assert_eq!(radial_transfer(0.1, 0.1, 0.55), 1.0);
        assert!(radial_transfer(0.2, 0.1, 0.55) < 1.0);
        assert_eq!(radial_transfer(0.0, 0.1, 0.55), 0.0);
    }

    #[test]
    fn coverage_positive_in_annulus() {
        let p = FilterBankParams::default();
        let bank = LogGaborBank::new(64, 48, &p).unwrap();
        let cov = bank.orientation_coverage();
        let lo = p.center_frequency(p.n_scales - 1) / 2.0;
        for v in 0..48 {
            for u in 0..64 {
                let r = bin_frequency(u, 64).hypot(bin_frequency(v, 48));
                if r >= lo && r <= 0.5 {
                    assert!(cov[v * 64 + u] > 0.0);
                }
            }
        }
        assert!(cov.iter().all(|&c| c > 0.0));
    }

    #[test]
    fn rejects_small_planes() {
        assert!(matches!(
            LogGaborBank::new(7, 64, &FilterBankParams::default()),
            Err(Error::ImageTooSmall { .. })
        ));
    }

    #[test]
    fn cache_returns_shared_bank() {
        let p = FilterBankParams::default();
        let a = log_gabor_bank(40, 41, &p).unwrap();
        let b = log_gabor_bank(40, 41, &p).unwrap();
        assert_eq!(a.dims(), b.dims());
        assert_eq!(a.transfer(2, 1), b.transfer(2, 1));
    }
}
