//! Locally weighted mean phase angle (LWMPA) maps and the phase-similarity
//! component.
//!
//! Per pixel, `ph = atan2(E, O)` where `E` is the sum of even log-Gabor
//! responses over all scales and orientations and `O` the magnitude of the
//! orientation-weighted odd response vector. Bright lines sit at `+π/2`,
//! dark lines at `−π/2`, and step edges at `0`.

mod bank;
mod fft;

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use bank::{
    angular_weight, log_gabor_bank, radial_transfer, FilterBankParams, LogGaborBank, MIN_BANK_SIZE,
};

use crate::error::Result;
use crate::image::{ensure_same_dims, luma, HdrImage, LdrImage, Plane, RangeAlignment, RgbRaster};

/// How two phase maps are turned into a similarity in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseComparison {
    /// Fraction of pixels whose phase signs agree (`0` only matches `0`).
    #[default]
    SignAgreement,
    /// Mean of `(1 + cos(ph_a − ph_b)) / 2`.
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseParams {
    pub bank: FilterBankParams,
    /// Weight of the `log(1 + v)`-aligned HDR channel in the reference plane;
    /// the linearly aligned channel gets the rest.
    pub hdr_log_weight: f64,
    pub comparison: PhaseComparison,
    /// Even sums and odd magnitudes below this fraction of the plane's peak
    /// response are treated as zero.
    pub zero_tolerance: f64,
}

impl Default for PhaseParams {
    fn default() -> Self {
        PhaseParams {
            bank: FilterBankParams::default(),
            hdr_log_weight: 0.5,
            comparison: PhaseComparison::SignAgreement,
            zero_tolerance: 1e-9,
        }
    }
}

impl PhaseParams {
    pub fn validate(&self) -> Result<()> {
        self.bank.validate()?;
        if !(0.0..=1.0).contains(&self.hdr_log_weight) || !(0.0..1.0).contains(&self.zero_tolerance)
        {
            return Err(crate::Error::InvalidParams(format!(
                "hdr_log_weight must be in [0, 1] and zero_tolerance in [0, 1), got {} and {}",
                self.hdr_log_weight, self.zero_tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMap {
    width: usize,
    height: usize,
    ph: Vec<f64>,
}

impl PhaseMap {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.ph
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.ph[y * self.width + x]
    }

    /// `-1` dark feature, `0` step or flat, `+1` bright feature.
    pub fn signs(&self) -> Vec<i8> {
        self.ph.iter().map(|&v| sign(v)).collect()
    }

    /// 8-bit rendering with `[−π/2, π/2]` mapped linearly onto `[0, 255]`.
    pub fn to_gray8(&self) -> Vec<u8> {
        self.ph
            .iter()
            .map(|&v| {
                ((v + FRAC_PI_2) / std::f64::consts::PI * 255.0)
                    .round()
                    .clamp(0.0, 255.0) as u8
            })
            .collect()
    }
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Even-response sum and odd-response magnitude per pixel.
pub fn quadrature_energy(plane: &Plane, params: &FilterBankParams) -> Result<(Vec<f64>, Vec<f64>)> {
    let (width, height) = plane.dims();
    let bank = log_gabor_bank(width, height, params)?;
    // every filter rejects DC; removing the mean first makes flat planes exactly zero
    let mean = plane.data().iter().sum::<f64>() / plane.data().len() as f64;
    let mut spectrum: Vec<Complex64> = plane
        .data()
        .iter()
        .map(|&v| Complex64::new(v - mean, 0.0))
        .collect();
    bank.fft.forward(&mut spectrum);

    let n = width * height;
    let per_orientation: Vec<(Vec<f64>, Vec<f64>)> = (0..params.n_orientations)
        .into_par_iter()
        .map(|o| {
            let angular = bank.angular(o);
            let mut even = vec![0.0; n];
            let mut odd = vec![0.0; n];
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            for s in 0..params.n_scales {
                let radial = bank.radial(s);
                for i in 0..n {
                    buf[i] = spectrum[i] * (radial[i] * angular[i]);
                }
                bank.fft.inverse(&mut buf);
                for i in 0..n {
                    even[i] += buf[i].re;
                    odd[i] += buf[i].im;
                }
            }
            (even, odd)
        })
        .collect();

    let mut even = vec![0.0; n];
    let mut odd_x = vec![0.0; n];
    let mut odd_y = vec![0.0; n];
    for (o, (e, od)) in per_orientation.iter().enumerate() {
        let angle = params.orientation_angle(o);
        let (sin, cos) = angle.sin_cos();
        for i in 0..n {
            even[i] += e[i];
            odd_x[i] += od[i] * cos;
            odd_y[i] += od[i] * sin;
        }
    }
    let odd = odd_x.iter().zip(&odd_y).map(|(x, y)| x.hypot(*y)).collect();
    Ok((even, odd))
}

/// Locally weighted mean phase angle of a plane, in `[−π/2, π/2]`.
pub fn lwmpa(plane: &Plane, params: &PhaseParams) -> Result<PhaseMap> {
    params.validate()?;
    let (mut even, mut odd) = quadrature_energy(plane, &params.bank)?;
    let peak = even
        .iter()
        .zip(&odd)
        .fold(0.0f64, |m, (e, o)| m.max(e.hypot(*o)));
    let floor = peak * params.zero_tolerance;
    for v in even.iter_mut().chain(odd.iter_mut()) {
        if v.abs() <= floor {
            *v = 0.0;
        }
    }
    let ph = even.iter().zip(&odd).map(|(&e, &o)| e.atan2(o)).collect();
    Ok(PhaseMap {
        width: plane.width(),
        height: plane.height(),
        ph,
    })
}

/// Compares two phase maps of equal size.
pub fn compare_phase(a: &PhaseMap, b: &PhaseMap, how: PhaseComparison) -> Result<f64> {
    ensure_same_dims(a.dims(), b.dims())?;
    let n = a.ph.len() as f64;
    let score = match how {
        PhaseComparison::SignAgreement => {
            a.ph.iter()
                .zip(&b.ph)
                .filter(|(x, y)| sign(**x) == sign(**y))
                .count() as f64
                / n
        }
        PhaseComparison::Cosine => {
            a.ph.iter()
                .zip(&b.ph)
                .map(|(x, y)| 0.5 * (1.0 + (x - y).cos()))
                .sum::<f64>()
                / n
        }
    };
    Ok(score.clamp(0.0, 1.0))
}

/// Reference plane for one HDR channel: a blend of its linear and
/// log-compressed range alignments.
pub fn hdr_reference_plane(channel: &Plane, params: &PhaseParams) -> Plane {
    let w = params.hdr_log_weight;
    let lin = RangeAlignment::Linear.align(channel);
    let log = RangeAlignment::Log.align(channel);
    let data = lin
        .data()
        .iter()
        .zip(log.data())
        .map(|(a, b)| (1.0 - w) * a + w * b)
        .collect();
    lin.with_data(data).expect("same dimensions")
}

/// Similarity of one HDR channel and the matching LDR channel.
pub fn channel_phase_similarity(
    hdr_chan: &Plane,
    ldr_chan: &Plane,
    params: &PhaseParams,
) -> Result<f64> {
    ensure_same_dims(hdr_chan.dims(), ldr_chan.dims())?;
    let reference = lwmpa(&hdr_reference_plane(hdr_chan, params), params)?;
    let candidate = lwmpa(ldr_chan, params)?;
    compare_phase(&reference, &candidate, params.comparison)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseScore {
    pub q_r: f64,
    pub q_g: f64,
    pub q_b: f64,
    /// Luminance-weighted fusion of the channel scores.
    pub l: f64,
}

impl PhaseScore {
    pub fn from_channels(q_r: f64, q_g: f64, q_b: f64) -> Self {
        PhaseScore {
            q_r,
            q_g,
            q_b,
            l: luma(q_r, q_g, q_b).clamp(0.0, 1.0),
        }
    }
}

/// Per-channel phase similarity fused with the RGB-to-Y weights.
pub fn phase_component(hdr: &HdrImage, ldr: &LdrImage, params: &PhaseParams) -> Result<PhaseScore> {
    ensure_same_dims(hdr.dims(), ldr.dims())?;
    params.validate()?;
    let q: Vec<f64> = (0..3)
        .into_par_iter()
        .map(|c| channel_phase_similarity(&hdr.channel(c), &ldr.channel(c), params))
        .collect::<Result<_>>()?;
    Ok(PhaseScore::from_channels(q[0], q[1], q[2]))
}
