//! Raster containers and the luminance math shared by every metric.
//!
//! HDR samples are linear radiance stored as `f64`; LDR samples are display
//! codes stored as `u8`. Both are interleaved RGB and immutable once built.

use crate::error::{Error, Result};

pub const LUMA_R: f64 = 0.299;
pub const LUMA_G: f64 = 0.587;
pub const LUMA_B: f64 = 0.114;

/// Upper end of the LDR code range.
pub const LDR_MAX: f64 = 255.0;

/// Weighted RGB-to-Y sum. Green and blue are added first so that equal
/// channels reproduce their common value exactly.
#[inline]
pub fn luma(r: f64, g: f64, b: f64) -> f64 {
    LUMA_R * r + (LUMA_G * g + LUMA_B * b)
}

/// Common read access to interleaved RGB rasters.
pub trait RgbRaster {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    /// Sample `c` (0 = R, 1 = G, 2 = B) of pixel `i` in row-major order.
    fn sample(&self, i: usize, c: usize) -> f64;

    fn dims(&self) -> (usize, usize) {
        (self.width(), self.height())
    }
}

fn check_dims(width: usize, height: usize, len: usize, per_pixel: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidImage(format!(
            "empty raster {width}x{height}"
        )));
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(per_pixel))
        .ok_or_else(|| Error::InvalidImage("raster size overflows".into()))?;
    if expected != len {
        return Err(Error::InvalidImage(format!(
            "expected {expected} samples for {width}x{height}, got {len}"
        )));
    }
    Ok(())
}

/// Linear-light RGB reference image.
#[derive(Debug, Clone, PartialEq)]
pub struct HdrImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl HdrImage {
    /// Builds an image from interleaved RGB samples, which must be finite and
    /// nonnegative.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len(), 3)?;
        if let Some(index) = data.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(HdrImage {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn channel(&self, c: usize) -> Plane {
        channel_plane(self, c)
    }
}

impl RgbRaster for HdrImage {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn sample(&self, i: usize, c: usize) -> f64 {
        self.data[i * 3 + c]
    }
}

/// 8-bit RGB candidate image; dynamic range 255 by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdrImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl LdrImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len(), 3)?;
        Ok(LdrImage {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn channel(&self, c: usize) -> Plane {
        channel_plane(self, c)
    }

    /// Applies `f` to every sample.
    pub fn map_samples(&self, f: impl Fn(u8) -> u8) -> LdrImage {
        LdrImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl RgbRaster for LdrImage {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn sample(&self, i: usize, c: usize) -> f64 {
        f64::from(self.data[i * 3 + c])
    }
}

/// Single-channel real raster: luminance, one color channel, or a working
/// plane such as a gradient-ascent iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

/// Y plane produced by [`luminance`].
pub type LuminancePlane = Plane;

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len(), 1)?;
        Ok(Plane {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Replaces the samples, keeping the dimensions.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Plane> {
        Plane::new(self.width, self.height, data)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn flip_horizontal(&self) -> Plane {
        let mut data = Vec::with_capacity(self.data.len());
        for row in self.data.chunks_exact(self.width) {
            data.extend(row.iter().rev());
        }
        Plane {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

fn channel_plane<I: RgbRaster>(img: &I, c: usize) -> Plane {
    let n = img.width() * img.height();
    Plane {
        width: img.width(),
        height: img.height(),
        data: (0..n).map(|i| img.sample(i, c)).collect(),
    }
}

pub(crate) fn ensure_same_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(Error::mismatch(a, b));
    }
    Ok(())
}

/// Per-pixel `Y = 0.299 R + 0.587 G + 0.114 B`.
pub fn luminance<I: RgbRaster>(img: &I) -> LuminancePlane {
    let n = img.width() * img.height();
    Plane {
        width: img.width(),
        height: img.height(),
        data: (0..n)
            .map(|i| luma(img.sample(i, 0), img.sample(i, 1), img.sample(i, 2)))
            .collect(),
    }
}

/// LDR luminance as `f64`, always within `[0, 255]`.
pub fn to_grayscale_f64(img: &LdrImage) -> LuminancePlane {
    luminance(img)
}

/// Maps `[min, max]` of the plane affinely onto `[0, 255]`.
///
/// Fails with [`Error::ConstantImage`] when the plane holds a single value.
pub fn normalize_hdr_luminance(plane: &Plane) -> Result<Plane> {
    let (lo, hi) = plane.min_max();
    if hi <= lo {
        return Err(Error::ConstantImage);
    }
    let span = hi - lo;
    Ok(plane.map(|v| ((v - lo) / span * LDR_MAX).clamp(0.0, LDR_MAX)))
}

/// How HDR luminance is brought into the LDR code range before comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RangeAlignment {
    /// Affine map of `[min, max]` to `[0, 255]`.
    #[default]
    Linear,
    /// `log(1 + v)` followed by the affine map.
    Log,
}

impl RangeAlignment {
    /// Aligns `plane`; a constant plane becomes all zeros.
    pub fn align(self, plane: &Plane) -> Plane {
        let src = match self {
            RangeAlignment::Linear => plane.clone(),
            RangeAlignment::Log => plane.map(|v| v.max(0.0).ln_1p()),
        };
        normalize_hdr_luminance(&src).unwrap_or_else(|_| src.map(|_| 0.0))
    }
}
