//! Seeded synthetic HDR scenes, simple tone curves, and small analytic
//! fixtures for tests, benches and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::image::{HdrImage, LdrImage, Plane, RgbRaster};

/// A seeded scene with gradients, rectangles, thin lines and gratings over
/// roughly three decades of luminance.
pub fn synthetic_scene(seed: u64, width: usize, height: usize) -> Result<HdrImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (width as f64, height as f64);

    // log10 luminance layers
    let gx = rng.random_range(-1.0..1.0);
    let gy = rng.random_range(-1.0..1.0);
    let mut log_y = Plane::from_fn(width, height, |x, y| {
        0.5 + 1.6 * (gx * x as f64 / w + gy * y as f64 / h)
    })?
    .into_data();

    for _ in 0..rng.random_range(3..7) {
        let (x0, y0) = (rng.random_range(0.0..w), rng.random_range(0.0..h));
        let (rw, rh) = (
            rng.random_range(0.1..0.4) * w,
            rng.random_range(0.1..0.4) * h,
        );
        let delta = rng.random_range(-1.8..1.8);
        for y in 0..height {
            for x in 0..width {
                let (fx, fy) = (x as f64, y as f64);
                if fx >= x0 && fx < x0 + rw && fy >= y0 && fy < y0 + rh {
                    log_y[y * width + x] += delta;
                }
            }
        }
    }
    for _ in 0..rng.random_range(2..5) {
        let vertical = rng.random::<bool>();
        let pos = rng.random_range(0..if vertical { width } else { height });
        let delta = if rng.random::<bool>() { 0.6 } else { -0.6 };
        for i in 0..if vertical { height } else { width } {
            let idx = if vertical {
                i * width + pos
            } else {
                pos * width + i
            };
            log_y[idx] += delta;
        }
    }
    {
        let (cx, cy) = (
            rng.random_range(0.2..0.8) * w,
            rng.random_range(0.2..0.8) * h,
        );
        let radius = rng.random_range(0.1..0.25) * w.min(h);
        let freq = rng.random_range(0.1..0.4);
        let angle = rng.random_range(0.0..std::f64::consts::PI);
        let (s, c) = angle.sin_cos();
        for y in 0..height {
            for x in 0..width {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                if dx.hypot(dy) < radius {
                    log_y[y * width + x] += 0.3 * (freq * (c * dx + s * dy)).sin();
                }
            }
        }
    }
    let tint: [f64; 3] = [rng.random_range(0.8..1.2), 1.0, rng.random_range(0.8..1.2)];
    let data = log_y
        .iter()
        .flat_map(|&l| {
            let v = 10f64.powf(l.clamp(-2.0, 3.0));
            [v * tint[0], v * tint[1], v * tint[2]]
        })
        .collect();
    HdrImage::new(width, height, data)
}

/// Global tone curves mapping scene-referred values to 8-bit codes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ToneCurve {
    /// `clamp(exposure * v)^(1/gamma)`.
    Gamma { exposure: f64, gamma: f64 },
    /// `v / (1 + v)` after scaling by `key`, then display gamma 2.2.
    Reinhard { key: f64 },
    /// `log(1 + v) / log(1 + max)`.
    Log,
    /// Auto-exposed global photographic operator: scales so the log-average
    /// luminance lands on `key`, compresses with `s / (1 + s)` and applies
    /// display gamma 2.2.
    Photographic { key: f64 },
}

pub fn tone_map(hdr: &HdrImage, curve: ToneCurve) -> LdrImage {
    let max = hdr
        .data()
        .iter()
        .copied()
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let log_avg = {
        let y = crate::image::luminance(hdr);
        let sum: f64 = y.data().iter().map(|&v| (v + 1e-6).ln()).sum();
        (sum / y.data().len() as f64).exp()
    };
    let encode = |v: f64| -> f64 {
        match curve {
            ToneCurve::Gamma { exposure, gamma } => {
                (exposure * v).clamp(0.0, 1.0).powf(1.0 / gamma)
            }
            ToneCurve::Reinhard { key } => {
                let s = key * v;
                (s / (1.0 + s)).powf(1.0 / 2.2)
            }
            ToneCurve::Log => v.ln_1p() / max.ln_1p(),
            ToneCurve::Photographic { key } => {
                let s = key * v / log_avg;
                (s / (1.0 + s)).powf(1.0 / 2.2)
            }
        }
    };
    let data = hdr
        .data()
        .iter()
        .map(|&v| (encode(v) * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    LdrImage::new(hdr.width(), hdr.height(), data).expect("same dimensions")
}

/// Photographic rendering whose key is found by bisection so the mean
/// luminance code lands on `target_mean` (within one code value).
pub fn auto_expose(hdr: &HdrImage, target_mean: f64) -> LdrImage {
    let mean = |key: f64| {
        let ldr = tone_map(hdr, ToneCurve::Photographic { key });
        let y = crate::image::luminance(&ldr);
        (y.data().iter().sum::<f64>() / y.data().len() as f64, ldr)
    };
    let (mut lo, mut hi) = (1e-4f64, 1e4f64);
    let mut best = mean(1.0);
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        best = mean(mid);
        if (best.0 - target_mean).abs() < 1.0 {
            break;
        }
        if best.0 < target_mean {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best.1
}

/// `count` seeded HDR scenes of `size`×`size`, each paired with a
/// well-exposed rendering (mean code 116).
pub fn fixture_corpus(count: usize, size: usize) -> Result<Vec<(HdrImage, LdrImage)>> {
    (0..count)
        .map(|i| {
            let hdr = synthetic_scene(1000 + i as u64, size, size)?;
            let ldr = auto_expose(&hdr, 116.0);
            Ok((hdr, ldr))
        })
        .collect()
}

/// Replicates a plane into the three channels of an HDR image.
pub fn gray_hdr(plane: &Plane) -> HdrImage {
    let data = plane.data().iter().flat_map(|&v| [v, v, v]).collect();
    HdrImage::new(plane.width(), plane.height(), data).expect("non-negative plane")
}

/// Rounds a plane into the three channels of an LDR image.
pub fn gray_ldr(plane: &Plane) -> LdrImage {
    let data = plane
        .data()
        .iter()
        .flat_map(|&v| {
            let c = v.round().clamp(0.0, 255.0) as u8;
            [c, c, c]
        })
        .collect();
    LdrImage::new(plane.width(), plane.height(), data).expect("same dimensions")
}

/// Vertical line of width 1 at column `x0` on a flat background.
pub fn vertical_line(
    width: usize,
    height: usize,
    x0: usize,
    background: f64,
    line: f64,
) -> Result<Plane> {
    Plane::from_fn(
        width,
        height,
        |x, _| if x == x0 { line } else { background },
    )
}

/// Periodic vertical step edge whose rising edge is centred on column `x0`:
/// that column holds the midpoint value, as does the falling edge half a
/// period later, so the profile is odd-symmetric about `x0`.
pub fn step_edge(width: usize, height: usize, x0: usize, low: f64, high: f64) -> Result<Plane> {
    let half = width / 2;
    let mid = 0.5 * (low + high);
    Plane::from_fn(width, height, |x, _| {
        let d = (x + width - x0) % width;
        if d == 0 || d == half {
            mid
        } else if d < half {
            high
        } else {
            low
        }
    })
}
