//! Portable float map reading and writing.

use crate::error::{Error, Result};
use crate::image::{HdrImage, RgbRaster};

/// Parses a PFM stream. `PF` holds RGB, `Pf` grayscale (replicated to RGB).
/// A negative scale marks little-endian samples; rows are stored bottom-up.
pub fn read_pfm(bytes: &[u8]) -> Result<HdrImage> {
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::BadHeader("truncated PFM header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    // exactly one whitespace byte separates the header from the samples
    pos += 1;

    let channels = match fields[0].as_str() {
        "PF" => 3,
        "Pf" => 1,
        other => return Err(Error::BadHeader(format!("PFM magic {other:?}"))),
    };
    let dim = |s: &str| {
        s.parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| Error::BadHeader(format!("bad PFM dimension {s:?}")))
    };
    let width = dim(&fields[1])?;
    let height = dim(&fields[2])?;
    let scale: f64 = fields[3]
        .parse()
        .ok()
        .filter(|s: &f64| s.is_finite() && *s != 0.0)
        .ok_or_else(|| Error::BadHeader(format!("bad PFM scale {:?}", fields[3])))?;
    let little_endian = scale < 0.0;

    let count = width * height * channels;
    let payload = bytes
        .get(pos..pos + count * 4)
        .ok_or_else(|| Error::BadHeader(format!("PFM payload shorter than {count} samples")))?;
    let samples: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| {
            let b = [c[0], c[1], c[2], c[3]];
            if little_endian {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            }
        })
        .collect();

    let mut data = Vec::with_capacity(width * height * 3);
    for y in 0..height {
        let row = height - 1 - y;
        for x in 0..width {
            let i = (row * width + x) * channels;
            if channels == 3 {
                data.extend(samples[i..i + 3].iter().map(|&v| f64::from(v)));
            } else {
                data.extend([f64::from(samples[i]); 3]);
            }
        }
    }
    HdrImage::new(width, height, data)
}

/// Writes a little-endian RGB PFM.
pub fn write_pfm(img: &HdrImage) -> Vec<u8> {
    let (width, height) = img.dims();
    let mut out = format!("PF\n{width} {height}\n-1.0\n").into_bytes();
    for y in (0..height).rev() {
        for x in 0..width {
            for v in img.pixel(x, y) {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn little_endian_when_scale_negative() {
        let mut bytes = b"Pf\n2 1\n-1.0\n".to_vec();
        bytes.extend_from_slice(&1.5f32.to_le_bytes());
        bytes.extend_from_slice(&0.25f32.to_le_bytes());
        let img = read_pfm(&bytes).unwrap();
        assert_eq!(img.pixel(0, 0), [1.5; 3]);
        assert_eq!(img.pixel(1, 0), [0.25; 3]);
    }

    #[test]
    fn big_endian_rows_bottom_up() {
        let mut bytes = b"PF\n1 2\n1.0\n".to_vec();
        for v in [1.0f32, 2.0, 3.0, 4.0, 5.0, 6.0] {
            bytes.extend_from_slice(&v.to_be_bytes());
        }
        let img = read_pfm(&bytes).unwrap();
        assert_eq!(img.pixel(0, 0), [4.0, 5.0, 6.0]);
        assert_eq!(img.pixel(0, 1), [1.0, 2.0, 3.0]);
    }

    #[test]
    fn write_read_roundtrip() {
        let img = HdrImage::from_fn(3, 2, |x, y| [x as f64, y as f64 * 0.5, 1e3]).unwrap();
        assert_eq!(read_pfm(&write_pfm(&img)).unwrap(), img);
    }

    #[test]
    fn rejects_bad_headers() {
        assert!(matches!(
            read_pfm(b"P6\n1 1\n255\n"),
            Err(Error::BadHeader(_))
        ));
        assert!(matches!(
            read_pfm(b"PF\n1 1\n0\n"),
            Err(Error::BadHeader(_))
        ));
        assert!(matches!(
            read_pfm(b"PF\n1 1\n-1\n\0\0"),
            Err(Error::BadHeader(_))
        ));
        let mut neg = b"Pf\n1 1\n-1\n".to_vec();
        neg.extend_from_slice(&(-1.0f32).to_le_bytes());
        assert!(matches!(read_pfm(&neg), Err(Error::NonFiniteSample { .. })));
    }
}
