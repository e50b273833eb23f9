//! Radiance RGBE (`.hdr`) reading and writing.
//!
//! Only the `-Y h +X w` orientation is accepted. Scanlines may be flat
//! 4-byte pixels or the adaptive component-separated RLE introduced with
//! Radiance 2.0. Mantissas decode at the bucket center:
//! `(m + 0.5) * 2^(e - 136)`.

use crate::error::{Error, Result};
use crate::image::{HdrImage, RgbRaster};

const MIN_RLE_WIDTH: usize = 8;
const MAX_RLE_WIDTH: usize = 0x7fff;
const MAX_RUN: usize = 127;

/// One shared-exponent pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RgbePixel {
    pub r: u8,
    pub g: u8,
    pub b: u8,
    pub e: u8,
}

impl RgbePixel {
    pub const BLACK: RgbePixel = RgbePixel {
        r: 0,
        g: 0,
        b: 0,
        e: 0,
    };

    pub fn new(r: u8, g: u8, b: u8, e: u8) -> Self {
        RgbePixel { r, g, b, e }
    }

    pub fn decode(self) -> [f64; 3] {
        if self.e == 0 {
            return [0.0; 3];
        }
        let scale = exp2i(i32::from(self.e) - 136);
        [
            (f64::from(self.r) + 0.5) * scale,
            (f64::from(self.g) + 0.5) * scale,
            (f64::from(self.b) + 0.5) * scale,
        ]
    }

    /// Encodes with the exponent of the largest channel, taken as `E` with
    /// `max = f * 2^E`, `f` in `[0.5, 1)`. Values below the smallest
    /// representable exponent flush to black; values above the largest
    /// saturate.
    pub fn encode(rgb: [f64; 3]) -> Result<Self> {
        if let Some(index) = rgb.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonFiniteSample { index });
        }
        let max = rgb[0].max(rgb[1]).max(rgb[2]);
        if max <= 0.0 {
            return Ok(Self::BLACK);
        }
        let exp = frexp_exponent(max);
        if exp < -127 {
            return Ok(Self::BLACK);
        }
        if exp > 127 {
            return Ok(RgbePixel::new(255, 255, 255, 255));
        }
        let scale = 256.0 / exp2i(exp);
        let m = |v: f64| (v * scale).floor().min(255.0) as u8;
        Ok(RgbePixel::new(
            m(rgb[0]),
            m(rgb[1]),
            m(rgb[2]),
            (exp + 128) as u8,
        ))
    }

    fn to_bytes(self) -> [u8; 4] {
        [self.r, self.g, self.b, self.e]
    }
}

fn exp2i(e: i32) -> f64 {
    2f64.powi(e)
}

/// Exponent `E` such that `v = f * 2^E` with `f` in `[0.5, 1)`.
fn frexp_exponent(v: f64) -> i32 {
    let mut e = v.log2().floor() as i32 + 1;
    // log2 may round across an integer boundary
    if v >= exp2i(e) {
        e += 1;
    } else if v < exp2i(e - 1) {
        e -= 1;
    }
    e
}

/// Scanline layout used by the writer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanlineEncoding {
    /// Plain 4-byte pixels.
    Flat,
    /// Adaptive RLE where the width allows it (8..=32767), flat otherwise.
    #[default]
    Rle,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn line(&mut self) -> Option<&'a [u8]> {
        if self.pos >= self.bytes.len() {
            return None;
        }
        let rest = &self.bytes[self.pos..];
        let end = rest.iter().position(|&b| b == b'\n').unwrap_or(rest.len());
        self.pos += (end + 1).min(rest.len());
        let line = &rest[..end];
        Some(line.strip_suffix(b"\r").unwrap_or(line))
    }

    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.bytes.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(s)
    }

    fn byte(&mut self) -> Option<u8> {
        self.take(1).map(|s| s[0])
    }
}

/// Parses a Radiance HDR byte stream.
pub fn read_radiance_hdr(bytes: &[u8]) -> Result<HdrImage> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.line().ok_or(Error::BadMagic)?;
    if !(magic.starts_with(b"#?RADIANCE") || magic.starts_with(b"#?RGBE")) {
        return Err(Error::BadMagic);
    }
    loop {
        let line = cur
            .line()
            .ok_or_else(|| Error::BadHeader("missing blank line after header".into()))?;
        if line.is_empty() {
            break;
        }
        if let Some(fmt) = line.strip_prefix(b"FORMAT=") {
            if fmt.trim_ascii() != b"32-bit_rle_rgbe" {
                return Err(Error::BadHeader(format!(
                    "unsupported FORMAT={}",
                    String::from_utf8_lossy(fmt)
                )));
            }
        }
    }
    let res = cur
        .line()
        .ok_or_else(|| Error::BadHeader("missing resolution line".into()))?;
    let (width, height) = parse_resolution(res)?;

    let mut data = Vec::with_capacity(width * height * 3);
    let mut scanline = vec![RgbePixel::BLACK; width];
    for row in 0..height {
        read_scanline(&mut cur, &mut scanline, row)?;
        for p in &scanline {
            data.extend_from_slice(&p.decode());
        }
    }
    HdrImage::new(width, height, data)
}

fn parse_resolution(line: &[u8]) -> Result<(usize, usize)> {
    let text = std::str::from_utf8(line)
        .map_err(|_| Error::BadHeader("resolution line is not ASCII".into()))?;
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() != 4 {
        return Err(Error::BadHeader(format!(
            "malformed resolution line {text:?}"
        )));
    }
    let axes_ok = ["-Y", "+Y", "-X", "+X"];
    if !axes_ok.contains(&tokens[0]) || !axes_ok.contains(&tokens[2]) {
        return Err(Error::BadHeader(format!(
            "malformed resolution line {text:?}"
        )));
    }
    if tokens[0] != "-Y" || tokens[2] != "+X" {
        return Err(Error::UnsupportedOrientation(text.to_string()));
    }
    let dim = |s: &str| {
        s.parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| Error::BadHeader(format!("bad dimension {s:?}")))
    };
    Ok((dim(tokens[3])?, dim(tokens[1])?))
}

fn read_scanline(cur: &mut Cursor<'_>, out: &mut [RgbePixel], row: usize) -> Result<()> {
    let width = out.len();
    let truncated = || Error::TruncatedScanline { row };
    let head = cur.take(4).ok_or_else(truncated)?;
    let is_rle = (MIN_RLE_WIDTH..=MAX_RLE_WIDTH).contains(&width)
        && head[0] == 2
        && head[1] == 2
        && head[2] & 0x80 == 0;
    if !is_rle {
        out[0] = RgbePixel::new(head[0], head[1], head[2], head[3]);
        for p in out.iter_mut().skip(1) {
            let b = cur.take(4).ok_or_else(truncated)?;
            *p = RgbePixel::new(b[0], b[1], b[2], b[3]);
        }
        return Ok(());
    }

    let declared = (usize::from(head[2]) << 8) | usize::from(head[3]);
    if declared != width {
        return Err(Error::BadRleRun {
            row,
            reason: format!("scanline declares width {declared}, expected {width}"),
        });
    }
    let mut component = vec![0u8; width];
    for c in 0..4 {
        let mut x = 0;
        while x < width {
            let count = cur.byte().ok_or_else(truncated)?;
            if count > 128 {
                let run = usize::from(count - 128);
                if x + run > width {
                    return Err(Error::BadRleRun {
                        row,
                        reason: format!("run of {run} overflows scanline"),
                    });
                }
                let value = cur.byte().ok_or_else(truncated)?;
                component[x..x + run].fill(value);
                x += run;
            } else {
                let run = usize::from(count);
                if run == 0 || x + run > width {
                    return Err(Error::BadRleRun {
                        row,
                        reason: format!("literal of {run} at column {x} is invalid"),
                    });
                }
                let values = cur.take(run).ok_or_else(truncated)?;
                component[x..x + run].copy_from_slice(values);
                x += run;
            }
        }
        for (p, &v) in out.iter_mut().zip(&component) {
            match c {
                0 => p.r = v,
                1 => p.g = v,
                2 => p.b = v,
                _ => p.e = v,
            }
        }
    }
    Ok(())
}

/// Encodes an image as Radiance HDR with RLE scanlines where possible.
pub fn write_radiance_hdr(img: &HdrImage) -> Result<Vec<u8>> {
    write_radiance_hdr_with(img, ScanlineEncoding::Rle)
}

pub fn write_radiance_hdr_with(img: &HdrImage, encoding: ScanlineEncoding) -> Result<Vec<u8>> {
    let (width, height) = img.dims();
    let mut out = Vec::with_capacity(width * height * 4 + 64);
    out.extend_from_slice(b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n");
    out.extend_from_slice(format!("-Y {height} +X {width}\n").as_bytes());
    let rle = encoding == ScanlineEncoding::Rle && (MIN_RLE_WIDTH..=MAX_RLE_WIDTH).contains(&width);
    let mut line = Vec::with_capacity(width);
    for y in 0..height {
        line.clear();
        for x in 0..width {
            line.push(RgbePixel::encode(img.pixel(x, y))?);
        }
        if rle {
            out.extend_from_slice(&[2, 2, (width >> 8) as u8, (width & 0xff) as u8]);
            for c in 0..4 {
                let component: Vec<u8> = line.iter().map(|p| p.to_bytes()[c]).collect();
                encode_component(&component, &mut out);
            }
        } else {
            for p in &line {
                out.extend_from_slice(&p.to_bytes());
            }
        }
    }
    Ok(out)
}

fn encode_component(data: &[u8], out: &mut Vec<u8>) {
    let mut literal_start = 0;
    let mut i = 0;
    while i < data.len() {
        let mut run = 1;
        while i + run < data.len() && run < MAX_RUN && data[i + run] == data[i] {
            run += 1;
        }
        if run >= 3 {
            flush_literals(&data[literal_start..i], out);
            out.push(128 + run as u8);
            out.push(data[i]);
            i += run;
            literal_start = i;
        } else {
            i += 1;
        }
    }
    flush_literals(&data[literal_start..], out);
}

fn flush_literals(mut data: &[u8], out: &mut Vec<u8>) {
    while !data.is_empty() {
        let n = data.len().min(128);
        out.push(n as u8);
        out.extend_from_slice(&data[..n]);
        data = &data[n..];
    }
}
