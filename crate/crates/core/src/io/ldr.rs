//! 8-bit LDR rasters: binary PPM (P6) and PNG.

use std::io::Cursor;

use crate::error::{Error, Result};
use crate::image::{LdrImage, RgbRaster};

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Reads a P6 or PNG stream, detected by magic bytes.
pub fn read_ldr(bytes: &[u8]) -> Result<LdrImage> {
    if bytes.starts_with(PNG_SIGNATURE) {
        read_png(bytes)
    } else if bytes.starts_with(b"P6") {
        read_ppm(bytes)
    } else {
        Err(Error::UnknownFormat)
    }
}

fn ppm_field(bytes: &[u8], pos: &mut usize) -> Result<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::BadHeader("truncated PPM header".into()));
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

pub fn read_ppm(bytes: &[u8]) -> Result<LdrImage> {
    let mut pos = 0;
    let magic = ppm_field(bytes, &mut pos)?;
    if magic != "P6" {
        return Err(Error::BadHeader(format!(
            "PPM magic {magic:?}, expected P6"
        )));
    }
    let mut num = |what: &str| -> Result<u32> {
        let field = ppm_field(bytes, &mut pos)?;
        field
            .parse::<u32>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| Error::BadHeader(format!("bad PPM {what} {field:?}")))
    };
    let width = num("width")? as usize;
    let height = num("height")? as usize;
    let maxval = num("maxval")?;
    if maxval != 255 {
        return Err(Error::MaxvalUnsupported(maxval));
    }
    pos += 1;
    let len = width * height * 3;
    let payload = bytes
        .get(pos..pos + len)
        .ok_or_else(|| Error::BadHeader(format!("PPM payload shorter than {len} bytes")))?;
    LdrImage::new(width, height, payload.to_vec())
}

pub fn write_ppm(img: &LdrImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn read_png(bytes: &[u8]) -> Result<LdrImage> {
    let png_err = |e: png::DecodingError| Error::Png(e.to_string());
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(png_err)?;
    let (color, depth) = reader.output_color_type();
    if depth != png::BitDepth::Eight {
        return Err(Error::BitDepthUnsupported(depth as u8));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Png("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    buf.truncate(info.buffer_size());
    let (width, height) = (info.width as usize, info.height as usize);

    let rgb = match color {
        png::ColorType::Rgb => buf,
        png::ColorType::Rgba => {
            log::warn!("PNG alpha channel discarded");
            buf.chunks_exact(4)
                .flat_map(|p| [p[0], p[1], p[2]])
                .collect()
        }
        png::ColorType::Grayscale => buf.iter().flat_map(|&v| [v, v, v]).collect(),
        png::ColorType::GrayscaleAlpha => {
            log::warn!("PNG alpha channel discarded");
            buf.chunks_exact(2)
                .flat_map(|p| [p[0], p[0], p[0]])
                .collect()
        }
        png::ColorType::Indexed => return Err(Error::Png("palette was not expanded".into())),
    };
    LdrImage::new(width, height, rgb)
}

pub fn write_png(img: &LdrImage) -> Result<Vec<u8>> {
    encode_png(img.width(), img.height(), png::ColorType::Rgb, img.data())
}

/// Writes a single-channel 8-bit PNG.
pub fn write_gray_png(width: usize, height: usize, data: &[u8]) -> Result<Vec<u8>> {
    encode_png(width, height, png::ColorType::Grayscale, data)
}

fn encode_png(width: usize, height: usize, color: png::ColorType, data: &[u8]) -> Result<Vec<u8>> {
    let png_err = |e: png::EncodingError| Error::Png(e.to_string());
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width as u32, height as u32);
        encoder.set_color(color);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(png_err)?;
        writer.write_image_data(data).map_err(png_err)?;
        writer.finish().map_err(png_err)?;
    }
    Ok(out)
}
