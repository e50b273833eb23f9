//! File formats: Radiance RGBE and PFM for HDR references, PPM and PNG for
//! LDR candidates, and the JSON dataset manifest.

mod ldr;
mod manifest;
mod pfm;
mod rgbe;

use std::path::Path;

pub use ldr::{read_ldr, read_png, read_ppm, write_gray_png, write_png, write_ppm};
pub use manifest::{
    load_manifest, load_manifest_file, DatasetManifest, LdrEntry, ManifestSet, MAX_SUBJECTIVE,
    MIN_SUBJECTIVE,
};
pub use pfm::{read_pfm, write_pfm};
pub use rgbe::{
    read_radiance_hdr, write_radiance_hdr, write_radiance_hdr_with, RgbePixel, ScanlineEncoding,
};

use crate::error::{Error, Result};
use crate::image::{HdrImage, LdrImage};

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads an HDR reference (Radiance or PFM, detected by magic bytes).
pub fn read_hdr(bytes: &[u8]) -> Result<HdrImage> {
    if bytes.starts_with(b"#?") {
        read_radiance_hdr(bytes)
    } else if bytes.starts_with(b"PF") || bytes.starts_with(b"Pf") {
        read_pfm(bytes)
    } else {
        Err(Error::UnknownFormat)
    }
}

pub fn load_hdr(path: &Path) -> Result<HdrImage> {
    read_hdr(&read_file(path)?).map_err(|e| e.in_file(path))
}

pub fn load_ldr(path: &Path) -> Result<LdrImage> {
    read_ldr(&read_file(path)?).map_err(|e| e.in_file(path))
}

/// Writes `img` as PNG or PPM depending on the extension (`.ppm` → P6).
pub fn save_ldr(img: &LdrImage, path: &Path) -> Result<()> {
    let bytes = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("ppm") => write_ppm(img),
        _ => write_png(img)?,
    };
    write_file(path, &bytes)
}

/// Writes `img` as PFM for `.pfm`, Radiance HDR otherwise.
pub fn save_hdr(img: &HdrImage, path: &Path) -> Result<()> {
    let bytes = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("pfm") => write_pfm(img),
        _ => write_radiance_hdr(img)?,
    };
    write_file(path, &bytes)
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
