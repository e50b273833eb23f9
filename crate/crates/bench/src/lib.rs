//! Shared inputs for the benchmarks.

use tmqi_core::synth::{auto_expose, synthetic_scene};
use tmqi_core::{HdrImage, LdrImage};

/// A seeded square scene and its auto-exposed rendering.
pub fn scene_pair(size: usize) -> (HdrImage, LdrImage) {
    let hdr = synthetic_scene(42, size, size).expect("valid size");
    let ldr = auto_expose(&hdr, 116.0);
    (hdr, ldr)
}
