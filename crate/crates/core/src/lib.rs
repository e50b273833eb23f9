//! Tone-mapped image quality assessment: structural fidelity, statistical
//! naturalness and local phase similarity between an HDR reference and an
//! 8-bit tone-mapped candidate, plus rank-correlation evaluation tooling.

pub mod error;
pub mod eval;
pub mod fidelity;
pub mod image;
pub mod index;
pub mod io;
mod math;
pub mod naturalness;
pub mod phase;
pub mod synth;

pub use error::{Error, Result};
pub use fidelity::{
    fidelity_ascent_step, fidelity_gradient, s_local, structural_fidelity, FidelityParams,
    FidelityResult, GradientMethod,
};
pub use image::{
    luma, luminance, normalize_hdr_luminance, to_grayscale_f64, HdrImage, LdrImage, LuminancePlane,
    Plane, RangeAlignment, RgbRaster,
};
pub use index::{
    combine, tmqi1, tmqi3, tmqi3_details, QualityBreakdown, QualityDetails, Tmqi1Params, TmqiParams,
};
pub use math::{normal_cdf, normal_pdf};
pub use naturalness::{statistical_naturalness, NaturalnessParams, NaturalnessResult};
pub use phase::{
    lwmpa, phase_component, FilterBankParams, PhaseComparison, PhaseMap, PhaseParams, PhaseScore,
};
