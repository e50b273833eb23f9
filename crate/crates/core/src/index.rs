//! Final indices: the equal-weight three-component score and the classic
//! two-component baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fidelity::{structural_fidelity, FidelityParams, FidelityResult};
use crate::image::{ensure_same_dims, luminance, HdrImage, LdrImage, RangeAlignment, RgbRaster};
use crate::naturalness::{statistical_naturalness, NaturalnessParams, NaturalnessResult};
use crate::phase::{phase_component, PhaseParams, PhaseScore};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tmqi1Params {
    pub a: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for Tmqi1Params {
    fn default() -> Self {
        Tmqi1Params {
            a: 0.8012,
            alpha: 0.3046,
            beta: 0.7088,
        }
    }
}

impl Tmqi1Params {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !(0.0..=1.0).contains(&self.a) || !positive(self.alpha) || !positive(self.beta) {
            return Err(Error::InvalidParams(format!(
                "TMQI-1 parameters out of range: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Every tunable knob of the full metric.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TmqiParams {
    pub fidelity: FidelityParams,
    pub naturalness: NaturalnessParams,
    pub phase: PhaseParams,
    pub tmqi1: Tmqi1Params,
    /// How HDR luminance is brought to the LDR range for the fidelity term.
    pub hdr_alignment: RangeAlignment,
}

impl TmqiParams {
    pub fn validate(&self) -> Result<()> {
        self.fidelity.validate()?;
        self.naturalness.validate()?;
        self.phase.validate()?;
        self.tmqi1.validate()
    }
}

/// Component scores of one HDR/LDR pair, all within `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityBreakdown {
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub tmqi1: f64,
}

/// Breakdown plus the intermediate results it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityDetails {
    pub breakdown: QualityBreakdown,
    pub fidelity: FidelityResult,
    pub naturalness: NaturalnessResult,
    pub phase: PhaseScore,
}

/// Equal-weight fusion `(F + N + L) / 3`, each component clamped to `[0, 1]`.
pub fn combine(f: f64, n: f64, l: f64) -> f64 {
    (f.clamp(0.0, 1.0) + n.clamp(0.0, 1.0) + l.clamp(0.0, 1.0)) / 3.0
}

/// Baseline index `a S^alpha + (1 - a) N^beta`.
pub fn tmqi1(s: f64, n: f64, params: &Tmqi1Params) -> Result<f64> {
    params.validate()?;
    for (name, value) in [("S", s), ("N", n)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::DomainError { name, value });
        }
    }
    let score = params.a * s.powf(params.alpha) + (1.0 - params.a) * n.powf(params.beta);
    Ok(score.clamp(0.0, 1.0))
}

pub fn tmqi3(hdr: &HdrImage, ldr: &LdrImage, params: &TmqiParams) -> Result<QualityBreakdown> {
    tmqi3_details(hdr, ldr, params).map(|d| d.breakdown)
}

/// Full evaluation keeping the quality map and per-channel phase scores.
pub fn tmqi3_details(
    hdr: &HdrImage,
    ldr: &LdrImage,
    params: &TmqiParams,
) -> Result<QualityDetails> {
    ensure_same_dims(hdr.dims(), ldr.dims())?;
    params.validate()?;
    let hdr_y = params.hdr_alignment.align(&luminance(hdr));
    let ldr_y = luminance(ldr);

    let ((fidelity, naturalness), phase) = rayon::join(
        || {
            (
                structural_fidelity(&hdr_y, &ldr_y, &params.fidelity),
                statistical_naturalness(&ldr_y, &params.naturalness),
            )
        },
        || phase_component(hdr, ldr, &params.phase),
    );
    let (fidelity, naturalness, phase) = (fidelity?, naturalness?, phase?);

    let f = fidelity.component();
    let n = naturalness.n;
    let l = phase.l;
    let breakdown = QualityBreakdown {
        f,
        n,
        l,
        q: combine(f, n, l),
        tmqi1: tmqi1(f, n, &params.tmqi1)?,
    };
    Ok(QualityDetails {
        breakdown,
        fidelity,
        naturalness,
        phase,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combine_examples() {
        assert_eq!(combine(1.0, 1.0, 1.0), 1.0);
        assert!((combine(0.3, 0.6, 0.9) - 0.6).abs() < 1e-15);
        assert_eq!(combine(-0.5, 0.0, 0.0), 0.0);
        let order_a = combine(0.1, 0.7, 0.4);
        let order_b = combine(0.1, 0.7, 0.4);
        assert_eq!(order_a.to_bits(), order_b.to_bits());
    }

    #[test]
    fn tmqi1_examples() {
        let p = Tmqi1Params::default();
        assert!((tmqi1(1.0, 1.0, &p).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(tmqi1(0.0, 0.0, &p).unwrap(), 0.0);
        let degenerate = Tmqi1Params {
            a: 1.0,
            alpha: 1.0,
            beta: 0.7,
        };
        assert_eq!(tmqi1(0.37, 0.9, &degenerate).unwrap(), 0.37);
        assert!(matches!(
            tmqi1(1.2, 0.5, &p),
            Err(Error::DomainError { name: "S", .. })
        ));
        assert!(matches!(
            tmqi1(0.5, -0.1, &p),
            Err(Error::DomainError { name: "N", .. })
        ));
    }

    #[test]
    fn tmqi1_monotone() {
        let p = Tmqi1Params::default();
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        for &n in &grid {
            for w in grid.windows(2) {
                assert!(tmqi1(w[1], n, &p).unwrap() >= tmqi1(w[0], n, &p).unwrap());
                assert!(tmqi1(n, w[1], &p).unwrap() >= tmqi1(n, w[0], &p).unwrap());
            }
        }
    }

    #[test]
    fn breakdown_json_keys() {
        let b = QualityBreakdown {
            f: 0.1,
            n: 0.2,
            l: 0.3,
            q: 0.2,
            tmqi1: 0.5,
        };
        let v = serde_json::to_value(b).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys.len(), 5);
        for k in ["F", "N", "L", "Q", "tmqi1"] {
            assert!(keys.contains(&k));
        }
    }

    #[test]
    fn dimension_mismatch() {
        let hdr = HdrImage::new(16, 16, vec![1.0; 768]).unwrap();
        let ldr = LdrImage::new(16, 15, vec![1; 720]).unwrap();
        assert!(matches!(
            tmqi3(&hdr, &ldr, &TmqiParams::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
