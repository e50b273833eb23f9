//! Rank-correlation evaluation of objective scores against subjective
//! rankings, per image set and across a dataset.

mod krcc;
mod report;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

pub use krcc::krcc;
pub use report::{per_image_json, to_csv, to_markdown};

use crate::error::{Error, Result};
use crate::index::{tmqi3, QualityBreakdown, TmqiParams};
use crate::io::{load_hdr, load_ldr, DatasetManifest, ManifestSet};

/// Score of one LDR candidate within its set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageScore {
    pub path: PathBuf,
    pub subjective_score: f64,
    #[serde(flatten)]
    pub breakdown: QualityBreakdown,
}

/// KRCC of every metric column against the (negated) subjective scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricKrcc {
    pub q: f64,
    pub tmqi1: f64,
    pub f: f64,
    pub n: f64,
    pub l: f64,
}

impl MetricKrcc {
    pub const NAMES: [&'static str; 5] = ["TMQI-3", "TMQI-1", "F", "N", "L"];

    pub fn values(&self) -> [f64; 5] {
        [self.q, self.tmqi1, self.f, self.n, self.l]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetEvaluation {
    pub set_id: i64,
    pub images: Vec<ImageScore>,
    pub krcc: MetricKrcc,
}

impl SetEvaluation {
    /// Correlates precomputed scores. Subjective scores are ranks where lower
    /// is better, so they are negated before correlating.
    pub fn from_scores(set_id: i64, images: Vec<ImageScore>) -> Result<Self> {
        let subjective: Vec<f64> = images.iter().map(|i| -i.subjective_score).collect();
        let column = |f: fn(&QualityBreakdown) -> f64| {
            let v: Vec<f64> = images.iter().map(|i| f(&i.breakdown)).collect();
            krcc(&subjective, &v)
        };
        let krcc = MetricKrcc {
            q: column(|b| b.q)?,
            tmqi1: column(|b| b.tmqi1)?,
            f: column(|b| b.f)?,
            n: column(|b| b.n)?,
            l: column(|b| b.l)?,
        };
        Ok(SetEvaluation {
            set_id,
            images,
            krcc,
        })
    }
}

/// Loads and scores one set. Errors carry the set id and offending path.
pub fn evaluate_set(set: &ManifestSet, params: &TmqiParams) -> Result<SetEvaluation> {
    let in_set = |e: Error| Error::InSet {
        set_id: set.set_id,
        source: Box::new(e),
    };
    let hdr = load_hdr(&set.hdr_path).map_err(in_set)?;
    let images = set
        .ldr_entries
        .par_iter()
        .map(|entry| {
            let ldr = load_ldr(&entry.path)?;
            let breakdown = tmqi3(&hdr, &ldr, params).map_err(|e| e.in_file(&entry.path))?;
            Ok(ImageScore {
                path: entry.path.clone(),
                subjective_score: entry.subjective_score,
                breakdown,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(in_set)?;
    SetEvaluation::from_scores(set.set_id, images).map_err(in_set)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalOptions {
    /// Skip sets that fail to load or score instead of aborting.
    pub skip_broken: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedSet {
    pub set_id: i64,
    pub reason: String,
}

/// Average, extremes and population standard deviation of a column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub average: f64,
    pub min: f64,
    pub max: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Result<Summary> {
        if values.is_empty() {
            return Err(Error::TooFewItems(0));
        }
        let (average, std) = crate::math::mean_std(values);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Summary {
            average,
            min,
            max,
            std,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub sets: Vec<SetEvaluation>,
    pub skipped: Vec<SkippedSet>,
    /// One summary per entry of [`MetricKrcc::NAMES`].
    pub summaries: Vec<Summary>,
}

impl EvalReport {
    pub fn from_sets(sets: Vec<SetEvaluation>, skipped: Vec<SkippedSet>) -> Result<Self> {
        let summaries = (0..MetricKrcc::NAMES.len())
            .map(|m| Summary::of(&sets.iter().map(|s| s.krcc.values()[m]).collect::<Vec<_>>()))
            .collect::<Result<_>>()?;
        Ok(EvalReport {
            sets,
            skipped,
            summaries,
        })
    }

    /// Summary of the TMQI-3 column.
    pub fn summary(&self) -> Summary {
        self.summaries[0]
    }
}

/// Evaluates every set in manifest order. Sets run in parallel but results
/// and the reported failure are those of the first set in manifest order.
pub fn evaluate_dataset(
    manifest: &DatasetManifest,
    params: &TmqiParams,
    opts: EvalOptions,
) -> Result<EvalReport> {
    manifest.validate()?;
    params.validate()?;
    let results: Vec<Result<SetEvaluation>> = manifest
        .sets
        .par_iter()
        .map(|set| evaluate_set(set, params))
        .collect();
    let mut sets = Vec::new();
    let mut skipped = Vec::new();
    for (set, result) in manifest.sets.iter().zip(results) {
        match result {
            Ok(eval) => sets.push(eval),
            Err(e) if opts.skip_broken => {
                log::warn!("skipping {e}");
                skipped.push(SkippedSet {
                    set_id: set.set_id,
                    reason: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    if sets.is_empty() {
        return Err(Error::ManifestInvalid {
            location: "sets".into(),
            reason: "no set could be evaluated".into(),
        });
    }
    EvalReport::from_sets(sets, skipped)
}
