//! Dataset-level evaluation with a configurable number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::Sample;
use crate::baseline::{iou_evaluate, IouParams};
use crate::matching::{build_match_matrix, MatchMatrix, ThresholdError, Thresholds};
use crate::report::{count_factors, FactorCounts};
use crate::scoring::{
    aggregate_dataset, char_tally, score_with_tally, CharTally, DatasetScore, SampleScore, ScoreError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Instance matching with character-level scoring.
    #[default]
    Tedeval,
    /// Exclusive one-to-one IoU matching.
    Iou,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Tedeval => "tedeval",
            Metric::Iou => "iou",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalOptions {
    pub metric: Metric,
    pub thresholds: Thresholds,
    pub iou: IouParams,
    /// Worker threads; `None` uses every available core.
    pub jobs: Option<usize>,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Thresholds(#[from] ThresholdError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Everything computed for one sample. The match matrix and character tally
/// are always filled so overlays and factor counts work for either metric.
#[derive(Debug, Clone)]
pub struct SampleResult {
    pub score: SampleScore,
    pub matrix: MatchMatrix,
    pub tally: CharTally,
    /// Set for the IoU metric.
    pub iou_pairs: Option<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub samples: Vec<SampleResult>,
    pub dataset: DatasetScore,
    pub factors: FactorCounts,
}

pub fn evaluate_sample(sample: &Sample, options: &EvalOptions) -> SampleResult {
    let matrix = build_match_matrix(sample, &options.thresholds);
    let tally = char_tally(sample, &matrix);
    match options.metric {
        Metric::Tedeval => {
            let score = score_with_tally(sample, &matrix, &tally);
            SampleResult { score, matrix, tally, iou_pairs: None }
        }
        Metric::Iou => {
            let r = iou_evaluate(sample, &options.iou);
            SampleResult { score: r.score, matrix, tally, iou_pairs: Some(r.matched_pairs) }
        }
    }
}

/// Evaluates every sample and reduces them in input order, so the result
/// does not depend on the number of workers.
pub fn evaluate(samples: &[Sample], options: &EvalOptions) -> Result<Evaluation, EvalError> {
    options.thresholds.validate()?;
    if samples.is_empty() {
        return Err(ScoreError::EmptyDataset.into());
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = options.jobs {
        if jobs == 0 {
            return Err(EvalError::NoWorkers);
        }
        builder = builder.num_threads(jobs);
    }
    let pool = builder.build()?;
    let results: Vec<SampleResult> = pool.install(|| samples.par_iter().map(|s| evaluate_sample(s, options)).collect());

    let scores: Vec<SampleScore> = results.iter().map(|r| r.score.clone()).collect();
    let dataset = aggregate_dataset(&scores)?;
    let factors = count_factors(samples.iter().zip(&results).map(|(s, r)| (s, &r.matrix, &r.tally)));
    Ok(Evaluation { samples: results, dataset, factors })
}
