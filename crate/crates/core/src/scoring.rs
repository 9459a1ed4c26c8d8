//! Character-level scoring over an instance match matrix.
//!
//! Each GT word is sampled at `l` pseudo character centers spread evenly
//! along its midline. A matched detection "hits" a character when it
//! contains that center. A character counts toward GT recall only when it is
//! hit by exactly one matched detection: missing and doubly covered
//! characters are both penalized. Detection precision is the number of
//! characters it hits over the total length of the GTs it is matched with.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{GtInstance, Sample};
use crate::geometry::{contains_point, Point, Quad};
use crate::matching::MatchMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("cannot aggregate an empty dataset")]
    EmptyDataset,
}

/// Pseudo character centers of one GT word.
#[derive(Debug, Clone, PartialEq)]
pub struct PccSet {
    pub centers: Vec<Point>,
}

/// Centers of `length` equal slices of the midline from the left-edge
/// midpoint to the right-edge midpoint.
///
/// # Panics
///
/// Panics if `length` is zero.
pub fn pcc_for_quad(quad: &Quad, length: usize) -> PccSet {
    assert!(length > 0, "pseudo character centers need a positive word length");
    let start = quad.pivot_points().p1;
    let span = quad.right_midpoint() - start;
    let (w, h) = (span.x / length as f64, span.y / length as f64);
    let centers = (1..=length)
        .map(|k| {
            let t = k as f64 - 0.5;
            Point::new(start.x + w * t, start.y + h * t)
        })
        .collect();
    PccSet { centers }
}

/// Pseudo character centers of a GT instance.
pub fn pcc(g: &GtInstance) -> PccSet {
    pcc_for_quad(&g.quad, g.length)
}

/// Per-character hits `m[i][j][k]` and row sums `s[i][k]`.
///
/// Hits are stored only for matched pairs; every other pair is all-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CharTally {
    num_dets: usize,
    lengths: Vec<usize>,
    hits: Vec<Option<Vec<bool>>>,
    sums: Vec<Vec<u32>>,
    centers: Vec<Vec<Point>>,
}

impl CharTally {
    /// Whether detection `det` contains character `k` of GT `gt` (and the two are matched).
    pub fn hit(&self, gt: usize, det: usize, k: usize) -> bool {
        self.hits[gt * self.num_dets + det].as_ref().is_some_and(|h| h[k])
    }

    /// Number of characters of `gt` that `det` hits.
    pub fn hit_count(&self, gt: usize, det: usize) -> usize {
        self.hits[gt * self.num_dets + det].as_ref().map_or(0, |h| h.iter().filter(|&&b| b).count())
    }

    /// `s[gt][k]`: how many matched detections contain each character.
    pub fn row_sums(&self, gt: usize) -> &[u32] {
        &self.sums[gt]
    }

    /// Pseudo character centers of `gt`; empty for don't-care GTs.
    pub fn centers(&self, gt: usize) -> &[Point] {
        &self.centers[gt]
    }

    pub fn length(&self, gt: usize) -> usize {
        self.lengths[gt]
    }

    /// Characters of `gt` hit exactly once.
    pub fn correct_chars(&self, gt: usize) -> usize {
        self.sums[gt].iter().filter(|&&s| s == 1).count()
    }
}

pub fn char_tally(sample: &Sample, matrix: &MatchMatrix) -> CharTally {
    let nd = sample.dets.len();
    let mut hits = vec![None; sample.gts.len() * nd];
    let mut sums = Vec::with_capacity(sample.gts.len());
    let mut centers = Vec::with_capacity(sample.gts.len());
    for (i, g) in sample.gts.iter().enumerate() {
        if g.dont_care {
            sums.push(Vec::new());
            centers.push(Vec::new());
            continue;
        }
        let c = pcc(g).centers;
        let mut s = vec![0u32; c.len()];
        for j in matrix.dets_of(i) {
            let row: Vec<bool> = c.iter().map(|&p| contains_point(&sample.dets[j].quad, p)).collect();
            for (sk, &h) in s.iter_mut().zip(&row) {
                *sk += u32::from(h);
            }
            hits[i * nd + j] = Some(row);
        }
        sums.push(s);
        centers.push(c);
    }
    let lengths = sample.gts.iter().map(|g| if g.dont_care { 0 } else { g.length }).collect();
    CharTally { num_dets: nd, lengths, hits, sums, centers }
}

/// Fraction of the word's characters hit exactly once.
pub fn gt_recall(gt: usize, tally: &CharTally) -> f64 {
    tally.correct_chars(gt) as f64 / tally.length(gt) as f64
}

/// Characters hit by `det` over the summed length of the GTs matched with
/// it; 0 for an unmatched detection.
pub fn det_precision(det: usize, tally: &CharTally, matrix: &MatchMatrix) -> f64 {
    let (num, den) = det_precision_ratio(det, tally, matrix);
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn det_precision_ratio(det: usize, tally: &CharTally, matrix: &MatchMatrix) -> (usize, usize) {
    matrix.gts_of(det).map(|i| (tally.hit_count(i, det), tally.length(i))).fold((0, 0), |(n, d), (a, b)| (n + a, d + b))
}

pub fn hmean(recall: f64, precision: f64) -> f64 {
    if recall + precision == 0.0 {
        0.0
    } else {
        2.0 * recall * precision / (recall + precision)
    }
}

/// Recall given a sum of per-GT recalls over `count` GTs; vacuously 1 without GTs.
fn ratio_recall(sum: f64, count: usize) -> f64 {
    if count == 0 {
        1.0
    } else {
        sum / count as f64
    }
}

/// Precision given per-detection sums. Without detections it is 1 when there
/// is also nothing to find, otherwise 0.
fn ratio_precision(sum: f64, count: usize, gt_count: usize) -> f64 {
    match (count, gt_count) {
        (0, 0) => 1.0,
        (0, _) => 0.0,
        _ => sum / count as f64,
    }
}

/// Scores of one sample. `None` marks don't-care GTs and excluded detections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleScore {
    pub per_gt_recall: Vec<Option<f64>>,
    pub per_det_precision: Vec<Option<f64>>,
    pub recall: f64,
    pub precision: f64,
    pub hmean: f64,
    /// Sum of per-GT recalls over the counted GTs.
    pub recall_sum: f64,
    pub gt_count: usize,
    pub precision_sum: f64,
    pub det_count: usize,
}

impl SampleScore {
    /// Builds the score from per-instance values, summing in index order.
    pub fn from_instances(per_gt_recall: Vec<Option<f64>>, per_det_precision: Vec<Option<f64>>) -> Self {
        let recall_sum: f64 = per_gt_recall.iter().flatten().sum();
        let gt_count = per_gt_recall.iter().flatten().count();
        let precision_sum: f64 = per_det_precision.iter().flatten().sum();
        let det_count = per_det_precision.iter().flatten().count();
        let recall = ratio_recall(recall_sum, gt_count);
        let precision = ratio_precision(precision_sum, det_count, gt_count);
        Self {
            per_gt_recall,
            per_det_precision,
            recall,
            precision,
            hmean: hmean(recall, precision),
            recall_sum,
            gt_count,
            precision_sum,
            det_count,
        }
    }
}

/// Scores a sample from its match matrix and character tally.
pub fn score_with_tally(sample: &Sample, matrix: &MatchMatrix, tally: &CharTally) -> SampleScore {
    let per_gt = (0..sample.gts.len()).map(|i| (!matrix.is_dont_care(i)).then(|| gt_recall(i, tally))).collect();
    let per_det =
        (0..sample.dets.len()).map(|j| (!matrix.is_excluded(j)).then(|| det_precision(j, tally, matrix))).collect();
    SampleScore::from_instances(per_gt, per_det)
}

pub fn score_sample(sample: &Sample, matrix: &MatchMatrix) -> SampleScore {
    score_with_tally(sample, matrix, &char_tally(sample, matrix))
}

/// Dataset score pooled over every instance of every sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetScore {
    pub recall: f64,
    pub precision: f64,
    pub hmean: f64,
    pub recall_sum: f64,
    pub gt_count: usize,
    pub precision_sum: f64,
    pub det_count: usize,
    pub samples: usize,
}

/// Micro-average: instance sums pooled across samples, then divided.
/// Samples are reduced in the given order.
pub fn aggregate_dataset(scores: &[SampleScore]) -> Result<DatasetScore, ScoreError> {
    if scores.is_empty() {
        return Err(ScoreError::EmptyDataset);
    }
    let recall_sum: f64 = scores.iter().map(|s| s.recall_sum).sum();
    let precision_sum: f64 = scores.iter().map(|s| s.precision_sum).sum();
    let gt_count = scores.iter().map(|s| s.gt_count).sum();
    let det_count = scores.iter().map(|s| s.det_count).sum();
    let recall = ratio_recall(recall_sum, gt_count);
    let precision = ratio_precision(precision_sum, det_count, gt_count);
    Ok(DatasetScore {
        recall,
        precision,
        hmean: hmean(recall, precision),
        recall_sum,
        gt_count,
        precision_sum,
        det_count,
        samples: scores.len(),
    })
}
