//! IoU baseline: exclusive one-to-one matching at a fixed IoU threshold.

use crate::annotation::Sample;
use crate::geometry::{intersect_area, Quad};
use crate::matching::Thresholds;
use crate::scoring::SampleScore;

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

pub fn iou(a: &Quad, b: &Quad) -> f64 {
    let inter = intersect_area(a, b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IouParams {
    pub threshold: f64,
    /// Detections covered by a don't-care GT at this area precision are ignored.
    pub dont_care_precision: f64,
}

impl Default for IouParams {
    fn default() -> Self {
        Self { threshold: DEFAULT_IOU_THRESHOLD, dont_care_precision: Thresholds::default().area_precision_min }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IouResult {
    /// `(gt, det)` index pairs; no index appears twice.
    pub matched_pairs: Vec<(usize, usize)>,
    /// Per-instance 1/0 scores in the same shape as the character-level scorer.
    pub score: SampleScore,
}

impl IouResult {
    pub fn recall(&self) -> f64 {
        self.score.recall
    }

    pub fn precision(&self) -> f64 {
        self.score.precision
    }

    pub fn hmean(&self) -> f64 {
        self.score.hmean
    }
}

/// Greedy assignment by descending IoU; ties go to the lower GT index, then
/// the lower detection index.
pub fn iou_evaluate(sample: &Sample, params: &IouParams) -> IouResult {
    let excluded: Vec<bool> = sample
        .dets
        .iter()
        .map(|d| {
            sample
                .gts
                .iter()
                .any(|g| g.dont_care && intersect_area(&g.quad, &d.quad) / d.quad.area() >= params.dont_care_precision)
        })
        .collect();

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, g) in sample.gts.iter().enumerate().filter(|(_, g)| !g.dont_care) {
        for (j, d) in sample.dets.iter().enumerate().filter(|(j, _)| !excluded[*j]) {
            let v = iou(&g.quad, &d.quad);
            if v >= params.threshold {
                candidates.push((v, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut gt_used = vec![false; sample.gts.len()];
    let mut det_used = vec![false; sample.dets.len()];
    let mut matched_pairs = Vec::new();
    for (_, i, j) in candidates {
        if !gt_used[i] && !det_used[j] {
            gt_used[i] = true;
            det_used[j] = true;
            matched_pairs.push((i, j));
        }
    }
    matched_pairs.sort_unstable();

    let indicator = |b: bool| if b { 1.0 } else { 0.0 };
    let per_gt = sample.gts.iter().zip(&gt_used).map(|(g, &u)| (!g.dont_care).then(|| indicator(u))).collect();
    let per_det = excluded.iter().zip(&det_used).map(|(&x, &u)| (!x).then(|| indicator(u))).collect();
    IouResult { matched_pairs, score: SampleScore::from_instances(per_gt, per_det) }
}
