//! Instance-level matching.
//!
//! Every viable match is accepted: one-to-one pairs, one GT split across
//! several detections, and one detection spanning several GTs. Acceptances
//! set entries of a binary GT × detection matrix, so a pair found by more
//! than one rule is still a single `1`. Many-matches whose members sit on
//! different text lines are rejected by the angle test in
//! [`crate::geometry::is_multiline`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{DetInstance, GtInstance, Sample};
use crate::geometry::{intersect_area, is_multiline, union_coverage_area, Quad, DEFAULT_MULTILINE_ANGLE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub area_recall_min: f64,
    pub area_precision_min: f64,
    /// Degrees.
    pub multiline_angle_min: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { area_recall_min: 0.4, area_precision_min: 0.4, multiline_angle_min: DEFAULT_MULTILINE_ANGLE }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThresholdError {
    #[error("area recall threshold {0} outside (0, 1]")]
    AreaRecall(f64),
    #[error("area precision threshold {0} outside (0, 1]")]
    AreaPrecision(f64),
    #[error("multiline angle {0} outside (0, 180)")]
    Angle(f64),
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), ThresholdError> {
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !unit(self.area_recall_min) {
            return Err(ThresholdError::AreaRecall(self.area_recall_min));
        }
        if !unit(self.area_precision_min) {
            return Err(ThresholdError::AreaPrecision(self.area_precision_min));
        }
        if !(self.multiline_angle_min > 0.0 && self.multiline_angle_min < 180.0) {
            return Err(ThresholdError::Angle(self.multiline_angle_min));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    OneToOne,
    OneToMany,
    ManyToOne,
}

/// One accepted (or multiline-rejected) group, by instance index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchGroup {
    pub kind: MatchKind,
    pub gts: Vec<usize>,
    pub dets: Vec<usize>,
}

/// Binary GT × detection match table plus the groups that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchMatrix {
    num_gts: usize,
    num_dets: usize,
    entries: Vec<bool>,
    matches: Vec<MatchGroup>,
    multiline_rejections: Vec<MatchGroup>,
    dont_care_gts: Vec<bool>,
    excluded_dets: Vec<bool>,
}

impl MatchMatrix {
    pub fn new(num_gts: usize, num_dets: usize) -> Self {
        Self {
            num_gts,
            num_dets,
            entries: vec![false; num_gts * num_dets],
            matches: Vec::new(),
            multiline_rejections: Vec::new(),
            dont_care_gts: vec![false; num_gts],
            excluded_dets: vec![false; num_dets],
        }
    }

    pub fn num_gts(&self) -> usize {
        self.num_gts
    }

    pub fn num_dets(&self) -> usize {
        self.num_dets
    }

    pub fn get(&self, gt: usize, det: usize) -> bool {
        self.entries[gt * self.num_dets + det]
    }

    /// Idempotent: a repeated acceptance leaves the entry at `true`.
    fn set(&mut self, gt: usize, det: usize) {
        self.entries[gt * self.num_dets + det] = true;
    }

    fn accept(&mut self, group: MatchGroup) {
        for &i in &group.gts {
            for &j in &group.dets {
                self.set(i, j);
            }
        }
        self.matches.push(group);
    }

    /// `{i | M_ij = 1}` for detection `det`.
    pub fn gts_of(&self, det: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_gts).filter(move |&i| self.get(i, det))
    }

    pub fn dets_of(&self, gt: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_dets).filter(move |&j| self.get(gt, j))
    }

    pub fn entry_count(&self) -> usize {
        self.entries.iter().filter(|&&e| e).count()
    }

    /// Accepted groups in discovery order.
    pub fn matches(&self) -> &[MatchGroup] {
        &self.matches
    }

    /// Groups that passed the area tests but failed the multiline test.
    pub fn multiline_rejections(&self) -> &[MatchGroup] {
        &self.multiline_rejections
    }

    pub fn is_dont_care(&self, gt: usize) -> bool {
        self.dont_care_gts[gt]
    }

    /// Detections shielded by a don't-care region; they never match and are
    /// left out of precision.
    pub fn is_excluded(&self, det: usize) -> bool {
        self.excluded_dets[det]
    }
}

pub fn area_recall(g: &GtInstance, d: &DetInstance) -> f64 {
    intersect_area(&g.quad, &d.quad) / g.quad.area()
}

pub fn area_precision(g: &GtInstance, d: &DetInstance) -> f64 {
    intersect_area(&g.quad, &d.quad) / d.quad.area()
}

pub fn match_one_to_one(g: &GtInstance, d: &DetInstance, t: &Thresholds) -> bool {
    area_recall(g, d) >= t.area_recall_min && area_precision(g, d) >= t.area_precision_min
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GroupOutcome {
    Accepted,
    BelowThreshold,
    Multiline,
}

fn one_to_many_outcome(gt: &Quad, dets: &[Quad], t: &Thresholds) -> GroupOutcome {
    assert!(dets.len() >= 2, "one-to-many match needs at least two detections");
    if dets.iter().any(|d| intersect_area(gt, d) / d.area() < t.area_precision_min) {
        return GroupOutcome::BelowThreshold;
    }
    let covers: Vec<&Quad> = dets.iter().collect();
    if union_coverage_area(gt, &covers) / gt.area() < t.area_recall_min {
        return GroupOutcome::BelowThreshold;
    }
    if is_multiline(dets, t.multiline_angle_min) {
        return GroupOutcome::Multiline;
    }
    GroupOutcome::Accepted
}

fn many_to_one_outcome(gts: &[Quad], det: &Quad, t: &Thresholds) -> GroupOutcome {
    assert!(gts.len() >= 2, "many-to-one match needs at least two ground truths");
    if gts.iter().any(|g| intersect_area(g, det) / g.area() < t.area_recall_min) {
        return GroupOutcome::BelowThreshold;
    }
    let covers: Vec<&Quad> = gts.iter().collect();
    if union_coverage_area(det, &covers) / det.area() < t.area_precision_min {
        return GroupOutcome::BelowThreshold;
    }
    if is_multiline(gts, t.multiline_angle_min) {
        return GroupOutcome::Multiline;
    }
    GroupOutcome::Accepted
}

/// One GT against several detections: every detection must lie mostly inside
/// the GT, together they must cover enough of it, and they must share a line.
pub fn match_one_to_many(g: &GtInstance, dets: &[&DetInstance], t: &Thresholds) -> bool {
    let quads: Vec<Quad> = dets.iter().map(|d| d.quad).collect();
    one_to_many_outcome(&g.quad, &quads, t) == GroupOutcome::Accepted
}

/// Several GTs against one detection: every GT must be mostly covered, the
/// GTs must fill enough of the detection, and they must share a line.
pub fn match_many_to_one(gts: &[&GtInstance], d: &DetInstance, t: &Thresholds) -> bool {
    let quads: Vec<Quad> = gts.iter().map(|g| g.quad).collect();
    many_to_one_outcome(&quads, &d.quad, t) == GroupOutcome::Accepted
}

/// Builds the match matrix for one sample.
///
/// Many-groups are formed from candidate sets rather than by subset search:
/// for a GT, all detections whose area precision against it reaches the
/// threshold; for a detection, all GTs whose area recall reaches it. A group
/// is tested as a whole and either accepted or rejected.
pub fn build_match_matrix(sample: &Sample, t: &Thresholds) -> MatchMatrix {
    let (ng, nd) = (sample.gts.len(), sample.dets.len());
    let mut m = MatchMatrix::new(ng, nd);

    let mut inter = vec![0.0; ng * nd];
    for (i, g) in sample.gts.iter().enumerate() {
        for (j, d) in sample.dets.iter().enumerate() {
            inter[i * nd + j] = intersect_area(&g.quad, &d.quad);
        }
    }
    let gt_area: Vec<f64> = sample.gts.iter().map(|g| g.quad.area()).collect();
    let det_area: Vec<f64> = sample.dets.iter().map(|d| d.quad.area()).collect();
    let recall = |i: usize, j: usize| inter[i * nd + j] / gt_area[i];
    let precision = |i: usize, j: usize| inter[i * nd + j] / det_area[j];

    for (i, g) in sample.gts.iter().enumerate() {
        m.dont_care_gts[i] = g.dont_care;
    }
    for j in 0..nd {
        m.excluded_dets[j] = (0..ng).any(|i| m.dont_care_gts[i] && precision(i, j) >= t.area_precision_min);
    }
    let care_gts: Vec<usize> = (0..ng).filter(|&i| !m.dont_care_gts[i]).collect();
    let care_dets: Vec<usize> = (0..nd).filter(|&j| !m.excluded_dets[j]).collect();

    for &i in &care_gts {
        for &j in &care_dets {
            if recall(i, j) >= t.area_recall_min && precision(i, j) >= t.area_precision_min {
                m.accept(MatchGroup { kind: MatchKind::OneToOne, gts: vec![i], dets: vec![j] });
            }
        }
    }

    for &i in &care_gts {
        let dets: Vec<usize> = care_dets.iter().copied().filter(|&j| precision(i, j) >= t.area_precision_min).collect();
        if dets.len() < 2 {
            continue;
        }
        let quads: Vec<Quad> = dets.iter().map(|&j| sample.dets[j].quad).collect();
        let group = MatchGroup { kind: MatchKind::OneToMany, gts: vec![i], dets };
        match one_to_many_outcome(&sample.gts[i].quad, &quads, t) {
            GroupOutcome::Accepted => m.accept(group),
            GroupOutcome::Multiline => m.multiline_rejections.push(group),
            GroupOutcome::BelowThreshold => {}
        }
    }

    for &j in &care_dets {
        let gts: Vec<usize> = care_gts.iter().copied().filter(|&i| recall(i, j) >= t.area_recall_min).collect();
        if gts.len() < 2 {
            continue;
        }
        let quads: Vec<Quad> = gts.iter().map(|&i| sample.gts[i].quad).collect();
        let group = MatchGroup { kind: MatchKind::ManyToOne, gts, dets: vec![j] };
        match many_to_one_outcome(&quads, &sample.dets[j].quad, t) {
            GroupOutcome::Accepted => m.accept(group),
            GroupOutcome::Multiline => m.multiline_rejections.push(group),
            GroupOutcome::BelowThreshold => {}
        }
    }
    m
}
