//! Factor counts and the structured evaluation report.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotation::Sample;
use crate::evaluate::{EvalOptions, Evaluation, Metric};
use crate::geometry::Quad;
use crate::matching::{MatchKind, MatchMatrix, Thresholds};
use crate::scoring::{det_precision, CharTally, DatasetScore, SampleScore};

/// Bumped whenever a field is renamed or removed.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Frequency of granularity, completeness and multiline cases, counted per
/// detection (except `multiline_rejections`, which counts rejected groups).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FactorCounts {
    /// Successful detections that take part in an accepted one-to-many or
    /// many-to-one match.
    pub granularity: usize,
    /// Successful detections matched with a GT that has a missing or
    /// doubly covered character.
    pub completeness: usize,
    /// Many-groups that passed the area tests but failed the angle test.
    pub multiline_rejections: usize,
    /// Detections with nonzero precision.
    pub successful_detections: usize,
}

/// Counts divided by `successful_detections` (0 when there are none).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FactorProportions {
    pub granularity: f64,
    pub completeness: f64,
    pub multiline: f64,
}

impl FactorCounts {
    pub fn proportions(&self) -> FactorProportions {
        let of = |n: usize| {
            if self.successful_detections == 0 {
                0.0
            } else {
                n as f64 / self.successful_detections as f64
            }
        };
        FactorProportions {
            granularity: of(self.granularity),
            completeness: of(self.completeness),
            multiline: of(self.multiline_rejections),
        }
    }

    fn add(mut self, other: FactorCounts) -> FactorCounts {
        self.granularity += other.granularity;
        self.completeness += other.completeness;
        self.multiline_rejections += other.multiline_rejections;
        self.successful_detections += other.successful_detections;
        self
    }
}

fn sample_factors(sample: &Sample, matrix: &MatchMatrix, tally: &CharTally) -> FactorCounts {
    let nd = sample.dets.len();
    let successful: Vec<bool> =
        (0..nd).map(|j| !matrix.is_excluded(j) && det_precision(j, tally, matrix) > 0.0).collect();
    let mut in_many = vec![false; nd];
    for group in matrix.matches().iter().filter(|g| g.kind != MatchKind::OneToOne) {
        for &j in &group.dets {
            in_many[j] = true;
        }
    }
    let incomplete = |j: usize| matrix.gts_of(j).any(|i| tally.row_sums(i).iter().any(|&s| s != 1));
    FactorCounts {
        granularity: (0..nd).filter(|&j| successful[j] && in_many[j]).count(),
        completeness: (0..nd).filter(|&j| successful[j] && incomplete(j)).count(),
        multiline_rejections: matrix.multiline_rejections().len(),
        successful_detections: successful.iter().filter(|&&s| s).count(),
    }
}

/// Sums per-sample factor counts.
pub fn count_factors<'a>(
    items: impl IntoIterator<Item = (&'a Sample, &'a MatchMatrix, &'a CharTally)>,
) -> FactorCounts {
    items.into_iter().map(|(s, m, t)| sample_factors(s, m, t)).fold(FactorCounts::default(), FactorCounts::add)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportThresholds {
    pub area_recall_min: f64,
    pub area_precision_min: f64,
    pub multiline_angle_min: f64,
    pub iou_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorReport {
    pub counts: FactorCounts,
    pub proportions: FactorProportions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub id: String,
    #[serde(flatten)]
    pub score: SampleScore,
    /// Indices of non-convex GT quads; their intersections use the general clipper.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub non_convex_gts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub non_convex_dets: Vec<usize>,
}

impl SampleReport {
    pub fn new(sample: &Sample, score: SampleScore) -> Self {
        let flagged = |quads: &mut dyn Iterator<Item = &Quad>| {
            quads.enumerate().filter(|(_, q)| !q.is_convex()).map(|(i, _)| i).collect()
        };
        Self {
            id: sample.id.clone(),
            score,
            non_convex_gts: flagged(&mut sample.gts.iter().map(|g| &g.quad)),
            non_convex_dets: flagged(&mut sample.dets.iter().map(|d| &d.quad)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub metric: Metric,
    pub thresholds: ReportThresholds,
    pub dataset: DatasetScore,
    /// Present for the character-level metric only.
    pub factors: Option<FactorReport>,
    pub samples: Vec<SampleReport>,
}

impl EvalReport {
    pub fn new(samples: &[Sample], evaluation: &Evaluation, options: &EvalOptions) -> Self {
        let Thresholds { area_recall_min, area_precision_min, multiline_angle_min } = options.thresholds;
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").to_owned(),
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            metric: options.metric,
            thresholds: ReportThresholds {
                area_recall_min,
                area_precision_min,
                multiline_angle_min,
                iou_min: options.iou.threshold,
            },
            dataset: evaluation.dataset,
            factors: (options.metric == Metric::Tedeval)
                .then(|| FactorReport { counts: evaluation.factors, proportions: evaluation.factors.proportions() }),
            samples: samples
                .iter()
                .zip(&evaluation.samples)
                .map(|(s, r)| SampleReport::new(s, r.score.clone()))
                .collect(),
        }
    }

    /// Pretty-printed JSON with a fixed field order.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report values are always serializable");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

pub fn render_report(report: &EvalReport, path: &Path) -> io::Result<()> {
    fs::write(path, report.to_json())
}
