//! Scene text detection evaluation.
//!
//! Detections are paired with ground-truth words at the instance level
//! (one-to-one, one-to-many and many-to-one, with multiline groups
//! rejected) and then scored per character using pseudo character centers
//! derived from each word box and its length. An IoU baseline is included
//! for comparison.
//!
//! ```
//! use tedeval::{build_match_matrix, score_sample, DetInstance, GtInstance, Quad, Sample, Thresholds};
//!
//! let word = Quad::from_rect(0.0, 0.0, 12.0, 2.0).unwrap();
//! let sample = Sample {
//!     id: "img_1".into(),
//!     gts: vec![GtInstance::new(word, "SCENE").unwrap()],
//!     dets: vec![DetInstance::new(word)],
//! };
//! let matrix = build_match_matrix(&sample, &Thresholds::default());
//! let score = score_sample(&sample, &matrix);
//! assert_eq!((score.recall, score.precision), (1.0, 1.0));
//! ```

pub mod annotation;
pub mod baseline;
pub mod cli;
pub mod evaluate;
pub mod geometry;
pub mod matching;
pub mod overlay;
pub mod report;
pub mod scoring;

pub use annotation::{
    load_dataset, normalize_vertex_order, parse_det_line, parse_gt_line, AnnotationFormat, Dataset, DetInstance,
    GtInstance, LoadError, Sample,
};
pub use baseline::{iou, iou_evaluate, IouParams, IouResult};
pub use evaluate::{evaluate, EvalOptions, Evaluation, Metric};
pub use geometry::{contains_point, intersect_area, is_multiline, pair_angle, Point, Quad};
pub use matching::{build_match_matrix, MatchKind, MatchMatrix, Thresholds};
pub use report::{count_factors, EvalReport, FactorCounts};
pub use scoring::{aggregate_dataset, char_tally, pcc, score_sample, CharTally, DatasetScore, SampleScore};
