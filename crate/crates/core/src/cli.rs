//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when inputs fail to parse or evaluate,
//! 2 for invocation problems (bad flags, unreadable paths, wrong `--format`).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;

use crate::annotation::{load_dataset, AnnotationFormat};
use crate::baseline::IouParams;
use crate::evaluate::{evaluate, EvalError, EvalOptions, Metric};
use crate::matching::Thresholds;
use crate::overlay::render_overlay;
use crate::report::{render_report, EvalReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "tedeval", version, about = "Evaluate scene text detections against ICDAR ground truth")]
pub struct Args {
    /// Ground-truth directory or zip archive
    #[arg(long, value_name = "PATH")]
    pub gt: PathBuf,

    /// Detection directory or zip archive
    #[arg(long, value_name = "PATH")]
    pub det: PathBuf,

    /// Annotation format of both inputs
    #[arg(long, value_enum)]
    pub format: AnnotationFormat,

    #[arg(long, value_enum, default_value_t = Metric::Tedeval)]
    pub metric: Metric,

    #[arg(long, value_name = "R", default_value_t = Thresholds::default().area_recall_min)]
    pub area_recall_min: f64,

    #[arg(long, value_name = "P", default_value_t = Thresholds::default().area_precision_min)]
    pub area_precision_min: f64,

    /// Multiline rejection angle in degrees
    #[arg(long, value_name = "D", default_value_t = Thresholds::default().multiline_angle_min)]
    pub multiline_angle: f64,

    /// Write a JSON report here
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,

    /// Write one SVG overlay per sample into this directory
    #[arg(long, value_name = "PATH")]
    pub overlay_dir: Option<PathBuf>,

    /// Print one score line per sample
    #[arg(long)]
    pub per_sample: bool,

    /// Worker threads (default: available processors)
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
}

impl Args {
    pub fn options(&self) -> EvalOptions {
        EvalOptions {
            metric: self.metric,
            thresholds: Thresholds {
                area_recall_min: self.area_recall_min,
                area_precision_min: self.area_precision_min,
                multiline_angle_min: self.multiline_angle,
            },
            iou: IouParams::default(),
            jobs: self.jobs,
        }
    }
}

/// Runs the tool; returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&args, out, err) {
        Ok(()) => EXIT_OK,
        Err((code, message)) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

fn execute(args: &Args, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), (i32, String)> {
    let options = args.options();
    options.thresholds.validate().map_err(|e| (EXIT_USAGE, e.to_string()))?;
    if args.jobs == Some(0) {
        return Err((EXIT_USAGE, "--jobs must be at least 1".into()));
    }
    for (flag, path) in [("--gt", &args.gt), ("--det", &args.det)] {
        if !path.exists() {
            return Err((EXIT_USAGE, format!("{flag}: {} does not exist", path.display())));
        }
    }

    let dataset = load_dataset(&args.gt, &args.det, args.format).map_err(|e| {
        let code = if e.is_unreadable() || e.is_format_mismatch() { EXIT_USAGE } else { EXIT_FAILURE };
        let hint = if e.is_format_mismatch() { " (check --format)" } else { "" };
        (code, format!("{e}{hint}"))
    })?;
    for w in &dataset.warnings {
        let _ = writeln!(err, "warning: {w}");
    }

    let evaluation = evaluate(&dataset.samples, &options).map_err(|e| match e {
        EvalError::Thresholds(_) | EvalError::NoWorkers => (EXIT_USAGE, e.to_string()),
        EvalError::Score(_) => (EXIT_FAILURE, format!("{e} (no ground-truth files in {})", args.gt.display())),
        EvalError::Pool(_) => (EXIT_FAILURE, e.to_string()),
    })?;
    let report = EvalReport::new(&dataset.samples, &evaluation, &options);
    for s in &report.samples {
        let (g, d) = (s.non_convex_gts.len(), s.non_convex_dets.len());
        if g + d > 0 {
            let _ = writeln!(err, "warning: {}: non-convex quads ({g} ground truth, {d} detections)", s.id);
        }
    }

    if let Some(path) = &args.report {
        render_report(&report, path).map_err(|e| (EXIT_FAILURE, format!("--report {}: {e}", path.display())))?;
    }
    if let Some(dir) = &args.overlay_dir {
        let fail = |e: std::io::Error| (EXIT_FAILURE, format!("--overlay-dir {}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(fail)?;
        for (s, r) in dataset.samples.iter().zip(&evaluation.samples) {
            render_overlay(s, &r.matrix, &r.tally, &dir.join(format!("{}.svg", s.id))).map_err(fail)?;
        }
    }

    print_summary(out, &report, args.per_sample).map_err(|e| (EXIT_FAILURE, e.to_string()))
}

fn print_summary(out: &mut dyn Write, report: &EvalReport, per_sample: bool) -> std::io::Result<()> {
    let d = &report.dataset;
    if per_sample {
        for s in &report.samples {
            writeln!(out, "{}\tR={:.4} P={:.4} H={:.4}", s.id, s.score.recall, s.score.precision, s.score.hmean)?;
        }
    }
    writeln!(out, "metric:     {}", report.metric.name())?;
    writeln!(out, "samples:    {}", d.samples)?;
    writeln!(out, "gt:         {}", d.gt_count)?;
    writeln!(out, "detections: {}", d.det_count)?;
    writeln!(out, "recall:     {:.4}", d.recall)?;
    writeln!(out, "precision:  {:.4}", d.precision)?;
    writeln!(out, "hmean:      {:.4}", d.hmean)?;
    if let Some(f) = &report.factors {
        let (c, p) = (&f.counts, &f.proportions);
        writeln!(out, "successful detections: {}", c.successful_detections)?;
        writeln!(out, "granularity:          {} ({:.2}%)", c.granularity, 100.0 * p.granularity)?;
        writeln!(out, "completeness:         {} ({:.2}%)", c.completeness, 100.0 * p.completeness)?;
        writeln!(out, "multiline rejections: {} ({:.2}%)", c.multiline_rejections, 100.0 * p.multiline)?;
    }
    writeln!(out, "R={:.4} P={:.4} H={:.4}", d.recall, d.precision, d.hmean)
}
