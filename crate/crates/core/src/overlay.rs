//! SVG overlays: GT quads in red, detections in blue, pseudo character
//! centers as red dots. Don't-care GTs and excluded detections are grey and
//! dashed.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::annotation::Sample;
use crate::geometry::{Point, Quad};
use crate::matching::MatchMatrix;
use crate::scoring::CharTally;

const GT_COLOR: &str = "#d62728";
const DET_COLOR: &str = "#1f77b4";
const PCC_COLOR: &str = "#ff0000";
const IGNORED_COLOR: &str = "#7f7f7f";
const MARGIN: f64 = 10.0;

fn points_attr(q: &Quad) -> String {
    q.vertices().iter().map(|p| format!("{},{}", p.x, p.y)).collect::<Vec<_>>().join(" ")
}

fn canvas(sample: &Sample) -> (Point, Point) {
    let quads = sample.gts.iter().map(|g| &g.quad).chain(sample.dets.iter().map(|d| &d.quad));
    let bounds = quads.map(Quad::bounds).reduce(|(amin, amax), (bmin, bmax)| {
        (Point::new(amin.x.min(bmin.x), amin.y.min(bmin.y)), Point::new(amax.x.max(bmax.x), amax.y.max(bmax.y)))
    });
    match bounds {
        Some((min, max)) => (
            Point::new(min.x - MARGIN, min.y - MARGIN),
            Point::new(max.x - min.x + 2.0 * MARGIN, max.y - min.y + 2.0 * MARGIN),
        ),
        None => (Point::new(0.0, 0.0), Point::new(100.0, 100.0)),
    }
}

/// SVG document for one sample.
pub fn overlay_svg(sample: &Sample, matrix: &MatchMatrix, tally: &CharTally) -> String {
    let (origin, size) = canvas(sample);
    let mut svg = String::new();
    // `write!` into a String cannot fail.
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="{x} {y} {w} {h}">"#,
        x = origin.x,
        y = origin.y,
        w = size.x,
        h = size.y
    );
    let _ = writeln!(svg, "<title>{}</title>", escape(&sample.id));

    let _ = writeln!(svg, r#"<g id="ground-truth" fill="none" stroke-width="1">"#);
    for (i, g) in sample.gts.iter().enumerate() {
        if g.dont_care {
            let _ = writeln!(
                svg,
                r#"<polygon class="gt dont-care" data-index="{i}" points="{}" stroke="{IGNORED_COLOR}" stroke-dasharray="4 2"/>"#,
                points_attr(&g.quad)
            );
        } else {
            let _ = writeln!(
                svg,
                r#"<polygon class="gt" data-index="{i}" points="{}" stroke="{GT_COLOR}"><title>{}</title></polygon>"#,
                points_attr(&g.quad),
                escape(&g.transcription)
            );
        }
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g id="detections" fill="none" stroke-width="1">"#);
    for (j, d) in sample.dets.iter().enumerate() {
        let (class, style) = if matrix.is_excluded(j) {
            ("det excluded", format!(r#"stroke="{IGNORED_COLOR}" stroke-dasharray="4 2""#))
        } else if matrix.gts_of(j).next().is_some() {
            ("det matched", format!(r#"stroke="{DET_COLOR}""#))
        } else {
            ("det unmatched", format!(r#"stroke="{DET_COLOR}" stroke-dasharray="2 2""#))
        };
        let _ =
            writeln!(svg, r#"<polygon class="{class}" data-index="{j}" points="{}" {style}/>"#, points_attr(&d.quad));
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g id="pcc" fill="{PCC_COLOR}">"#);
    for i in 0..sample.gts.len() {
        for (&c, &s) in tally.centers(i).iter().zip(tally.row_sums(i)) {
            let _ = writeln!(
                svg,
                r#"<circle class="pcc" data-gt="{i}" data-hits="{s}" cx="{}" cy="{}" r="1.5"/>"#,
                c.x, c.y
            );
        }
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    svg
}

pub fn render_overlay(sample: &Sample, matrix: &MatchMatrix, tally: &CharTally, path: &Path) -> io::Result<()> {
    fs::write(path, overlay_svg(sample, matrix, tally))
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{DetInstance, GtInstance};
    use crate::matching::{build_match_matrix, Thresholds};
    use crate::scoring::char_tally;

    fn render(sample: &Sample) -> String {
        let m = build_match_matrix(sample, &Thresholds::default());
        let t = char_tally(sample, &m);
        overlay_svg(sample, &m, &t)
    }

    #[test]
    fn empty_scene_is_a_valid_canvas() {
        let svg = render(&Sample::default());
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains(r#"viewBox="0 0 100 100""#));
        assert!(!svg.contains("<circle"));
    }

    #[test]
    fn one_dot_per_character() {
        let a = Quad::from_rect(0.0, 0.0, 10.0, 2.0).unwrap();
        let b = Quad::from_rect(0.0, 5.0, 10.0, 7.0).unwrap();
        let s = Sample {
            id: "x".into(),
            gts: vec![GtInstance::with_length(a, 4), GtInstance::with_length(b, 7), GtInstance::dont_care(b)],
            dets: vec![DetInstance::new(a), DetInstance::new(b)],
        };
        let svg = render(&s);
        assert_eq!(svg.matches("<circle").count(), 11);
        assert_eq!(svg.matches(r#"class="gt dont-care""#).count(), 1);
        assert!(svg.contains(IGNORED_COLOR));
    }

    #[test]
    fn escapes_transcriptions() {
        let a = Quad::from_rect(0.0, 0.0, 10.0, 2.0).unwrap();
        let s = Sample { id: "<id>".into(), gts: vec![GtInstance::new(a, "a<b&c").unwrap()], dets: vec![] };
        let svg = render(&s);
        assert!(svg.contains("a&lt;b&amp;c"));
        assert!(svg.contains("&lt;id&gt;"));
    }
}
