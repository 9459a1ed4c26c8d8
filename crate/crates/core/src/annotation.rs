//! ICDAR 2013 / 2015 ground-truth and detection files.
//!
//! One instance per line, comma separated:
//!
//! * ICDAR 2013 GT: `x1,y1,x2,y2,"transcription"` (axis-aligned rectangle)
//! * ICDAR 2015 GT: `x1,y1,x2,y2,x3,y3,x4,y4,transcription`
//! * detections: the same coordinates without a transcription, optionally
//!   followed by a confidence in `[0, 1]`
//!
//! A dataset is a directory or zip archive of per-image `.txt` files. The
//! image id is the file stem with any `gt_` / `res_` prefix removed.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::geometry::{check_shape, doubled_signed_area, GeometryError, Point, Quad};

/// Transcription marking an unreadable ("don't care") ground-truth region.
pub const DONT_CARE: &str = "###";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnotationFormat {
    Icdar13,
    Icdar15,
}

impl AnnotationFormat {
    fn coord_count(self) -> usize {
        match self {
            AnnotationFormat::Icdar13 => 4,
            AnnotationFormat::Icdar15 => 8,
        }
    }

    fn other(self) -> Self {
        match self {
            AnnotationFormat::Icdar13 => AnnotationFormat::Icdar15,
            AnnotationFormat::Icdar15 => AnnotationFormat::Icdar13,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AnnotationFormat::Icdar13 => "icdar13",
            AnnotationFormat::Icdar15 => "icdar15",
        }
    }
}

/// What went wrong on a single line.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LineError {
    #[error("empty line")]
    Empty,
    #[error("expected {expected} fields, found {found}")]
    FieldCount { expected: &'static str, found: usize },
    #[error("field {index} is not a finite number: {text:?}")]
    Number { index: usize, text: String },
    #[error("line looks like {found} data, but {expected} was requested")]
    FormatMismatch { expected: &'static str, found: &'static str },
    #[error("empty transcription")]
    EmptyTranscription,
    #[error("confidence {0} outside [0, 1]")]
    Confidence(f64),
    #[error("invalid quad: {0}")]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: LineError,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot read archive {}: {source}", path.display())]
    Archive { path: PathBuf, source: zip::result::ZipError },
    #[error("{file} is not valid UTF-8")]
    Encoding { file: String },
    #[error("duplicate image id {id:?} in {}", path.display())]
    DuplicateId { path: PathBuf, id: String },
    #[error("{file}: {source}")]
    Parse { file: String, source: ParseError },
}

impl LoadError {
    /// True when the input is readable but written in the other ICDAR format.
    pub fn is_format_mismatch(&self) -> bool {
        matches!(self, LoadError::Parse { source: ParseError { kind: LineError::FormatMismatch { .. }, .. }, .. })
    }

    /// True for problems reaching the input (missing path, unreadable archive).
    pub fn is_unreadable(&self) -> bool {
        matches!(self, LoadError::Io { .. } | LoadError::Archive { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GtInstance {
    pub quad: Quad,
    pub transcription: String,
    /// Word length in characters.
    pub length: usize,
    pub dont_care: bool,
}

impl GtInstance {
    /// Length counts Unicode scalar values of the trimmed transcription;
    /// interior spaces count.
    pub fn new(quad: Quad, transcription: &str) -> Result<Self, LineError> {
        let transcription = transcription.trim();
        let length = transcription.chars().count();
        if length == 0 {
            return Err(LineError::EmptyTranscription);
        }
        Ok(Self { quad, transcription: transcription.to_owned(), length, dont_care: transcription == DONT_CARE })
    }

    /// Synthetic instance with a placeholder transcription of `length` characters.
    pub fn with_length(quad: Quad, length: usize) -> Self {
        assert!(length > 0, "word length must be positive");
        Self { quad, transcription: "x".repeat(length), length, dont_care: false }
    }

    pub fn dont_care(quad: Quad) -> Self {
        Self { quad, transcription: DONT_CARE.to_owned(), length: DONT_CARE.len(), dont_care: true }
    }

    /// Serializes in `format`. ICDAR 2013 lines use the quad's bounding rectangle.
    pub fn to_line(&self, format: AnnotationFormat) -> String {
        match format {
            AnnotationFormat::Icdar13 => {
                format!("{},\"{}\"", rect_fields(&self.quad), self.transcription)
            }
            AnnotationFormat::Icdar15 => format!("{},{}", quad_fields(&self.quad), self.transcription),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetInstance {
    pub quad: Quad,
    pub confidence: Option<f64>,
}

impl DetInstance {
    pub fn new(quad: Quad) -> Self {
        Self { quad, confidence: None }
    }

    pub fn to_line(&self, format: AnnotationFormat) -> String {
        let coords = match format {
            AnnotationFormat::Icdar13 => rect_fields(&self.quad),
            AnnotationFormat::Icdar15 => quad_fields(&self.quad),
        };
        match self.confidence {
            Some(c) => format!("{coords},{c}"),
            None => coords,
        }
    }
}

fn quad_fields(q: &Quad) -> String {
    q.vertices().iter().map(|p| format!("{},{}", p.x, p.y)).collect::<Vec<_>>().join(",")
}

fn rect_fields(q: &Quad) -> String {
    let (min, max) = q.bounds();
    format!("{},{},{},{}", min.x, min.y, max.x, max.y)
}

/// One image: its ground truth and the detector output for it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sample {
    pub id: String,
    pub gts: Vec<GtInstance>,
    pub dets: Vec<DetInstance>,
}

/// Reorders four vertices clockwise on screen, starting at the top-left of
/// the text.
///
/// Without reading-orientation metadata the longer pair of opposite edges is
/// taken as the text direction. The start is whichever vertex begins one of
/// those long edges (clockwise) and has the smallest `x + y`; ties go to the
/// smaller `y`, then `x`. Idempotent; preserves the vertex multiset and area.
pub fn normalize_vertex_order(points: [Point; 4]) -> Result<Quad, GeometryError> {
    check_shape(&points)?;
    let mut v = points;
    if doubled_signed_area(&v) < 0.0 {
        v.reverse();
    }
    let len = |i: usize| (v[(i + 1) % 4] - v[i]).norm();
    let (even, odd) = (len(0) + len(2), len(1) + len(3));
    let candidates: &[usize] = match even.total_cmp(&odd) {
        Ordering::Greater => &[0, 2],
        Ordering::Less => &[1, 3],
        Ordering::Equal => &[0, 1, 2, 3],
    };
    let key = |i: &usize| (v[*i].x + v[*i].y, v[*i].y, v[*i].x);
    let start = *candidates
        .iter()
        .min_by(|a, b| {
            let (ka, kb) = (key(a), key(b));
            ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(ka.2.total_cmp(&kb.2))
        })
        .expect("candidate list is never empty");
    v.rotate_left(start);
    Quad::new(v)
}

fn strip_line(line: &str) -> &str {
    line.trim_start_matches('\u{feff}').trim_end_matches(['\r', '\n'])
}

fn parse_number(fields: &[&str], index: usize) -> Result<f64, LineError> {
    let text = fields[index].trim();
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(LineError::Number { index, text: text.to_owned() }),
    }
}

fn numeric_prefix(fields: &[&str], count: usize) -> bool {
    fields.len() >= count && (0..count).all(|i| parse_number(fields, i).is_ok())
}

fn mismatch(requested: AnnotationFormat) -> LineError {
    LineError::FormatMismatch { expected: requested.name(), found: requested.other().name() }
}

fn parse_coords(fields: &[&str], format: AnnotationFormat) -> Result<Quad, LineError> {
    let n = format.coord_count();
    let c: Vec<f64> = (0..n).map(|i| parse_number(fields, i)).collect::<Result<_, _>>()?;
    let quad = match format {
        AnnotationFormat::Icdar13 => Quad::from_rect(c[0], c[1], c[2], c[3])?,
        AnnotationFormat::Icdar15 => normalize_vertex_order([
            Point::new(c[0], c[1]),
            Point::new(c[2], c[3]),
            Point::new(c[4], c[5]),
            Point::new(c[6], c[7]),
        ])?,
    };
    Ok(quad)
}

fn unquote(text: &str) -> &str {
    let t = text.trim();
    if t.len() >= 2 && t.starts_with('"') && t.ends_with('"') {
        &t[1..t.len() - 1]
    } else {
        t
    }
}

/// Parses one ground-truth line.
pub fn parse_gt_line(line: &str, format: AnnotationFormat) -> Result<GtInstance, LineError> {
    let line = strip_line(line);
    if line.trim().is_empty() {
        return Err(LineError::Empty);
    }
    let fields: Vec<&str> = line.split(',').collect();
    match format {
        AnnotationFormat::Icdar13 => {
            if fields.len() >= 9 && numeric_prefix(&fields, 8) {
                return Err(mismatch(format));
            }
            if fields.len() < 5 {
                return Err(LineError::FieldCount { expected: "at least 5", found: fields.len() });
            }
        }
        AnnotationFormat::Icdar15 => {
            if fields.len() < 9 || !numeric_prefix(&fields, 8) {
                if fields.len() >= 5 && numeric_prefix(&fields, 4) && fields[4].trim().starts_with('"') {
                    return Err(mismatch(format));
                }
                if fields.len() < 9 {
                    return Err(LineError::FieldCount { expected: "at least 9", found: fields.len() });
                }
            }
        }
    }
    let quad = parse_coords(&fields, format)?;
    let rest = fields[format.coord_count()..].join(",");
    let text = match format {
        AnnotationFormat::Icdar13 => unquote(&rest),
        AnnotationFormat::Icdar15 => rest.trim(),
    };
    GtInstance::new(quad, text)
}

/// Parses one detection line.
pub fn parse_det_line(line: &str, format: AnnotationFormat) -> Result<DetInstance, LineError> {
    let line = strip_line(line);
    if line.trim().is_empty() {
        return Err(LineError::Empty);
    }
    let fields: Vec<&str> = line.split(',').collect();
    let n = format.coord_count();
    let other = format.other().coord_count();
    if fields.len() != n && fields.len() != n + 1 {
        if (fields.len() == other || fields.len() == other + 1) && numeric_prefix(&fields, fields.len()) {
            return Err(mismatch(format));
        }
        let expected = match format {
            AnnotationFormat::Icdar13 => "4 or 5",
            AnnotationFormat::Icdar15 => "8 or 9",
        };
        return Err(LineError::FieldCount { expected, found: fields.len() });
    }
    let quad = parse_coords(&fields, format)?;
    let confidence = if fields.len() == n + 1 {
        let c = parse_number(&fields, n)?;
        if !(0.0..=1.0).contains(&c) {
            return Err(LineError::Confidence(c));
        }
        Some(c)
    } else {
        None
    };
    Ok(DetInstance { quad, confidence })
}

fn parse_lines<T>(text: &str, parse: impl Fn(&str) -> Result<T, LineError>) -> Result<Vec<T>, ParseError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !strip_line(l).trim().is_empty())
        .map(|(i, l)| parse(l).map_err(|kind| ParseError { line: i + 1, kind }))
        .collect()
}

/// Parses a whole ground-truth file. Blank lines are skipped.
pub fn parse_gt_file(text: &str, format: AnnotationFormat) -> Result<Vec<GtInstance>, ParseError> {
    parse_lines(text, |l| parse_gt_line(l, format))
}

/// Parses a whole detection file. Blank lines are skipped.
pub fn parse_det_file(text: &str, format: AnnotationFormat) -> Result<Vec<DetInstance>, ParseError> {
    parse_lines(text, |l| parse_det_line(l, format))
}

/// Parsed samples plus non-fatal problems found while loading.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub warnings: Vec<String>,
}

/// Image id for a file name: stem without `gt_` / `res_` prefix.
pub fn image_id(file_name: &str) -> Option<String> {
    let name = Path::new(file_name).file_name()?.to_str()?;
    let stem = name.strip_suffix(".txt").or_else(|| name.strip_suffix(".TXT"))?;
    let id = stem.strip_prefix("gt_").or_else(|| stem.strip_prefix("res_")).unwrap_or(stem);
    (!id.is_empty()).then(|| id.to_owned())
}

/// Orders ids so that embedded numbers compare numerically (`img_2` < `img_10`).
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn chunks(s: &str) -> Vec<(bool, &str)> {
        let mut out = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for i in 1..=bytes.len() {
            if i == bytes.len() || bytes[i].is_ascii_digit() != bytes[start].is_ascii_digit() {
                out.push((bytes[start].is_ascii_digit(), &s[start..i]));
                start = i;
            }
        }
        out
    }
    let (ca, cb) = (chunks(a), chunks(b));
    for ((da, sa), (db, sb)) in ca.iter().zip(cb.iter()) {
        let ord = if *da && *db {
            let (ta, tb) = (sa.trim_start_matches('0'), sb.trim_start_matches('0'));
            ta.len().cmp(&tb.len()).then_with(|| ta.cmp(tb))
        } else {
            sa.cmp(sb)
        };
        if ord.is_ne() {
            return ord;
        }
    }
    ca.len().cmp(&cb.len()).then_with(|| a.cmp(b))
}

fn decode(bytes: Vec<u8>, file: &str) -> Result<String, LoadError> {
    String::from_utf8(bytes).map_err(|_| LoadError::Encoding { file: file.to_owned() })
}

/// Reads every `.txt` entry of a directory or zip archive as `(id, file name, text)`.
fn read_source(path: &Path) -> Result<Vec<(String, String, String)>, LoadError> {
    let io_err = |source| LoadError::Io { path: path.to_path_buf(), source };
    let mut files = Vec::new();
    if path.is_dir() {
        for entry in fs::read_dir(path).map_err(io_err)? {
            let entry = entry.map_err(io_err)?;
            if !entry.file_type().map_err(io_err)?.is_file() {
                continue;
            }
            let name = entry.file_name().to_string_lossy().into_owned();
            if let Some(id) = image_id(&name) {
                let bytes = fs::read(entry.path()).map_err(io_err)?;
                files.push((id, name.clone(), decode(bytes, &name)?));
            }
        }
    } else {
        let file = fs::File::open(path).map_err(io_err)?;
        let archive_err = |source| LoadError::Archive { path: path.to_path_buf(), source };
        let mut archive = zip::ZipArchive::new(file).map_err(archive_err)?;
        for i in 0..archive.len() {
            let mut entry = archive.by_index(i).map_err(archive_err)?;
            if entry.is_dir() {
                continue;
            }
            let name = entry.name().map_err(archive_err)?.into_owned();
            if let Some(id) = image_id(&name) {
                let mut bytes = Vec::new();
                entry.read_to_end(&mut bytes).map_err(io_err)?;
                files.push((id, name.clone(), decode(bytes, &name)?));
            }
        }
    }
    Ok(files)
}

fn index_source(path: &Path) -> Result<BTreeMap<String, (String, String)>, LoadError> {
    let mut map = BTreeMap::new();
    for (id, name, text) in read_source(path)? {
        if map.insert(id.clone(), (name, text)).is_some() {
            return Err(LoadError::DuplicateId { path: path.to_path_buf(), id });
        }
    }
    Ok(map)
}

/// Loads matching GT and detection files from directories or zip archives.
///
/// Produces one sample per GT file, ordered by [`natural_cmp`] on the id. A
/// missing detection file yields an empty detection list; detection files
/// without a GT counterpart are skipped with a warning.
pub fn load_dataset(gt_source: &Path, det_source: &Path, format: AnnotationFormat) -> Result<Dataset, LoadError> {
    let gts = index_source(gt_source)?;
    let mut dets = index_source(det_source)?;
    let mut ids: Vec<&String> = gts.keys().collect();
    ids.sort_by(|a, b| natural_cmp(a, b));

    let mut dataset = Dataset::default();
    for id in ids {
        let (gt_name, gt_text) = &gts[id];
        let gt = parse_gt_file(gt_text, format).map_err(|source| LoadError::Parse { file: gt_name.clone(), source })?;
        let det = match dets.remove(id) {
            Some((det_name, det_text)) => {
                parse_det_file(&det_text, format).map_err(|source| LoadError::Parse { file: det_name, source })?
            }
            None => Vec::new(),
        };
        dataset.samples.push(Sample { id: id.clone(), gts: gt, dets: det });
    }
    let mut orphans: Vec<_> = dets.into_values().map(|(name, _)| name).collect();
    orphans.sort_by(|a, b| natural_cmp(a, b));
    dataset
        .warnings
        .extend(orphans.into_iter().map(|name| format!("detection file {name} has no ground truth; skipped")));
    Ok(dataset)
}
