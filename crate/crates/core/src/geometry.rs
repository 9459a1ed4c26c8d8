//! Quadrilateral primitives used by the matcher and the scorer.
//!
//! Coordinates are image pixels: x grows to the right, y grows downward.
//! A [`Quad`] lists its vertices clockwise as seen on screen, which is a
//! positive signed area under the usual shoelace formula.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};

use thiserror::Error;

/// Distance from a quad boundary within which a point still counts as inside.
pub const BOUNDARY_EPS: f64 = 1e-6;

/// Rays shorter than this make the turning angle undefined; such pairs report 0°.
const PIVOT_EPS: f64 = 1e-9;

/// Default multiline rejection angle, in degrees.
pub const DEFAULT_MULTILINE_ANGLE: f64 = 45.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("vertex coordinates must be finite")]
    NonFinite,
    #[error("quad has coincident vertices")]
    CoincidentVertices,
    #[error("quad has zero area")]
    ZeroArea,
    #[error("quad edges cross each other")]
    SelfIntersecting,
    #[error("quad vertices are counter-clockwise in image coordinates")]
    WrongOrientation,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn midpoint(a: Point, b: Point) -> Point {
        Point::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Left-edge midpoint and centroid of a quad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotPoints {
    /// Midpoint of the left edge `v1-v4`.
    pub p1: Point,
    /// Arithmetic mean of the four vertices.
    pub p2: Point,
}

/// A simple quadrilateral with clockwise (on-screen) vertex order, first
/// vertex at the top-left of the text it encloses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    vertices: [Point; 4],
}

/// Twice the signed area of a 4-vertex ring, computed from its diagonals.
///
/// The diagonal form uses the same products for every rotation and for the
/// reversal of the ring, so the magnitude is bit-identical under reordering.
pub(crate) fn doubled_signed_area(v: &[Point; 4]) -> f64 {
    (v[2] - v[0]).cross(v[3] - v[1])
}

/// Validates everything except orientation.
pub(crate) fn check_shape(v: &[Point; 4]) -> Result<(), GeometryError> {
    if !v.iter().all(|p| p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            if v[i] == v[j] {
                return Err(GeometryError::CoincidentVertices);
            }
        }
    }
    if segments_touch(v[0], v[1], v[2], v[3]) || segments_touch(v[1], v[2], v[3], v[0]) {
        return Err(GeometryError::SelfIntersecting);
    }
    if doubled_signed_area(v) == 0.0 {
        return Err(GeometryError::ZeroArea);
    }
    Ok(())
}

impl Quad {
    /// Builds a quad from vertices that are already clockwise on screen.
    pub fn new(vertices: [Point; 4]) -> Result<Self, GeometryError> {
        check_shape(&vertices)?;
        if doubled_signed_area(&vertices) < 0.0 {
            return Err(GeometryError::WrongOrientation);
        }
        Ok(Self { vertices })
    }

    /// Axis-aligned rectangle spanning `(x1, y1)` to `(x2, y2)`, in either corner order.
    pub fn from_rect(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self, GeometryError> {
        let (left, right) = (x1.min(x2), x1.max(x2));
        let (top, bottom) = (y1.min(y2), y1.max(y2));
        Quad::new([Point::new(left, top), Point::new(right, top), Point::new(right, bottom), Point::new(left, bottom)])
    }

    /// Convenience constructor from eight interleaved coordinates.
    pub fn from_coords(c: [f64; 8]) -> Result<Self, GeometryError> {
        Quad::new([Point::new(c[0], c[1]), Point::new(c[2], c[3]), Point::new(c[4], c[5]), Point::new(c[6], c[7])])
    }

    pub fn vertices(&self) -> &[Point; 4] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        doubled_signed_area(&self.vertices) / 2.0
    }

    pub fn centroid(&self) -> Point {
        let v = &self.vertices;
        Point::new((v[0].x + v[1].x + v[2].x + v[3].x) / 4.0, (v[0].y + v[1].y + v[2].y + v[3].y) / 4.0)
    }

    pub fn pivot_points(&self) -> PivotPoints {
        PivotPoints { p1: Point::midpoint(self.vertices[0], self.vertices[3]), p2: self.centroid() }
    }

    /// Midpoint of the right edge `v2-v3`.
    pub fn right_midpoint(&self) -> Point {
        Point::midpoint(self.vertices[1], self.vertices[2])
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        (0..4).map(move |i| (self.vertices[i], self.vertices[(i + 1) % 4]))
    }

    pub fn is_convex(&self) -> bool {
        let v = &self.vertices;
        (0..4).all(|i| {
            let a = v[i];
            let b = v[(i + 1) % 4];
            let c = v[(i + 2) % 4];
            (b - a).cross(c - b) >= 0.0
        })
    }

    /// Axis-aligned bounds as `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        let v = &self.vertices;
        let min = v.iter().fold(v[0], |m, p| Point::new(m.x.min(p.x), m.y.min(p.y)));
        let max = v.iter().fold(v[0], |m, p| Point::new(m.x.max(p.x), m.y.max(p.y)));
        (min, max)
    }

    /// Inside test with an [`BOUNDARY_EPS`]-inclusive boundary.
    pub fn contains(&self, p: Point) -> bool {
        contains_point(self, p)
    }

    /// Applies `f` to each vertex, keeping the order. Fails if the image is invalid.
    pub fn map_vertices(&self, f: impl Fn(Point) -> Point) -> Result<Quad, GeometryError> {
        Quad::new(self.vertices.map(f))
    }

    fn total_cmp(&self, other: &Quad) -> Ordering {
        self.vertices
            .iter()
            .zip(other.vertices.iter())
            .map(|(a, b)| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// True if the closed segments `ab` and `cd` share at least one point.
fn segments_touch(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

fn distance_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 { ((p - a).dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

/// Area of `q`, strictly positive for any valid quad.
pub fn area(q: &Quad) -> f64 {
    q.area()
}

/// True iff `p` lies inside `q` or within [`BOUNDARY_EPS`] of its boundary.
pub fn contains_point(q: &Quad, p: Point) -> bool {
    // Winding number; nonzero means strictly inside.
    let mut winding = 0i32;
    for (a, b) in q.edges() {
        if a.y <= p.y {
            if b.y > p.y && orient(a, b, p) > 0.0 {
                winding += 1;
            }
        } else if b.y <= p.y && orient(a, b, p) < 0.0 {
            winding -= 1;
        }
    }
    winding != 0 || q.edges().any(|(a, b)| distance_to_segment(p, a, b) <= BOUNDARY_EPS)
}

/// Clips `subject` against the convex, positively oriented `clip` ring.
fn clip_convex(subject: &[Point], clip: &[Point; 4]) -> Vec<Point> {
    let mut output: Vec<Point> = subject.to_vec();
    for i in 0..4 {
        if output.is_empty() {
            break;
        }
        let (c0, c1) = (clip[i], clip[(i + 1) % 4]);
        let edge = c1 - c0;
        let side = |p: Point| edge.cross(p - c0);
        let input = std::mem::take(&mut output);
        for k in 0..input.len() {
            let cur = input[k];
            let prev = input[(k + input.len() - 1) % input.len()];
            let (s_cur, s_prev) = (side(cur), side(prev));
            if s_cur >= 0.0 {
                if s_prev < 0.0 {
                    output.push(prev + (cur - prev) * (s_prev / (s_prev - s_cur)));
                }
                output.push(cur);
            } else if s_prev >= 0.0 {
                output.push(prev + (cur - prev) * (s_prev / (s_prev - s_cur)));
            }
        }
    }
    output
}

fn shoelace(ring: &[Point]) -> f64 {
    let n = ring.len();
    (0..n).map(|i| ring[i].cross(ring[(i + 1) % n])).sum::<f64>() / 2.0
}

/// Area of `a ∩ b`. Zero for disjoint quads; exactly symmetric in its arguments.
pub fn intersect_area(a: &Quad, b: &Quad) -> f64 {
    if a.vertices == b.vertices {
        return a.area();
    }
    // Canonical operand order makes the result independent of argument order.
    let (a, b) = if a.total_cmp(b) == Ordering::Greater { (b, a) } else { (a, b) };
    let (amin, amax) = a.bounds();
    let (bmin, bmax) = b.bounds();
    if amax.x <= bmin.x || bmax.x <= amin.x || amax.y <= bmin.y || bmax.y <= amin.y {
        return 0.0;
    }
    let area = if b.is_convex() {
        shoelace(&clip_convex(a.vertices(), b.vertices()))
    } else if a.is_convex() {
        shoelace(&clip_convex(b.vertices(), a.vertices()))
    } else {
        sweep_area(&[a.vertices(), b.vertices()], |c| c[0] > 0 && c[1] > 0)
    };
    area.max(0.0)
}

/// Area of `base ∩ (covers[0] ∪ covers[1] ∪ ...)`.
///
/// Handles overlapping covers and non-convex quads.
pub fn union_coverage_area(base: &Quad, covers: &[&Quad]) -> f64 {
    let mut rings: Vec<&[Point; 4]> = Vec::with_capacity(covers.len() + 1);
    rings.push(base.vertices());
    rings.extend(covers.iter().map(|q| q.vertices()));
    sweep_area(&rings, |c| c[0] > 0 && c[1..].iter().any(|&n| n > 0))
}

/// Area of `q0 ∪ q1 ∪ ...`.
pub fn union_area(quads: &[&Quad]) -> f64 {
    let rings: Vec<&[Point; 4]> = quads.iter().map(|q| q.vertices()).collect();
    sweep_area(&rings, |c| c.iter().any(|&n| n > 0))
}

fn crossing_x(a: Point, b: Point, c: Point, d: Point) -> Option<f64> {
    let r = b - a;
    let s = d - c;
    let denom = r.cross(s);
    if denom == 0.0 {
        return None;
    }
    let t = (c - a).cross(s) / denom;
    let u = (c - a).cross(r) / denom;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then_some(a.x + t * r.x)
}

/// Vertical-slab decomposition of a boolean combination of rings.
///
/// Slab boundaries sit at every vertex and every edge crossing, so inside a
/// slab the covered length is linear in x and the midpoint rule is exact.
/// `covered` receives the per-ring inside flags (0/1, even-odd) at a height.
fn sweep_area(rings: &[&[Point; 4]], covered: impl Fn(&[i32]) -> bool) -> f64 {
    let mut xs: Vec<f64> = rings.iter().flat_map(|r| r.iter().map(|p| p.x)).collect();
    for (i, ra) in rings.iter().enumerate() {
        for rb in &rings[i + 1..] {
            for ea in 0..4 {
                for eb in 0..4 {
                    if let Some(x) = crossing_x(ra[ea], ra[(ea + 1) % 4], rb[eb], rb[(eb + 1) % 4]) {
                        xs.push(x);
                    }
                }
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let mut total = 0.0;
    let mut events: Vec<(f64, usize)> = Vec::new();
    let mut inside = vec![0i32; rings.len()];
    let mut ys: Vec<f64> = Vec::with_capacity(4);
    for w in xs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if x1 <= x0 {
            continue;
        }
        let xm = 0.5 * (x0 + x1);
        events.clear();
        for (ri, ring) in rings.iter().enumerate() {
            ys.clear();
            for e in 0..4 {
                let (a, b) = (ring[e], ring[(e + 1) % 4]);
                if (a.x < xm) != (b.x < xm) {
                    ys.push(a.y + (xm - a.x) * (b.y - a.y) / (b.x - a.x));
                }
            }
            events.extend(ys.iter().map(|&y| (y, ri)));
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        inside.iter_mut().for_each(|c| *c = 0);
        let mut length = 0.0;
        let mut prev = f64::NEG_INFINITY;
        for &(y, ri) in &events {
            if covered(&inside) {
                length += y - prev;
            }
            inside[ri] ^= 1;
            prev = y;
        }
        total += (x1 - x0) * length;
    }
    total
}

/// Angle in degrees at `b`'s centroid between the rays toward `a`'s
/// left-edge midpoint and `a`'s centroid. Always in `[0, 180]`.
///
/// Returns 0 when the pivot coincides with either ray endpoint.
pub fn pair_angle(a: &Quad, b: &Quad) -> f64 {
    let pa = a.pivot_points();
    let pivot = b.centroid();
    let r1 = pa.p1 - pivot;
    let r2 = pa.p2 - pivot;
    if r1.norm() <= PIVOT_EPS || r2.norm() <= PIVOT_EPS {
        return 0.0;
    }
    r1.cross(r2).abs().atan2(r1.dot(r2)).to_degrees()
}

/// True when some ordered pair of `boxes` turns by at least `angle_min`
/// degrees (folded into `[0, 90]` via `min(θ, 180 − θ)`).
///
/// # Panics
///
/// Panics if fewer than two boxes are given.
pub fn is_multiline(boxes: &[Quad], angle_min: f64) -> bool {
    assert!(boxes.len() >= 2, "multiline test needs at least two boxes, got {}", boxes.len());
    boxes.iter().enumerate().any(|(i, a)| {
        boxes.iter().enumerate().any(|(j, b)| {
            if i == j {
                return false;
            }
            let theta = pair_angle(a, b);
            theta.min(180.0 - theta).abs() >= angle_min
        })
    })
}
