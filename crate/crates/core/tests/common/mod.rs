//! Reference implementations used by the integration tests. Nothing here
//! calls into the crate's geometry, matching or scoring code; every quantity
//! is recomputed from plain coordinate lists.

#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;
use tedeval::{DetInstance, GtInstance, Point, Quad, Sample};

pub type Poly = Vec<(f64, f64)>;

pub const EPS: f64 = 1e-6;

pub fn poly(q: &Quad) -> Poly {
    q.vertices().iter().map(|p| (p.x, p.y)).collect()
}

pub fn rect(x1: f64, y1: f64, x2: f64, y2: f64) -> Quad {
    Quad::from_rect(x1, y1, x2, y2).unwrap()
}

/// Rectangle of size `w`×`h` centred at `(cx, cy)` and turned by `deg` degrees.
pub fn rotated_rect(cx: f64, cy: f64, w: f64, h: f64, deg: f64) -> Quad {
    let (s, c) = deg.to_radians().sin_cos();
    let corner = |dx: f64, dy: f64| Point::new(cx + dx * c - dy * s, cy + dx * s + dy * c);
    Quad::new([
        corner(-w / 2.0, -h / 2.0),
        corner(w / 2.0, -h / 2.0),
        corner(w / 2.0, h / 2.0),
        corner(-w / 2.0, h / 2.0),
    ])
    .unwrap()
}

pub fn shoelace(p: &Poly) -> f64 {
    let n = p.len();
    let mut s = 0.0;
    for i in 0..n {
        let (x1, y1) = p[i];
        let (x2, y2) = p[(i + 1) % n];
        s += x1 * y2 - x2 * y1;
    }
    s / 2.0
}

fn side(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
}

/// Sutherland–Hodgman: `subject` clipped to the convex, positively oriented `clip`.
pub fn clip(subject: &Poly, clip: &Poly) -> Poly {
    let mut out = subject.clone();
    for i in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let input = std::mem::take(&mut out);
        for k in 0..input.len() {
            let cur = input[k];
            let prev = input[(k + input.len() - 1) % input.len()];
            let (sc, sp) = (side(a, b, cur), side(a, b, prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    out.push(cross_point(prev, cur, sp, sc));
                }
                out.push(cur);
            } else if sp >= 0.0 {
                out.push(cross_point(prev, cur, sp, sc));
            }
        }
    }
    out
}

fn cross_point(p: (f64, f64), q: (f64, f64), sp: f64, sq: f64) -> (f64, f64) {
    let t = sp / (sp - sq);
    (p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1))
}

/// Intersection area of two convex polygons.
pub fn inter_area(a: &Poly, b: &Poly) -> f64 {
    shoelace(&clip(a, b)).max(0.0)
}

/// Area of `base ∩ (c1 ∪ c2 ∪ …)` by inclusion–exclusion over convex pieces.
pub fn union_cover(base: &Poly, covers: &[Poly]) -> f64 {
    let n = covers.len();
    let mut total = 0.0;
    for mask in 1u32..(1 << n) {
        let mut piece = base.clone();
        for (k, c) in covers.iter().enumerate() {
            if mask & (1 << k) != 0 {
                piece = clip(&piece, c);
            }
        }
        let sign = if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * shoelace(&piece).max(0.0);
    }
    total
}

/// Crossing-number point-in-polygon (even–odd), for any simple polygon.
pub fn crossing_inside(p: &Poly, x: f64, y: f64) -> bool {
    let mut inside = false;
    let n = p.len();
    for i in 0..n {
        let (x1, y1) = p[i];
        let (x2, y2) = p[(i + 1) % n];
        if (y1 > y) != (y2 > y) && x < x1 + (y - y1) * (x2 - x1) / (y2 - y1) {
            inside = !inside;
        }
    }
    inside
}

pub fn boundary_distance(p: &Poly, x: f64, y: f64) -> f64 {
    let n = p.len();
    (0..n)
        .map(|i| {
            let (ax, ay) = p[i];
            let (bx, by) = p[(i + 1) % n];
            let (dx, dy) = (bx - ax, by - ay);
            let t = (((x - ax) * dx + (y - ay) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
            ((x - ax - t * dx).powi(2) + (y - ay - t * dy).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Boundary-inclusive containment for convex, positively oriented polygons.
pub fn convex_contains(p: &Poly, x: f64, y: f64) -> bool {
    let n = p.len();
    (0..n).all(|i| {
        let a = p[i];
        let b = p[(i + 1) % n];
        let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        side(a, b, (x, y)) / len >= -EPS
    })
}

/// Stratified Monte Carlo estimate of the intersection area of two convex quads.
pub fn monte_carlo_inter(a: &Poly, b: &Poly, grid: usize, rng: &mut StdRng) -> (f64, usize) {
    let bounds = |p: &Poly| {
        p.iter().fold((f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY), |acc, &(x, y)| {
            (acc.0.min(x), acc.1.min(y), acc.2.max(x), acc.3.max(y))
        })
    };
    let (ax0, ay0, ax1, ay1) = bounds(a);
    let (bx0, by0, bx1, by1) = bounds(b);
    let (x0, y0, x1, y1) = (ax0.max(bx0), ay0.max(by0), ax1.min(bx1), ay1.min(by1));
    if x0 >= x1 || y0 >= y1 {
        return (0.0, 0);
    }
    let (cw, ch) = ((x1 - x0) / grid as f64, (y1 - y0) / grid as f64);
    let mut hits = 0usize;
    for r in 0..grid {
        for c in 0..grid {
            let x = x0 + (c as f64 + rng.random::<f64>()) * cw;
            let y = y0 + (r as f64 + rng.random::<f64>()) * ch;
            if crossing_inside(a, x, y) && crossing_inside(b, x, y) {
                hits += 1;
            }
        }
    }
    (hits as f64 * cw * ch, hits)
}

/// Convex quad with vertices on an ellipse around `(cx, cy)`.
pub fn random_convex_quad(rng: &mut StdRng, cx: f64, cy: f64, r: f64) -> Quad {
    loop {
        let mut angles: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let gaps_ok = (0..4).all(|k| {
            let next = if k == 3 { angles[0] + std::f64::consts::TAU } else { angles[k + 1] };
            next - angles[k] > 0.3 && next - angles[k] < std::f64::consts::PI - 0.1
        });
        if !gaps_ok {
            continue;
        }
        let (rx, ry) = (r * rng.random_range(0.5..1.5), r * rng.random_range(0.5..1.5));
        let v: Vec<Point> = angles.iter().map(|t| Point::new(cx + rx * t.cos(), cy + ry * t.sin())).collect();
        if let Ok(q) = Quad::new([v[0], v[1], v[2], v[3]]) {
            return q;
        }
    }
}

// ----- straight-from-the-definitions evaluator -----

pub struct OracleScene {
    pub gts: Vec<(Poly, usize, bool)>,
    pub dets: Vec<Poly>,
}

impl OracleScene {
    pub fn from_sample(s: &Sample) -> Self {
        Self {
            gts: s.gts.iter().map(|g| (poly(&g.quad), g.length, g.dont_care)).collect(),
            dets: s.dets.iter().map(|d| poly(&d.quad)).collect(),
        }
    }
}

fn mid(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0)
}

fn centroid(p: &Poly) -> (f64, f64) {
    let n = p.len() as f64;
    (p.iter().map(|v| v.0).sum::<f64>() / n, p.iter().map(|v| v.1).sum::<f64>() / n)
}

/// Character centres: `x + w/l·(k−½)`, `y + h/l·(k−½)` from the left-edge midpoint.
pub fn oracle_pcc(p: &Poly, l: usize) -> Vec<(f64, f64)> {
    let (x, y) = mid(p[0], p[3]);
    let (ex, ey) = mid(p[1], p[2]);
    let (w, h) = (ex - x, ey - y);
    (1..=l)
        .map(|k| {
            let t = k as f64 - 0.5;
            (x + w / l as f64 * t, y + h / l as f64 * t)
        })
        .collect()
}

/// Angle at b's centroid between the rays to a's left-edge midpoint and a's centroid.
pub fn oracle_angle(a: &Poly, b: &Poly) -> f64 {
    let c = centroid(b);
    let p1 = mid(a[0], a[3]);
    let p2 = centroid(a);
    let r1 = (p1.0 - c.0, p1.1 - c.1);
    let r2 = (p2.0 - c.0, p2.1 - c.1);
    let (n1, n2) = ((r1.0 * r1.0 + r1.1 * r1.1).sqrt(), (r2.0 * r2.0 + r2.1 * r2.1).sqrt());
    if n1 < 1e-9 || n2 < 1e-9 {
        return 0.0;
    }
    ((r1.0 * r2.0 + r1.1 * r2.1) / (n1 * n2)).clamp(-1.0, 1.0).acos().to_degrees()
}

fn oracle_multiline(boxes: &[&Poly]) -> bool {
    boxes.iter().any(|a| {
        boxes.iter().any(|b| {
            let t = oracle_angle(a, b);
            t.min(180.0 - t) >= 45.0
        })
    })
}

/// Per-instance recall and precision lists (None for ignored instances).
pub struct OracleScore {
    pub recalls: Vec<Option<f64>>,
    pub precisions: Vec<Option<f64>>,
    pub matrix: Vec<Vec<bool>>,
}

pub fn oracle_score(s: &OracleScene) -> OracleScore {
    const T: f64 = 0.4;
    let (ng, nd) = (s.gts.len(), s.dets.len());
    let rec = |i: usize, j: usize| inter_area(&s.gts[i].0, &s.dets[j]) / shoelace(&s.gts[i].0);
    let prec = |i: usize, j: usize| inter_area(&s.gts[i].0, &s.dets[j]) / shoelace(&s.dets[j]);

    let excluded: Vec<bool> = (0..nd).map(|j| (0..ng).any(|i| s.gts[i].2 && prec(i, j) >= T)).collect();
    let care_g: Vec<usize> = (0..ng).filter(|&i| !s.gts[i].2).collect();
    let care_d: Vec<usize> = (0..nd).filter(|&j| !excluded[j]).collect();

    let mut m = vec![vec![false; nd]; ng];
    for &i in &care_g {
        for &j in &care_d {
            if rec(i, j) >= T && prec(i, j) >= T {
                m[i][j] = true;
            }
        }
    }
    for &i in &care_g {
        let group: Vec<usize> = care_d.iter().copied().filter(|&j| prec(i, j) >= T).collect();
        if group.len() < 2 {
            continue;
        }
        let covers: Vec<Poly> = group.iter().map(|&j| s.dets[j].clone()).collect();
        let refs: Vec<&Poly> = covers.iter().collect();
        if union_cover(&s.gts[i].0, &covers) / shoelace(&s.gts[i].0) >= T && !oracle_multiline(&refs) {
            for &j in &group {
                m[i][j] = true;
            }
        }
    }
    for &j in &care_d {
        let group: Vec<usize> = care_g.iter().copied().filter(|&i| rec(i, j) >= T).collect();
        if group.len() < 2 {
            continue;
        }
        let covers: Vec<Poly> = group.iter().map(|&i| s.gts[i].0.clone()).collect();
        let refs: Vec<&Poly> = covers.iter().collect();
        if union_cover(&s.dets[j], &covers) / shoelace(&s.dets[j]) >= T && !oracle_multiline(&refs) {
            for &i in &group {
                m[i][j] = true;
            }
        }
    }

    // hits[i][j][k]
    let hits: Vec<Vec<Vec<bool>>> = (0..ng)
        .map(|i| {
            let (g, l, dc) = &s.gts[i];
            let centres = if *dc { Vec::new() } else { oracle_pcc(g, *l) };
            (0..nd)
                .map(|j| centres.iter().map(|&(x, y)| m[i][j] && convex_contains(&s.dets[j], x, y)).collect())
                .collect()
        })
        .collect();

    let recalls = (0..ng)
        .map(|i| {
            if s.gts[i].2 {
                return None;
            }
            let l = s.gts[i].1;
            let good = (0..l).filter(|&k| (0..nd).filter(|&j| hits[i][j][k]).count() == 1).count();
            Some(good as f64 / l as f64)
        })
        .collect();
    let precisions = (0..nd)
        .map(|j| {
            if excluded[j] {
                return None;
            }
            let matched: Vec<usize> = (0..ng).filter(|&i| m[i][j]).collect();
            if matched.is_empty() {
                return Some(0.0);
            }
            let num: usize = matched.iter().map(|&i| hits[i][j].iter().filter(|&&h| h).count()).sum();
            let den: usize = matched.iter().map(|&i| s.gts[i].1).sum();
            Some(num as f64 / den as f64)
        })
        .collect();
    OracleScore { recalls, precisions, matrix: m }
}

/// Pooled recall, precision and H-mean over several scenes.
pub fn oracle_dataset(scenes: &[OracleScene]) -> (f64, f64, f64) {
    let scores: Vec<OracleScore> = scenes.iter().map(oracle_score).collect();
    let r: Vec<f64> = scores.iter().flat_map(|s| s.recalls.iter().flatten().copied()).collect();
    let p: Vec<f64> = scores.iter().flat_map(|s| s.precisions.iter().flatten().copied()).collect();
    let recall = if r.is_empty() { 1.0 } else { r.iter().sum::<f64>() / r.len() as f64 };
    let precision = if p.is_empty() {
        if r.is_empty() {
            1.0
        } else {
            0.0
        }
    } else {
        p.iter().sum::<f64>() / p.len() as f64
    };
    let h = if recall + precision == 0.0 { 0.0 } else { 2.0 * recall * precision / (recall + precision) };
    (recall, precision, h)
}

pub fn sample(id: &str, gts: Vec<GtInstance>, dets: Vec<Quad>) -> Sample {
    Sample { id: id.into(), gts, dets: dets.into_iter().map(DetInstance::new).collect() }
}
