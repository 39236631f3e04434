//! Planar convex polygon arithmetic in a projected CRS (units are meters).
//!
//! Footprints and their intersections are convex, so intersection is a
//! Sutherland–Hodgman clip of one polygon against the half-planes of the
//! other. All constructors normalize to counter-clockwise order and drop
//! near-duplicate and collinear vertices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertices closer than this are merged.
pub const VERTEX_TOLERANCE: f64 = 1e-6;
/// Turning angles (radians) below this are treated as collinear.
pub const ANGLE_TOLERANCE: f64 = 1e-9;
/// Polygons with a smaller area are numerically degenerate.
pub const MIN_POLYGON_AREA: f64 = 1e-9;
/// Intersections smaller than this are slivers; curation treats them as empty.
pub const SLIVER_AREA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    fn dist(self, o: Point2) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

fn cross(a: Point2, b: Point2) -> f64 {
    a.x * b.y - a.y * b.x
}

fn dot(a: Point2, b: Point2) -> f64 {
    a.x * b.x + a.y * b.y
}

/// Axis-aligned bounds. Overlap tests treat boxes as open sets unless noted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BoundingBox {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Result<Self> {
        let ok = [min_x, min_y, max_x, max_y].iter().all(|v| v.is_finite())
            && min_x <= max_x
            && min_y <= max_y;
        if !ok {
            return Err(Error::Validation(format!(
                "invalid bounding box ({min_x}, {min_y}, {max_x}, {max_y})"
            )));
        }
        Ok(BoundingBox { min_x, min_y, max_x, max_y })
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    /// True when the open interiors share at least one point.
    pub fn interiors_overlap(&self, other: &BoundingBox) -> bool {
        self.min_x < other.max_x
            && other.min_x < self.max_x
            && self.min_y < other.max_y
            && other.min_y < self.max_y
    }

    /// Closed containment of `other` within `self`, with `tol` slack.
    pub fn contains_box(&self, other: &BoundingBox, tol: f64) -> bool {
        other.min_x >= self.min_x - tol
            && other.min_y >= self.min_y - tol
            && other.max_x <= self.max_x + tol
            && other.max_y <= self.max_y + tol
    }

    /// Closed intersection, `None` when the boxes are separated.
    pub fn intersection(&self, other: &BoundingBox) -> Option<BoundingBox> {
        let min_x = self.min_x.max(other.min_x);
        let min_y = self.min_y.max(other.min_y);
        let max_x = self.max_x.min(other.max_x);
        let max_y = self.max_y.min(other.max_y);
        (min_x <= max_x && min_y <= max_y).then_some(BoundingBox { min_x, min_y, max_x, max_y })
    }

    pub fn corners(&self) -> [Point2; 4] {
        [
            Point2::new(self.min_x, self.min_y),
            Point2::new(self.max_x, self.min_y),
            Point2::new(self.max_x, self.max_y),
            Point2::new(self.min_x, self.max_y),
        ]
    }
}

/// A strictly convex polygon, counter-clockwise, without a closing vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl TryFrom<Vec<Point2>> for ConvexPolygon {
    type Error = Error;

    fn try_from(v: Vec<Point2>) -> Result<Self> {
        ConvexPolygon::new(v)
    }
}

impl From<ConvexPolygon> for Vec<Point2> {
    fn from(p: ConvexPolygon) -> Self {
        p.vertices
    }
}

impl ConvexPolygon {
    /// Validates and normalizes a vertex ring. Clockwise input is reversed;
    /// a repeated closing vertex is dropped.
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        if let Some(p) = vertices.iter().find(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Validation(format!("non-finite vertex ({}, {})", p.x, p.y)));
        }
        let mut ring = merge_close(vertices);
        if ring.len() < 3 {
            return Err(Error::DegenerateGeometry(format!(
                "{} distinct vertices, need at least 3",
                ring.len()
            )));
        }
        let signed = signed_area(&ring);
        if signed.abs() < MIN_POLYGON_AREA {
            return Err(Error::DegenerateGeometry(format!("area {signed} below tolerance")));
        }
        if signed < 0.0 {
            ring.reverse();
        }
        let ring = drop_collinear(ring)?;
        if ring.len() < 3 {
            return Err(Error::DegenerateGeometry("all vertices collinear".into()));
        }
        check_convex(&ring)?;
        Ok(ConvexPolygon { vertices: ring })
    }

    /// Axis-aligned rectangle.
    pub fn rectangle(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Result<Self> {
        ConvexPolygon::new(vec![
            Point2::new(min_x, min_y),
            Point2::new(max_x, min_y),
            Point2::new(max_x, max_y),
            Point2::new(min_x, max_y),
        ])
    }

    /// Convex hull of a point cloud (monotone chain).
    pub fn hull(points: &[Point2]) -> Result<Self> {
        let mut pts: Vec<Point2> = points.to_vec();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        pts.dedup();
        if pts.len() < 3 {
            return Err(Error::DegenerateGeometry("hull of fewer than 3 points".into()));
        }
        let mut lower: Vec<Point2> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2
                && cross(lower[lower.len() - 1].sub(lower[lower.len() - 2]), p.sub(lower[lower.len() - 1])) <= 0.0
            {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<Point2> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2
                && cross(upper[upper.len() - 1].sub(upper[upper.len() - 2]), p.sub(upper[upper.len() - 1])) <= 0.0
            {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        ConvexPolygon::new(lower)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    /// Shoelace area; always positive for a valid polygon.
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn bbox(&self) -> BoundingBox {
        let mut b = BoundingBox {
            min_x: f64::INFINITY,
            min_y: f64::INFINITY,
            max_x: f64::NEG_INFINITY,
            max_y: f64::NEG_INFINITY,
        };
        for p in &self.vertices {
            b.min_x = b.min_x.min(p.x);
            b.min_y = b.min_y.min(p.y);
            b.max_x = b.max_x.max(p.x);
            b.max_y = b.max_y.max(p.y);
        }
        b
    }

    /// Closed point membership: points within [`VERTEX_TOLERANCE`] of the
    /// boundary count as inside.
    pub fn contains_point(&self, p: Point2) -> bool {
        self.edges().all(|(a, b)| {
            let e = b.sub(a);
            cross(e, p.sub(a)) >= -VERTEX_TOLERANCE * e.dist(Point2::new(0.0, 0.0))
        })
    }

    /// True iff every corner of `b` lies inside or on the boundary.
    pub fn contains_box(&self, b: &BoundingBox) -> bool {
        b.corners().iter().all(|&c| self.contains_point(c))
    }

    /// Horizontal chord `[left, right]` at height `y`, or `None` when the
    /// line misses the polygon. Heights within tolerance of the extremes are
    /// clamped onto the polygon.
    pub fn chord_at(&self, y: f64) -> Option<(f64, f64)> {
        let bb = self.bbox();
        if y < bb.min_y - VERTEX_TOLERANCE || y > bb.max_y + VERTEX_TOLERANCE {
            return None;
        }
        let y = y.clamp(bb.min_y, bb.max_y);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in self.edges() {
            let (y0, y1) = if a.y <= b.y { (a.y, b.y) } else { (b.y, a.y) };
            if y < y0 || y > y1 {
                continue;
            }
            if y1 == y0 {
                lo = lo.min(a.x.min(b.x));
                hi = hi.max(a.x.max(b.x));
            } else {
                let x = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Cleans a raw clip result; `None` when it collapses below
    /// [`MIN_POLYGON_AREA`].
    fn from_clip(raw: Vec<Point2>) -> Option<Self> {
        ConvexPolygon::new(raw).ok()
    }

    pub fn to_wkt(&self) -> String {
        let mut s = String::from("POLYGON((");
        for (i, p) in self.vertices.iter().chain(self.vertices.first()).enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            s.push_str(&format!("{} {}", p.x, p.y));
        }
        s.push_str("))");
        s
    }

    /// Parses `POLYGON((x y, x y, ...))`. Interior rings are rejected.
    pub fn from_wkt(wkt: &str) -> Result<Self> {
        let t = wkt.trim();
        let upper = t.get(..7).map(|s| s.to_ascii_uppercase());
        if upper.as_deref() != Some("POLYGON") {
            return Err(Error::Wkt(format!("expected POLYGON, got {t:?}")));
        }
        let body = t[7..].trim();
        let inner = body
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .map(str::trim)
            .ok_or_else(|| Error::Wkt(format!("unbalanced parentheses in {t:?}")))?;
        let ring = inner
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(|| Error::Wkt(format!("missing ring in {t:?}")))?;
        if ring.contains('(') || ring.contains(')') {
            return Err(Error::Wkt("multi-ring polygons are not supported".into()));
        }
        let mut pts = Vec::new();
        for pair in ring.split(',') {
            let mut it = pair.split_whitespace();
            let (Some(xs), Some(ys), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::Wkt(format!("bad coordinate pair {pair:?}")));
            };
            let x: f64 = xs.parse().map_err(|_| Error::Wkt(format!("bad number {xs:?}")))?;
            let y: f64 = ys.parse().map_err(|_| Error::Wkt(format!("bad number {ys:?}")))?;
            pts.push(Point2::new(x, y));
        }
        ConvexPolygon::new(pts)
    }
}

impl fmt::Display for ConvexPolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_wkt())
    }
}

fn signed_area(ring: &[Point2]) -> f64 {
    let n = ring.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    0.5 * s
}

fn merge_close(vertices: Vec<Point2>) -> Vec<Point2> {
    let mut out: Vec<Point2> = Vec::with_capacity(vertices.len());
    for p in vertices {
        if out.last().map_or(true, |q| q.dist(p) >= VERTEX_TOLERANCE) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].dist(out[out.len() - 1]) < VERTEX_TOLERANCE {
        out.pop();
    }
    out
}

fn drop_collinear(mut ring: Vec<Point2>) -> Result<Vec<Point2>> {
    loop {
        let n = ring.len();
        if n < 3 {
            return Ok(ring);
        }
        let mut removed = false;
        for i in 0..n {
            let prev = ring[(i + n - 1) % n];
            let cur = ring[i];
            let next = ring[(i + 1) % n];
            let u = cur.sub(prev);
            let v = next.sub(cur);
            let sin = cross(u, v) / (u.dist(Point2::new(0.0, 0.0)) * v.dist(Point2::new(0.0, 0.0)));
            if sin.abs() < ANGLE_TOLERANCE {
                if dot(u, v) < 0.0 {
                    return Err(Error::NonConvex("ring folds back on itself".into()));
                }
                ring.remove(i);
                removed = true;
                break;
            }
        }
        if !removed {
            return Ok(ring);
        }
    }
}

fn check_convex(ring: &[Point2]) -> Result<()> {
    let n = ring.len();
    let mut turning = 0.0;
    for i in 0..n {
        let u = ring[(i + 1) % n].sub(ring[i]);
        let v = ring[(i + 2) % n].sub(ring[(i + 1) % n]);
        let c = cross(u, v);
        if c <= 0.0 {
            return Err(Error::NonConvex(format!(
                "reflex or self-intersecting turn at vertex ({}, {})",
                ring[(i + 1) % n].x,
                ring[(i + 1) % n].y
            )));
        }
        turning += c.atan2(dot(u, v));
    }
    // A ring that winds more than once has only left turns but 4π total.
    if turning > 2.0 * std::f64::consts::PI + 1e-6 {
        return Err(Error::NonConvex("ring winds more than once".into()));
    }
    Ok(())
}

/// Exact convex intersection, `None` when the interiors do not meet.
pub fn intersect_convex(a: &ConvexPolygon, b: &ConvexPolygon) -> Option<ConvexPolygon> {
    if !a.bbox().interiors_overlap(&b.bbox()) {
        return None;
    }
    let mut out: Vec<Point2> = a.vertices.clone();
    for (p, q) in b.edges() {
        if out.is_empty() {
            return None;
        }
        let edge = q.sub(p);
        let side = |x: Point2| cross(edge, x.sub(p));
        let input = std::mem::take(&mut out);
        let n = input.len();
        for i in 0..n {
            let cur = input[i];
            let prev = input[(i + n - 1) % n];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    out.push(segment_cut(prev, cur, sp, sc));
                }
                out.push(cur);
            } else if sp >= 0.0 {
                out.push(segment_cut(prev, cur, sp, sc));
            }
        }
    }
    ConvexPolygon::from_clip(out)
}

fn segment_cut(a: Point2, b: Point2, sa: f64, sb: f64) -> Point2 {
    let t = sa / (sa - sb);
    Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
}

/// Intersection that also drops slivers below [`SLIVER_AREA`].
pub fn intersect_non_sliver(a: &ConvexPolygon, b: &ConvexPolygon) -> Option<ConvexPolygon> {
    intersect_convex(a, b).filter(|p| p.area() >= SLIVER_AREA)
}
