//! Lattice-aligned patch windows and greedy non-overlapping placement.
//!
//! Window origins sit on the pixel lattice of their gsd, anchored at the
//! projected-coordinate origin. Placement scans rows south to north and,
//! within a row, west to east, taking every window that fits inside the
//! polygon (closed containment) and whose interior misses everything already
//! committed or placed (open interiors).

mod index;
mod manifest;

pub use index::SpatialIndex;
pub use manifest::{
    format_record, parse_record, read_manifest, write_manifest, ManifestSummary, Member, PatchManifest, PatchRecord,
};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, ConvexPolygon, Point2};

/// Default patch edge length in pixels.
pub const DEFAULT_PATCH_PX: u32 = 128;

/// The pixel lattice windows are placed on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub crs: u32,
    pub gsd: f64,
    pub size_px: u32,
}

impl Lattice {
    pub fn new(crs: u32, gsd: f64, size_px: u32) -> Self {
        Lattice { crs, gsd, size_px }
    }

    /// Window edge length in meters.
    pub fn side(&self) -> f64 {
        f64::from(self.size_px) * self.gsd
    }

    pub fn window(&self, lattice_x: i64, lattice_y: i64) -> PatchWindow {
        PatchWindow { crs: self.crs, gsd: self.gsd, size_px: self.size_px, lattice_x, lattice_y }
    }
}

/// A square window whose lower-left corner is `(lattice_x, lattice_y) * gsd`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchWindow {
    pub crs: u32,
    pub gsd: f64,
    pub size_px: u32,
    pub lattice_x: i64,
    pub lattice_y: i64,
}

impl PatchWindow {
    /// Lower-left corner in meters.
    pub fn origin(&self) -> Point2 {
        Point2::new(self.lattice_x as f64 * self.gsd, self.lattice_y as f64 * self.gsd)
    }

    pub fn side(&self) -> f64 {
        f64::from(self.size_px) * self.gsd
    }

    pub fn bbox(&self) -> BoundingBox {
        let o = self.origin();
        let s = self.side();
        BoundingBox { min_x: o.x, min_y: o.y, max_x: o.x + s, max_y: o.y + s }
    }

    pub fn location_id(&self) -> LocationId {
        LocationId(*self)
    }

    /// Rebuilds a window from metric coordinates, rejecting off-lattice origins.
    pub fn from_origin(crs: u32, origin_x: f64, origin_y: f64, size_px: u32, gsd: f64) -> Result<Self> {
        if !(gsd.is_finite() && gsd > 0.0) || size_px == 0 {
            return Err(Error::Validation(format!("invalid lattice gsd={gsd} size_px={size_px}")));
        }
        let snap = |v: f64| -> Result<i64> {
            let k = (v / gsd).round();
            if ((k * gsd) - v).abs() > 1e-6 {
                return Err(Error::Validation(format!("origin {v} is not a multiple of gsd {gsd}")));
            }
            Ok(k as i64)
        };
        Ok(PatchWindow { crs, gsd, size_px, lattice_x: snap(origin_x)?, lattice_y: snap(origin_y)? })
    }
}

/// Deterministic location key: `{crs}_{gsd}_{x}_{y}_{size_px}` with x and y
/// in lattice units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocationId(PatchWindow);

impl fmt::Display for LocationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = &self.0;
        write!(f, "{}_{}_{}_{}_{}", w.crs, w.gsd, w.lattice_x, w.lattice_y, w.size_px)
    }
}

impl LocationId {
    pub fn parse(s: &str) -> Result<PatchWindow> {
        let bad = || Error::Validation(format!("malformed location_id {s:?}"));
        let parts: Vec<&str> = s.split('_').collect();
        let [crs, gsd, x, y, size] = parts.as_slice() else {
            return Err(bad());
        };
        Ok(PatchWindow {
            crs: crs.parse().map_err(|_| bad())?,
            gsd: gsd.parse().map_err(|_| bad())?,
            lattice_x: x.parse().map_err(|_| bad())?,
            lattice_y: y.parse().map_err(|_| bad())?,
            size_px: size.parse().map_err(|_| bad())?,
        })
    }
}

/// Closed containment of the window in the polygon.
pub fn contains_window(p: &ConvexPolygon, w: &PatchWindow) -> bool {
    p.contains_box(&w.bbox())
}

/// Every window that fits inside `polygon` and misses `index`, in row-major
/// order. The returned windows are mutually disjoint.
pub fn patchify(polygon: &ConvexPolygon, lattice: &Lattice, index: &SpatialIndex) -> Vec<PatchWindow> {
    let mut out = Vec::new();
    scan(polygon, lattice, Some(index), usize::MAX, &mut out);
    out
}

/// Whether at least one lattice window fits inside the polygon.
pub fn has_window(polygon: &ConvexPolygon, lattice: &Lattice) -> bool {
    find_window(polygon, lattice).is_some()
}

/// The first window in row-major order that fits inside the polygon.
pub fn find_window(polygon: &ConvexPolygon, lattice: &Lattice) -> Option<PatchWindow> {
    let mut out = Vec::new();
    scan(polygon, lattice, None, 1, &mut out);
    out.pop()
}

fn scan(
    polygon: &ConvexPolygon,
    lattice: &Lattice,
    index: Option<&SpatialIndex>,
    limit: usize,
    out: &mut Vec<PatchWindow>,
) {
    let g = lattice.gsd;
    let side = lattice.side();
    let step = i64::from(lattice.size_px);
    let bb = polygon.bbox();
    if bb.width() < side - 1e-6 || bb.height() < side - 1e-6 {
        return;
    }
    // Committed boxes near the polygon, swept upward by their lower edge.
    let mut pending: Vec<BoundingBox> = index.map(|ix| ix.overlapping_boxes(&bb).collect()).unwrap_or_default();
    pending.sort_by(|a, b| b.min_y.total_cmp(&a.min_y));
    let mut active: Vec<BoundingBox> = Vec::new();
    let col_lo = ((bb.min_x - 1e-6) / g).floor() as i64;
    let col_hi = ((bb.max_x - side + 1e-6) / g).ceil() as i64;

    let row_lo = ((bb.min_y - 1e-6) / g).ceil() as i64 - 1;
    let row_hi = ((bb.max_y - side + 1e-6) / g).floor() as i64 + 1;
    let mut iy = row_lo;
    while iy <= row_hi {
        let y0 = iy as f64 * g;
        let y1 = y0 + side;
        while pending.last().is_some_and(|b| b.min_y < y1) {
            active.push(pending.pop().expect("non-empty"));
        }
        active.retain(|b| b.max_y > y0);
        let placed_before = out.len();

        // Chords give a candidate column range; a one-pixel margin on each
        // side is then trimmed with the exact corner test.
        if let (Some((l0, r0)), Some((l1, r1))) = (polygon.chord_at(y0), polygon.chord_at(y1)) {
            let lo = l0.max(l1);
            let hi = r0.min(r1);
            if hi - lo >= side - 1e-3 {
                let mut ix_min = ((lo - 1e-6) / g).ceil() as i64 - 1;
                let mut ix_max = ((hi - side + 1e-6) / g).floor() as i64 + 1;
                while ix_min <= ix_max && !contains_window(polygon, &lattice.window(ix_min, iy)) {
                    ix_min += 1;
                }
                while ix_max >= ix_min && !contains_window(polygon, &lattice.window(ix_max, iy)) {
                    ix_max -= 1;
                }
                let mut ix = ix_min;
                while ix <= ix_max {
                    let w = lattice.window(ix, iy);
                    let wb = w.bbox();
                    match blocker(&active, &wb) {
                        Some(b) => ix = ((b.max_x / g).ceil() as i64).max(ix + 1),
                        None => {
                            out.push(w);
                            if out.len() >= limit {
                                return;
                            }
                            active.push(wb);
                            ix += step;
                        }
                    }
                }
            }
        }

        // A row that placed nothing and is blocked across the whole
        // bounding box stays blocked until the lowest of those blockers
        // ends, so the rows below that edge can be skipped.
        let mut next = iy + 1;
        if out.len() == placed_before && !active.is_empty() {
            let mut ix = col_lo;
            let mut until = f64::INFINITY;
            while ix <= col_hi {
                match blocker(&active, &lattice.window(ix, iy).bbox()) {
                    Some(b) => {
                        until = until.min(b.max_y);
                        ix = ((b.max_x / g).ceil() as i64).max(ix + 1);
                    }
                    None => {
                        until = f64::NEG_INFINITY;
                        break;
                    }
                }
            }
            if until.is_finite() {
                next = next.max((until / g - 1e-6).ceil() as i64);
            }
        }
        iy = next;
    }
}

/// The overlapping box reaching furthest right; every column up to its right
/// edge is blocked by it in this row.
fn blocker(boxes: &[BoundingBox], w: &BoundingBox) -> Option<BoundingBox> {
    boxes.iter().filter(|b| b.interiors_overlap(w)).copied().max_by(|a, b| a.max_x.total_cmp(&b.max_x))
}
