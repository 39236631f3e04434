//! Brute-force reference implementations for certifying curation output
//! and metrics. Slow by design; nothing here calls the production
//! geometry, indexing or metric code.

mod combinations;
mod metrics;

use serde::Serialize;

pub use combinations::{exhaustive_combinations, naive_patchable, naive_polygon_intersection, MAX_ORACLE_TILES};
pub use metrics::{naive_f1, naive_miou, naive_normalized_mse, NaiveF1};

use crate::curation::TileRecord;
use crate::geometry::Point2;
use crate::patch_index::{PatchManifest, PatchWindow};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub records: Vec<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub checked_property: String,
    pub checked: usize,
    pub violations: Vec<Violation>,
    pub pass: bool,
}

impl OracleReport {
    fn new(property: &str, checked: usize, violations: Vec<Violation>) -> Self {
        OracleReport { checked_property: property.to_string(), checked, pass: violations.is_empty(), violations }
    }
}

fn window_box(w: &PatchWindow) -> (f64, f64, f64, f64) {
    let side = w.size_px as f64 * w.gsd;
    let x0 = w.lattice_x as f64 * w.gsd;
    let y0 = w.lattice_y as f64 * w.gsd;
    (x0, y0, x0 + side, y0 + side)
}

/// Pairwise open-interior overlap test over every same-CRS pair of records.
pub fn naive_overlap_check(manifest: &PatchManifest) -> OracleReport {
    let recs = &manifest.records;
    let mut violations = Vec::new();
    for i in 0..recs.len() {
        for j in i + 1..recs.len() {
            let (a, b) = (&recs[i].window, &recs[j].window);
            if a.crs != b.crs {
                continue;
            }
            let (ax0, ay0, ax1, ay1) = window_box(a);
            let (bx0, by0, bx1, by1) = window_box(b);
            let ox = ax1.min(bx1) - ax0.max(bx0);
            let oy = ay1.min(by1) - ay0.max(by0);
            if ox > 1e-6 && oy > 1e-6 {
                violations.push(Violation {
                    records: vec![recs[i].location_id(), recs[j].location_id()],
                    detail: format!("interiors overlap by {ox} x {oy} m"),
                });
            }
        }
    }
    OracleReport::new("no two patch windows overlap", recs.len(), violations)
}

/// Closed membership in a counter-clockwise convex ring, with a distance
/// tolerance of 1e-6.
pub(crate) fn inside_ccw(ring: &[Point2], p: Point2) -> bool {
    (0..ring.len()).all(|i| {
        let a = ring[i];
        let b = ring[(i + 1) % ring.len()];
        let (ex, ey) = (b.x - a.x, b.y - a.y);
        let cross = ex * (p.y - a.y) - ey * (p.x - a.x);
        cross >= -1e-6 * (ex * ex + ey * ey).sqrt()
    })
}

/// Every member's footprint covers the window, the member's tile exists
/// with the recorded timestamp, and timestamps are strictly increasing.
pub fn naive_containment_check(manifest: &PatchManifest, tiles: &[TileRecord]) -> OracleReport {
    let by_id: HashMap<&str, &TileRecord> = tiles.iter().map(|t| (t.tile_id.as_str(), t)).collect();
    let mut violations = Vec::new();
    let mut checked = 0;
    for r in &manifest.records {
        let (x0, y0, x1, y1) = window_box(&r.window);
        let corners = [Point2::new(x0, y0), Point2::new(x1, y0), Point2::new(x1, y1), Point2::new(x0, y1)];
        for pair in r.members.windows(2) {
            if pair[0].timestamp >= pair[1].timestamp {
                violations.push(Violation {
                    records: vec![r.location_id()],
                    detail: format!("timestamps {} and {} out of order", pair[0].timestamp, pair[1].timestamp),
                });
            }
        }
        for m in &r.members {
            checked += 1;
            let refs = vec![r.location_id(), m.tile_id.clone()];
            let Some(t) = by_id.get(m.tile_id.as_str()) else {
                violations.push(Violation { records: refs, detail: "unknown tile".into() });
                continue;
            };
            if t.timestamp != m.timestamp {
                violations.push(Violation { records: refs, detail: format!("timestamp {} != tile {}", m.timestamp, t.timestamp) });
            } else if t.crs != r.window.crs {
                violations.push(Violation { records: refs, detail: format!("window EPSG:{} on tile EPSG:{}", r.window.crs, t.crs) });
            } else if let Some(c) = corners.iter().find(|&&c| !inside_ccw(t.footprint.vertices(), c)) {
                violations.push(Violation { records: refs, detail: format!("corner ({}, {}) outside footprint", c.x, c.y) });
            }
        }
    }
    OracleReport::new("every patch lies inside each member footprint", checked, violations)
}
