use std::collections::BTreeMap;

use super::inside_ccw;
use crate::curation::TileRecord;
use crate::error::{Error, Result};
use crate::geometry::Point2;

pub const MAX_ORACLE_TILES: usize = 16;

fn segment_hit(a: Point2, b: Point2, c: Point2, d: Point2) -> Option<Point2> {
    let r = (b.x - a.x, b.y - a.y);
    let s = (d.x - c.x, d.y - c.y);
    let den = r.0 * s.1 - r.1 * s.0;
    if den.abs() < 1e-12 {
        return None;
    }
    let t = ((c.x - a.x) * s.1 - (c.y - a.y) * s.0) / den;
    let u = ((c.x - a.x) * r.1 - (c.y - a.y) * r.0) / den;
    ((-1e-12..=1.0 + 1e-12).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&u)).then(|| Point2::new(a.x + t * r.0, a.y + t * r.1))
}

/// Common intersection of convex counter-clockwise rings as a vertex list
/// sorted by angle: vertices inside every ring plus pairwise edge crossings
/// inside every ring.
pub fn naive_polygon_intersection(rings: &[&[Point2]]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = Vec::new();
    let inside_all = |p: Point2| rings.iter().all(|r| inside_ccw(r, p));
    for r in rings {
        pts.extend(r.iter().copied().filter(|&p| inside_all(p)));
    }
    for i in 0..rings.len() {
        for j in i + 1..rings.len() {
            let (a, b) = (rings[i], rings[j]);
            for k in 0..a.len() {
                for l in 0..b.len() {
                    if let Some(p) = segment_hit(a[k], a[(k + 1) % a.len()], b[l], b[(l + 1) % b.len()]) {
                        if inside_all(p) {
                            pts.push(p);
                        }
                    }
                }
            }
        }
    }
    let mut uniq: Vec<Point2> = Vec::new();
    for p in pts {
        if !uniq.iter().any(|q| (q.x - p.x).abs() < 1e-7 && (q.y - p.y).abs() < 1e-7) {
            uniq.push(p);
        }
    }
    if uniq.len() < 3 {
        return Vec::new();
    }
    let cx = uniq.iter().map(|p| p.x).sum::<f64>() / uniq.len() as f64;
    let cy = uniq.iter().map(|p| p.y).sum::<f64>() / uniq.len() as f64;
    uniq.sort_by(|a, b| (a.y - cy).atan2(a.x - cx).total_cmp(&(b.y - cy).atan2(b.x - cx)));
    uniq
}

pub(crate) fn ring_area(ring: &[Point2]) -> f64 {
    let n = ring.len();
    (0..n).map(|i| ring[i].x * ring[(i + 1) % n].y - ring[(i + 1) % n].x * ring[i].y).sum::<f64>() / 2.0
}

/// Whether some `size_px` lattice window lies inside every ring, by testing
/// every lattice position inside the rings' common bounding box.
pub fn naive_patchable(rings: &[&[Point2]], gsd: f64, size_px: u32) -> bool {
    let mut x0 = f64::NEG_INFINITY;
    let mut y0 = f64::NEG_INFINITY;
    let mut x1 = f64::INFINITY;
    let mut y1 = f64::INFINITY;
    for r in rings {
        x0 = x0.max(r.iter().map(|p| p.x).fold(f64::INFINITY, f64::min));
        y0 = y0.max(r.iter().map(|p| p.y).fold(f64::INFINITY, f64::min));
        x1 = x1.min(r.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max));
        y1 = y1.min(r.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max));
    }
    let side = f64::from(size_px) * gsd;
    let ix0 = (x0 / gsd).floor() as i64 - 1;
    let iy0 = (y0 / gsd).floor() as i64 - 1;
    let ix1 = ((x1 - side) / gsd).ceil() as i64 + 1;
    let iy1 = ((y1 - side) / gsd).ceil() as i64 + 1;
    for iy in iy0..=iy1 {
        for ix in ix0..=ix1 {
            let (wx, wy) = (ix as f64 * gsd, iy as f64 * gsd);
            let corners = [Point2::new(wx, wy), Point2::new(wx + side, wy), Point2::new(wx + side, wy + side), Point2::new(wx, wy + side)];
            if corners.iter().all(|&c| rings.iter().all(|r| inside_ccw(r, c))) {
                return true;
            }
        }
    }
    false
}

/// Every tile set of size >= 2 whose members pairwise differ in time by more
/// than `min_dt` seconds, share a gsd, and whose common intersection holds a
/// `patch_px` window, mapped to its intersection area. Sets are sorted id
/// lists.
pub fn exhaustive_combinations(tiles: &[TileRecord], min_dt: i64, patch_px: u32) -> Result<BTreeMap<Vec<String>, f64>> {
    if tiles.len() > MAX_ORACLE_TILES {
        return Err(Error::Validation(format!("oracle handles at most {MAX_ORACLE_TILES} tiles, got {}", tiles.len())));
    }
    let n = tiles.len();
    let mut out = BTreeMap::new();
    for mask in 1u32..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let members: Vec<&TileRecord> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| &tiles[i]).collect();
        let gated = members.iter().enumerate().all(|(i, a)| {
            members[i + 1..].iter().all(|b| (a.timestamp - b.timestamp).abs() > min_dt && a.gsd == b.gsd)
        });
        if !gated {
            continue;
        }
        // a set is only patchable if every subset one smaller is
        let subsets_ok = members.len() == 2
            || (0..n).filter(|i| mask & (1 << i) != 0).all(|i| {
                let sub = mask & !(1 << i);
                let mut ids: Vec<String> = (0..n).filter(|j| sub & (1 << j) != 0).map(|j| tiles[j].tile_id.clone()).collect();
                ids.sort();
                out.contains_key(&ids)
            });
        if !subsets_ok {
            continue;
        }
        let rings: Vec<&[Point2]> = members.iter().map(|t| t.footprint.vertices()).collect();
        if !naive_patchable(&rings, members[0].gsd, patch_px) {
            continue;
        }
        let poly = naive_polygon_intersection(&rings);
        let mut ids: Vec<String> = members.iter().map(|t| t.tile_id.clone()).collect();
        ids.sort();
        out.insert(ids, ring_area(&poly));
    }
    Ok(out)
}
