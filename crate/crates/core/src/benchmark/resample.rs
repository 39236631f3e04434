use std::collections::BTreeSet;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::labels::{AggregationMap, LabelRaster, IGNORE};
use crate::error::{Error, Result};
use crate::patch_index::PatchWindow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resampling {
    /// Label cell under each patch pixel center.
    #[default]
    Nearest,
    /// Most frequent mapped class among label cells whose centers fall in
    /// the patch pixel. Only for labels at least as fine as the patch grid.
    Majority,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiLabelTarget {
    pub location_id: String,
    pub classes: BTreeSet<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentationPair {
    pub location_id: String,
    pub mask: Array2<u8>,
}

impl SegmentationPair {
    /// Pixel count per class, ignoring [`IGNORE`].
    pub fn histogram(&self, n_classes: usize) -> Vec<u64> {
        let mut h = vec![0u64; n_classes];
        for &v in self.mask.iter().filter(|&&v| v != IGNORE) {
            h[usize::from(v)] += 1;
        }
        h
    }
}

/// Floor that treats values within rounding noise of an integer as that
/// integer, so cell boundaries resolve the same way at any label scale.
fn snap_floor(u: f64) -> f64 {
    let n = u.round();
    if (u - n).abs() < 1e-9 * n.abs().max(1.0) {
        n
    } else {
        u.floor()
    }
}

/// Label cell index containing world point `(x, y)`, if inside the raster.
fn cell_at(labels: &LabelRaster, x: f64, y: f64) -> Option<(usize, usize)> {
    let h = &labels.raster.header;
    let c = snap_floor((x - h.origin.x) / h.gsd);
    let r = snap_floor((h.origin.y - y) / h.gsd);
    if c < 0.0 || r < 0.0 || c >= h.width as f64 || r >= h.height as f64 {
        return None;
    }
    Some((r as usize, c as usize))
}

fn check_window(window: &PatchWindow, labels: &LabelRaster) -> Result<()> {
    let h = &labels.raster.header;
    if h.crs != window.crs {
        return Err(Error::CrossCrs(window.crs, h.crs));
    }
    let side = window.side();
    let o = window.origin();
    let inside = (o.x - h.origin.x) >= -1e-6
        && (h.origin.y - (o.y + side)) >= -1e-6
        && (o.x + side) <= h.origin.x + h.width as f64 * h.gsd + 1e-6
        && o.y >= h.origin.y - h.height as f64 * h.gsd - 1e-6;
    if !inside {
        return Err(Error::Coverage(format!("label raster does not cover window {}", window.location_id())));
    }
    Ok(())
}

/// Mapped class grid on the window's pixel lattice; [`IGNORE`] for
/// no-data and ignored codes.
pub fn resample(window: &PatchWindow, labels: &LabelRaster, agg: &AggregationMap, method: Resampling) -> Result<Array2<u8>> {
    check_window(window, labels)?;
    let n = window.size_px as usize;
    let g = window.gsd;
    let o = window.origin();
    let top = o.y + window.side();
    let nodata = labels.nodata();
    let value = |code: u16| if Some(code) == nodata { Ok(IGNORE) } else { agg.mask_value(code) };
    let mut out = Array2::from_elem((n, n), IGNORE);
    match method {
        Resampling::Nearest => {
            for r in 0..n {
                let y = top - (r as f64 + 0.5) * g;
                for c in 0..n {
                    let x = o.x + (c as f64 + 0.5) * g;
                    let (lr, lc) = cell_at(labels, x, y).ok_or_else(|| {
                        Error::Coverage(format!("pixel ({r}, {c}) of {} falls outside the label raster", window.location_id()))
                    })?;
                    out[(r, c)] = value(labels.code(lr, lc))?;
                }
            }
        }
        Resampling::Majority => {
            let lg = labels.raster.header.gsd;
            if lg > g + 1e-9 {
                return Err(Error::Validation(format!("majority resampling needs labels at most {g} m, got {lg} m")));
            }
            let lo = labels.raster.header.origin;
            let mut counts = vec![0u32; agg.class_count()];
            for r in 0..n {
                let (y_hi, y_lo) = (top - r as f64 * g, top - (r + 1) as f64 * g);
                let r0 = ((lo.y - y_hi) / lg - 0.5).ceil().max(0.0) as usize;
                let r1 = ((lo.y - y_lo) / lg - 0.5).ceil().min(labels.height() as f64) as usize;
                for c in 0..n {
                    let (x_lo, x_hi) = (o.x + c as f64 * g, o.x + (c + 1) as f64 * g);
                    let c0 = ((x_lo - lo.x) / lg - 0.5).ceil().max(0.0) as usize;
                    let c1 = ((x_hi - lo.x) / lg - 0.5).ceil().min(labels.width() as f64) as usize;
                    counts.iter_mut().for_each(|k| *k = 0);
                    for lr in r0..r1 {
                        for lc in c0..c1 {
                            let v = value(labels.code(lr, lc))?;
                            if v != IGNORE {
                                counts[usize::from(v)] += 1;
                            }
                        }
                    }
                    let best = counts.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)));
                    out[(r, c)] = match best {
                        Some((i, &k)) if k > 0 => i as u8,
                        _ => IGNORE,
                    };
                }
            }
        }
    }
    Ok(out)
}

/// Classes covering more than `min_fraction` of the window's labeled
/// pixels. `None` when no pixel is labeled.
pub fn multilabel_from_raster(
    window: &PatchWindow,
    labels: &LabelRaster,
    agg: &AggregationMap,
    min_fraction: f64,
) -> Result<Option<MultiLabelTarget>> {
    if !(0.0..1.0).contains(&min_fraction) {
        return Err(Error::Validation(format!("min_fraction must be in [0, 1), got {min_fraction}")));
    }
    let grid = resample(window, labels, agg, Resampling::Nearest)?;
    let mut counts = vec![0u64; agg.class_count()];
    for &v in grid.iter().filter(|&&v| v != IGNORE) {
        counts[usize::from(v)] += 1;
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Ok(None);
    }
    let classes = counts
        .iter()
        .enumerate()
        .filter(|&(_, &k)| k > 0 && k as f64 / total as f64 > min_fraction)
        .map(|(i, _)| i as u8)
        .collect();
    Ok(Some(MultiLabelTarget { location_id: window.location_id().to_string(), classes }))
}

pub fn segmentation_mask(
    window: &PatchWindow,
    labels: &LabelRaster,
    agg: &AggregationMap,
    method: Resampling,
) -> Result<SegmentationPair> {
    Ok(SegmentationPair { location_id: window.location_id().to_string(), mask: resample(window, labels, agg, method)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use crate::patch_index::Lattice;
    use crate::raster_io::{DType, Raster, RasterHeader};
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    const NODATA: u16 = 0;

    pub(crate) fn labels(w: u32, h: u32, gsd: f64, origin: Point2, data: Vec<u16>) -> LabelRaster {
        let header = RasterHeader {
            width: w,
            height: h,
            bands: 1,
            dtype: DType::U16,
            nodata: i32::from(NODATA),
            origin,
            gsd,
            crs: 32633,
            wavelengths: None,
        };
        LabelRaster::new(Raster::new(header, data).unwrap(), BTreeMap::new()).unwrap()
    }

    fn agg() -> AggregationMap {
        AggregationMap::parse("classes = [\"a\", \"b\", \"c\"]\n[map]\n\"1\" = 0\n\"2\" = 1\n\"3\" = 2\n\"9\" = \"ignore\"\n").unwrap()
    }

    fn win(size: u32) -> PatchWindow {
        Lattice::new(32633, 30.0, size).window(0, 0)
    }

    #[test]
    fn uniform_raster() {
        let l = labels(50, 50, 100.0, Point2::new(0.0, 5000.0), vec![2; 2500]);
        let t = multilabel_from_raster(&win(128), &l, &agg(), 0.0).unwrap().unwrap();
        assert_eq!(t.classes, BTreeSet::from([1]));
        let m = segmentation_mask(&win(128), &l, &agg(), Resampling::Nearest).unwrap();
        assert!(m.mask.iter().all(|&v| v == 1));
    }

    #[test]
    fn window_spans_38_corine_cells() {
        // 128 px * 30 m = 3840 m over 100 m cells
        let mut data = vec![0u16; 50 * 50];
        for (i, v) in data.iter_mut().enumerate() {
            *v = (i % 3 + 1) as u16;
        }
        let l = labels(50, 50, 100.0, Point2::new(0.0, 3840.0), data);
        let m = resample(&win(128), &l, &agg(), Resampling::Nearest).unwrap();
        let mut cells = BTreeSet::new();
        for r in 0..128 {
            for c in 0..128 {
                let x = (c as f64 + 0.5) * 30.0;
                let y = 3840.0 - (r as f64 + 0.5) * 30.0;
                cells.insert(cell_at(&l, x, y).unwrap());
            }
        }
        let rows: BTreeSet<_> = cells.iter().map(|c| c.0).collect();
        assert_eq!(rows.len(), 39);
        assert!((3840.0f64 / 100.0 - 38.4).abs() < 1e-12);
        assert_eq!(m.dim(), (128, 128));
    }

    #[test]
    fn half_and_half() {
        // 30 m labels, left 64 columns code 1, right 64 code 2
        let data = (0..128 * 128).map(|i| if i % 128 < 64 { 1 } else { 2 }).collect();
        let l = labels(128, 128, 30.0, Point2::new(0.0, 3840.0), data);
        let t = multilabel_from_raster(&win(128), &l, &agg(), 0.0).unwrap().unwrap();
        assert_eq!(t.classes, BTreeSet::from([0, 1]));
        assert_eq!(multilabel_from_raster(&win(128), &l, &agg(), 0.5).unwrap().unwrap().classes, BTreeSet::new());
        let m = segmentation_mask(&win(128), &l, &agg(), Resampling::Nearest).unwrap().mask;
        assert!((0..128).all(|r| m[(r, 63)] == 0 && m[(r, 64)] == 1));
    }

    #[test]
    fn nodata_and_ignore_excluded() {
        let mut data = vec![NODATA; 16];
        data[5] = 9;
        let l = labels(4, 4, 30.0, Point2::new(0.0, 120.0), data.clone());
        assert_eq!(multilabel_from_raster(&win(4), &l, &agg(), 0.0).unwrap(), None);
        data[6] = 3;
        let l = labels(4, 4, 30.0, Point2::new(0.0, 120.0), data);
        let t = multilabel_from_raster(&win(4), &l, &agg(), 0.5).unwrap().unwrap();
        assert_eq!(t.classes, BTreeSet::from([2]));
    }

    #[test]
    fn errors() {
        let l = labels(4, 4, 30.0, Point2::new(0.0, 120.0), vec![1; 16]);
        assert!(matches!(resample(&win(8), &l, &agg(), Resampling::Nearest), Err(Error::Coverage(_))));
        let l = labels(4, 4, 30.0, Point2::new(0.0, 120.0), vec![4; 16]);
        assert!(matches!(resample(&win(4), &l, &agg(), Resampling::Nearest), Err(Error::UnmappedCode(4))));
        let coarse = labels(2, 2, 100.0, Point2::new(0.0, 200.0), vec![1; 4]);
        assert!(resample(&win(4), &coarse, &agg(), Resampling::Majority).is_err());
    }

    #[test]
    fn majority_vote() {
        // 10 m labels under 30 m pixels: each pixel sees 3x3 cells
        let mut data = vec![1u16; 12 * 12];
        for r in 0..3 {
            for c in 0..2 {
                data[r * 12 + c] = 2;
            }
        }
        let l = labels(12, 12, 10.0, Point2::new(0.0, 120.0), data);
        let m = resample(&win(4), &l, &agg(), Resampling::Majority).unwrap();
        assert_eq!(m[(0, 0)], 1);
        assert!(m.iter().skip(1).all(|&v| v == 0));
    }

    proptest! {
        #[test]
        fn upsampling_preserves_mask(
            codes in prop::collection::vec(0u16..4, 36),
            f in 1usize..5,
            ox in 0i64..40,
            oy in 0i64..40,
        ) {
            // 6x6 cells of 70 m; window of 8 px at 30 m
            let base = labels(6, 6, 70.0, Point2::new(ox as f64 - 45.0, 420.0 + oy as f64 - 150.0), codes.clone());
            let mut up = vec![0u16; 36 * f * f];
            for r in 0..6 * f {
                for c in 0..6 * f {
                    up[r * 6 * f + c] = codes[(r / f) * 6 + c / f];
                }
            }
            let fine = labels(6 * f as u32, 6 * f as u32, 70.0 / f as f64, base.raster.header.origin, up);
            let w = Lattice::new(32633, 30.0, 8).window(0, 0);
            let a = resample(&w, &base, &agg(), Resampling::Nearest);
            let b = resample(&w, &fine, &agg(), Resampling::Nearest);
            match (a, b) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
            }
        }
    }
}
