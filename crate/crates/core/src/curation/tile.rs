use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Point2};

/// Characters that would break the patch manifest member syntax.
const RESERVED_ID_CHARS: &[char] = &[':', ',', '[', ']', '\t', '\n', '\r', ' '];

/// One georeferenced acquisition.
///
/// `raster_origin` is the upper-left corner of the tile's raster grid. When
/// the tile manifest does not state it, it defaults to the footprint's
/// bounding box snapped outward onto the gsd lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileRecord {
    pub tile_id: String,
    pub footprint: ConvexPolygon,
    /// UTC seconds since the Unix epoch.
    pub timestamp: i64,
    pub crs: u32,
    pub raster_ref: String,
    pub cloud_fraction: f64,
    pub gsd: f64,
    pub band_count: u32,
    pub raster_origin: Point2,
}

impl TileRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        tile_id: impl Into<String>,
        footprint: ConvexPolygon,
        timestamp: i64,
        crs: u32,
        raster_ref: impl Into<String>,
        cloud_fraction: f64,
        gsd: f64,
        band_count: u32,
        raster_origin: Option<Point2>,
    ) -> Result<Self> {
        let tile_id = tile_id.into();
        validate_tile_id(&tile_id)?;
        if !(0.0..=1.0).contains(&cloud_fraction) {
            return Err(Error::Validation(format!("cloud_fraction {cloud_fraction} outside [0, 1]")));
        }
        if !(gsd.is_finite() && gsd > 0.0) {
            return Err(Error::Validation(format!("gsd must be positive, got {gsd}")));
        }
        if band_count == 0 {
            return Err(Error::Validation("band_count must be at least 1".into()));
        }
        let bb = footprint.bbox();
        let origin = raster_origin.unwrap_or_else(|| {
            Point2::new((bb.min_x / gsd).floor() * gsd, (bb.max_y / gsd).ceil() * gsd)
        });
        let tile = TileRecord {
            tile_id,
            footprint,
            timestamp,
            crs,
            raster_ref: raster_ref.into(),
            cloud_fraction,
            gsd,
            band_count,
            raster_origin: origin,
        };
        tile.check_grid()?;
        Ok(tile)
    }

    /// Raster grid origin in lattice units (column, row-from-north).
    pub fn grid_origin_index(&self) -> (i64, i64) {
        (
            (self.raster_origin.x / self.gsd).round() as i64,
            (self.raster_origin.y / self.gsd).round() as i64,
        )
    }

    /// Raster width and height (pixels) needed to cover the footprint from
    /// the grid origin.
    pub fn grid_extent(&self) -> (u32, u32) {
        let bb = self.footprint.bbox();
        let (ox, oy) = self.grid_origin_index();
        let w = (bb.max_x / self.gsd).ceil() as i64 - ox;
        let h = oy - (bb.min_y / self.gsd).floor() as i64;
        (w.max(1) as u32, h.max(1) as u32)
    }

    fn check_grid(&self) -> Result<()> {
        let o = self.raster_origin;
        let aligned = |v: f64| (v / self.gsd - (v / self.gsd).round()).abs() * self.gsd < 1e-6;
        if !(aligned(o.x) && aligned(o.y)) {
            return Err(Error::Grid(format!(
                "raster origin ({}, {}) is not on the {} m lattice",
                o.x, o.y, self.gsd
            )));
        }
        let bb = self.footprint.bbox();
        if o.x > bb.min_x + 1e-6 || o.y < bb.max_y - 1e-6 {
            return Err(Error::Grid(format!(
                "raster origin ({}, {}) does not cover the footprint's upper-left extent",
                o.x, o.y
            )));
        }
        Ok(())
    }
}

pub fn validate_tile_id(id: &str) -> Result<()> {
    if id.is_empty() {
        return Err(Error::Validation("empty tile_id".into()));
    }
    if let Some(c) = id.chars().find(|c| RESERVED_ID_CHARS.contains(c)) {
        return Err(Error::Validation(format!("tile_id {id:?} contains reserved character {c:?}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp() -> ConvexPolygon {
        ConvexPolygon::rectangle(15.0, 20.0, 3015.0, 3020.0).unwrap()
    }

    #[test]
    fn default_origin_snaps_outward() {
        let t = TileRecord::new("t", fp(), 0, 32633, "t.hsrc", 0.0, 30.0, 4, None).unwrap();
        assert_eq!(t.raster_origin, Point2::new(0.0, 3030.0));
        assert_eq!(t.grid_origin_index(), (0, 101));
        assert_eq!(t.grid_extent(), (101, 101));
    }

    #[test]
    fn validation() {
        let mk = |id: &str, cloud: f64, gsd: f64, bands: u32, origin: Option<Point2>| {
            TileRecord::new(id, fp(), 0, 1, "r", cloud, gsd, bands, origin)
        };
        assert!(mk("a", 0.1, 30.0, 1, None).is_ok());
        assert!(mk("", 0.1, 30.0, 1, None).is_err());
        assert!(mk("a:b", 0.1, 30.0, 1, None).is_err());
        assert!(mk("a", 1.1, 30.0, 1, None).is_err());
        assert!(mk("a", 0.1, 0.0, 1, None).is_err());
        assert!(mk("a", 0.1, 30.0, 0, None).is_err());
        assert!(mk("a", 0.1, 30.0, 1, Some(Point2::new(7.0, 3030.0))).is_err());
        assert!(mk("a", 0.1, 30.0, 1, Some(Point2::new(30.0, 3030.0))).is_err());
        assert!(mk("a", 0.1, 30.0, 1, Some(Point2::new(-30.0, 3060.0))).is_ok());
    }
}
