use std::path::Path;

use serde::Deserialize;

use super::format::RasterHeader;
use crate::error::{Error, Result};

/// Number of bands in a full EnMAP-like L2A acquisition.
pub const ENMAP_SOURCE_BANDS: usize = 224;

/// Stand-in water-absorption exclusions for the default mask (inclusive,
/// 0-based). Two 11-band windows near 1400 nm and 1900 nm; replace with the
/// product's real band table when available.
pub const ENMAP_STANDIN_EXCLUDED: [(usize, usize); 2] = [(129, 139), (173, 183)];

/// Selection of source bands. `keep[i]` retains band `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandMask {
    pub keep: Vec<bool>,
    pub name: String,
}

impl BandMask {
    pub fn new(keep: Vec<bool>, name: impl Into<String>) -> Result<Self> {
        if !keep.iter().any(|&k| k) {
            return Err(Error::Validation("band mask keeps no bands".into()));
        }
        Ok(BandMask { keep, name: name.into() })
    }

    pub fn identity(bands: usize) -> Self {
        BandMask { keep: vec![true; bands.max(1)], name: format!("all-{bands}") }
    }

    /// Keeps everything except the inclusive index ranges in `excluded`.
    pub fn excluding(bands: usize, excluded: &[(usize, usize)], name: impl Into<String>) -> Result<Self> {
        let mut keep = vec![true; bands];
        for &(lo, hi) in excluded {
            if lo > hi || hi >= bands {
                return Err(Error::Validation(format!("excluded range {lo}-{hi} outside 0..{bands}")));
            }
            keep[lo..=hi].iter_mut().for_each(|k| *k = false);
        }
        BandMask::new(keep, name)
    }

    /// 224 -> 202 bands using the stand-in exclusion table.
    pub fn enmap_default() -> Self {
        BandMask::excluding(ENMAP_SOURCE_BANDS, &ENMAP_STANDIN_EXCLUDED, "enmap-standin-202").expect("static mask")
    }

    pub fn len(&self) -> usize {
        self.keep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keep.is_empty()
    }

    pub fn kept_count(&self) -> usize {
        self.keep.iter().filter(|&&k| k).count()
    }

    pub fn kept_indices(&self) -> Vec<usize> {
        self.keep.iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| i).collect()
    }

    /// The mask equivalent to applying `self` and then `then` to the result.
    pub fn compose(&self, then: &BandMask) -> Result<BandMask> {
        if then.len() != self.kept_count() {
            return Err(Error::Shape(format!(
                "second mask has {} entries, first keeps {}",
                then.len(),
                self.kept_count()
            )));
        }
        let mut keep = vec![false; self.len()];
        for (pos, src) in self.kept_indices().into_iter().enumerate() {
            keep[src] = then.keep[pos];
        }
        BandMask::new(keep, format!("{}+{}", self.name, then.name))
    }

    /// Loads a TOML mask file:
    ///
    /// ```toml
    /// name = "enmap-standin-202"
    /// bands = 224
    /// exclude = ["129-139", "173-183", 200]
    /// ```
    pub fn load(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Item {
            One(usize),
            Range(String),
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct File {
            name: String,
            bands: usize,
            #[serde(default)]
            exclude: Vec<Item>,
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let f: File = toml::from_str(&text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
        let mut ranges = Vec::new();
        for item in f.exclude {
            match item {
                Item::One(i) => ranges.push((i, i)),
                Item::Range(s) => {
                    let parsed = s.split_once('-').and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
                    ranges.push(parsed.ok_or_else(|| Error::Validation(format!("bad band range {s:?}")))?);
                }
            }
        }
        BandMask::excluding(f.bands, &ranges, f.name)
    }
}

/// Header after masking: band count and wavelengths follow the kept entries.
pub fn apply_band_mask(header: &RasterHeader, mask: &BandMask) -> Result<RasterHeader> {
    if mask.len() != header.bands as usize {
        return Err(Error::Shape(format!("mask covers {} bands, raster has {}", mask.len(), header.bands)));
    }
    if mask.kept_count() == 0 {
        return Err(Error::Validation("band mask keeps no bands".into()));
    }
    let mut out = header.clone();
    out.bands = mask.kept_count() as u32;
    out.wavelengths = header
        .wavelengths
        .as_ref()
        .map(|w| w.iter().zip(&mask.keep).filter(|(_, &k)| k).map(|(&v, _)| v).collect());
    Ok(out)
}
