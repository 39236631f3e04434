use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::raster_io::{read_raster, Raster};

/// Mask value for pixels without a usable label.
pub const IGNORE: u8 = 255;

/// Single-band categorical raster of source class codes.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelRaster {
    pub raster: Raster<u16>,
    pub class_names: BTreeMap<u16, String>,
}

impl LabelRaster {
    /// When `class_names` is non-empty every pixel must be a named code or
    /// the header's no-data value.
    pub fn new(raster: Raster<u16>, class_names: BTreeMap<u16, String>) -> Result<Self> {
        if raster.header.bands != 1 {
            return Err(Error::Shape(format!("label raster has {} bands, expected 1", raster.header.bands)));
        }
        let lr = LabelRaster { raster, class_names };
        if !lr.class_names.is_empty() {
            if let Some(&v) = lr.raster.data.iter().find(|&&v| Some(v) != lr.nodata() && !lr.class_names.contains_key(&v)) {
                return Err(Error::Validation(format!("label raster holds undeclared code {v}")));
            }
        }
        Ok(lr)
    }

    pub fn load(path: &Path) -> Result<Self> {
        LabelRaster::new(read_raster(path)?, BTreeMap::new())
    }

    pub fn nodata(&self) -> Option<u16> {
        u16::try_from(self.raster.header.nodata).ok()
    }

    pub fn width(&self) -> usize {
        self.raster.header.width as usize
    }

    pub fn height(&self) -> usize {
        self.raster.header.height as usize
    }

    pub fn code(&self, row: usize, col: usize) -> u16 {
        self.raster.data[row * self.width() + col]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Class(u8),
    Ignore,
}

/// Source code to target class index.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationMap {
    pub name: String,
    pub classes: Vec<String>,
    map: BTreeMap<u16, Target>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AggregationFile {
    name: Option<String>,
    classes: Vec<String>,
    map: BTreeMap<String, toml::Value>,
}

impl AggregationMap {
    pub fn new(name: impl Into<String>, classes: Vec<String>, map: BTreeMap<u16, Target>) -> Result<Self> {
        if classes.is_empty() || classes.len() > usize::from(IGNORE) {
            return Err(Error::Validation(format!("class count must be in 1..=254, got {}", classes.len())));
        }
        if let Some((code, t)) = map.iter().find(|(_, t)| matches!(t, Target::Class(i) if usize::from(*i) >= classes.len())) {
            return Err(Error::Validation(format!("code {code} maps to {t:?}, beyond {} classes", classes.len())));
        }
        Ok(AggregationMap { name: name.into(), classes, map })
    }

    /// Loads a TOML table of the form
    ///
    /// ```toml
    /// name = "corine-bigearthnet19"
    /// classes = ["Urban fabric", "Industrial or commercial units"]
    /// [map]
    /// "111-112" = 0
    /// "121" = 1
    /// "122" = "ignore"
    /// ```
    ///
    /// Keys are single codes or inclusive `a-b` ranges; single codes
    /// override ranges.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Format { path: path.to_path_buf(), reason: e.to_string() })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: AggregationFile = toml::from_str(text).map_err(|e| Error::Validation(e.to_string()))?;
        let mut ranges = Vec::new();
        let mut singles = BTreeMap::new();
        for (key, value) in &f.map {
            let target = match value {
                toml::Value::Integer(i) => Target::Class(
                    u8::try_from(*i).map_err(|_| Error::Validation(format!("class index {i} for {key:?} out of range")))?,
                ),
                toml::Value::String(s) if s == "ignore" => Target::Ignore,
                other => return Err(Error::Validation(format!("{key:?}: expected a class index or \"ignore\", got {other}"))),
            };
            let code = |s: &str| s.trim().parse::<u16>().map_err(|_| Error::Validation(format!("bad code {s:?} in key {key:?}")));
            match key.split_once('-') {
                Some((a, b)) => {
                    let (a, b) = (code(a)?, code(b)?);
                    if a > b {
                        return Err(Error::Validation(format!("empty range {key:?}")));
                    }
                    ranges.push((a, b, target));
                }
                None => {
                    singles.insert(code(key)?, target);
                }
            }
        }
        let mut map = BTreeMap::new();
        for (a, b, t) in ranges {
            for c in a..=b {
                map.insert(c, t);
            }
        }
        map.extend(singles);
        AggregationMap::new(f.name.unwrap_or_default(), f.classes, map)
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn lookup(&self, code: u16) -> Result<Target> {
        self.map.get(&code).copied().ok_or(Error::UnmappedCode(code))
    }

    /// Mask value for a code: class index, or [`IGNORE`].
    pub fn mask_value(&self, code: u16) -> Result<u8> {
        Ok(match self.lookup(code)? {
            Target::Class(i) => i,
            Target::Ignore => IGNORE,
        })
    }

    pub fn declared_codes(&self) -> impl Iterator<Item = u16> + '_ {
        self.map.keys().copied()
    }
}
