//! Patch manifest: one tab-separated record per line,
//! `location_id  crs  origin_x  origin_y  size_px  gsd  [tile_id:timestamp:row:col, ...]`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LocationId, PatchWindow};
use crate::curation::tile::validate_tile_id;
use crate::error::{Error, Result};

/// One acquisition of a location: the tile and the window's pixel offset
/// (row from the raster's top edge, column from its left edge).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Member {
    pub tile_id: String,
    pub timestamp: i64,
    pub row: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchRecord {
    pub window: PatchWindow,
    /// Sorted by strictly increasing timestamp.
    pub members: Vec<Member>,
}

impl PatchRecord {
    pub fn new(window: PatchWindow, mut members: Vec<Member>) -> Result<Self> {
        members.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.tile_id.cmp(&b.tile_id)));
        let rec = PatchRecord { window, members };
        rec.validate()?;
        Ok(rec)
    }

    pub fn location_id(&self) -> String {
        self.window.location_id().to_string()
    }

    pub fn is_multitemporal(&self) -> bool {
        self.members.len() >= 2
    }

    fn validate(&self) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::Validation(format!("{} has no members", self.location_id())));
        }
        if self.members.windows(2).any(|p| p[0].timestamp >= p[1].timestamp) {
            return Err(Error::Validation(format!(
                "{}: member timestamps are not strictly increasing",
                self.location_id()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ManifestSummary {
    pub locations: usize,
    pub patches: usize,
    pub multitemporal_locations: usize,
}

/// Curation output, sorted by location id.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PatchManifest {
    pub records: Vec<PatchRecord>,
}

impl PatchManifest {
    pub fn new(mut records: Vec<PatchRecord>) -> Self {
        records.sort_by_cached_key(|r| r.location_id());
        PatchManifest { records }
    }

    pub fn summary(&self) -> ManifestSummary {
        ManifestSummary {
            locations: self.records.len(),
            patches: self.records.iter().map(|r| r.members.len()).sum(),
            multitemporal_locations: self.records.iter().filter(|r| r.is_multitemporal()).count(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&format_record(r));
            s.push('\n');
        }
        s
    }
}

pub fn format_record(r: &PatchRecord) -> String {
    let w = &r.window;
    let o = w.origin();
    let members: Vec<String> = r
        .members
        .iter()
        .map(|m| format!("{}:{}:{}:{}", m.tile_id, m.timestamp, m.row, m.col))
        .collect();
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}\t[{}]",
        w.location_id(),
        w.crs,
        o.x,
        o.y,
        w.size_px,
        w.gsd,
        members.join(", ")
    )
}

pub fn parse_record(line: &str) -> Result<PatchRecord> {
    let fields: Vec<&str> = line.split('\t').collect();
    let [id, crs, ox, oy, size, gsd, members] = fields.as_slice() else {
        return Err(Error::Validation(format!("expected 7 tab-separated fields, found {}", fields.len())));
    };
    let num = |name: &str, v: &str| -> Result<f64> {
        v.trim().parse::<f64>().map_err(|_| Error::Validation(format!("bad {name} {v:?}")))
    };
    let crs: u32 = crs.trim().parse().map_err(|_| Error::Validation(format!("bad crs {crs:?}")))?;
    let size: u32 = size.trim().parse().map_err(|_| Error::Validation(format!("bad size_px {size:?}")))?;
    let window = PatchWindow::from_origin(crs, num("origin_x", ox)?, num("origin_y", oy)?, size, num("gsd", gsd)?)?;
    let id = id.trim();
    if LocationId::parse(id)? != window {
        return Err(Error::Validation(format!("location_id {id} disagrees with the window fields")));
    }
    let list = members
        .trim()
        .strip_prefix('[')
        .and_then(|m| m.strip_suffix(']'))
        .ok_or_else(|| Error::Validation(format!("member list must be bracketed: {members:?}")))?;
    let mut parsed = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let [tile, ts, row, col] = parts.as_slice() else {
            return Err(Error::Validation(format!("member {item:?} is not tile_id:timestamp:row:col")));
        };
        validate_tile_id(tile)?;
        let bad = |what: &str| Error::Validation(format!("bad {what} in member {item:?}"));
        parsed.push(Member {
            tile_id: tile.to_string(),
            timestamp: ts.parse().map_err(|_| bad("timestamp"))?,
            row: row.parse().map_err(|_| bad("row"))?,
            col: col.parse().map_err(|_| bad("col"))?,
        });
    }
    let rec = PatchRecord { window, members: parsed };
    rec.validate()?;
    Ok(rec)
}

pub fn write_manifest(manifest: &PatchManifest, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(manifest.to_text().as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a manifest; blank lines and `#` comments are skipped. Parse errors
/// carry the 1-based line number.
pub fn read_manifest(path: &Path) -> Result<PatchManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let rec = parse_record(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        records.push(rec);
    }
    Ok(PatchManifest::new(records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patch_index::Lattice;
    use proptest::prelude::*;

    fn rec() -> PatchRecord {
        PatchRecord::new(
            Lattice::new(32633, 30.0, 128).window(100, -7),
            vec![
                Member { tile_id: "B".into(), timestamp: 2000, row: 3, col: 4 },
                Member { tile_id: "A".into(), timestamp: 1000, row: 0, col: 128 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn format_is_stable() {
        assert_eq!(
            format_record(&rec()),
            "32633_30_100_-7_128\t32633\t3000\t-210\t128\t30\t[A:1000:0:128, B:2000:3:4]"
        );
    }

    #[test]
    fn parse_roundtrip_and_errors() {
        let r = rec();
        assert_eq!(parse_record(&format_record(&r)).unwrap(), r);
        assert_eq!(parse_record(&format_record(&r)).unwrap().location_id(), r.location_id());
        let line = format_record(&r);
        assert!(parse_record(&line.replace("3000\t", "3001\t")).is_err());
        assert!(parse_record(&line.replace("[", "")).is_err());
        assert!(parse_record("a\tb").is_err());
        let dup_ts = line.replace("B:2000", "B:1000");
        assert!(parse_record(&dup_ts).is_err());
        assert!(parse_record(&line.replace("[A:1000:0:128, B:2000:3:4]", "[]")).is_err());
    }

    #[test]
    fn file_roundtrip_reports_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.tsv");
        let m = PatchManifest::new(vec![rec()]);
        write_manifest(&m, &path).unwrap();
        assert_eq!(read_manifest(&path).unwrap(), m);
        fs::write(&path, format!("{}\n\nbroken\n", format_record(&rec()))).unwrap();
        match read_manifest(&path).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    proptest! {
        #[test]
        fn roundtrip(
            crs in 1u32..100_000,
            gsd in prop::sample::select(vec![30.0, 10.0, 2.5, 0.5, 60.0]),
            x in -1_000_000i64..1_000_000,
            y in -1_000_000i64..1_000_000,
            size in 1u32..1024,
            ts in prop::collection::btree_set(-2_000_000_000i64..4_000_000_000, 1..5),
        ) {
            let members = ts.into_iter().enumerate().map(|(i, t)| Member {
                tile_id: format!("T{i}_x"), timestamp: t, row: i as u32, col: 7,
            }).collect();
            let r = PatchRecord::new(Lattice::new(crs, gsd, size).window(x, y), members).unwrap();
            prop_assert_eq!(parse_record(&format_record(&r)).unwrap(), r);
        }
    }
}
