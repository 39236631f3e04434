use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;

use super::labels::{AggregationMap, LabelRaster, IGNORE};
use super::resample::{multilabel_from_raster, segmentation_mask, MultiLabelTarget, Resampling, SegmentationPair};
use super::select::SeasonFilter;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::patch_index::{LocationId, PatchRecord};
use crate::raster_io::{read_raster, write_raster, DType, Raster, RasterHeader};

/// Multi-label targets for every record, in input order. All-nodata
/// windows are dropped.
pub fn build_multilabel(records: &[PatchRecord], labels: &LabelRaster, agg: &AggregationMap, min_fraction: f64) -> Result<Vec<MultiLabelTarget>> {
    let out: Result<Vec<_>> = records.par_iter().map(|r| multilabel_from_raster(&r.window, labels, agg, min_fraction)).collect();
    Ok(out?.into_iter().flatten().collect())
}

pub fn build_segmentation(records: &[PatchRecord], labels: &LabelRaster, agg: &AggregationMap, method: Resampling) -> Result<Vec<SegmentationPair>> {
    records.par_iter().map(|r| segmentation_mask(&r.window, labels, agg, method)).collect()
}

/// Keeps in-season members; records left without members are dropped.
pub fn filter_season(records: &[PatchRecord], filter: &SeasonFilter) -> Vec<PatchRecord> {
    records
        .iter()
        .filter_map(|r| {
            let members: Vec<_> = r.members.iter().filter(|m| filter.accepts(m.timestamp)).cloned().collect();
            (!members.is_empty()).then(|| PatchRecord { window: r.window, members })
        })
        .collect()
}

pub fn write_multilabel_jsonl(targets: &[MultiLabelTarget], path: &Path) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for t in targets {
        writeln!(w, "{}", serde_json::to_string(t).expect("serializable")).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads `{location_id, classes}` lines, checking class indices against
/// `n_classes`.
pub fn read_multilabel_jsonl(path: &Path, n_classes: usize) -> Result<Vec<MultiLabelTarget>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |reason: String| Error::Parse { path: path.to_path_buf(), line: i + 1, reason };
        let t: MultiLabelTarget = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        if let Some(&c) = t.classes.iter().find(|&&c| usize::from(c) >= n_classes) {
            return Err(err(format!("class {c} out of range for {n_classes} classes")));
        }
        out.push(t);
    }
    Ok(out)
}

/// Writes a mask as a single-band u8 raster georeferenced to its window.
pub fn write_mask(pair: &SegmentationPair, path: &Path) -> Result<()> {
    let w = LocationId::parse(&pair.location_id)?;
    let (h, wd) = pair.mask.dim();
    let header = RasterHeader {
        width: wd as u32,
        height: h as u32,
        bands: 1,
        dtype: DType::U8,
        nodata: i32::from(IGNORE),
        origin: Point2::new(w.origin().x, w.origin().y + w.side()),
        gsd: w.gsd,
        crs: w.crs,
        wavelengths: None,
    };
    write_raster(&Raster::new(header, pair.mask.iter().copied().collect())?, path)
}

pub fn read_mask(path: &Path) -> Result<Array2<u8>> {
    let r = read_raster::<u8>(path)?;
    if r.header.bands != 1 {
        return Err(Error::Format { path: path.to_path_buf(), reason: format!("mask has {} bands", r.header.bands) });
    }
    Array2::from_shape_vec((r.header.height as usize, r.header.width as usize), r.data)
        .map_err(|e| Error::Format { path: path.to_path_buf(), reason: e.to_string() })
}

/// Writes `<dir>/<location_id>.hsrc` for each pair.
pub fn write_mask_dir(pairs: &[SegmentationPair], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    pairs.par_iter().try_for_each(|p| write_mask(p, &dir.join(format!("{}.hsrc", p.location_id))))
}

/// Masks keyed by location id (the file stem).
pub fn read_mask_dir(dir: &Path) -> Result<BTreeMap<String, Array2<u8>>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("hsrc") {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        out.insert(stem, read_mask(&path)?);
    }
    Ok(out)
}

/// Pixel counts per class over all masks.
pub fn mask_class_histogram(pairs: &[SegmentationPair], n_classes: usize) -> Vec<u64> {
    let mut h = vec![0u64; n_classes];
    for p in pairs {
        h.iter_mut().zip(p.histogram(n_classes)).for_each(|(a, b)| *a += b);
    }
    h
}

/// Number of targets carrying each class.
pub fn multilabel_class_histogram(targets: &[MultiLabelTarget], n_classes: usize) -> Vec<u64> {
    let mut h = vec![0u64; n_classes];
    for c in targets.iter().flat_map(|t| &t.classes) {
        h[usize::from(*c)] += 1;
    }
    h
}

/// `class_index,class_name,count` rows.
pub fn write_class_histogram_csv(agg: &AggregationMap, counts: &[u64], path: &Path) -> Result<()> {
    let mut s = String::from("class_index,class_name,count\n");
    for (i, (name, n)) in agg.classes.iter().zip(counts).enumerate() {
        s.push_str(&format!("{i},\"{}\",{n}\n", name.replace('"', "\"\"")));
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patch_index::Lattice;
    use std::collections::BTreeSet;

    #[test]
    fn jsonl_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.jsonl");
        let t = vec![
            MultiLabelTarget { location_id: "1_30_0_0_128".into(), classes: BTreeSet::from([0, 4]) },
            MultiLabelTarget { location_id: "1_30_128_0_128".into(), classes: BTreeSet::from([18]) },
        ];
        write_multilabel_jsonl(&t, &p).unwrap();
        assert_eq!(read_multilabel_jsonl(&p, 19).unwrap(), t);
        assert!(matches!(read_multilabel_jsonl(&p, 10), Err(Error::Parse { line: 2, .. })));
        fs::write(&p, "{\"location_id\":\"a\",\"classes\":[1]}\nnot json\n").unwrap();
        assert!(matches!(read_multilabel_jsonl(&p, 19), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn mask_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let w = Lattice::new(32633, 30.0, 4).window(3, -2);
        let mask = Array2::from_shape_fn((4, 4), |(r, c)| if r == c { IGNORE } else { (r * 4 + c) as u8 });
        let pair = SegmentationPair { location_id: w.location_id().to_string(), mask };
        write_mask_dir(&[pair.clone()], dir.path()).unwrap();
        let back = read_mask_dir(dir.path()).unwrap();
        assert_eq!(back.get(&pair.location_id), Some(&pair.mask));
        let r = read_raster::<u8>(&dir.path().join(format!("{}.hsrc", pair.location_id))).unwrap();
        assert_eq!(r.header.origin, Point2::new(90.0, 60.0));
    }
}
