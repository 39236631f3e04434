//! Run configuration: a flat TOML file merged with command-line flags.
//!
//! Relative paths in the file are resolved against the file's directory.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use hypercurate_core::benchmark::{Resampling, SeasonFilter};
use hypercurate_core::curation::{CurationConfig, UNBOUNDED};
use hypercurate_core::metrics::{F1Mode, IoUMode};
use hypercurate_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum BeamValue {
    Count(usize),
    Word(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    worker_count: Option<usize>,
    beam: Option<BeamValue>,
    max_order: Option<usize>,
    min_dt_seconds: Option<i64>,
    patch_px: Option<u32>,
    cloud_max: Option<f64>,
    band_mask: Option<PathBuf>,
    crs: Option<u32>,
    check_rasters: Option<bool>,
    classes: Option<PathBuf>,
    min_fraction: Option<f64>,
    resampling: Option<String>,
    season_months: Option<Vec<u32>>,
    rebalance_count: Option<usize>,
    cap_fraction: Option<f64>,
    split: Option<[f64; 3]>,
    split_by: Option<String>,
    split_block: Option<u32>,
    f1_mode: Option<String>,
    miou_mode: Option<String>,
    baseline_means: Option<Vec<f64>>,
}

/// What makes a split block: the location's earliest member tile, or a
/// square of `split_block` x `split_block` lattice windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitBy {
    Tile,
    Grid,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairConfig {
    pub classes: Option<PathBuf>,
    pub min_fraction: f64,
    #[serde(serialize_with = "ser_resampling")]
    pub resampling: Resampling,
    pub season: Option<SeasonFilter>,
    pub rebalance_count: Option<usize>,
    pub cap_fraction: f64,
    pub split: Option<(f64, f64, f64)>,
    pub split_by: SplitBy,
    /// Block side in windows when splitting by grid.
    pub split_block: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalConfig {
    pub f1_mode: F1Mode,
    pub miou_mode: IoUMode,
    pub baseline_means: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(serialize_with = "ser_curation")]
    pub curation: CurationConfig,
    pub crs: Option<u32>,
    pub check_rasters: bool,
    pub pair: PairConfig,
    pub eval: EvalConfig,
}

fn ser_resampling<S: serde::Serializer>(r: &Resampling, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(match r {
        Resampling::Nearest => "nearest",
        Resampling::Majority => "majority",
    })
}

fn ser_curation<S: serde::Serializer>(c: &CurationConfig, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("CurationConfig", 7)?;
    match c.beam {
        UNBOUNDED => st.serialize_field("beam", "inf")?,
        b => st.serialize_field("beam", &b)?,
    }
    st.serialize_field("max_order", &c.max_order)?;
    st.serialize_field("min_dt_seconds", &c.min_dt_seconds)?;
    st.serialize_field("patch_px", &c.patch_px)?;
    st.serialize_field("cloud_max", &c.cloud_max)?;
    st.serialize_field("band_mask", &c.band_mask_ref)?;
    st.serialize_field("worker_count", &c.worker_count)?;
    st.end()
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            curation: CurationConfig::default(),
            crs: None,
            check_rasters: false,
            pair: PairConfig {
                classes: None,
                min_fraction: 0.0,
                resampling: Resampling::Nearest,
                season: None,
                rebalance_count: None,
                cap_fraction: 1.0,
                split: None,
                split_by: SplitBy::Tile,
                split_block: 8,
            },
            eval: EvalConfig { f1_mode: F1Mode::Macro, miou_mode: IoUMode::Pooled, baseline_means: None },
        }
    }
}

/// Parses `"inf"` or a positive count.
pub fn parse_beam(s: &str) -> Result<usize> {
    match s.trim() {
        "inf" | "unbounded" => Ok(UNBOUNDED),
        t => t
            .parse::<usize>()
            .map_err(|_| Error::Validation(format!("beam must be a positive integer or \"inf\", got {s:?}"))),
    }
}

pub fn parse_resampling(s: &str) -> Result<Resampling> {
    match s {
        "nearest" => Ok(Resampling::Nearest),
        "majority" => Ok(Resampling::Majority),
        _ => Err(Error::Validation(format!("resampling must be \"nearest\" or \"majority\", got {s:?}"))),
    }
}

pub fn parse_f1_mode(s: &str) -> Result<F1Mode> {
    match s {
        "macro" => Ok(F1Mode::Macro),
        "micro" => Ok(F1Mode::Micro),
        _ => Err(Error::Validation(format!("f1_mode must be \"macro\" or \"micro\", got {s:?}"))),
    }
}

pub fn parse_miou_mode(s: &str) -> Result<IoUMode> {
    match s {
        "pooled" => Ok(IoUMode::Pooled),
        "per-image" => Ok(IoUMode::PerImage),
        _ => Err(Error::Validation(format!("miou_mode must be \"pooled\" or \"per-image\", got {s:?}"))),
    }
}

impl RunConfig {
    /// Defaults overlaid with the file at `path`, if any.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let Some(path) = path else { return Ok(cfg) };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: FileConfig = toml::from_str(&text).map_err(|e| Error::Validation(format!("{}: {}", path.display(), e.message())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: PathBuf| if p.is_relative() { base.join(p) } else { p };
        let c = &mut cfg.curation;
        if let Some(v) = file.seed {
            cfg.seed = v;
        }
        if let Some(v) = file.worker_count {
            c.worker_count = v;
        }
        match file.beam {
            Some(BeamValue::Count(n)) => c.beam = n,
            Some(BeamValue::Word(w)) => c.beam = parse_beam(&w)?,
            None => {}
        }
        set(&mut c.max_order, file.max_order);
        set(&mut c.min_dt_seconds, file.min_dt_seconds);
        set(&mut c.patch_px, file.patch_px);
        set(&mut c.cloud_max, file.cloud_max);
        if let Some(p) = file.band_mask {
            c.band_mask_ref = Some(resolve(p));
        }
        cfg.crs = file.crs.or(cfg.crs);
        set(&mut cfg.check_rasters, file.check_rasters);
        let p = &mut cfg.pair;
        p.classes = file.classes.map(resolve);
        set(&mut p.min_fraction, file.min_fraction);
        if let Some(r) = file.resampling {
            p.resampling = parse_resampling(&r)?;
        }
        if let Some(months) = file.season_months {
            p.season = Some(SeasonFilter { months: months.into_iter().collect::<BTreeSet<_>>() });
        }
        p.rebalance_count = file.rebalance_count;
        set(&mut p.cap_fraction, file.cap_fraction);
        p.split = file.split.map(|[a, b, c]| (a, b, c));
        if let Some(b) = file.split_by {
            p.split_by = match b.as_str() {
                "tile" => SplitBy::Tile,
                "grid" => SplitBy::Grid,
                _ => return Err(Error::Validation(format!("split_by must be \"tile\" or \"grid\", got {b:?}"))),
            };
        }
        set(&mut p.split_block, file.split_block);
        if let Some(m) = file.f1_mode {
            cfg.eval.f1_mode = parse_f1_mode(&m)?;
        }
        if let Some(m) = file.miou_mode {
            cfg.eval.miou_mode = parse_miou_mode(&m)?;
        }
        cfg.eval.baseline_means = file.baseline_means;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.curation.validate()?;
        let fail = |m: String| Err(Error::Validation(m));
        let p = &self.pair;
        if !(0.0..1.0).contains(&p.min_fraction) {
            return fail(format!("min_fraction must be in [0, 1), got {}", p.min_fraction));
        }
        if !(p.cap_fraction > 0.0 && p.cap_fraction <= 1.0) {
            return fail(format!("cap_fraction must be in (0, 1], got {}", p.cap_fraction));
        }
        if let Some(s) = &p.season {
            if s.months.is_empty() || s.months.iter().any(|m| !(1..=12).contains(m)) {
                return fail(format!("season_months must be a non-empty list of months 1-12, got {:?}", s.months));
            }
        }
        if let Some((a, b, c)) = p.split {
            if [a, b, c].iter().any(|r| !(0.0..=1.0).contains(r)) || ((a + b + c) - 1.0).abs() > 1e-9 {
                return fail(format!("split ratios must be in [0, 1] and sum to 1, got [{a}, {b}, {c}]"));
            }
        }
        if p.split_block == 0 {
            return fail("split_block must be at least 1".into());
        }
        Ok(())
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}
