//! Dataset statistics over a patch manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::{DateTime, Datelike, Utc};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::patch_index::PatchManifest;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub n_locations: usize,
    pub n_patches: usize,
    pub n_multitemporal: usize,
    /// `n_multitemporal / n_locations`, 0 for an empty manifest.
    pub multitemporal_fraction: f64,
    /// Number of timestamps -> number of locations with that many.
    pub timestamps_histogram: BTreeMap<usize, usize>,
    /// `YYYY-MM` -> patches acquired that month.
    pub per_month: BTreeMap<String, usize>,
}

impl DatasetStats {
    pub fn from_manifest(m: &PatchManifest) -> Self {
        let mut hist = BTreeMap::new();
        let mut per_month = BTreeMap::new();
        for r in &m.records {
            *hist.entry(r.members.len()).or_insert(0) += 1;
            for mem in &r.members {
                let key = DateTime::<Utc>::from_timestamp(mem.timestamp, 0)
                    .map(|d| format!("{:04}-{:02}", d.year(), d.month()))
                    .unwrap_or_else(|| "invalid".into());
                *per_month.entry(key).or_insert(0) += 1;
            }
        }
        let n_locations = m.records.len();
        let n_patches = m.records.iter().map(|r| r.members.len()).sum();
        let n_multitemporal = m.records.iter().filter(|r| r.is_multitemporal()).count();
        DatasetStats {
            n_locations,
            n_patches,
            n_multitemporal,
            multitemporal_fraction: if n_locations == 0 { 0.0 } else { n_multitemporal as f64 / n_locations as f64 },
            timestamps_histogram: hist,
            per_month,
        }
    }

    /// Checks the histogram identities.
    pub fn check(&self) -> Result<()> {
        let patches: usize = self.timestamps_histogram.iter().map(|(k, v)| k * v).sum();
        let locations: usize = self.timestamps_histogram.values().sum();
        let multi: usize = self.timestamps_histogram.iter().filter(|(k, _)| **k >= 2).map(|(_, v)| v).sum();
        let monthly: usize = self.per_month.values().sum();
        if patches != self.n_patches || locations != self.n_locations || multi != self.n_multitemporal || monthly != self.n_patches {
            return Err(Error::Invariant(format!(
                "stats identities fail: patches {patches}/{}, locations {locations}/{}, multitemporal {multi}/{}, monthly {monthly}",
                self.n_patches, self.n_locations, self.n_multitemporal
            )));
        }
        Ok(())
    }

    /// `timestamps,locations` rows.
    pub fn histogram_csv(&self) -> String {
        let mut s = String::from("timestamps,locations\n");
        for (k, v) in &self.timestamps_histogram {
            let _ = writeln!(s, "{k},{v}");
        }
        s
    }

    /// `month,patches` rows.
    pub fn monthly_csv(&self) -> String {
        let mut s = String::from("month,patches\n");
        for (k, v) in &self.per_month {
            let _ = writeln!(s, "{k},{v}");
        }
        s
    }
}
