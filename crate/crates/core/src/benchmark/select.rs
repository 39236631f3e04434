use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Datelike, Utc};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RebalanceReport {
    /// Indices into the input pool, in selection order.
    pub selected: Vec<usize>,
    pub class_pixels: Vec<u64>,
    pub max_share: f64,
    pub cap_fraction: f64,
    /// False when no selection of this size from the pool meets the cap
    /// under the greedy rule; the result is then best effort.
    pub cap_satisfied: bool,
}

/// `a_num / a_den` vs `b_num / b_den`, exactly. Zero denominators count as 0.
fn cmp_ratio(a_num: u64, a_den: u64, b_num: u64, b_den: u64) -> Ordering {
    let a = if a_den == 0 { 0 } else { u128::from(a_num) * u128::from(b_den.max(1)) };
    let b = if b_den == 0 { 0 } else { u128::from(b_num) * u128::from(a_den.max(1)) };
    a.cmp(&b)
}

fn max_share(hist: &[u64], add: &[u64]) -> (u64, u64) {
    let total: u64 = hist.iter().zip(add).map(|(h, a)| h + a).sum();
    let top = hist.iter().zip(add).map(|(h, a)| h + a).max().unwrap_or(0);
    (top, total)
}

/// Greedy class rebalancing over per-patch class histograms.
///
/// Each step adds the patch whose inclusion gives the smallest maximum class
/// share of the running pixel histogram. Ties go to the earliest patch in a
/// permutation drawn from `seed`.
pub fn rebalance(histograms: &[Vec<u64>], target_count: usize, cap_fraction: f64, seed: u64) -> Result<RebalanceReport> {
    if target_count > histograms.len() {
        return Err(Error::Validation(format!("target {target_count} exceeds pool of {}", histograms.len())));
    }
    if !(cap_fraction > 0.0 && cap_fraction <= 1.0) {
        return Err(Error::Validation(format!("cap_fraction must be in (0, 1], got {cap_fraction}")));
    }
    let k = histograms.first().map_or(0, Vec::len);
    if histograms.iter().any(|h| h.len() != k) {
        return Err(Error::Shape("class histograms differ in length".into()));
    }
    let mut order: Vec<usize> = (0..histograms.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut hist = vec![0u64; k];
    let mut taken = vec![false; histograms.len()];
    let mut selected = Vec::with_capacity(target_count);
    for _ in 0..target_count {
        let mut best: Option<(usize, (u64, u64))> = None;
        for &i in &order {
            if taken[i] {
                continue;
            }
            let s = max_share(&hist, &histograms[i]);
            if best.map_or(true, |(_, b)| cmp_ratio(s.0, s.1, b.0, b.1) == Ordering::Less) {
                best = Some((i, s));
            }
        }
        let (i, _) = best.expect("pool larger than target");
        taken[i] = true;
        selected.push(i);
        hist.iter_mut().zip(&histograms[i]).for_each(|(h, a)| *h += a);
    }
    let (top, total) = max_share(&hist, &vec![0; k]);
    let max_share = if total == 0 { 0.0 } else { top as f64 / total as f64 };
    Ok(RebalanceReport { selected, class_pixels: hist, max_share, cap_fraction, cap_satisfied: max_share <= cap_fraction + 1e-12 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

fn block_hash(seed: u64, key: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(key.as_bytes());
    h.finalize().into()
}

/// Assigns whole blocks to splits. Blocks are ordered by a seeded hash of
/// their key and cut at the requested ratios, so each split holds its share
/// of blocks to within one block.
pub fn make_split<S: AsRef<str>>(block_keys: &[S], ratios: (f64, f64, f64), seed: u64) -> Result<BTreeMap<String, Split>> {
    let (tr, va, te) = ratios;
    if [tr, va, te].iter().any(|r| !(0.0..=1.0).contains(r)) || (tr + va + te - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!("split ratios {ratios:?} must be non-negative and sum to 1")));
    }
    let keys: BTreeSet<&str> = block_keys.iter().map(AsRef::as_ref).collect();
    let mut ranked: Vec<(&str, [u8; 32])> = keys.into_iter().map(|k| (k, block_hash(seed, k))).collect();
    ranked.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(b.0)));
    let n = ranked.len() as f64;
    let n_train = (n * tr).round() as usize;
    let n_val = ((n * (tr + va)).round() as usize).max(n_train);
    Ok(ranked
        .into_iter()
        .enumerate()
        .map(|(i, (k, _))| {
            let s = if i < n_train {
                Split::Train
            } else if i < n_val {
                Split::Val
            } else {
                Split::Test
            };
            (k.to_string(), s)
        })
        .collect())
}

/// Accepts timestamps whose UTC month is listed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeasonFilter {
    pub months: BTreeSet<u32>,
}

impl Default for SeasonFilter {
    fn default() -> Self {
        SeasonFilter { months: BTreeSet::from([6, 7, 8]) }
    }
}

impl SeasonFilter {
    pub fn accepts(&self, timestamp: i64) -> bool {
        DateTime::<Utc>::from_timestamp(timestamp, 0).is_some_and(|d| self.months.contains(&d.month()))
    }
}
