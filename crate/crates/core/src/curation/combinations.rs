//! Breadth-first enumeration of multi-tile stacks around a seed tile.

use std::collections::BTreeSet;

use dashmap::DashMap;

use serde::Serialize;

use super::graph::OverlapGraph;
use crate::error::{Error, Result};
use crate::geometry::{intersect_convex, ConvexPolygon};
use crate::patch_index::{contains_window, find_window, PatchWindow};

/// Beam width that never truncates a level.
pub const UNBOUNDED: usize = usize::MAX;

/// A set of mutually overlapping tiles and their common intersection.
#[derive(Debug, Clone, Serialize)]
pub struct Combination {
    /// Sorted tile ids.
    pub tiles: Vec<String>,
    pub intersection: ConvexPolygon,
    pub area: f64,
}

impl Combination {
    pub fn order(&self) -> usize {
        self.tiles.len()
    }
}

/// Internal form keyed by node index.
#[derive(Debug, Clone)]
pub(crate) struct Tuple {
    pub members: Vec<usize>,
    pub intersection: ConvexPolygon,
    pub area: f64,
}

#[derive(Clone)]
struct Resolved {
    intersection: ConvexPolygon,
    area: f64,
    witness: PatchWindow,
}

/// Intersection cache shared by every seed of one work unit. An entry is
/// `None` when the set cannot hold a full patch window.
///
/// Every entry is a function of its set alone, so seeds may share the memo
/// across threads without affecting results.
#[derive(Default)]
pub(crate) struct Memo {
    cache: DashMap<Vec<usize>, Option<Resolved>>,
}

impl Memo {
    /// Intersection of a mutually adjacent, sorted node set. Computed as
    /// `resolve(set without its last node) ∩ footprint(last)` so the result
    /// is the same no matter which seed asks first.
    fn resolve(&self, set: &[usize], g: &OverlapGraph) -> Option<(ConvexPolygon, f64)> {
        self.resolve_full(set, g).map(|r| (r.intersection, r.area))
    }

    fn resolve_full(&self, set: &[usize], g: &OverlapGraph) -> Option<Resolved> {
        if let Some(hit) = self.cache.get(set).map(|e| e.value().clone()) {
            return hit;
        }
        let value = if set.len() == 2 {
            g.edge(set[0], set[1]).map(|e| Resolved { intersection: e.intersection.clone(), area: e.area, witness: e.witness })
        } else if self.known_unpatchable_subset(set) {
            None
        } else {
            let (last, head) = set.split_last().expect("non-empty set");
            self.resolve_full(head, g).and_then(|parent| {
                let inter = intersect_convex(&parent.intersection, &g.tile(*last).footprint)?;
                let area = inter.area();
                let witness = if contains_window(&inter, &parent.witness) {
                    parent.witness
                } else {
                    let lattice = g.lattice_of(*last);
                    if area < lattice.side() * lattice.side() * (1.0 - 1e-9) {
                        return None;
                    }
                    find_window(&inter, &lattice)?
                };
                Some(Resolved { intersection: inter, area, witness })
            })
        };
        self.cache.insert(set.to_vec(), value.clone());
        value
    }

    /// A superset of an unpatchable set is unpatchable.
    fn known_unpatchable_subset(&self, set: &[usize]) -> bool {
        let mut sub = Vec::with_capacity(set.len() - 1);
        (0..set.len()).any(|skip| {
            sub.clear();
            sub.extend(set.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
            self.cache.get(&sub).is_some_and(|e| e.value().is_none())
        })
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.cache.len()
    }
}

fn rank(a: &Tuple, b: &Tuple) -> std::cmp::Ordering {
    b.area.total_cmp(&a.area).then_with(|| a.members.cmp(&b.members))
}

/// All retained tuples (order 2..=max_order) containing `seed`.
///
/// Level 2 is every edge at the seed. Each further level extends the
/// previous level's tuples by tiles adjacent to all members, keeps those
/// that still hold a patch window, and retains the `beam` largest by area
/// (ties broken by ascending ids). Expansion stops at the first empty level.
pub(crate) fn expand(seed: usize, g: &OverlapGraph, beam: usize, max_order: usize, memo: &Memo) -> Vec<Tuple> {
    let mut level: Vec<Tuple> = g
        .neighbors(seed)
        .iter()
        .filter_map(|&n| {
            let members = if n < seed { vec![n, seed] } else { vec![seed, n] };
            memo.resolve(&members, g).map(|(intersection, area)| Tuple { members, intersection, area })
        })
        .collect();
    level.sort_by(rank);
    let mut all = level.clone();
    let mut order = 2;
    while order < max_order && !level.is_empty() {
        let mut candidates: BTreeSet<Vec<usize>> = BTreeSet::new();
        for t in &level {
            for &c in g.neighbors(seed) {
                if t.members.binary_search(&c).is_ok() || !t.members.iter().all(|&m| g.is_edge(m, c)) {
                    continue;
                }
                let mut set = t.members.clone();
                let pos = set.binary_search(&c).unwrap_err();
                set.insert(pos, c);
                candidates.insert(set);
            }
        }
        let mut next: Vec<Tuple> = candidates
            .into_iter()
            .filter_map(|members| {
                memo.resolve(&members, g).map(|(intersection, area)| Tuple { members, intersection, area })
            })
            .collect();
        next.sort_by(rank);
        next.truncate(beam);
        all.extend(next.iter().cloned());
        level = next;
        order += 1;
    }
    all
}

/// Enumerates the stacks around one tile (see [`expand`]).
pub fn build_combinations(tile_id: &str, g: &OverlapGraph, beam: usize, max_order: usize) -> Result<Vec<Combination>> {
    if beam == 0 {
        return Err(Error::Validation("beam must be at least 1".into()));
    }
    if max_order < 2 {
        return Err(Error::Validation("max_order must be at least 2".into()));
    }
    let seed = g.index_of(tile_id).ok_or_else(|| Error::NotFound(format!("tile {tile_id} is not in the graph")))?;
    let memo = Memo::default();
    Ok(expand(seed, g, beam, max_order, &memo)
        .into_iter()
        .map(|t| Combination {
            tiles: t.members.iter().map(|&i| g.tile(i).tile_id.clone()).collect(),
            intersection: t.intersection,
            area: t.area,
        })
        .collect())
}
