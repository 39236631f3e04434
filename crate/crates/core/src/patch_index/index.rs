use std::collections::HashMap;

use rstar::{RTree, RTreeObject, AABB};

use super::PatchWindow;
use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    id: String,
    bbox: BoundingBox,
}

impl RTreeObject for Entry {
    type Envelope = AABB<[f64; 2]>;

    fn envelope(&self) -> Self::Envelope {
        AABB::from_corners([self.bbox.min_x, self.bbox.min_y], [self.bbox.max_x, self.bbox.max_y])
    }
}

/// R-tree over committed window boxes. No two committed windows share
/// interior points.
#[derive(Debug, Default)]
pub struct SpatialIndex {
    tree: RTree<Entry>,
    by_id: HashMap<String, BoundingBox>,
}

impl SpatialIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }

    /// Adds `windows` atomically. Re-committing an identical window is a
    /// no-op; anything overlapping committed content (or another window in
    /// the batch) is a consistency error and leaves the index unchanged.
    pub fn commit(&mut self, windows: &[PatchWindow]) -> Result<()> {
        let mut staged: Vec<Entry> = Vec::with_capacity(windows.len());
        for w in windows {
            let id = w.location_id().to_string();
            let bbox = w.bbox();
            if self.by_id.get(&id) == Some(&bbox) || staged.iter().any(|e| e.id == id) {
                continue;
            }
            if let Some(existing) = self.probe(&bbox).into_iter().next() {
                return Err(Error::IndexConsistency { new: id, existing: existing.id.clone() });
            }
            if let Some(e) = staged.iter().find(|e| e.bbox.interiors_overlap(&bbox)) {
                return Err(Error::IndexConsistency { new: id, existing: e.id.clone() });
            }
            staged.push(Entry { id, bbox });
        }
        for e in staged {
            self.by_id.insert(e.id.clone(), e.bbox);
            self.tree.insert(e);
        }
        Ok(())
    }

    /// Ids of committed windows whose interiors meet `bbox`, sorted.
    pub fn query_overlap(&self, bbox: &BoundingBox) -> Vec<String> {
        let mut ids: Vec<String> = self.probe(bbox).into_iter().map(|e| e.id.clone()).collect();
        ids.sort();
        ids
    }

    pub(crate) fn overlapping_boxes<'a>(&'a self, bbox: &'a BoundingBox) -> impl Iterator<Item = BoundingBox> + 'a {
        self.probe(bbox).into_iter().map(|e| e.bbox)
    }

    fn probe(&self, bbox: &BoundingBox) -> Vec<&Entry> {
        let env = AABB::from_corners([bbox.min_x, bbox.min_y], [bbox.max_x, bbox.max_y]);
        self.tree
            .locate_in_envelope_intersecting(&env)
            .filter(|e| e.bbox.interiors_overlap(bbox))
            .collect()
    }

    /// Folds another index in. The caller guarantees disjointness; it is
    /// still checked.
    pub fn merge(&mut self, other: SpatialIndex) -> Result<()> {
        let entries: Vec<Entry> = other.tree.into_iter().collect();
        for e in &entries {
            if let Some(existing) = self.probe(&e.bbox).into_iter().next() {
                return Err(Error::IndexConsistency { new: e.id.clone(), existing: existing.id.clone() });
            }
        }
        for e in entries {
            self.by_id.insert(e.id.clone(), e.bbox);
            self.tree.insert(e);
        }
        Ok(())
    }
}
