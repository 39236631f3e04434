use std::collections::{BTreeMap, BTreeSet, HashMap};

use rstar::{RTree, RTreeObject, AABB};
use serde::Serialize;

use super::tile::TileRecord;
use crate::error::{Error, Result};
use crate::geometry::{intersect_convex, ConvexPolygon};
use crate::patch_index::{find_window, Lattice, PatchWindow};

/// Parameters of the overlap test.
#[derive(Debug, Clone, Copy)]
pub struct GraphParams {
    /// Acquisitions must be more than this many seconds apart to pair.
    pub min_dt_seconds: i64,
    pub patch_px: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct Overlap {
    pub intersection: ConvexPolygon,
    pub area: f64,
    /// A window that fits inside the intersection.
    pub witness: PatchWindow,
}

/// Tiles as nodes; an edge joins two tiles that are far enough apart in
/// time, share a gsd, and whose footprints overlap by at least one full
/// patch window.
///
/// Besides the edges, the graph records every pair of footprints that
/// overlap with positive area at all (`contacts`). Windows from tiles that
/// never touch cannot collide, so contact clusters are the independent
/// units of work.
#[derive(Debug, Clone)]
pub struct OverlapGraph {
    tiles: Vec<TileRecord>,
    index_of: HashMap<String, usize>,
    adjacency: Vec<BTreeSet<usize>>,
    edges: BTreeMap<(usize, usize), Overlap>,
    contacts: Vec<BTreeSet<usize>>,
    patch_px: u32,
}

struct Env {
    idx: usize,
    env: AABB<[f64; 2]>,
}

impl RTreeObject for Env {
    type Envelope = AABB<[f64; 2]>;

    fn envelope(&self) -> Self::Envelope {
        self.env
    }
}

pub fn build_overlap_graph(tiles: &[TileRecord], params: &GraphParams) -> Result<OverlapGraph> {
    if params.min_dt_seconds < 0 {
        return Err(Error::Validation("min_dt_seconds must be non-negative".into()));
    }
    if params.patch_px == 0 {
        return Err(Error::Validation("patch_px must be positive".into()));
    }
    let mut tiles = tiles.to_vec();
    tiles.sort_by(|a, b| a.tile_id.cmp(&b.tile_id));
    if let Some(w) = tiles.windows(2).find(|w| w[0].tile_id == w[1].tile_id) {
        return Err(Error::Validation(format!("duplicate tile_id {}", w[0].tile_id)));
    }
    if let Some(first) = tiles.first() {
        if let Some(other) = tiles.iter().find(|t| t.crs != first.crs) {
            return Err(Error::CrossCrs(first.crs, other.crs));
        }
    }
    let index_of = tiles.iter().enumerate().map(|(i, t)| (t.tile_id.clone(), i)).collect();
    let n = tiles.len();
    let mut adjacency = vec![BTreeSet::new(); n];
    let mut contacts = vec![BTreeSet::new(); n];
    let mut edges = BTreeMap::new();

    let tree = RTree::bulk_load(
        tiles
            .iter()
            .enumerate()
            .map(|(idx, t)| {
                let b = t.footprint.bbox();
                Env { idx, env: AABB::from_corners([b.min_x, b.min_y], [b.max_x, b.max_y]) }
            })
            .collect(),
    );
    for (i, a) in tiles.iter().enumerate() {
        let b = a.footprint.bbox();
        let env = AABB::from_corners([b.min_x, b.min_y], [b.max_x, b.max_y]);
        let mut partners: Vec<usize> = tree.locate_in_envelope_intersecting(&env).map(|e| e.idx).filter(|&j| j > i).collect();
        partners.sort_unstable();
        for j in partners {
            let b = &tiles[j];
            let Some(inter) = intersect_convex(&a.footprint, &b.footprint) else {
                continue;
            };
            contacts[i].insert(j);
            contacts[j].insert(i);
            if (a.timestamp - b.timestamp).abs() <= params.min_dt_seconds || a.gsd != b.gsd {
                continue;
            }
            let Some(witness) = find_window(&inter, &Lattice::new(a.crs, a.gsd, params.patch_px)) else {
                continue;
            };
            adjacency[i].insert(j);
            adjacency[j].insert(i);
            let area = inter.area();
            edges.insert((i, j), Overlap { intersection: inter, area, witness });
        }
    }
    Ok(OverlapGraph { tiles, index_of, adjacency, edges, contacts, patch_px: params.patch_px })
}

impl OverlapGraph {
    /// Tiles sorted by id; positions are the graph's node indices.
    pub fn tiles(&self) -> &[TileRecord] {
        &self.tiles
    }

    pub fn node_count(&self) -> usize {
        self.tiles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn patch_px(&self) -> u32 {
        self.patch_px
    }

    pub fn index_of(&self, tile_id: &str) -> Option<usize> {
        self.index_of.get(tile_id).copied()
    }

    pub fn tile(&self, idx: usize) -> &TileRecord {
        &self.tiles[idx]
    }

    pub fn neighbors(&self, idx: usize) -> &BTreeSet<usize> {
        &self.adjacency[idx]
    }

    pub fn is_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(&b)
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&Overlap> {
        self.edges.get(&(a.min(b), a.max(b)))
    }

    pub fn edge_by_id(&self, a: &str, b: &str) -> Option<&Overlap> {
        self.edge(self.index_of(a)?, self.index_of(b)?)
    }

    pub fn edges(&self) -> impl Iterator<Item = ((&str, &str), &Overlap)> {
        self.edges.iter().map(|(&(a, b), o)| ((self.tiles[a].tile_id.as_str(), self.tiles[b].tile_id.as_str()), o))
    }

    pub fn lattice_of(&self, idx: usize) -> Lattice {
        let t = &self.tiles[idx];
        Lattice::new(t.crs, t.gsd, self.patch_px)
    }

    /// Clusters of tiles connected through positive-area footprint contact.
    /// Each edge component lies inside one cluster.
    pub fn work_units(&self) -> Vec<Vec<usize>> {
        components_by(self.tiles.len(), |i| &self.contacts[i])
    }
}

/// Partition of the nodes into edge-connected components. Members are
/// sorted by id and components are ordered by their smallest id; isolated
/// tiles are singletons.
pub fn connected_components(g: &OverlapGraph) -> Vec<Vec<String>> {
    components_by(g.tiles.len(), |i| &g.adjacency[i])
        .into_iter()
        .map(|c| c.into_iter().map(|i| g.tiles[i].tile_id.clone()).collect())
        .collect()
}

fn components_by<'a>(n: usize, neighbors: impl Fn(usize) -> &'a BTreeSet<usize>) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    queue.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}
