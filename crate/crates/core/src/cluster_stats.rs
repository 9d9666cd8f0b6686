//! Open clusters: decomposition, largest cluster, and the vertices of a
//! sub-square joined to its boundary by open paths.

use std::collections::VecDeque;

use crate::lattice::{LatticeBox, Vertex};
use crate::random_field::Configuration;

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
    }
}

/// Vertex clusters of the open edges inside a box. A cluster is named by
/// the row-major index of its first vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterDecomposition {
    bbox: LatticeBox,
    ids: Vec<u32>,
    sizes: Vec<u32>,
}

impl ClusterDecomposition {
    pub fn bbox(&self) -> LatticeBox {
        self.bbox
    }

    /// Smallest row-major vertex of the cluster containing `v`.
    pub fn id(&self, v: Vertex) -> Option<Vertex> {
        self.bbox.try_index(v).map(|i| self.bbox.vertex(self.ids[i] as usize))
    }

    pub fn same_cluster(&self, a: Vertex, b: Vertex) -> bool {
        match (self.bbox.try_index(a), self.bbox.try_index(b)) {
            (Some(i), Some(j)) => self.ids[i] == self.ids[j],
            _ => false,
        }
    }

    pub fn size_of(&self, v: Vertex) -> Option<usize> {
        self.bbox.try_index(v).map(|i| self.sizes[self.ids[i] as usize] as usize)
    }

    /// `(id, size)` for every cluster, by id.
    pub fn clusters(&self) -> impl Iterator<Item = (Vertex, usize)> + '_ {
        self.ids
            .iter()
            .enumerate()
            .filter(|(i, id)| *i as u32 == **id)
            .map(|(i, _)| (self.bbox.vertex(i), self.sizes[i] as usize))
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters().count()
    }

    pub fn largest(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0) as usize
    }
}

pub fn open_clusters(config: &Configuration, bbox: LatticeBox) -> ClusterDecomposition {
    assert!(config.bbox().contains_box(&bbox), "{bbox} is not inside {}", config.bbox());
    let n = bbox.num_vertices();
    let mut uf = UnionFind::new(n);
    for v in bbox.vertices() {
        let i = bbox.index(v) as u32;
        if v.x < bbox.x_max() && config.h_weight(v) == 0 {
            uf.union(i, i + 1);
        }
        if v.y < bbox.y_max() && config.v_weight(v) == 0 {
            uf.union(i, i + bbox.width() as u32);
        }
    }
    // Name each cluster by its first vertex: the first time a root is seen
    // in row-major order is at that vertex.
    let mut name = vec![u32::MAX; n];
    let mut ids = vec![0u32; n];
    let mut sizes = vec![0u32; n];
    for i in 0..n as u32 {
        let r = uf.find(i) as usize;
        if name[r] == u32::MAX {
            name[r] = i;
        }
        ids[i as usize] = name[r];
        sizes[name[r] as usize] += 1;
    }
    ClusterDecomposition { bbox, ids, sizes }
}

pub fn largest_cluster_size(config: &Configuration, bbox: LatticeBox) -> usize {
    open_clusters(config, bbox).largest()
}

/// One sub-square of a tiling and its boundary-connected vertex count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileCount {
    pub tile: LatticeBox,
    pub count: usize,
    /// The tile was cut short by the box's top or right side.
    pub truncated: bool,
}

/// Tiles `bbox` by closed squares of side `side` anchored at its lower-left
/// corner (neighbouring tiles share a side) and, for each, counts vertices
/// joined to the tile boundary by open paths inside the tile.
pub fn boundary_connected_sizes(config: &Configuration, bbox: LatticeBox, side: u32) -> Vec<TileCount> {
    assert!(side >= 1, "tile side must be positive");
    assert!(config.bbox().contains_box(&bbox), "{bbox} is not inside {}", config.bbox());
    let side = side as i32;
    let starts = |lo: i32, hi: i32| -> Vec<i32> {
        let mut v = vec![lo];
        while v.last().copied().unwrap_or(hi) + side < hi {
            let next = v[v.len() - 1] + side;
            v.push(next);
        }
        v
    };
    let mut out = Vec::new();
    for y0 in starts(bbox.y_min(), bbox.y_max()) {
        for x0 in starts(bbox.x_min(), bbox.x_max()) {
            let x1 = (x0 + side).min(bbox.x_max());
            let y1 = (y0 + side).min(bbox.y_max());
            let tile = LatticeBox::new(x0, x1, y0, y1).expect("nonempty tile");
            let truncated = x1 - x0 < side || y1 - y0 < side;
            out.push(TileCount { tile, count: boundary_connected_count(config, tile), truncated });
        }
    }
    out
}

fn boundary_connected_count(config: &Configuration, tile: LatticeBox) -> usize {
    let mut seen = vec![false; tile.num_vertices()];
    let mut queue = VecDeque::new();
    for v in tile.vertices().filter(|v| tile.on_boundary(*v)) {
        seen[tile.index(v)] = true;
        queue.push_back(v);
    }
    let mut count = queue.len();
    while let Some(v) = queue.pop_front() {
        for w in tile.neighbors(v) {
            let i = tile.index(w);
            if !seen[i] && config.open_between(v, w) {
                seen[i] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count
}
