//! Passage times, distance fields, tight edges and confinement of optimal
//! paths to a finite box.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use crate::critical_geometry::innermost_circuit;
use crate::error::{Error, Result};
use crate::lattice::{Annulus, Edge, LatticeBox, Vertex};
use crate::random_field::{sample_configuration, Configuration, EdgeDistribution, PassageTime, SeedSpec};

const UNREACHED: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discipline {
    /// Two-level queue when every positive weight is equal, otherwise a heap.
    Auto,
    /// Deque-based search; needs a distribution with one positive atom.
    TwoLevel,
    PriorityQueue,
}

/// Shortest passage times from a source set to every vertex of a box.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    bbox: LatticeBox,
    sources: Vec<Vertex>,
    dist: Vec<u64>,
    decimals: u8,
}

impl DistanceField {
    pub fn bbox(&self) -> LatticeBox {
        self.bbox
    }

    pub fn sources(&self) -> &[Vertex] {
        &self.sources
    }

    /// Distance in integer units, `None` if unreachable or outside the box.
    #[inline]
    pub fn units(&self, v: Vertex) -> Option<u64> {
        self.bbox.try_index(v).and_then(|i| self.units_at(i))
    }

    #[inline]
    pub fn units_at(&self, i: usize) -> Option<u64> {
        let d = self.dist[i];
        (d != UNREACHED).then_some(d)
    }

    pub fn get(&self, v: Vertex) -> Option<PassageTime> {
        self.units(v).map(|u| PassageTime::new(u, self.decimals))
    }

    pub fn time(&self, units: u64) -> PassageTime {
        PassageTime::new(units, self.decimals)
    }

    /// Smallest distance over a vertex set.
    pub fn min_over(&self, vs: impl IntoIterator<Item = Vertex>) -> Option<u64> {
        vs.into_iter().filter_map(|v| self.units(v)).min()
    }

    /// Smallest distance over the boundary of the box.
    pub fn min_on_boundary(&self) -> Option<u64> {
        boundary_indices(&self.bbox).filter_map(|i| self.units_at(i)).min()
    }
}

/// Row-major indices of the boundary vertices of a box, each once.
pub fn boundary_indices(b: &LatticeBox) -> impl Iterator<Item = usize> + '_ {
    let w = b.width();
    let h = b.height();
    (0..b.num_vertices()).filter(move |&i| {
        let (x, y) = (i % w, i / w);
        x == 0 || y == 0 || x + 1 == w || y + 1 == h
    })
}

pub fn distance_field(config: &Configuration, sources: &[Vertex]) -> Result<DistanceField> {
    distance_field_with(config, sources, Discipline::Auto)
}

pub fn distance_field_with(config: &Configuration, sources: &[Vertex], discipline: Discipline) -> Result<DistanceField> {
    if sources.is_empty() {
        return Err(Error::EmptySource);
    }
    let bbox = config.bbox();
    for &s in sources {
        if !bbox.contains(s) {
            return Err(Error::VertexOutsideBox { vertex: s, bbox });
        }
    }
    let two_level = config.distribution().is_zero_one_like();
    let use_deque = match discipline {
        Discipline::Auto => two_level,
        Discipline::TwoLevel if !two_level => {
            return Err(Error::InvalidDistribution("two-level search needs a single positive atom".into()))
        }
        Discipline::TwoLevel => true,
        Discipline::PriorityQueue => false,
    };
    let mut dist = vec![UNREACHED; bbox.num_vertices()];
    for &s in sources {
        dist[bbox.index(s)] = 0;
    }
    if use_deque {
        zero_one_search(config, &mut dist);
    } else {
        heap_search(config, &mut dist);
    }
    Ok(DistanceField { bbox, sources: sources.to_vec(), dist, decimals: config.decimals() })
}

fn zero_one_search(config: &Configuration, dist: &mut [u64]) {
    let mut deque: VecDeque<usize> = (0..dist.len()).filter(|&i| dist[i] == 0).collect();
    while let Some(u) = deque.pop_front() {
        let du = dist[u];
        config.for_each_neighbor(u, |v, w| {
            let nd = du + w;
            if nd < dist[v] {
                dist[v] = nd;
                if w == 0 {
                    deque.push_front(v);
                } else {
                    deque.push_back(v);
                }
            }
        });
    }
}

fn heap_search(config: &Configuration, dist: &mut [u64]) {
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
        (0..dist.len()).filter(|&i| dist[i] == 0).map(|i| Reverse((0, i))).collect();
    while let Some(Reverse((du, u))) = heap.pop() {
        if du > dist[u] {
            continue;
        }
        config.for_each_neighbor(u, |v, w| {
            let nd = du + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((nd, v)));
            }
        });
    }
}

/// `T(A, B)` inside the configuration's box.
pub fn passage_time(config: &Configuration, from: &[Vertex], to: &[Vertex]) -> Result<PassageTime> {
    let field = distance_field(config, from)?;
    let bbox = config.bbox();
    let mut best = None;
    for &t in to {
        if !bbox.contains(t) {
            return Err(Error::VertexOutsideBox { vertex: t, bbox });
        }
        if let Some(u) = field.units(t) {
            best = Some(best.map_or(u, |b: u64| b.min(u)));
        }
    }
    best.map(|u| config.time(u)).ok_or(Error::Unreachable)
}

/// `a_{0,n} = T(0, (n,0))` inside the configuration's box.
pub fn point_passage_time(config: &Configuration, n: i32) -> Result<PassageTime> {
    passage_time(config, &[Vertex::ORIGIN], &[Vertex::new(n, 0)])
}

/// The edges lying on at least one optimal walk from the sources to the
/// targets.
#[derive(Debug, Clone)]
pub struct TightSubgraph {
    edges: Vec<Edge>,
    total: u64,
    forward: DistanceField,
    backward: DistanceField,
    targets: Vec<Vertex>,
}

impl TightSubgraph {
    /// Tight edges in canonical box order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_time(&self) -> PassageTime {
        self.forward.time(self.total)
    }

    pub fn total_units(&self) -> u64 {
        self.total
    }

    pub fn forward(&self) -> &DistanceField {
        &self.forward
    }

    pub fn backward(&self) -> &DistanceField {
        &self.backward
    }

    pub fn sources(&self) -> &[Vertex] {
        self.forward.sources()
    }

    pub fn targets(&self) -> &[Vertex] {
        &self.targets
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edges.binary_search_by(|probe| canonical_key(*probe).cmp(&canonical_key(e))).is_ok()
    }

    /// Whether some optimal walk passes through `v`.
    pub fn is_tight_vertex(&self, v: Vertex) -> bool {
        match (self.forward.units(v), self.backward.units(v)) {
            (Some(a), Some(b)) => a + b == self.total,
            _ => false,
        }
    }
}

fn canonical_key(e: Edge) -> (i32, u8, i32) {
    (e.anchor.y, e.orientation as u8, e.anchor.x)
}

/// Directed tightness test: `d_s(u) + t(uw) + d_t(w) = T`.
#[inline]
pub fn tight_step(forward: &[u64], backward: &[u64], total: u64, u: usize, w: usize, weight: u64) -> bool {
    forward[u] != UNREACHED && backward[w] != UNREACHED && forward[u] + weight + backward[w] == total
}

impl DistanceField {
    /// Raw distances in units, `u64::MAX` marking unreachable vertices; for
    /// hot loops in counting code.
    pub(crate) fn raw(&self) -> &[u64] {
        &self.dist
    }
}

pub fn tight_subgraph(config: &Configuration, sources: &[Vertex], targets: &[Vertex]) -> Result<TightSubgraph> {
    let forward = distance_field(config, sources)?;
    let backward = distance_field(config, targets)?;
    let bbox = config.bbox();
    let total = targets.iter().filter_map(|&t| forward.units(t)).min().ok_or(Error::Unreachable)?;
    let (fs, bs) = (forward.raw(), backward.raw());
    let mut edges = Vec::new();
    for e in bbox.edges() {
        let (a, b) = e.endpoints();
        let (i, j) = (bbox.index(a), bbox.index(b));
        let w = config.weight(e)?;
        if tight_step(fs, bs, total, i, j, w) || tight_step(fs, bs, total, j, i, w) {
            edges.push(e);
        }
    }
    Ok(TightSubgraph { edges, total, forward, backward, targets: targets.to_vec() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfinementGoal {
    /// Certify only that `a_{0,n}` in the box equals its value on Z².
    Time,
    /// Certify that no optimal path on Z² leaves the box.
    Paths,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfinementOptions {
    pub goal: ConfinementGoal,
    /// Ratio between successive half-widths.
    pub growth: f64,
    /// Give up beyond half-width `max_factor · n`.
    pub max_factor: u32,
    /// Give up before sampling a box with more vertices than this.
    pub vertex_budget: usize,
}

impl Default for ConfinementOptions {
    fn default() -> Self {
        ConfinementOptions { goal: ConfinementGoal::Paths, growth: 2.0, max_factor: 64, vertex_budget: 1 << 24 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// An open circuit in the box around `[-n, n]²`, of this many edges.
    OpenCircuit { length: usize },
    /// Reaching the boundary from both endpoints costs more than the
    /// optimal time.
    BoundaryCost { from_source: PassageTime, from_target: PassageTime },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    HalfWidthCap,
    VertexBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfinementCertificate {
    pub bbox: LatticeBox,
    pub n: u32,
    /// The requested goal holds for the final box.
    pub certified: bool,
    /// The box passage time equals the time on Z².
    pub time_exact: bool,
    pub witness: Option<Witness>,
    /// `a_{0,n}` in the final box.
    pub time: PassageTime,
    pub boxes_tried: u32,
    /// Why growth stopped without certification.
    pub stopped: Option<StopReason>,
}

/// One box of the confinement search.
#[derive(Debug, Clone)]
struct BoxCheck {
    time: u64,
    time_exact: bool,
    paths_confined: bool,
    witness: Option<Witness>,
}

fn check_box(config: &Configuration, n: u32) -> Result<BoxCheck> {
    let bbox = config.bbox();
    let half = bbox.x_max();
    let s = Vertex::ORIGIN;
    let t = Vertex::new(n as i32, 0);
    let ds = distance_field(config, &[s])?;
    let dt = distance_field(config, &[t])?;
    let time = ds.units(t).ok_or(Error::Unreachable)?;
    let bs = ds.min_on_boundary().ok_or(Error::Unreachable)?;
    let bt = dt.min_on_boundary().ok_or(Error::Unreachable)?;
    let through_boundary = boundary_indices(&bbox)
        .filter_map(|i| Some(ds.units_at(i)? + dt.units_at(i)?))
        .min()
        .ok_or(Error::Unreachable)?;
    let circuit = innermost_circuit(config, &Annulus::centered(half, n as i32)?);
    let cost_witness = || Witness::BoundaryCost { from_source: config.time(bs), from_target: config.time(bt) };
    let circuit_witness = circuit.as_ref().map(|c| Witness::OpenCircuit { length: c.circuit.len() });
    // A path leaving the box pays at least bs before its first exit and bt
    // after its last return.
    let time_exact = circuit.is_some() || bs + bt >= time;
    // With an open circuit, an optimal path on Z² that leaves the box makes
    // its first boundary vertex an optimal-walk vertex of the box.
    let paths_by_circuit = circuit.is_some() && through_boundary > time;
    let paths_by_cost = bs + bt > time;
    let witness = if paths_by_cost || (!paths_by_circuit && circuit.is_none() && time_exact) {
        Some(cost_witness())
    } else {
        circuit_witness
    };
    Ok(BoxCheck { time, time_exact, paths_confined: paths_by_circuit || paths_by_cost, witness })
}

/// Grows boxes `[-h, h]²` from `h = 2n` by `growth` until no optimal path
/// from the origin to `(n, 0)` can leave the box.
pub fn certify_confinement(
    dist: &EdgeDistribution,
    n: u32,
    seed: SeedSpec,
    growth: f64,
) -> Result<(Configuration, ConfinementCertificate)> {
    certify_confinement_with(dist, n, seed, &ConfinementOptions { growth, ..ConfinementOptions::default() })
}

pub fn certify_confinement_with(
    dist: &EdgeDistribution,
    n: u32,
    seed: SeedSpec,
    opts: &ConfinementOptions,
) -> Result<(Configuration, ConfinementCertificate)> {
    if n < 2 {
        return Err(Error::InvalidScale(format!("n = {n} < 2")));
    }
    if !(opts.growth > 1.0 && opts.growth.is_finite()) {
        return Err(Error::InvalidScale(format!("growth {} must exceed 1", opts.growth)));
    }
    let cap = n as u64 * opts.max_factor as u64;
    let mut half = 2 * n as u64;
    let mut tried = 0u32;
    let mut last: Option<(Configuration, BoxCheck)> = None;
    let stopped = loop {
        if half > cap && last.is_some() {
            break StopReason::HalfWidthCap;
        }
        let side = 2 * half + 1;
        if side.saturating_mul(side) > opts.vertex_budget as u64 || half > i32::MAX as u64 / 2 {
            if last.is_some() {
                break StopReason::VertexBudget;
            }
            return Err(Error::InvalidBox(format!("the first box [-{half},{half}]² exceeds the vertex budget")));
        }
        let bbox = LatticeBox::centered(half as i32)?;
        let config = sample_configuration(bbox, dist, seed);
        let check = check_box(&config, n)?;
        tried += 1;
        let done = match opts.goal {
            ConfinementGoal::Time => check.time_exact,
            ConfinementGoal::Paths => check.paths_confined,
        };
        if done {
            let cert = ConfinementCertificate {
                bbox,
                n,
                certified: true,
                time_exact: check.time_exact,
                witness: check.witness,
                time: config.time(check.time),
                boxes_tried: tried,
                stopped: None,
            };
            return Ok((config, cert));
        }
        last = Some((config, check));
        half = ((half as f64 * opts.growth).ceil() as u64).max(half + 1);
    };
    let (config, check) = last.expect("at least one box was tried");
    let cert = ConfinementCertificate {
        bbox: config.bbox(),
        n,
        certified: false,
        time_exact: check.time_exact,
        witness: if check.time_exact { check.witness } else { None },
        time: config.time(check.time),
        boxes_tried: tried,
        stopped: Some(stopped),
    };
    Ok((config, cert))
}
