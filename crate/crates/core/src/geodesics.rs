//! Counting self-avoiding optimal paths, a brute-force oracle, optimal-path
//! lengths, and the accessible-square lower bound on the count.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::critical_geometry::{
    accessible_along, companion, event_parts, good_square_candidates, region_split, thin_three_disjoint, UnitSquare,
};
use crate::error::{Error, Result};
use crate::lattice::{annulus_sequence, Circuit, Edge, LatticePath, Vertex};
use crate::passage::{distance_field, tight_step};
use crate::random_field::{Configuration, PassageTime};

/// Default enumeration-step budget.
pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverflowReason {
    CountCap,
    StepBudget,
}

impl fmt::Display for OverflowReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OverflowReason::CountCap => "cap",
            OverflowReason::StepBudget => "steps",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Overflow {
    pub cap: BigUint,
    pub reason: OverflowReason,
    pub steps: u64,
    /// Paths completed before the enumeration stopped.
    pub lower_bound: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeodesicCount {
    Exact(BigUint),
    Overflow(Overflow),
}

impl GeodesicCount {
    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            GeodesicCount::Exact(n) => Some(n),
            GeodesicCount::Overflow(_) => None,
        }
    }

    pub fn is_overflow(&self) -> bool {
        matches!(self, GeodesicCount::Overflow(_))
    }

    /// The exact value, or the number of paths seen before overflow.
    pub fn lower_bound(&self) -> &BigUint {
        match self {
            GeodesicCount::Exact(n) => n,
            GeodesicCount::Overflow(o) => &o.lower_bound,
        }
    }
}

impl fmt::Display for GeodesicCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeodesicCount::Exact(n) => write!(f, "{n}"),
            GeodesicCount::Overflow(o) => write!(f, ">{} ({} after {} steps)", o.cap, o.reason, o.steps),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountLimits {
    pub cap: BigUint,
    pub step_budget: u64,
}

impl CountLimits {
    pub fn new(cap: u64, step_budget: u64) -> Self {
        CountLimits { cap: BigUint::from(cap), step_budget }
    }
}

impl Default for CountLimits {
    fn default() -> Self {
        CountLimits::new(1_000_000_000, DEFAULT_STEP_BUDGET)
    }
}

/// Number of completions from a vertex and their length range.
#[derive(Debug, Clone, Default)]
struct Tally {
    count: BigUint,
    min: u32,
    max: u32,
}

impl Tally {
    fn add(&mut self, other: &Tally, offset: u32) {
        if other.count.is_zero() {
            return;
        }
        if self.count.is_zero() {
            self.min = other.min + offset;
            self.max = other.max + offset;
        } else {
            self.min = self.min.min(other.min + offset);
            self.max = self.max.max(other.max + offset);
        }
        self.count += &other.count;
    }

    fn arrival() -> Tally {
        Tally { count: BigUint::one(), min: 0, max: 0 }
    }
}

struct Frame {
    v: usize,
    dir: u8,
    depth: u32,
    level_root: bool,
    acc: Tally,
}

/// Result of one counting run.
#[derive(Debug, Clone, PartialEq)]
pub struct CountReport {
    pub count: GeodesicCount,
    pub time: PassageTime,
    /// Shortest and longest optimal path seen, in edges.
    pub min_len: Option<u32>,
    pub max_len: Option<u32>,
    pub steps: u64,
    /// Vertices on some optimal walk; one less bounds every optimal path's
    /// length.
    pub tight_vertices: usize,
}

/// Counts self-avoiding optimal paths from `s` to `t` in the configuration's
/// box.
///
/// Depth-first extension along tight steps `u → w` with
/// `d_s(u) + t(uw) + d_t(w) = T`, never revisiting a vertex. Along such a
/// prefix the elapsed time is `d_s`, which only grows, so after a positive
/// step into `w` no earlier vertex can be met again: the number of
/// completions from `w` is then independent of the prefix and is memoized.
pub fn count_geodesics(config: &Configuration, s: Vertex, t: Vertex, limits: &CountLimits) -> Result<CountReport> {
    let bbox = config.bbox();
    for v in [s, t] {
        if !bbox.contains(v) {
            return Err(Error::VertexOutsideBox { vertex: v, bbox });
        }
    }
    let ds = distance_field(config, &[s])?;
    let dt = distance_field(config, &[t])?;
    let total = ds.units(t).ok_or(Error::Unreachable)?;
    let tight_vertices = (0..bbox.num_vertices())
        .filter(|&i| matches!((ds.units_at(i), dt.units_at(i)), (Some(a), Some(b)) if a + b == total))
        .count();
    let time = config.time(total);
    if s == t {
        return Ok(CountReport {
            count: GeodesicCount::Exact(BigUint::one()),
            time,
            min_len: Some(0),
            max_len: Some(0),
            steps: 0,
            tight_vertices,
        });
    }
    let (fs, bs) = (ds.raw(), dt.raw());
    let (si, ti) = (bbox.index(s), bbox.index(t));
    let mut memo: HashMap<usize, Tally> = HashMap::new();
    let mut on_path = vec![false; bbox.num_vertices()];
    on_path[si] = true;
    let mut stack = vec![Frame { v: si, dir: 0, depth: 0, level_root: true, acc: Tally::default() }];
    let mut steps = 0u64;

    let abort = |stack: &[Frame], reason: OverflowReason, steps: u64| -> CountReport {
        let mut seen = Tally::default();
        for f in stack {
            seen.add(&f.acc, f.depth);
        }
        let nonzero = !seen.count.is_zero();
        CountReport {
            count: GeodesicCount::Overflow(Overflow {
                cap: limits.cap.clone(),
                reason,
                steps,
                lower_bound: seen.count,
            }),
            time,
            min_len: nonzero.then_some(seen.min),
            max_len: nonzero.then_some(seen.max),
            steps,
            tight_vertices,
        }
    };

    loop {
        let top = stack.last_mut().expect("stack holds the root until the end");
        if top.dir == 4 {
            let done = stack.pop().expect("nonempty");
            on_path[done.v] = false;
            let Some(parent) = stack.last_mut() else {
                let nonzero = !done.acc.count.is_zero();
                return Ok(CountReport {
                    count: GeodesicCount::Exact(done.acc.count),
                    time,
                    min_len: nonzero.then_some(done.acc.min),
                    max_len: nonzero.then_some(done.acc.max),
                    steps,
                    tight_vertices,
                });
            };
            parent.acc.add(&done.acc, 1);
            if done.level_root {
                memo.insert(done.v, done.acc);
            }
            if parent.acc.count > limits.cap {
                return Ok(abort(&stack, OverflowReason::CountCap, steps));
            }
            continue;
        }
        let d = top.dir;
        top.dir += 1;
        let Some((w, wt)) = config.neighbor(top.v, d) else { continue };
        if on_path[w] || !tight_step(fs, bs, total, top.v, w, wt) {
            continue;
        }
        steps += 1;
        if steps > limits.step_budget {
            return Ok(abort(&stack, OverflowReason::StepBudget, steps));
        }
        if w == ti {
            top.acc.add(&Tally::arrival(), 1);
        } else if wt > 0 {
            if let Some(m) = memo.get(&w) {
                top.acc.add(m, 1);
            } else {
                let depth = top.depth + 1;
                on_path[w] = true;
                stack.push(Frame { v: w, dir: 0, depth, level_root: true, acc: Tally::default() });
                continue;
            }
        } else {
            let depth = top.depth + 1;
            on_path[w] = true;
            stack.push(Frame { v: w, dir: 0, depth, level_root: false, acc: Tally::default() });
            continue;
        }
        if top.acc.count > limits.cap {
            return Ok(abort(&stack, OverflowReason::CountCap, steps));
        }
    }
}

/// [`count_geodesics`] with the default step budget.
pub fn count_geodesics_exact(config: &Configuration, s: Vertex, t: Vertex, cap: &BigUint) -> Result<GeodesicCount> {
    let limits = CountLimits { cap: cap.clone(), step_budget: DEFAULT_STEP_BUDGET };
    Ok(count_geodesics(config, s, t, &limits)?.count)
}

/// Optimal paths from `s` to `t` whose every step increases `(d_s, h)`,
/// where `h` is the hop distance from `s` along tight steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneCount {
    pub count: BigUint,
    /// Longest such path, in edges.
    pub max_len: u32,
    /// One path of length `max_len`.
    pub longest: LatticePath,
}

struct TightField {
    fs: Vec<u64>,
    bs: Vec<u64>,
    total: u64,
}

impl TightField {
    fn new(config: &Configuration, s: Vertex, t: Vertex) -> Result<Self> {
        let bbox = config.bbox();
        for v in [s, t] {
            if !bbox.contains(v) {
                return Err(Error::VertexOutsideBox { vertex: v, bbox });
            }
        }
        let ds = distance_field(config, &[s])?;
        let dt = distance_field(config, &[t])?;
        let total = ds.units(t).ok_or(Error::Unreachable)?;
        Ok(TightField { fs: ds.raw().to_vec(), bs: dt.raw().to_vec(), total })
    }

    fn step(&self, u: usize, w: usize, weight: u64) -> bool {
        tight_step(&self.fs, &self.bs, self.total, u, w, weight)
    }
}

/// Counts the monotone optimal paths of [`MonotoneCount`]. They cannot
/// revisit a vertex, so the count bounds the geodesic count from below and
/// `max_len` bounds the longest geodesic from below. A dynamic program over
/// tight vertices; it never overflows.
pub fn monotone_paths(config: &Configuration, s: Vertex, t: Vertex) -> Result<MonotoneCount> {
    let bbox = config.bbox();
    let tf = TightField::new(config, s, t)?;
    let (si, ti) = (bbox.index(s), bbox.index(t));
    let mut hop = vec![u32::MAX; bbox.num_vertices()];
    let mut order = vec![si];
    hop[si] = 0;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        config.for_each_neighbor(u, |w, wt| {
            if hop[w] == u32::MAX && tf.step(u, w, wt) {
                hop[w] = hop[u] + 1;
                order.push(w);
            }
        });
    }
    order.sort_by_key(|&v| (tf.fs[v], hop[v]));
    // Tally of paths into each vertex, and the predecessor on a longest one.
    let mut ways: HashMap<usize, (Tally, usize)> = HashMap::from([(si, (Tally::arrival(), si))]);
    for &u in &order {
        if u == ti {
            continue;
        }
        let Some((f, _)) = ways.get(&u).cloned() else { continue };
        config.for_each_neighbor(u, |w, wt| {
            if tf.step(u, w, wt) && (wt > 0 || hop[w] == hop[u] + 1) {
                let e = ways.entry(w).or_insert_with(|| (Tally::default(), u));
                if e.0.count.is_zero() || f.max + 1 > e.0.max {
                    e.1 = u;
                }
                e.0.add(&f, 1);
            }
        });
    }
    let Some((end, _)) = ways.get(&ti).cloned() else {
        return Err(Error::Unreachable);
    };
    let mut rev = vec![ti];
    while *rev.last().expect("nonempty") != si {
        rev.push(ways[rev.last().expect("nonempty")].1);
    }
    let longest = LatticePath::new(rev.into_iter().rev().map(|i| bbox.vertex(i)).collect())?;
    Ok(MonotoneCount { count: end.count, max_len: end.max, longest })
}

/// Vertices examined per detour search.
pub const DETOUR_SEARCH_LIMIT: usize = 512;

/// A tight route from `base[from]` to `base[to]` through `interior`, which
/// avoids `base` and every other detour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detour {
    pub from: usize,
    pub to: usize,
    pub interior: Vec<Vertex>,
}

/// An optimal path with pairwise disjoint detours over non-overlapping
/// stretches. Each subset of detours gives a different optimal path, so
/// there are at least `2^k` of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetourBound {
    pub base: LatticePath,
    pub detours: Vec<Detour>,
}

impl DetourBound {
    pub fn k(&self) -> usize {
        self.detours.len()
    }

    pub fn lower_bound(&self) -> BigUint {
        BigUint::one() << self.detours.len()
    }

    /// The base path with detour `i` taken wherever `chosen[i]`.
    pub fn apply(&self, chosen: &[bool]) -> Result<LatticePath> {
        let vs = self.base.vertices();
        let mut out = Vec::with_capacity(vs.len());
        let mut i = 0;
        let mut next = self.detours.iter().zip(chosen).filter(|(_, &c)| c).map(|(d, _)| d).peekable();
        while i < vs.len() {
            out.push(vs[i]);
            match next.peek() {
                Some(d) if d.from == i => {
                    out.extend_from_slice(&d.interior);
                    i = d.to;
                    next.next();
                }
                _ => i += 1,
            }
        }
        LatticePath::new(out)
    }
}

/// Takes a longest monotone optimal path and, walking along it, greedily
/// attaches the tight detour that rejoins it soonest.
pub fn detour_bound(config: &Configuration, s: Vertex, t: Vertex) -> Result<DetourBound> {
    let bbox = config.bbox();
    let tf = TightField::new(config, s, t)?;
    let base = monotone_paths(config, s, t)?.longest;
    let gidx: Vec<usize> = base.vertices().iter().map(|&v| bbox.index(v)).collect();
    let position: HashMap<usize, usize> = gidx.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let mut used = vec![false; bbox.num_vertices()];
    for &i in &gidx {
        used[i] = true;
    }
    let mut detours = Vec::new();
    let mut a = 0;
    while a + 1 < gidx.len() {
        let start = gidx[a];
        let mut parent: HashMap<usize, usize> = HashMap::new();
        let mut queue = std::collections::VecDeque::from([start]);
        let mut best: Option<(usize, usize)> = None;
        let mut seen = 0;
        while let Some(u) = queue.pop_front() {
            seen += 1;
            if seen > DETOUR_SEARCH_LIMIT {
                break;
            }
            config.for_each_neighbor(u, |w, wt| {
                if !tf.step(u, w, wt) {
                    return;
                }
                if let Some(&b) = position.get(&w) {
                    let same_edge = u == start && b == a + 1;
                    if b > a && !same_edge && best.is_none_or(|(bb, _)| b < bb) {
                        best = Some((b, u));
                    }
                } else if !used[w] && w != start && !parent.contains_key(&w) {
                    parent.insert(w, u);
                    queue.push_back(w);
                }
            });
        }
        let Some((b, last)) = best else {
            a += 1;
            continue;
        };
        let mut interior = Vec::new();
        let mut v = last;
        while v != start {
            interior.push(v);
            used[v] = true;
            v = parent[&v];
        }
        interior.reverse();
        detours.push(Detour { from: a, to: b, interior: interior.iter().map(|&i| bbox.vertex(i)).collect() });
        a = b;
    }
    Ok(DetourBound { base, detours })
}

/// An optimal path from `s` to `t` with the fewest edges. Breadth-first over
/// tight steps, so it runs in linear time.
pub fn shortest_optimal_path(config: &Configuration, s: Vertex, t: Vertex) -> Result<LatticePath> {
    let bbox = config.bbox();
    let tf = TightField::new(config, s, t)?;
    let (si, ti) = (bbox.index(s), bbox.index(t));
    let mut parent = vec![usize::MAX; bbox.num_vertices()];
    parent[si] = si;
    let mut queue = std::collections::VecDeque::from([si]);
    while let Some(u) = queue.pop_front() {
        if u == ti {
            break;
        }
        config.for_each_neighbor(u, |w, wt| {
            if parent[w] == usize::MAX && tf.step(u, w, wt) {
                parent[w] = u;
                queue.push_back(w);
            }
        });
    }
    let mut vs = vec![t];
    let mut v = ti;
    while v != si {
        v = parent[v];
        vs.push(bbox.vertex(v));
    }
    vs.reverse();
    LatticePath::new(vs)
}

/// Up to `limit` optimal self-avoiding paths from `s` to `t`, in depth-first
/// order with neighbours east, north, west, south. Dead ends inside large
/// zero-weight regions can make this exponentially slow.
pub fn optimal_paths(config: &Configuration, s: Vertex, t: Vertex, limit: usize) -> Result<Vec<LatticePath>> {
    let bbox = config.bbox();
    for v in [s, t] {
        if !bbox.contains(v) {
            return Err(Error::VertexOutsideBox { vertex: v, bbox });
        }
    }
    let ds = distance_field(config, &[s])?;
    let dt = distance_field(config, &[t])?;
    let total = ds.units(t).ok_or(Error::Unreachable)?;
    let (fs, bs) = (ds.raw(), dt.raw());
    let ti = bbox.index(t);
    let mut out = Vec::new();
    if limit == 0 {
        return Ok(out);
    }
    if s == t {
        out.push(LatticePath::new(vec![s])?);
        return Ok(out);
    }
    let mut on_path = vec![false; bbox.num_vertices()];
    let mut path = vec![bbox.index(s)];
    let mut dirs = vec![0u8];
    on_path[path[0]] = true;
    while let Some(&v) = path.last() {
        let d = *dirs.last().expect("parallel stacks");
        if d == 4 {
            on_path[v] = false;
            path.pop();
            dirs.pop();
            continue;
        }
        *dirs.last_mut().expect("parallel stacks") += 1;
        let Some((w, wt)) = config.neighbor(v, d) else { continue };
        if on_path[w] || !tight_step(fs, bs, total, v, w, wt) {
            continue;
        }
        if w == ti {
            let mut vs: Vec<Vertex> = path.iter().map(|&i| bbox.vertex(i)).collect();
            vs.push(t);
            out.push(LatticePath::new(vs)?);
            if out.len() >= limit {
                break;
            }
            continue;
        }
        on_path[w] = true;
        path.push(w);
        dirs.push(0);
    }
    Ok(out)
}

/// Edge limit for the brute-force oracle.
pub const BRUTE_FORCE_MAX_EDGES: usize = 40;

/// All optimal paths found by exhaustive self-avoiding enumeration, with
/// their common time. No pruning and no distance fields.
pub fn bruteforce_optimal_paths(config: &Configuration, s: Vertex, t: Vertex) -> Result<(PassageTime, Vec<LatticePath>)> {
    let bbox = config.bbox();
    if bbox.num_edges() > BRUTE_FORCE_MAX_EDGES {
        return Err(Error::BoxTooLarge { edges: bbox.num_edges(), limit: BRUTE_FORCE_MAX_EDGES });
    }
    for v in [s, t] {
        if !bbox.contains(v) {
            return Err(Error::VertexOutsideBox { vertex: v, bbox });
        }
    }
    struct Search<'a> {
        config: &'a Configuration,
        t: Vertex,
        path: Vec<Vertex>,
        best: Option<u64>,
        found: Vec<Vec<Vertex>>,
    }
    impl Search<'_> {
        fn go(&mut self, cost: u64) {
            let v = *self.path.last().expect("nonempty");
            if v == self.t {
                match self.best {
                    Some(b) if cost > b => {}
                    Some(b) if cost == b => self.found.push(self.path.clone()),
                    _ => {
                        self.best = Some(cost);
                        self.found = vec![self.path.clone()];
                    }
                }
                return;
            }
            for w in v.neighbors() {
                if !self.config.bbox().contains(w) || self.path.contains(&w) {
                    continue;
                }
                let e = Edge::between(v, w).expect("neighbours");
                let c = self.config.weight(e).expect("in box");
                self.path.push(w);
                self.go(cost + c);
                self.path.pop();
            }
        }
    }
    let mut search = Search { config, t, path: vec![s], best: None, found: Vec::new() };
    search.go(0);
    let best = search.best.ok_or(Error::Unreachable)?;
    let paths = search.found.into_iter().map(LatticePath::new).collect::<Result<Vec<_>>>()?;
    Ok((config.time(best), paths))
}

pub fn count_geodesics_bruteforce(config: &Configuration, s: Vertex, t: Vertex) -> Result<GeodesicCount> {
    let (_, paths) = bruteforce_optimal_paths(config, s, t)?;
    Ok(GeodesicCount::Exact(BigUint::from(paths.len())))
}

/// Lengths of optimal paths.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicLengthStats {
    pub min_len: Option<u32>,
    pub max_len: Option<u32>,
    /// Lengths of the first few paths in enumeration order.
    pub sample_lengths: Vec<u32>,
    /// Whether the enumeration finished, making `min_len`/`max_len` exact.
    pub exact: bool,
    /// Under overflow, an upper bound on every optimal path's length (tight
    /// vertex count minus one); flagged as heuristic since it ignores
    /// self-avoidance.
    pub heuristic_upper: Option<u32>,
}

/// Number of leading paths whose lengths are sampled.
pub const LENGTH_SAMPLE: usize = 64;

pub fn max_geodesic_length(config: &Configuration, s: Vertex, t: Vertex, cap: &BigUint) -> Result<GeodesicLengthStats> {
    let limits = CountLimits { cap: cap.clone(), step_budget: DEFAULT_STEP_BUDGET };
    let report = count_geodesics(config, s, t, &limits)?;
    length_stats(config, s, t, &report)
}

pub fn length_stats(config: &Configuration, s: Vertex, t: Vertex, report: &CountReport) -> Result<GeodesicLengthStats> {
    let sample_lengths = optimal_paths(config, s, t, LENGTH_SAMPLE)?.iter().map(|p| p.len() as u32).collect();
    let exact = !report.count.is_overflow();
    Ok(GeodesicLengthStats {
        min_len: report.min_len,
        max_len: report.max_len,
        sample_lengths,
        exact,
        heuristic_upper: (!exact).then(|| report.tight_vertices.saturating_sub(1) as u32),
    })
}

/// Evidence that at least `2^kappa` optimal paths exist.
#[derive(Debug, Clone, PartialEq)]
pub struct CountCertificate {
    /// Even index of the first annulus event that occurred.
    pub m: u32,
    pub kappa: usize,
    pub lower_bound: BigUint,
    pub witness_squares: Vec<UnitSquare>,
    /// For each witness, the edge of its companion square on `gamma`.
    pub witness_edges: Vec<Edge>,
    /// Lowest crossing of the event rectangle.
    pub crossing: LatticePath,
    /// The part of the crossing from its last vertex on `inner` to the next
    /// vertex on `outer`.
    pub gamma: LatticePath,
    pub inner: Circuit,
    pub outer: Circuit,
    /// Good squares along `gamma` after thinning, before the accessibility
    /// filter.
    pub good_squares: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertificateOutcome {
    Certificate(CountCertificate),
    NotApplicable,
}

impl CertificateOutcome {
    pub fn certificate(&self) -> Option<&CountCertificate> {
        match self {
            CertificateOutcome::Certificate(c) => Some(c),
            CertificateOutcome::NotApplicable => None,
        }
    }

    pub fn kappa(&self) -> Option<usize> {
        self.certificate().map(|c| c.kappa)
    }
}

/// Scans even `m` for the annulus event; at the first one, counts
/// accessible good squares along the crossing between the innermost circuit
/// of `A_{m-1}` and the outermost circuit of `A_{m+1}`. Each accessible
/// square doubles the number of optimal paths from the origin to `(n, 0)`.
pub fn lower_bound_certificate(config: &Configuration, n: u32, delta1: f64) -> Result<CertificateOutcome> {
    let seq = annulus_sequence(n, delta1)?;
    let outermost = seq.outermost_box();
    if !config.bbox().contains_box(&outermost) {
        return Err(Error::InvalidBox(format!("{} does not contain {outermost}", config.bbox())));
    }
    let mut m = 2;
    while m < seq.k {
        let parts = event_parts(config, m, &seq)?;
        if let (Some(inner), Some(outer), Some(crossing)) = (parts.inner, parts.outer, parts.crossing) {
            return Ok(certificate_from(config, m, parts.rectangle, crossing.path, inner.circuit, outer.circuit));
        }
        m += 2;
    }
    Ok(CertificateOutcome::NotApplicable)
}

fn certificate_from(
    config: &Configuration,
    m: u32,
    rectangle: crate::lattice::LatticeBox,
    crossing: LatticePath,
    inner: Circuit,
    outer: Circuit,
) -> CertificateOutcome {
    let vs = crossing.vertices();
    let Some(a) = vs.iter().rposition(|v| inner.contains_vertex(*v)) else {
        return CertificateOutcome::NotApplicable;
    };
    let Some(b) = vs[a..].iter().position(|v| outer.contains_vertex(*v)).map(|k| a + k) else {
        return CertificateOutcome::NotApplicable;
    };
    let gamma = LatticePath::new(vs[a..=b].to_vec()).expect("sub-path of a self-avoiding path");
    let gamma_edges: HashSet<Edge> = gamma.edges().collect();
    let between = |v: Vertex| {
        !inner.contains_vertex(v) && !inner.encloses(v) && outer.encloses(v)
    };
    let split = region_split(&crossing, rectangle);
    let candidates = good_square_candidates(&crossing, rectangle, &split, 1)
        .into_iter()
        .map(|g| g.square)
        .filter(|s| s.vertices().all(between))
        .filter(|s| companion(*s, &gamma_edges).is_some());
    let goods = thin_three_disjoint(candidates);
    let witnesses = accessible_along(config, &gamma_edges, &goods).expect("unit squares");
    let witness_edges = witnesses
        .iter()
        .map(|s| companion(*s, &gamma_edges).expect("filtered above").1)
        .collect();
    let kappa = witnesses.len();
    CertificateOutcome::Certificate(CountCertificate {
        m,
        kappa,
        lower_bound: BigUint::one() << kappa,
        witness_squares: witnesses,
        witness_edges,
        crossing,
        gamma,
        inner,
        outer,
        good_squares: goods.len(),
    })
}

/// Walks along a closed circuit from `from` to `to`, choosing the shorter
/// direction.
fn circuit_arc(c: &Circuit, from: Vertex, to: Vertex) -> Vec<Vertex> {
    let ring = &c.vertices()[..c.len()];
    let i = ring.iter().position(|v| *v == from).expect("on circuit");
    let j = ring.iter().position(|v| *v == to).expect("on circuit");
    let len = ring.len();
    let fwd = (j + len - i) % len;
    if fwd <= len - fwd {
        (0..=fwd).map(|k| ring[(i + k) % len]).collect()
    } else {
        (0..=len - fwd).map(|k| ring[(i + len - k) % len]).collect()
    }
}

/// The optimal path the certificate's detours are applied to: an optimal
/// path up to its first vertex on the inner circuit, around the inner
/// circuit to `gamma`, along `gamma`, around the outer circuit, and back on
/// the optimal path after its last vertex on the outer circuit.
pub fn certificate_base_path(config: &Configuration, cert: &CountCertificate, n: u32) -> Result<LatticePath> {
    let t = Vertex::new(n as i32, 0);
    let opt = shortest_optimal_path(config, Vertex::ORIGIN, t)?;
    let ov = opt.vertices();
    let a = ov.iter().position(|v| cert.inner.contains_vertex(*v)).ok_or(Error::InvalidPath("misses inner circuit".into()))?;
    let b = ov.iter().rposition(|v| cert.outer.contains_vertex(*v)).ok_or(Error::InvalidPath("misses outer circuit".into()))?;
    let g = cert.gamma.vertices();
    let mut out: Vec<Vertex> = ov[..a].to_vec();
    out.extend(circuit_arc(&cert.inner, ov[a], g[0]));
    out.extend_from_slice(&g[1..]);
    out.extend(circuit_arc(&cert.outer, g[g.len() - 1], ov[b]).into_iter().skip(1));
    out.extend_from_slice(&ov[b + 1..]);
    LatticePath::new(out)
}

/// Replaces the companion edge of each chosen witness by the other three
/// sides of its companion square.
pub fn apply_detours(base: &LatticePath, cert: &CountCertificate, chosen: &[usize]) -> Result<LatticePath> {
    let mut vs = base.vertices().to_vec();
    for &k in chosen {
        let square = cert.witness_squares.get(k).ok_or(Error::InvalidPath(format!("no witness {k}")))?;
        let (p, q) = cert.witness_edges[k].endpoints();
        let i = vs
            .windows(2)
            .position(|w| (w[0] == p && w[1] == q) || (w[0] == q && w[1] == p))
            .ok_or(Error::InvalidPath(format!("edge {} not on path", cert.witness_edges[k])))?;
        let corner = |x: Vertex| {
            square.vertices().find(|c| c.is_adjacent(x)).expect("companion shares a side with the square")
        };
        let (u, w) = (vs[i], vs[i + 1]);
        vs.splice(i + 1..i + 1, [corner(u), corner(w)]);
    }
    LatticePath::new(vs)
}
