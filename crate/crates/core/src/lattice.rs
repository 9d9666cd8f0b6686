//! Square-lattice geometry: vertices, edges, dual edges, boxes, annuli and
//! self-avoiding paths.
//!
//! Dual objects live at half-integer coordinates and are stored doubled so
//! that every computation stays in integers.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::random_field::{Configuration, PassageTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub x: i32,
    pub y: i32,
}

impl Vertex {
    pub const ORIGIN: Vertex = Vertex { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        Vertex { x, y }
    }

    /// Lattice neighbours in the fixed order east, north, west, south.
    pub fn neighbors(self) -> [Vertex; 4] {
        let Vertex { x, y } = self;
        [
            Vertex::new(x + 1, y),
            Vertex::new(x, y + 1),
            Vertex::new(x - 1, y),
            Vertex::new(x, y - 1),
        ]
    }

    pub fn is_adjacent(self, other: Vertex) -> bool {
        (self.x - other.x).abs() + (self.y - other.y).abs() == 1
    }

    pub fn dist2(self, other: Vertex) -> i64 {
        let dx = (self.x - other.x) as i64;
        let dy = (self.y - other.y) as i64;
        dx * dx + dy * dy
    }

    /// Row-major ordering key (rows are indexed by `y`).
    pub fn row_major(self) -> (i32, i32) {
        (self.y, self.x)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

impl Orientation {
    pub fn flip(self) -> Self {
        match self {
            Orientation::Horizontal => Orientation::Vertical,
            Orientation::Vertical => Orientation::Horizontal,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Orientation::Horizontal => 'H',
            Orientation::Vertical => 'V',
        }
    }
}

/// A primal edge, identified by its orientation and lower-left endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub orientation: Orientation,
    pub anchor: Vertex,
}

impl Edge {
    pub const fn horizontal(x: i32, y: i32) -> Self {
        Edge { orientation: Orientation::Horizontal, anchor: Vertex::new(x, y) }
    }

    pub const fn vertical(x: i32, y: i32) -> Self {
        Edge { orientation: Orientation::Vertical, anchor: Vertex::new(x, y) }
    }

    /// The edge joining two adjacent vertices, in either order.
    pub fn between(u: Vertex, v: Vertex) -> Option<Edge> {
        if !u.is_adjacent(v) {
            return None;
        }
        let a = if (u.y, u.x) <= (v.y, v.x) { u } else { v };
        Some(if u.y == v.y { Edge::horizontal(a.x, a.y) } else { Edge::vertical(a.x, a.y) })
    }

    pub fn endpoints(self) -> (Vertex, Vertex) {
        let a = self.anchor;
        match self.orientation {
            Orientation::Horizontal => (a, Vertex::new(a.x + 1, a.y)),
            Orientation::Vertical => (a, Vertex::new(a.x, a.y + 1)),
        }
    }

    pub fn has_endpoint(self, v: Vertex) -> bool {
        let (a, b) = self.endpoints();
        a == v || b == v
    }

    pub fn other_endpoint(self, v: Vertex) -> Option<Vertex> {
        let (a, b) = self.endpoints();
        if a == v {
            Some(b)
        } else if b == v {
            Some(a)
        } else {
            None
        }
    }

    pub fn dual(self) -> DualEdge {
        let Vertex { x, y } = self.anchor;
        match self.orientation {
            Orientation::Horizontal => DualEdge {
                orientation: Orientation::Vertical,
                anchor: DualVertex { x2: 2 * x as i64 + 1, y2: 2 * y as i64 - 1 },
            },
            Orientation::Vertical => DualEdge {
                orientation: Orientation::Horizontal,
                anchor: DualVertex { x2: 2 * x as i64 - 1, y2: 2 * y as i64 + 1 },
            },
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.orientation.letter(), self.anchor)
    }
}

pub fn edge_endpoints(e: Edge) -> (Vertex, Vertex) {
    e.endpoints()
}

pub fn dual_of(e: Edge) -> DualEdge {
    e.dual()
}

/// A vertex of the dual lattice Z² + (1/2, 1/2), stored with doubled
/// (hence odd) coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DualVertex {
    pub x2: i64,
    pub y2: i64,
}

impl DualVertex {
    /// Centre of the unit square whose lower-left corner is `v`.
    pub fn face_center(v: Vertex) -> Self {
        DualVertex { x2: 2 * v.x as i64 + 1, y2: 2 * v.y as i64 + 1 }
    }

    pub fn as_f64(self) -> (f64, f64) {
        (self.x2 as f64 / 2.0, self.y2 as f64 / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DualEdge {
    pub orientation: Orientation,
    pub anchor: DualVertex,
}

impl DualEdge {
    pub fn endpoints(self) -> (DualVertex, DualVertex) {
        let a = self.anchor;
        match self.orientation {
            Orientation::Horizontal => (a, DualVertex { x2: a.x2 + 2, y2: a.y2 }),
            Orientation::Vertical => (a, DualVertex { x2: a.x2, y2: a.y2 + 2 }),
        }
    }

    /// The primal edge this dual edge bisects.
    pub fn dual(self) -> Edge {
        let DualVertex { x2, y2 } = self.anchor;
        match self.orientation {
            Orientation::Vertical => Edge::horizontal(((x2 - 1) / 2) as i32, ((y2 + 1) / 2) as i32),
            Orientation::Horizontal => Edge::vertical(((x2 + 1) / 2) as i32, ((y2 - 1) / 2) as i32),
        }
    }
}

/// Closed axis-parallel box of lattice vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeBox {
    x_min: i32,
    x_max: i32,
    y_min: i32,
    y_max: i32,
}

impl LatticeBox {
    pub fn new(x_min: i32, x_max: i32, y_min: i32, y_max: i32) -> Result<Self> {
        if x_min > x_max || y_min > y_max {
            return Err(Error::InvalidBox(format!("[{x_min},{x_max}]x[{y_min},{y_max}] is empty")));
        }
        let w = x_max as i64 - x_min as i64 + 1;
        let h = y_max as i64 - y_min as i64 + 1;
        if w.checked_mul(h).map_or(true, |n| n > u32::MAX as i64) {
            return Err(Error::InvalidBox(format!("{w}x{h} vertices is too large")));
        }
        Ok(LatticeBox { x_min, x_max, y_min, y_max })
    }

    /// The square `[-half, half]²`.
    pub fn centered(half: i32) -> Result<Self> {
        LatticeBox::new(-half, half, -half, half)
    }

    pub fn x_min(&self) -> i32 {
        self.x_min
    }
    pub fn x_max(&self) -> i32 {
        self.x_max
    }
    pub fn y_min(&self) -> i32 {
        self.y_min
    }
    pub fn y_max(&self) -> i32 {
        self.y_max
    }

    /// Number of vertex columns.
    pub fn width(&self) -> usize {
        (self.x_max - self.x_min) as usize + 1
    }

    /// Number of vertex rows.
    pub fn height(&self) -> usize {
        (self.y_max - self.y_min) as usize + 1
    }

    pub fn num_vertices(&self) -> usize {
        self.width() * self.height()
    }

    pub fn num_horizontal_edges(&self) -> usize {
        (self.width() - 1) * self.height()
    }

    pub fn num_vertical_edges(&self) -> usize {
        self.width() * (self.height() - 1)
    }

    pub fn num_edges(&self) -> usize {
        self.num_horizontal_edges() + self.num_vertical_edges()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v.x >= self.x_min && v.x <= self.x_max && v.y >= self.y_min && v.y <= self.y_max
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        let (a, b) = e.endpoints();
        self.contains(a) && self.contains(b)
    }

    pub fn contains_box(&self, other: &LatticeBox) -> bool {
        other.x_min >= self.x_min
            && other.x_max <= self.x_max
            && other.y_min >= self.y_min
            && other.y_max <= self.y_max
    }

    pub fn on_boundary(&self, v: Vertex) -> bool {
        self.contains(v)
            && (v.x == self.x_min || v.x == self.x_max || v.y == self.y_min || v.y == self.y_max)
    }

    /// Row-major index of an in-box vertex.
    #[inline]
    pub fn index(&self, v: Vertex) -> usize {
        debug_assert!(self.contains(v), "{v} not in {self}");
        (v.y - self.y_min) as usize * self.width() + (v.x - self.x_min) as usize
    }

    pub fn try_index(&self, v: Vertex) -> Option<usize> {
        self.contains(v).then(|| self.index(v))
    }

    #[inline]
    pub fn vertex(&self, index: usize) -> Vertex {
        let w = self.width();
        Vertex::new(self.x_min + (index % w) as i32, self.y_min + (index / w) as i32)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.num_vertices()).map(move |i| self.vertex(i))
    }

    /// In-box neighbours of `v`, east, north, west, south.
    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        v.neighbors().into_iter().filter(move |u| self.contains(*u))
    }

    /// Edges in canonical order: row by row (increasing `y`), within a row
    /// first every horizontal edge then every vertical edge, each by
    /// increasing `x`.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let b = *self;
        (b.y_min..=b.y_max).flat_map(move |y| {
            let hs = (b.x_min..b.x_max).map(move |x| Edge::horizontal(x, y));
            let vs = (b.x_min..=b.x_max)
                .filter(move |_| y < b.y_max)
                .map(move |x| Edge::vertical(x, y));
            hs.chain(vs)
        })
    }

    /// Doubled centre, exact for boxes of either parity.
    pub fn center2(&self) -> (i64, i64) {
        (self.x_min as i64 + self.x_max as i64, self.y_min as i64 + self.y_max as i64)
    }
}

impl fmt::Display for LatticeBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]x[{},{}]", self.x_min, self.x_max, self.y_min, self.y_max)
    }
}

/// `outer ∖ inner` for two concentric boxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Annulus {
    outer: LatticeBox,
    inner: LatticeBox,
}

impl Annulus {
    pub fn new(outer: LatticeBox, inner: LatticeBox) -> Result<Self> {
        if outer.center2() != inner.center2() {
            return Err(Error::InvalidAnnulus(format!("{outer} and {inner} are not concentric")));
        }
        let strictly_inside = inner.x_min > outer.x_min
            && inner.x_max < outer.x_max
            && inner.y_min > outer.y_min
            && inner.y_max < outer.y_max;
        if !strictly_inside {
            return Err(Error::InvalidAnnulus(format!("{inner} not strictly inside {outer}")));
        }
        Ok(Annulus { outer, inner })
    }

    /// `[-outer, outer]² ∖ [-inner, inner]²`.
    pub fn centered(outer: i32, inner: i32) -> Result<Self> {
        Annulus::new(LatticeBox::centered(outer)?, LatticeBox::centered(inner)?)
    }

    pub fn outer(&self) -> LatticeBox {
        self.outer
    }

    pub fn inner(&self) -> LatticeBox {
        self.inner
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.outer.contains(v) && !self.inner.contains(v)
    }
}

/// The dyadic annuli `A_1..A_k` around the origin for a given `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusSequence {
    pub n: u32,
    pub delta1: f64,
    /// `n^(1-delta1)` rounded to the nearest integer, at least 1.
    pub base: i32,
    pub k: u32,
    annuli: Vec<Annulus>,
}

impl AnnulusSequence {
    pub fn annuli(&self) -> &[Annulus] {
        &self.annuli
    }

    /// `A_i`, 1-based.
    pub fn annulus(&self, i: u32) -> Option<&Annulus> {
        if i == 0 {
            return None;
        }
        self.annuli.get(i as usize - 1)
    }

    /// Half-width `2^i · base`.
    pub fn half_width(&self, i: u32) -> i32 {
        self.base << i
    }

    /// Outer box of `A_k`.
    pub fn outermost_box(&self) -> LatticeBox {
        self.annuli[self.annuli.len() - 1].outer
    }

    /// The rectangle `[2^{i-2} b, 2^{i+1} b] × [-2^{i-2} b, 2^{i-2} b]` that a
    /// left-right crossing must traverse for the event at index `i`.
    pub fn event_rectangle(&self, i: u32) -> Result<LatticeBox> {
        if i < 2 || i + 1 > self.k {
            return Err(Error::EventIndex { i, k: self.k });
        }
        let q = self.base << (i - 2);
        LatticeBox::new(q, self.base << (i + 1), -q, q)
    }
}

pub fn annulus_sequence(n: u32, delta1: f64) -> Result<AnnulusSequence> {
    if n < 4 {
        return Err(Error::InvalidScale(format!("n = {n} < 4")));
    }
    if !(delta1 > 0.0 && delta1 < 1.0) {
        return Err(Error::InvalidScale(format!("delta1 = {delta1} not in (0,1)")));
    }
    let base = ((n as f64).powf(1.0 - delta1).round() as i64).max(1);
    let mut k = 0u32;
    while (base << (k + 1)) <= n as i64 {
        k += 1;
    }
    if k < 3 {
        return Err(Error::TooFewAnnuli { k });
    }
    let base = base as i32;
    let annuli = (1..=k)
        .map(|i| Annulus::centered(base << i, base << (i - 1)))
        .collect::<Result<Vec<_>>>()?;
    Ok(AnnulusSequence { n, delta1, base, k, annuli })
}

/// A `delta1` for which `annulus_sequence(n, ·)` yields exactly three annuli
/// of the largest possible base, `max(1, ⌊n/8⌋)`.
pub fn auto_delta1(n: u32) -> f64 {
    let nf = n.max(2) as f64;
    let base = (n / 8).max(1) as f64;
    if base >= 2.0 {
        1.0 - base.ln() / nf.ln()
    } else {
        1.0 - 1.2f64.ln() / nf.ln()
    }
}

fn validate_steps(vertices: &[Vertex]) -> Result<()> {
    for w in vertices.windows(2) {
        if !w[0].is_adjacent(w[1]) {
            return Err(Error::InvalidPath(format!("{} and {} are not neighbours", w[0], w[1])));
        }
    }
    Ok(())
}

/// A vertex-self-avoiding lattice path.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticePath {
    vertices: Vec<Vertex>,
}

impl LatticePath {
    pub fn new(vertices: Vec<Vertex>) -> Result<Self> {
        validate_steps(&vertices)?;
        let mut seen = HashSet::with_capacity(vertices.len());
        for v in &vertices {
            if !seen.insert(*v) {
                return Err(Error::InvalidPath(format!("vertex {v} repeats")));
            }
        }
        Ok(LatticePath { vertices })
    }

    pub fn empty() -> Self {
        LatticePath { vertices: Vec::new() }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.vertices.windows(2).map(|w| Edge::between(w[0], w[1]).expect("validated steps"))
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start(&self) -> Option<Vertex> {
        self.vertices.first().copied()
    }

    pub fn end(&self) -> Option<Vertex> {
        self.vertices.last().copied()
    }

    pub fn into_vertices(self) -> Vec<Vertex> {
        self.vertices
    }
}

pub fn is_self_avoiding(vertices: &[Vertex]) -> bool {
    validate_steps(vertices).is_ok() && {
        let set: HashSet<_> = vertices.iter().collect();
        set.len() == vertices.len()
    }
}

/// A closed self-avoiding lattice path: first vertex equals last, all others
/// distinct.
#[derive(Debug, Clone)]
pub struct Circuit {
    vertices: Vec<Vertex>,
    members: HashSet<Vertex>,
    /// Per row `y`, the sorted `x` of circuit edges `V@(x, y)`; ray-parity
    /// lookups use it.
    crossings: BTreeMap<i32, Vec<i32>>,
}

impl PartialEq for Circuit {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
    }
}

impl Circuit {
    pub fn new(vertices: Vec<Vertex>) -> Result<Self> {
        if vertices.len() < 5 {
            return Err(Error::InvalidPath("a circuit needs at least four edges".into()));
        }
        if vertices.first() != vertices.last() {
            return Err(Error::InvalidPath("circuit does not close".into()));
        }
        validate_steps(&vertices)?;
        let open = &vertices[..vertices.len() - 1];
        let members: HashSet<Vertex> = open.iter().copied().collect();
        if members.len() != open.len() {
            return Err(Error::InvalidPath("circuit repeats a vertex".into()));
        }
        let mut crossings: BTreeMap<i32, Vec<i32>> = BTreeMap::new();
        for w in vertices.windows(2) {
            let e = Edge::between(w[0], w[1]).expect("validated");
            if e.orientation == Orientation::Vertical {
                crossings.entry(e.anchor.y).or_default().push(e.anchor.x);
            }
        }
        for xs in crossings.values_mut() {
            xs.sort_unstable();
        }
        Ok(Circuit { vertices, members, crossings })
    }

    /// Vertices with the closing repetition.
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.vertices.windows(2).map(|w| Edge::between(w[0], w[1]).expect("validated"))
    }

    pub fn contains_vertex(&self, v: Vertex) -> bool {
        self.members.contains(&v)
    }

    /// Whether `v`, not on the circuit, lies in the bounded component of its
    /// complement. Parity of circuit edges crossed by the ray from `v`
    /// towards +x at height `v.y + 1/2`.
    pub fn encloses(&self, v: Vertex) -> bool {
        if self.contains_vertex(v) {
            return false;
        }
        match self.crossings.get(&v.y) {
            None => false,
            Some(xs) => {
                let right = xs.len() - xs.partition_point(|&x| x <= v.x);
                right % 2 == 1
            }
        }
    }

    /// True when the circuit avoids `b` and winds once around it.
    pub fn surrounds(&self, b: &LatticeBox) -> bool {
        self.vertices.iter().all(|v| !b.contains(*v))
            && self.encloses(Vertex::new(b.x_min(), b.y_min()))
    }
}

/// Sum of edge weights along a path.
pub fn path_passage_time(path: &LatticePath, config: &Configuration) -> Result<PassageTime> {
    let mut units = 0u64;
    for e in path.edges() {
        units += config.weight(e)?;
    }
    Ok(config.time(units))
}

/// One vertex per line, `x y`.
pub fn write_vertex_list(vertices: &[Vertex]) -> String {
    let mut out = String::with_capacity(vertices.len() * 8);
    for v in vertices {
        out.push_str(&format!("{} {}\n", v.x, v.y));
    }
    out
}

/// Parses the `x y` per-line vertex list; blank lines are skipped.
pub fn parse_vertex_list(text: &str) -> Result<Vec<Vertex>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse = |s: Option<&str>| -> Result<i32> {
            let s = s.ok_or_else(|| Error::Parse { line: i + 1, msg: "expected `x y`".into() })?;
            s.parse::<i32>().map_err(|e| Error::Parse { line: i + 1, msg: format!("{s:?}: {e}") })
        };
        let x = parse(parts.next())?;
        let y = parse(parts.next())?;
        if parts.next().is_some() {
            return Err(Error::Parse { line: i + 1, msg: "trailing tokens".into() });
        }
        out.push(Vertex::new(x, y));
    }
    Ok(out)
}
