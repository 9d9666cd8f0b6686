//! Percolation geometry of the open edges: crossings, the lowest crossing and
//! its three-arm check, annulus circuits, good and accessible squares.
//!
//! Interfaces are found on the face grid of a box. Each unit face is a node;
//! two nodes are adjacent through the primal edge separating them. The region
//! outside the box is collapsed into pseudo-nodes (below/above for a strip,
//! the outer region for an annulus), and for an annulus every face touching
//! the inner box is merged into one inner node.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::lattice::{
    write_vertex_list, Annulus, AnnulusSequence, Circuit, Edge, LatticeBox, LatticePath, Orientation, Vertex,
};
use crate::random_field::Configuration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    LeftRight,
    TopBottom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub path: LatticePath,
    pub bbox: LatticeBox,
    pub direction: Direction,
}

impl Crossing {
    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }

    pub fn to_vertex_list(&self) -> String {
        write_vertex_list(self.path.vertices())
    }
}

fn assert_inside(config: &Configuration, bbox: &LatticeBox) {
    assert!(
        config.bbox().contains_box(bbox),
        "box {bbox} is not inside the configuration box {}",
        config.bbox()
    );
}

#[inline]
fn open(config: &Configuration, e: Edge) -> bool {
    config.weight(e).expect("edge inside configuration") == 0
}

/// Breadth-first search over open edges from one side of `bbox` to the
/// opposite side.
pub fn has_open_crossing(config: &Configuration, bbox: LatticeBox, direction: Direction) -> bool {
    assert_inside(config, &bbox);
    let (starts, is_goal): (Vec<Vertex>, Box<dyn Fn(Vertex) -> bool>) = match direction {
        Direction::LeftRight => (
            (bbox.y_min()..=bbox.y_max()).map(|y| Vertex::new(bbox.x_min(), y)).collect(),
            Box::new(move |v: Vertex| v.x == bbox.x_max()),
        ),
        Direction::TopBottom => (
            (bbox.x_min()..=bbox.x_max()).map(|x| Vertex::new(x, bbox.y_max())).collect(),
            Box::new(move |v: Vertex| v.y == bbox.y_min()),
        ),
    };
    let mut seen = vec![false; bbox.num_vertices()];
    let mut queue = VecDeque::new();
    for s in starts {
        seen[bbox.index(s)] = true;
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        if is_goal(v) {
            return true;
        }
        for w in bbox.neighbors(v) {
            let i = bbox.index(w);
            if !seen[i] && config.open_between(v, w) {
                seen[i] = true;
                queue.push_back(w);
            }
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    /// Left and right sides are walls; below and above are pseudo-nodes.
    Strip,
    /// Every side leads to the outer pseudo-node; faces touching `inner`
    /// form the inner pseudo-node.
    Ring(LatticeBox),
}

/// Face graph of a box. Node ids below `faces` are faces; `faces` and
/// `faces + 1` are the low (below / inner) and high (above / outer)
/// pseudo-nodes.
struct FaceGraph<'a> {
    config: &'a Configuration,
    bbox: LatticeBox,
    fw: usize,
    fh: usize,
    layout: Layout,
    node_of: Vec<u32>,
    links: [Vec<(u32, u8)>; 2],
}

impl<'a> FaceGraph<'a> {
    fn new(config: &'a Configuration, bbox: LatticeBox, layout: Layout) -> Self {
        let fw = bbox.width() - 1;
        let fh = bbox.height() - 1;
        let faces = fw * fh;
        let low = faces as u32;
        let node_of: Vec<u32> = (0..faces)
            .map(|f| {
                let x = bbox.x_min() + (f % fw) as i32;
                let y = bbox.y_min() + (f / fw) as i32;
                match layout {
                    Layout::Ring(inner)
                        if x + 1 >= inner.x_min()
                            && x <= inner.x_max()
                            && y + 1 >= inner.y_min()
                            && y <= inner.y_max() =>
                    {
                        low
                    }
                    _ => f as u32,
                }
            })
            .collect();
        let mut g = FaceGraph { config, bbox, fw, fh, layout, node_of, links: [Vec::new(), Vec::new()] };
        for f in 0..faces {
            let a = g.node_of[f];
            for d in 0..4u8 {
                let Some((b, _)) = g.step(f, d) else { continue };
                if a == b {
                    continue;
                }
                if a < low {
                    if b >= low {
                        g.links[(b - low) as usize].push((f as u32, d));
                    }
                } else if b >= low {
                    g.links[(a - low) as usize].push((f as u32, d));
                    g.links[(b - low) as usize].push((f as u32, d));
                }
            }
        }
        g
    }

    fn faces(&self) -> usize {
        self.fw * self.fh
    }

    fn low(&self) -> u32 {
        self.faces() as u32
    }

    fn high(&self) -> u32 {
        self.faces() as u32 + 1
    }

    fn num_nodes(&self) -> usize {
        self.faces() + 2
    }

    fn ring(&self) -> bool {
        matches!(self.layout, Layout::Ring(_))
    }

    /// Node across side `d` (east, north, west, south) of raw face `f`,
    /// with the separating edge.
    #[inline]
    fn step(&self, f: usize, d: u8) -> Option<(u32, Edge)> {
        let i = f % self.fw;
        let j = f / self.fw;
        let x = self.bbox.x_min() + i as i32;
        let y = self.bbox.y_min() + j as i32;
        match d {
            0 => {
                let e = Edge::vertical(x + 1, y);
                if i + 1 < self.fw {
                    Some((self.node_of[f + 1], e))
                } else {
                    self.ring().then_some((self.high(), e))
                }
            }
            1 => {
                let e = Edge::horizontal(x, y + 1);
                if j + 1 < self.fh {
                    Some((self.node_of[f + self.fw], e))
                } else {
                    Some((self.high(), e))
                }
            }
            2 => {
                let e = Edge::vertical(x, y);
                if i > 0 {
                    Some((self.node_of[f - 1], e))
                } else {
                    self.ring().then_some((self.high(), e))
                }
            }
            _ => {
                let e = Edge::horizontal(x, y);
                if j > 0 {
                    Some((self.node_of[f - self.fw], e))
                } else if self.ring() {
                    Some((self.high(), e))
                } else {
                    Some((self.low(), e))
                }
            }
        }
    }

    fn for_each_neighbor(&self, node: u32, mut visit: impl FnMut(u32, Edge)) {
        if node < self.low() {
            for d in 0..4 {
                if let Some((t, e)) = self.step(node as usize, d) {
                    if t != node {
                        visit(t, e);
                    }
                }
            }
        } else {
            for &(f, d) in &self.links[(node - self.low()) as usize] {
                let a = self.node_of[f as usize];
                let (b, e) = self.step(f as usize, d).expect("linked side exists");
                visit(if a == node { b } else { a }, e);
            }
        }
    }

    /// Nodes reachable from `start` through edges accepted by `pass`,
    /// never entering nodes flagged in `blocked`.
    fn reach(&self, start: u32, pass: impl Fn(Edge) -> bool, blocked: Option<&[bool]>) -> Vec<bool> {
        let mut seen = vec![false; self.num_nodes()];
        seen[start as usize] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            self.for_each_neighbor(u, |w, e| {
                let wi = w as usize;
                if !seen[wi] && !blocked.is_some_and(|b| b[wi]) && pass(e) {
                    seen[wi] = true;
                    queue.push_back(w);
                }
            });
        }
        seen
    }

    /// The region bounded by the extremal open interface separating `from`
    /// from `toward`: first the closed-dual cluster of `from`, then the part
    /// of the graph reachable from `toward` around it. `None` when a closed
    /// dual path joins the two.
    fn far_region(&self, from: u32, toward: u32) -> Option<Vec<bool>> {
        let config = self.config;
        let closed = self.reach(from, |e| !open(config, e), None);
        if closed[toward as usize] {
            return None;
        }
        Some(self.reach(toward, |_| true, Some(&closed)))
    }

    fn face_node(&self, x: i32, y: i32) -> u32 {
        let i = (x - self.bbox.x_min()) as usize;
        let j = (y - self.bbox.y_min()) as usize;
        self.node_of[j * self.fw + i]
    }

    /// Nodes on the two sides of a box edge; `None` for the walls of a strip.
    fn sides(&self, e: Edge) -> Option<(u32, u32)> {
        let b = self.bbox;
        let Vertex { x, y } = e.anchor;
        let outside = |low_side: bool| -> Option<u32> {
            if self.ring() {
                Some(self.high())
            } else if low_side {
                Some(self.low())
            } else {
                Some(self.high())
            }
        };
        match e.orientation {
            Orientation::Horizontal => {
                let below = if y == b.y_min() { outside(true)? } else { self.face_node(x, y - 1) };
                let above = if y == b.y_max() { outside(false)? } else { self.face_node(x, y) };
                Some((below, above))
            }
            Orientation::Vertical => {
                if !self.ring() && (x == b.x_min() || x == b.x_max()) {
                    return None;
                }
                let left = if x == b.x_min() { self.high() } else { self.face_node(x - 1, y) };
                let right = if x == b.x_max() { self.high() } else { self.face_node(x, y) };
                Some((left, right))
            }
        }
    }

    fn is_interface(&self, region: &[bool], e: Edge) -> bool {
        match self.sides(e) {
            Some((a, b)) => region[a as usize] != region[b as usize],
            None => false,
        }
    }

    /// Next vertex along the interface from `cur`, not going back to `prev`.
    fn next_on_interface(&self, region: &[bool], cur: Vertex, prev: Option<Vertex>) -> Option<Vertex> {
        self.bbox.neighbors(cur).find(|&w| {
            Some(w) != prev && self.is_interface(region, Edge::between(cur, w).expect("adjacent"))
        })
    }

    fn trace_path(&self, region: &[bool]) -> Vec<Vertex> {
        let b = self.bbox;
        let start = (b.y_min()..=b.y_max())
            .map(|y| Vertex::new(b.x_min(), y))
            .find(|v| self.is_interface(region, Edge::horizontal(v.x, v.y)))
            .expect("a strip interface starts on the left wall");
        let mut path = vec![start];
        let mut prev = None;
        let mut cur = start;
        while let Some(next) = self.next_on_interface(region, cur, prev) {
            prev = Some(cur);
            cur = next;
            path.push(cur);
            assert!(path.len() <= b.num_vertices(), "interface trace does not terminate");
        }
        debug_assert_eq!(cur.x, b.x_max());
        path
    }

    fn trace_cycle(&self, region: &[bool]) -> Vec<Vertex> {
        let b = self.bbox;
        let start = b
            .vertices()
            .find(|&v| b.neighbors(v).any(|w| self.is_interface(region, Edge::between(v, w).expect("adjacent"))))
            .expect("a ring interface exists");
        let mut cycle = vec![start];
        let mut prev = None;
        let mut cur = start;
        loop {
            let next = self.next_on_interface(region, cur, prev).expect("interface is closed");
            if next == start {
                break;
            }
            prev = Some(cur);
            cur = next;
            cycle.push(cur);
            assert!(cycle.len() <= b.num_vertices(), "interface trace does not close");
        }
        canonical_cycle(cycle)
    }
}

/// Rotates a cycle to start at its row-major smallest vertex and orients it
/// counterclockwise, then closes it.
fn canonical_cycle(mut cycle: Vec<Vertex>) -> Vec<Vertex> {
    let (k, _) = cycle.iter().enumerate().min_by_key(|(_, v)| v.row_major()).expect("nonempty");
    cycle.rotate_left(k);
    let start = cycle[0];
    if cycle[1] != Vertex::new(start.x + 1, start.y) {
        cycle[1..].reverse();
    }
    cycle.push(start);
    cycle
}

/// The open left-right crossing of `bbox` whose region below is smallest.
///
/// Grows the closed dual cluster of the region below the box, fills
/// everything it encloses, and returns the open interface on top of it.
pub fn lowest_crossing(config: &Configuration, bbox: LatticeBox) -> Option<Crossing> {
    assert_inside(config, &bbox);
    let make = |vertices: Vec<Vertex>| Crossing {
        path: LatticePath::new(vertices).expect("interface is self-avoiding"),
        bbox,
        direction: Direction::LeftRight,
    };
    if bbox.width() == 1 {
        return Some(make(vec![Vertex::new(bbox.x_min(), bbox.y_min())]));
    }
    if bbox.height() == 1 {
        let row: Vec<Vertex> = (bbox.x_min()..=bbox.x_max()).map(|x| Vertex::new(x, bbox.y_min())).collect();
        return row.windows(2).all(|w| config.open_between(w[0], w[1])).then(|| make(row));
    }
    let g = FaceGraph::new(config, bbox, Layout::Strip);
    let above = g.far_region(g.low(), g.high())?;
    Some(make(g.trace_path(&above)))
}

/// Faces of the strip face grid lying below a left-right path, plus whether
/// any bottom edge is off the path (the below-box line is always below).
/// Index `fw * fh` stands for the line below the box.
fn below_faces(bbox: &LatticeBox, on_path: &HashSet<Edge>) -> Vec<bool> {
    let fw = bbox.width() - 1;
    let fh = bbox.height() - 1;
    let faces = fw * fh;
    let mut below = vec![false; faces + 1];
    below[faces] = true;
    let mut queue = VecDeque::new();
    for i in 0..fw {
        let e = Edge::horizontal(bbox.x_min() + i as i32, bbox.y_min());
        if fh > 0 && !on_path.contains(&e) && !below[i] {
            below[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(f) = queue.pop_front() {
        let i = f % fw;
        let j = f / fw;
        let x = bbox.x_min() + i as i32;
        let y = bbox.y_min() + j as i32;
        let mut try_push = |g: usize, e: Edge| {
            if !below[g] && !on_path.contains(&e) {
                below[g] = true;
                queue.push_back(g);
            }
        };
        if i + 1 < fw {
            try_push(f + 1, Edge::vertical(x + 1, y));
        }
        if i > 0 {
            try_push(f - 1, Edge::vertical(x, y));
        }
        if j + 1 < fh {
            try_push(f + fw, Edge::horizontal(x, y + 1));
        }
        if j > 0 {
            try_push(f - fw, Edge::horizontal(x, y));
        }
    }
    below
}

fn path_edge_set(path: &LatticePath) -> HashSet<Edge> {
    path.edges().collect()
}

/// Checks that `crossing` is the lowest open left-right crossing of `bbox`:
/// every edge is open and the dual of every edge is joined by closed dual
/// edges, at or below the crossing, to the line below the box. Bottom-row
/// edges satisfy this trivially. Edges along the left or right side have no
/// dual arm inside the box and fail.
pub fn verify_three_arm(config: &Configuration, crossing: &LatticePath, bbox: LatticeBox) -> Result<bool> {
    assert_inside(config, &bbox);
    for &v in crossing.vertices() {
        if !bbox.contains(v) {
            return Err(Error::VertexOutsideBox { vertex: v, bbox });
        }
    }
    if crossing.edges().any(|e| !open(config, e)) {
        return Err(Error::CrossingNotOpen);
    }
    let (Some(first), Some(last)) = (crossing.start(), crossing.end()) else {
        return Ok(false);
    };
    if first.x != bbox.x_min() || last.x != bbox.x_max() {
        return Ok(false);
    }
    if bbox.width() == 1 {
        return Ok(first.y == bbox.y_min());
    }
    if bbox.height() == 1 {
        return Ok(true);
    }
    let on_path = path_edge_set(crossing);
    let below = below_faces(&bbox, &on_path);
    let fw = bbox.width() - 1;
    let fh = bbox.height() - 1;
    let line = fw * fh;
    // Faces joined to the line below the box by closed dual edges that stay
    // below the crossing.
    let mut arm = vec![false; line + 1];
    arm[line] = true;
    let mut queue = VecDeque::new();
    for i in 0..fw {
        let e = Edge::horizontal(bbox.x_min() + i as i32, bbox.y_min());
        if below[i] && !open(config, e) {
            arm[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(f) = queue.pop_front() {
        let i = f % fw;
        let j = f / fw;
        let x = bbox.x_min() + i as i32;
        let y = bbox.y_min() + j as i32;
        let mut steps: Vec<(usize, Edge)> = Vec::with_capacity(4);
        if i + 1 < fw {
            steps.push((f + 1, Edge::vertical(x + 1, y)));
        }
        if i > 0 {
            steps.push((f - 1, Edge::vertical(x, y)));
        }
        if j + 1 < fh {
            steps.push((f + fw, Edge::horizontal(x, y + 1)));
        }
        if j > 0 {
            steps.push((f - fw, Edge::horizontal(x, y)));
        }
        for (g, e) in steps {
            if below[g] && !arm[g] && !open(config, e) {
                arm[g] = true;
                queue.push_back(g);
            }
        }
    }
    let face = |x: i32, y: i32| (y - bbox.y_min()) as usize * fw + (x - bbox.x_min()) as usize;
    for e in crossing.edges() {
        let Vertex { x, y } = e.anchor;
        let ok = match e.orientation {
            Orientation::Horizontal => y == bbox.y_min() || arm[face(x, y - 1)] || (y < bbox.y_max() && arm[face(x, y)]),
            Orientation::Vertical => {
                if x == bbox.x_min() || x == bbox.x_max() {
                    false
                } else {
                    arm[face(x - 1, y)] || arm[face(x, y)]
                }
            }
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Vertices of a box on either side of a left-right crossing. Crossing
/// vertices belong to the lower part.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSplit {
    bbox: LatticeBox,
    lower: Vec<bool>,
}

impl RegionSplit {
    pub fn bbox(&self) -> LatticeBox {
        self.bbox
    }

    pub fn is_lower(&self, v: Vertex) -> bool {
        self.bbox.try_index(v).is_some_and(|i| self.lower[i])
    }

    pub fn is_upper(&self, v: Vertex) -> bool {
        self.bbox.try_index(v).is_some_and(|i| !self.lower[i])
    }

    pub fn lower(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.bbox.vertices().filter(move |v| self.lower[self.bbox.index(*v)])
    }

    pub fn upper(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.bbox.vertices().filter(move |v| !self.lower[self.bbox.index(*v)])
    }
}

/// Splits `bbox` along a left-right crossing. A vertex off the crossing is
/// lower when the faces around it lie below the crossing; this also places
/// vertices boxed in by a bend of the crossing on the correct side.
pub fn region_split(crossing: &LatticePath, bbox: LatticeBox) -> RegionSplit {
    let mut lower = vec![false; bbox.num_vertices()];
    let on_vertex: HashSet<Vertex> = crossing.vertices().iter().copied().collect();
    if bbox.height() == 1 {
        lower.iter_mut().for_each(|l| *l = true);
        return RegionSplit { bbox, lower };
    }
    if bbox.width() == 1 {
        let top = crossing.vertices().iter().map(|v| v.y).max().unwrap_or(bbox.y_min());
        for v in bbox.vertices() {
            lower[bbox.index(v)] = v.y <= top;
        }
        return RegionSplit { bbox, lower };
    }
    let on_path = path_edge_set(crossing);
    let below = below_faces(&bbox, &on_path);
    let fw = bbox.width() - 1;
    let fh = bbox.height() - 1;
    for v in bbox.vertices() {
        let i = bbox.index(v);
        if on_vertex.contains(&v) {
            lower[i] = true;
            continue;
        }
        let fx = (v.x - bbox.x_min()).min(fw as i32 - 1) as usize;
        let fy = (v.y - bbox.y_min()).min(fh as i32 - 1) as usize;
        lower[i] = below[fy * fw + fx];
    }
    RegionSplit { bbox, lower }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CircuitKind {
    Innermost,
    Outermost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusCircuit {
    pub circuit: Circuit,
    pub annulus: Annulus,
    pub kind: CircuitKind,
}

fn annulus_circuit(config: &Configuration, annulus: &Annulus, kind: CircuitKind) -> Option<AnnulusCircuit> {
    let outer = annulus.outer();
    assert_inside(config, &outer);
    let g = FaceGraph::new(config, outer, Layout::Ring(annulus.inner()));
    let (from, toward) = match kind {
        CircuitKind::Innermost => (g.low(), g.high()),
        CircuitKind::Outermost => (g.high(), g.low()),
    };
    let region = g.far_region(from, toward)?;
    let cycle = g.trace_cycle(&region);
    Some(AnnulusCircuit {
        circuit: Circuit::new(cycle).expect("interface is a simple circuit"),
        annulus: *annulus,
        kind,
    })
}

/// The open circuit in `annulus` around its inner box that encloses the
/// fewest faces: the boundary of the closed dual cluster of the inner box
/// together with everything that cluster encloses.
pub fn innermost_circuit(config: &Configuration, annulus: &Annulus) -> Option<AnnulusCircuit> {
    annulus_circuit(config, annulus, CircuitKind::Innermost)
}

/// The open circuit in `annulus` around its inner box that encloses the most
/// faces.
pub fn outermost_circuit(config: &Configuration, annulus: &Annulus) -> Option<AnnulusCircuit> {
    annulus_circuit(config, annulus, CircuitKind::Outermost)
}

/// The pieces of the event at index `i`: circuits in `A_{i-1}` and
/// `A_{i+1}` and the lowest crossing of the event rectangle.
#[derive(Debug, Clone)]
pub struct EventParts {
    pub i: u32,
    pub inner: Option<AnnulusCircuit>,
    pub outer: Option<AnnulusCircuit>,
    pub rectangle: LatticeBox,
    pub crossing: Option<Crossing>,
}

impl EventParts {
    pub fn occurs(&self) -> bool {
        self.inner.is_some() && self.outer.is_some() && self.crossing.is_some()
    }
}

pub fn event_parts(config: &Configuration, i: u32, seq: &AnnulusSequence) -> Result<EventParts> {
    let rectangle = seq.event_rectangle(i)?;
    let a_in = seq.annulus(i - 1).ok_or(Error::EventIndex { i, k: seq.k })?;
    let a_out = seq.annulus(i + 1).ok_or(Error::EventIndex { i, k: seq.k })?;
    let inner = innermost_circuit(config, a_in);
    let outer = inner.as_ref().and_then(|_| outermost_circuit(config, a_out));
    let crossing = outer.as_ref().and_then(|_| lowest_crossing(config, rectangle));
    Ok(EventParts { i, inner, outer, rectangle, crossing })
}

/// Open circuits in both `A_{i-1}` and `A_{i+1}` and an open left-right
/// crossing of the event rectangle.
pub fn detect_event_e(config: &Configuration, i: u32, seq: &AnnulusSequence) -> Result<bool> {
    let rectangle = seq.event_rectangle(i)?;
    let a_in = seq.annulus(i - 1).ok_or(Error::EventIndex { i, k: seq.k })?;
    let a_out = seq.annulus(i + 1).ok_or(Error::EventIndex { i, k: seq.k })?;
    Ok(has_open_crossing(config, rectangle, Direction::LeftRight)
        && innermost_circuit(config, a_in).is_some()
        && innermost_circuit(config, a_out).is_some())
}

/// The square `[x, x+side] × [y, y+side]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitSquare {
    pub anchor: Vertex,
    pub side: u32,
}

impl UnitSquare {
    pub fn unit(anchor: Vertex) -> Self {
        UnitSquare { anchor, side: 1 }
    }

    /// `Q_u(M)` for the index `u`.
    pub fn scaled(u: (i32, i32), m: u32) -> Self {
        let m = m as i32;
        UnitSquare { anchor: Vertex::new(u.0 * m, u.1 * m), side: m as u32 }
    }

    pub fn vertices(self) -> impl Iterator<Item = Vertex> {
        let s = self.side as i32;
        let a = self.anchor;
        (0..=s).flat_map(move |dy| (0..=s).map(move |dx| Vertex::new(a.x + dx, a.y + dy)))
    }

    /// The four sides as `[bottom, right, top, left]`, for unit squares.
    pub fn edges(self) -> [Edge; 4] {
        let Vertex { x, y } = self.anchor;
        [Edge::horizontal(x, y), Edge::vertical(x + 1, y), Edge::horizontal(x, y + 1), Edge::vertical(x, y)]
    }

    /// Squared Euclidean distance between the vertex sets.
    pub fn dist2(self, other: UnitSquare) -> i64 {
        let gap = |a0: i32, a1: i32, b0: i32, b1: i32| -> i64 {
            if a1 < b0 {
                (b0 - a1) as i64
            } else if b1 < a0 {
                (a0 - b1) as i64
            } else {
                0
            }
        };
        let (s, o) = (self.side as i32, other.side as i32);
        let dx = gap(self.anchor.x, self.anchor.x + s, other.anchor.x, other.anchor.x + o);
        let dy = gap(self.anchor.y, self.anchor.y + s, other.anchor.y, other.anchor.y + o);
        dx * dx + dy * dy
    }
}

/// A candidate good square and the first crossing position it touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoodSquare {
    pub square: UnitSquare,
    pub first_touch: usize,
}

/// Every `M`-square of `bbox` lying in the upper part whose vertex set is at
/// distance exactly 1 from the crossing, ordered by where along the crossing
/// it first touches and then row-major by anchor.
pub fn good_square_candidates(crossing: &LatticePath, bbox: LatticeBox, split: &RegionSplit, m: u32) -> Vec<GoodSquare> {
    assert!(m >= 1, "square side must be positive");
    let position: HashMap<Vertex, usize> = crossing.vertices().iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mi = m as i32;
    let lo = |a: i32| a.div_euclid(mi) + i32::from(a.rem_euclid(mi) != 0);
    let hi = |b: i32| (b - mi).div_euclid(mi);
    let mut out = Vec::new();
    for u2 in lo(bbox.y_min())..=hi(bbox.y_max()) {
        for u1 in lo(bbox.x_min())..=hi(bbox.x_max()) {
            let sq = UnitSquare::scaled((u1, u2), m);
            let mut first = None::<usize>;
            let mut all_upper = true;
            for v in sq.vertices() {
                if !split.is_upper(v) {
                    all_upper = false;
                    break;
                }
                for w in v.neighbors() {
                    if let Some(&k) = position.get(&w) {
                        first = Some(first.map_or(k, |f| f.min(k)));
                    }
                }
            }
            if let (true, Some(first_touch)) = (all_upper, first) {
                out.push(GoodSquare { square: sq, first_touch });
            }
        }
    }
    out.sort_by_key(|g| (g.first_touch, g.square.anchor.row_major()));
    out
}

/// Greedy selection, in order, of squares pairwise at distance at least 3.
pub fn thin_three_disjoint(ordered: impl IntoIterator<Item = UnitSquare>) -> Vec<UnitSquare> {
    let mut kept: Vec<UnitSquare> = Vec::new();
    for s in ordered {
        if kept.iter().all(|k| k.dist2(s) >= 9) {
            kept.push(s);
        }
    }
    kept
}

/// Good squares of a crossing after 3-disjoint thinning from the start of
/// the crossing.
pub fn good_squares(crossing: &LatticePath, bbox: LatticeBox, m: u32) -> Vec<UnitSquare> {
    let split = region_split(crossing, bbox);
    thin_three_disjoint(good_square_candidates(crossing, bbox, &split, m).into_iter().map(|g| g.square))
}

/// The square next to `s` whose side opposite to `s` is in `path_edges`,
/// with the row-major smallest anchor when several qualify. Returns the
/// companion and its edge on the path.
pub fn companion(s: UnitSquare, path_edges: &HashSet<Edge>) -> Option<(UnitSquare, Edge)> {
    let Vertex { x, y } = s.anchor;
    let candidates = [
        (Vertex::new(x, y - 1), Edge::horizontal(x, y - 1)),
        (Vertex::new(x - 1, y), Edge::vertical(x - 1, y)),
        (Vertex::new(x + 1, y), Edge::vertical(x + 2, y)),
        (Vertex::new(x, y + 1), Edge::horizontal(x, y + 2)),
    ];
    candidates
        .into_iter()
        .filter(|(_, far)| path_edges.contains(far))
        .min_by_key(|(a, _)| a.row_major())
        .map(|(a, far)| (UnitSquare::unit(a), far))
}

/// Keeps the unit squares whose companion exists and has its three edges
/// off the path open.
pub fn accessible_along(config: &Configuration, path_edges: &HashSet<Edge>, goods: &[UnitSquare]) -> Result<Vec<UnitSquare>> {
    let mut out = Vec::new();
    for &s in goods {
        if s.side != 1 {
            return Err(Error::UnsupportedSquareSide(s.side));
        }
        let Some((c, far)) = companion(s, path_edges) else { continue };
        let mut ok = true;
        for e in c.edges() {
            if e != far && !config.is_open(e)? {
                ok = false;
                break;
            }
        }
        if ok {
            out.push(s);
        }
    }
    Ok(out)
}

pub fn accessible_squares(config: &Configuration, crossing: &LatticePath, goods: &[UnitSquare]) -> Result<Vec<UnitSquare>> {
    accessible_along(config, &path_edge_set(crossing), goods)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::annulus_sequence;
    use crate::random_field::{sample_configuration, EdgeDistribution, SeedSpec};

    fn rect(x0: i32, x1: i32, y0: i32, y1: i32) -> LatticeBox {
        LatticeBox::new(x0, x1, y0, y1).unwrap()
    }

    fn row(x0: i32, x1: i32, y: i32) -> LatticePath {
        LatticePath::new((x0..=x1).map(|x| Vertex::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn trivial_crossings() {
        let b = rect(0, 6, 0, 4);
        let zero = Configuration::all_open(b);
        let one = Configuration::all_closed(b);
        assert!(has_open_crossing(&zero, b, Direction::LeftRight));
        assert!(has_open_crossing(&zero, b, Direction::TopBottom));
        assert!(!has_open_crossing(&one, b, Direction::LeftRight));
        let c = lowest_crossing(&zero, b).unwrap();
        assert_eq!(c.path, row(0, 6, 0));
        assert!(verify_three_arm(&zero, &c.path, b).unwrap());
        assert!(lowest_crossing(&one, b).is_none());
    }

    #[test]
    fn stacked_rows() {
        let b = rect(0, 7, 0, 4);
        let config = Configuration::from_open_set(b, |e| e.orientation == Orientation::Horizontal && (e.anchor.y == 1 || e.anchor.y == 3));
        let low = lowest_crossing(&config, b).unwrap();
        assert_eq!(low.path, row(0, 7, 1));
        assert!(verify_three_arm(&config, &row(0, 7, 1), b).unwrap());
        assert!(!verify_three_arm(&config, &row(0, 7, 3), b).unwrap());
        assert_eq!(verify_three_arm(&config, &row(0, 7, 2), b), Err(Error::CrossingNotOpen));
    }

    #[test]
    fn wall_detour_is_not_lowest() {
        let b = rect(0, 4, 0, 3);
        let config = Configuration::all_open(b);
        let mut vs = vec![Vertex::new(0, 0)];
        vs.extend((0..=4).map(|x| Vertex::new(x, 1)));
        let p = LatticePath::new(vs).unwrap();
        assert!(!verify_three_arm(&config, &p, b).unwrap());
    }

    #[test]
    fn lowest_crossing_on_random_boxes() {
        let d = EdgeDistribution::bernoulli(0.5).unwrap();
        let b = rect(0, 15, 0, 11);
        let mut found = 0;
        for rep in 0..200 {
            let c = sample_configuration(b, &d, SeedSpec::new(3, rep));
            let lc = lowest_crossing(&c, b);
            assert_eq!(lc.is_some(), has_open_crossing(&c, b, Direction::LeftRight));
            if let Some(lc) = lc {
                found += 1;
                assert!(lc.path.edges().all(|e| c.is_open(e).unwrap()));
                assert!(verify_three_arm(&c, &lc.path, b).unwrap(), "rep {rep}");
            }
        }
        assert!(found > 20);
    }

    #[test]
    fn degenerate_boxes() {
        let line = rect(0, 3, 2, 2);
        let open = Configuration::all_open(line);
        assert_eq!(lowest_crossing(&open, line).unwrap().path, row(0, 3, 2));
        let col = rect(1, 1, 0, 3);
        let c = Configuration::all_closed(col);
        assert_eq!(lowest_crossing(&c, col).unwrap().path.vertices(), &[Vertex::new(1, 0)]);
    }

    #[test]
    fn split_conventions() {
        let b = rect(0, 5, 0, 4);
        let bottom = region_split(&row(0, 5, 0), b);
        assert_eq!(bottom.lower().count(), 6);
        assert!(bottom.upper().all(|v| v.y > 0));
        let top = region_split(&row(0, 5, 4), b);
        assert_eq!(top.upper().count(), 0);
    }

    #[test]
    fn circuits_in_trivial_annuli() {
        let a = Annulus::centered(4, 2).unwrap();
        let zero = Configuration::all_open(a.outer());
        let inner = innermost_circuit(&zero, &a).unwrap();
        // hugs the inner box: the ring at distance 3
        assert!(inner.circuit.vertices().iter().all(|v| v.x.abs().max(v.y.abs()) == 3));
        assert_eq!(inner.circuit.len(), 24);
        let outer = outermost_circuit(&zero, &a).unwrap();
        assert!(outer.circuit.vertices().iter().all(|v| v.x.abs().max(v.y.abs()) == 4));
        assert!(inner.circuit.surrounds(&a.inner()));
        assert!(outer.circuit.surrounds(&a.inner()));
        let one = Configuration::all_closed(a.outer());
        assert!(innermost_circuit(&one, &a).is_none());
        assert!(outermost_circuit(&one, &a).is_none());
    }

    #[test]
    fn circuits_on_random_annuli_are_open_and_surround() {
        let d = EdgeDistribution::bernoulli(0.6).unwrap();
        let a = Annulus::centered(9, 3).unwrap();
        let mut found = 0;
        for rep in 0..100 {
            let c = sample_configuration(a.outer(), &d, SeedSpec::new(9, rep));
            let inn = innermost_circuit(&c, &a);
            let out = outermost_circuit(&c, &a);
            assert_eq!(inn.is_some(), out.is_some());
            for ac in inn.iter().chain(out.iter()) {
                found += 1;
                assert!(ac.circuit.edges().all(|e| c.is_open(e).unwrap()));
                assert!(ac.circuit.vertices().iter().all(|v| a.contains(*v)));
                assert!(ac.circuit.surrounds(&a.inner()));
            }
            if let (Some(i), Some(o)) = (inn, out) {
                // every vertex enclosed by the innermost is enclosed by the outermost
                for v in a.outer().vertices() {
                    if i.circuit.encloses(v) || i.circuit.contains_vertex(v) {
                        assert!(o.circuit.encloses(v) || o.circuit.contains_vertex(v));
                    }
                }
            }
        }
        assert!(found > 10);
    }

    #[test]
    fn events_on_trivial_configurations() {
        let seq = annulus_sequence(64, 0.5).unwrap();
        let b = seq.outermost_box();
        assert!(detect_event_e(&Configuration::all_open(b), 2, &seq).unwrap());
        assert!(!detect_event_e(&Configuration::all_closed(b), 2, &seq).unwrap());
        assert!(detect_event_e(&Configuration::all_open(b), 1, &seq).is_err());
        assert!(event_parts(&Configuration::all_open(b), 2, &seq).unwrap().occurs());
    }

    #[test]
    fn good_squares_above_bottom_row() {
        let b = rect(0, 12, 0, 6);
        let cross = row(0, 12, 0);
        let split = region_split(&cross, b);
        let cands = good_square_candidates(&cross, b, &split, 1);
        // anchored on row 1, all columns
        assert_eq!(cands.len(), 12);
        assert!(cands.iter().all(|g| g.square.anchor.y == 1));
        let thinned = good_squares(&cross, b, 1);
        let xs: Vec<i32> = thinned.iter().map(|s| s.anchor.x).collect();
        assert_eq!(xs, vec![0, 4, 8]);
        assert!(good_squares(&row(0, 12, 6), b, 1).is_empty());
        let zero = Configuration::all_open(b);
        assert_eq!(accessible_squares(&zero, &cross, &thinned).unwrap(), thinned);
    }

    #[test]
    fn companion_with_closed_edge_is_excluded() {
        let b = rect(0, 6, 0, 4);
        let cross = row(0, 6, 0);
        let s = UnitSquare::unit(Vertex::new(2, 1));
        let config = Configuration::from_open_set(b, |e| e != Edge::vertical(3, 0));
        assert!(accessible_squares(&config, &cross, &[s]).unwrap().is_empty());
        let (c, far) = companion(s, &path_edge_set(&cross)).unwrap();
        assert_eq!(c.anchor, Vertex::new(2, 0));
        assert_eq!(far, Edge::horizontal(2, 0));
        assert!(matches!(
            accessible_squares(&config, &cross, &[UnitSquare::scaled((0, 0), 2)]),
            Err(Error::UnsupportedSquareSide(2))
        ));
    }

    #[test]
    fn scaled_squares() {
        let b = rect(0, 16, 0, 8);
        let cross = row(0, 16, 0);
        let split = region_split(&cross, b);
        let cands = good_square_candidates(&cross, b, &split, 2);
        assert!(cands.is_empty(), "M=2 squares on row 0 touch the crossing");
        let cross = row(0, 16, 1);
        let split = region_split(&cross, b);
        let cands = good_square_candidates(&cross, b, &split, 2);
        assert_eq!(cands.len(), 8);
        assert!(cands.iter().all(|g| g.square.anchor.y == 2 && g.square.side == 2));
    }
}
