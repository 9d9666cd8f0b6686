//! Reproducible i.i.d. edge weights with an atomic distribution.
//!
//! Every edge draws from its own position in a ChaCha8 stream keyed by
//! `(master_seed, replicate_index)`, so a box and any box containing it agree
//! on their common edges.

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{Edge, LatticeBox, Orientation, Vertex};

/// Largest number of decimal places an atom may carry.
pub const MAX_DECIMALS: u8 = 9;

/// An exact nonnegative decimal, `units · 10^-decimals`.
#[derive(Debug, Clone, Copy)]
pub struct PassageTime {
    pub units: u64,
    pub decimals: u8,
}

impl PassageTime {
    pub const ZERO: PassageTime = PassageTime { units: 0, decimals: 0 };

    pub fn new(units: u64, decimals: u8) -> Self {
        PassageTime { units, decimals }
    }

    pub fn integer(units: u64) -> Self {
        PassageTime { units, decimals: 0 }
    }

    pub fn is_zero(self) -> bool {
        self.units == 0
    }

    pub fn to_f64(self) -> f64 {
        self.units as f64 / 10f64.powi(self.decimals as i32)
    }

    fn scaled(self, decimals: u8) -> u128 {
        self.units as u128 * 10u128.pow((decimals - self.decimals) as u32)
    }

    /// Parses a plain decimal such as `3`, `0.25` or `.5`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidDistribution(format!("{s:?}: {msg}"));
        let (int, frac) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int.is_empty() && frac.is_empty() {
            return Err(bad("empty"));
        }
        if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad("not a nonnegative decimal"));
        }
        let frac = frac.trim_end_matches('0');
        if frac.len() > MAX_DECIMALS as usize {
            return Err(bad("too many decimal places"));
        }
        let digits = format!("{int}{frac}");
        let units = if digits.is_empty() {
            0
        } else {
            digits.parse::<u64>().map_err(|_| bad("out of range"))?
        };
        Ok(PassageTime { units, decimals: frac.len() as u8 })
    }
}

impl PartialEq for PassageTime {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for PassageTime {}

impl PartialOrd for PassageTime {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PassageTime {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let d = self.decimals.max(other.decimals);
        self.scaled(d).cmp(&other.scaled(d))
    }
}

impl fmt::Display for PassageTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.decimals == 0 {
            return write!(f, "{}", self.units);
        }
        let p = 10u64.pow(self.decimals as u32);
        let int = self.units / p;
        let frac = self.units % p;
        if frac == 0 {
            return write!(f, "{int}");
        }
        let s = format!("{:0width$}", frac, width = self.decimals as usize);
        write!(f, "{int}.{}", s.trim_end_matches('0'))
    }
}

/// A finite atomic law on `[0, ∞)` with exact decimal atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDistribution {
    /// Atom values in integer units of `10^-decimals`, strictly increasing.
    values: Vec<u64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    decimals: u8,
}

impl EdgeDistribution {
    /// Builds a law from `(value, probability)` pairs given as decimal
    /// strings and reals. Zero-probability atoms are dropped.
    pub fn new<S: AsRef<str>>(atoms: &[(S, f64)]) -> Result<Self> {
        let parsed = atoms
            .iter()
            .map(|(v, p)| Ok((PassageTime::parse(v.as_ref())?, *p)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_times(parsed)
    }

    /// As [`EdgeDistribution::new`] with atoms given as floats, each read
    /// through its shortest round-trip decimal form.
    pub fn from_f64_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let mut strs = Vec::with_capacity(atoms.len());
        for &(v, p) in atoms {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidDistribution(format!("atom {v} is not a nonnegative number")));
            }
            strs.push((format!("{v}"), p));
        }
        Self::new(&strs)
    }

    fn from_times(atoms: Vec<(PassageTime, f64)>) -> Result<Self> {
        let mut atoms: Vec<_> = atoms.into_iter().filter(|(_, p)| *p != 0.0).collect();
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms with positive probability".into()));
        }
        if atoms.iter().any(|(_, p)| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidDistribution("probabilities must be positive".into()));
        }
        if atoms.len() > u8::MAX as usize {
            return Err(Error::InvalidDistribution("too many atoms".into()));
        }
        let total: f64 = atoms.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidDistribution("repeated atom value".into()));
        }
        let decimals = atoms.iter().map(|(t, _)| t.decimals).max().unwrap_or(0);
        let mut values = Vec::with_capacity(atoms.len());
        for (t, _) in &atoms {
            let v = t.scaled(decimals);
            values.push(u64::try_from(v).map_err(|_| Error::InvalidDistribution("atom too large".into()))?);
        }
        let probs: Vec<f64> = atoms.iter().map(|(_, p)| *p).collect();
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(EdgeDistribution { values, probs, cumulative, decimals })
    }

    /// `{(0, p), (1, 1-p)}`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidDistribution(format!("p = {p} not in [0,1]")));
        }
        Self::from_times(vec![(PassageTime::integer(0), p), (PassageTime::integer(1), 1.0 - p)])
    }

    pub fn num_atoms(&self) -> usize {
        self.values.len()
    }

    /// Atom values in units of `10^-decimals`.
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn decimals(&self) -> u8 {
        self.decimals
    }

    pub fn atom(&self, i: usize) -> PassageTime {
        PassageTime::new(self.values[i], self.decimals)
    }

    /// Mass at zero, `F(0)`.
    pub fn zero_mass(&self) -> f64 {
        if self.values[0] == 0 {
            self.probs[0]
        } else {
            0.0
        }
    }

    /// `E t(e)` as a float.
    pub fn mean(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.probs)
            .map(|(v, p)| PassageTime::new(*v, self.decimals).to_f64() * p)
            .sum()
    }

    /// Whether every nonzero atom has the same value, which allows the
    /// two-level queue in shortest-path computations.
    pub fn is_zero_one_like(&self) -> bool {
        let nonzero: Vec<_> = self.values.iter().filter(|v| **v != 0).collect();
        nonzero.len() <= 1
    }

    /// Atom index for an exact value.
    pub fn index_of(&self, t: PassageTime) -> Option<usize> {
        if t.decimals > self.decimals {
            return None;
        }
        let u = u64::try_from(t.scaled(self.decimals)).ok()?;
        self.values.binary_search(&u).ok()
    }

    #[inline]
    fn atom_for_uniform(&self, u: f64) -> u8 {
        let last = self.cumulative.len() - 1;
        self.cumulative[..last].iter().position(|c| u < *c).unwrap_or(last) as u8
    }
}

/// `(master_seed, replicate_index)`; each replicate gets its own ChaCha
/// stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub replicate_index: u64,
}

impl SeedSpec {
    pub const fn new(master_seed: u64, replicate_index: u64) -> Self {
        SeedSpec { master_seed, replicate_index }
    }
}

const COORD_OFFSET: i64 = 1 << 31;

/// Position of an edge in the stream. Distinct edges get distinct counters,
/// and a row of edges of one orientation is contiguous.
fn edge_counter(e: Edge) -> u64 {
    let o = match e.orientation {
        Orientation::Horizontal => 0u64,
        Orientation::Vertical => 1,
    };
    let y = (e.anchor.y as i64 + COORD_OFFSET) as u64;
    let x = (e.anchor.x as i64 + COORD_OFFSET) as u64;
    ((y << 1 | o) << 32) | x
}

fn unit_uniform(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Edge weights on a box, stored as atom indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    bbox: LatticeBox,
    dist: EdgeDistribution,
    seed: SeedSpec,
    horizontal: Vec<u8>,
    vertical: Vec<u8>,
}

pub fn sample_configuration(bbox: LatticeBox, dist: &EdgeDistribution, seed: SeedSpec) -> Configuration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.master_seed);
    rng.set_stream(seed.replicate_index);
    let w = bbox.width();
    let mut horizontal = Vec::with_capacity(bbox.num_horizontal_edges());
    let mut vertical = Vec::with_capacity(bbox.num_vertical_edges());
    let single = dist.num_atoms() == 1;
    for y in bbox.y_min()..=bbox.y_max() {
        if w > 1 {
            if single {
                horizontal.resize(horizontal.len() + w - 1, 0);
            } else {
                rng.set_word_pos(2 * edge_counter(Edge::horizontal(bbox.x_min(), y)) as u128);
                for _ in 0..w - 1 {
                    horizontal.push(dist.atom_for_uniform(unit_uniform(rng.next_u64())));
                }
            }
        }
        if y < bbox.y_max() {
            if single {
                vertical.resize(vertical.len() + w, 0);
            } else {
                rng.set_word_pos(2 * edge_counter(Edge::vertical(bbox.x_min(), y)) as u128);
                for _ in 0..w {
                    vertical.push(dist.atom_for_uniform(unit_uniform(rng.next_u64())));
                }
            }
        }
    }
    Configuration { bbox, dist: dist.clone(), seed, horizontal, vertical }
}

impl Configuration {
    /// Deterministic configuration from a per-edge atom index.
    pub fn from_fn(bbox: LatticeBox, dist: &EdgeDistribution, mut atom: impl FnMut(Edge) -> usize) -> Result<Self> {
        let mut horizontal = Vec::with_capacity(bbox.num_horizontal_edges());
        let mut vertical = Vec::with_capacity(bbox.num_vertical_edges());
        for e in bbox.edges() {
            let a = atom(e);
            if a >= dist.num_atoms() {
                return Err(Error::WeightNotInSupport(format!("atom index {a} for {e}")));
            }
            match e.orientation {
                Orientation::Horizontal => horizontal.push(a as u8),
                Orientation::Vertical => vertical.push(a as u8),
            }
        }
        Ok(Configuration { bbox, dist: dist.clone(), seed: SeedSpec::default(), horizontal, vertical })
    }

    /// A `{0,1}` configuration whose open edges are exactly those in `open`.
    pub fn from_open_set(bbox: LatticeBox, open: impl Fn(Edge) -> bool) -> Self {
        let dist = EdgeDistribution::bernoulli(0.5).expect("valid");
        Self::from_fn(bbox, &dist, |e| usize::from(!open(e))).expect("indices in range")
    }

    pub fn all_open(bbox: LatticeBox) -> Self {
        Self::from_open_set(bbox, |_| true)
    }

    pub fn all_closed(bbox: LatticeBox) -> Self {
        Self::from_open_set(bbox, |_| false)
    }

    pub fn bbox(&self) -> LatticeBox {
        self.bbox
    }

    pub fn distribution(&self) -> &EdgeDistribution {
        &self.dist
    }

    pub fn seed(&self) -> SeedSpec {
        self.seed
    }

    pub fn decimals(&self) -> u8 {
        self.dist.decimals
    }

    /// Wraps integer units as an exact time at this configuration's scale.
    pub fn time(&self, units: u64) -> PassageTime {
        PassageTime::new(units, self.dist.decimals)
    }

    #[inline]
    fn slot(&self, e: Edge) -> Option<(Orientation, usize)> {
        if !self.bbox.contains_edge(e) {
            return None;
        }
        let dx = (e.anchor.x - self.bbox.x_min()) as usize;
        let dy = (e.anchor.y - self.bbox.y_min()) as usize;
        let w = self.bbox.width();
        Some(match e.orientation {
            Orientation::Horizontal => (Orientation::Horizontal, dy * (w - 1) + dx),
            Orientation::Vertical => (Orientation::Vertical, dy * w + dx),
        })
    }

    pub fn atom_index(&self, e: Edge) -> Result<usize> {
        match self.slot(e) {
            Some((Orientation::Horizontal, i)) => Ok(self.horizontal[i] as usize),
            Some((Orientation::Vertical, i)) => Ok(self.vertical[i] as usize),
            None => Err(Error::EdgeOutsideBox { edge: e, bbox: self.bbox }),
        }
    }

    /// Weight in integer units of `10^-decimals`.
    pub fn weight(&self, e: Edge) -> Result<u64> {
        Ok(self.dist.values[self.atom_index(e)?])
    }

    /// Weight of the horizontal edge anchored at `v`, without bounds checks
    /// beyond debug assertions. `v` must not be on the right side.
    #[inline]
    pub fn h_weight(&self, v: Vertex) -> u64 {
        let w = self.bbox.width();
        let dx = (v.x - self.bbox.x_min()) as usize;
        let dy = (v.y - self.bbox.y_min()) as usize;
        debug_assert!(dx + 1 < w);
        self.dist.values[self.horizontal[dy * (w - 1) + dx] as usize]
    }

    /// As [`Configuration::h_weight`] for the vertical edge at `v`.
    #[inline]
    pub fn v_weight(&self, v: Vertex) -> u64 {
        let w = self.bbox.width();
        let dx = (v.x - self.bbox.x_min()) as usize;
        let dy = (v.y - self.bbox.y_min()) as usize;
        debug_assert!(dy + 1 < self.bbox.height());
        self.dist.values[self.vertical[dy * w + dx] as usize]
    }

    /// Weight of the edge between adjacent in-box vertices.
    #[inline]
    pub fn weight_between(&self, u: Vertex, v: Vertex) -> u64 {
        if u.y == v.y {
            self.h_weight(Vertex::new(u.x.min(v.x), u.y))
        } else {
            self.v_weight(Vertex::new(u.x, u.y.min(v.y)))
        }
    }

    /// Calls `f(j, weight)` for every in-box neighbour `j` of the vertex with
    /// row-major index `i`, in the order east, north, west, south.
    #[inline]
    pub fn for_each_neighbor(&self, i: usize, mut f: impl FnMut(usize, u64)) {
        let w = self.bbox.width();
        let h = self.bbox.height();
        let (x, y) = (i % w, i / w);
        let vals = &self.dist.values;
        if x + 1 < w {
            f(i + 1, vals[self.horizontal[y * (w - 1) + x] as usize]);
        }
        if y + 1 < h {
            f(i + w, vals[self.vertical[i] as usize]);
        }
        if x > 0 {
            f(i - 1, vals[self.horizontal[y * (w - 1) + x - 1] as usize]);
        }
        if y > 0 {
            f(i - w, vals[self.vertical[i - w] as usize]);
        }
    }

    /// Neighbour `d` (0 east, 1 north, 2 west, 3 south) of vertex index `i`
    /// and the weight of the edge to it.
    #[inline]
    pub fn neighbor(&self, i: usize, d: u8) -> Option<(usize, u64)> {
        let w = self.bbox.width();
        let (x, y) = (i % w, i / w);
        let vals = &self.dist.values;
        match d {
            0 if x + 1 < w => Some((i + 1, vals[self.horizontal[y * (w - 1) + x] as usize])),
            1 if y + 1 < self.bbox.height() => Some((i + w, vals[self.vertical[i] as usize])),
            2 if x > 0 => Some((i - 1, vals[self.horizontal[y * (w - 1) + x - 1] as usize])),
            3 if y > 0 => Some((i - w, vals[self.vertical[i - w] as usize])),
            _ => None,
        }
    }

    pub fn weight_time(&self, e: Edge) -> Result<PassageTime> {
        Ok(self.time(self.weight(e)?))
    }

    pub fn is_open(&self, e: Edge) -> Result<bool> {
        Ok(self.weight(e)? == 0)
    }

    #[inline]
    pub fn open_between(&self, u: Vertex, v: Vertex) -> bool {
        self.weight_between(u, v) == 0
    }

    /// Copy with one edge set to a given atom.
    pub fn with_atom(&self, e: Edge, atom: usize) -> Result<Self> {
        if atom >= self.dist.num_atoms() {
            return Err(Error::WeightNotInSupport(format!("atom index {atom}")));
        }
        let mut out = self.clone();
        match self.slot(e) {
            Some((Orientation::Horizontal, i)) => out.horizontal[i] = atom as u8,
            Some((Orientation::Vertical, i)) => out.vertical[i] = atom as u8,
            None => return Err(Error::EdgeOutsideBox { edge: e, bbox: self.bbox }),
        }
        Ok(out)
    }

    /// The same weights on a sub-box.
    pub fn restrict(&self, sub: LatticeBox) -> Result<Self> {
        if !self.bbox.contains_box(&sub) {
            return Err(Error::InvalidBox(format!("{sub} not inside {}", self.bbox)));
        }
        let dist = self.dist.clone();
        let mut out = Self::from_fn(sub, &dist, |e| self.atom_index(e).expect("inside"))?;
        out.seed = self.seed;
        Ok(out)
    }

    /// Text dump: a `box` header then `H|V x y weight` per edge in canonical
    /// order.
    pub fn dump(&self) -> String {
        let b = self.bbox;
        let mut out = format!("box {} {} {} {}\n", b.x_min(), b.x_max(), b.y_min(), b.y_max());
        let rendered: Vec<String> = (0..self.dist.num_atoms()).map(|i| self.dist.atom(i).to_string()).collect();
        for e in b.edges() {
            let a = self.atom_index(e).expect("box edge");
            out.push_str(&format!(
                "{} {} {} {}\n",
                e.orientation.letter(),
                e.anchor.x,
                e.anchor.y,
                rendered[a]
            ));
        }
        out
    }

    /// Reads a dump back, mapping each weight to an atom of `dist`.
    pub fn parse_dump(text: &str, dist: &EdgeDistribution) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let perr = |line: usize, msg: String| Error::Parse { line: line + 1, msg };
        let (hl, header) = lines.next().ok_or_else(|| perr(0, "missing header".into()))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 5 || toks[0] != "box" {
            return Err(perr(hl, "expected `box x_min x_max y_min y_max`".into()));
        }
        let mut coords = [0i32; 4];
        for (c, t) in coords.iter_mut().zip(&toks[1..]) {
            *c = t.parse().map_err(|e| perr(hl, format!("{t:?}: {e}")))?;
        }
        let bbox = LatticeBox::new(coords[0], coords[1], coords[2], coords[3])?;
        if bbox.num_edges() > 1 << 28 {
            return Err(perr(hl, "box too large".into()));
        }
        // each edge line takes at least 8 bytes
        let mut atoms = Vec::with_capacity(bbox.num_edges().min(text.len() / 8));
        for expected in bbox.edges() {
            let (ln, line) = lines.next().ok_or_else(|| perr(0, format!("missing edge {expected}")))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 4 {
                return Err(perr(ln, "expected `H|V x y weight`".into()));
            }
            let orientation = match toks[0] {
                "H" => Orientation::Horizontal,
                "V" => Orientation::Vertical,
                o => return Err(perr(ln, format!("bad orientation {o:?}"))),
            };
            let x: i32 = toks[1].parse().map_err(|e| perr(ln, format!("{e}")))?;
            let y: i32 = toks[2].parse().map_err(|e| perr(ln, format!("{e}")))?;
            let e = Edge { orientation, anchor: Vertex::new(x, y) };
            if e != expected {
                return Err(perr(ln, format!("expected edge {expected}, found {e}")));
            }
            let t = PassageTime::parse(toks[3]).map_err(|err| perr(ln, err.to_string()))?;
            let a = dist
                .index_of(t)
                .ok_or_else(|| perr(ln, Error::WeightNotInSupport(t.to_string()).to_string()))?;
            atoms.push(a);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(perr(ln, "trailing content".into()));
        }
        let mut it = atoms.into_iter();
        Self::from_fn(bbox, dist, |_| it.next().expect("one per edge"))
    }

    /// Fraction of open edges.
    pub fn empirical_zero_fraction(&self) -> f64 {
        let n = self.horizontal.len() + self.vertical.len();
        if n == 0 || self.dist.values[0] != 0 {
            return 0.0;
        }
        let zeros = self.horizontal.iter().chain(&self.vertical).filter(|a| **a == 0).count();
        zeros as f64 / n as f64
    }

    /// Count of edges per atom.
    pub fn histogram(&self) -> Vec<u64> {
        let mut h = vec![0u64; self.dist.num_atoms()];
        for a in self.horizontal.iter().chain(&self.vertical) {
            h[*a as usize] += 1;
        }
        h
    }
}

pub fn is_open(config: &Configuration, e: Edge) -> Result<bool> {
    config.is_open(e)
}

pub fn empirical_zero_fraction(config: &Configuration) -> f64 {
    config.empirical_zero_fraction()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(v: &str) -> EdgeDistribution {
        EdgeDistribution::new(&[(v, 1.0)]).unwrap()
    }

    #[test]
    fn degenerate_laws() {
        let b = LatticeBox::centered(3).unwrap();
        let zero = sample_configuration(b, &unit("0"), SeedSpec::new(1, 0));
        assert!(b.edges().all(|e| zero.is_open(e).unwrap()));
        assert_eq!(zero.empirical_zero_fraction(), 1.0);
        let one = sample_configuration(b, &unit("1"), SeedSpec::new(1, 0));
        assert!(b.edges().all(|e| one.weight(e).unwrap() == 1));
        assert_eq!(one.empirical_zero_fraction(), 0.0);
    }

    #[test]
    fn half_is_not_open() {
        let d = EdgeDistribution::new(&[("0", 0.5), ("0.5", 0.25), ("1", 0.25)]).unwrap();
        let b = LatticeBox::new(0, 2, 0, 0).unwrap();
        let c = Configuration::from_fn(b, &d, |e| e.anchor.x as usize).unwrap();
        assert!(c.is_open(Edge::horizontal(0, 0)).unwrap());
        assert!(!c.is_open(Edge::horizontal(1, 0)).unwrap());
        assert_eq!(c.weight_time(Edge::horizontal(1, 0)).unwrap().to_string(), "0.5");
        assert!(matches!(c.is_open(Edge::horizontal(2, 0)), Err(Error::EdgeOutsideBox { .. })));
    }

    #[test]
    fn deterministic() {
        let b = LatticeBox::centered(10).unwrap();
        let d = EdgeDistribution::bernoulli(0.5).unwrap();
        let s = SeedSpec::new(42, 3);
        assert_eq!(sample_configuration(b, &d, s), sample_configuration(b, &d, s));
        assert_ne!(sample_configuration(b, &d, s), sample_configuration(b, &d, SeedSpec::new(42, 4)));
    }

    #[test]
    fn nested_boxes_share_edges() {
        let d = EdgeDistribution::bernoulli(0.4).unwrap();
        let s = SeedSpec::new(7, 11);
        let small = LatticeBox::new(-3, 5, -2, 4).unwrap();
        let big = LatticeBox::centered(12).unwrap();
        let cs = sample_configuration(small, &d, s);
        let cb = sample_configuration(big, &d, s);
        for e in small.edges() {
            assert_eq!(cs.atom_index(e).unwrap(), cb.atom_index(e).unwrap());
        }
        assert_eq!(cb.restrict(small).unwrap(), cs);
    }

    #[test]
    fn distribution_validation() {
        assert!(EdgeDistribution::new(&[("0", 0.5), ("1", 0.4)]).is_err());
        assert!(EdgeDistribution::new(&[("0", 0.5), ("0", 0.5)]).is_err());
        assert!(EdgeDistribution::new(&[("-1", 1.0)]).is_err());
        assert!(EdgeDistribution::new(&[("0", 1.5), ("1", -0.5)]).is_err());
        let d = EdgeDistribution::new(&[("2", 0.3), ("0.25", 0.7)]).unwrap();
        assert_eq!(d.values(), &[25, 200]);
        assert_eq!(d.decimals(), 2);
        assert_eq!(d.zero_mass(), 0.0);
        assert!((d.mean() - (0.25 * 0.7 + 0.6)).abs() < 1e-12);
        let b = EdgeDistribution::bernoulli(1.0).unwrap();
        assert_eq!(b.num_atoms(), 1);
        assert!(b.is_zero_one_like());
        assert!(!d.is_zero_one_like());
        let f = EdgeDistribution::from_f64_atoms(&[(0.0, 0.5), (0.1, 0.5)]).unwrap();
        assert_eq!(f.values(), &[0, 1]);
    }

    #[test]
    fn passage_time_rendering() {
        assert_eq!(PassageTime::new(1250, 3).to_string(), "1.25");
        assert_eq!(PassageTime::new(3000, 3).to_string(), "3");
        assert_eq!(PassageTime::new(5, 2).to_string(), "0.05");
        assert_eq!(PassageTime::parse("1.250").unwrap(), PassageTime::new(125, 2));
        assert_eq!(PassageTime::parse(".5").unwrap().to_string(), "0.5");
        assert!(PassageTime::parse("1e3").is_err());
        assert!(PassageTime::parse(".").is_err());
        assert!(PassageTime::new(1, 0) > PassageTime::new(99, 2));
    }

    #[test]
    fn dump_roundtrip() {
        let d = EdgeDistribution::new(&[("0", 0.5), ("0.5", 0.25), ("1", 0.25)]).unwrap();
        let c = sample_configuration(LatticeBox::new(-1, 2, 0, 2).unwrap(), &d, SeedSpec::new(5, 0));
        let text = c.dump();
        assert!(text.starts_with("box -1 2 0 2\nH -1 0 "));
        let back = Configuration::parse_dump(&text, &d).unwrap();
        assert_eq!(back.dump(), text);
        assert!(Configuration::parse_dump("box 0 1 0 0\nH 0 0 0.3\n", &d).is_err());
        assert!(Configuration::parse_dump("box 0 1 0 0\n", &d).is_err());
        assert!(Configuration::parse_dump("box 0 1 0 0\nV 0 0 0\n", &d).is_err());
    }

    #[test]
    fn counters_are_injective_on_rows() {
        let a = edge_counter(Edge::horizontal(-5, 3));
        assert_eq!(edge_counter(Edge::horizontal(-4, 3)), a + 1);
        assert_ne!(edge_counter(Edge::vertical(-5, 3)), a);
        assert_ne!(edge_counter(Edge::horizontal(-5, 4)), a);
    }
}
