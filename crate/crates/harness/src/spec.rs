//! Experiment spec files.
//!
//! ```text
//! spec_version: 1
//! kind: count_subcritical
//! p: 0.25
//! n: 8, 12, 16, 20, 24
//! replicates: 200
//! master_seed: 1
//! ```
//!
//! One `key: value` per line; `#` starts a comment. Lists are
//! comma-separated. Keys other than `spec_version`, `kind`, `p`, `n` and
//! `replicates` are optional.

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

pub const SPEC_VERSION: u32 = 1;
pub const MAX_N: u32 = 1 << 14;
pub const MAX_REPLICATES: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentKind {
    Mu,
    CountSubcritical,
    CountCritical,
    CrossingLength,
    RswEvents,
    ClusterMax,
    A0nGrowth,
    CertificateSweep,
    SupercriticalDivergence,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Mu,
        ExperimentKind::CountSubcritical,
        ExperimentKind::CountCritical,
        ExperimentKind::CrossingLength,
        ExperimentKind::RswEvents,
        ExperimentKind::ClusterMax,
        ExperimentKind::A0nGrowth,
        ExperimentKind::CertificateSweep,
        ExperimentKind::SupercriticalDivergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Mu => "mu",
            ExperimentKind::CountSubcritical => "count_subcritical",
            ExperimentKind::CountCritical => "count_critical",
            ExperimentKind::CrossingLength => "crossing_length",
            ExperimentKind::RswEvents => "rsw_events",
            ExperimentKind::ClusterMax => "cluster_max",
            ExperimentKind::A0nGrowth => "a0n_growth",
            ExperimentKind::CertificateSweep => "certificate_sweep",
            ExperimentKind::SupercriticalDivergence => "supercritical_divergence",
        }
    }

    /// Kinds built on annuli need `annulus_sequence(n, delta1)` to exist.
    pub fn needs_annuli(self) -> bool {
        matches!(self, ExperimentKind::RswEvents | ExperimentKind::CertificateSweep)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ExperimentKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown experiment kind {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Delta1 {
    Fixed(f64),
    /// Three annuli of the largest base for each `n`.
    Auto,
}

impl Delta1 {
    pub fn resolve(self, n: u32) -> f64 {
        match self {
            Delta1::Fixed(d) => d,
            Delta1::Auto => fpp_core::lattice::auto_delta1(n),
        }
    }
}

impl fmt::Display for Delta1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Delta1::Fixed(d) => write!(f, "{d}"),
            Delta1::Auto => f.write_str("auto"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub p: Vec<f64>,
    pub n: Vec<u32>,
    pub replicates: u64,
    pub master_seed: u64,
    pub count_cap: u64,
    pub step_budget: u64,
    pub delta1: Delta1,
    pub tile_side: u32,
    /// Box half-widths, as multiples of `n`, for `supercritical_divergence`.
    pub box_factors: Vec<u32>,
    /// Record wall-clock time per cell. Off by default so that record files
    /// are reproducible byte for byte.
    pub timing: bool,
    /// Where `run` writes when no directory is given on the command line.
    /// Not part of the canonical form or the hash.
    pub output_dir: Option<String>,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, p: Vec<f64>, n: Vec<u32>, replicates: u64) -> Self {
        ExperimentSpec {
            kind,
            p,
            n,
            replicates,
            master_seed: 1,
            count_cap: 1_000_000_000,
            step_budget: 1_000_000_000,
            delta1: Delta1::Fixed(0.25),
            tile_side: 32,
            box_factors: vec![2, 4, 8],
            timing: false,
            output_dir: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut fields: Vec<(usize, &str, &str)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| HarnessError::spec(i + 1, format!("expected `key: value`, got {line:?}")))?;
            let key = key.trim();
            if fields.iter().any(|f| f.1 == key) {
                return Err(HarnessError::spec(i + 1, format!("duplicate key {key:?}")));
            }
            fields.push((i + 1, key, value.trim()));
        }
        let get = |key: &str| fields.iter().find(|f| f.1 == key).map(|f| (f.0, f.2));
        let need = |key: &str| get(key).ok_or_else(|| HarnessError::spec(0, format!("missing key {key:?}")));

        let (line, v) = need("spec_version")?;
        if v != SPEC_VERSION.to_string() {
            return Err(HarnessError::spec(line, format!("unsupported spec_version {v:?}")));
        }
        let (line, v) = need("kind")?;
        let kind = v.parse().map_err(|e| HarnessError::spec(line, e))?;
        let (line, v) = need("p")?;
        let p = parse_list::<f64>(v).map_err(|e| HarnessError::spec(line, e))?;
        let (line, v) = need("n")?;
        let n = parse_list::<u32>(v).map_err(|e| HarnessError::spec(line, e))?;
        let (line, v) = need("replicates")?;
        let replicates = parse_one::<u64>(v).map_err(|e| HarnessError::spec(line, e))?;
        let mut spec = ExperimentSpec::new(kind, p, n, replicates);

        for &(line, key, v) in &fields {
            let err = |e: String| HarnessError::spec(line, format!("{key}: {e}"));
            match key {
                "spec_version" | "kind" | "p" | "n" | "replicates" => {}
                "master_seed" => spec.master_seed = parse_one(v).map_err(err)?,
                "count_cap" => spec.count_cap = parse_count(v).map_err(err)?,
                "step_budget" => spec.step_budget = parse_count(v).map_err(err)?,
                "delta1" => {
                    spec.delta1 = if v == "auto" { Delta1::Auto } else { Delta1::Fixed(parse_one(v).map_err(err)?) }
                }
                "tile_side" => spec.tile_side = parse_one(v).map_err(err)?,
                "box_factors" => spec.box_factors = parse_list(v).map_err(err)?,
                "timing" => spec.timing = parse_one(v).map_err(err)?,
                "output_dir" => spec.output_dir = Some(v.to_string()),
                _ => return Err(HarnessError::spec(line, format!("unknown key {key:?}"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::spec(0, msg));
        if self.p.is_empty() || self.n.is_empty() {
            return bad("p and n must be nonempty".into());
        }
        if let Some(p) = self.p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return bad(format!("p = {p} outside [0, 1]"));
        }
        if let Some(n) = self.n.iter().find(|&&n| n < 2 || n > MAX_N) {
            return bad(format!("n = {n} outside [2, {MAX_N}]"));
        }
        if has_duplicates(&self.n) || self.p.iter().enumerate().any(|(i, p)| self.p[..i].contains(p)) {
            return bad("p and n values must be distinct".into());
        }
        if self.replicates == 0 || self.replicates > MAX_REPLICATES {
            return bad(format!("replicates = {} outside [1, {MAX_REPLICATES}]", self.replicates));
        }
        if self.count_cap == 0 || self.step_budget == 0 {
            return bad("count_cap and step_budget must be positive".into());
        }
        if let Delta1::Fixed(d) = self.delta1 {
            if !(d > 0.0 && d < 1.0) {
                return bad(format!("delta1 = {d} outside (0, 1)"));
            }
        }
        if self.tile_side == 0 {
            return bad("tile_side must be positive".into());
        }
        if self.box_factors.is_empty() || self.box_factors.iter().any(|&f| f == 0 || f > 64) {
            return bad("box_factors must be in [1, 64]".into());
        }
        if has_duplicates(&self.box_factors) {
            return bad("box_factors must be distinct".into());
        }
        if self.kind.needs_annuli() {
            for &n in &self.n {
                if let Err(e) = fpp_core::lattice::annulus_sequence(n, self.delta1.resolve(n)) {
                    return bad(format!("n = {n}, delta1 = {}: {e}", self.delta1));
                }
            }
        }
        Ok(())
    }

    /// Normalized text: every hashed field, fixed order, defaults written
    /// out.
    pub fn canonical(&self) -> String {
        let join = |xs: Vec<String>| xs.join(", ");
        format!(
            "spec_version: {SPEC_VERSION}\nkind: {}\np: {}\nn: {}\nreplicates: {}\nmaster_seed: {}\ncount_cap: {}\nstep_budget: {}\ndelta1: {}\ntile_side: {}\nbox_factors: {}\ntiming: {}\n",
            self.kind,
            join(self.p.iter().map(|p| format!("{p:?}")).collect()),
            join(self.n.iter().map(u32::to_string).collect()),
            self.replicates,
            self.master_seed,
            self.count_cap,
            self.step_budget,
            self.delta1,
            self.tile_side,
            join(self.box_factors.iter().map(u32::to_string).collect()),
            self.timing,
        )
    }

    /// SHA-256 of [`canonical`](Self::canonical), hex.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    /// Box half-width factors that apply to this kind.
    pub fn factors(&self) -> Vec<Option<u32>> {
        if self.kind == ExperimentKind::SupercriticalDivergence {
            self.box_factors.iter().copied().map(Some).collect()
        } else {
            vec![None]
        }
    }
}

fn has_duplicates<T: PartialEq>(xs: &[T]) -> bool {
    xs.iter().enumerate().any(|(i, x)| xs[..i].contains(x))
}

fn parse_one<T: FromStr>(v: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("{v:?}: {e}"))
}

fn parse_list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    v.split(',').map(|s| parse_one(s.trim())).collect()
}

/// Integer or `1e9`-style power of ten.
fn parse_count(v: &str) -> std::result::Result<u64, String> {
    if let Some((m, e)) = v.split_once(['e', 'E']) {
        let m: u64 = parse_one(m)?;
        let e: u32 = parse_one(e)?;
        return 10u64.checked_pow(e).and_then(|p| p.checked_mul(m)).ok_or_else(|| format!("{v:?} overflows"));
    }
    parse_one(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MU: &str = "spec_version: 1\nkind: mu\np: 0.25, 0.5\nn: 16, 32, 64\nreplicates: 40\n";

    #[test]
    fn parse_and_defaults() {
        let s = ExperimentSpec::parse(MU).unwrap();
        assert_eq!(s.kind, ExperimentKind::Mu);
        assert_eq!(s.n, vec![16, 32, 64]);
        assert_eq!(s.count_cap, 1_000_000_000);
        assert_eq!(s.delta1, Delta1::Fixed(0.25));
    }

    #[test]
    fn canonical_round_trip() {
        let s = ExperimentSpec::parse(&format!("{MU}# note\ncount_cap: 1e6\ndelta1: auto\noutput_dir: out\n")).unwrap();
        let again = ExperimentSpec::parse(&s.canonical()).unwrap();
        assert_eq!(again.canonical(), s.canonical());
        assert_eq!(again.hash(), s.hash());
        assert_eq!(s.count_cap, 1_000_000);
    }

    #[test]
    fn hash_tracks_every_field() {
        let base = ExperimentSpec::parse(MU).unwrap();
        let variants = [
            "master_seed: 2",
            "count_cap: 7",
            "step_budget: 7",
            "delta1: 0.5",
            "tile_side: 8",
            "box_factors: 2, 4",
            "timing: true",
        ];
        for v in variants {
            let s = ExperimentSpec::parse(&format!("{MU}{v}\n")).unwrap();
            assert_ne!(s.hash(), base.hash(), "{v}");
        }
        let moved = ExperimentSpec::parse(&format!("{MU}output_dir: elsewhere\n")).unwrap();
        assert_eq!(moved.hash(), base.hash());
        let reps = ExperimentSpec::parse(&MU.replace("40", "41")).unwrap();
        assert_ne!(reps.hash(), base.hash());
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in [
            "",
            "spec_version: 2\nkind: mu\np: 0.5\nn: 8\nreplicates: 1\n",
            "spec_version: 1\nkind: nope\np: 0.5\nn: 8\nreplicates: 1\n",
            "spec_version: 1\nkind: mu\np: 1.5\nn: 8\nreplicates: 1\n",
            "spec_version: 1\nkind: mu\np: 0.5\nn: 8\nreplicates: 0\n",
            "spec_version: 1\nkind: mu\np: 0.5\nn: 8, 8\nreplicates: 1\n",
            "spec_version: 1\nkind: mu\np: 0.5\nn: 8\nreplicates: 1\ncolour: red\n",
            "spec_version: 1\nkind: mu\np: 0.5\nn: 8\nreplicates: 1\nreplicates: 2\n",
            "spec_version: 1\nkind: rsw_events\np: 0.5\nn: 8\nreplicates: 1\n",
            "no colon here\n",
        ] {
            assert!(ExperimentSpec::parse(bad).is_err(), "{bad:?}");
        }
    }
}
