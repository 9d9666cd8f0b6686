//! Module results against independent brute-force oracles.

use std::collections::{HashMap, HashSet, VecDeque};

use fpp_core::cluster_stats::{largest_cluster_size, open_clusters};
use fpp_core::critical_geometry::{innermost_circuit, lowest_crossing, outermost_circuit, region_split};
use fpp_core::geodesics::{bruteforce_optimal_paths, count_geodesics_bruteforce, count_geodesics_exact};
use fpp_core::lattice::{Annulus, Circuit, Edge, LatticeBox, Vertex};
use fpp_core::passage::{distance_field, passage_time, tight_subgraph};
use fpp_core::random_field::{sample_configuration, Configuration, EdgeDistribution, SeedSpec};
use num_bigint::BigUint;
use proptest::prelude::*;

fn three_atoms() -> EdgeDistribution {
    EdgeDistribution::new(&[("0", 0.3), ("0.5", 0.3), ("2", 0.4)]).unwrap()
}

/// Bellman-Ford over the edge list, in weight units.
fn bellman_ford(c: &Configuration, s: Vertex) -> HashMap<Vertex, u64> {
    let b = c.bbox();
    let mut d: HashMap<Vertex, u64> = b.vertices().map(|v| (v, u64::MAX)).collect();
    d.insert(s, 0);
    let edges: Vec<(Vertex, Vertex, u64)> = b
        .edges()
        .map(|e| {
            let (u, v) = e.endpoints();
            (u, v, c.weight(e).unwrap())
        })
        .collect();
    loop {
        let mut changed = false;
        for &(u, v, w) in &edges {
            for (a, z) in [(u, v), (v, u)] {
                if d[&a] != u64::MAX && d[&a] + w < d[&z] {
                    d.insert(z, d[&a] + w);
                    changed = true;
                }
            }
        }
        if !changed {
            return d;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distances_match_bellman_ford(seed in 0u64..1_000_000, w in 1i32..7, h in 1i32..7) {
        let b = LatticeBox::new(0, w, 0, h).unwrap();
        let c = sample_configuration(b, &three_atoms(), SeedSpec::new(seed, 0));
        let f = distance_field(&c, &[Vertex::ORIGIN]).unwrap();
        let oracle = bellman_ford(&c, Vertex::ORIGIN);
        for v in b.vertices() {
            prop_assert_eq!(f.units(v), Some(oracle[&v]));
        }
    }

    #[test]
    fn counts_match_bruteforce(seed in 0u64..1_000_000, p in prop::sample::select(vec![0.2, 0.5, 0.8])) {
        let b = LatticeBox::new(0, 3, 0, 3).unwrap();
        let d = EdgeDistribution::bernoulli(p).unwrap();
        let c = sample_configuration(b, &d, SeedSpec::new(seed, 1));
        let t = Vertex::new(3, 2);
        let exact = count_geodesics_exact(&c, Vertex::ORIGIN, t, &BigUint::from(u64::MAX)).unwrap();
        prop_assert_eq!(exact, count_geodesics_bruteforce(&c, Vertex::ORIGIN, t).unwrap());
    }
}

#[test]
fn three_by_three_distances_are_minimal_path_sums() {
    let b = LatticeBox::new(0, 2, 0, 2).unwrap();
    for rep in 0..50 {
        let c = sample_configuration(b, &three_atoms(), SeedSpec::new(5, rep));
        for t in b.vertices().filter(|&v| v != Vertex::ORIGIN) {
            let (time, paths) = bruteforce_optimal_paths(&c, Vertex::ORIGIN, t).unwrap();
            assert!(!paths.is_empty());
            assert_eq!(passage_time(&c, &[Vertex::ORIGIN], &[t]).unwrap(), time);
        }
    }
}

#[test]
fn tight_edges_cover_optimal_paths() {
    let b = LatticeBox::new(0, 3, 0, 3).unwrap();
    let positive = EdgeDistribution::new(&[("1", 0.5), ("2", 0.5)]).unwrap();
    for (dist, exact) in [(three_atoms(), false), (positive, true)] {
        for rep in 0..40 {
            let c = sample_configuration(b, &dist, SeedSpec::new(6, rep));
            let t = Vertex::new(3, 3);
            let tight = tight_subgraph(&c, &[Vertex::ORIGIN], &[t]).unwrap();
            let (_, paths) = bruteforce_optimal_paths(&c, Vertex::ORIGIN, t).unwrap();
            let used: HashSet<Edge> = paths.iter().flat_map(|p| p.edges().collect::<Vec<_>>()).collect();
            for e in &used {
                assert!(tight.contains(*e));
            }
            if exact {
                // without zero weights optimal walks are paths
                assert_eq!(used.len(), tight.edges().len());
            }
        }
    }
}

#[test]
fn passage_time_is_monotone_in_p() {
    let b = LatticeBox::centered(12).unwrap();
    for rep in 0..20 {
        let mut last = None;
        for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let d = EdgeDistribution::bernoulli(p).unwrap();
            let c = sample_configuration(b, &d, SeedSpec::new(9, rep));
            let t = passage_time(&c, &[Vertex::ORIGIN], &[Vertex::new(10, 0)]).unwrap();
            if let Some(prev) = last {
                assert!(t <= prev, "p = {p}");
            }
            last = Some(t);
        }
    }
}

#[test]
fn passage_time_is_subadditive() {
    let b = LatticeBox::centered(24).unwrap();
    let d = EdgeDistribution::bernoulli(0.3).unwrap();
    for rep in 0..30 {
        let c = sample_configuration(b, &d, SeedSpec::new(10, rep));
        let t = |a: i32, z: i32| passage_time(&c, &[Vertex::new(a, 0)], &[Vertex::new(z, 0)]).unwrap().units;
        assert!(t(0, 16) <= t(0, 8) + t(8, 16));
    }
}

/// Closes a left-right crossing outside the box, below it.
fn close_below(path: &[Vertex], b: LatticeBox) -> Circuit {
    let (s, e) = (path[0], path[path.len() - 1]);
    let mut vs = path.to_vec();
    let (xl, xr, yb) = (b.x_min() - 1, b.x_max() + 1, b.y_min() - 1);
    vs.push(Vertex::new(xr, e.y));
    vs.extend((yb..e.y).rev().map(|y| Vertex::new(xr, y)));
    vs.extend((xl..xr).rev().map(|x| Vertex::new(x, yb)));
    vs.extend((yb + 1..=s.y).map(|y| Vertex::new(xl, y)));
    vs.push(s);
    Circuit::new(vs).unwrap()
}

#[test]
fn region_split_agrees_with_ray_parity() {
    let d = EdgeDistribution::bernoulli(0.55).unwrap();
    let b = LatticeBox::new(0, 14, 0, 10).unwrap();
    let mut checked = 0;
    for rep in 0..80 {
        let c = sample_configuration(b, &d, SeedSpec::new(11, rep));
        let Some(x) = lowest_crossing(&c, b) else { continue };
        let split = region_split(&x.path, b);
        let poly = close_below(x.path.vertices(), b);
        for v in b.vertices() {
            if poly.contains_vertex(v) {
                assert!(split.is_lower(v));
            } else {
                assert_eq!(split.is_lower(v), poly.encloses(v), "{v} rep {rep}");
            }
        }
        checked += 1;
    }
    assert!(checked > 20);
}

/// Every open self-avoiding left-right crossing of a small box.
fn all_crossings(c: &Configuration, b: LatticeBox) -> Vec<Vec<Vertex>> {
    fn dfs(c: &Configuration, b: LatticeBox, path: &mut Vec<Vertex>, on: &mut HashSet<Vertex>, out: &mut Vec<Vec<Vertex>>) {
        let v = *path.last().unwrap();
        if v.x == b.x_max() {
            out.push(path.clone());
        }
        for w in b.neighbors(v).collect::<Vec<_>>() {
            if !on.contains(&w) && w.x != b.x_min() && c.open_between(v, w) {
                on.insert(w);
                path.push(w);
                dfs(c, b, path, on, out);
                path.pop();
                on.remove(&w);
            }
        }
    }
    let mut out = Vec::new();
    for y in b.y_min()..=b.y_max() {
        let s = Vertex::new(b.x_min(), y);
        dfs(c, b, &mut vec![s], &mut HashSet::from([s]), &mut out);
    }
    out
}

#[test]
fn lowest_crossing_is_minimal() {
    let d = EdgeDistribution::bernoulli(0.6).unwrap();
    let b = LatticeBox::new(0, 4, 0, 3).unwrap();
    let mut checked = 0;
    for rep in 0..150 {
        let c = sample_configuration(b, &d, SeedSpec::new(12, rep));
        let all = all_crossings(&c, b);
        let lowest = lowest_crossing(&c, b);
        assert_eq!(lowest.is_some(), !all.is_empty());
        let Some(lowest) = lowest else { continue };
        let mine = region_split(&lowest.path, b);
        for other in &all {
            let theirs = region_split(&fpp_core::lattice::LatticePath::new(other.clone()).unwrap(), b);
            for v in mine.lower() {
                assert!(theirs.is_lower(v), "rep {rep}: {v} below the lowest crossing only");
            }
        }
        checked += 1;
    }
    assert!(checked > 50);
}

/// Every open circuit inside the annulus that surrounds its inner box.
fn all_circuits(c: &Configuration, a: &Annulus) -> Vec<Circuit> {
    let verts: Vec<Vertex> = a.outer().vertices().filter(|v| a.contains(*v)).collect();
    let rank: HashMap<Vertex, usize> = verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for &s in &verts {
        let mut stack: Vec<(Vec<Vertex>, HashSet<Vertex>)> = vec![(vec![s], HashSet::from([s]))];
        while let Some((path, on)) = stack.pop() {
            let v = *path.last().unwrap();
            for w in v.neighbors() {
                if !rank.contains_key(&w) || rank[&w] < rank[&s] || !c.open_between(v, w) {
                    continue;
                }
                if w == s && path.len() >= 4 {
                    let mut cyc = path.clone();
                    cyc.push(s);
                    let mut key: Vec<Vertex> = cyc[..cyc.len() - 1].to_vec();
                    key.sort_by_key(|v| (v.y, v.x));
                    let circuit = Circuit::new(cyc).unwrap();
                    if circuit.surrounds(&a.inner()) && seen.insert(key) {
                        out.push(circuit);
                    }
                } else if !on.contains(&w) {
                    let mut p2 = path.clone();
                    p2.push(w);
                    let mut on2 = on.clone();
                    on2.insert(w);
                    stack.push((p2, on2));
                }
            }
        }
    }
    out
}

fn closed_region(c: &Circuit, b: LatticeBox) -> HashSet<Vertex> {
    b.vertices().filter(|&v| c.contains_vertex(v) || c.encloses(v)).collect()
}

#[test]
fn extremal_circuits_are_extremal() {
    let d = EdgeDistribution::bernoulli(0.85).unwrap();
    let a = Annulus::centered(3, 1).unwrap();
    let mut checked = 0;
    for rep in 0..50 {
        let c = sample_configuration(a.outer(), &d, SeedSpec::new(13, rep));
        let all = all_circuits(&c, &a);
        let inner = innermost_circuit(&c, &a);
        let outer = outermost_circuit(&c, &a);
        assert_eq!(inner.is_some(), !all.is_empty());
        assert_eq!(outer.is_some(), !all.is_empty());
        let (Some(inner), Some(outer)) = (inner, outer) else { continue };
        let ri = closed_region(&inner.circuit, a.outer());
        let ro = closed_region(&outer.circuit, a.outer());
        for other in &all {
            let r = closed_region(other, a.outer());
            assert!(ri.is_subset(&r), "rep {rep}: innermost not inside another circuit");
            assert!(r.is_subset(&ro), "rep {rep}: a circuit sticks out of the outermost");
        }
        checked += 1;
    }
    assert!(checked > 10);
}

#[test]
fn clusters_match_breadth_first_labelling() {
    let b = LatticeBox::new(-5, 17, 2, 20).unwrap();
    for p in [0.3, 0.5, 0.7] {
        let d = EdgeDistribution::bernoulli(p).unwrap();
        let c = sample_configuration(b, &d, SeedSpec::new(14, 0));
        let dec = open_clusters(&c, b);
        let mut label: HashMap<Vertex, Vertex> = HashMap::new();
        let mut sizes: HashMap<Vertex, usize> = HashMap::new();
        for v in b.vertices() {
            if label.contains_key(&v) {
                continue;
            }
            let mut q = VecDeque::from([v]);
            label.insert(v, v);
            let mut size = 0;
            while let Some(u) = q.pop_front() {
                size += 1;
                for w in b.neighbors(u).collect::<Vec<_>>() {
                    if !label.contains_key(&w) && c.open_between(u, w) {
                        label.insert(w, v);
                        q.push_back(w);
                    }
                }
            }
            sizes.insert(v, size);
        }
        for v in b.vertices() {
            assert_eq!(dec.id(v), Some(label[&v]));
            assert_eq!(dec.size_of(v), Some(sizes[&label[&v]]));
        }
        assert_eq!(largest_cluster_size(&c, b), *sizes.values().max().unwrap());
        assert_eq!(dec.num_clusters(), sizes.len());
    }
}
