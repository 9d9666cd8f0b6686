//! What each experiment kind measures in one cell.

use std::time::Instant;

use fpp_core::cluster_stats::{boundary_connected_sizes, largest_cluster_size};
use fpp_core::critical_geometry::{detect_event_e, lowest_crossing};
use fpp_core::geodesics::{count_geodesics, detour_bound, lower_bound_certificate, monotone_paths, CountLimits};
use fpp_core::lattice::{annulus_sequence, LatticeBox, Vertex};
use fpp_core::passage::{certify_confinement_with, ConfinementGoal, ConfinementOptions};
use fpp_core::random_field::{sample_configuration, Configuration, EdgeDistribution, SeedSpec};
use num_bigint::BigUint;

use crate::error::Result;
use crate::record::{CellKey, Record};
use crate::spec::{ExperimentKind, ExperimentSpec};

/// Growth factor between successive confinement boxes.
pub const CONFINEMENT_GROWTH: f64 = 2.0;

pub fn measure(spec: &ExperimentSpec, spec_hash: &str, key: CellKey) -> Result<Record> {
    let started = Instant::now();
    let p = spec.p[key.p_index];
    let n = spec.n[key.n_index];
    let factor = spec.factors()[key.factor_index];
    let dist = EdgeDistribution::bernoulli(p)?;
    let seed = SeedSpec { master_seed: spec.master_seed, replicate_index: key.rep };
    let mut r = Record::blank(spec_hash, spec.kind, p, n, key.rep, spec.master_seed);
    let origin = Vertex::ORIGIN;
    let target = Vertex::new(n as i32, 0);
    let limits = CountLimits::new(spec.count_cap, spec.step_budget);

    match spec.kind {
        ExperimentKind::Mu | ExperimentKind::A0nGrowth => {
            let opts = ConfinementOptions { goal: ConfinementGoal::Time, ..confinement() };
            let (_, c) = certify_confinement_with(&dist, n, seed, &opts)?;
            r.t = Some(c.time.to_f64());
            r.certified = Some(c.time_exact);
            r.half_width = Some(c.bbox.x_max() as u32);
        }
        ExperimentKind::CountSubcritical | ExperimentKind::CountCritical | ExperimentKind::CertificateSweep => {
            let (config, c) = certify_confinement_with(&dist, n, seed, &confinement())?;
            r.t = Some(c.time.to_f64());
            r.certified = Some(c.certified);
            r.half_width = Some(c.bbox.x_max() as u32);
            let kappa = if spec.kind == ExperimentKind::CountSubcritical {
                None
            } else {
                certificate_kappa(&config, n, spec.delta1.resolve(n))?
            };
            r.kappa = kappa;
            count_into(&mut r, &config, origin, target, &limits, kappa)?;
        }
        ExperimentKind::CrossingLength => {
            let bbox = LatticeBox::new(0, n as i32, 0, n as i32)?;
            let config = sample_configuration(bbox, &dist, seed);
            r.cross_len = lowest_crossing(&config, bbox).map(|c| c.len() as u32);
        }
        ExperimentKind::RswEvents => {
            let seq = annulus_sequence(n, spec.delta1.resolve(n))?;
            let config = sample_configuration(seq.outermost_box(), &dist, seed);
            r.event_e = Some(detect_event_e(&config, 2, &seq)?);
        }
        ExperimentKind::ClusterMax => {
            let bbox = LatticeBox::new(0, n as i32, 0, n as i32)?;
            let config = sample_configuration(bbox, &dist, seed);
            r.cmax = Some(largest_cluster_size(&config, bbox) as u64);
            let full: Vec<usize> = boundary_connected_sizes(&config, bbox, spec.tile_side)
                .into_iter()
                .filter(|t| !t.truncated)
                .map(|t| t.count)
                .collect();
            if !full.is_empty() {
                r.boundary_mean = Some(full.iter().sum::<usize>() as f64 / full.len() as f64);
            }
        }
        ExperimentKind::SupercriticalDivergence => {
            let f = factor.expect("box sweeps have factors");
            let half = f * n;
            let bbox = LatticeBox::centered(half as i32)?;
            let config = sample_configuration(bbox, &dist, seed);
            r.box_factor = Some(f);
            r.half_width = Some(half);
            let report = count_geodesics(&config, origin, target, &limits)?;
            r.t = Some(report.time.to_f64());
            r.overflow = Some(report.count.is_overflow());
            r.count = report.count.exact().map(BigUint::to_string);
        }
    }
    if spec.timing {
        r.wall_ms = Some(started.elapsed().as_millis() as u64);
    }
    Ok(r)
}

fn confinement() -> ConfinementOptions {
    ConfinementOptions { growth: CONFINEMENT_GROWTH, ..ConfinementOptions::default() }
}

/// `None` when no annulus sequence exists at this scale or no event
/// occurs.
fn certificate_kappa(config: &Configuration, n: u32, delta1: f64) -> Result<Option<u32>> {
    if annulus_sequence(n, delta1).is_err() {
        return Ok(None);
    }
    Ok(lower_bound_certificate(config, n, delta1)?.kappa().map(|k| k as u32))
}

/// Exact count when it completes, and the best lower bound either way: the
/// paths enumerated, the monotone paths, and `2^κ`.
fn count_into(
    r: &mut Record,
    config: &Configuration,
    s: Vertex,
    t: Vertex,
    limits: &CountLimits,
    kappa: Option<u32>,
) -> Result<()> {
    let report = count_geodesics(config, s, t, limits)?;
    let mono = monotone_paths(config, s, t)?;
    r.overflow = Some(report.count.is_overflow());
    r.count = report.count.exact().map(BigUint::to_string);
    let mut lower = report.count.lower_bound().clone().max(mono.count);
    if let Some(k) = kappa {
        lower = lower.max(BigUint::from(1u8) << k);
    }
    r.max_len = report.max_len;
    if report.count.is_overflow() {
        let det = detour_bound(config, s, t)?;
        let longest = det.apply(&vec![true; det.k()])?.len() as u32;
        lower = lower.max(det.lower_bound());
        r.max_len = Some(report.max_len.unwrap_or(0).max(mono.max_len).max(longest));
    }
    r.count_lower = Some(lower.to_string());
    Ok(())
}
