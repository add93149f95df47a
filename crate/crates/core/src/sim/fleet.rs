//! Searches and comparisons built from many replications: the smallest
//! fleet that stays stable, and simulated against analytic travel times.

use std::collections::BTreeMap;

use super::{little_check, simulate_replications, summarize, SimConfig, SimResult};
use crate::error::{ModelError, Result};
use crate::optimize::{golden_section, log_space};
use crate::pareto::interpolate;
use crate::steady::{critical_fleet, performance_curve};
use crate::units::Scenario;

/// Fleets probed by [`min_feasible_fleet`] and the answer.
#[derive(Debug, Clone, PartialEq)]
pub struct FleetSearch {
    pub m: usize,
    /// Replications run at each probed fleet size.
    pub probes: BTreeMap<usize, Vec<SimResult>>,
}

impl FleetSearch {
    /// Every replication that was judged feasible.
    pub fn feasible_runs(&self) -> impl Iterator<Item = &SimResult> {
        self.probes.values().flatten().filter(|r| r.feasible)
    }
}

/// Smallest integer fleet whose replications are all feasible, by bisection
/// between an infeasible and a feasible fleet. The bracket is grown from the
/// analytic critical fleet; `limit` caps the fleets tried.
pub fn min_feasible_fleet(base: &SimConfig, limit: usize) -> Result<FleetSearch> {
    base.validate()?;
    let scenario = Scenario::new(base.policy, base.pi, base.k, base.c)?;
    let start = (critical_fleet(&scenario)?.m_c.ceil() as usize).clamp(1, limit.max(1));
    let mut probes = BTreeMap::new();
    let probe = |m: usize, probes: &mut BTreeMap<usize, Vec<SimResult>>| -> Result<bool> {
        let reps = match probes.get(&m) {
            Some(reps) => reps,
            None => probes.entry(m).or_insert(simulate_replications(&SimConfig { m, ..base.clone() })?),
        };
        Ok(reps.iter().all(|r| r.feasible))
    };

    let mut hi = start;
    while !probe(hi, &mut probes)? {
        if hi >= limit {
            return Err(ModelError::Search(format!("no feasible fleet up to {limit}")));
        }
        hi = (hi + hi.div_ceil(4)).min(limit);
    }
    let mut lo = hi;
    loop {
        if lo == 1 {
            return Ok(FleetSearch { m: 1, probes });
        }
        lo = lo * 4 / 5;
        lo = lo.max(1);
        if !probe(lo, &mut probes)? {
            break;
        }
        hi = lo;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if probe(mid, &mut probes)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(FleetSearch { m: hi, probes })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub m: usize,
    pub f_sim: f64,
    pub std_error: f64,
    /// Analytic `f_t` on the efficient branch; `None` below the critical fleet.
    pub f_analytic: Option<f64>,
    pub feasible: bool,
    /// Every replication passed the Little's-law check.
    pub little_ok: bool,
    pub replications: Vec<SimResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
    /// Horizontal shift of the analytic curve that best fits the feasible
    /// simulated points; `None` without any.
    pub shift: Option<f64>,
}

/// Efficient branch of the analytic curve as a table sorted by `m`.
fn analytic_table(scenario: &Scenario) -> Result<Vec<(f64, f64)>> {
    let curve = performance_curve(scenario, &log_space(1e-3, 1e5, 4000))?;
    let mut table: Vec<(f64, f64)> = curve.efficient().map(|p| (p.m, p.f_t)).collect();
    table.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(table)
}

/// Shift `d` in `[0, min m - m_c]` minimizing the mean absolute difference
/// between the simulated `f_t(m)` and the analytic `f_t(m - d)`.
pub fn best_shift(scenario: &Scenario, points: &[(f64, f64)]) -> Result<Option<f64>> {
    if points.is_empty() {
        return Ok(None);
    }
    let table = analytic_table(scenario)?;
    let Some(&(m_lo, _)) = table.first() else {
        return Ok(None);
    };
    let min_m = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let cap = (min_m - m_lo).max(0.0);
    let error = |d: f64| {
        points
            .iter()
            .map(|&(m, f)| interpolate(&table, m - d).map_or(f64::INFINITY, |fa| (f - fa).abs()))
            .sum::<f64>()
            / points.len() as f64
    };
    if cap == 0.0 {
        return Ok(Some(0.0));
    }
    // coarse scan, then golden section around the best cell
    let steps = 400;
    let h = cap / steps as f64;
    let best = (0..=steps)
        .map(|i| i as f64 * h)
        .min_by(|a, b| error(*a).total_cmp(&error(*b)))
        .unwrap_or(0.0);
    let (d, fd) = golden_section(error, (best - h).max(0.0), (best + h).min(cap), 1e-6);
    Ok(Some(if fd <= error(best) { d } else { best }))
}

/// Replications at every fleet in `m_list` against the analytic curve.
pub fn compare(base: &SimConfig, m_list: &[usize]) -> Result<Comparison> {
    base.validate()?;
    let scenario = Scenario::new(base.policy, base.pi, base.k, base.c)?;
    let table = analytic_table(&scenario)?;
    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let reps = simulate_replications(&SimConfig { m, ..base.clone() })?;
        let s = summarize(&reps);
        rows.push(CompareRow {
            m,
            f_sim: s.mean_f_t,
            std_error: s.std_error,
            f_analytic: interpolate(&table, m as f64),
            feasible: s.all_feasible,
            little_ok: reps.iter().all(|r| little_check(r, base.pi).passed),
            replications: reps,
        });
    }
    let fitted: Vec<(f64, f64)> = rows.iter().filter(|r| r.feasible).map(|r| (r.m as f64, r.f_sim)).collect();
    let shift = best_shift(&scenario, &fitted)?;
    Ok(Comparison { rows, shift })
}
