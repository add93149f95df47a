//! Sample statistics, the drift tests behind the feasibility verdict and the
//! Little's-law self-check.

use super::engine::RunLog;
use super::{SimConfig, SimResult};

/// Number of evenly spaced instants at which the unassigned count is read
/// for the drift regression.
const SLOPE_SAMPLES: usize = 200;

/// Least-squares slope of `ys` against `xs`.
fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}

/// Value of a step function given as sorted `(time, value)` changes.
fn step_at(log: &[(f64, usize)], t: f64) -> usize {
    let idx = log.partition_point(|e| e.0 <= t);
    if idx == 0 {
        0
    } else {
        log[idx - 1].1
    }
}

/// Time average of a step function over `[a, b]`.
fn step_mean(log: &[(f64, usize)], a: f64, b: f64) -> f64 {
    if b <= a {
        return step_at(log, a) as f64;
    }
    let mut area = 0.0;
    let mut t = a;
    let mut v = step_at(log, a) as f64;
    let start = log.partition_point(|e| e.0 <= a);
    for &(te, ve) in &log[start..] {
        if te >= b {
            break;
        }
        area += v * (te - t);
        t = te;
        v = ve as f64;
    }
    area += v * (b - t);
    area / (b - a)
}

pub(super) fn summarize(cfg: &SimConfig, log: &RunLog) -> SimResult {
    let lo = cfg.warmup.min(log.passengers.len());
    let hi = (cfg.warmup + cfg.sample).min(log.passengers.len());
    let sample = &log.passengers[lo..hi];
    let end = log.end_time;

    let t_a = sample.first().map_or(0.0, |p| p.call);
    let t_b = sample.last().map_or(t_a, |p| p.call);

    let n = sample.len().max(1) as f64;
    let mean_time = sample.iter().map(|p| p.delivered.unwrap_or(end) - p.call).sum::<f64>() / n;
    let wait_assign = sample.iter().map(|p| p.assigned.unwrap_or(end) - p.call).sum::<f64>() / n;
    let wait_pickup = sample
        .iter()
        .map(|p| p.picked_up.unwrap_or(end) - p.assigned.unwrap_or(end))
        .sum::<f64>()
        / n;
    let ride = sample
        .iter()
        .map(|p| p.delivered.unwrap_or(end) - p.picked_up.unwrap_or(end))
        .sum::<f64>()
        / n;

    // every caller present during the window, sampled or not
    let mean_in_system = if t_b > t_a {
        log.passengers
            .iter()
            .map(|p| {
                let from = p.call.max(t_a);
                let to = p.delivered.unwrap_or(end).min(t_b);
                (to - from).max(0.0)
            })
            .sum::<f64>()
            / (t_b - t_a)
    } else {
        0.0
    };

    let mean_unassigned = step_mean(&log.unassigned, t_a, t_b);
    let unassigned_slope = if t_b > t_a {
        let xs: Vec<f64> = (0..SLOPE_SAMPLES)
            .map(|i| t_a + (t_b - t_a) * i as f64 / (SLOPE_SAMPLES - 1) as f64)
            .collect();
        let ys: Vec<f64> = xs.iter().map(|&t| step_at(&log.unassigned, t) as f64).collect();
        ls_slope(&xs, &ys)
    } else {
        0.0
    };

    let fifth = (sample.len() / 5).max(1);
    let mean_wait = |ps: &[super::PassengerRecord]| {
        ps.iter().map(|p| p.assigned.unwrap_or(end) - p.call).sum::<f64>() / ps.len().max(1) as f64
    };
    let first = mean_wait(&sample[..fifth.min(sample.len())]);
    let last = mean_wait(&sample[sample.len().saturating_sub(fifth)..]);
    let wait_growth = if first > 0.0 { last / first } else if last > 0.0 { f64::INFINITY } else { 1.0 };

    let rule = &cfg.rule;
    let drifting = unassigned_slope > rule.max_slope_per_demand * cfg.pi;
    let waits_grow = wait_growth > rule.wait_growth && last > rule.wait_floor;
    let feasible = log.completed && !drifting && !waits_grow;

    SimResult {
        policy: cfg.policy,
        m: cfg.m,
        c: cfg.c,
        seed: cfg.seed,
        mean_time,
        f_t: mean_time / cfg.k,
        sample_size: sample.len(),
        mean_in_system,
        arrival_rate: if t_b > t_a { (sample.len() - 1) as f64 / (t_b - t_a) } else { 0.0 },
        feasible,
        completed: log.completed,
        unassigned_slope,
        mean_unassigned,
        wait_growth,
        wait_assign,
        wait_pickup,
        ride,
        violations: log.violations,
    }
}

/// Outcome of comparing the measured in-system count with demand times mean
/// door-to-door time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LittleReport {
    pub measured: f64,
    pub expected: f64,
    pub relative_error: f64,
    pub passed: bool,
}

/// Largest relative disagreement accepted by [`little_check`].
pub const LITTLE_TOLERANCE: f64 = 0.03;

pub fn little_check(result: &SimResult, pi: f64) -> LittleReport {
    let expected = pi * result.mean_time;
    let measured = result.mean_in_system;
    if result.sample_size == 0 || pi == 0.0 {
        return LittleReport { measured, expected, relative_error: 0.0, passed: true };
    }
    let relative_error = if expected > 0.0 { (measured - expected).abs() / expected } else { f64::INFINITY };
    LittleReport { measured, expected, relative_error, passed: relative_error <= LITTLE_TOLERANCE }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        assert!((ls_slope(&xs, &ys) - 2.0).abs() < 1e-12);
        assert_eq!(ls_slope(&[1.0, 1.0], &[0.0, 5.0]), 0.0);
    }

    #[test]
    fn step_function_average() {
        let log = [(0.0, 0), (1.0, 2), (3.0, 1)];
        assert_eq!(step_at(&log, 0.5), 0);
        assert_eq!(step_at(&log, 1.0), 2);
        assert_eq!(step_at(&log, 10.0), 1);
        // 0 on [0,1), 2 on [1,3), 1 on [3,4]
        assert!((step_mean(&log, 0.0, 4.0) - 5.0 / 4.0).abs() < 1e-12);
        assert!((step_mean(&log, 2.0, 3.0) - 2.0).abs() < 1e-12);
    }

    fn result(mean_time: f64, in_system: f64, sample: usize) -> SimResult {
        use crate::policy::Policy;
        SimResult {
            policy: Policy::Taxi,
            m: 1,
            c: 1,
            seed: 0,
            mean_time,
            f_t: mean_time / 0.63,
            sample_size: sample,
            mean_in_system: in_system,
            arrival_rate: 100.0,
            feasible: true,
            completed: true,
            unassigned_slope: 0.0,
            mean_unassigned: 0.0,
            wait_growth: 1.0,
            wait_assign: 0.0,
            wait_pickup: 0.0,
            ride: mean_time,
            violations: 0,
        }
    }

    #[test]
    fn little_report() {
        assert!(little_check(&result(0.8, 80.0, 100), 100.0).passed);
        assert!(little_check(&result(0.8, 82.0, 100), 100.0).passed);
        let mis = little_check(&result(0.8 * 1.2, 80.0, 100), 100.0);
        assert!(!mis.passed);
        assert!((mis.relative_error - (96.0 - 80.0) / 96.0).abs() < 1e-12);
        assert!(little_check(&result(0.8, 80.0, 0), 100.0).passed);
        assert!(little_check(&result(0.8, 0.0, 100), 0.0).passed);
    }
}
