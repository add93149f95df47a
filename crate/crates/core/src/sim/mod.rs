//! Agent-based simulation of a fleet serving Poisson demand over the unit
//! square. Vehicles travel at unit speed along L1 paths, boarding and
//! alighting take no time, and dispatch follows the rules of each policy.

mod engine;
pub mod fleet;
pub mod geom;
mod stats;

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::policy::Policy;
use crate::units::DEFAULT_K;
use geom::Point;

pub use fleet::{best_shift, compare, min_feasible_fleet, CompareRow, Comparison, FleetSearch};
pub use stats::{little_check, LittleReport};

pub const DEFAULT_WARMUP: usize = 500;
pub const DEFAULT_SAMPLE: usize = 10_000;
pub const DEFAULT_REPLICATIONS: usize = 10;

/// When a run counts as unable to hold a steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityRule {
    /// Largest tolerated least-squares growth of the unassigned count, per
    /// unit time and per unit of demand.
    pub max_slope_per_demand: f64,
    /// Largest tolerated ratio of mean wait-to-assign between the last and
    /// first fifth of the sample.
    pub wait_growth: f64,
    /// Growth in wait-to-assign below this many time units is ignored.
    pub wait_floor: f64,
    /// After the last sampled call the run may go on for this multiple of
    /// the sampling window before it is cut off.
    pub drain_factor: f64,
}

impl Default for FeasibilityRule {
    fn default() -> Self {
        Self { max_slope_per_demand: 0.01, wait_growth: 3.0, wait_floor: 0.05, drain_factor: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub policy: Policy,
    pub m: usize,
    pub pi: f64,
    pub c: usize,
    /// Divides mean door-to-door time into `f_t`.
    pub k: f64,
    pub seed: u64,
    pub warmup: usize,
    pub sample: usize,
    pub replications: usize,
    pub rule: FeasibilityRule,
}

impl SimConfig {
    pub fn new(policy: Policy, m: usize, pi: f64) -> Self {
        Self {
            policy,
            m,
            pi,
            c: policy.default_capacity(),
            k: DEFAULT_K,
            seed: 0,
            warmup: DEFAULT_WARMUP,
            sample: DEFAULT_SAMPLE,
            replications: DEFAULT_REPLICATIONS,
            rule: FeasibilityRule::default(),
        }
    }

    pub fn with_capacity(mut self, c: usize) -> Self {
        self.c = c;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_sample(mut self, warmup: usize, sample: usize) -> Self {
        self.warmup = warmup;
        self.sample = sample;
        self
    }

    pub fn with_replications(mut self, replications: usize) -> Self {
        self.replications = replications;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(domain("simulation needs at least one vehicle"));
        }
        if !(self.pi > 0.0 && self.pi.is_finite()) {
            return Err(domain(format!("arrival rate must be positive, got {}", self.pi)));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(domain(format!("k must be positive, got {}", self.k)));
        }
        if self.sample < 1 {
            return Err(domain("sample must hold at least one passenger"));
        }
        if self.replications < 1 {
            return Err(domain("need at least one replication"));
        }
        self.policy.check_capacity(self.c)
    }
}

/// One caller's trip. Times are `None` until the event happens.
#[derive(Debug, Clone, PartialEq)]
pub struct PassengerRecord {
    pub id: usize,
    pub call: f64,
    pub origin: Point,
    pub destination: Point,
    pub assigned: Option<f64>,
    pub picked_up: Option<f64>,
    pub delivered: Option<f64>,
}

impl PassengerRecord {
    /// `call <= assigned <= picked_up <= delivered` over the times present,
    /// with no gaps.
    pub fn timestamps_ordered(&self) -> bool {
        let times = [Some(self.call), self.assigned, self.picked_up, self.delivered];
        let present = times.iter().take_while(|t| t.is_some()).count();
        if times[present..].iter().any(Option::is_some) {
            return false;
        }
        times[..present].windows(2).all(|w| w[0] <= w[1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub policy: Policy,
    pub m: usize,
    pub c: usize,
    pub seed: u64,
    /// Mean door-to-door time over the sample. Sampled passengers still in
    /// the system when a run is cut off count up to the cut-off time.
    pub mean_time: f64,
    pub f_t: f64,
    pub sample_size: usize,
    /// Time-averaged number of callers in the system over the sampling window.
    pub mean_in_system: f64,
    /// Sampled calls per unit time between the first and last sampled call.
    pub arrival_rate: f64,
    pub feasible: bool,
    /// Every sampled passenger was delivered before the cut-off.
    pub completed: bool,
    /// Least-squares growth of the unassigned count per unit time.
    pub unassigned_slope: f64,
    pub mean_unassigned: f64,
    /// Mean wait-to-assign of the last fifth of the sample over the first.
    pub wait_growth: f64,
    pub wait_assign: f64,
    pub wait_pickup: f64,
    pub ride: f64,
    /// Broken dispatch invariants; zero in a correct run.
    pub violations: u64,
}

/// Runs one replication with `cfg.seed`.
pub fn simulate_run(cfg: &SimConfig) -> Result<SimResult> {
    simulate_traced(cfg).map(|(r, _)| r)
}

/// One replication plus every passenger record it produced.
pub fn simulate_traced(cfg: &SimConfig) -> Result<(SimResult, Vec<PassengerRecord>)> {
    cfg.validate()?;
    let log = engine::Engine::new(cfg).run();
    let result = stats::summarize(cfg, &log);
    Ok((result, log.passengers))
}

/// `cfg.replications` independent runs seeded `cfg.seed`, `cfg.seed + 1`, ...
/// in seed order.
pub fn simulate_replications(cfg: &SimConfig) -> Result<Vec<SimResult>> {
    cfg.validate()?;
    (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| simulate_run(&SimConfig { seed: cfg.seed.wrapping_add(r), ..cfg.clone() }))
        .collect()
}

/// Mean and standard error of `f_t` across replications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean_f_t: f64,
    pub std_error: f64,
    pub all_feasible: bool,
    pub replications: usize,
}

pub fn summarize(results: &[SimResult]) -> Summary {
    let n = results.len();
    let mean = results.iter().map(|r| r.f_t).sum::<f64>() / n as f64;
    let var = if n > 1 {
        results.iter().map(|r| (r.f_t - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Summary {
        mean_f_t: mean,
        std_error: (var / n as f64).sqrt(),
        all_feasible: results.iter().all(|r| r.feasible),
        replications: n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(policy: Policy, m: usize) -> SimConfig {
        SimConfig::new(policy, m, 100.0).with_sample(200, 2000).with_seed(7)
    }

    #[test]
    fn deterministic_given_seed() {
        for policy in Policy::ALL {
            let cfg = quick(policy, 150);
            let a = simulate_traced(&cfg).unwrap();
            let b = simulate_traced(&cfg).unwrap();
            assert_eq!(a, b);
        }
        let a = simulate_run(&quick(Policy::Taxi, 150)).unwrap();
        let b = simulate_run(&quick(Policy::Taxi, 150).with_seed(8)).unwrap();
        assert_ne!(a.mean_time, b.mean_time);
    }

    #[test]
    fn records_are_ordered_and_invariants_hold() {
        for (policy, c, m) in [
            (Policy::Taxi, 1, 150),
            (Policy::SharedA, 2, 120),
            (Policy::SharedB, 2, 120),
            (Policy::Dar, 2, 80),
            (Policy::Dar, 5, 80),
            (Policy::Taxi, 1, 60),
        ] {
            let cfg = quick(policy, m).with_capacity(c);
            let (res, recs) = simulate_traced(&cfg).unwrap();
            assert_eq!(res.violations, 0, "{policy} c={c} m={m}");
            assert!(recs.iter().all(PassengerRecord::timestamps_ordered));
            assert!(recs.iter().enumerate().all(|(i, r)| r.id == i));
            assert!(recs.windows(2).all(|w| w[0].call <= w[1].call));
            assert!(res.f_t > 0.0 && res.mean_in_system >= 0.0);
        }
    }

    #[test]
    fn phases_add_up_to_door_to_door() {
        let r = simulate_run(&quick(Policy::SharedA, 150)).unwrap();
        assert!(r.completed);
        let sum = r.wait_assign + r.wait_pickup + r.ride;
        assert!((sum - r.mean_time).abs() < 1e-9 * r.mean_time);
    }

    #[test]
    fn saturated_taxi_is_unstable() {
        let r = simulate_run(&SimConfig::new(Policy::Taxi, 70, 100.0).with_seed(1)).unwrap();
        assert!(!r.feasible);
    }

    #[test]
    fn ample_taxi_fleet_is_stable_and_obeys_little() {
        let r = simulate_run(&SimConfig::new(Policy::Taxi, 150, 100.0).with_seed(3)).unwrap();
        assert!(r.feasible && r.completed);
        assert!(little_check(&r, 100.0).passed);
    }

    #[test]
    fn bad_configs_are_rejected() {
        assert!(simulate_run(&SimConfig::new(Policy::Taxi, 0, 100.0)).is_err());
        assert!(simulate_run(&SimConfig::new(Policy::Taxi, 10, 0.0)).is_err());
        assert!(simulate_run(&SimConfig::new(Policy::Taxi, 10, 100.0).with_capacity(2)).is_err());
        assert!(simulate_run(&SimConfig::new(Policy::Dar, 10, 100.0).with_capacity(1)).is_err());
    }

    #[test]
    fn replications_use_consecutive_seeds() {
        let cfg = quick(Policy::Taxi, 150).with_replications(3);
        let reps = simulate_replications(&cfg).unwrap();
        assert_eq!(reps.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![7, 8, 9]);
        assert_eq!(reps[1], simulate_run(&cfg.clone().with_seed(8)).unwrap());
        let s = summarize(&reps);
        assert!(s.std_error > 0.0 && s.all_feasible);
    }
}
