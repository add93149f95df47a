//! Single-replication event loop.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::geom::{Point, PointIndex};
use super::{PassengerRecord, SimConfig};
use crate::policy::Policy;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Stop {
    Pickup(usize),
    Dropoff(usize),
}

#[derive(Debug, Clone)]
struct Vehicle {
    /// Where the current leg started, or where the vehicle is parked.
    anchor: Point,
    depart: f64,
    target: Option<(Stop, Point)>,
    onboard: Vec<usize>,
    assigned: Vec<usize>,
    version: u64,
    /// Dial-a-ride: has this vehicle been full at least once.
    filled: bool,
}

impl Vehicle {
    fn position(&self, now: f64) -> Point {
        match self.target {
            Some((_, to)) => self.anchor.toward(to, now - self.depart),
            None => self.anchor,
        }
    }

    fn workload(&self) -> (usize, usize) {
        (self.onboard.len(), self.assigned.len())
    }
}

#[derive(Debug, Clone, Copy)]
enum EventKind {
    Arrival,
    Reach { vehicle: usize, version: u64 },
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // min-heap on (time, seq)
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.seq.cmp(&self.seq))
    }
}

/// Everything a finished run hands to the statistics pass.
pub(super) struct RunLog {
    pub passengers: Vec<PassengerRecord>,
    /// `(time, count)` after every change of the unassigned-caller count.
    pub unassigned: Vec<(f64, usize)>,
    pub end_time: f64,
    /// False when the run hit its time horizon before every sampled
    /// passenger was delivered.
    pub completed: bool,
    pub violations: u64,
}

pub(super) struct Engine<'a> {
    cfg: &'a SimConfig,
    now: f64,
    seq: u64,
    events: BinaryHeap<Event>,
    vehicles: Vec<Vehicle>,
    passengers: Vec<PassengerRecord>,
    /// Taxi and shared: callers waiting for a vehicle, first come first served.
    queue: VecDeque<usize>,
    /// Dial-a-ride: callers waiting to be picked from, nearest first.
    pool: PointIndex,
    unassigned_log: Vec<(f64, usize)>,
    arrivals: ChaCha8Rng,
    interarrival: Exp<f64>,
    delivered_in_sample: usize,
    violations: u64,
}

impl<'a> Engine<'a> {
    pub fn new(cfg: &'a SimConfig) -> Self {
        let mut arrivals = ChaCha8Rng::seed_from_u64(cfg.seed);
        arrivals.set_stream(0);
        let mut placement = ChaCha8Rng::seed_from_u64(cfg.seed);
        placement.set_stream(1);
        let vehicles = (0..cfg.m)
            .map(|_| Vehicle {
                anchor: Point::uniform(&mut placement),
                depart: 0.0,
                target: None,
                onboard: Vec::with_capacity(cfg.c),
                assigned: Vec::with_capacity(cfg.c),
                version: 0,
                filled: false,
            })
            .collect();
        let side = ((cfg.pi.max(1.0)).sqrt() as usize).clamp(4, 64);
        Self {
            cfg,
            now: 0.0,
            seq: 0,
            events: BinaryHeap::new(),
            vehicles,
            passengers: Vec::with_capacity(cfg.warmup + cfg.sample + 64),
            queue: VecDeque::new(),
            pool: PointIndex::new(side),
            unassigned_log: vec![(0.0, 0)],
            arrivals,
            interarrival: Exp::new(cfg.pi).expect("positive demand"),
            delivered_in_sample: 0,
            violations: 0,
        }
    }

    fn push(&mut self, time: f64, kind: EventKind) {
        self.seq += 1;
        self.events.push(Event { time, seq: self.seq, kind });
    }

    fn unassigned(&self) -> usize {
        match self.cfg.policy {
            Policy::Dar => self.pool.len(),
            _ => self.queue.len(),
        }
    }

    fn log_unassigned(&mut self) {
        let count = self.unassigned();
        if self.unassigned_log.last().map(|e| e.1) != Some(count) {
            self.unassigned_log.push((self.now, count));
        }
    }

    fn in_sample(&self, id: usize) -> bool {
        id >= self.cfg.warmup && id < self.cfg.warmup + self.cfg.sample
    }

    pub fn run(mut self) -> RunLog {
        let first = self.interarrival.sample(&mut self.arrivals);
        self.push(first, EventKind::Arrival);
        let mut horizon = f64::INFINITY;
        let mut completed = false;

        while let Some(ev) = self.events.pop() {
            if ev.time > horizon {
                break;
            }
            self.now = ev.time;
            match ev.kind {
                EventKind::Arrival => {
                    let id = self.passengers.len();
                    self.arrival(id);
                    if id + 1 == self.cfg.warmup + self.cfg.sample {
                        let start = self.passengers[self.cfg.warmup].call;
                        horizon = self.now + self.cfg.rule.drain_factor * (self.now - start).max(1.0);
                    }
                    let gap = self.interarrival.sample(&mut self.arrivals);
                    self.push(self.now + gap, EventKind::Arrival);
                }
                EventKind::Reach { vehicle, version } => {
                    if self.vehicles[vehicle].version != version {
                        continue;
                    }
                    self.reach(vehicle);
                }
            }
            self.log_unassigned();
            if self.delivered_in_sample == self.cfg.sample {
                completed = true;
                break;
            }
        }

        RunLog {
            passengers: self.passengers,
            unassigned: self.unassigned_log,
            end_time: self.now,
            completed,
            violations: self.violations,
        }
    }

    fn arrival(&mut self, id: usize) {
        let origin = Point::uniform(&mut self.arrivals);
        let destination = Point::uniform(&mut self.arrivals);
        self.passengers.push(PassengerRecord {
            id,
            call: self.now,
            origin,
            destination,
            assigned: None,
            picked_up: None,
            delivered: None,
        });
        match self.cfg.policy {
            Policy::Dar => {
                // a vehicle parked without a job is waiting for a caller
                let waiting = self.nearest_vehicle(origin, |v| v.target.is_none() && v.assigned.is_empty());
                match waiting {
                    Some(v) => {
                        self.assign(v, id);
                        self.plan(v);
                    }
                    None => self.pool.insert(id, origin),
                }
            }
            policy => {
                let c = self.cfg.c;
                let found = self.nearest_vehicle(origin, |v| {
                    let (i, j) = v.workload();
                    policy.is_available(i, j, c)
                });
                match found {
                    Some(v) => {
                        self.assign(v, id);
                        match self.vehicles[v].target {
                            None => self.plan(v),
                            Some((Stop::Dropoff(_), _)) => {
                                // pickups pre-empt deliveries
                                self.reanchor(v);
                                self.plan(v);
                            }
                            Some((Stop::Pickup(_), _)) => {}
                        }
                    }
                    None => self.queue.push_back(id),
                }
            }
        }
    }

    /// Nearest vehicle satisfying `eligible`, smallest id on ties.
    fn nearest_vehicle(&self, to: Point, eligible: impl Fn(&Vehicle) -> bool) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for (idx, v) in self.vehicles.iter().enumerate() {
            if !eligible(v) {
                continue;
            }
            let d = v.position(self.now).dist(to);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, idx));
            }
        }
        best.map(|(_, idx)| idx)
    }

    fn assign(&mut self, v: usize, id: usize) {
        self.passengers[id].assigned = Some(self.now);
        self.vehicles[v].assigned.push(id);
        let (i, j) = self.vehicles[v].workload();
        if i + j > self.cfg.c {
            self.violations += 1;
        }
    }

    /// Stops the vehicle's current leg at its present position.
    fn reanchor(&mut self, v: usize) {
        let now = self.now;
        let veh = &mut self.vehicles[v];
        veh.anchor = veh.position(now);
        veh.depart = now;
        veh.target = None;
        veh.version += 1;
    }

    fn nearest_of(&self, from: Point, ids: &[usize], pick: impl Fn(&PassengerRecord) -> Point) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for &id in ids {
            let d = from.dist(pick(&self.passengers[id]));
            if best.is_none_or(|(bd, bid)| d < bd || (d == bd && id < bid)) {
                best = Some((d, id));
            }
        }
        best.map(|(_, id)| id)
    }

    /// Chooses the next stop for a vehicle standing at its anchor.
    fn plan(&mut self, v: usize) {
        let here = self.vehicles[v].anchor;
        let stop = if let Some(id) = self.nearest_of(here, &self.vehicles[v].assigned, |p| p.origin) {
            Some((Stop::Pickup(id), self.passengers[id].origin))
        } else {
            let deliver_now = match self.cfg.policy {
                Policy::Dar => self.vehicles[v].onboard.len() == self.cfg.c,
                _ => true,
            };
            if deliver_now {
                self.nearest_of(here, &self.vehicles[v].onboard, |p| p.destination)
                    .map(|id| (Stop::Dropoff(id), self.passengers[id].destination))
            } else {
                None
            }
        };
        let now = self.now;
        let veh = &mut self.vehicles[v];
        veh.version += 1;
        veh.depart = now;
        veh.target = stop;
        if let Some((_, at)) = stop {
            let eta = now + here.dist(at);
            let version = veh.version;
            self.push(eta, EventKind::Reach { vehicle: v, version });
        }
    }

    fn reach(&mut self, v: usize) {
        let (stop, at) = self.vehicles[v].target.expect("reach event without target");
        let now = self.now;
        {
            let veh = &mut self.vehicles[v];
            veh.anchor = at;
            veh.depart = now;
            veh.target = None;
        }
        let c = self.cfg.c;
        match stop {
            Stop::Pickup(id) => {
                let veh = &mut self.vehicles[v];
                veh.assigned.retain(|&p| p != id);
                veh.onboard.push(id);
                self.passengers[id].picked_up = Some(now);
                if veh.onboard.len() > c {
                    self.violations += 1;
                }
                if self.cfg.policy == Policy::Dar {
                    if veh.onboard.len() == c {
                        veh.filled = true;
                    } else if veh.filled {
                        // full vehicles alternate between c - 1 and c
                        self.violations += 1;
                    }
                }
            }
            Stop::Dropoff(id) => {
                let veh = &mut self.vehicles[v];
                if !veh.assigned.is_empty() {
                    self.violations += 1;
                }
                veh.onboard.retain(|&p| p != id);
                if self.cfg.policy == Policy::Dar && veh.filled && veh.onboard.len() + 1 != c {
                    self.violations += 1;
                }
                self.passengers[id].delivered = Some(now);
                if self.in_sample(id) {
                    self.delivered_in_sample += 1;
                }
            }
        }

        match self.cfg.policy {
            Policy::Dar => {
                let veh = &self.vehicles[v];
                if veh.assigned.is_empty() && veh.onboard.len() < c {
                    if let Some((id, origin, _)) = self.pool.nearest(veh.anchor) {
                        self.pool.remove(id, origin);
                        self.assign(v, id);
                    }
                }
            }
            policy => {
                while !self.queue.is_empty() {
                    let (i, j) = self.vehicles[v].workload();
                    if !policy.is_available(i, j, c) {
                        break;
                    }
                    let id = self.queue.pop_front().unwrap();
                    self.assign(v, id);
                }
            }
        }
        self.plan(v);
    }
}
