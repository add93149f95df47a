//! Steady states of the workload network, performance curves and critical
//! fleet sizes.
//!
//! Conditioning on the choice-set size `n` turns the flow-balance equations into
//! a linear system in the vehicle counts. The solver assembles the balance rows
//! of all enabled nodes but one (the dropped row is redundant), appends the
//! policy's conditioning row and solves directly. Sweeping `n` then traces the
//! parametric `{f_t; m}` curve.

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, ModelError, Result};
use crate::network::{build_network, LinkKind, StateVector, TransitionNetwork};
use crate::optimize::{bisect, grid_then_golden, log_space};
use crate::policy::{link_rate, rate_vector, Policy};
use crate::units::Scenario;

/// Default conditioning grid: 200 points log-spaced on `[1e-2, 1e4]`.
pub const DEFAULT_N_MIN: f64 = 1e-2;
pub const DEFAULT_N_MAX: f64 = 1e4;
pub const DEFAULT_POINTS: usize = 200;

pub fn default_grid() -> Vec<f64> {
    log_space(DEFAULT_N_MIN, DEFAULT_N_MAX, DEFAULT_POINTS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Efficient,
    Inefficient,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Efficient => "efficient",
            Branch::Inefficient => "inefficient",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub n: f64,
    pub state: StateVector,
    pub m: f64,
    pub f_t: f64,
    /// Idle fraction, taxi only.
    pub f_i: Option<f64>,
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceCurve {
    pub policy: Policy,
    pub pi: f64,
    pub k: f64,
    pub c: usize,
    /// Solved points in ascending `n`.
    pub points: Vec<OperatingPoint>,
    /// Grid values whose solve failed, with the reason.
    pub failures: Vec<(f64, ModelError)>,
    pub critical: CriticalFleet,
    /// Dial-a-ride fleet bound for a waiting buffer of at least two callers.
    pub m_hat: Option<f64>,
}

impl PerformanceCurve {
    pub fn scenario(&self) -> Scenario {
        Scenario { pi: self.pi, k: self.k, c: self.c, policy: self.policy, raw: None }
    }

    pub fn efficient(&self) -> impl Iterator<Item = &OperatingPoint> {
        self.points.iter().filter(|p| p.branch == Branch::Efficient)
    }

    /// Short label such as `taxi` or `dar_c5`.
    pub fn label(&self) -> String {
        mode_label(self.policy, self.c)
    }
}

pub fn mode_label(policy: Policy, c: usize) -> String {
    match policy {
        Policy::Dar => format!("dar_c{c}"),
        p => p.name().to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalFleet {
    pub m_c: f64,
    /// Choice-set size at the minimum; `None` when the bound is not attained.
    pub n: Option<f64>,
    /// False for dial-a-ride, whose bound needs an infinite waiting buffer.
    pub attained: bool,
}

/// Solves the conservation system for `scenario` at choice-set size `n`.
pub fn solve_conditioned(scenario: &Scenario, n: f64) -> Result<StateVector> {
    let net = build_network(scenario.c, scenario.policy)?;
    solve_on(&net, scenario, n)
}

pub(crate) fn solve_on(net: &TransitionNetwork, scenario: &Scenario, n: f64) -> Result<StateVector> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(domain(format!("conditioning variable must be positive, got {n}")));
    }
    let c = scenario.c;
    let on = net.enabled_nodes();
    let active: Vec<usize> = (0..net.nodes().len()).filter(|&v| on[v]).collect();
    let local = |v: usize| active.iter().position(|&a| a == v);
    let size = active.len();

    // balance rows: inflow - outflow = 0, rate = coef * x_from + constant
    let mut a = DMatrix::<f64>::zeros(size, size);
    let mut b = DVector::<f64>::zeros(size);
    for kind in LinkKind::ALL {
        for link in net.links(kind).iter().filter(|l| l.enabled) {
            let law = link_rate(scenario, kind, net.node(link.from), n)?;
            let from = local(link.from).unwrap();
            let to = local(link.to).unwrap();
            a[(to, from)] += law.coef;
            a[(from, from)] -= law.coef;
            b[to] -= law.constant;
            b[from] += law.constant;
        }
    }
    // the last balance row is redundant; it becomes the conditioning row
    let cond = size - 1;
    a.row_mut(cond).fill(0.0);
    b[cond] = 0.0;
    match scenario.policy {
        Policy::Dar => {
            let idle = local(net.index_of(c - 1, 0).unwrap()).unwrap();
            a[(cond, idle)] = 1.0;
        }
        policy => {
            for (pos, &v) in active.iter().enumerate() {
                let node = net.node(v);
                if policy.is_available(node.i, node.j, c) {
                    a[(cond, pos)] = 1.0;
                }
            }
            b[cond] = n;
        }
    }

    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| ModelError::Singular(format!("{} with c = {c}", scenario.policy)))?;
    let scale = x.iter().fold(n.abs(), |acc, v| acc.max(v.abs()));
    let mut values = vec![0.0; net.nodes().len()];
    for (pos, &v) in active.iter().enumerate() {
        let xv = x[pos];
        if !xv.is_finite() {
            return Err(ModelError::Singular(format!("{} with c = {c}", scenario.policy)));
        }
        if xv < -1e-12 * scale {
            return Err(ModelError::Infeasible(format!(
                "negative vehicle count {xv} at {} for n = {n}",
                net.node(v)
            )));
        }
        // only round-off below zero gets here
        values[v] = xv.max(0.0);
    }
    Ok(StateVector::from_values(c, values))
}

/// Explicit steady states for taxi, dial-a-ride and shared-b.
pub fn closed_form_state(scenario: &Scenario, n: f64) -> Result<StateVector> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(domain(format!("conditioning variable must be positive, got {n}")));
    }
    let Scenario { pi, k, c, policy, .. } = *scenario;
    let kp = k * pi;
    let mut s = StateVector::zeros(c);
    match policy {
        Policy::Taxi => {
            s.set(0, 0, n);
            s.set(0, 1, kp / n.sqrt());
            s.set(1, 0, kp);
        }
        Policy::Dar => {
            s.set(c - 1, 0, 0.0);
            s.set(c - 1, 1, kp / n.sqrt());
            s.set(c, 0, kp / (c as f64).sqrt());
        }
        Policy::SharedB => {
            let n15 = n.powf(1.5);
            let den = 2.0 * kp + n15;
            let r2 = std::f64::consts::SQRT_2;
            s.set(0, 0, n * (kp + n15) / den);
            s.set(0, 1, kp * n / den);
            let pending = kp * kp / (2.0 * kp * n.sqrt() + n * n);
            s.set(0, 2, pending);
            s.set(1, 1, pending);
            s.set(1, 0, kp * (kp + n15) / den);
            s.set(2, 0, kp * kp / (2.0 * r2 * kp + r2 * n15));
        }
        Policy::SharedA => {
            return Err(ModelError::Unsupported(
                "no closed form for shared_a; use solve_conditioned".into(),
            ))
        }
    }
    Ok(s)
}

/// Fleet size: the total vehicle count.
pub fn fleet_size(state: &StateVector) -> f64 {
    state.total()
}

/// Door-to-door time over direct drive time `k`.
///
/// By Little's formula the mean time in system is the number of passengers in
/// the system over `pi`: everyone onboard or assigned, `sum (i + j) n_ij`, plus
/// dial-a-ride's `n` callers still waiting to be assigned.
pub fn travel_time_ratio(scenario: &Scenario, state: &StateVector, n: f64) -> f64 {
    let engaged: f64 = state.iter().map(|(node, v)| (node.i + node.j) as f64 * v).sum();
    let waiting = if scenario.policy == Policy::Dar { n } else { 0.0 };
    (waiting + engaged) / (scenario.k * scenario.pi)
}

/// Share of the fleet idling, `n_00 / m`.
pub fn idle_fraction(state: &StateVector, m: f64) -> f64 {
    if m > 0.0 {
        state.get(0, 0) / m
    } else {
        0.0
    }
}

/// Largest absolute node imbalance of `state` under the policy's rate laws.
pub fn conservation_residual(scenario: &Scenario, state: &StateVector, n: f64) -> Result<f64> {
    let net = build_network(scenario.c, scenario.policy)?;
    let flows = rate_vector(&net, scenario, state, n)?;
    Ok(flows.node_balance(&net).iter().fold(0.0, |acc, r| acc.max(r.abs())))
}

fn operating_point(net: &TransitionNetwork, scenario: &Scenario, n: f64) -> Result<OperatingPoint> {
    let state = solve_on(net, scenario, n)?;
    let m = fleet_size(&state);
    let f_t = travel_time_ratio(scenario, &state, n);
    let f_i = (scenario.policy == Policy::Taxi).then(|| idle_fraction(&state, m));
    Ok(OperatingPoint { n, state, m, f_t, f_i, branch: Branch::Efficient })
}

/// Traces the parametric curve over `n_grid`.
pub fn performance_curve(scenario: &Scenario, n_grid: &[f64]) -> Result<PerformanceCurve> {
    scenario.validate()?;
    if n_grid.is_empty() || n_grid[0] <= 0.0 || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("n grid must be positive and strictly increasing"));
    }
    let net = build_network(scenario.c, scenario.policy)?;
    let mut points = Vec::with_capacity(n_grid.len());
    let mut failures = Vec::new();
    for &n in n_grid {
        match operating_point(&net, scenario, n) {
            Ok(p) => points.push(p),
            Err(e) => failures.push((n, e)),
        }
    }
    classify_branches(&mut points);
    let critical = critical_fleet(scenario)?;
    let m_hat = (scenario.policy == Policy::Dar).then(|| dar_fleet_bound(scenario, 2.0));
    Ok(PerformanceCurve {
        policy: scenario.policy,
        pi: scenario.pi,
        k: scenario.k,
        c: scenario.c,
        points,
        failures,
        critical,
        m_hat,
    })
}

/// Labels a point inefficient when another point has no larger `m` and no
/// larger `f_t`, and is strictly better in one. Equal points stay efficient.
pub fn classify_branches(points: &mut [OperatingPoint]) {
    let coords: Vec<(f64, f64)> = points.iter().map(|p| (p.m, p.f_t)).collect();
    for (idx, p) in points.iter_mut().enumerate() {
        let dominated = coords.iter().enumerate().any(|(other, &(m, f))| {
            other != idx && m <= p.m && f <= p.f_t && (m < p.m || f < p.f_t)
        });
        p.branch = if dominated { Branch::Inefficient } else { Branch::Efficient };
    }
}

/// Dial-a-ride fleet at which the waiting buffer is `n_min`:
/// `k pi n_min^{-1/2} + k pi c^{-1/2}`.
pub fn dar_fleet_bound(scenario: &Scenario, n_min: f64) -> f64 {
    let kp = scenario.k * scenario.pi;
    kp / n_min.sqrt() + kp / (scenario.c as f64).sqrt()
}

/// Choice-set size minimizing dial-a-ride's `f_t`: `(k pi c / 2)^{2/3}`.
pub fn dar_best_time_n(scenario: &Scenario) -> f64 {
    (scenario.k * scenario.pi * scenario.c as f64 / 2.0).powf(2.0 / 3.0)
}

/// Closed-form taxi critical fleet, `3 (k pi / 2)^{2/3} + k pi`.
pub fn taxi_critical_closed_form(pi: f64, k: f64) -> f64 {
    3.0 * (k * pi / 2.0).powf(2.0 / 3.0) + k * pi
}

/// Numeric minimum of `m(n)` over `n > 0` for taxi and shared policies.
///
/// Scans a log grid, refines by golden section in `ln n` and widens the grid
/// when the minimum sits on its edge.
pub fn minimize_fleet(scenario: &Scenario) -> Result<CriticalFleet> {
    let net = build_network(scenario.c, scenario.policy)?;
    minimize_fleet_with(scenario, |n| solve_on(&net, scenario, n).map(|s| fleet_size(&s)))
}

/// Same search over an arbitrary `m(n)`, e.g. a closed form.
pub fn minimize_fleet_with(
    scenario: &Scenario,
    fleet: impl Fn(f64) -> Result<f64>,
) -> Result<CriticalFleet> {
    if scenario.policy == Policy::Dar {
        return Err(ModelError::Unsupported(
            "dial-a-ride fleet decreases without bound in n; use critical_fleet".into(),
        ));
    }
    let (mut lo, mut hi) = (DEFAULT_N_MIN.ln(), DEFAULT_N_MAX.ln());
    for _ in 0..4 {
        let grid: Vec<f64> = log_space(lo.exp(), hi.exp(), DEFAULT_POINTS)
            .into_iter()
            .map(f64::ln)
            .collect();
        let objective = |ln_n: f64| fleet(ln_n.exp()).unwrap_or(f64::INFINITY);
        let min = grid_then_golden(objective, &grid, 1e-10)
            .ok_or_else(|| ModelError::Search("fleet size undefined on the whole grid".into()))?;
        if !min.at_boundary {
            let n = min.x.exp();
            return Ok(CriticalFleet { m_c: min.fx, n: Some(n), attained: true });
        }
        lo -= 4.0 * std::f64::consts::LN_10;
        hi += 4.0 * std::f64::consts::LN_10;
    }
    Err(ModelError::Search(format!(
        "fleet minimum for {} stays on the grid boundary",
        scenario.policy
    )))
}

/// Smallest fleet that sustains a steady state.
pub fn critical_fleet(scenario: &Scenario) -> Result<CriticalFleet> {
    scenario.validate()?;
    match scenario.policy {
        Policy::Taxi => Ok(CriticalFleet {
            m_c: taxi_critical_closed_form(scenario.pi, scenario.k),
            n: Some((scenario.k * scenario.pi / 2.0).powf(2.0 / 3.0)),
            attained: true,
        }),
        Policy::Dar => Ok(CriticalFleet {
            m_c: scenario.k * scenario.pi / (scenario.c as f64).sqrt(),
            n: None,
            attained: false,
        }),
        Policy::SharedA | Policy::SharedB => minimize_fleet(scenario),
    }
}

/// Operating point on the efficient branch with fleet size `m`.
pub fn point_at_fleet(scenario: &Scenario, m: f64) -> Result<OperatingPoint> {
    let net = build_network(scenario.c, scenario.policy)?;
    let fleet_at = |n: f64| solve_on(&net, scenario, n).map(|s| fleet_size(&s)).unwrap_or(f64::NAN);
    let critical = critical_fleet(scenario)?;
    let n = match scenario.policy {
        Policy::Dar => {
            // efficient branch: n from the f_t minimizer upwards, m decreasing
            let n_lo = dar_best_time_n(scenario);
            let m_top = fleet_at(n_lo);
            if m <= critical.m_c || m > m_top {
                return Err(ModelError::Infeasible(format!(
                    "fleet {m} outside the efficient range ({}, {m_top}]",
                    critical.m_c
                )));
            }
            let mut n_hi = n_lo * 10.0;
            while fleet_at(n_hi) > m {
                n_hi *= 10.0;
            }
            bisect(|ln| fleet_at(ln.exp()) - m, n_lo.ln(), n_hi.ln(), 1e-13).map(f64::exp)
        }
        _ => {
            let n_lo = critical.n.unwrap();
            if m < critical.m_c {
                return Err(ModelError::Infeasible(format!(
                    "fleet {m} below the critical fleet {}",
                    critical.m_c
                )));
            }
            let mut n_hi = n_lo.max(1.0) * 10.0;
            while fleet_at(n_hi) < m {
                n_hi *= 10.0;
            }
            bisect(|ln| fleet_at(ln.exp()) - m, n_lo.ln(), n_hi.ln(), 1e-13).map(f64::exp)
        }
    }
    .ok_or_else(|| ModelError::Search(format!("no efficient operating point at m = {m}")))?;
    operating_point(&net, scenario, n)
}
