//! The workload transition network.
//!
//! Nodes are workload levels `(i, j)` with `i + j <= c`, ordered
//! lexicographically. Links come in three families:
//!
//! * assignment `(i, j) -> (i, j + 1)`, present when `i + j < c`
//! * pickup `(i, j) -> (i + 1, j - 1)`, present when `j >= 1`
//! * delivery `(i, j) -> (i - 1, j)`, present when `i >= 1`
//!
//! A policy never deletes links from the lattice; it disables them. The same
//! network therefore serves the analytic solver and the structural checks.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};

use nalgebra::DMatrix;

use crate::error::Result;
use crate::policy::Policy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WorkloadNode {
    /// Passengers onboard.
    pub i: usize,
    /// Callers assigned for pickup.
    pub j: usize,
}

impl WorkloadNode {
    pub const fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

impl fmt::Display for WorkloadNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkKind {
    Assignment,
    Pickup,
    Delivery,
}

impl LinkKind {
    pub const ALL: [LinkKind; 3] = [LinkKind::Assignment, LinkKind::Pickup, LinkKind::Delivery];

    pub fn name(self) -> &'static str {
        match self {
            LinkKind::Assignment => "assignment",
            LinkKind::Pickup => "pickup",
            LinkKind::Delivery => "delivery",
        }
    }

    /// Target of this link type leaving `node`, if the lattice has one.
    pub fn target(self, node: WorkloadNode, c: usize) -> Option<WorkloadNode> {
        let WorkloadNode { i, j } = node;
        match self {
            LinkKind::Assignment if i + j < c => Some(WorkloadNode::new(i, j + 1)),
            LinkKind::Pickup if j >= 1 => Some(WorkloadNode::new(i + 1, j - 1)),
            LinkKind::Delivery if i >= 1 => Some(WorkloadNode::new(i - 1, j)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub kind: LinkKind,
    /// Node index of the origin level.
    pub from: usize,
    /// Node index of the destination level.
    pub to: usize,
    pub enabled: bool,
}

/// Number of workload levels for capacity `c`.
pub fn node_count(c: usize) -> usize {
    (c + 1) * (c + 2) / 2
}

/// Number of links in each family for capacity `c`.
pub fn link_count(c: usize) -> usize {
    c * (c + 1) / 2
}

/// Lexicographic position of `(i, j)` among the levels of capacity `c`.
pub fn node_index(c: usize, i: usize, j: usize) -> Option<usize> {
    if i + j > c {
        return None;
    }
    // rows i' < i hold c - i' + 1 nodes each
    let before = i * (c + 1) - i * (i.saturating_sub(1)) / 2;
    Some(before + j)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionNetwork {
    pub(crate) c: usize,
    pub(crate) policy: Policy,
    pub(crate) nodes: Vec<WorkloadNode>,
    pub(crate) assignments: Vec<Link>,
    pub(crate) pickups: Vec<Link>,
    pub(crate) deliveries: Vec<Link>,
}

/// Builds the full lattice for capacity `c` and applies `policy`'s link mask.
pub fn build_network(c: usize, policy: Policy) -> Result<TransitionNetwork> {
    policy.check_capacity(c)?;
    let nodes: Vec<WorkloadNode> = (0..=c)
        .flat_map(|i| (0..=c - i).map(move |j| WorkloadNode::new(i, j)))
        .collect();
    let family = |kind: LinkKind| -> Vec<Link> {
        nodes
            .iter()
            .enumerate()
            .filter_map(|(from, &node)| {
                let target = kind.target(node, c)?;
                Some(Link {
                    kind,
                    from,
                    to: node_index(c, target.i, target.j).expect("target inside lattice"),
                    enabled: policy.link_enabled(kind, node, c),
                })
            })
            .collect()
    };
    Ok(TransitionNetwork {
        c,
        policy,
        assignments: family(LinkKind::Assignment),
        pickups: family(LinkKind::Pickup),
        deliveries: family(LinkKind::Delivery),
        nodes,
    })
}

impl TransitionNetwork {
    pub fn capacity(&self) -> usize {
        self.c
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn nodes(&self) -> &[WorkloadNode] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> WorkloadNode {
        self.nodes[idx]
    }

    pub fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        node_index(self.c, i, j)
    }

    pub fn links(&self, kind: LinkKind) -> &[Link] {
        match kind {
            LinkKind::Assignment => &self.assignments,
            LinkKind::Pickup => &self.pickups,
            LinkKind::Delivery => &self.deliveries,
        }
    }

    pub fn all_links(&self) -> impl Iterator<Item = &Link> {
        self.assignments.iter().chain(&self.pickups).chain(&self.deliveries)
    }

    pub fn enabled_links(&self) -> impl Iterator<Item = &Link> {
        self.all_links().filter(|l| l.enabled)
    }

    /// Per-node flag: does any enabled link touch the node?
    pub fn enabled_nodes(&self) -> Vec<bool> {
        let mut on = vec![false; self.nodes.len()];
        for l in self.enabled_links() {
            on[l.from] = true;
            on[l.to] = true;
        }
        on
    }

    /// Link-by-node incidence matrix of one family: -1 at the origin, +1 at
    /// the destination. Disabled links keep their rows.
    pub fn incidence(&self, kind: LinkKind) -> DMatrix<f64> {
        let links = self.links(kind);
        let mut m = DMatrix::zeros(links.len(), self.nodes.len());
        for (row, l) in links.iter().enumerate() {
            m[(row, l.from)] -= 1.0;
            m[(row, l.to)] += 1.0;
        }
        m
    }

    /// Net inflow at every node for link flows aligned with the link lists.
    pub fn node_balance(&self, a: &[f64], p: &[f64], d: &[f64]) -> Vec<f64> {
        let mut bal = vec![0.0; self.nodes.len()];
        for (links, flows) in [(&self.assignments, a), (&self.pickups, p), (&self.deliveries, d)] {
            for (l, &q) in links.iter().zip(flows) {
                bal[l.from] -= q;
                bal[l.to] += q;
            }
        }
        bal
    }

    /// Plain-text edge list, one link per line.
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        for l in self.all_links() {
            let _ = writeln!(
                out,
                "{} {} {} {}",
                l.kind.name(),
                self.nodes[l.from],
                self.nodes[l.to],
                l.enabled
            );
        }
        out
    }

    /// Rank of the stacked incidence rows of enabled links, restricted to
    /// enabled nodes.
    pub fn conservation_rank(&self) -> usize {
        let on = self.enabled_nodes();
        let cols: Vec<usize> = (0..self.nodes.len()).filter(|&v| on[v]).collect();
        let links: Vec<&Link> = self.enabled_links().collect();
        if links.is_empty() || cols.is_empty() {
            return 0;
        }
        let mut m = DMatrix::<f64>::zeros(links.len(), cols.len());
        for (row, l) in links.iter().enumerate() {
            let from = cols.iter().position(|&v| v == l.from).unwrap();
            let to = cols.iter().position(|&v| v == l.to).unwrap();
            m[(row, from)] -= 1.0;
            m[(row, to)] += 1.0;
        }
        m.rank(1e-9)
    }

    /// True when every enabled node reaches, and is reached from, every other
    /// enabled node along enabled links.
    pub fn strongly_connected(&self) -> bool {
        let on = self.enabled_nodes();
        let Some(start) = on.iter().position(|&b| b) else {
            return false;
        };
        let reach = |forward: bool| {
            let mut seen = vec![false; self.nodes.len()];
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(v) = queue.pop_front() {
                for l in self.enabled_links() {
                    let (a, b) = if forward { (l.from, l.to) } else { (l.to, l.from) };
                    if a == v && !seen[b] {
                        seen[b] = true;
                        queue.push_back(b);
                    }
                }
            }
            seen
        };
        let fwd = reach(true);
        let bwd = reach(false);
        (0..self.nodes.len()).all(|v| !on[v] || (fwd[v] && bwd[v]))
    }

    pub fn validate(&self) -> ValidationReport {
        validate_network(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub node_count: usize,
    pub enabled_nodes: usize,
    pub conservation_rank: usize,
    /// Names of the failed checks with a short explanation.
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn failed(&self, check: &str) -> bool {
        self.violations.iter().any(|v| v.starts_with(check))
    }
}

pub fn validate_network(net: &TransitionNetwork) -> ValidationReport {
    let c = net.c;
    let mut violations = Vec::new();

    if net.nodes.len() != node_count(c) {
        violations.push(format!(
            "node_count: {} nodes, expected {}",
            net.nodes.len(),
            node_count(c)
        ));
    }
    for kind in LinkKind::ALL {
        let links = net.links(kind);
        if links.len() != link_count(c) {
            violations.push(format!(
                "link_count:{}: {} links, expected {}",
                kind.name(),
                links.len(),
                link_count(c)
            ));
        }
        for l in links {
            let ok = l.from < net.nodes.len()
                && l.to < net.nodes.len()
                && kind.target(net.nodes[l.from], c) == Some(net.nodes[l.to]);
            if !ok {
                violations.push(format!("link_rule:{}: bad link {:?}", kind.name(), l));
            }
        }
        let inc = net.incidence(kind);
        for (row, r) in inc.row_iter().enumerate() {
            let minus = r.iter().filter(|&&x| x == -1.0).count();
            let plus = r.iter().filter(|&&x| x == 1.0).count();
            let zero = r.iter().filter(|&&x| x == 0.0).count();
            if minus != 1 || plus != 1 || zero + 2 != r.len() {
                violations.push(format!("incidence_row:{}: row {row} malformed", kind.name()));
            }
        }
        if inc.column_sum().iter().sum::<f64>() != 0.0 {
            violations.push(format!("column_total:{}: entries do not cancel", kind.name()));
        }
    }

    let on = net.enabled_nodes();
    let enabled_nodes = on.iter().filter(|&&b| b).count();
    if !net.strongly_connected() {
        violations.push("strongly_connected: an enabled node lies on no directed cycle".into());
    }
    let conservation_rank = net.conservation_rank();
    if enabled_nodes == 0 || conservation_rank + 1 != enabled_nodes {
        violations.push(format!(
            "conservation_rank: rank {conservation_rank} on {enabled_nodes} enabled nodes"
        ));
    }

    ValidationReport { node_count: net.nodes.len(), enabled_nodes, conservation_rank, violations }
}

/// Vehicle counts per workload level, in lexicographic node order.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    c: usize,
    values: Vec<f64>,
}

impl StateVector {
    pub fn zeros(c: usize) -> Self {
        Self { c, values: vec![0.0; node_count(c)] }
    }

    pub fn from_fn(c: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut s = Self::zeros(c);
        for i in 0..=c {
            for j in 0..=c - i {
                s.set(i, j, f(i, j));
            }
        }
        s
    }

    pub(crate) fn from_values(c: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), node_count(c));
        Self { c, values }
    }

    pub fn capacity(&self) -> usize {
        self.c
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Count at `(i, j)`; zero outside the lattice.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        node_index(self.c, i, j).map_or(0.0, |idx| self.values[idx])
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = node_index(self.c, i, j).expect("node outside the lattice");
        self.values[idx] = v;
    }

    pub fn iter(&self) -> impl Iterator<Item = (WorkloadNode, f64)> + '_ {
        let c = self.c;
        (0..=c)
            .flat_map(move |i| (0..=c - i).map(move |j| WorkloadNode::new(i, j)))
            .zip(self.values.iter().copied())
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        assert_eq!(self.c, other.c);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn enabled_set(net: &TransitionNetwork, kind: LinkKind) -> Vec<(WorkloadNode, WorkloadNode)> {
        net.links(kind)
            .iter()
            .filter(|l| l.enabled)
            .map(|l| (net.node(l.from), net.node(l.to)))
            .collect()
    }

    fn n(i: usize, j: usize) -> WorkloadNode {
        WorkloadNode::new(i, j)
    }

    #[test]
    fn taxi_network_is_a_three_cycle() {
        let net = build_network(1, Policy::Taxi).unwrap();
        assert_eq!(net.nodes(), &[n(0, 0), n(0, 1), n(1, 0)]);
        for kind in LinkKind::ALL {
            assert_eq!(net.links(kind).len(), 1);
        }
        assert_eq!(enabled_set(&net, LinkKind::Assignment), vec![(n(0, 0), n(0, 1))]);
        assert_eq!(enabled_set(&net, LinkKind::Pickup), vec![(n(0, 1), n(1, 0))]);
        assert_eq!(enabled_set(&net, LinkKind::Delivery), vec![(n(1, 0), n(0, 0))]);
        let rep = net.validate();
        assert!(rep.passed(), "{:?}", rep.violations);
        assert_eq!((rep.conservation_rank, rep.enabled_nodes), (2, 3));
    }

    #[test]
    fn shared_b_mask() {
        let net = build_network(2, Policy::SharedB).unwrap();
        assert_eq!(net.nodes().len(), 6);
        for kind in LinkKind::ALL {
            assert_eq!(net.links(kind).len(), 3);
        }
        assert_eq!(
            enabled_set(&net, LinkKind::Delivery),
            vec![(n(1, 0), n(0, 0)), (n(2, 0), n(1, 0))]
        );
        assert_eq!(
            enabled_set(&net, LinkKind::Assignment),
            vec![(n(0, 0), n(0, 1)), (n(0, 1), n(0, 2))]
        );
        let rep = net.validate();
        assert!(rep.passed(), "{:?}", rep.violations);
        assert_eq!((rep.conservation_rank, rep.enabled_nodes), (5, 6));
    }

    #[test]
    fn shared_a_mask() {
        let net = build_network(2, Policy::SharedA).unwrap();
        assert_eq!(
            enabled_set(&net, LinkKind::Assignment),
            vec![(n(0, 0), n(0, 1)), (n(0, 1), n(0, 2)), (n(1, 0), n(1, 1))]
        );
        assert_eq!(
            enabled_set(&net, LinkKind::Pickup),
            vec![(n(0, 1), n(1, 0)), (n(0, 2), n(1, 1)), (n(1, 1), n(2, 0))]
        );
        assert_eq!(
            enabled_set(&net, LinkKind::Delivery),
            vec![(n(1, 0), n(0, 0)), (n(2, 0), n(1, 0))]
        );
        assert!(net.validate().passed());
    }

    #[test]
    fn dar_uses_three_nodes_of_the_lattice() {
        let net = build_network(5, Policy::Dar).unwrap();
        assert_eq!(net.nodes().len(), 21);
        for kind in LinkKind::ALL {
            assert_eq!(net.links(kind).len(), 15);
        }
        let on = net.enabled_nodes();
        let active: Vec<_> = (0..21).filter(|&v| on[v]).map(|v| net.node(v)).collect();
        assert_eq!(active, vec![n(4, 0), n(4, 1), n(5, 0)]);
        let rep = net.validate();
        assert!(rep.passed(), "{:?}", rep.violations);
        assert_eq!(rep.conservation_rank, 2);
    }

    #[test]
    fn deleted_pickup_link_is_reported() {
        let mut net = build_network(2, Policy::SharedB).unwrap();
        net.pickups.remove(1);
        let rep = validate_network(&net);
        assert!(!rep.passed());
        assert!(rep.failed("link_count:pickup"));
        assert!(rep.failed("strongly_connected"));
    }

    #[test]
    fn invalid_policy_capacity() {
        assert!(build_network(2, Policy::Taxi).is_err());
        assert!(build_network(3, Policy::SharedB).is_err());
        assert!(build_network(1, Policy::Dar).is_err());
    }

    #[test]
    fn edge_list_lines() {
        let net = build_network(1, Policy::Taxi).unwrap();
        assert_eq!(
            net.edge_list(),
            "assignment (0,0) (0,1) true\npickup (0,1) (1,0) true\ndelivery (1,0) (0,0) true\n"
        );
    }

    #[test]
    fn counts_for_c_up_to_eight() {
        for c in 1..=8usize {
            let policy = if c == 1 { Policy::Taxi } else { Policy::Dar };
            let net = build_network(c, policy).unwrap();
            assert_eq!(net.nodes().len(), (c + 1) * (c + 2) / 2);
            for kind in LinkKind::ALL {
                assert_eq!(net.links(kind).len(), c * (c + 1) / 2);
            }
            for (idx, node) in net.nodes().iter().enumerate() {
                assert_eq!(net.index_of(node.i, node.j), Some(idx));
            }
            assert!(net.validate().passed());
        }
    }

    #[test]
    fn every_policy_subgraph_is_cyclic() {
        for (c, p) in [(1, Policy::Taxi), (2, Policy::SharedA), (2, Policy::SharedB), (3, Policy::Dar)] {
            let net = build_network(c, p).unwrap();
            assert!(net.strongly_connected(), "{p}");
        }
    }

    proptest! {
        #[test]
        fn incidence_conserves_any_flow(c in 1usize..=8, seed in proptest::collection::vec(0.0f64..1e3, 108)) {
            let policy = if c == 1 { Policy::Taxi } else { Policy::Dar };
            let net = build_network(c, policy).unwrap();
            let m = link_count(c);
            let a = &seed[..m];
            let p = &seed[m..2 * m];
            let d = &seed[2 * m..3 * m];
            let bal = net.node_balance(a, p, d);
            let total: f64 = bal.iter().sum();
            let scale: f64 = seed[..3 * m].iter().sum::<f64>().max(1.0);
            prop_assert!(total.abs() <= 1e-12 * scale);

            // matches the matrix form aA + pP + dD
            let flows = |v: &[f64]| nalgebra::DVector::from_column_slice(v).transpose();
            let via_matrix = flows(a) * net.incidence(LinkKind::Assignment)
                + flows(p) * net.incidence(LinkKind::Pickup)
                + flows(d) * net.incidence(LinkKind::Delivery);
            for (x, y) in via_matrix.iter().zip(&bal) {
                prop_assert!((x - y).abs() <= 1e-9 * scale);
            }
        }
    }
}
