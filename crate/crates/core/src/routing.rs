//! Minimum-delay route search and the reference schemes it is compared to.
//!
//! [`shortest_path`] is a label-setting best-first search over a
//! [`WeightedDigraph`]. A running bound on the best destination label lets
//! the search discard candidates that can no longer win. Edge weights depend
//! on the query: an edge into the destination does not pay the DF delay.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{self, EcefPoint, EARTH_RADIUS_M};
use crate::graph::{NodeId, WeightedDigraph};
use crate::link::{self, LinkParams, Node, NodeKind, RadioProfile};

/// Largest graph [`brute_force_shortest`] agrees to enumerate.
pub const BRUTE_FORCE_MAX_NODES: usize = 12;

/// A simple path from source to destination with its delay breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub hops: Vec<NodeId>,
    /// Delay charged on each edge, seconds; `hops.len() - 1` entries.
    pub per_hop_delay: Vec<f64>,
    pub total_delay: f64,
}

impl Route {
    /// Prices `hops` against `g`. `None` if some consecutive pair is not an edge.
    pub fn from_hops(g: &WeightedDigraph, hops: Vec<NodeId>) -> Option<Route> {
        let dst = *hops.last()?;
        let mut per_hop_delay = Vec::with_capacity(hops.len().saturating_sub(1));
        let mut total_delay = 0.0;
        for w in hops.windows(2) {
            let cost = g.edge(w[0], w[1])?.cost(dst);
            total_delay += cost;
            per_hop_delay.push(cost);
        }
        Some(Route { hops, per_hop_delay, total_delay })
    }

    /// Number of edges.
    pub fn hop_count(&self) -> usize {
        self.hops.len().saturating_sub(1)
    }

    /// Hop ids joined by commas, e.g. `BS,AC7,TARGET`.
    pub fn hop_ids(&self, g: &WeightedDigraph) -> String {
        self.hops.iter().map(|&v| g.node(v).id.as_str()).collect::<Vec<_>>().join(",")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Discard candidates worse than the best destination label found so far.
    pub prune: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { prune: true }
    }
}

/// Operation counters of one search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub pushes: usize,
    pub pops: usize,
    pub stale_pops: usize,
    pub relaxations: usize,
    pub pruned: usize,
}

impl SearchStats {
    pub fn operations(&self) -> usize {
        self.pushes + self.pops + self.relaxations
    }
}

/// Labels, predecessors, frontier and bound of a running search.
#[derive(Debug)]
pub struct SearchState {
    labels: Vec<f64>,
    prev: Vec<Option<NodeId>>,
    frontier: BinaryHeap<Reverse<(OrderedFloat<f64>, NodeId)>>,
    bound: f64,
    stats: SearchStats,
}

impl SearchState {
    fn new(n: usize, source: NodeId) -> Self {
        let mut state = Self {
            labels: vec![f64::INFINITY; n],
            prev: vec![None; n],
            frontier: BinaryHeap::new(),
            bound: f64::INFINITY,
            stats: SearchStats::default(),
        };
        state.labels[source.0] = 0.0;
        state.push(0.0, source);
        state
    }

    fn push(&mut self, label: f64, v: NodeId) {
        self.stats.pushes += 1;
        self.frontier.push(Reverse((OrderedFloat(label), v)));
    }

    /// Smallest label first, ties to the smaller node id.
    fn pop(&mut self) -> Option<(f64, NodeId)> {
        let Reverse((label, v)) = self.frontier.pop()?;
        self.stats.pops += 1;
        Some((label.0, v))
    }

    fn label(&self, v: NodeId) -> f64 {
        self.labels[v.0]
    }

    fn route_to(&self, g: &WeightedDigraph, dst: NodeId) -> Option<Route> {
        if !self.labels[dst.0].is_finite() {
            return None;
        }
        let mut hops = vec![dst];
        let mut cur = dst;
        while let Some(p) = self.prev[cur.0] {
            hops.push(p);
            cur = p;
        }
        hops.reverse();
        let route = Route::from_hops(g, hops)?;
        debug_assert_eq!(route.total_delay, self.labels[dst.0]);
        Some(route)
    }
}

fn check_query(g: &WeightedDigraph, s: NodeId, d: NodeId) -> Result<()> {
    for v in [s, d] {
        if !g.contains(v) {
            return Err(Error::UnknownNode(v.to_string()));
        }
    }
    if s == d {
        return Err(Error::InvalidArgument(format!("source and destination are both {}", g.node(s).id)));
    }
    Ok(())
}

/// Minimum-total-delay route from `s` to `d`; `Ok(None)` when `d` is unreachable.
pub fn shortest_path(g: &WeightedDigraph, s: NodeId, d: NodeId) -> Result<Option<Route>> {
    shortest_path_with(g, s, d, SearchOptions::default()).map(|(route, _)| route)
}

pub fn shortest_path_with(
    g: &WeightedDigraph,
    s: NodeId,
    d: NodeId,
    opts: SearchOptions,
) -> Result<(Option<Route>, SearchStats)> {
    check_query(g, s, d)?;
    let mut st = SearchState::new(g.len(), s);

    while let Some((psi_u, u)) = st.pop() {
        if psi_u > st.label(u) {
            st.stats.stale_pops += 1;
            continue;
        }
        if opts.prune && psi_u > st.bound {
            st.stats.pruned += 1;
            continue;
        }
        if u == d {
            st.bound = st.bound.min(psi_u);
            // a route never leaves its destination
            continue;
        }
        for e in g.neighbors(u)? {
            st.stats.relaxations += 1;
            let candidate = psi_u + e.cost(d);
            if opts.prune && candidate > st.bound {
                st.stats.pruned += 1;
                continue;
            }
            if candidate < st.label(e.to) {
                st.labels[e.to.0] = candidate;
                st.prev[e.to.0] = Some(u);
                st.push(candidate, e.to);
            }
        }
    }

    let route = st.route_to(g, d);
    Ok((route, st.stats))
}

/// Exhaustive enumeration of simple `s → d` paths; ties go to the
/// lexicographically smallest hop sequence.
pub fn brute_force_shortest(g: &WeightedDigraph, s: NodeId, d: NodeId) -> Result<Option<Route>> {
    if g.len() > BRUTE_FORCE_MAX_NODES {
        return Err(Error::TooLarge { nodes: g.len(), limit: BRUTE_FORCE_MAX_NODES });
    }
    check_query(g, s, d)?;

    struct Walk<'a> {
        g: &'a WeightedDigraph,
        dst: NodeId,
        visited: Vec<bool>,
        path: Vec<NodeId>,
        best: Option<(f64, Vec<NodeId>)>,
    }

    impl Walk<'_> {
        fn extend(&mut self, cost: f64) {
            let u = *self.path.last().expect("path starts at the source");
            if u == self.dst {
                let better = match &self.best {
                    None => true,
                    Some((c, hops)) => cost < *c || (cost == *c && self.path < *hops),
                };
                if better {
                    self.best = Some((cost, self.path.clone()));
                }
                return;
            }
            for e in self.g.neighbors(u).expect("node ids come from the graph") {
                if self.visited[e.to.0] {
                    continue;
                }
                self.visited[e.to.0] = true;
                self.path.push(e.to);
                self.extend(cost + e.cost(self.dst));
                self.path.pop();
                self.visited[e.to.0] = false;
            }
        }
    }

    let mut walk = Walk { g, dst: d, visited: vec![false; g.len()], path: vec![s], best: None };
    walk.visited[s.0] = true;
    walk.extend(0.0);
    Ok(walk.best.and_then(|(_, hops)| Route::from_hops(g, hops)))
}

/// The route property a [`Violation`] breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintClass {
    /// Each selected hop must be a feasible (SNR and line-of-sight) link.
    LinkFeasibility,
    /// Leaves the source once, enters the destination once, passes through
    /// every other node at most once.
    FlowConservation,
    /// At most one selected out-edge per node, none at the destination.
    OutDegree,
    /// Recorded delays must match the edge weights.
    Objective,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    NotAnEdge { from: NodeId, to: NodeId },
    WrongSource { found: NodeId },
    WrongDestination { found: NodeId },
    Unbalanced { node: NodeId, net_outflow: i64 },
    RepeatedNode { node: NodeId },
    OutDegree { node: NodeId, out_edges: usize },
    LeavesDestination,
    DelayMismatch { hop: usize, recorded: f64, expected: f64 },
    TotalMismatch { recorded: f64, expected: f64 },
}

impl Violation {
    pub fn class(&self) -> ConstraintClass {
        match self {
            Violation::NotAnEdge { .. } => ConstraintClass::LinkFeasibility,
            Violation::Empty
            | Violation::WrongSource { .. }
            | Violation::WrongDestination { .. }
            | Violation::Unbalanced { .. }
            | Violation::RepeatedNode { .. } => ConstraintClass::FlowConservation,
            Violation::OutDegree { .. } | Violation::LeavesDestination => ConstraintClass::OutDegree,
            Violation::DelayMismatch { .. } | Violation::TotalMismatch { .. } => ConstraintClass::Objective,
        }
    }
}

/// Checks `r` as an `s → d` route of `g`. An empty list means valid.
pub fn validate_route(r: &Route, g: &WeightedDigraph, s: NodeId, d: NodeId) -> Vec<Violation> {
    let mut out = Vec::new();
    let (Some(&first), Some(&last)) = (r.hops.first(), r.hops.last()) else {
        out.push(Violation::Empty);
        return out;
    };
    if r.hops.iter().any(|&v| !g.contains(v)) {
        out.push(Violation::Empty);
        return out;
    }
    if first != s {
        out.push(Violation::WrongSource { found: first });
    }
    if last != d {
        out.push(Violation::WrongDestination { found: last });
    }

    let n = g.len();
    let mut outgoing = vec![0usize; n];
    let mut incoming = vec![0usize; n];
    let mut seen = vec![false; n];
    for &v in &r.hops {
        if std::mem::replace(&mut seen[v.0], true) {
            out.push(Violation::RepeatedNode { node: v });
        }
    }
    for (k, w) in r.hops.windows(2).enumerate() {
        let (from, to) = (w[0], w[1]);
        outgoing[from.0] += 1;
        incoming[to.0] += 1;
        match g.edge(from, to) {
            None => out.push(Violation::NotAnEdge { from, to }),
            Some(e) => {
                let expected = e.cost(d);
                match r.per_hop_delay.get(k) {
                    Some(&recorded) if recorded == expected => {}
                    recorded => out.push(Violation::DelayMismatch {
                        hop: k,
                        recorded: recorded.copied().unwrap_or(f64::NAN),
                        expected,
                    }),
                }
            }
        }
    }

    for v in g.node_ids() {
        let net = outgoing[v.0] as i64 - incoming[v.0] as i64;
        let required = if v == s {
            1
        } else if v == d {
            -1
        } else {
            0
        };
        if net != required {
            out.push(Violation::Unbalanced { node: v, net_outflow: net });
        }
        if v == d {
            if outgoing[v.0] > 0 {
                out.push(Violation::LeavesDestination);
            }
        } else if outgoing[v.0] > 1 {
            out.push(Violation::OutDegree { node: v, out_edges: outgoing[v.0] });
        }
    }

    if r.per_hop_delay.len() != r.hop_count() {
        out.push(Violation::DelayMismatch {
            hop: r.per_hop_delay.len(),
            recorded: f64::NAN,
            expected: f64::NAN,
        });
    }
    let sum: f64 = r.per_hop_delay.iter().sum();
    if sum != r.total_delay {
        out.push(Violation::TotalMismatch { recorded: r.total_delay, expected: sum });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Search over the actual digraph.
    Proposed,
    /// Ideal air-to-air relay chain along the great circle; delay lower bound.
    IdealRelayChain,
    /// Ground → GEO → aircraft.
    SatelliteOnly,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Proposed, Scheme::IdealRelayChain, Scheme::SatelliteOnly];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::IdealRelayChain => "ideal_relay_chain",
            Scheme::SatelliteOnly => "satellite_only",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeResult {
    pub scheme: Scheme,
    pub delay: f64,
    pub hop_count: usize,
}

/// End-to-end delay of a fixed chain of links as a function of file size:
/// `intercept + slope · L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineDelay {
    /// Propagation plus DF delays, seconds.
    pub intercept: f64,
    /// Σ 1/rate over the chain, seconds per bit.
    pub slope: f64,
    pub hop_count: usize,
}

impl AffineDelay {
    pub fn at(&self, bits: f64) -> f64 {
        self.intercept + self.slope * bits
    }

    /// Prices the chain `nodes[0] → … → nodes[last]`, the last node being the target.
    pub fn of_chain(nodes: &[Node], p: &LinkParams) -> Result<AffineDelay> {
        let mut intercept = 0.0;
        let mut slope = 0.0;
        let hops = nodes.len().saturating_sub(1);
        for (k, w) in nodes.windows(2).enumerate() {
            let d = geo::chord_distance(w[0].position, w[1].position);
            let snr = link::snr(&w[0], &w[1], p)?;
            let rate = link::capacity(snr, p);
            if !(rate > 0.0) {
                return Err(Error::InfeasibleLink(format!("{} → {}", w[0].id, w[1].id)));
            }
            intercept += link::hop_delay(link::propagation_delay(d), p.df_delay, k + 1 == hops);
            slope += 1.0 / rate;
        }
        Ok(AffineDelay { intercept, slope, hop_count: hops })
    }
}

/// Relay aircraft placed along the great circle from `src` to `dst`.
#[derive(Debug, Clone)]
pub struct RelayChain {
    /// `src`, the relays, then `dst`.
    pub nodes: Vec<Node>,
    /// Fewest edges the geometry allows.
    pub min_hops: usize,
}

impl RelayChain {
    pub fn hop_count(&self) -> usize {
        self.nodes.len() - 1
    }
}

struct GreatCircle {
    from: [f64; 3],
    to: [f64; 3],
    /// Central angle, radians.
    angle: f64,
}

impl GreatCircle {
    fn new(a: EcefPoint, b: EcefPoint) -> Result<Self> {
        let unit = |p: EcefPoint| {
            let n = p.norm();
            [p.x / n, p.y / n, p.z / n]
        };
        let (u, v) = (unit(a), unit(b));
        let cross = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
        let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
        let cos = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        let angle = sin.atan2(cos);
        if sin < 1e-12 && cos < 0.0 {
            return Err(Error::domain("antipodal endpoints do not define a great circle"));
        }
        Ok(Self { from: u, to: v, angle })
    }

    fn point(&self, angle: f64, radius: f64) -> EcefPoint {
        if self.angle == 0.0 {
            let u = self.from;
            return EcefPoint::new(radius * u[0], radius * u[1], radius * u[2]);
        }
        let s = self.angle.sin();
        let (a, b) = ((self.angle - angle).sin() / s, angle.sin() / s);
        let c = |i: usize| radius * (a * self.from[i] + b * self.to[i]);
        EcefPoint::new(c(0), c(1), c(2))
    }
}

/// Places ideal relays between `src` and `dst` at the relay profile's height.
///
/// The fewest hops come from greedy maximal advance: each hop is stretched to
/// the pairwise line-of-sight limit. With `hops = Some(n)` the chain has
/// exactly `n` edges (`n` must not be below the minimum): the first relay
/// sits at the source's visibility limit and the rest are spread evenly.
pub fn ideal_relay_chain(
    src: &Node,
    dst: &Node,
    relay: &RadioProfile,
    hops: Option<usize>,
) -> Result<RelayChain> {
    let circle = GreatCircle::new(src.position, dst.position)?;
    let relay_r = EARTH_RADIUS_M + relay.height;
    let make_relay = |k: usize, angle: f64| {
        Node::with_profile(
            format!("relay{k}"),
            NodeKind::Aircraft,
            circle.point(angle, relay_r),
            relay.height,
            relay,
        )
    };

    // farthest angle reachable from `from`, or None if the destination itself is
    let advance = |from: &Node, from_angle: f64| -> Option<f64> {
        if geo::is_visible(from, dst) {
            return None;
        }
        let probe = make_relay(0, from_angle);
        let reach = |a: f64| {
            let candidate = Node { position: circle.point(a, relay_r), ..probe.clone() };
            geo::is_visible(from, &candidate)
        };
        let (mut lo, mut hi) = (from_angle, circle.angle);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if reach(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    };

    let mut greedy = vec![src.clone()];
    let mut angle = 0.0;
    while let Some(next) = advance(greedy.last().unwrap(), angle) {
        if next <= angle + 1e-12 {
            return Err(Error::InfeasibleLink(format!(
                "no relay position advances the chain from {} towards {}",
                src.id, dst.id
            )));
        }
        angle = next;
        greedy.push(make_relay(greedy.len(), angle));
    }
    greedy.push(dst.clone());
    let min_hops = greedy.len() - 1;

    let Some(n) = hops else {
        return Ok(RelayChain { nodes: greedy, min_hops });
    };
    if n < min_hops {
        return Err(Error::InvalidArgument(format!(
            "a {n}-hop chain cannot span {} → {}; at least {min_hops} hops are needed",
            src.id, dst.id
        )));
    }
    if n == 1 {
        return Ok(RelayChain { nodes: vec![src.clone(), dst.clone()], min_hops });
    }
    let first = match advance(src, 0.0) {
        Some(a) => a,
        None => circle.angle / n as f64,
    };
    let mut nodes = vec![src.clone(), make_relay(1, first)];
    let step = (circle.angle - first) / (n - 1) as f64;
    for k in 1..n - 1 {
        nodes.push(make_relay(k + 1, first + step * k as f64));
    }
    nodes.push(dst.clone());
    Ok(RelayChain { nodes, min_hops })
}

/// Delay of the ideal air-to-air relay chain from `src` to `dst`.
pub fn scheme_ideal_relay_chain(
    src: &Node,
    dst: &Node,
    p: &LinkParams,
    hops: Option<usize>,
) -> Result<SchemeResult> {
    ideal_relay_chain_delay(src, dst, p, hops)?.result(p)
}

/// Affine delay of the ideal relay chain; a co-located pair is a zero-hop chain.
pub fn ideal_relay_chain_delay(
    src: &Node,
    dst: &Node,
    p: &LinkParams,
    hops: Option<usize>,
) -> Result<SchemeDelay> {
    if geo::chord_distance(src.position, dst.position) == 0.0 {
        let zero = AffineDelay { intercept: 0.0, slope: 0.0, hop_count: 0 };
        let chain = vec![src.clone()];
        return Ok(SchemeDelay { scheme: Scheme::IdealRelayChain, delay: zero, chain });
    }
    let relay = RadioProfile { height: dst.height, ..RadioProfile::reference(NodeKind::Aircraft) };
    let chain = ideal_relay_chain(src, dst, &relay, hops)?;
    let delay = AffineDelay::of_chain(&chain.nodes, p)?;
    Ok(SchemeDelay { scheme: Scheme::IdealRelayChain, delay, chain: chain.nodes })
}

/// Two-hop `src → sat → dst` delay, or `None` if either link is infeasible.
pub fn scheme_satellite_only(
    src: &Node,
    sat: &Node,
    dst: &Node,
    p: &LinkParams,
) -> Result<Option<SchemeResult>> {
    satellite_only_delay(src, sat, dst, p)?.map(|d| d.result(p)).transpose()
}

pub fn satellite_only_delay(
    src: &Node,
    sat: &Node,
    dst: &Node,
    p: &LinkParams,
) -> Result<Option<SchemeDelay>> {
    for (a, b) in [(src, sat), (sat, dst)] {
        if geo::chord_distance(a.position, b.position) == 0.0
            || !geo::is_visible(a, b)
            || link::snr(a, b, p)? < p.snr_threshold
        {
            return Ok(None);
        }
    }
    let nodes = [src.clone(), sat.clone(), dst.clone()];
    match AffineDelay::of_chain(&nodes, p) {
        Ok(delay) => Ok(Some(SchemeDelay { scheme: Scheme::SatelliteOnly, delay, chain: nodes.to_vec() })),
        Err(Error::InfeasibleLink(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// A baseline scheme's delay as an affine function of file size.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeDelay {
    pub scheme: Scheme,
    pub delay: AffineDelay,
    /// Nodes the scheme relays through, source first, target last.
    pub chain: Vec<Node>,
}

impl SchemeDelay {
    /// Delay at `p.file_size`, summed hop by hop exactly as a route over
    /// the digraph would be, so equal paths give bit-identical totals.
    pub fn result(&self, p: &LinkParams) -> Result<SchemeResult> {
        let hops = self.chain.len().saturating_sub(1);
        let mut delay = 0.0;
        for (k, w) in self.chain.windows(2).enumerate() {
            delay += link::link_delay(&w[0], &w[1], p, k + 1 == hops)?;
        }
        Ok(SchemeResult { scheme: self.scheme, delay, hop_count: hops })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossover {
    /// Break-even file size in bits.
    At(f64),
    /// The delay lines never meet at a positive file size.
    None,
}

/// File size at which two schemes' delays coincide, found by bisection.
pub fn crossover_file_size(a: &AffineDelay, b: &AffineDelay) -> Crossover {
    let diff = |bits: f64| a.at(bits) - b.at(bits);
    if a.slope == b.slope {
        return Crossover::None;
    }
    let at_zero = diff(0.0);
    if at_zero == 0.0 {
        return Crossover::At(0.0);
    }
    let mut hi = 1.0;
    while diff(hi).signum() == at_zero.signum() {
        hi *= 2.0;
        if !hi.is_finite() || hi > 1e300 {
            return Crossover::None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if diff(mid).signum() == at_zero.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Crossover::At(0.5 * (lo + hi))
}
