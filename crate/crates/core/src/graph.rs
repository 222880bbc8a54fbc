//! Feasibility-pruned weighted digraph over a node set.
//!
//! An ordered pair `(i, j)` becomes an edge iff the SNR at `j` reaches the
//! threshold and `j` is within line of sight of `i`. Edge weights are kept
//! decomposed: whether the DF delay applies depends on the query's
//! destination, so it is added by the router, not here.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geo;
use crate::link::{self, LinkParams, Node};

/// Index of a node inside a [`WeightedDigraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId(pub usize);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    /// Meters.
    pub distance: f64,
    /// Linear.
    pub snr: f64,
    /// File-transfer delay, seconds.
    pub d_tr: f64,
    /// Propagation delay, seconds.
    pub d_pr: f64,
    /// `d_tr + d_pr`.
    pub base_delay: f64,
    /// Charged when `to` relays rather than receives.
    pub df_delay: f64,
}

impl Edge {
    /// Weight of this edge for a route ending at `destination`.
    #[inline]
    pub fn cost(&self, destination: NodeId) -> f64 {
        link::hop_delay(self.base_delay, self.df_delay, self.to == destination)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub pairs_examined: usize,
    pub snr_evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct WeightedDigraph {
    nodes: Vec<Node>,
    /// Out-edges per node, ascending by head.
    adjacency: Vec<Vec<Edge>>,
    index: HashMap<String, NodeId>,
    params: LinkParams,
    stats: BuildStats,
}

/// Builds the digraph of all feasible directed links among `nodes`.
///
/// Isolated nodes are kept. Co-located pairs get no edge.
pub fn build_digraph(nodes: Vec<Node>, p: &LinkParams) -> Result<WeightedDigraph> {
    if nodes.len() < 2 {
        return Err(Error::InvalidArgument(format!("a digraph needs at least 2 nodes, got {}", nodes.len())));
    }
    p.validate()?;
    let mut index = HashMap::with_capacity(nodes.len());
    for (i, n) in nodes.iter().enumerate() {
        n.validate()?;
        if index.insert(n.id.clone(), NodeId(i)).is_some() {
            return Err(Error::DuplicateNode(n.id.clone()));
        }
    }

    let mut stats = BuildStats::default();
    let mut adjacency = vec![Vec::new(); nodes.len()];
    for (i, tx) in nodes.iter().enumerate() {
        for (j, rx) in nodes.iter().enumerate() {
            if i == j {
                continue;
            }
            stats.pairs_examined += 1;
            let distance = geo::chord_distance(tx.position, rx.position);
            if distance == 0.0 {
                continue;
            }
            stats.snr_evaluations += 1;
            let budget = match link::link_budget(tx, rx, p) {
                Ok(b) => b,
                Err(Error::InfeasibleLink(_)) => continue,
                Err(e) => return Err(e),
            };
            if budget.snr >= p.snr_threshold && geo::is_visible(tx, rx) {
                adjacency[i].push(Edge {
                    from: NodeId(i),
                    to: NodeId(j),
                    distance: budget.distance,
                    snr: budget.snr,
                    d_tr: budget.d_tr,
                    d_pr: budget.d_pr,
                    base_delay: budget.base_delay(),
                    df_delay: p.df_delay,
                });
            }
        }
    }

    Ok(WeightedDigraph { nodes, adjacency, index, params: *p, stats })
}

impl WeightedDigraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, v: NodeId) -> &Node {
        &self.nodes[v.0]
    }

    pub fn params(&self) -> &LinkParams {
        &self.params
    }

    pub fn stats(&self) -> BuildStats {
        self.stats
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn lookup(&self, id: &str) -> Result<NodeId> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownNode(id.to_owned()))
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.0 < self.nodes.len()
    }

    /// Out-edges of `v`, ascending by head id.
    pub fn neighbors(&self, v: NodeId) -> Result<&[Edge]> {
        self.adjacency.get(v.0).map(Vec::as_slice).ok_or_else(|| Error::UnknownNode(v.to_string()))
    }

    pub fn edge(&self, from: NodeId, to: NodeId) -> Option<&Edge> {
        let out = self.adjacency.get(from.0)?;
        out.binary_search_by_key(&to, |e| e.to).ok().map(|i| &out[i])
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.adjacency.iter().flatten()
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.adjacency[v.0].len()
    }

    /// Writes `from_id,to_id,distance_m,snr_linear,base_delay_s`, one edge per line.
    pub fn write_edge_list<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["from_id", "to_id", "distance_m", "snr_linear", "base_delay_s"])?;
        for e in self.edges() {
            w.write_record([
                self.node(e.from).id.as_str(),
                self.node(e.to).id.as_str(),
                &e.distance.to_string(),
                &e.snr.to_string(),
                &e.base_delay.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn export_edge_list(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_edge_list(std::io::BufWriter::new(file)).map_err(|e| Error::csv(path, e))
    }
}

/// Cumulative out-degree distribution: `(k, fraction of nodes with degree < k)`
/// for `k = 0 ..= max_degree + 1`.
pub fn degree_distribution(g: &WeightedDigraph) -> Vec<(usize, f64)> {
    let n = g.len();
    if n == 0 {
        return Vec::new();
    }
    let degrees: Vec<usize> = g.node_ids().map(|v| g.out_degree(v)).collect();
    let max = degrees.iter().copied().max().unwrap_or(0);
    let mut histogram = vec![0usize; max + 1];
    for d in degrees {
        histogram[d] += 1;
    }
    let mut below = 0usize;
    let mut out = Vec::with_capacity(max + 2);
    for (k, count) in histogram.iter().enumerate() {
        out.push((k, below as f64 / n as f64));
        below += count;
    }
    out.push((max + 1, 1.0));
    out
}
