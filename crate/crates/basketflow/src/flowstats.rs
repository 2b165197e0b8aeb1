//! Flow reporting: node flow shares, community summaries, top connections,
//! and coverage subgraphs.
//!
//! A node's flow share is its relative weight (strength over twice the total
//! edge weight) as a percentage — the same quantity the map equation uses,
//! and the stationary visit rate of a random walk on an undirected network.
//! An edge's flow share is its weight over the total edge weight. Shares
//! over nodes sum to 100%, as do community internal shares.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cograph::CoGraph;
use crate::error::{Error, Result};
use crate::mapequation::{node_relative_weights, validate_partition, Partition};

/// One node's share of the network flow, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeShare {
    pub id: String,
    pub share_pct: f64,
}

/// Flow-ranked nodes with cumulative prefix sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeFlowSection {
    /// Descending by share, ties by node id.
    pub shares: Vec<NodeShare>,
    /// `cumulative[k]` is the share held by the top `k+1` nodes.
    pub cumulative: Vec<f64>,
}

/// Internal flow share of one module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityShare {
    pub module: usize,
    pub share_pct: f64,
}

/// Flow on the edges between two modules, in percent of total edge weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntermoduleFlow {
    pub module_a: usize,
    pub module_b: usize,
    pub share_pct: f64,
}

/// Community-level flow summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunitySection {
    pub internal: Vec<CommunityShare>,
    /// Symmetric pairs reported once with `module_a < module_b`, only for
    /// module pairs actually connected by an edge.
    pub intermodule: Vec<IntermoduleFlow>,
}

/// Complete flow report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    pub nodes: NodeFlowSection,
    pub communities: CommunitySection,
}

/// A node's strongest connections by edge flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionGroup {
    pub center: String,
    /// Descending by edge flow share, ties by neighbor id; at most `k`.
    pub neighbors: Vec<Connection>,
}

/// One edge out of a connection group's center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    pub id: String,
    pub flow_pct: f64,
}

/// Nodes ranked by flow share, descending, ties broken by node id.
pub fn node_flow_shares(graph: &CoGraph) -> Result<NodeFlowSection> {
    let w_alpha = node_relative_weights(graph)?;
    let mut shares: Vec<NodeShare> = w_alpha
        .iter()
        .enumerate()
        .map(|(i, &w)| NodeShare {
            id: graph.node_id(i).to_string(),
            share_pct: 100.0 * w,
        })
        .collect();
    shares.sort_by(|a, b| {
        b.share_pct
            .partial_cmp(&a.share_pct)
            .expect("shares are finite")
            .then_with(|| a.id.cmp(&b.id))
    });
    let mut cumulative = Vec::with_capacity(shares.len());
    let mut acc = 0.0;
    for s in &shares {
        acc += s.share_pct;
        cumulative.push(acc);
    }
    Ok(NodeFlowSection { shares, cumulative })
}

/// Per-module internal flow shares plus the flow on every connected module
/// pair.
pub fn community_flow_summary(graph: &CoGraph, partition: &Partition) -> Result<CommunitySection> {
    validate_partition(graph, partition)?;
    let w_alpha = node_relative_weights(graph)?;
    let mut internal = vec![0.0; partition.module_count()];
    for (node, &w) in w_alpha.iter().enumerate() {
        internal[partition.module_of(node)] += 100.0 * w;
    }

    let total = graph.total_weight();
    let mut between: std::collections::BTreeMap<(usize, usize), f64> = std::collections::BTreeMap::new();
    for e in graph.edges() {
        let (ma, mb) = (partition.module_of(e.source), partition.module_of(e.target));
        if ma != mb {
            *between.entry((ma.min(mb), ma.max(mb))).or_insert(0.0) += e.weight;
        }
    }

    Ok(CommunitySection {
        internal: internal
            .into_iter()
            .enumerate()
            .map(|(module, share_pct)| CommunityShare { module, share_pct })
            .collect(),
        intermodule: between
            .into_iter()
            .map(|((module_a, module_b), w)| IntermoduleFlow {
                module_a,
                module_b,
                share_pct: 100.0 * w / total,
            })
            .collect(),
    })
}

/// Node section plus community section in one report.
pub fn flow_report(graph: &CoGraph, partition: &Partition) -> Result<FlowReport> {
    Ok(FlowReport {
        nodes: node_flow_shares(graph)?,
        communities: community_flow_summary(graph, partition)?,
    })
}

/// The `k` strongest connections of `center` by edge flow share.
pub fn top_connections(graph: &CoGraph, center: &str, k: usize) -> Result<ConnectionGroup> {
    if k == 0 {
        return Err(Error::InvalidParam {
            field: "top_k",
            reason: "must be positive".into(),
        });
    }
    let center_idx = graph
        .index_of(center)
        .ok_or_else(|| Error::UnknownNode(center.to_string()))?;
    let total = graph.total_weight();
    if total <= 0.0 {
        return Err(Error::NoEdges);
    }
    let mut neighbors: Vec<Connection> = graph
        .neighbors(center_idx)
        .iter()
        .map(|&(nbr, w)| Connection {
            id: graph.node_id(nbr).to_string(),
            flow_pct: 100.0 * w / total,
        })
        .collect();
    neighbors.sort_by(|a, b| {
        b.flow_pct
            .partial_cmp(&a.flow_pct)
            .expect("flows are finite")
            .then_with(|| a.id.cmp(&b.id))
    });
    neighbors.truncate(k);
    Ok(ConnectionGroup {
        center: center.to_string(),
        neighbors,
    })
}

/// Induced subgraph on the minimal prefix of flow-ranked nodes whose
/// cumulative share reaches `target_share_pct`, optionally trimmed to the
/// `max_edges` heaviest induced edges (nodes are kept either way).
pub fn coverage_subgraph(graph: &CoGraph, target_share_pct: f64, max_edges: Option<usize>) -> Result<CoGraph> {
    if !(target_share_pct > 0.0 && target_share_pct <= 100.0) {
        return Err(Error::InvalidParam {
            field: "target_share_pct",
            reason: format!("must be in (0, 100], got {target_share_pct}"),
        });
    }
    let section = node_flow_shares(graph)?;
    let mut keep: BTreeSet<usize> = BTreeSet::new();
    for (share, &cum) in section.shares.iter().zip(&section.cumulative) {
        keep.insert(graph.index_of(&share.id).expect("ranked node exists"));
        if cum >= target_share_pct - 1e-9 {
            break;
        }
    }
    let induced = graph.induced_subgraph(&keep);
    match max_edges {
        None => Ok(induced),
        Some(limit) => {
            let mut edges: Vec<_> = induced.edges().to_vec();
            // Heaviest first; equal weights keep canonical pair order.
            edges.sort_by(|a, b| {
                b.weight
                    .partial_cmp(&a.weight)
                    .expect("weights are finite")
                    .then_with(|| (a.source, a.target).cmp(&(b.source, b.target)))
            });
            edges.truncate(limit);
            let nodes: BTreeSet<String> = induced.node_ids().iter().cloned().collect();
            CoGraph::from_parts(
                nodes,
                edges.into_iter().map(|e| {
                    (
                        (
                            induced.node_id(e.source).to_string(),
                            induced.node_id(e.target).to_string(),
                        ),
                        e.weight,
                    )
                }),
            )
        }
    }
}

/// Writes the ranking table `rank,attraction,share_pct` (full precision).
pub fn write_ranking_csv<W: Write>(mut writer: W, section: &NodeFlowSection) -> Result<()> {
    writeln!(writer, "rank,attraction,share_pct")?;
    for (i, share) in section.shares.iter().enumerate() {
        writeln!(writer, "{},{},{}", i + 1, share.id, share.share_pct)?;
    }
    Ok(())
}

/// Human-readable ranking with two-decimal percentages.
pub fn format_ranking(section: &NodeFlowSection, limit: usize) -> String {
    let mut out = String::new();
    for (i, share) in section.shares.iter().take(limit).enumerate() {
        out.push_str(&format!("{:>4}  {:<40} {:>6.2}\n", i + 1, share.id, share.share_pct));
    }
    out
}
