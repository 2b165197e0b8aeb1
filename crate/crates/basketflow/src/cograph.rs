//! Phase 2: the undirected weighted co-occurrence network of attractions.
//!
//! Every unordered pair of distinct attractions inside one basket adds one
//! count to that pair's edge weight, so weight(a, b) is the number of baskets
//! containing both. Note that this counts baskets, not distinct tourists:
//! one tourist whose two separate trips both contain a pair contributes two
//! to that pair's weight. Edges below a weight threshold are pruned away
//! together with any nodes that become isolated.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sessionizer::AttractionSet;

/// An undirected weighted edge between two node indices, stored canonically
/// with `source < target`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Undirected weighted network of attractions.
///
/// Node ids are kept sorted; the dense index of a node is its position in
/// that order, which makes downstream arrays reproducible. Weights are
/// positive; pipeline-built graphs hold integral co-occurrence counts, while
/// scaled copies (see [`CoGraph::scale_weights`]) may hold any positive
/// value.
#[derive(Debug, Clone, PartialEq)]
pub struct CoGraph {
    node_ids: Vec<String>,
    adjacency: Vec<Vec<(usize, f64)>>,
    strengths: Vec<f64>,
    edges: Vec<WeightedEdge>,
    total_weight: f64,
}

impl CoGraph {
    /// Builds a graph whose node set is exactly the endpoints of `edges`.
    pub fn from_weighted_edges<I>(edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((String, String), f64)>,
    {
        Self::from_parts(BTreeSet::new(), edges)
    }

    /// Builds a graph from explicit nodes plus edges. Nodes listed in
    /// `extra_nodes` are kept even when no edge touches them (induced
    /// subgraphs may legitimately contain isolated nodes).
    pub fn from_parts<I>(extra_nodes: BTreeSet<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((String, String), f64)>,
    {
        let mut merged: HashMap<(String, String), f64> = HashMap::new();
        let mut nodes: BTreeSet<String> = extra_nodes;
        for ((a, b), w) in edges {
            if a == b {
                return Err(Error::InvalidParam {
                    field: "edges",
                    reason: format!("self-loop on '{a}'"),
                });
            }
            if w <= 0.0 || !w.is_finite() {
                return Err(Error::InvalidParam {
                    field: "edges",
                    reason: format!("non-positive weight {w} on ({a}, {b})"),
                });
            }
            nodes.insert(a.clone());
            nodes.insert(b.clone());
            let key = if a <= b { (a, b) } else { (b, a) };
            *merged.entry(key).or_insert(0.0) += w;
        }

        let node_ids: Vec<String> = nodes.into_iter().collect();
        let index_of = |id: &str| node_ids.binary_search_by(|n| n.as_str().cmp(id)).unwrap();

        let mut edge_list: Vec<WeightedEdge> = merged
            .into_iter()
            .map(|((a, b), weight)| {
                let (ia, ib) = (index_of(&a), index_of(&b));
                WeightedEdge {
                    source: ia.min(ib),
                    target: ia.max(ib),
                    weight,
                }
            })
            .collect();
        edge_list.sort_by_key(|e| (e.source, e.target));

        let mut adjacency = vec![Vec::new(); node_ids.len()];
        let mut strengths = vec![0.0; node_ids.len()];
        let mut total_weight = 0.0;
        for e in &edge_list {
            adjacency[e.source].push((e.target, e.weight));
            adjacency[e.target].push((e.source, e.weight));
            strengths[e.source] += e.weight;
            strengths[e.target] += e.weight;
            total_weight += e.weight;
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(n, _)| n);
        }

        Ok(Self {
            node_ids,
            adjacency,
            strengths,
            edges: edge_list,
            total_weight,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sum of all edge weights (each undirected edge counted once).
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn node_id(&self, index: usize) -> &str {
        &self.node_ids[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.node_ids.binary_search_by(|n| n.as_str().cmp(id)).ok()
    }

    /// Neighbors of a node as `(neighbor index, edge weight)`, sorted by
    /// neighbor index.
    pub fn neighbors(&self, index: usize) -> &[(usize, f64)] {
        &self.adjacency[index]
    }

    /// Total weight of the edges incident to a node.
    pub fn strength(&self, index: usize) -> f64 {
        self.strengths[index]
    }

    pub fn degree(&self, index: usize) -> usize {
        self.adjacency[index].len()
    }

    pub fn weight_between(&self, a: usize, b: usize) -> Option<f64> {
        let list = &self.adjacency[a];
        list.binary_search_by_key(&b, |&(n, _)| n).ok().map(|i| list[i].1)
    }

    /// Canonical edge list, sorted by `(source, target)`.
    pub fn edges(&self) -> &[WeightedEdge] {
        &self.edges
    }

    /// Returns a copy with every edge weight multiplied by `factor`.
    /// Relative quantities (map equation, flow shares) are invariant under
    /// this scaling.
    pub fn scale_weights(&self, factor: f64) -> Result<Self> {
        if factor <= 0.0 || !factor.is_finite() {
            return Err(Error::InvalidParam {
                field: "factor",
                reason: format!("must be a positive finite value, got {factor}"),
            });
        }
        let mut scaled = self.clone();
        for e in &mut scaled.edges {
            e.weight *= factor;
        }
        for list in &mut scaled.adjacency {
            for entry in list {
                entry.1 *= factor;
            }
        }
        for s in &mut scaled.strengths {
            *s *= factor;
        }
        scaled.total_weight *= factor;
        Ok(scaled)
    }

    /// Induced subgraph on the given node indices (isolated members kept).
    pub fn induced_subgraph(&self, keep: &BTreeSet<usize>) -> Self {
        let nodes: BTreeSet<String> = keep.iter().map(|&i| self.node_ids[i].clone()).collect();
        let edges = self.edges.iter().filter(|e| keep.contains(&e.source) && keep.contains(&e.target)).map(|e| {
            (
                (self.node_ids[e.source].clone(), self.node_ids[e.target].clone()),
                e.weight,
            )
        });
        // Inputs come from a valid graph, so reconstruction cannot fail.
        Self::from_parts(nodes, edges).expect("induced subgraph of a valid graph")
    }

    /// Writes the canonical edge-list CSV: `source,target,weight` with
    /// `source < target` lexicographically.
    pub fn write_edge_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "source,target,weight")?;
        for e in &self.edges {
            writeln!(
                writer,
                "{},{},{}",
                self.node_ids[e.source],
                self.node_ids[e.target],
                format_weight(e.weight)
            )?;
        }
        Ok(())
    }

    /// Renders the graph in DOT format with weights as edge labels.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "graph {name} {{");
        for id in &self.node_ids {
            let _ = writeln!(out, "    \"{id}\";");
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "    \"{}\" -- \"{}\" [label={}];",
                self.node_ids[e.source],
                self.node_ids[e.target],
                format_weight(e.weight)
            );
        }
        out.push_str("}\n");
        out
    }
}

fn format_weight(w: f64) -> String {
    if w.fract() == 0.0 && w.abs() < 1e15 {
        format!("{}", w as i64)
    } else {
        format!("{w}")
    }
}

/// Counts after building and pruning a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub total_weight: f64,
    pub component_count: usize,
    pub removed_edge_count: usize,
}

/// Builds the co-occurrence network: each basket contributes +1 to every
/// unordered pair of its distinct attractions.
pub fn build_cooccurrence(sets: &[AttractionSet]) -> CoGraph {
    // Index attraction ids once so pair counting works on integers.
    let ids: BTreeSet<&str> = sets.iter().flat_map(|s| s.attractions.iter().map(String::as_str)).collect();
    let ids: Vec<&str> = ids.into_iter().collect();
    let index_of = |id: &str| ids.binary_search(&id).unwrap();

    let mut counts: HashMap<(u32, u32), u64> = HashMap::new();
    let mut members: Vec<u32> = Vec::new();
    for set in sets {
        members.clear();
        members.extend(set.attractions.iter().map(|a| index_of(a) as u32));
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                let key = (members[i].min(members[j]), members[i].max(members[j]));
                *counts.entry(key).or_insert(0) += 1;
            }
        }
    }

    let edges = counts.into_iter().map(|((a, b), c)| {
        (
            (ids[a as usize].to_string(), ids[b as usize].to_string()),
            c as f64,
        )
    });
    CoGraph::from_weighted_edges(edges).expect("pair counts form a valid graph")
}

/// Keeps exactly the edges with `weight >= min_weight`, drops nodes left
/// isolated, and reports the removal counts.
pub fn prune(graph: &CoGraph, min_weight: u64) -> (CoGraph, GraphStats) {
    let threshold = min_weight as f64;
    let retained = graph.edges().iter().filter(|e| e.weight >= threshold).map(|e| {
        (
            (graph.node_id(e.source).to_string(), graph.node_id(e.target).to_string()),
            e.weight,
        )
    });
    let pruned = CoGraph::from_weighted_edges(retained).expect("pruned graph stays valid");
    let stats = GraphStats {
        node_count: pruned.node_count(),
        edge_count: pruned.edge_count(),
        total_weight: pruned.total_weight(),
        component_count: connected_components(&pruned).len(),
        removed_edge_count: graph.edge_count() - pruned.edge_count(),
    };
    (pruned, stats)
}

/// Connected components as sorted node-index lists, ordered by each
/// component's smallest node index.
pub fn connected_components(graph: &CoGraph) -> Vec<Vec<usize>> {
    let n = graph.node_count();
    let mut visited = vec![false; n];
    let mut components = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut component = Vec::new();
        visited[start] = true;
        stack.push(start);
        while let Some(node) = stack.pop() {
            component.push(node);
            for &(nbr, _) in graph.neighbors(node) {
                if !visited[nbr] {
                    visited[nbr] = true;
                    stack.push(nbr);
                }
            }
        }
        component.sort_unstable();
        components.push(component);
    }
    components
}
