//! The map equation L(M) for hard partitions of an undirected weighted
//! network.
//!
//! All quantities are relative weights. A node's weight is its strength over
//! twice the total edge weight; a module's weight is the sum of its members';
//! a module's exit weight is the weight of edges leaving it over twice the
//! total edge weight (every inter-module edge contributes to both of its
//! endpoints' modules). With `plogp(x) = x*log2(x)` and `plogp(0) = 0`:
//!
//! ```text
//! L(M) = plogp(w_exit_total)
//!        - 2 * sum_i plogp(w_exit[i])
//!        - sum_a plogp(w_alpha[a])
//!        + sum_i plogp(w_exit[i] + w_module[i])
//! ```
//!
//! measured in bits. Lower L means the partition describes the network's
//! flow more concisely.

use serde::{Deserialize, Serialize};

use crate::cograph::CoGraph;
use crate::error::{Error, Result};

/// `x * log2(x)` with the conventional limit value 0 at `x = 0`.
pub fn plogp(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Assignment of every node index to exactly one module, with module ids
/// dense in `0..module_count`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    module_count: usize,
}

impl Partition {
    /// Validates that module ids are dense: every id in `0..max+1` is used.
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        if assignment.is_empty() {
            return Ok(Self {
                assignment,
                module_count: 0,
            });
        }
        let module_count = assignment.iter().max().unwrap() + 1;
        let mut used = vec![false; module_count];
        for &m in &assignment {
            used[m] = true;
        }
        if let Some(missing) = used.iter().position(|&u| !u) {
            return Err(Error::InvalidPartition(format!(
                "module ids are not dense: id {missing} is unused (module_count {module_count})"
            )));
        }
        Ok(Self {
            assignment,
            module_count,
        })
    }

    /// Renumbers arbitrary labels into dense module ids by first occurrence.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut remap: Vec<Option<usize>> = Vec::new();
        let mut assignment = Vec::with_capacity(labels.len());
        let mut next = 0usize;
        for &label in labels {
            if label >= remap.len() {
                remap.resize(label + 1, None);
            }
            let id = *remap[label].get_or_insert_with(|| {
                let id = next;
                next += 1;
                id
            });
            assignment.push(id);
        }
        Self {
            assignment,
            module_count: next,
        }
    }

    /// Every node in its own module.
    pub fn singletons(n: usize) -> Self {
        Self {
            assignment: (0..n).collect(),
            module_count: n,
        }
    }

    /// All nodes in one module.
    pub fn one_module(n: usize) -> Self {
        Self {
            assignment: vec![0; n],
            module_count: if n == 0 { 0 } else { 1 },
        }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn module_count(&self) -> usize {
        self.module_count
    }

    pub fn module_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Node indices per module.
    pub fn modules(&self) -> Vec<Vec<usize>> {
        let mut modules = vec![Vec::new(); self.module_count];
        for (node, &m) in self.assignment.iter().enumerate() {
            modules[m].push(node);
        }
        modules
    }

    /// Copy with one node relabeled, renumbered dense (the source module may
    /// have emptied).
    pub fn with_move(&self, node: usize, target_module: usize) -> Result<Self> {
        if node >= self.assignment.len() {
            return Err(Error::InvalidPartition(format!(
                "node index {node} out of range for {} nodes",
                self.assignment.len()
            )));
        }
        if target_module >= self.module_count {
            return Err(Error::InvalidPartition(format!(
                "target module {target_module} out of range for {} modules",
                self.module_count
            )));
        }
        let mut labels = self.assignment.clone();
        labels[node] = target_module;
        Ok(Self::from_labels(&labels))
    }
}

/// All intermediate quantities of one map-equation evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEqTerms {
    /// Relative node weights, indexed by node.
    pub w_alpha: Vec<f64>,
    /// Relative module weights `w_i`, indexed by module.
    pub w_module: Vec<f64>,
    /// Relative module exit weights, indexed by module.
    pub w_exit_module: Vec<f64>,
    /// Total exit weight across modules.
    pub w_exit_total: f64,
    /// Map equation value in bits.
    pub l_bits: f64,
}

/// Checks that a partition covers exactly the graph's nodes.
pub fn validate_partition(graph: &CoGraph, partition: &Partition) -> Result<()> {
    if partition.len() < graph.node_count() {
        return Err(Error::InvalidPartition(format!(
            "node '{}' (index {}) has no module assignment",
            graph.node_id(partition.len()),
            partition.len()
        )));
    }
    if partition.len() > graph.node_count() {
        return Err(Error::InvalidPartition(format!(
            "partition assigns node index {} but the graph has {} nodes",
            partition.len() - 1,
            graph.node_count()
        )));
    }
    Ok(())
}

/// Relative node weights: strength over twice the total edge weight. They
/// sum to 1 and are positive; isolated nodes are rejected.
pub fn node_relative_weights(graph: &CoGraph) -> Result<Vec<f64>> {
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if graph.edge_count() == 0 {
        return Err(Error::NoEdges);
    }
    let two_w = 2.0 * graph.total_weight();
    (0..graph.node_count())
        .map(|i| {
            let s = graph.strength(i);
            if s <= 0.0 {
                Err(Error::IsolatedNode(graph.node_id(i).to_string()))
            } else {
                Ok(s / two_w)
            }
        })
        .collect()
}

/// Per-module exit weights and their total.
///
/// Every edge with endpoints in two different modules contributes
/// `w / (2 * total)` to each of the two modules' exit weights.
pub fn exit_weights(graph: &CoGraph, partition: &Partition) -> Result<(Vec<f64>, f64)> {
    validate_partition(graph, partition)?;
    if graph.edge_count() == 0 {
        return Err(Error::NoEdges);
    }
    let two_w = 2.0 * graph.total_weight();
    let mut exits = vec![0.0; partition.module_count()];
    for e in graph.edges() {
        let (ma, mb) = (partition.module_of(e.source), partition.module_of(e.target));
        if ma != mb {
            let rel = e.weight / two_w;
            exits[ma] += rel;
            exits[mb] += rel;
        }
    }
    let total = exits.iter().sum();
    Ok((exits, total))
}

/// Evaluates L(M) and returns all intermediate terms.
pub fn map_equation(graph: &CoGraph, partition: &Partition) -> Result<MapEqTerms> {
    let w_alpha = node_relative_weights(graph)?;
    let (w_exit_module, w_exit_total) = exit_weights(graph, partition)?;

    let mut w_module = vec![0.0; partition.module_count()];
    for (node, &w) in w_alpha.iter().enumerate() {
        w_module[partition.module_of(node)] += w;
    }

    let exit_term = plogp(w_exit_total);
    let per_module_exit: f64 = w_exit_module.iter().copied().map(plogp).sum();
    let node_term: f64 = w_alpha.iter().copied().map(plogp).sum();
    let containment_term: f64 = w_exit_module
        .iter()
        .zip(&w_module)
        .map(|(&e, &w)| plogp(e + w))
        .sum();

    let l_bits = exit_term - 2.0 * per_module_exit - node_term + containment_term;
    Ok(MapEqTerms {
        w_alpha,
        w_module,
        w_exit_module,
        w_exit_total,
        l_bits,
    })
}
