//! Phase-file formats. Every JSON artifact embeds a schema version and every
//! loader rejects a mismatch, so a phase never runs on a file written by an
//! incompatible tool version.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use basketflow::cograph::{CoGraph, GraphStats};
use basketflow::flowstats::{ConnectionGroup, FlowReport};
use basketflow::layout::EdgeLengthMode;
use basketflow::mapequation::Partition;
use basketflow::sessionizer::AttractionSet;

use crate::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

// Canonical artifact names shared by `pipeline` and the per-phase commands.
pub const POSTS_CSV: &str = "posts.csv";
pub const ATTRACTION_SETS_JSON: &str = "attraction_sets.json";
pub const EDGES_PRE_PRUNE_CSV: &str = "edges_pre_prune.csv";
pub const EDGES_POST_PRUNE_CSV: &str = "edges_post_prune.csv";
pub const GRAPH_JSON: &str = "graph.json";
pub const GRAPH_DOT: &str = "graph.dot";
pub const COMMUNITIES_JSON: &str = "communities.json";
pub const FLOW_REPORT_JSON: &str = "flow_report.json";
pub const FLOW_RANKING_CSV: &str = "flow_ranking.csv";
pub const TOP_CONNECTIONS_JSON: &str = "top_connections.json";
pub const LAYOUT_JSON: &str = "layout.json";
pub const MANIFEST_JSON: &str = "manifest.json";

fn check_schema(found: u32, path: &Path) -> CliResult<()> {
    if found != SCHEMA_VERSION {
        return Err(CliError::Input(format!(
            "{}: schema version {found} does not match expected {SCHEMA_VERSION}",
            path.display()
        )));
    }
    Ok(())
}

/// Serializes a value as pretty JSON with a trailing newline; output is
/// byte-deterministic for identical values.
pub fn to_json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Input(format!("{}: invalid JSON: {e}", path.display())))
}

/// Phase 1 output: attraction sets plus the window that produced them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetsFile {
    pub schema_version: u32,
    pub window_days: u32,
    pub sets: Vec<AttractionSet>,
}

impl SetsFile {
    pub fn new(window_days: u32, sets: Vec<AttractionSet>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            window_days,
            sets,
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let file: Self = read_json(path)?;
        check_schema(file.schema_version, path)?;
        Ok(file)
    }
}

/// One undirected edge by node id, `source < target` lexicographically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub source: String,
    pub target: String,
    pub weight: f64,
}

/// Phase 2 output: the canonical (pruned) graph later phases consume.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub schema_version: u32,
    pub min_weight: u64,
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeRecord>,
    pub stats: GraphStats,
}

impl GraphFile {
    pub fn from_graph(graph: &CoGraph, min_weight: u64, stats: GraphStats) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            min_weight,
            nodes: graph.node_ids().to_vec(),
            edges: graph
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    source: graph.node_id(e.source).to_string(),
                    target: graph.node_id(e.target).to_string(),
                    weight: e.weight,
                })
                .collect(),
            stats,
        }
    }

    pub fn to_graph(&self) -> CliResult<CoGraph> {
        let nodes = self.nodes.iter().cloned().collect();
        let graph = CoGraph::from_parts(
            nodes,
            self.edges
                .iter()
                .map(|e| ((e.source.clone(), e.target.clone()), e.weight)),
        )
        .map_err(|e| CliError::Input(format!("graph file is not a valid network: {e}")))?;
        Ok(graph)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let file: Self = read_json(path)?;
        check_schema(file.schema_version, path)?;
        Ok(file)
    }
}

/// One detected module with its flow terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModuleReport {
    pub id: usize,
    pub w_module: f64,
    pub w_exit_module: f64,
    pub nodes: Vec<String>,
}

/// Phase 3 output: the partition and its map-equation audit trail.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommunitiesFile {
    pub schema_version: u32,
    pub l_bits: f64,
    pub w_exit_total: f64,
    pub trial_l_values: Vec<f64>,
    pub sweeps_used: usize,
    pub modules: Vec<ModuleReport>,
}

impl CommunitiesFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let file: Self = read_json(path)?;
        check_schema(file.schema_version, path)?;
        Ok(file)
    }

    /// Rebuilds the node partition against a graph.
    pub fn partition_for(&self, graph: &CoGraph) -> CliResult<Partition> {
        let mut labels = vec![usize::MAX; graph.node_count()];
        for module in &self.modules {
            for id in &module.nodes {
                let idx = graph.index_of(id).ok_or_else(|| {
                    CliError::Input(format!("community file names unknown node '{id}'"))
                })?;
                labels[idx] = module.id;
            }
        }
        if let Some(missing) = labels.iter().position(|&m| m == usize::MAX) {
            return Err(CliError::Input(format!(
                "community file misses node '{}'",
                graph.node_id(missing)
            )));
        }
        Partition::new(labels).map_err(|e| CliError::Input(e.to_string()))
    }
}

/// Flow report artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowFile {
    pub schema_version: u32,
    pub report: FlowReport,
}

impl FlowFile {
    pub fn new(report: FlowReport) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            report,
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let file: Self = read_json(path)?;
        check_schema(file.schema_version, path)?;
        Ok(file)
    }
}

/// Top-connections artifact (`flow --center`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConnectionsFile {
    pub schema_version: u32,
    pub group: ConnectionGroup,
}

/// One laid-out node: coordinates plus its share of the analysis graph's
/// flow.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayoutNode {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub flow_pct: f64,
}

/// Phase 4 output: plot-ready nodes and edges.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayoutFile {
    pub schema_version: u32,
    pub mode: EdgeLengthMode,
    pub converged: bool,
    pub final_energy: f64,
    pub iterations_used: usize,
    pub nodes: Vec<LayoutNode>,
    pub edges: Vec<EdgeRecord>,
}

impl LayoutFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let file: Self = read_json(path)?;
        check_schema(file.schema_version, path)?;
        Ok(file)
    }
}

/// Timing and counts of one pipeline phase.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub name: String,
    pub duration_ms: u64,
    pub counts: BTreeMap<String, u64>,
}

/// Reproducibility record of one pipeline run: the configuration snapshot,
/// per-phase timings and counts, and a SHA-256 per data artifact. Artifact
/// hashes are a pure function of configuration and seed; timings are not.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestFile {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: serde_json::Value,
    pub phases: Vec<PhaseRecord>,
    pub artifacts: BTreeMap<String, String>,
}

impl ManifestFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let file: Self = read_json(path)?;
        check_schema(file.schema_version, path)?;
        Ok(file)
    }
}
