//! End-to-end pipeline orchestration.
//!
//! Runs the four phases in sequence, writes every artifact file, and records
//! a manifest with per-phase timings, counts, and a SHA-256 per artifact.
//! Identical configuration (including the seed) produces byte-identical data
//! artifacts. A phase error aborts the run, removes the partially written
//! outputs, and surfaces an exit code naming the failure class.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

use basketflow::cograph::{build_cooccurrence, prune};
use basketflow::communities::detect_communities;
use basketflow::flowstats::{coverage_subgraph, flow_report, node_flow_shares, top_connections, write_ranking_csv};
use basketflow::ingest::{dedup_exact, parse_posts};
use basketflow::layout::layout_graph;
use basketflow::mapequation::map_equation;
use basketflow::sessionizer::{build_attraction_sets, drop_singletons, order_posts};

use crate::artifacts::{
    self, CommunitiesFile, ConnectionsFile, EdgeRecord, FlowFile, GraphFile, LayoutFile, LayoutNode,
    ManifestFile, ModuleReport, PhaseRecord, SetsFile,
};
use crate::config::PipelineConfig;
use crate::{CliError, CliResult};

/// Writes artifacts under one directory, remembering names and hashes so a
/// failed run can clean up after itself.
pub struct ArtifactWriter {
    out_dir: PathBuf,
    written: Vec<PathBuf>,
    hashes: BTreeMap<String, String>,
}

impl ArtifactWriter {
    pub fn new(out_dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(out_dir)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", out_dir.display())))?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            written: Vec::new(),
            hashes: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.out_dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        self.hashes.insert(name.to_string(), hex::encode(Sha256::digest(bytes)));
        Ok(())
    }

    pub fn hashes(&self) -> &BTreeMap<String, String> {
        &self.hashes
    }

    /// Best-effort removal of everything written so far.
    pub fn discard(&mut self) {
        for path in self.written.drain(..) {
            let _ = fs::remove_file(path);
        }
    }
}

struct PhaseTimer {
    records: Vec<PhaseRecord>,
    current: Option<(String, Instant)>,
}

impl PhaseTimer {
    fn new() -> Self {
        Self {
            records: Vec::new(),
            current: None,
        }
    }

    fn start(&mut self, name: &str) {
        self.finish(BTreeMap::new());
        self.current = Some((name.to_string(), Instant::now()));
    }

    fn finish(&mut self, counts: BTreeMap<String, u64>) {
        if let Some((name, started)) = self.current.take() {
            self.records.push(PhaseRecord {
                name,
                duration_ms: started.elapsed().as_millis() as u64,
                counts,
            });
        }
    }
}

fn counts<const N: usize>(pairs: [(&str, u64); N]) -> BTreeMap<String, u64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Runs all four phases and writes every artifact plus the manifest into
/// `cfg.out_dir`.
pub fn run_pipeline(cfg: &PipelineConfig) -> CliResult<ManifestFile> {
    let mut writer = ArtifactWriter::new(&cfg.out_dir)?;
    match run_phases(cfg, &mut writer) {
        Ok(manifest) => Ok(manifest),
        Err(err) => {
            writer.discard();
            Err(err)
        }
    }
}

fn run_phases(cfg: &PipelineConfig, writer: &mut ArtifactWriter) -> CliResult<ManifestFile> {
    let mut timer = PhaseTimer::new();

    // Ingest.
    timer.start("ingest");
    let file = fs::File::open(&cfg.input)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", cfg.input.display())))?;
    let outcome = parse_posts(BufReader::new(file), cfg.format)?;
    let posts_read = outcome.records.len() as u64;
    let posts_skipped = outcome.skipped_count() as u64;
    let records = if cfg.keep_duplicates {
        outcome.records
    } else {
        dedup_exact(outcome.records)
    };
    timer.finish(counts([
        ("posts_read", posts_read),
        ("posts_skipped", posts_skipped),
        ("posts_after_dedup", records.len() as u64),
    ]));

    // Phase 1: sessionize.
    timer.start("sessionize");
    let window = cfg.window();
    window.validate().map_err(CliError::from)?;
    let all_sets = build_attraction_sets(&order_posts(&records), &window);
    let sets_pre_drop = all_sets.len() as u64;
    let sets = drop_singletons(all_sets);
    if sets.is_empty() {
        return Err(CliError::Empty(
            "no sessions formed: every attraction set was a singleton or the input was empty".into(),
        ));
    }
    writer.write(
        artifacts::ATTRACTION_SETS_JSON,
        &artifacts::to_json_bytes(&SetsFile::new(cfg.window_days, sets.clone()))?,
    )?;
    timer.finish(counts([
        ("sets_pre_drop", sets_pre_drop),
        ("sets", sets.len() as u64),
    ]));

    // Phase 2: co-occurrence graph and pruning.
    timer.start("graph");
    let full_graph = build_cooccurrence(&sets);
    let mut csv_bytes = Vec::new();
    full_graph.write_edge_csv(&mut csv_bytes).map_err(CliError::from)?;
    writer.write(artifacts::EDGES_PRE_PRUNE_CSV, &csv_bytes)?;

    let (graph, stats) = prune(&full_graph, cfg.min_edge_weight);
    if stats.removed_edge_count + graph.edge_count() != full_graph.edge_count() {
        return Err(CliError::Internal(format!(
            "prune conservation violated: {} removed + {} retained != {} built",
            stats.removed_edge_count,
            graph.edge_count(),
            full_graph.edge_count()
        )));
    }
    let mut csv_bytes = Vec::new();
    graph.write_edge_csv(&mut csv_bytes).map_err(CliError::from)?;
    writer.write(artifacts::EDGES_POST_PRUNE_CSV, &csv_bytes)?;
    writer.write(
        artifacts::GRAPH_JSON,
        &artifacts::to_json_bytes(&GraphFile::from_graph(&graph, cfg.min_edge_weight, stats.clone()))?,
    )?;
    if graph.edge_count() == 0 {
        return Err(CliError::Empty(format!(
            "no edges with weight >= {} survive pruning",
            cfg.min_edge_weight
        )));
    }
    timer.finish(counts([
        ("nodes_built", full_graph.node_count() as u64),
        ("edges_built", full_graph.edge_count() as u64),
        ("nodes", graph.node_count() as u64),
        ("edges", graph.edge_count() as u64),
        ("edges_removed", stats.removed_edge_count as u64),
        ("components", stats.component_count as u64),
    ]));

    // Phase 3: communities.
    timer.start("communities");
    let detection = detect_communities(&graph, &cfg.detect())?;
    let terms = map_equation(&graph, &detection.partition)?;
    let modules: Vec<ModuleReport> = detection
        .partition
        .modules()
        .into_iter()
        .enumerate()
        .map(|(id, members)| ModuleReport {
            id,
            w_module: terms.w_module[id],
            w_exit_module: terms.w_exit_module[id],
            nodes: members.into_iter().map(|n| graph.node_id(n).to_string()).collect(),
        })
        .collect();
    writer.write(
        artifacts::COMMUNITIES_JSON,
        &artifacts::to_json_bytes(&CommunitiesFile {
            schema_version: artifacts::SCHEMA_VERSION,
            l_bits: detection.l_bits,
            w_exit_total: terms.w_exit_total,
            trial_l_values: detection.trial_l_values.clone(),
            sweeps_used: detection.sweeps_used,
            modules,
        })?,
    )?;
    timer.finish(counts([
        ("communities", detection.partition.module_count() as u64),
        ("sweeps_used", detection.sweeps_used as u64),
    ]));

    // Flow report.
    timer.start("flow");
    let report = flow_report(&graph, &detection.partition)?;
    let mut ranking = Vec::new();
    write_ranking_csv(&mut ranking, &report.nodes).map_err(CliError::from)?;
    writer.write(artifacts::FLOW_REPORT_JSON, &artifacts::to_json_bytes(&FlowFile::new(report))?)?;
    writer.write(artifacts::FLOW_RANKING_CSV, &ranking)?;
    if let Some(center) = &cfg.center {
        let group = top_connections(&graph, center, cfg.top_k)?;
        writer.write(
            artifacts::TOP_CONNECTIONS_JSON,
            &artifacts::to_json_bytes(&ConnectionsFile {
                schema_version: artifacts::SCHEMA_VERSION,
                group,
            })?,
        )?;
    }
    timer.finish(BTreeMap::new());

    // Phase 4: layout of the coverage subgraph.
    timer.start("layout");
    let cover = coverage_subgraph(&graph, cfg.coverage_target_pct, cfg.max_layout_edges)?;
    let layout = layout_graph(&cover, cfg.layout_mode, &cfg.layout())?;
    let layout_file = layout_to_file(&graph, &cover, cfg.layout_mode, &layout)?;
    writer.write(artifacts::LAYOUT_JSON, &artifacts::to_json_bytes(&layout_file)?)?;
    timer.finish(counts([
        ("layout_nodes", cover.node_count() as u64),
        ("layout_edges", cover.edge_count() as u64),
        ("layout_iterations", layout.iterations_used as u64),
    ]));

    timer.finish(BTreeMap::new());
    let manifest = ManifestFile {
        schema_version: artifacts::SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: serde_json::to_value(cfg)?,
        phases: timer.records,
        artifacts: writer.hashes().clone(),
    };
    writer.write(artifacts::MANIFEST_JSON, &artifacts::to_json_bytes(&manifest)?)?;
    Ok(manifest)
}

/// Builds the plot bundle: coordinates plus each node's flow share in the
/// analysis graph, and the laid-out subgraph's edges.
pub fn layout_to_file(
    analysis_graph: &basketflow::cograph::CoGraph,
    cover: &basketflow::cograph::CoGraph,
    mode: basketflow::layout::EdgeLengthMode,
    layout: &basketflow::layout::LayoutResult,
) -> CliResult<LayoutFile> {
    let section = node_flow_shares(analysis_graph)?;
    let share_of: BTreeMap<&str, f64> = section
        .shares
        .iter()
        .map(|s| (s.id.as_str(), s.share_pct))
        .collect();
    let nodes = cover
        .node_ids()
        .iter()
        .enumerate()
        .map(|(i, id)| LayoutNode {
            id: id.clone(),
            x: layout.coordinates[i].0,
            y: layout.coordinates[i].1,
            flow_pct: share_of.get(id.as_str()).copied().unwrap_or(0.0),
        })
        .collect();
    let edges = cover
        .edges()
        .iter()
        .map(|e| EdgeRecord {
            source: cover.node_id(e.source).to_string(),
            target: cover.node_id(e.target).to_string(),
            weight: e.weight,
        })
        .collect();
    Ok(LayoutFile {
        schema_version: artifacts::SCHEMA_VERSION,
        mode,
        converged: layout.converged,
        final_energy: layout.final_energy,
        iterations_used: layout.iterations_used,
        nodes,
        edges,
    })
}
