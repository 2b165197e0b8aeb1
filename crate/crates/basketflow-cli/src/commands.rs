//! Argument parsing and the eight subcommands. Each subcommand is a pure
//! function from its input files and flags to its output files; `pipeline`
//! composes the per-phase commands and writes a run manifest on top.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};

use basketflow::cograph::{build_cooccurrence, prune};
use basketflow::communities::detect_communities;
use basketflow::flowstats::{
    coverage_subgraph, flow_report, format_ranking, top_connections, write_ranking_csv,
};
use basketflow::ingest::{dedup_exact, generate_synthetic, parse_posts, write_posts_csv, InputFormat, SyntheticParams};
use basketflow::layout::{layout_graph, EdgeLengthMode};
use basketflow::mapequation::map_equation;
use basketflow::sessionizer::{sessionize, WindowConfig};

use crate::artifacts::{
    self, CommunitiesFile, ConnectionsFile, FlowFile, GraphFile, ModuleReport, SetsFile,
};
use crate::config::{
    parse_config_file, parse_format, parse_layout_mode, resolve, resolve_opt, PipelineConfig,
    DEFAULT_COVERAGE_TARGET_PCT, DEFAULT_MAX_SWEEPS, DEFAULT_MIN_EDGE_WEIGHT, DEFAULT_MIN_IMPROVEMENT,
    DEFAULT_SEED, DEFAULT_TOP_K, DEFAULT_TRIALS, DEFAULT_WINDOW_DAYS,
};
use crate::pipeline::{layout_to_file, run_pipeline, ArtifactWriter};
use crate::{CliError, CliResult};

/// Attraction-basket analytics: sessionize visit records, build the
/// co-occurrence network, detect communities, and export flow reports and
/// layouts.
#[derive(Debug, Parser)]
#[command(name = "basketflow", version, max_term_width = 100)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Parse and validate a post stream, collapse exact duplicates, and
    /// write the canonical CSV.
    Ingest(IngestArgs),
    /// Phase 1: build attraction sets from a post stream.
    Sessionize(SessionizeArgs),
    /// Phase 2: build and prune the co-occurrence graph from attraction
    /// sets.
    Graph(GraphArgs),
    /// Phase 3: detect communities by minimizing the map equation.
    Communities(CommunitiesArgs),
    /// Flow report: node ranking, community summary, top connections.
    Flow(FlowArgs),
    /// Phase 4: lay out the coverage subgraph.
    Layout(LayoutArgs),
    /// Generate a deterministic synthetic post stream.
    Synth(SynthArgs),
    /// Run all four phases end to end and write a run manifest.
    Pipeline(PipelineArgs),
}

#[derive(Debug, clap::Args)]
pub struct IngestArgs {
    /// Post stream to read.
    #[arg(long)]
    pub input: PathBuf,
    /// Input format: csv or jsonl.
    #[arg(long, value_parser = parse_format, default_value = "csv")]
    pub format: InputFormat,
    /// Keep exact duplicate (tourist, attraction, date) triples.
    #[arg(long)]
    pub keep_duplicates: bool,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct SessionizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_format, default_value = "csv")]
    pub format: InputFormat,
    #[arg(long)]
    pub keep_duplicates: bool,
    /// Largest day gap between consecutive posts that still joins one set.
    #[arg(long, default_value_t = DEFAULT_WINDOW_DAYS)]
    pub window_days: u32,
    /// Output JSON path for the attraction sets.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct GraphArgs {
    /// Attraction-sets JSON from `sessionize`.
    #[arg(long)]
    pub sets: PathBuf,
    /// Keep only edges with at least this co-occurrence count.
    #[arg(long, default_value_t = DEFAULT_MIN_EDGE_WEIGHT)]
    pub min_weight: u64,
    /// Directory for edge CSVs and graph.json.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Also write the pruned graph in DOT format.
    #[arg(long)]
    pub dot: bool,
}

#[derive(Debug, clap::Args)]
pub struct CommunitiesArgs {
    /// graph.json from `graph`.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS)]
    pub max_sweeps: usize,
    #[arg(long, default_value_t = DEFAULT_MIN_IMPROVEMENT)]
    pub min_improvement: f64,
    /// Output JSON path for the community report.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct FlowArgs {
    /// graph.json from `graph`.
    #[arg(long)]
    pub graph: PathBuf,
    /// communities.json from `communities`.
    #[arg(long)]
    pub communities: PathBuf,
    /// Connections per center in top-connection queries.
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    pub top_k: usize,
    /// Also write the top connections of this attraction.
    #[arg(long)]
    pub center: Option<String>,
    /// Directory for flow_report.json and flow_ranking.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct LayoutArgs {
    /// graph.json from `graph`.
    #[arg(long)]
    pub graph: PathBuf,
    /// Cumulative flow share (percent) the laid-out node prefix must reach.
    #[arg(long, default_value_t = DEFAULT_COVERAGE_TARGET_PCT)]
    pub coverage_target: f64,
    /// Keep only this many heaviest edges of the coverage subgraph.
    #[arg(long)]
    pub max_edges: Option<usize>,
    /// Edge length mode: inverse-weight or unit.
    #[arg(long, value_parser = parse_layout_mode, default_value = "inverse-weight")]
    pub mode: EdgeLengthMode,
    #[arg(long, default_value_t = 1.0)]
    pub display_length: f64,
    #[arg(long, default_value_t = 1.0)]
    pub spring_constant: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub newton_tol: f64,
    /// Outer iteration cap (default 100 per node).
    #[arg(long)]
    pub max_outer_iters: Option<usize>,
    /// Gap between component bounding boxes (default display-length / 4).
    #[arg(long)]
    pub tiling_gap: Option<f64>,
    /// Output JSON path for the layout bundle.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct SynthArgs {
    /// Number of distinct tourists (default: posts / 5, at least 1).
    #[arg(long)]
    pub tourists: Option<usize>,
    #[arg(long)]
    pub attractions: usize,
    #[arg(long)]
    pub posts: usize,
    #[arg(long, default_value = "2015-01-01")]
    pub start: NaiveDate,
    #[arg(long, default_value = "2017-12-31")]
    pub end: NaiveDate,
    /// Power-law exponent of attraction popularity (0 = uniform).
    #[arg(long, default_value_t = 1.5)]
    pub skew: f64,
    /// Largest day span of one posting burst.
    #[arg(long, default_value_t = 3)]
    pub burst_days: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct PipelineArgs {
    /// Key-value config file; command-line flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Input format: csv or jsonl.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub keep_duplicates: bool,
    #[arg(long)]
    pub window_days: Option<u32>,
    #[arg(long)]
    pub min_weight: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub max_sweeps: Option<usize>,
    #[arg(long)]
    pub min_improvement: Option<f64>,
    #[arg(long)]
    pub coverage_target: Option<f64>,
    #[arg(long)]
    pub max_layout_edges: Option<usize>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub center: Option<String>,
    /// Edge length mode: inverse-weight or unit.
    #[arg(long)]
    pub layout_mode: Option<String>,
    #[arg(long)]
    pub display_length: Option<f64>,
    #[arg(long)]
    pub spring_constant: Option<f64>,
    #[arg(long)]
    pub newton_tol: Option<f64>,
    #[arg(long)]
    pub max_outer_iters: Option<usize>,
    #[arg(long)]
    pub tiling_gap: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl PipelineArgs {
    /// Flag-over-file-over-default resolution into a full config.
    pub fn into_config(self) -> CliResult<PipelineConfig> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
                parse_config_file(&text)?
            }
            None => BTreeMap::new(),
        };
        let get = |key: &str| file.get(key);

        let input = resolve_opt(self.input, get("input"), "input")?
            .ok_or_else(|| CliError::Usage("missing required --input (or config key 'input')".into()))?;
        let out_dir = resolve_opt(self.out_dir, get("out-dir"), "out-dir")?
            .ok_or_else(|| CliError::Usage("missing required --out-dir (or config key 'out-dir')".into()))?;
        let format_text = resolve(self.format, get("format"), "csv".to_string(), "format")?;
        let format = parse_format(&format_text).map_err(CliError::Usage)?;
        let layout_text = resolve(
            self.layout_mode,
            get("layout-mode"),
            "inverse-weight".to_string(),
            "layout-mode",
        )?;
        let layout_mode = parse_layout_mode(&layout_text).map_err(CliError::Usage)?;
        let keep_duplicates = self.keep_duplicates
            || resolve(None, get("keep-duplicates"), false, "keep-duplicates")?;

        Ok(PipelineConfig {
            input,
            format,
            keep_duplicates,
            window_days: resolve(self.window_days, get("window-days"), DEFAULT_WINDOW_DAYS, "window-days")?,
            min_edge_weight: resolve(self.min_weight, get("min-weight"), DEFAULT_MIN_EDGE_WEIGHT, "min-weight")?,
            seed: resolve(self.seed, get("seed"), DEFAULT_SEED, "seed")?,
            trials: resolve(self.trials, get("trials"), DEFAULT_TRIALS, "trials")?,
            max_sweeps: resolve(self.max_sweeps, get("max-sweeps"), DEFAULT_MAX_SWEEPS, "max-sweeps")?,
            min_improvement: resolve(
                self.min_improvement,
                get("min-improvement"),
                DEFAULT_MIN_IMPROVEMENT,
                "min-improvement",
            )?,
            coverage_target_pct: resolve(
                self.coverage_target,
                get("coverage-target"),
                DEFAULT_COVERAGE_TARGET_PCT,
                "coverage-target",
            )?,
            max_layout_edges: resolve_opt(self.max_layout_edges, get("max-layout-edges"), "max-layout-edges")?,
            top_k: resolve(self.top_k, get("top-k"), DEFAULT_TOP_K, "top-k")?,
            center: resolve_opt(self.center, get("center"), "center")?,
            layout_mode,
            display_length: resolve(self.display_length, get("display-length"), 1.0, "display-length")?,
            spring_constant: resolve(self.spring_constant, get("spring-constant"), 1.0, "spring-constant")?,
            newton_tol: resolve(self.newton_tol, get("newton-tol"), 1e-6, "newton-tol")?,
            max_outer_iters: resolve_opt(self.max_outer_iters, get("max-outer-iters"), "max-outer-iters")?,
            component_tiling_gap: resolve_opt(self.tiling_gap, get("tiling-gap"), "tiling-gap")?,
            out_dir,
        })
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Ingest(args) => run_ingest(args),
        Command::Sessionize(args) => run_sessionize(args),
        Command::Graph(args) => run_graph(args),
        Command::Communities(args) => run_communities(args),
        Command::Flow(args) => run_flow(args),
        Command::Layout(args) => run_layout(args),
        Command::Synth(args) => run_synth(args),
        Command::Pipeline(args) => run_pipeline_cmd(args),
    }
}

fn read_posts(path: &PathBuf, format: InputFormat, keep_duplicates: bool) -> CliResult<(Vec<basketflow::ingest::PostRecord>, usize)> {
    let file = fs::File::open(path).map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    let outcome = parse_posts(BufReader::new(file), format)?;
    let skipped = outcome.skipped_count();
    let records = if keep_duplicates {
        outcome.records
    } else {
        dedup_exact(outcome.records)
    };
    Ok((records, skipped))
}

fn write_file(path: &PathBuf, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Input(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    fs::write(path, bytes).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn run_ingest(args: IngestArgs) -> CliResult<()> {
    let (records, skipped) = read_posts(&args.input, args.format, args.keep_duplicates)?;
    let mut bytes = Vec::new();
    write_posts_csv(&mut bytes, &records)?;
    write_file(&args.out, &bytes)?;
    println!(
        "ingest: {} records ({} malformed lines skipped) -> {}",
        records.len(),
        skipped,
        args.out.display()
    );
    Ok(())
}

fn run_sessionize(args: SessionizeArgs) -> CliResult<()> {
    let (records, _) = read_posts(&args.input, args.format, args.keep_duplicates)?;
    let cfg = WindowConfig {
        window_days: args.window_days,
    };
    let sets = sessionize(&records, &cfg)?;
    if sets.is_empty() {
        return Err(CliError::Empty(
            "no sessions formed: every attraction set was a singleton or the input was empty".into(),
        ));
    }
    let count = sets.len();
    write_file(
        &args.out,
        &artifacts::to_json_bytes(&SetsFile::new(args.window_days, sets))?,
    )?;
    println!("sessionize: {} attraction sets -> {}", count, args.out.display());
    Ok(())
}

fn run_graph(args: GraphArgs) -> CliResult<()> {
    let sets_file = SetsFile::load(&args.sets)?;
    let full_graph = build_cooccurrence(&sets_file.sets);
    let mut writer = ArtifactWriter::new(&args.out_dir)?;

    let mut csv_bytes = Vec::new();
    full_graph.write_edge_csv(&mut csv_bytes).map_err(CliError::from)?;
    writer.write(artifacts::EDGES_PRE_PRUNE_CSV, &csv_bytes)?;

    let (graph, stats) = prune(&full_graph, args.min_weight);
    let mut csv_bytes = Vec::new();
    graph.write_edge_csv(&mut csv_bytes).map_err(CliError::from)?;
    writer.write(artifacts::EDGES_POST_PRUNE_CSV, &csv_bytes)?;
    writer.write(
        artifacts::GRAPH_JSON,
        &artifacts::to_json_bytes(&GraphFile::from_graph(&graph, args.min_weight, stats.clone()))?,
    )?;
    if args.dot {
        writer.write(artifacts::GRAPH_DOT, graph.to_dot("cooccurrence").as_bytes())?;
    }
    println!(
        "graph: {} nodes, {} edges after pruning at weight >= {} ({} edges removed) -> {}",
        stats.node_count,
        stats.edge_count,
        args.min_weight,
        stats.removed_edge_count,
        args.out_dir.display()
    );
    Ok(())
}

fn run_communities(args: CommunitiesArgs) -> CliResult<()> {
    let graph = GraphFile::load(&args.graph)?.to_graph()?;
    let cfg = basketflow::communities::DetectConfig {
        seed: args.seed,
        trials: args.trials,
        max_sweeps: args.max_sweeps,
        min_improvement: args.min_improvement,
    };
    let detection = detect_communities(&graph, &cfg)?;
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
    let file = CommunitiesFile {
        schema_version: artifacts::SCHEMA_VERSION,
        l_bits: detection.l_bits,
        w_exit_total: terms.w_exit_total,
        trial_l_values: detection.trial_l_values,
        sweeps_used: detection.sweeps_used,
        modules,
    };
    write_file(&args.out, &artifacts::to_json_bytes(&file)?)?;
    println!(
        "communities: {} modules, L = {:.6} bits -> {}",
        detection.partition.module_count(),
        detection.l_bits,
        args.out.display()
    );
    Ok(())
}

fn run_flow(args: FlowArgs) -> CliResult<()> {
    let graph = GraphFile::load(&args.graph)?.to_graph()?;
    let communities = CommunitiesFile::load(&args.communities)?;
    let partition = communities.partition_for(&graph)?;
    let report = flow_report(&graph, &partition)?;

    let mut writer = ArtifactWriter::new(&args.out_dir)?;
    let mut ranking = Vec::new();
    write_ranking_csv(&mut ranking, &report.nodes).map_err(CliError::from)?;
    print!("{}", format_ranking(&report.nodes, 20));
    writer.write(artifacts::FLOW_RANKING_CSV, &ranking)?;
    writer.write(artifacts::FLOW_REPORT_JSON, &artifacts::to_json_bytes(&FlowFile::new(report))?)?;

    if let Some(center) = &args.center {
        let group = top_connections(&graph, center, args.top_k)?;
        writer.write(
            artifacts::TOP_CONNECTIONS_JSON,
            &artifacts::to_json_bytes(&ConnectionsFile {
                schema_version: artifacts::SCHEMA_VERSION,
                group,
            })?,
        )?;
    }
    println!("flow: reports -> {}", args.out_dir.display());
    Ok(())
}

fn run_layout(args: LayoutArgs) -> CliResult<()> {
    let graph = GraphFile::load(&args.graph)?.to_graph()?;
    let cover = coverage_subgraph(&graph, args.coverage_target, args.max_edges)?;
    let cfg = basketflow::layout::LayoutConfig {
        display_length: args.display_length,
        spring_constant: args.spring_constant,
        newton_tol: args.newton_tol,
        max_outer_iters: args.max_outer_iters,
        component_tiling_gap: args.tiling_gap,
    };
    let layout = layout_graph(&cover, args.mode, &cfg)?;
    let file = layout_to_file(&graph, &cover, args.mode, &layout)?;
    write_file(&args.out, &artifacts::to_json_bytes(&file)?)?;
    println!(
        "layout: {} nodes, {} edges, energy {:.6}, converged: {} -> {}",
        file.nodes.len(),
        file.edges.len(),
        file.final_energy,
        file.converged,
        args.out.display()
    );
    Ok(())
}

fn run_synth(args: SynthArgs) -> CliResult<()> {
    let params = SyntheticParams {
        n_tourists: args.tourists.unwrap_or_else(|| (args.posts / 5).max(1)),
        n_attractions: args.attractions,
        n_posts: args.posts,
        date_start: args.start,
        date_end: args.end,
        popularity_skew: args.skew,
        session_burst_days: args.burst_days,
    };
    let records = generate_synthetic(&params, args.seed)?;
    let mut bytes = Vec::new();
    write_posts_csv(&mut bytes, &records)?;
    write_file(&args.out, &bytes)?;
    println!(
        "synth: {} posts, {} tourists, {} attractions, seed {} -> {}",
        records.len(),
        params.n_tourists,
        params.n_attractions,
        args.seed,
        args.out.display()
    );
    Ok(())
}

fn run_pipeline_cmd(args: PipelineArgs) -> CliResult<()> {
    let cfg = args.into_config()?;
    let manifest = run_pipeline(&cfg)?;
    for phase in &manifest.phases {
        let detail: Vec<String> = phase.counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!("{:<12} {:>6} ms  {}", phase.name, phase.duration_ms, detail.join(" "));
    }
    println!("pipeline: {} artifacts -> {}", manifest.artifacts.len(), cfg.out_dir.display());
    Ok(())
}
