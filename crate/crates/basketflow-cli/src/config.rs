//! Pipeline configuration: defaults, the key-value config file, and the
//! flag-over-file resolution.
//!
//! A config file supplies any pipeline flag as `key = value` (kebab-case
//! keys, `#` comments); command-line flags override file entries, and
//! built-in defaults fill the rest. All randomness derives from the single
//! `seed` (community detection trial `t` uses `seed + t`).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use basketflow::communities::DetectConfig;
use basketflow::ingest::InputFormat;
use basketflow::layout::{EdgeLengthMode, LayoutConfig};
use basketflow::sessionizer::WindowConfig;

use crate::{CliError, CliResult};

pub const DEFAULT_WINDOW_DAYS: u32 = 7;
pub const DEFAULT_MIN_EDGE_WEIGHT: u64 = 6;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TRIALS: usize = 10;
pub const DEFAULT_MAX_SWEEPS: usize = 100;
pub const DEFAULT_MIN_IMPROVEMENT: f64 = 1e-10;
pub const DEFAULT_COVERAGE_TARGET_PCT: f64 = 80.0;
pub const DEFAULT_TOP_K: usize = 5;

/// Everything one `pipeline` run needs; serialized verbatim into the
/// manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub format: InputFormat,
    pub keep_duplicates: bool,
    pub window_days: u32,
    pub min_edge_weight: u64,
    pub seed: u64,
    pub trials: usize,
    pub max_sweeps: usize,
    pub min_improvement: f64,
    pub coverage_target_pct: f64,
    pub max_layout_edges: Option<usize>,
    pub top_k: usize,
    pub center: Option<String>,
    pub layout_mode: EdgeLengthMode,
    pub display_length: f64,
    pub spring_constant: f64,
    pub newton_tol: f64,
    pub max_outer_iters: Option<usize>,
    pub component_tiling_gap: Option<f64>,
    pub out_dir: PathBuf,
}

impl PipelineConfig {
    pub fn window(&self) -> WindowConfig {
        WindowConfig {
            window_days: self.window_days,
        }
    }

    pub fn detect(&self) -> DetectConfig {
        DetectConfig {
            seed: self.seed,
            trials: self.trials,
            max_sweeps: self.max_sweeps,
            min_improvement: self.min_improvement,
        }
    }

    pub fn layout(&self) -> LayoutConfig {
        LayoutConfig {
            display_length: self.display_length,
            spring_constant: self.spring_constant,
            newton_tol: self.newton_tol,
            max_outer_iters: self.max_outer_iters,
            component_tiling_gap: self.component_tiling_gap,
        }
    }
}

pub fn parse_format(s: &str) -> Result<InputFormat, String> {
    match s {
        "csv" => Ok(InputFormat::Csv),
        "jsonl" | "json-lines" => Ok(InputFormat::JsonLines),
        other => Err(format!("unknown format '{other}' (expected csv or jsonl)")),
    }
}

pub fn parse_layout_mode(s: &str) -> Result<EdgeLengthMode, String> {
    match s {
        "inverse-weight" => Ok(EdgeLengthMode::InverseWeight),
        "unit" => Ok(EdgeLengthMode::Unit),
        other => Err(format!("unknown layout mode '{other}' (expected inverse-weight or unit)")),
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are
/// ignored. Unknown keys are rejected so typos do not silently fall back to
/// defaults.
pub fn parse_config_file(text: &str) -> CliResult<BTreeMap<String, String>> {
    const KNOWN: &[&str] = &[
        "input",
        "format",
        "keep-duplicates",
        "window-days",
        "min-weight",
        "seed",
        "trials",
        "max-sweeps",
        "min-improvement",
        "coverage-target",
        "max-layout-edges",
        "top-k",
        "center",
        "layout-mode",
        "display-length",
        "spring-constant",
        "newton-tol",
        "max-outer-iters",
        "tiling-gap",
        "out-dir",
    ];
    let mut map = BTreeMap::new();
    for (number, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected 'key = value', got '{raw}'",
                number + 1
            )));
        };
        let key = key.trim().to_string();
        if !KNOWN.contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "config line {}: unknown key '{key}'",
                number + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// Flag-over-file-over-default resolution for one field.
pub fn resolve<T: FromStr + Clone>(
    cli: Option<T>,
    file: Option<&String>,
    default: T,
    key: &'static str,
) -> CliResult<T> {
    if let Some(value) = cli {
        return Ok(value);
    }
    match file {
        Some(text) => text
            .parse::<T>()
            .map_err(|_| CliError::Usage(format!("config value for '{key}' is not valid: '{text}'"))),
        None => Ok(default),
    }
}

/// Like [`resolve`] but the field itself is optional.
pub fn resolve_opt<T: FromStr + Clone>(
    cli: Option<T>,
    file: Option<&String>,
    key: &'static str,
) -> CliResult<Option<T>> {
    if cli.is_some() {
        return Ok(cli);
    }
    match file {
        Some(text) => text
            .parse::<T>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("config value for '{key}' is not valid: '{text}'"))),
        None => Ok(None),
    }
}
