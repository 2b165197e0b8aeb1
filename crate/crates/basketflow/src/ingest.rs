//! Post-record ingestion: parsing, validation, exact-duplicate collapse, and
//! synthetic data generation.
//!
//! The only data entry point of the pipeline. A post record carries three
//! values: a tourist identifier, an attraction identifier, and a submission
//! date at day resolution. Malformed lines in an input stream are skipped and
//! counted, never fatal; an unreadable stream is.

use std::collections::HashSet;
use std::io::{self, BufRead, Write};

use chrono::{Duration, NaiveDate};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One geo-tagged post: who, where, when (day resolution).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PostRecord {
    pub tourist_id: String,
    pub attraction_id: String,
    pub date: NaiveDate,
}

impl PostRecord {
    /// Builds a record, trimming whitespace and rejecting empty identifiers.
    pub fn new(tourist_id: &str, attraction_id: &str, date: NaiveDate) -> Result<Self> {
        let tourist_id = tourist_id.trim();
        let attraction_id = attraction_id.trim();
        if tourist_id.is_empty() {
            return Err(Error::InvalidParam {
                field: "tourist_id",
                reason: "empty after trimming".into(),
            });
        }
        if attraction_id.is_empty() {
            return Err(Error::InvalidParam {
                field: "attraction_id",
                reason: "empty after trimming".into(),
            });
        }
        Ok(Self {
            tourist_id: tourist_id.to_string(),
            attraction_id: attraction_id.to_string(),
            date,
        })
    }
}

/// Wire format of a post stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    /// Header `tourist_id,attraction_id,date`, ISO-8601 dates, UTF-8, LF.
    Csv,
    /// One JSON object per line with the same three keys.
    JsonLines,
}

/// A skipped input line and the reason it was rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkippedLine {
    pub line: u64,
    pub reason: String,
}

/// Result of parsing a post stream: well-formed records in input order plus
/// the lines that were dropped.
#[derive(Debug, Clone, Default)]
pub struct ParseOutcome {
    pub records: Vec<PostRecord>,
    pub skipped: Vec<SkippedLine>,
}

impl ParseOutcome {
    pub fn skipped_count(&self) -> usize {
        self.skipped.len()
    }
}

pub const CSV_HEADER: [&str; 3] = ["tourist_id", "attraction_id", "date"];

/// Parses a date at day resolution. Time-of-day suffixes (`T..` or ` ..`)
/// are accepted and ignored.
fn parse_date_lenient(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    let head = match s.get(..10) {
        Some(head) if s.len() > 10 => {
            let sep = s.as_bytes()[10];
            if sep != b'T' && sep != b' ' {
                return None;
            }
            head
        }
        _ => s,
    };
    NaiveDate::parse_from_str(head, "%Y-%m-%d").ok()
}

fn record_from_fields(tourist: &str, attraction: &str, date: &str) -> std::result::Result<PostRecord, String> {
    let date = parse_date_lenient(date).ok_or_else(|| format!("invalid date '{}'", date.trim()))?;
    PostRecord::new(tourist, attraction, date).map_err(|e| e.to_string())
}

/// Parses a post stream in the given format.
///
/// Every well-formed record is returned in input order; malformed lines are
/// recorded in [`ParseOutcome::skipped`]. Only an unreadable stream or a
/// wrong CSV header is fatal.
pub fn parse_posts<R: io::Read>(reader: R, format: InputFormat) -> Result<ParseOutcome> {
    match format {
        InputFormat::Csv => parse_csv(reader),
        InputFormat::JsonLines => parse_json_lines(reader),
    }
}

fn parse_csv<R: io::Read>(reader: R) -> Result<ParseOutcome> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let headers = rdr.headers().map_err(io_or_format)?.clone();
    let names: Vec<String> = headers
        .iter()
        .map(|h| h.trim().trim_start_matches('\u{feff}').to_string())
        .collect();
    if names != CSV_HEADER {
        return Err(Error::Format(format!(
            "expected CSV header '{}', got '{}'",
            CSV_HEADER.join(","),
            names.join(",")
        )));
    }

    let mut outcome = ParseOutcome::default();
    let mut records = rdr.records();
    loop {
        // Line numbers come from the reader position so skipped entries can
        // be reported against the source file.
        let line = records.reader().position().line();
        match records.next() {
            None => break,
            Some(Ok(row)) => {
                if row.len() == 1 && row[0].trim().is_empty() {
                    continue;
                }
                if row.len() != 3 {
                    outcome.skipped.push(SkippedLine {
                        line,
                        reason: format!("expected 3 fields, got {}", row.len()),
                    });
                    continue;
                }
                match record_from_fields(&row[0], &row[1], &row[2]) {
                    Ok(rec) => outcome.records.push(rec),
                    Err(reason) => outcome.skipped.push(SkippedLine { line, reason }),
                }
            }
            Some(Err(err)) => {
                if let csv::ErrorKind::Io(io_err) = err.into_kind() {
                    return Err(Error::Io(io_err));
                }
                outcome.skipped.push(SkippedLine {
                    line,
                    reason: "unparseable CSV record".into(),
                });
            }
        }
    }
    Ok(outcome)
}

fn io_or_format(err: csv::Error) -> Error {
    match err.into_kind() {
        csv::ErrorKind::Io(io_err) => Error::Io(io_err),
        other => Error::Format(format!("{other:?}")),
    }
}

#[derive(Deserialize)]
struct RawJsonPost {
    tourist_id: String,
    attraction_id: String,
    date: String,
}

fn parse_json_lines<R: io::Read>(reader: R) -> Result<ParseOutcome> {
    let mut outcome = ParseOutcome::default();
    for (idx, line) in io::BufReader::new(reader).lines().enumerate() {
        let line_no = idx as u64 + 1;
        let text = line?; // i/o failure is fatal
        if text.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RawJsonPost>(&text) {
            Ok(raw) => match record_from_fields(&raw.tourist_id, &raw.attraction_id, &raw.date) {
                Ok(rec) => outcome.records.push(rec),
                Err(reason) => outcome.skipped.push(SkippedLine { line: line_no, reason }),
            },
            Err(err) => outcome.skipped.push(SkippedLine {
                line: line_no,
                reason: format!("invalid JSON: {err}"),
            }),
        }
    }
    Ok(outcome)
}

/// Writes records as CSV in the canonical wire format.
pub fn write_posts_csv<W: Write>(writer: W, records: &[PostRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(CSV_HEADER).map_err(io_or_format)?;
    for rec in records {
        wtr.write_record([
            rec.tourist_id.as_str(),
            rec.attraction_id.as_str(),
            &rec.date.format("%Y-%m-%d").to_string(),
        ])
        .map_err(io_or_format)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Collapses exact duplicate (tourist, attraction, date) triples, keeping the
/// first occurrence and preserving input order. Repeated identical posts
/// carry no co-occurrence information.
pub fn dedup_exact(records: Vec<PostRecord>) -> Vec<PostRecord> {
    let mut seen: HashSet<PostRecord> = HashSet::with_capacity(records.len());
    let mut out = Vec::with_capacity(records.len());
    for rec in records {
        if seen.insert(rec.clone()) {
            out.push(rec);
        }
    }
    out
}

/// Parameters of the synthetic post generator.
///
/// Attraction popularity follows a power law with exponent `popularity_skew`
/// (0 = uniform); each tourist's posts arrive in bursts spanning at most
/// `session_burst_days` days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticParams {
    pub n_tourists: usize,
    pub n_attractions: usize,
    pub n_posts: usize,
    /// Inclusive start of the submission date range.
    pub date_start: NaiveDate,
    /// Inclusive end of the submission date range.
    pub date_end: NaiveDate,
    pub popularity_skew: f64,
    pub session_burst_days: u32,
}

impl SyntheticParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_tourists == 0 {
            return Err(invalid("n_tourists", "must be positive"));
        }
        if self.n_attractions == 0 {
            return Err(invalid("n_attractions", "must be positive"));
        }
        // n_posts == 0 is the identity case and short-circuits generation.
        if self.n_posts > 0 && self.n_posts < self.n_tourists {
            return Err(invalid("n_posts", "must be at least n_tourists"));
        }
        if self.date_start > self.date_end {
            return Err(invalid("date_range", "start is after end"));
        }
        if !self.popularity_skew.is_finite() || self.popularity_skew < 0.0 {
            return Err(invalid("popularity_skew", "must be a finite value >= 0"));
        }
        if self.session_burst_days == 0 {
            return Err(invalid("session_burst_days", "must be positive"));
        }
        Ok(())
    }
}

fn invalid(field: &'static str, reason: &str) -> Error {
    Error::InvalidParam {
        field,
        reason: reason.to_string(),
    }
}

fn tourist_id(index: usize) -> String {
    format!("t{index:06}")
}

fn attraction_id(index: usize) -> String {
    format!("a{index:05}")
}

/// Generates a deterministic synthetic post stream.
///
/// Identical `(params, seed)` yield byte-identical record lists. Attraction
/// draws follow rank weights `(rank+1)^-popularity_skew`; each tourist's
/// posts are grouped into bursts whose dates span at most
/// `session_burst_days` days.
pub fn generate_synthetic(params: &SyntheticParams, seed: u64) -> Result<Vec<PostRecord>> {
    params.validate()?;
    if params.n_posts == 0 {
        return Ok(Vec::new());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Cumulative popularity weights over attraction ranks.
    let mut cumulative = Vec::with_capacity(params.n_attractions);
    let mut total = 0.0f64;
    for rank in 0..params.n_attractions {
        total += ((rank + 1) as f64).powf(-params.popularity_skew);
        cumulative.push(total);
    }

    let draw_attraction = |rng: &mut ChaCha8Rng| -> usize {
        let x = rng.gen::<f64>() * total;
        cumulative.partition_point(|&c| c <= x).min(params.n_attractions - 1)
    };

    // Multinomial assignment of posts to tourists.
    let mut posts_per_tourist = vec![0usize; params.n_tourists];
    for _ in 0..params.n_posts {
        posts_per_tourist[rng.gen_range(0..params.n_tourists)] += 1;
    }

    let span_days = (params.date_end - params.date_start).num_days() as u64;
    let burst_window = u64::from(params.session_burst_days).min(span_days + 1);
    let max_burst_start = span_days + 1 - burst_window;

    let mut records = Vec::with_capacity(params.n_posts);
    for (t, &count) in posts_per_tourist.iter().enumerate() {
        let tid = tourist_id(t);
        let mut remaining = count;
        while remaining > 0 {
            let burst_size = (1 + rng.gen_range(0..4usize)).min(remaining);
            let burst_start = rng.gen_range(0..=max_burst_start);
            for _ in 0..burst_size {
                let offset = burst_start + rng.gen_range(0..burst_window);
                let date = params.date_start + Duration::days(offset as i64);
                records.push(PostRecord {
                    tourist_id: tid.clone(),
                    attraction_id: attraction_id(draw_attraction(&mut rng)),
                    date,
                });
            }
            remaining -= burst_size;
        }
    }
    Ok(records)
}
