//! Phase 1: turn each tourist's time-ordered posts into attraction sets.
//!
//! Consecutive posts by the same tourist whose date gap is within the window
//! join one set (the gap rule chains pairwise: each post is compared with its
//! immediate predecessor, not with the set's first post). Sets that end up
//! with fewer than two distinct attractions carry no pair information and are
//! dropped.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::PostRecord;

/// Sessionization window: the largest day gap between consecutive posts that
/// still joins them into one set (inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub window_days: u32,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { window_days: 7 }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_days == 0 {
            return Err(Error::InvalidParam {
                field: "window_days",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// One basket: the distinct attractions a tourist posted about within one
/// time window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttractionSet {
    pub tourist_id: String,
    pub attractions: BTreeSet<String>,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
    /// Raw posts behind the set, duplicates included.
    pub source_post_count: usize,
}

impl AttractionSet {
    pub fn distinct_attractions(&self) -> usize {
        self.attractions.len()
    }
}

/// Groups records by tourist and sorts each list by date, keeping input
/// order on same-day ties (stable sort).
pub fn order_posts(records: &[PostRecord]) -> BTreeMap<String, Vec<PostRecord>> {
    let mut by_tourist: BTreeMap<String, Vec<PostRecord>> = BTreeMap::new();
    for rec in records {
        by_tourist.entry(rec.tourist_id.clone()).or_default().push(rec.clone());
    }
    for posts in by_tourist.values_mut() {
        posts.sort_by_key(|p| p.date);
    }
    by_tourist
}

/// Scans each tourist's ordered posts and splits them into attraction sets.
///
/// A date gap `<= window_days` between consecutive posts extends the current
/// set; a larger gap closes it and opens a new one. Output is canonical:
/// tourists in id order, each tourist's sets in chronological order.
pub fn build_attraction_sets(
    ordered: &BTreeMap<String, Vec<PostRecord>>,
    cfg: &WindowConfig,
) -> Vec<AttractionSet> {
    let window = i64::from(cfg.window_days);
    let mut sets = Vec::new();
    for (tourist, posts) in ordered {
        debug_assert!(posts.windows(2).all(|w| w[0].date <= w[1].date));
        let mut current: Option<AttractionSet> = None;
        for post in posts {
            match current.as_mut() {
                Some(set) if (post.date - set.last_date).num_days() <= window => {
                    set.attractions.insert(post.attraction_id.clone());
                    set.last_date = post.date;
                    set.source_post_count += 1;
                }
                _ => {
                    if let Some(done) = current.take() {
                        sets.push(done);
                    }
                    current = Some(AttractionSet {
                        tourist_id: tourist.clone(),
                        attractions: BTreeSet::from([post.attraction_id.clone()]),
                        first_date: post.date,
                        last_date: post.date,
                        source_post_count: 1,
                    });
                }
            }
        }
        if let Some(done) = current.take() {
            sets.push(done);
        }
    }
    sets
}

/// Retains exactly the sets with at least two distinct attractions.
pub fn drop_singletons(sets: Vec<AttractionSet>) -> Vec<AttractionSet> {
    sets.into_iter().filter(|s| s.distinct_attractions() >= 2).collect()
}

/// Full Phase 1: order, window-scan, drop singletons.
pub fn sessionize(records: &[PostRecord], cfg: &WindowConfig) -> Result<Vec<AttractionSet>> {
    cfg.validate()?;
    Ok(drop_singletons(build_attraction_sets(&order_posts(records), cfg)))
}
