//! Attraction-basket analytics for visit streams.
//!
//! Turns timestamped visit records into baskets of attractions seen
//! together, builds the weighted co-occurrence network, finds communities by
//! minimizing the map equation, and reports flow statistics plus
//! deterministic 2-D layouts:
//!
//! 1. [`ingest`] — parse, validate, or synthesize post records,
//! 2. [`sessionizer`] — time-window sessionization into attraction sets,
//! 3. [`cograph`] — the weighted co-occurrence network and pruning,
//! 4. [`mapequation`] / [`communities`] — the objective and its greedy
//!    minimizer (with an exhaustive oracle for small graphs),
//! 5. [`flowstats`] — flow shares, rankings, coverage subgraphs,
//! 6. [`layout`] — spring-model coordinates over graph distances.

pub mod cograph;
pub mod communities;
pub mod error;
pub mod flowstats;
pub mod ingest;
pub mod layout;
pub mod mapequation;
pub mod sessionizer;

pub use error::{Error, Result};
