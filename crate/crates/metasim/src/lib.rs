//! Metagame discovery engine: seeded 6v6 battle simulation driven by an
//! adaptive, statistics-driven team builder, with metrics comparing the
//! discovered meta against a reference meta.
//!
//! Module map:
//! - [`roster`]: characters, moves, type chart, tier labels.
//! - [`battle`]: deterministic single-battle resolution.
//! - [`agents`]: random and heuristic decision policies.
//! - [`stats`]: pick/win/co-win counts and derived rates.
//! - [`teambuilder`]: epsilon-greedy score-driven team generation.
//! - [`discovery`]: the batched discovery loop, bans, checkpoints.
//! - [`metrics`]: overlap, edit distance, rank correlation, tier capture.
//! - [`ingestion`]: usage-table parsing and seeding of initial stats.
//! - [`harness`]: scenarios, grid search, fixture generation, reports.

pub mod agents;
pub mod battle;
pub mod discovery;
pub mod harness;
pub mod ingestion;
pub mod metrics;
pub mod rng;
pub mod roster;
pub mod stats;
pub mod teambuilder;
