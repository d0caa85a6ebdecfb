//! Grid search over the generalized score weights (c1, c2, c3).
//!
//! Each row runs an independent ABC discovery whose seed is derived from
//! the master seed and the weight triple itself, so rows are order
//! independent and duplicate triples reproduce identical metrics.

use serde::Serialize;

use crate::discovery::{run_discovery, MetaSnapshot, RunConfig};
use crate::metrics::{edit_distance, overlap};
use crate::rng::{self, Stream};
use crate::roster::Roster;
use crate::stats::UsageStats;
use crate::teambuilder::ScoreWeights;

use super::report::to_csv;
use super::HarnessError;

/// The default 8-row weight grid: each component alone, pairwise halves,
/// and the reference (0.5, 0.25, 0.25) row, plus the all-zero base row.
pub const DEFAULT_GRID: [(f64, f64, f64); 8] = [
    (0.0, 0.0, 0.0),
    (1.0, 0.0, 0.0),
    (0.0, 1.0, 0.0),
    (0.0, 0.0, 1.0),
    (0.5, 0.5, 0.0),
    (0.5, 0.0, 0.5),
    (0.0, 0.5, 0.5),
    (0.5, 0.25, 0.25),
];

#[derive(Debug, Clone, Serialize)]
pub struct GridRow {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub edit_distance: f64,
    pub overlap: f64,
}

/// Seed for one grid row, a pure function of (master, triple).
pub fn row_seed(master: u64, triple: (f64, f64, f64)) -> u64 {
    let a = triple.0.to_bits() ^ triple.1.to_bits().rotate_left(21);
    rng::derive2(master, Stream::Grid, a, triple.2.to_bits())
}

/// Run one ABC discovery per weight triple and score each discovered meta
/// against `reference`.
pub fn run_grid_search(
    roster: &Roster,
    base_config: &RunConfig,
    initial_stats: &UsageStats,
    reference: &MetaSnapshot,
    grid: &[(f64, f64, f64)],
) -> Result<Vec<GridRow>, HarnessError> {
    if grid.is_empty() {
        return Err(HarnessError::EmptyGrid);
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &(c1, c2, c3) in grid {
        let mut config = base_config.clone();
        config.score_weights = ScoreWeights {
            c1,
            c2,
            c3,
            ..ScoreWeights::abc()
        };
        config.seed = row_seed(base_config.seed, (c1, c2, c3));
        let out = run_discovery(roster, &config, Some(initial_stats.clone()))?;
        rows.push(GridRow {
            c1,
            c2,
            c3,
            edit_distance: edit_distance(reference, &out.snapshot)?,
            overlap: overlap(reference, &out.snapshot)?,
        });
    }
    Ok(rows)
}

pub fn grid_csv(rows: &[GridRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                format!("{}", r.c1),
                format!("{}", r.c2),
                format!("{}", r.c3),
                format!("{:.6}", r.edit_distance),
                format!("{:.6}", r.overlap),
            ]
        })
        .collect();
    to_csv(&["c1", "c2", "c3", "edit_distance", "overlap"], &body)
}
