//! Discovery run orchestration: pool generation, battle scheduling,
//! batch-boundary aggregation, bans, and meta extraction.
//!
//! Battles inside one aggregation window run in parallel against an
//! immutable (pool, stats snapshot); results are folded sequentially in
//! battle-index order, so completion order never affects the outcome. All
//! randomness is derived from the master seed plus window/battle indices,
//! which is also what makes checkpoint-resume bit-exact.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::AgentKind;
use crate::battle::{run_battle, TurnLog};
use crate::rng::{self, Stream};
use crate::roster::Roster;
use crate::stats::UsageStats;
use crate::teambuilder::{Builder, EpsilonSchedule, ScoreWeights, Team};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Error)]
pub enum DiscoveryError {
    #[error("unknown species {species:?}")]
    UnknownSpecies { species: String },
    #[error("meta size {meta_size} exceeds eligible roster size {eligible}")]
    MetaTooLarge { meta_size: usize, eligible: usize },
    #[error("ABC mode requires initial usage stats")]
    MissingInitialStats,
    #[error("stats are empty; cannot extract a meta")]
    EmptyStats,
    #[error("checkpoint belongs to a different config (hash {found} != {expected})")]
    CheckpointMismatch { found: String, expected: String },
    #[error("stats update interval must be positive and <= total battles")]
    BadInterval,
    #[error(transparent)]
    Build(#[from] crate::teambuilder::BuildError),
    #[error(transparent)]
    Battle(#[from] crate::battle::BattleError),
    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),
}

/// Full configuration of a discovery run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "default_total_battles")]
    pub total_battles: u64,
    #[serde(default = "default_battles_per_month")]
    pub battles_per_month: u64,
    #[serde(default = "default_interval")]
    pub stats_update_interval: u64,
    #[serde(default = "default_pool_size")]
    pub team_pool_size: usize,
    #[serde(default = "default_meta_size")]
    pub meta_size: usize,
    #[serde(default)]
    pub banned: Vec<String>,
    #[serde(default = "default_blanket_ban_tiers")]
    pub blanket_ban_tiers: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    pub agent: AgentKind,
    pub score_weights: ScoreWeights,
    pub epsilon: EpsilonSchedule,
}

fn default_total_battles() -> u64 {
    450_000
}
fn default_battles_per_month() -> u64 {
    150_000
}
fn default_interval() -> u64 {
    1_000
}
fn default_pool_size() -> usize {
    2_500
}
fn default_meta_size() -> usize {
    40
}
fn default_blanket_ban_tiers() -> Vec<String> {
    vec!["LC".to_string()]
}

impl RunConfig {
    /// Extend the ban list; idempotent per species.
    pub fn apply_ban(&mut self, roster: &Roster, species: &[String]) -> Result<(), DiscoveryError> {
        for s in species {
            if roster.index_of(s).is_none() {
                return Err(DiscoveryError::UnknownSpecies { species: s.clone() });
            }
            if !self.banned.contains(s) {
                self.banned.push(s.clone());
            }
        }
        Ok(())
    }
}

/// Resolve the explicit ban list plus blanket-banned tiers into a
/// per-character mask.
pub fn resolve_bans(roster: &Roster, config: &RunConfig) -> Result<Vec<bool>, DiscoveryError> {
    let mut mask = vec![false; roster.len()];
    for s in &config.banned {
        let idx = roster
            .index_of(s)
            .ok_or_else(|| DiscoveryError::UnknownSpecies { species: s.clone() })?;
        mask[idx] = true;
    }
    for c in roster.characters() {
        if let Some(tier) = &c.tier {
            if config.blanket_ban_tiers.iter().any(|t| t == tier) {
                mask[roster.index_of(&c.species).unwrap()] = true;
            }
        }
    }
    Ok(mask)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetaEntry {
    pub species: String,
    pub pickrate: f64,
    pub winrate: f64,
}

/// A full ranking of characters by pickrate; the top `meta_size` entries
/// form the meta set.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetaSnapshot {
    pub ranking: Vec<MetaEntry>,
    pub meta_size: usize,
}

impl MetaSnapshot {
    pub fn meta_set(&self) -> HashSet<&str> {
        self.ranking
            .iter()
            .take(self.meta_size)
            .map(|e| e.species.as_str())
            .collect()
    }

    /// 1-based rank of a species in the full ranking.
    pub fn rank_of(&self, species: &str) -> Option<usize> {
        self.ranking
            .iter()
            .position(|e| e.species == species)
            .map(|p| p + 1)
    }

    /// Build a ranking from (species, weight) pairs, sorting by weight
    /// descending with ties broken by species id.
    pub fn from_weights(entries: Vec<(String, f64)>, meta_size: usize) -> Self {
        let mut ranking: Vec<MetaEntry> = entries
            .into_iter()
            .map(|(species, w)| MetaEntry {
                species,
                pickrate: w,
                winrate: 0.0,
            })
            .collect();
        ranking.sort_by(|a, b| {
            b.pickrate
                .partial_cmp(&a.pickrate)
                .unwrap()
                .then_with(|| a.species.cmp(&b.species))
        });
        Self { ranking, meta_size }
    }
}

/// Rank every character by pickrate (descending), breaking ties by winrate
/// then species id. The top `meta_size` entries form the meta set.
pub fn extract_meta(
    roster: &Roster,
    stats: &UsageStats,
    meta_size: usize,
) -> Result<MetaSnapshot, DiscoveryError> {
    extract_meta_filtered(roster, stats, meta_size, None)
}

/// `extract_meta` restricted to non-banned characters.
pub fn extract_meta_filtered(
    roster: &Roster,
    stats: &UsageStats,
    meta_size: usize,
    banned: Option<&[bool]>,
) -> Result<MetaSnapshot, DiscoveryError> {
    if stats.num_battles() == 0 {
        return Err(DiscoveryError::EmptyStats);
    }
    let mut entries: Vec<MetaEntry> = (0..roster.len())
        .filter(|&x| banned.map_or(true, |m| !m[x]))
        .map(|x| MetaEntry {
            species: roster.species(x).to_string(),
            pickrate: stats.pickrate(x),
            winrate: stats.winrate(x),
        })
        .collect();
    if entries.len() < meta_size {
        return Err(DiscoveryError::MetaTooLarge {
            meta_size,
            eligible: entries.len(),
        });
    }
    entries.sort_by(|a, b| {
        b.pickrate
            .partial_cmp(&a.pickrate)
            .unwrap()
            .then_with(|| b.winrate.partial_cmp(&a.winrate).unwrap())
            .then_with(|| a.species.cmp(&b.species))
    });
    Ok(MetaSnapshot {
        ranking: entries,
        meta_size,
    })
}

/// Resumable run state: raw counts plus the number of battles already
/// folded. Only valid at aggregation boundaries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config_hash: String,
    pub battles_done: u64,
    pub stats: UsageStats,
}

/// Canonical hash of a config, used to guard checkpoint resumption.
pub fn config_hash(config: &RunConfig) -> String {
    use sha2::{Digest, Sha256};
    let canonical = serde_json::to_string(config).expect("config serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    format!("{digest:x}")
}

pub struct DiscoveryOutput {
    pub snapshot: MetaSnapshot,
    pub stats: UsageStats,
    /// Snapshot at each `battles_per_month` boundary.
    pub monthly: Vec<MetaSnapshot>,
}

/// Callback invoked with every battle's turn log when battle logging is on;
/// forces sequential battle execution.
pub type BattleLogSink<'a> = &'a mut dyn FnMut(u64, &[TurnLog]);

/// Run a discovery loop from scratch. ABC-style runs pass the ingested
/// pre-ban stats as `initial_stats`; blank-slate runs pass `None`.
pub fn run_discovery(
    roster: &Roster,
    config: &RunConfig,
    initial_stats: Option<UsageStats>,
) -> Result<DiscoveryOutput, DiscoveryError> {
    let stats = match initial_stats {
        Some(s) => s,
        None => UsageStats::new(roster.len()),
    };
    run_from(roster, config, stats, 0, None)
}

/// Resume a checkpointed run; the checkpoint must match the config.
pub fn resume_discovery(
    roster: &Roster,
    config: &RunConfig,
    checkpoint: Checkpoint,
) -> Result<DiscoveryOutput, DiscoveryError> {
    let expected = config_hash(config);
    if checkpoint.config_hash != expected {
        return Err(DiscoveryError::CheckpointMismatch {
            found: checkpoint.config_hash,
            expected,
        });
    }
    run_from(roster, config, checkpoint.stats, checkpoint.battles_done, None)
}

/// Checkpoint the state of a run after `battles` battles (must be an
/// aggregation boundary; the run executes up to that point).
pub fn run_to_checkpoint(
    roster: &Roster,
    config: &RunConfig,
    initial_stats: Option<UsageStats>,
    battles: u64,
) -> Result<Checkpoint, DiscoveryError> {
    let mut partial = config.clone();
    partial.total_battles = battles;
    let out = run_discovery(roster, &partial, initial_stats)?;
    Ok(Checkpoint {
        config_hash: config_hash(config),
        battles_done: battles,
        stats: out.stats,
    })
}

pub fn run_discovery_logged(
    roster: &Roster,
    config: &RunConfig,
    initial_stats: Option<UsageStats>,
    sink: BattleLogSink<'_>,
) -> Result<DiscoveryOutput, DiscoveryError> {
    let stats = match initial_stats {
        Some(s) => s,
        None => UsageStats::new(roster.len()),
    };
    run_from(roster, config, stats, 0, Some(sink))
}

fn run_from(
    roster: &Roster,
    config: &RunConfig,
    mut stats: UsageStats,
    start_battles: u64,
    mut log_sink: Option<BattleLogSink<'_>>,
) -> Result<DiscoveryOutput, DiscoveryError> {
    if config.stats_update_interval == 0 || config.stats_update_interval > config.total_battles {
        return Err(DiscoveryError::BadInterval);
    }
    let banned = resolve_bans(roster, config)?;
    let eligible = banned.iter().filter(|&&b| !b).count();
    if config.meta_size > eligible {
        return Err(DiscoveryError::MetaTooLarge {
            meta_size: config.meta_size,
            eligible,
        });
    }
    let agent = config.agent.instantiate();
    let mut monthly = Vec::new();
    let mut done = start_battles;

    while done < config.total_battles {
        let window_idx = done / config.stats_update_interval;
        let count = config
            .stats_update_interval
            .min(config.total_battles - done);
        let epsilon = config.epsilon.epsilon_at(done);

        // Meta as of the last aggregation; empty on a true cold start.
        let meta_set: Vec<usize> = if stats.num_battles() > 0 {
            extract_meta_filtered(roster, &stats, config.meta_size, Some(&banned))?
                .ranking
                .iter()
                .take(config.meta_size)
                .map(|e| roster.index_of(&e.species).unwrap())
                .collect()
        } else {
            Vec::new()
        };

        let builder = Builder::new(
            roster,
            &stats,
            &meta_set,
            config.score_weights,
            &banned,
            epsilon,
        );

        // Regenerate the full pool each window, one derived seed per team.
        let pool: Vec<Team> = (0..config.team_pool_size)
            .into_par_iter()
            .map(|i| {
                let seed = rng::derive2(config.seed, Stream::Pool, window_idx, i as u64);
                let mut team_rng = ChaCha8Rng::seed_from_u64(seed);
                builder.build_team(&mut team_rng)
            })
            .collect::<Result<_, _>>()?;

        // Pre-sample team pairs so parallel execution cannot disturb the
        // schedule.
        let mut pair_rng = rng::stream_rng(config.seed, Stream::Pairs, window_idx);
        let pairs: Vec<(usize, usize)> = (0..count)
            .map(|_| {
                let i = pair_rng.gen_range(0..pool.len());
                let mut j = pair_rng.gen_range(0..pool.len());
                while j == i && pool.len() > 1 {
                    j = pair_rng.gen_range(0..pool.len());
                }
                (i, j)
            })
            .collect();

        let run_one = |k: u64, log: Option<&mut Vec<TurnLog>>| {
            let (i, j) = pairs[k as usize];
            let battle_idx = done + k;
            let seed = rng::derive(config.seed, Stream::Battle, battle_idx);
            run_battle(
                roster,
                &pool[i].members,
                &pool[j].members,
                agent.as_ref(),
                agent.as_ref(),
                seed,
                log,
            )
        };

        if let Some(sink) = log_sink.as_deref_mut() {
            // Sequential path when per-turn logs are requested.
            for k in 0..count {
                let mut log = Vec::new();
                let result = run_one(k, Some(&mut log))?;
                sink(done + k, &log);
                stats.record(&result)?;
            }
        } else {
            let results: Vec<_> = (0..count)
                .into_par_iter()
                .map(|k| run_one(k, None))
                .collect::<Result<_, _>>()?;
            for result in &results {
                stats.record(result)?;
            }
        }
        done += count;

        if done % config.battles_per_month == 0 {
            monthly.push(extract_meta_filtered(
                roster,
                &stats,
                config.meta_size,
                Some(&banned),
            )?);
        }
    }

    let snapshot = extract_meta_filtered(roster, &stats, config.meta_size, Some(&banned))?;
    Ok(DiscoveryOutput {
        snapshot,
        stats,
        monthly,
    })
}
