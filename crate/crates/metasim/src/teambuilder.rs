//! Score-driven team generation with an epsilon-greedy pick policy.
//!
//! Every character in the pool is scored against the current meta and the
//! partially built team; picks are sampled proportionally to those scores,
//! with an epsilon chance of sampling by inverse pickrate instead.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::roster::{self, Roster, TypeId};
use crate::stats::{PopNormalizer, UsageStats};

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("no eligible characters to sample")]
    NoEligible,
    #[error("only {available} eligible characters, need {needed}")]
    TooFewEligible { available: usize, needed: usize },
    #[error("meta set is empty")]
    EmptyMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMode {
    /// Pickrate-weighted domain score (product form).
    Abc,
    /// Winrate-anchored additive score for blank-slate discovery.
    Bsd,
}

/// Score-function weights. `c1..c3` weight BST / meta type value / type
/// value inside the ABC product; `a..c` weight the same terms in the BSD
/// sum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScoreWeights {
    pub mode: ScoreMode,
    #[serde(default = "one")]
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
    #[serde(default)]
    pub c3: f64,
    #[serde(default = "half")]
    pub a: f64,
    #[serde(default = "quarter")]
    pub b: f64,
    #[serde(default = "quarter")]
    pub c: f64,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn quarter() -> f64 {
    0.25
}

impl ScoreWeights {
    /// Pickrate x BST, the default ABC score.
    pub fn abc() -> Self {
        Self {
            mode: ScoreMode::Abc,
            c1: 1.0,
            c2: 0.0,
            c3: 0.0,
            a: 0.5,
            b: 0.25,
            c: 0.25,
        }
    }

    /// Generalized ABC score with explicit component weights.
    pub fn abc_grid(c1: f64, c2: f64, c3: f64) -> Self {
        Self {
            c1,
            c2,
            c3,
            ..Self::abc()
        }
    }

    pub fn bsd() -> Self {
        Self {
            mode: ScoreMode::Bsd,
            ..Self::abc()
        }
    }
}

/// Linear epsilon decay from `start` to `end` over `decay_battles`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_battles: u64,
}

impl EpsilonSchedule {
    pub fn abc() -> Self {
        Self {
            start: 0.001,
            end: 0.001,
            decay_battles: 0,
        }
    }

    pub fn bsd() -> Self {
        Self {
            start: 1.0,
            end: 0.001,
            decay_battles: 20_000,
        }
    }

    pub fn epsilon_at(&self, battles_elapsed: u64) -> f64 {
        if battles_elapsed >= self.decay_battles || self.decay_battles == 0 {
            return self.end;
        }
        let t = battles_elapsed as f64 / self.decay_battles as f64;
        self.start + (self.end - self.start) * t
    }
}

/// Six distinct dense indices in pick order; slot 0 leads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Team {
    pub members: [usize; 6],
}

/// Per-character value of types strong against the current meta: the group
/// vector of all meta members' types (a multiset), assigned to characters
/// with dual types averaged. Empty meta contributes zero.
pub fn meta_type_value(roster: &Roster, meta_set: &[usize]) -> Vec<f64> {
    let group: Vec<TypeId> = meta_set
        .iter()
        .flat_map(|&c| roster.character(c).types.iter().copied())
        .collect();
    if group.is_empty() {
        return vec![0.0; roster.len()];
    }
    let per_type = roster::type_vector(roster.chart(), &group).expect("non-empty group");
    roster::assign_to_characters(roster, &per_type)
}

/// Per-character value of types that counter the counters to the current
/// team: compile the team's types, compile the types strong against them,
/// and take the group vector of that counter group. Zero when the team is
/// empty or nothing counters it.
pub fn type_value(roster: &Roster, current_team: &[usize]) -> Vec<f64> {
    let team_types: Vec<TypeId> = current_team
        .iter()
        .flat_map(|&c| roster.character(c).types.iter().copied())
        .collect();
    let counters: Vec<TypeId> = team_types
        .iter()
        .flat_map(|&d| roster.chart().strong_against(d))
        .collect();
    if counters.is_empty() {
        return vec![0.0; roster.len()];
    }
    let per_type = roster::type_vector(roster.chart(), &counters).expect("non-empty group");
    roster::assign_to_characters(roster, &per_type)
}

/// Immutable scoring context for one (stats snapshot, meta, config) tuple.
/// Team-independent terms are computed once; team-dependent terms (type
/// value, popularity) are recomputed after every pick.
pub struct Builder<'a> {
    roster: &'a Roster,
    stats: &'a UsageStats,
    weights: ScoreWeights,
    banned: &'a [bool],
    epsilon: f64,
    bst: Vec<f64>,
    pickrate: Vec<f64>,
    winrate: Vec<f64>,
    mtv: Vec<f64>,
    inverse_pick: Vec<f64>,
    pop_norm: PopNormalizer,
}

impl<'a> Builder<'a> {
    pub fn new(
        roster: &'a Roster,
        stats: &'a UsageStats,
        meta_set: &[usize],
        weights: ScoreWeights,
        banned: &'a [bool],
        epsilon: f64,
    ) -> Self {
        let n = roster.len();
        let bst: Vec<f64> = (0..n).map(|i| roster.base_stat_total(i)).collect();
        let pickrate: Vec<f64> = (0..n).map(|i| stats.pickrate(i)).collect();
        let winrate: Vec<f64> = (0..n).map(|i| stats.winrate(i)).collect();
        let mtv = meta_type_value(roster, meta_set);
        // Inverse pickrate with a half-count floor so never-picked
        // characters stay finite and maximally favored.
        let delta = 1.0 / (2.0 * stats.num_battles().max(1) as f64);
        let inverse_pick: Vec<f64> = pickrate.iter().map(|&p| 1.0 / (p + delta)).collect();
        Self {
            roster,
            stats,
            weights,
            banned,
            epsilon,
            bst,
            pickrate,
            winrate,
            mtv,
            inverse_pick,
            pop_norm: stats.pop_normalizer(),
        }
    }

    /// Raw (pre-ban) scores for every character given the current partial
    /// team. Banned characters are zeroed after computation.
    pub fn scores(&self, current_team: &[usize]) -> Vec<f64> {
        let n = self.roster.len();
        let tv = if current_team.is_empty() {
            vec![0.0; n]
        } else {
            type_value(self.roster, current_team)
        };
        let mut out = Vec::with_capacity(n);
        for x in 0..n {
            let s = match self.weights.mode {
                ScoreMode::Abc => {
                    let w = &self.weights;
                    // The all-zero weight row means the inner term is
                    // dropped entirely: pure pickrate.
                    if w.c1 == 0.0 && w.c2 == 0.0 && w.c3 == 0.0 {
                        self.pickrate[x]
                    } else {
                        self.pickrate[x] * (w.c1 * self.bst[x] + w.c2 * self.mtv[x] + w.c3 * tv[x])
                    }
                }
                ScoreMode::Bsd => {
                    let w = &self.weights;
                    let pop = if current_team.is_empty() {
                        0.0
                    } else {
                        self.stats
                            .popularity_with(&self.pop_norm, x, current_team)
                            .expect("team non-empty")
                    };
                    self.winrate[x] + w.a * self.bst[x] + w.b * self.mtv[x] + w.c * tv[x] + pop
                }
            };
            out.push(s);
        }
        for (x, s) in out.iter_mut().enumerate() {
            if self.banned[x] {
                *s = 0.0;
            }
        }
        out
    }

    pub fn sample_pick(
        &self,
        scores: &[f64],
        already_picked: &[usize],
        rng: &mut ChaCha8Rng,
    ) -> Result<usize, BuildError> {
        sample_pick(
            scores,
            &self.inverse_pick,
            self.epsilon,
            already_picked,
            self.banned,
            rng,
        )
    }

    /// Six sequential epsilon-greedy picks, recomputing team-dependent
    /// score terms after each one.
    pub fn build_team(&self, rng: &mut ChaCha8Rng) -> Result<Team, BuildError> {
        let eligible = (0..self.roster.len()).filter(|&x| !self.banned[x]).count();
        if eligible < 6 {
            return Err(BuildError::TooFewEligible {
                available: eligible,
                needed: 6,
            });
        }
        let mut picked: Vec<usize> = Vec::with_capacity(6);
        for _ in 0..6 {
            let scores = self.scores(&picked);
            let pick = self.sample_pick(&scores, &picked, rng)?;
            picked.push(pick);
        }
        let mut members = [0usize; 6];
        members.copy_from_slice(&picked);
        Ok(Team { members })
    }
}

/// Epsilon-greedy weighted pick over eligible characters: with probability
/// `1 - epsilon` proportional to `scores`, otherwise proportional to
/// `inverse_pick`. An all-zero score vector falls back to the epsilon
/// branch (the cold-start case).
pub fn sample_pick(
    scores: &[f64],
    inverse_pick: &[f64],
    epsilon: f64,
    already_picked: &[usize],
    banned: &[bool],
    rng: &mut ChaCha8Rng,
) -> Result<usize, BuildError> {
    let eligible: Vec<usize> = (0..scores.len())
        .filter(|&x| !banned[x] && !already_picked.contains(&x))
        .collect();
    if eligible.is_empty() {
        return Err(BuildError::NoEligible);
    }
    let explore = epsilon > 0.0 && rng.gen_bool(epsilon.min(1.0));
    let weights: Vec<f64> = if explore {
        eligible.iter().map(|&x| inverse_pick[x]).collect()
    } else {
        let w: Vec<f64> = eligible.iter().map(|&x| scores[x]).collect();
        if w.iter().sum::<f64>() > 0.0 {
            w
        } else {
            eligible.iter().map(|&x| inverse_pick[x]).collect()
        }
    };
    Ok(eligible[weighted_index(&weights, rng)])
}

/// Sample an index proportionally to non-negative weights.
fn weighted_index(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0, "weighted_index needs positive mass");
    let mut target = rng.gen_range(0.0..total);
    for (i, &w) in weights.iter().enumerate() {
        target -= w;
        if target < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}
