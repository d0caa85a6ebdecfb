//! Usage statistics driving the team builder: pickrates, winrates, and the
//! co-win popularity matrix.
//!
//! Stats are mutated only by a single aggregator at batch boundaries; the
//! team builder reads immutable snapshots. Checkpoints serialize the raw
//! counts so runs can be resumed bit-exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::battle::{BattleResult, Side};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("duplicate character {index} within one side of a battle result")]
    DuplicateParticipant { index: usize },
    #[error("participant index {index} out of range for roster of {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("current team is empty")]
    EmptyTeam,
}

/// Raw pick/win/co-win counts over the roster.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct UsageStats {
    num_battles: u64,
    picks: Vec<u64>,
    wins: Vec<u64>,
    /// N x N co-win counts, row-major; symmetric with a zero diagonal.
    pop: Vec<u64>,
}

/// Global min/max over the off-diagonal popularity entries, fixed once per
/// snapshot so every popularity read within a batch sees the same scaling.
#[derive(Debug, Clone, Copy)]
pub struct PopNormalizer {
    min: u64,
    max: u64,
}

impl PopNormalizer {
    pub fn normalize(&self, count: u64) -> f64 {
        if self.max == self.min {
            0.0
        } else {
            (count - self.min) as f64 / (self.max - self.min) as f64
        }
    }
}

impl UsageStats {
    pub fn new(roster_len: usize) -> Self {
        Self {
            num_battles: 0,
            picks: vec![0; roster_len],
            wins: vec![0; roster_len],
            pop: vec![0; roster_len * roster_len],
        }
    }

    /// Build from pre-computed counts (used when seeding from ingested usage
    /// data, where wins and co-wins are unavailable).
    pub fn from_counts(num_battles: u64, picks: Vec<u64>) -> Self {
        let n = picks.len();
        Self {
            num_battles,
            picks,
            wins: vec![0; n],
            pop: vec![0; n * n],
        }
    }

    pub fn roster_len(&self) -> usize {
        self.picks.len()
    }

    pub fn num_battles(&self) -> u64 {
        self.num_battles
    }

    pub fn picks(&self, x: usize) -> u64 {
        self.picks[x]
    }

    pub fn wins(&self, x: usize) -> u64 {
        self.wins[x]
    }

    pub fn pop_count(&self, x: usize, y: usize) -> u64 {
        self.pop[x * self.roster_len() + y]
    }

    /// Fold one battle result into the counts. Each battle contributes 12
    /// picks, 6 wins, and C(6,2) = 15 unordered co-win pairs.
    pub fn record(&mut self, result: &BattleResult) -> Result<(), StatsError> {
        let n = self.roster_len();
        for side in [Side::A, Side::B] {
            let members = result.side(side);
            for (i, &x) in members.iter().enumerate() {
                if x >= n {
                    return Err(StatsError::IndexOutOfRange { index: x, len: n });
                }
                if members[..i].contains(&x) {
                    return Err(StatsError::DuplicateParticipant { index: x });
                }
            }
        }
        self.num_battles += 1;
        for &x in result.participants.iter() {
            self.picks[x] += 1;
        }
        let winners = result.side(result.winner);
        for &x in winners {
            self.wins[x] += 1;
        }
        for (i, &x) in winners.iter().enumerate() {
            for &y in &winners[i + 1..] {
                self.pop[x * n + y] += 1;
                self.pop[y * n + x] += 1;
            }
        }
        Ok(())
    }

    /// Fraction of team slots occupied: picks / (2 * battles). Defined as 0
    /// before any battles.
    pub fn pickrate(&self, x: usize) -> f64 {
        if self.num_battles == 0 {
            0.0
        } else {
            self.picks[x] as f64 / (2.0 * self.num_battles as f64)
        }
    }

    /// Fraction of appearances that ended in a win; 0 for never-picked
    /// characters.
    pub fn winrate(&self, x: usize) -> f64 {
        if self.picks[x] == 0 {
            0.0
        } else {
            self.wins[x] as f64 / self.picks[x] as f64
        }
    }

    pub fn pop_normalizer(&self) -> PopNormalizer {
        let n = self.roster_len();
        let mut min = u64::MAX;
        let mut max = 0u64;
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                let c = self.pop[x * n + y];
                min = min.min(c);
                max = max.max(c);
            }
        }
        if min == u64::MAX {
            min = 0;
        }
        PopNormalizer { min, max }
    }

    /// Mean normalized co-win affinity between candidate `x` and the members
    /// of the current team.
    pub fn popularity(&self, x: usize, current_team: &[usize]) -> Result<f64, StatsError> {
        self.popularity_with(&self.pop_normalizer(), x, current_team)
    }

    /// Same as [`popularity`](Self::popularity) with a pre-computed
    /// normalizer, for batch scoring.
    pub fn popularity_with(
        &self,
        norm: &PopNormalizer,
        x: usize,
        current_team: &[usize],
    ) -> Result<f64, StatsError> {
        if current_team.is_empty() {
            return Err(StatsError::EmptyTeam);
        }
        let n = self.roster_len();
        let sum: f64 = current_team
            .iter()
            .map(|&i| norm.normalize(self.pop[x * n + i]))
            .sum();
        Ok(sum / current_team.len() as f64)
    }
}
