//! Seed derivation for independent, reproducible RNG streams.
//!
//! Every random decision in the engine draws from a ChaCha8 stream whose
//! seed is derived from the master seed plus a stream tag and index. Battles
//! keep separate sub-streams for turn ordering, accuracy, crits, damage
//! rolls, and each side's agent, so a change in agent behaviour cannot
//! perturb the damage rolls of unrelated events.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named RNG streams. The discriminant feeds the seed mix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Speed-tie coin flips within a battle.
    Order = 1,
    /// Accuracy checks.
    Accuracy = 2,
    /// Critical-hit rolls.
    Crit = 3,
    /// Damage range rolls.
    Damage = 4,
    /// Side A's agent decisions.
    AgentA = 5,
    /// Side B's agent decisions.
    AgentB = 6,
    /// Per-battle seeds within a discovery run.
    Battle = 7,
    /// Per-team seeds during pool generation.
    Pool = 8,
    /// Team-pair scheduling within an aggregation window.
    Pairs = 9,
    /// Per-row seeds in a grid search.
    Grid = 10,
    /// Fixture generation.
    Fixture = 11,
}

/// splitmix64 finalizer; the standard mixer for expanding a seed.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `(master, stream, index)`.
pub fn derive(master: u64, stream: Stream, index: u64) -> u64 {
    splitmix(splitmix(master ^ splitmix(stream as u64)).wrapping_add(index))
}

/// Derive a child seed from `(master, stream, a, b)` for doubly-indexed
/// streams such as (window, team-in-pool).
pub fn derive2(master: u64, stream: Stream, a: u64, b: u64) -> u64 {
    splitmix(derive(master, stream, a).wrapping_add(splitmix(b)))
}

/// Seeded ChaCha8 stream for `(master, stream, index)`.
pub fn stream_rng(master: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, stream, index))
}
