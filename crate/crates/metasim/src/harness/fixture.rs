//! Synthetic roster generation for tests and desk-scale experiments.
//!
//! Stat totals are stratified by tier so tier-capture metrics are
//! meaningful; the type chart is random but satisfies the multiplier
//! invariants; output is byte-deterministic per seed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::rng::{self, Stream};
use crate::roster::{BaseStats, CharacterFile, MoveCategory, MoveFile, Roster, RosterFile};

use super::{io_err, HarnessError};

/// Tier labels in strength order, strongest first. The residual bucket in
/// composition reports is everything after the declared prefix.
pub const FIXTURE_TIERS: [&str; 6] = ["AG", "Ubers", "OU", "UU", "RU", "LC"];

/// Inclusive stat-total band per tier, aligned with `FIXTURE_TIERS`.
const STAT_BANDS: [(u32, u32); 6] = [
    (690, 720),
    (600, 670),
    (530, 590),
    (460, 520),
    (400, 450),
    (260, 360),
];

/// Per-tier character counts for a roster of `size`. AG always gets 2; LC
/// gets the 210-of-740 proportion; the rest is split between the middle
/// tiers.
pub fn tier_counts(size: usize) -> [usize; 6] {
    let lc = (size * 210 + 370) / 740;
    let ag = 2;
    let ubers = (size * 8 / 100).max(1);
    let ou = (size * 15 / 100).max(1);
    let uu = (size * 20 / 100).max(1);
    let ru = size - ag - ubers - ou - uu - lc;
    [ag, ubers, ou, uu, ru, lc]
}

fn random_chart(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            (0..n)
                .map(|_| match rng.gen_range(0..20u32) {
                    0 => 0.0,
                    1..=3 => 0.5,
                    4..=15 => 1.0,
                    _ => 2.0,
                })
                .collect()
        })
        .collect()
}

fn stats_for_total(rng: &mut ChaCha8Rng, total: u32) -> BaseStats {
    // Random weights, then scale so the six stats sum near `total`.
    let weights: Vec<f64> = (0..6).map(|_| rng.gen_range(0.6..1.4)).collect();
    let wsum: f64 = weights.iter().sum();
    let mut vals: Vec<u16> = weights
        .iter()
        .map(|w| ((total as f64 * w / wsum).round() as u16).clamp(1, 255))
        .collect();
    // Push the rounding residual into HP, staying in range.
    let sum: i64 = vals.iter().map(|&v| v as i64).sum();
    let fixed = (vals[0] as i64 + total as i64 - sum).clamp(1, 255) as u16;
    vals[0] = fixed;
    BaseStats {
        hp: vals[0],
        atk: vals[1],
        def: vals[2],
        spa: vals[3],
        spd: vals[4],
        spe: vals[5],
    }
}

/// Generate a synthetic roster of `size` characters over `type_count` types,
/// tiers embedded. Deterministic per seed.
pub fn generate_fixture(
    seed: u64,
    size: usize,
    type_count: usize,
) -> Result<RosterFile, HarnessError> {
    if size < 12 {
        return Err(HarnessError::FixtureTooSmall { size });
    }
    if type_count < 2 {
        return Err(HarnessError::TooFewTypes { type_count });
    }
    let mut rng = rng::stream_rng(seed, Stream::Fixture, 0);
    let types: Vec<String> = (0..type_count).map(|t| format!("type{t:02}")).collect();
    let chart = random_chart(&mut rng, type_count);

    let mut moves = Vec::with_capacity(type_count * 2);
    for t in &types {
        moves.push(MoveFile {
            id: format!("{t}-strike"),
            move_type: t.clone(),
            base_power: rng.gen_range(70..=90),
            accuracy: 1.0,
            category: MoveCategory::Physical,
        });
        moves.push(MoveFile {
            id: format!("{t}-blast"),
            move_type: t.clone(),
            base_power: rng.gen_range(85..=100),
            accuracy: 0.9,
            category: MoveCategory::Special,
        });
    }

    let counts = tier_counts(size);
    let mut characters = Vec::with_capacity(size);
    for (tier_idx, &count) in counts.iter().enumerate() {
        let (lo, hi) = STAT_BANDS[tier_idx];
        for _ in 0..count {
            let i = characters.len();
            let primary = rng.gen_range(0..type_count);
            let mut char_types = vec![types[primary].clone()];
            if rng.gen_bool(0.4) {
                let secondary = rng.gen_range(0..type_count);
                if secondary != primary {
                    char_types.push(types[secondary].clone());
                }
            }
            let mut move_ids = vec![format!("{}-strike", types[primary])];
            let extra = rng.gen_range(1..=3usize);
            for _ in 0..extra {
                let t = rng.gen_range(0..type_count);
                let id = if rng.gen_bool(0.5) {
                    format!("{}-strike", types[t])
                } else {
                    format!("{}-blast", types[t])
                };
                if !move_ids.contains(&id) {
                    move_ids.push(id);
                }
            }
            characters.push(CharacterFile {
                species: format!("char-{i:03}"),
                types: char_types,
                base_stats: {
                    let total = rng.gen_range(lo..=hi);
                    stats_for_total(&mut rng, total)
                },
                moves: move_ids,
                tier: Some(FIXTURE_TIERS[tier_idx].to_string()),
            });
        }
    }

    Ok(RosterFile {
        format_version: 1,
        types,
        chart,
        moves,
        characters,
    })
}

/// Write `roster.json` and `tiers.json` under `dir`; returns the two paths.
pub fn write_fixture(
    dir: &Path,
    seed: u64,
    size: usize,
    type_count: usize,
) -> Result<(PathBuf, PathBuf), HarnessError> {
    let file = generate_fixture(seed, size, type_count)?;
    std::fs::create_dir_all(dir).map_err(io_err(format!("creating {}", dir.display())))?;
    let roster_path = dir.join("roster.json");
    let tier_path = dir.join("tiers.json");
    let tiers: BTreeMap<&str, &str> = file
        .characters
        .iter()
        .map(|c| (c.species.as_str(), c.tier.as_deref().unwrap_or("RU")))
        .collect();
    let roster_json =
        serde_json::to_string_pretty(&file).map_err(|source| HarnessError::Json {
            context: "serializing roster".into(),
            source,
        })?;
    let tier_json = serde_json::to_string_pretty(&tiers).map_err(|source| HarnessError::Json {
        context: "serializing tiers".into(),
        source,
    })?;
    std::fs::write(&roster_path, roster_json)
        .map_err(io_err(format!("writing {}", roster_path.display())))?;
    std::fs::write(&tier_path, tier_json)
        .map_err(io_err(format!("writing {}", tier_path.display())))?;
    Ok((roster_path, tier_path))
}

/// Convenience: generate and validate in one step.
pub fn fixture_roster(seed: u64, size: usize, type_count: usize) -> Result<Roster, HarnessError> {
    Ok(Roster::from_file(generate_fixture(seed, size, type_count)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = serde_json::to_string(&generate_fixture(9, 40, 6).unwrap()).unwrap();
        let b = serde_json::to_string(&generate_fixture(9, 40, 6).unwrap()).unwrap();
        let c = serde_json::to_string(&generate_fixture(10, 40, 6).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn generated_roster_validates() {
        for size in [12, 60, 200] {
            let roster = fixture_roster(1, size, 8).unwrap();
            assert_eq!(roster.len(), size);
        }
    }

    #[test]
    fn reference_proportions_at_740() {
        let counts = tier_counts(740);
        assert_eq!(counts[5], 210);
        assert_eq!(counts[0], 2);
        assert_eq!(counts.iter().sum::<usize>(), 740);
    }

    #[test]
    fn tiers_stratify_stat_totals() {
        let file = generate_fixture(4, 100, 6).unwrap();
        let mean_total = |tier: &str| {
            let rows: Vec<u32> = file
                .characters
                .iter()
                .filter(|c| c.tier.as_deref() == Some(tier))
                .map(|c| c.base_stats.total())
                .collect();
            rows.iter().sum::<u32>() as f64 / rows.len() as f64
        };
        assert!(mean_total("AG") > mean_total("OU"));
        assert!(mean_total("OU") > mean_total("LC"));
    }

    #[test]
    fn write_fixture_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let (r1, t1) = write_fixture(dir.path(), 5, 30, 4).unwrap();
        let roster_a = std::fs::read(&r1).unwrap();
        let tier_a = std::fs::read(&t1).unwrap();
        let (r2, t2) = write_fixture(dir.path(), 5, 30, 4).unwrap();
        assert_eq!(roster_a, std::fs::read(&r2).unwrap());
        assert_eq!(tier_a, std::fs::read(&t2).unwrap());
        // Loadable through the normal path, tiers applied.
        let roster = Roster::load_with_tiers(&r1, &t1).unwrap();
        assert!(roster.characters().iter().all(|c| c.tier.is_some()));
    }

    #[test]
    fn size_and_type_floors() {
        assert!(matches!(
            generate_fixture(0, 11, 4),
            Err(HarnessError::FixtureTooSmall { size: 11 })
        ));
        assert!(matches!(
            generate_fixture(0, 12, 1),
            Err(HarnessError::TooFewTypes { type_count: 1 })
        ));
    }
}
