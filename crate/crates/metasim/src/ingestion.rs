//! Usage-statistics ingestion: parse monthly usage tables into seed stats
//! for discovery runs.
//!
//! # Table grammar
//!
//! The canonical text format is a pipe-delimited table:
//!
//! ```text
//! +------+------------+---------+
//! | Rank | Species    | Usage % |
//! +------+------------+---------+
//! |    1 | Garchomp   | 45.5%   |
//! |    2 | Heatran    | 31.25%  |
//! +------+------------+---------+
//! ```
//!
//! Lines starting with `+` are decorative borders, a row whose first cell is
//! `Rank` (any case) is the header, and blank lines are ignored; everything
//! else must be a data row. Ranks must be contiguous from 1 and usage must
//! be non-increasing with rank. A JSON array of records is accepted as an
//! equivalent format.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::roster::Roster;
use crate::stats::UsageStats;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: expected 3 cells (rank | species | usage%), got {cells}")]
    MalformedRow { line: usize, cells: usize },
    #[error("line {line}: invalid rank {text:?}")]
    BadRank { line: usize, text: String },
    #[error("line {line}: invalid usage percentage {text:?}")]
    BadPercent { line: usize, text: String },
    #[error("line {line}: rank {found} out of order, expected {expected}")]
    NonContiguousRank {
        line: usize,
        expected: u32,
        found: u32,
    },
    #[error("line {line}: usage {found} exceeds the previous row's {prev}")]
    UsageIncreased { line: usize, prev: f64, found: f64 },
    #[error("line {line}: usage {found} outside [0, 100]%")]
    UsageOutOfRange { line: usize, found: f64 },
    #[error("line {line}: duplicate species {species:?}")]
    DuplicateSpecies { line: usize, species: String },
    #[error("no usage records in input")]
    Empty,
    #[error("species {species:?} not in the roster")]
    UnknownSpecies { species: String },
    #[error("invalid JSON usage records: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageRecord {
    pub rank: u32,
    pub species: String,
    /// Fraction of teams the species appeared on, in [0, 1].
    pub usage_fraction: f64,
}

/// Parse the pipe-delimited usage table format.
pub fn parse_usage_text(input: &str) -> Result<Vec<UsageRecord>, IngestError> {
    let mut records: Vec<UsageRecord> = Vec::new();
    for (idx, raw) in input.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('+') {
            continue;
        }
        let cells: Vec<&str> = trimmed
            .trim_matches('|')
            .split('|')
            .map(str::trim)
            .collect();
        if cells.len() != 3 {
            return Err(IngestError::MalformedRow {
                line,
                cells: cells.len(),
            });
        }
        if cells[0].eq_ignore_ascii_case("rank") {
            continue;
        }
        let rank: u32 = cells[0].parse().map_err(|_| IngestError::BadRank {
            line,
            text: cells[0].to_string(),
        })?;
        let species = cells[1].to_string();
        let percent_text = cells[2].strip_suffix('%').ok_or(IngestError::BadPercent {
            line,
            text: cells[2].to_string(),
        })?;
        let percent: f64 = percent_text
            .trim()
            .parse()
            .map_err(|_| IngestError::BadPercent {
                line,
                text: cells[2].to_string(),
            })?;
        if !(0.0..=100.0).contains(&percent) || !percent.is_finite() {
            return Err(IngestError::UsageOutOfRange {
                line,
                found: percent,
            });
        }
        let expected = records.len() as u32 + 1;
        if rank != expected {
            return Err(IngestError::NonContiguousRank {
                line,
                expected,
                found: rank,
            });
        }
        let usage_fraction = percent / 100.0;
        if let Some(prev) = records.last() {
            if usage_fraction > prev.usage_fraction {
                return Err(IngestError::UsageIncreased {
                    line,
                    prev: prev.usage_fraction * 100.0,
                    found: percent,
                });
            }
        }
        if records.iter().any(|r| r.species == species) {
            return Err(IngestError::DuplicateSpecies { line, species });
        }
        records.push(UsageRecord {
            rank,
            species,
            usage_fraction,
        });
    }
    if records.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(records)
}

/// Emit the canonical table form; `parse_usage_text` inverts it exactly.
pub fn emit_usage_text(records: &[UsageRecord]) -> String {
    let species_width = records
        .iter()
        .map(|r| r.species.len())
        .max()
        .unwrap_or(7)
        .max("Species".len());
    let percents: Vec<String> = records
        .iter()
        .map(|r| format!("{}%", r.usage_fraction * 100.0))
        .collect();
    let usage_width = percents
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max("Usage %".len());
    let border = format!(
        "+------+-{}-+-{}-+",
        "-".repeat(species_width),
        "-".repeat(usage_width)
    );
    let mut out = String::new();
    out.push_str(&border);
    out.push('\n');
    out.push_str(&format!(
        "| Rank | {:<species_width$} | {:<usage_width$} |\n",
        "Species", "Usage %"
    ));
    out.push_str(&border);
    out.push('\n');
    for (r, pct) in records.iter().zip(&percents) {
        out.push_str(&format!(
            "| {:>4} | {:<species_width$} | {:<usage_width$} |\n",
            r.rank, r.species, pct
        ));
    }
    out.push_str(&border);
    out.push('\n');
    out
}

pub fn parse_usage_json(input: &str) -> Result<Vec<UsageRecord>, IngestError> {
    let records: Vec<UsageRecord> = serde_json::from_str(input)?;
    if records.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(records)
}

pub fn emit_usage_json(records: &[UsageRecord]) -> String {
    serde_json::to_string_pretty(records).expect("records serialize")
}

/// Equal-weight average across months. Species absent from a month
/// contribute zero for that month; the result is re-ranked by mean usage
/// descending, ties broken by species id.
pub fn average_months(months: &[Vec<UsageRecord>]) -> Result<Vec<UsageRecord>, IngestError> {
    if months.is_empty() {
        return Err(IngestError::Empty);
    }
    let mut totals: Vec<(String, f64)> = Vec::new();
    for month in months {
        for r in month {
            match totals.iter_mut().find(|(s, _)| s == &r.species) {
                Some((_, t)) => *t += r.usage_fraction,
                None => totals.push((r.species.clone(), r.usage_fraction)),
            }
        }
    }
    let m = months.len() as f64;
    totals.sort_by(|a, b| {
        (b.1 / m)
            .partial_cmp(&(a.1 / m))
            .unwrap()
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(totals
        .into_iter()
        .enumerate()
        .map(|(i, (species, total))| UsageRecord {
            rank: i as u32 + 1,
            species,
            usage_fraction: total / m,
        })
        .collect())
}

/// Convert usage fractions back into pick counts for a nominal battle
/// volume. Wins and the popularity matrix stay zeroed; public usage data
/// carries neither.
pub fn to_initial_stats(
    records: &[UsageRecord],
    roster: &Roster,
    nominal_battles: u64,
    skip_unknown: bool,
) -> Result<(UsageStats, Vec<String>), IngestError> {
    if records.is_empty() {
        return Err(IngestError::Empty);
    }
    let mut picks = vec![0u64; roster.len()];
    let mut skipped = Vec::new();
    for r in records {
        match roster.index_of(&r.species) {
            Some(x) => {
                picks[x] = (r.usage_fraction * 2.0 * nominal_battles as f64).round() as u64;
            }
            None if skip_unknown => skipped.push(r.species.clone()),
            None => {
                return Err(IngestError::UnknownSpecies {
                    species: r.species.clone(),
                })
            }
        }
    }
    Ok((UsageStats::from_counts(nominal_battles, picks), skipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roster::{BaseStats, CharacterFile, MoveCategory, MoveFile, RosterFile};

    const SAMPLE: &str = "\
+------+----------+---------+
| Rank | Species  | Usage % |
+------+----------+---------+
|    1 | Garchomp | 45.5%   |
|    2 | Heatran  | 31.25%  |
|    3 | Skarmory | 10%     |
+------+----------+---------+
";

    #[test]
    fn parses_well_formed_table() {
        let records = parse_usage_text(SAMPLE).unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(records[0].species, "Garchomp");
        assert!((records[0].usage_fraction - 0.455).abs() < 1e-12);
        assert_eq!(records[2].rank, 3);
        assert!((records[2].usage_fraction - 0.10).abs() < 1e-12);
    }

    #[test]
    fn error_carries_line_number() {
        let bad = SAMPLE.replace("31.25%", "lots%");
        match parse_usage_text(&bad) {
            Err(IngestError::BadPercent { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected BadPercent, got {other:?}"),
        }
        let no_pct = SAMPLE.replace("31.25%", "31.25");
        assert!(matches!(
            parse_usage_text(&no_pct),
            Err(IngestError::BadPercent { line: 5, .. })
        ));
    }

    #[test]
    fn rejects_rank_gaps_and_rising_usage() {
        let gap = SAMPLE.replace("|    3 |", "|    5 |");
        assert!(matches!(
            parse_usage_text(&gap),
            Err(IngestError::NonContiguousRank {
                expected: 3,
                found: 5,
                ..
            })
        ));
        let rising = SAMPLE.replace("10%", "99%");
        assert!(matches!(
            parse_usage_text(&rising),
            Err(IngestError::UsageIncreased { .. })
        ));
        let dup = SAMPLE.replace("Heatran", "Garchomp");
        assert!(matches!(
            parse_usage_text(&dup),
            Err(IngestError::DuplicateSpecies { .. })
        ));
        assert!(matches!(
            parse_usage_text("+---+\n"),
            Err(IngestError::Empty)
        ));
    }

    #[test]
    fn emit_parse_round_trip_400_rows() {
        // Fractions of the form k/1024 survive the percent conversion
        // exactly, so the round trip is equality, not approximation.
        let records: Vec<UsageRecord> = (0..400)
            .map(|i| UsageRecord {
                rank: i as u32 + 1,
                species: format!("species-{i:03}"),
                usage_fraction: (800 - 2 * i) as f64 / 1024.0,
            })
            .collect();
        let text = emit_usage_text(&records);
        let reparsed = parse_usage_text(&text).unwrap();
        assert_eq!(records, reparsed);

        let json = emit_usage_json(&records);
        assert_eq!(parse_usage_json(&json).unwrap(), records);
    }

    #[test]
    fn average_months_union_and_mean() {
        let m1 = vec![
            UsageRecord {
                rank: 1,
                species: "a".into(),
                usage_fraction: 0.30,
            },
            UsageRecord {
                rank: 2,
                species: "b".into(),
                usage_fraction: 0.20,
            },
        ];
        let m2 = vec![UsageRecord {
            rank: 1,
            species: "a".into(),
            usage_fraction: 0.10,
        }];
        let avg = average_months(&[m1, m2]).unwrap();
        assert_eq!(avg[0].species, "a");
        assert!((avg[0].usage_fraction - 0.20).abs() < 1e-12);
        // b appeared in one of two months: (0.20 + 0) / 2.
        assert_eq!(avg[1].species, "b");
        assert!((avg[1].usage_fraction - 0.10).abs() < 1e-12);
        assert_eq!((avg[0].rank, avg[1].rank), (1, 2));
        assert!(matches!(average_months(&[]), Err(IngestError::Empty)));
    }

    #[test]
    fn average_months_matches_brute_force() {
        // Three months over 30 species with varying membership.
        let months: Vec<Vec<UsageRecord>> = (0..3)
            .map(|m| {
                let mut rows: Vec<(String, f64)> = (0..30)
                    .filter(|i| (i + m) % 4 != 0)
                    .map(|i| {
                        (
                            format!("s{i:02}"),
                            ((i * 13 + m * 7) % 50) as f64 / 100.0,
                        )
                    })
                    .collect();
                rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
                rows.into_iter()
                    .enumerate()
                    .map(|(r, (species, usage_fraction))| UsageRecord {
                        rank: r as u32 + 1,
                        species,
                        usage_fraction,
                    })
                    .collect()
            })
            .collect();
        let avg = average_months(&months).unwrap();
        for rec in &avg {
            let expected: f64 = months
                .iter()
                .map(|m| {
                    m.iter()
                        .find(|r| r.species == rec.species)
                        .map_or(0.0, |r| r.usage_fraction)
                })
                .sum::<f64>()
                / 3.0;
            assert!((rec.usage_fraction - expected).abs() < 1e-12);
        }
        // Ranked non-increasing.
        for w in avg.windows(2) {
            assert!(w[0].usage_fraction >= w[1].usage_fraction);
        }
    }

    fn two_char_roster() -> Roster {
        Roster::from_file(RosterFile {
            format_version: 1,
            types: vec!["normal".into()],
            chart: vec![vec![1.0]],
            moves: vec![MoveFile {
                id: "tackle".into(),
                move_type: "normal".into(),
                base_power: 60,
                accuracy: 1.0,
                category: MoveCategory::Physical,
            }],
            characters: ["Garchomp", "Heatran"]
                .iter()
                .map(|s| CharacterFile {
                    species: s.to_string(),
                    types: vec!["normal".into()],
                    base_stats: BaseStats {
                        hp: 80,
                        atk: 80,
                        def: 80,
                        spa: 80,
                        spd: 80,
                        spe: 80,
                    },
                    moves: vec!["tackle".into()],
                    tier: None,
                })
                .collect(),
        })
        .unwrap()
    }

    #[test]
    fn to_initial_stats_inverts_pickrate() {
        let roster = two_char_roster();
        let records = vec![UsageRecord {
            rank: 1,
            species: "Garchomp".into(),
            usage_fraction: 0.15,
        }];
        let (stats, skipped) = to_initial_stats(&records, &roster, 100_000, false).unwrap();
        assert!(skipped.is_empty());
        assert_eq!(stats.picks(0), 30_000);
        assert_eq!(stats.picks(1), 0);
        assert_eq!(stats.num_battles(), 100_000);
        assert!((stats.pickrate(0) - 0.15).abs() < 1.0 / 200_000.0);
        assert_eq!(stats.wins(0), 0);
    }

    #[test]
    fn unknown_species_policy() {
        let roster = two_char_roster();
        let records = vec![
            UsageRecord {
                rank: 1,
                species: "Garchomp".into(),
                usage_fraction: 0.3,
            },
            UsageRecord {
                rank: 2,
                species: "MissingNo".into(),
                usage_fraction: 0.1,
            },
        ];
        assert!(matches!(
            to_initial_stats(&records, &roster, 1000, false),
            Err(IngestError::UnknownSpecies { .. })
        ));
        let (stats, skipped) = to_initial_stats(&records, &roster, 1000, true).unwrap();
        assert_eq!(skipped, vec!["MissingNo".to_string()]);
        assert_eq!(stats.picks(0), 600);
    }

    #[test]
    fn round_trip_fractions_within_half_count() {
        let roster = two_char_roster();
        let records = vec![
            UsageRecord {
                rank: 1,
                species: "Garchomp".into(),
                usage_fraction: 0.333_333,
            },
            UsageRecord {
                rank: 2,
                species: "Heatran".into(),
                usage_fraction: 0.123_456_7,
            },
        ];
        let nominal = 50_000u64;
        let (stats, _) = to_initial_stats(&records, &roster, nominal, false).unwrap();
        for (i, r) in records.iter().enumerate() {
            let tol = 0.5 / (2.0 * nominal as f64);
            assert!((stats.pickrate(i) - r.usage_fraction).abs() <= tol);
        }
    }
}
