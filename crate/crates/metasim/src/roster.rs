//! Roster loading and validation: characters, moves, type chart, tiers.
//!
//! The roster is immutable after load; every lookup the rest of the engine
//! needs (dense indices, normalized base stat totals, type effectiveness)
//! is resolved here once.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Current roster file format version.
pub const ROSTER_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RosterError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("unsupported roster format version {found} (expected {ROSTER_FORMAT_VERSION})")]
    FormatVersion { found: u32 },
    #[error("type chart is {rows}x{cols}, expected {n}x{n} for {n} declared types")]
    ChartShape { rows: usize, cols: usize, n: usize },
    #[error("type chart entry [{attacker}][{defender}] = {value}; single-type multipliers must be 0, 0.5, 1 or 2")]
    BadMultiplier {
        attacker: String,
        defender: String,
        value: f64,
    },
    #[error("duplicate species {species:?}")]
    DuplicateSpecies { species: String },
    #[error("duplicate move id {id:?}")]
    DuplicateMove { id: String },
    #[error("character {species:?} references undefined move {move_id:?}")]
    UnknownMove { species: String, move_id: String },
    #[error("character {species:?} references unknown type {type_name:?}")]
    UnknownType { species: String, type_name: String },
    #[error("move {id:?} references unknown type {type_name:?}")]
    UnknownMoveType { id: String, type_name: String },
    #[error("character {species:?}: {reason}")]
    BadCharacter { species: String, reason: String },
    #[error("move {id:?}: {reason}")]
    BadMove { id: String, reason: String },
    #[error("type group is empty")]
    EmptyTypeGroup,
    #[error("roster has no characters")]
    EmptyRoster,
}

/// Index into the type chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(pub u16);

impl TypeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "type#{}", self.0)
    }
}

/// Square damage-multiplier matrix over the declared types, plus the
/// {-2,-1,0,1} scoring variant used by the team builder.
#[derive(Debug, Clone)]
pub struct TypeChart {
    names: Vec<String>,
    multipliers: Vec<f64>,
    scores: Vec<i8>,
}

impl TypeChart {
    /// Build a chart from single-type multipliers; each entry must be one of
    /// 0, 0.5, 1, 2. The score matrix is derived: 0 -> -2, 0.5 -> -1,
    /// 1 -> 0, 2 -> 1.
    pub fn new(names: Vec<String>, matrix: &[Vec<f64>]) -> Result<Self, RosterError> {
        let n = names.len();
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(RosterError::ChartShape {
                rows: matrix.len(),
                cols: matrix.first().map_or(0, |r| r.len()),
                n,
            });
        }
        let mut multipliers = Vec::with_capacity(n * n);
        let mut scores = Vec::with_capacity(n * n);
        for (a, row) in matrix.iter().enumerate() {
            for (d, &m) in row.iter().enumerate() {
                let score = if m == 0.0 {
                    -2
                } else if m == 0.5 {
                    -1
                } else if m == 1.0 {
                    0
                } else if m == 2.0 {
                    1
                } else {
                    return Err(RosterError::BadMultiplier {
                        attacker: names[a].clone(),
                        defender: names[d].clone(),
                        value: m,
                    });
                };
                multipliers.push(m);
                scores.push(score);
            }
        }
        Ok(Self {
            names,
            multipliers,
            scores,
        })
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn type_names(&self) -> &[String] {
        &self.names
    }

    pub fn type_by_name(&self, name: &str) -> Option<TypeId> {
        self.names.iter().position(|n| n == name).map(|i| TypeId(i as u16))
    }

    pub fn name_of(&self, t: TypeId) -> &str {
        &self.names[t.index()]
    }

    /// Single-type damage multiplier of `attacker` against `defender`.
    pub fn multiplier(&self, attacker: TypeId, defender: TypeId) -> f64 {
        self.multipliers[attacker.index() * self.size() + defender.index()]
    }

    /// Score value in {-2,-1,0,1} of `attacker` against `defender`.
    pub fn score(&self, attacker: TypeId, defender: TypeId) -> i8 {
        self.scores[attacker.index() * self.size() + defender.index()]
    }

    /// Composed multiplier of an attacking type against a dual-typed
    /// defender: the product of the single-type multipliers.
    pub fn effectiveness(&self, attacker: TypeId, defender_types: &[TypeId]) -> f64 {
        defender_types
            .iter()
            .map(|&d| self.multiplier(attacker, d))
            .product()
    }

    /// All types whose score against `defender` is 1 (super effective).
    pub fn strong_against(&self, defender: TypeId) -> Vec<TypeId> {
        (0..self.size() as u16)
            .map(TypeId)
            .filter(|&a| self.score(a, defender) == 1)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveCategory {
    Physical,
    Special,
    Status,
}

#[derive(Debug, Clone)]
pub struct MoveDef {
    pub id: String,
    pub move_type: TypeId,
    pub base_power: u32,
    pub accuracy: f64,
    pub category: MoveCategory,
}

impl MoveDef {
    pub fn is_damaging(&self) -> bool {
        !matches!(self.category, MoveCategory::Status)
    }
}

/// Six base stats, each in [1, 255].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseStats {
    pub hp: u16,
    pub atk: u16,
    pub def: u16,
    pub spa: u16,
    pub spd: u16,
    pub spe: u16,
}

impl BaseStats {
    pub fn total(&self) -> u32 {
        [self.hp, self.atk, self.def, self.spa, self.spd, self.spe]
            .iter()
            .map(|&s| s as u32)
            .sum()
    }

    fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("hp", self.hp),
            ("atk", self.atk),
            ("def", self.def),
            ("spa", self.spa),
            ("spd", self.spd),
            ("spe", self.spe),
        ] {
            if v == 0 || v > 255 {
                return Err(format!("base stat {name} = {v} outside [1, 255]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Character {
    pub species: String,
    pub types: Vec<TypeId>,
    pub base_stats: BaseStats,
    /// Indices into `Roster::moves`.
    pub moves: Vec<usize>,
    pub tier: Option<String>,
}

/// Validated, immutable roster with constant-time lookups.
#[derive(Debug, Clone)]
pub struct Roster {
    characters: Vec<Character>,
    moves: Vec<MoveDef>,
    chart: TypeChart,
    species_index: HashMap<String, usize>,
    max_stat_total: u32,
}

impl Roster {
    pub fn len(&self) -> usize {
        self.characters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.characters.is_empty()
    }

    pub fn character(&self, idx: usize) -> &Character {
        &self.characters[idx]
    }

    pub fn characters(&self) -> &[Character] {
        &self.characters
    }

    pub fn move_def(&self, idx: usize) -> &MoveDef {
        &self.moves[idx]
    }

    pub fn moves(&self) -> &[MoveDef] {
        &self.moves
    }

    pub fn chart(&self) -> &TypeChart {
        &self.chart
    }

    pub fn index_of(&self, species: &str) -> Option<usize> {
        self.species_index.get(species).copied()
    }

    pub fn species(&self, idx: usize) -> &str {
        &self.characters[idx].species
    }

    pub fn max_stat_total(&self) -> u32 {
        self.max_stat_total
    }

    /// Normalized base stat total: stat sum divided by the roster maximum.
    /// At least one character attains exactly 1.0.
    pub fn base_stat_total(&self, idx: usize) -> f64 {
        self.characters[idx].base_stats.total() as f64 / self.max_stat_total as f64
    }

    /// Moves of a character, resolved.
    pub fn moves_of(&self, idx: usize) -> impl Iterator<Item = &MoveDef> {
        self.characters[idx].moves.iter().map(move |&m| &self.moves[m])
    }

    /// Load and validate a roster file (see `RosterFile` for the schema).
    pub fn load(path: &Path) -> Result<Self, RosterError> {
        let raw = std::fs::read_to_string(path).map_err(|source| RosterError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let file: RosterFile = serde_json::from_str(&raw).map_err(|source| RosterError::Parse {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_file(file)
    }

    /// Load a roster plus a tier file (JSON map species -> tier label).
    pub fn load_with_tiers(roster_path: &Path, tier_path: &Path) -> Result<Self, RosterError> {
        let mut roster = Self::load(roster_path)?;
        let raw = std::fs::read_to_string(tier_path).map_err(|source| RosterError::Io {
            path: tier_path.display().to_string(),
            source,
        })?;
        let tiers: HashMap<String, String> =
            serde_json::from_str(&raw).map_err(|source| RosterError::Parse {
                path: tier_path.display().to_string(),
                source,
            })?;
        roster.apply_tiers(&tiers);
        Ok(roster)
    }

    pub fn apply_tiers(&mut self, tiers: &HashMap<String, String>) {
        for c in &mut self.characters {
            if let Some(t) = tiers.get(&c.species) {
                c.tier = Some(t.clone());
            }
        }
    }

    /// Build a roster from an in-memory file representation, running the
    /// full validation pass.
    pub fn from_file(file: RosterFile) -> Result<Self, RosterError> {
        if file.format_version != ROSTER_FORMAT_VERSION {
            return Err(RosterError::FormatVersion {
                found: file.format_version,
            });
        }
        let chart = TypeChart::new(file.types, &file.chart)?;

        let mut moves = Vec::with_capacity(file.moves.len());
        let mut move_index: HashMap<String, usize> = HashMap::new();
        for m in file.moves {
            if move_index.contains_key(&m.id) {
                return Err(RosterError::DuplicateMove { id: m.id });
            }
            let move_type =
                chart
                    .type_by_name(&m.move_type)
                    .ok_or_else(|| RosterError::UnknownMoveType {
                        id: m.id.clone(),
                        type_name: m.move_type.clone(),
                    })?;
            let category = m.category;
            match category {
                MoveCategory::Status if m.base_power != 0 => {
                    return Err(RosterError::BadMove {
                        id: m.id,
                        reason: format!("status move has base power {}", m.base_power),
                    })
                }
                MoveCategory::Physical | MoveCategory::Special if m.base_power == 0 => {
                    return Err(RosterError::BadMove {
                        id: m.id,
                        reason: "damaging move has base power 0".into(),
                    })
                }
                _ => {}
            }
            if !(m.accuracy > 0.0 && m.accuracy <= 1.0) {
                return Err(RosterError::BadMove {
                    id: m.id,
                    reason: format!("accuracy {} outside (0, 1]", m.accuracy),
                });
            }
            move_index.insert(m.id.clone(), moves.len());
            moves.push(MoveDef {
                id: m.id,
                move_type,
                base_power: m.base_power,
                accuracy: m.accuracy,
                category,
            });
        }

        let mut characters = Vec::with_capacity(file.characters.len());
        let mut species_index = HashMap::new();
        for c in file.characters {
            if species_index.contains_key(&c.species) {
                return Err(RosterError::DuplicateSpecies { species: c.species });
            }
            if c.types.is_empty() || c.types.len() > 2 {
                return Err(RosterError::BadCharacter {
                    species: c.species,
                    reason: format!("{} types declared, expected 1 or 2", c.types.len()),
                });
            }
            let mut types = Vec::with_capacity(c.types.len());
            for t in &c.types {
                let id = chart
                    .type_by_name(t)
                    .ok_or_else(|| RosterError::UnknownType {
                        species: c.species.clone(),
                        type_name: t.clone(),
                    })?;
                if types.contains(&id) {
                    return Err(RosterError::BadCharacter {
                        species: c.species.clone(),
                        reason: format!("duplicate type {t:?}"),
                    });
                }
                types.push(id);
            }
            c.base_stats
                .validate()
                .map_err(|reason| RosterError::BadCharacter {
                    species: c.species.clone(),
                    reason,
                })?;
            if c.moves.is_empty() || c.moves.len() > 4 {
                return Err(RosterError::BadCharacter {
                    species: c.species,
                    reason: format!("{} moves declared, expected 1 to 4", c.moves.len()),
                });
            }
            let mut move_ids = Vec::with_capacity(c.moves.len());
            for m in &c.moves {
                let idx = move_index
                    .get(m)
                    .copied()
                    .ok_or_else(|| RosterError::UnknownMove {
                        species: c.species.clone(),
                        move_id: m.clone(),
                    })?;
                move_ids.push(idx);
            }
            species_index.insert(c.species.clone(), characters.len());
            characters.push(Character {
                species: c.species,
                types,
                base_stats: c.base_stats,
                moves: move_ids,
                tier: c.tier,
            });
        }
        if characters.is_empty() {
            return Err(RosterError::EmptyRoster);
        }
        let max_stat_total = characters
            .iter()
            .map(|c| c.base_stats.total())
            .max()
            .unwrap();
        Ok(Self {
            characters,
            moves,
            chart,
            species_index,
            max_stat_total,
        })
    }

    /// Serialize back into the file representation (used by the fixture
    /// generator and tests).
    pub fn to_file(&self) -> RosterFile {
        RosterFile {
            format_version: ROSTER_FORMAT_VERSION,
            types: self.chart.names.clone(),
            chart: (0..self.chart.size())
                .map(|a| {
                    (0..self.chart.size())
                        .map(|d| self.chart.multiplier(TypeId(a as u16), TypeId(d as u16)))
                        .collect()
                })
                .collect(),
            moves: self
                .moves
                .iter()
                .map(|m| MoveFile {
                    id: m.id.clone(),
                    move_type: self.chart.name_of(m.move_type).to_string(),
                    base_power: m.base_power,
                    accuracy: m.accuracy,
                    category: m.category,
                })
                .collect(),
            characters: self
                .characters
                .iter()
                .map(|c| CharacterFile {
                    species: c.species.clone(),
                    types: c.types.iter().map(|&t| self.chart.name_of(t).to_string()).collect(),
                    base_stats: c.base_stats,
                    moves: c.moves.iter().map(|&m| self.moves[m].id.clone()).collect(),
                    tier: c.tier.clone(),
                })
                .collect(),
        }
    }
}

/// Per-attacking-type group score vector: for each attacking type, the sum
/// of its score values against every type in `group`, min-max normalized to
/// [0, 1]. A group is a multiset; duplicate entries count. If every summed
/// entry is equal the result is all zeros.
pub fn type_vector(chart: &TypeChart, group: &[TypeId]) -> Result<Vec<f64>, RosterError> {
    if group.is_empty() {
        return Err(RosterError::EmptyTypeGroup);
    }
    let sums: Vec<f64> = (0..chart.size() as u16)
        .map(|a| {
            group
                .iter()
                .map(|&d| chart.score(TypeId(a), d) as i32)
                .sum::<i32>() as f64
        })
        .collect();
    Ok(min_max_normalize(&sums))
}

/// Min-max normalize to [0, 1]; an all-equal vector maps to all zeros.
pub fn min_max_normalize(v: &[f64]) -> Vec<f64> {
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return vec![0.0; v.len()];
    }
    v.iter().map(|&x| (x - min) / (max - min)).collect()
}

/// Map a per-type vector onto characters: single-typed characters take the
/// value of their type, dual-typed characters the average of their two.
pub fn assign_to_characters(roster: &Roster, per_type: &[f64]) -> Vec<f64> {
    roster
        .characters()
        .iter()
        .map(|c| {
            c.types.iter().map(|&t| per_type[t.index()]).sum::<f64>() / c.types.len() as f64
        })
        .collect()
}

// ---------------------------------------------------------------------------
// File schema
// ---------------------------------------------------------------------------

/// On-disk roster schema (JSON).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RosterFile {
    pub format_version: u32,
    /// Ordered type names; indices into `chart`.
    pub types: Vec<String>,
    /// N x N single-type damage multipliers, attacker-major.
    pub chart: Vec<Vec<f64>>,
    pub moves: Vec<MoveFile>,
    pub characters: Vec<CharacterFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoveFile {
    pub id: String,
    #[serde(rename = "type")]
    pub move_type: String,
    pub base_power: u32,
    pub accuracy: f64,
    pub category: MoveCategory,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CharacterFile {
    pub species: String,
    pub types: Vec<String>,
    pub base_stats: BaseStats,
    pub moves: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tier: Option<String>,
}
