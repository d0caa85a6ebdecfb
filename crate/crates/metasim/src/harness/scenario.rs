//! End-to-end scenario execution.
//!
//! ABC runs seed the builder with ingested pre-ban usage, apply the ban,
//! discover a predicted post-ban meta, and score it against the actual
//! post-ban meta next to the naive remove-and-shift baseline. BSD runs start
//! from a blank slate and report tier capture/composition against a
//! BST-sorted baseline.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::discovery::{
    extract_meta, run_discovery, run_discovery_logged, DiscoveryOutput, MetaSnapshot, RunConfig,
};
use crate::ingestion::{average_months, parse_usage_json, parse_usage_text, to_initial_stats, UsageRecord};
use crate::metrics::{
    edit_distance, edit_distance_delta, naive_baseline, overlap, spearman, tier_capture,
    MetricsError, TierReport,
};
use crate::roster::Roster;
use crate::stats::UsageStats;

use super::report::{to_csv, write_json, write_text, Manifest};
use super::{io_err, HarnessError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Abc,
    Bsd,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub mode: Mode,
    pub roster_path: PathBuf,
    #[serde(default)]
    pub tier_path: Option<PathBuf>,
    /// Monthly usage tables preceding the ban (ABC only).
    #[serde(default)]
    pub pre_ban_usage_paths: Vec<PathBuf>,
    /// Monthly usage tables after the ban, for evaluation (ABC only).
    #[serde(default)]
    pub post_ban_usage_paths: Vec<PathBuf>,
    #[serde(default)]
    pub banned: Vec<String>,
    /// Ordered tier labels for BSD capture reports, strongest first.
    #[serde(default)]
    pub tiers: Vec<String>,
    pub run_config: RunConfig,
    pub output_dir: PathBuf,
}

impl ScenarioSpec {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let raw =
            std::fs::read_to_string(path).map_err(io_err(format!("reading {}", path.display())))?;
        serde_json::from_str(&raw).map_err(|source| HarnessError::Json {
            context: format!("parsing {}", path.display()),
            source,
        })
    }

    /// Fail before any simulation if the shape is wrong or files are
    /// missing.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.mode == Mode::Abc && self.pre_ban_usage_paths.is_empty() {
            return Err(HarnessError::InvalidScenario {
                reason: "ABC mode requires at least one pre-ban usage file".into(),
            });
        }
        if self.mode == Mode::Bsd
            && !(self.pre_ban_usage_paths.is_empty()
                && self.post_ban_usage_paths.is_empty()
                && self.banned.is_empty())
        {
            return Err(HarnessError::InvalidScenario {
                reason: "BSD mode takes no usage files or ban list".into(),
            });
        }
        let mut required = vec![self.roster_path.clone()];
        required.extend(self.tier_path.iter().cloned());
        required.extend(self.pre_ban_usage_paths.iter().cloned());
        required.extend(self.post_ban_usage_paths.iter().cloned());
        for path in required {
            if !path.exists() {
                return Err(HarnessError::InvalidScenario {
                    reason: format!("missing input file {}", path.display()),
                });
            }
        }
        Ok(())
    }

    pub fn load_roster(&self) -> Result<Roster, HarnessError> {
        Ok(match &self.tier_path {
            Some(tier_path) => Roster::load_with_tiers(&self.roster_path, tier_path)?,
            None => Roster::load(&self.roster_path)?,
        })
    }
}

/// One comparison row in an ABC report: the discovered meta or a baseline,
/// scored against the actual post-ban meta.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub label: String,
    pub overlap: f64,
    pub edit_distance: f64,
    pub edit_distance_delta: f64,
    pub rho: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct AbcReport {
    pub name: String,
    pub banned: Vec<String>,
    /// Pre-ban meta from ingested usage.
    pub meta_a: MetaSnapshot,
    /// Actual post-ban meta, when post-ban usage was supplied.
    pub meta_b: Option<MetaSnapshot>,
    /// Discovered post-ban meta.
    pub meta_b_prime: MetaSnapshot,
    pub rows: Vec<ComparisonRow>,
}

#[derive(Debug, Serialize)]
pub struct BsdReport {
    pub name: String,
    pub discovered: TierReport,
    /// Same metrics for a BST-sorted list of the same size.
    pub bst_baseline: TierReport,
    pub meta: MetaSnapshot,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum ScenarioReport {
    Abc(AbcReport),
    Bsd(BsdReport),
}

/// Run a discovery loop, optionally streaming one JSON line per battle
/// (index plus per-turn log) to `battle_log`.
fn discover(
    roster: &Roster,
    config: &RunConfig,
    initial_stats: Option<UsageStats>,
    battle_log: Option<&Path>,
) -> Result<DiscoveryOutput, HarnessError> {
    match battle_log {
        None => Ok(run_discovery(roster, config, initial_stats)?),
        Some(path) => {
            use std::io::Write;
            let file = std::fs::File::create(path)
                .map_err(io_err(format!("creating {}", path.display())))?;
            let mut out = std::io::BufWriter::new(file);
            let mut failed = None;
            let mut sink = |battle: u64, turns: &[crate::battle::TurnLog]| {
                let line = serde_json::json!({ "battle": battle, "turns": turns });
                if let Err(e) = writeln!(out, "{line}") {
                    failed.get_or_insert(e);
                }
            };
            let result = run_discovery_logged(roster, config, initial_stats, &mut sink)?;
            if let Some(source) = failed {
                return Err(HarnessError::Io {
                    context: format!("writing {}", path.display()),
                    source,
                });
            }
            Ok(result)
        }
    }
}

fn read_usage_file(path: &Path) -> Result<Vec<UsageRecord>, HarnessError> {
    let raw = std::fs::read_to_string(path).map_err(io_err(format!("reading {}", path.display())))?;
    let records = if path.extension().is_some_and(|e| e == "json") {
        parse_usage_json(&raw)?
    } else {
        parse_usage_text(&raw)?
    };
    Ok(records)
}

fn averaged_usage(paths: &[PathBuf]) -> Result<Vec<UsageRecord>, HarnessError> {
    let months: Vec<Vec<UsageRecord>> = paths
        .iter()
        .map(|p| read_usage_file(p))
        .collect::<Result<_, _>>()?;
    Ok(average_months(&months)?)
}

/// Per-species rank deltas A -> B against A -> B', over species ranked in
/// all three snapshots. This is the paired input to the rank-correlation
/// significance test.
pub fn rank_delta_pairs(
    a: &MetaSnapshot,
    b: &MetaSnapshot,
    b_prime: &MetaSnapshot,
) -> Vec<(f64, f64)> {
    a.ranking
        .iter()
        .enumerate()
        .filter_map(|(i, e)| {
            let rb = b.rank_of(&e.species)?;
            let rb2 = b_prime.rank_of(&e.species)?;
            let ra = i + 1;
            Some((rb as f64 - ra as f64, rb2 as f64 - ra as f64))
        })
        .collect()
}

fn comparison_row(
    label: &str,
    a: &MetaSnapshot,
    b: &MetaSnapshot,
    candidate: &MetaSnapshot,
) -> Result<ComparisonRow, MetricsError> {
    let pairs = rank_delta_pairs(a, b, candidate);
    let corr = spearman(&pairs).ok();
    Ok(ComparisonRow {
        label: label.to_string(),
        overlap: overlap(b, candidate)?,
        edit_distance: edit_distance(b, candidate)?,
        edit_distance_delta: edit_distance_delta(a, b, candidate)?,
        rho: corr.map(|c| c.rho),
        p_value: corr.map(|c| c.p_value),
    })
}

/// Run an ABC scenario against pre-loaded inputs. Separated from file IO so
/// tests can inject stats and snapshots directly.
pub fn run_abc(
    roster: &Roster,
    config: &RunConfig,
    initial_stats: UsageStats,
    banned: &[String],
    meta_b: Option<&MetaSnapshot>,
    name: &str,
) -> Result<AbcReport, HarnessError> {
    run_abc_logged(roster, config, initial_stats, banned, meta_b, name, None)
}

/// [`run_abc`] with optional battle logging.
pub fn run_abc_logged(
    roster: &Roster,
    config: &RunConfig,
    initial_stats: UsageStats,
    banned: &[String],
    meta_b: Option<&MetaSnapshot>,
    name: &str,
    battle_log: Option<&Path>,
) -> Result<AbcReport, HarnessError> {
    let meta_a = extract_meta(roster, &initial_stats, config.meta_size)?;
    let mut run_config = config.clone();
    run_config.apply_ban(roster, banned)?;
    let out = discover(roster, &run_config, Some(initial_stats), battle_log)?;
    let b_prime = out.snapshot;

    let mut rows = Vec::new();
    if let Some(b) = meta_b {
        rows.push(comparison_row("discovered", &meta_a, b, &b_prime)?);
        let present: Vec<String> = banned
            .iter()
            .filter(|s| meta_a.rank_of(s).is_some())
            .cloned()
            .collect();
        let naive = naive_baseline(&meta_a, &present)?;
        rows.push(comparison_row("naive", &meta_a, b, &naive)?);
    }
    Ok(AbcReport {
        name: name.to_string(),
        banned: banned.to_vec(),
        meta_a,
        meta_b: meta_b.cloned(),
        meta_b_prime: b_prime,
        rows,
    })
}

/// Run a BSD scenario against a loaded roster.
pub fn run_bsd(
    roster: &Roster,
    config: &RunConfig,
    tiers: &[String],
    name: &str,
) -> Result<BsdReport, HarnessError> {
    run_bsd_logged(roster, config, tiers, name, None)
}

/// [`run_bsd`] with optional battle logging.
pub fn run_bsd_logged(
    roster: &Roster,
    config: &RunConfig,
    tiers: &[String],
    name: &str,
    battle_log: Option<&Path>,
) -> Result<BsdReport, HarnessError> {
    let out: DiscoveryOutput = discover(roster, config, None, battle_log)?;
    let tier_map: HashMap<String, String> = roster
        .characters()
        .iter()
        .map(|c| {
            (
                c.species.clone(),
                c.tier.clone().unwrap_or_else(|| "below".to_string()),
            )
        })
        .collect();
    let discovered = tier_capture(&out.snapshot, &tier_map, tiers)?;

    // Baseline: the same-size meta a BST sort would predict.
    let banned = crate::discovery::resolve_bans(roster, config)?;
    let bst_entries: Vec<(String, f64)> = (0..roster.len())
        .filter(|&x| !banned[x])
        .map(|x| (roster.species(x).to_string(), roster.base_stat_total(x)))
        .collect();
    let bst_sorted = MetaSnapshot::from_weights(bst_entries, config.meta_size);
    let bst_baseline = tier_capture(&bst_sorted, &tier_map, tiers)?;

    Ok(BsdReport {
        name: name.to_string(),
        discovered,
        bst_baseline,
        meta: out.snapshot,
    })
}

/// Ordered tier labels for a roster: declared order if given, otherwise
/// first-appearance order of the roster's tier labels.
fn tier_order(spec: &ScenarioSpec, roster: &Roster) -> Vec<String> {
    if !spec.tiers.is_empty() {
        return spec.tiers.clone();
    }
    let mut order = Vec::new();
    for c in roster.characters() {
        if let Some(t) = &c.tier {
            if !order.contains(t) {
                order.push(t.clone());
            }
        }
    }
    order
}

/// Full file-to-file scenario run: validate, simulate, write
/// `report.json`, `report.csv`, and `manifest.json` into the output
/// directory.
pub fn run_scenario(spec: &ScenarioSpec, skip_unknown: bool) -> Result<ScenarioReport, HarnessError> {
    run_scenario_with_log(spec, skip_unknown, None)
}

/// [`run_scenario`] with optional per-battle JSON-lines logging (slower:
/// battles run sequentially while logging).
pub fn run_scenario_with_log(
    spec: &ScenarioSpec,
    skip_unknown: bool,
    battle_log: Option<&Path>,
) -> Result<ScenarioReport, HarnessError> {
    spec.validate()?;
    let roster = spec.load_roster()?;
    std::fs::create_dir_all(&spec.output_dir)
        .map_err(io_err(format!("creating {}", spec.output_dir.display())))?;

    let report = match spec.mode {
        Mode::Abc => {
            let pre = averaged_usage(&spec.pre_ban_usage_paths)?;
            let (initial, skipped) = to_initial_stats(
                &pre,
                &roster,
                spec.run_config.battles_per_month,
                skip_unknown,
            )?;
            for s in skipped {
                eprintln!("warning: skipping unknown species {s:?}");
            }
            let meta_b = if spec.post_ban_usage_paths.is_empty() {
                None
            } else {
                let post = averaged_usage(&spec.post_ban_usage_paths)?;
                Some(MetaSnapshot::from_weights(
                    post.into_iter()
                        .filter(|r| !skip_unknown || roster.index_of(&r.species).is_some())
                        .map(|r| (r.species, r.usage_fraction))
                        .collect(),
                    spec.run_config.meta_size,
                ))
            };
            ScenarioReport::Abc(run_abc_logged(
                &roster,
                &spec.run_config,
                initial,
                &spec.banned,
                meta_b.as_ref(),
                &spec.name,
                battle_log,
            )?)
        }
        Mode::Bsd => {
            let tiers = tier_order(spec, &roster);
            ScenarioReport::Bsd(run_bsd_logged(
                &roster,
                &spec.run_config,
                &tiers,
                &spec.name,
                battle_log,
            )?)
        }
    };

    write_json(&spec.output_dir.join("report.json"), &report)?;
    write_text(&spec.output_dir.join("report.csv"), &report_csv(&report))?;
    let manifest = Manifest::new(&spec.name, &spec.run_config, &spec.roster_path)?;
    write_json(&spec.output_dir.join("manifest.json"), &manifest)?;
    Ok(report)
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

pub fn report_csv(report: &ScenarioReport) -> String {
    match report {
        ScenarioReport::Abc(r) => {
            let rows: Vec<Vec<String>> = r
                .rows
                .iter()
                .map(|row| {
                    vec![
                        row.label.clone(),
                        fmt(row.overlap),
                        fmt(row.edit_distance),
                        fmt(row.edit_distance_delta),
                        row.rho.map(fmt).unwrap_or_default(),
                        row.p_value.map(fmt).unwrap_or_default(),
                    ]
                })
                .collect();
            to_csv(
                &["label", "overlap", "edit_distance", "edit_distance_delta", "rho", "p_value"],
                &rows,
            )
        }
        ScenarioReport::Bsd(r) => {
            let mut rows = Vec::new();
            for (source, rep) in [("discovered", &r.discovered), ("bst_baseline", &r.bst_baseline)]
            {
                for (tier, v) in &rep.capture {
                    rows.push(vec![source.into(), "capture".into(), tier.clone(), fmt(*v)]);
                }
                for (tier, v) in &rep.composition {
                    rows.push(vec![source.into(), "composition".into(), tier.clone(), fmt(*v)]);
                }
            }
            to_csv(&["source", "metric", "tier", "value"], &rows)
        }
    }
}
