use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use metasim::agents::AgentKind;
use metasim::discovery::MetaSnapshot;
use metasim::harness::fixture::write_fixture;
use metasim::harness::grid::{grid_csv, run_grid_search, DEFAULT_GRID};
use metasim::harness::scenario::{
    rank_delta_pairs, run_scenario_with_log, Mode, ScenarioSpec,
};
use metasim::ingestion::{
    average_months, emit_usage_json, emit_usage_text, parse_usage_json, parse_usage_text,
    to_initial_stats,
};
use metasim::metrics::{edit_distance, edit_distance_delta, overlap, spearman};

#[derive(Parser)]
#[command(name = "metasim", about = "Metagame discovery engine", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Agent override: random or heuristic.
    #[arg(long)]
    agent: Option<String>,
    /// Total-battle override for desk-scale runs.
    #[arg(long)]
    battles: Option<u64>,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Downgrade unknown usage-table species to warnings.
    #[arg(long)]
    skip_unknown: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario spec end to end and write reports.
    Run {
        /// Path to a scenario spec (JSON).
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Write one JSON line per battle (battle index + turn log) here.
        /// Forces sequential battle execution.
        #[arg(long)]
        battle_log: Option<PathBuf>,
    },
    /// Run the score-weight grid search for an ABC scenario.
    Gridsearch {
        /// Path to an ABC scenario spec (JSON) with post-ban usage files.
        scenario: PathBuf,
        /// Optional JSON file with an array of [c1, c2, c3] triples;
        /// defaults to the built-in 8-row grid.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Generate a synthetic fixture roster and tier file.
    Fixture {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of characters (minimum 12).
        #[arg(long, default_value_t = 740)]
        size: usize,
        /// Number of types (minimum 2).
        #[arg(long, default_value_t = 18)]
        types: usize,
        /// Output directory.
        #[arg(long, default_value = "fixture")]
        out: PathBuf,
    },
    /// Offline metric computation on two snapshot files.
    Metrics {
        /// Reference meta snapshot (JSON).
        b: PathBuf,
        /// Candidate meta snapshot (JSON).
        b_prime: PathBuf,
        /// Optional pre-change snapshot enabling delta and correlation.
        #[arg(long)]
        a: Option<PathBuf>,
    },
    /// Parse monthly usage tables, average them, and emit the canonical
    /// form.
    Ingest {
        /// Usage tables (text tables or .json record arrays).
        files: Vec<PathBuf>,
        /// Emit JSON records instead of the text table.
        #[arg(long)]
        json: bool,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Roster to resolve species against (enables validation).
        #[arg(long)]
        roster: Option<PathBuf>,
        /// Downgrade unknown species to warnings during roster validation.
        #[arg(long)]
        skip_unknown: bool,
    },
}

fn parse_agent(name: &str) -> Result<AgentKind> {
    match name {
        "random" => Ok(AgentKind::Random),
        "heuristic" => Ok(AgentKind::Heuristic),
        other => bail!("unknown agent {other:?}, expected random or heuristic"),
    }
}

fn apply_overrides(spec: &mut ScenarioSpec, o: &Overrides) -> Result<()> {
    if let Some(seed) = o.seed {
        spec.run_config.seed = seed;
    }
    if let Some(agent) = &o.agent {
        spec.run_config.agent = parse_agent(agent)?;
    }
    if let Some(battles) = o.battles {
        spec.run_config.total_battles = battles;
        spec.run_config.stats_update_interval =
            spec.run_config.stats_update_interval.min(battles.max(1));
        spec.run_config.battles_per_month = spec.run_config.battles_per_month.min(battles.max(1));
    }
    if let Some(out) = &o.out {
        spec.output_dir = out.clone();
    }
    Ok(())
}

fn load_snapshot(path: &PathBuf) -> Result<MetaSnapshot> {
    let raw = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&raw).with_context(|| format!("parsing {}", path.display()))
}

fn read_usage(path: &PathBuf) -> Result<Vec<metasim::ingestion::UsageRecord>> {
    let raw = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let records = if path.extension().is_some_and(|e| e == "json") {
        parse_usage_json(&raw)
    } else {
        parse_usage_text(&raw)
    };
    records.with_context(|| format!("parsing {}", path.display()))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            overrides,
            battle_log,
        } => {
            let mut spec = ScenarioSpec::load(&scenario)?;
            apply_overrides(&mut spec, &overrides)?;
            run_scenario_with_log(&spec, overrides.skip_unknown, battle_log.as_deref())?;
            println!("reports written to {}", spec.output_dir.display());
        }
        Command::Gridsearch {
            scenario,
            grid,
            overrides,
        } => {
            let mut spec = ScenarioSpec::load(&scenario)?;
            apply_overrides(&mut spec, &overrides)?;
            if spec.mode != Mode::Abc {
                bail!("grid search requires an ABC scenario");
            }
            if spec.post_ban_usage_paths.is_empty() {
                bail!("grid search needs post-ban usage files as the reference meta");
            }
            spec.validate()?;
            let roster = spec.load_roster()?;
            let pre: Vec<Vec<_>> = spec
                .pre_ban_usage_paths
                .iter()
                .map(read_usage)
                .collect::<Result<_>>()?;
            let (initial, skipped) = to_initial_stats(
                &average_months(&pre)?,
                &roster,
                spec.run_config.battles_per_month,
                overrides.skip_unknown,
            )?;
            for s in skipped {
                eprintln!("warning: skipping unknown species {s:?}");
            }
            let post: Vec<Vec<_>> = spec
                .post_ban_usage_paths
                .iter()
                .map(read_usage)
                .collect::<Result<_>>()?;
            let reference = MetaSnapshot::from_weights(
                average_months(&post)?
                    .into_iter()
                    .map(|r| (r.species, r.usage_fraction))
                    .collect(),
                spec.run_config.meta_size,
            );
            let triples: Vec<(f64, f64, f64)> = match grid {
                None => DEFAULT_GRID.to_vec(),
                Some(path) => {
                    let raw = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    let rows: Vec<[f64; 3]> = serde_json::from_str(&raw)
                        .with_context(|| format!("parsing {}", path.display()))?;
                    rows.into_iter().map(|[a, b, c]| (a, b, c)).collect()
                }
            };
            let mut config = spec.run_config.clone();
            config.apply_ban(&roster, &spec.banned)?;
            let rows = run_grid_search(&roster, &config, &initial, &reference, &triples)?;
            let csv = grid_csv(&rows);
            std::fs::create_dir_all(&spec.output_dir)
                .with_context(|| format!("creating {}", spec.output_dir.display()))?;
            let path = spec.output_dir.join("gridsearch.csv");
            std::fs::write(&path, &csv).with_context(|| format!("writing {}", path.display()))?;
            print!("{csv}");
        }
        Command::Fixture {
            seed,
            size,
            types,
            out,
        } => {
            let (roster_path, tier_path) = write_fixture(&out, seed, size, types)?;
            println!("{}", roster_path.display());
            println!("{}", tier_path.display());
        }
        Command::Metrics { b, b_prime, a } => {
            let snap_b = load_snapshot(&b)?;
            let snap_b2 = load_snapshot(&b_prime)?;
            let mut out = serde_json::json!({
                "overlap": overlap(&snap_b, &snap_b2)?,
                "edit_distance": edit_distance(&snap_b, &snap_b2)?,
            });
            if let Some(a) = a {
                let snap_a = load_snapshot(&a)?;
                out["edit_distance_delta"] =
                    edit_distance_delta(&snap_a, &snap_b, &snap_b2)?.into();
                let pairs = rank_delta_pairs(&snap_a, &snap_b, &snap_b2);
                if let Ok(corr) = spearman(&pairs) {
                    out["rho"] = corr.rho.into();
                    out["p_value"] = corr.p_value.into();
                    out["n"] = corr.n.into();
                }
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Command::Ingest {
            files,
            json,
            out,
            roster,
            skip_unknown,
        } => {
            if files.is_empty() {
                bail!("no usage files given");
            }
            let months: Vec<Vec<_>> = files.iter().map(read_usage).collect::<Result<_>>()?;
            let averaged = average_months(&months)?;
            if let Some(roster_path) = roster {
                let roster = metasim::roster::Roster::load(&roster_path)?;
                let (_, skipped) = to_initial_stats(&averaged, &roster, 1_000_000, skip_unknown)?;
                for s in skipped {
                    eprintln!("warning: skipping unknown species {s:?}");
                }
            }
            let body = if json {
                emit_usage_json(&averaged)
            } else {
                emit_usage_text(&averaged)
            };
            match out {
                Some(path) => std::fs::write(&path, body)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{body}"),
            }
        }
    }
    Ok(())
}
