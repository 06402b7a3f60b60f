//! `chemistry` command line.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use chemistry_core::datamodel::{CompetitionId, PlayerId, SplitBoundaries, TeamId};
use chemistry_core::jdi::JdiConfig;
use chemistry_core::metrics::{compute_pair_metrics, opponent_deltas};
use chemistry_core::predict::{make_training_set, train, FeatureContext, Target};
use chemistry_core::synth::{generate, MiniLeagueConfig};
use chemistry_core::teambuilder::SquadRestriction;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::engine::{Engine, PairQuery, PairRow, PredictRequest, TeamRequest, DEFAULT_ALPHA, DEFAULT_MIN_MINUTES};
use crate::error::{Result, ServiceError};
use crate::report;
use crate::store::{ModelRecord, Store};

#[derive(Debug, Parser)]
#[command(
    name = "chemistry",
    version,
    about = "Player chemistry metrics, prediction and team building"
)]
pub struct Cli {
    /// Store directory.
    #[arg(long, global = true, default_value = "store")]
    pub store: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the synthetic mini-league as raw CSV files.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Validate a raw dataset and load it into a fresh store.
    Ingest {
        #[arg(long)]
        data_dir: PathBuf,
    },
    /// Compute JOI and JDI for every pair and season.
    ComputeMetrics {
        /// Difference expectations against the raw match OI.
        #[arg(long)]
        raw_actual: bool,
        /// Keep raw responsibility shares instead of normalizing them.
        #[arg(long)]
        unnormalized_shares: bool,
    },
    /// List pairs by chemistry.
    RankPairs {
        #[command(flatten)]
        filter: SeasonFilter,
        #[arg(long)]
        team: Option<String>,
        #[arg(long, default_value = "joi90")]
        metric: Target,
        #[arg(long, default_value_t = DEFAULT_MIN_MINUTES)]
        min_minutes: f64,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Train chemistry predictors.
    Train {
        /// One target only; both when omitted.
        #[arg(long)]
        metric: Option<Target>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        n_trees: Option<usize>,
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long, default_value_t = chemistry_core::predict::TRAINING_MIN_MINUTES)]
        min_minutes: f64,
    },
    /// Predicted JOI90 and JDI90 for two players.
    PredictPair {
        player_a: String,
        player_b: String,
        #[command(flatten)]
        filter: SeasonFilter,
        #[arg(long)]
        json: bool,
    },
    /// Pick the eleven with the highest total chemistry.
    BuildTeam(BuildTeamArgs),
    /// Write top-k trend and link-graph reports.
    Report {
        #[arg(long, default_value = "joi90")]
        metric: Target,
        #[arg(long, default_value_t = report::DEFAULT_K)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_MIN_MINUTES)]
        min_minutes: f64,
        /// Minutes together for a pair to appear in the edge list.
        #[arg(long, default_value_t = report::DEFAULT_DISPLAY_MINUTES)]
        display_minutes: f64,
        /// Directory for trends.csv and edges.csv; printed when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP API over the store.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
    },
}

#[derive(Debug, Args)]
pub struct SeasonFilter {
    #[arg(long)]
    pub competition: Option<String>,
    #[arg(long)]
    pub season: Option<String>,
}

#[derive(Debug, Args)]
pub struct BuildTeamArgs {
    /// Comma-separated player ids.
    #[arg(long, value_delimiter = ',')]
    pub pool: Vec<String>,
    /// Use the squad of this team in --competition/--season as the pool.
    #[arg(long)]
    pub team: Option<String>,
    #[command(flatten)]
    pub filter: SeasonFilter,
    #[arg(long = "pin", value_delimiter = ',')]
    pub pinned: Vec<String>,
    #[arg(long = "exclude", value_delimiter = ',')]
    pub excluded: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long)]
    pub standardize: bool,
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = DEFAULT_MIN_MINUTES)]
    pub min_minutes: f64,
    /// Comma-separated players of a restricted group.
    #[arg(long, value_delimiter = ',', requires = "restrict_count")]
    pub restrict: Vec<String>,
    /// Exact number of restricted-group players in the eleven.
    #[arg(long, requires = "restrict")]
    pub restrict_count: Option<usize>,
    /// JSON request file, in the /team/build body format; replaces all other options.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

fn ids<T: From<String>>(v: &[String]) -> Vec<T> {
    v.iter().map(|s| T::from(s.clone())).collect()
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| ServiceError::Internal(e.to_string()))
}

fn io(e: std::io::Error) -> ServiceError {
    ServiceError::Internal(e.to_string())
}

pub fn pairs_csv(rows: &[PairRow]) -> String {
    let mut s = String::from(
        "rank,competition_id,season_label,team_id,player_a,name_a,player_b,name_b,minutes_together,interaction_count,joi90,jdi90\n",
    );
    for r in rows {
        let jdi = r.jdi90.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.rank,
            r.competition_id,
            r.season_label,
            r.team_id,
            r.player_a,
            r.name_a,
            r.player_b,
            r.name_b,
            r.minutes_together,
            r.interaction_count,
            r.joi90,
            jdi
        );
    }
    s
}

fn team_request(engine: &Engine, a: &BuildTeamArgs) -> Result<TeamRequest> {
    if let Some(path) = &a.problem {
        let text = std::fs::read_to_string(path).map_err(|e| ServiceError::User(format!("{}: {e}", path.display())))?;
        return serde_json::from_str(&text).map_err(|e| ServiceError::User(format!("{}: {e}", path.display())));
    }
    let competition = a.filter.competition.clone().map(CompetitionId::from);
    let season = a.filter.season.clone();
    let pool: Vec<PlayerId> = match (&a.team, a.pool.is_empty()) {
        (Some(_), false) => return Err(ServiceError::User("give either --pool or --team, not both".to_string())),
        (Some(team), true) => {
            let (Some(c), Some(s)) = (&competition, &season) else {
                return Err(ServiceError::User(
                    "--team needs --competition and --season".to_string(),
                ));
            };
            engine.squad(&TeamId::from(team.clone()), c, s)?
        }
        (None, false) => ids(&a.pool),
        (None, true) => return Err(ServiceError::User("give --pool or --team".to_string())),
    };
    let squad_restriction = a.restrict_count.map(|count| SquadRestriction {
        players: ids::<PlayerId>(&a.restrict).into_iter().collect(),
        count,
    });
    Ok(TeamRequest {
        pool,
        pinned: ids(&a.pinned),
        excluded: ids(&a.excluded),
        alpha: a.alpha,
        standardize: a.standardize,
        exact: a.exact,
        competition,
        season,
        min_minutes: a.min_minutes,
        squad_restriction,
    })
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let root = cli.store.as_path();
    match cli.command {
        Command::Generate { out: dir, seed } => {
            let ds = generate(&MiniLeagueConfig {
                seed,
                ..MiniLeagueConfig::default()
            });
            ds.write(&dir)?;
            writeln!(out, "wrote {} matches, {} players", ds.matches.len(), ds.players.len()).map_err(io)?;
        }
        Command::Ingest { data_dir } => {
            let store = Store::ingest(root, &data_dir)?;
            writeln!(out, "dataset_sha256 {}", store.manifest.dataset_sha256).map_err(io)?;
        }
        Command::ComputeMetrics {
            raw_actual,
            unnormalized_shares,
        } => {
            let mut store = Store::open(root)?;
            let ds = store.dataset()?;
            let cfg = JdiConfig {
                raw_actual,
                normalize_shares: !unnormalized_shares,
                ..JdiConfig::default()
            };
            let metrics = compute_pair_metrics(&ds, &cfg);
            let deltas = opponent_deltas(&ds, &cfg);
            let files = store.write_metrics(&metrics, &deltas, &cfg)?;
            writeln!(out, "{} pair-seasons in {} files", metrics.len(), files.len()).map_err(io)?;
        }
        Command::RankPairs {
            filter,
            team,
            metric,
            min_minutes,
            limit,
            json,
        } => {
            let engine = Engine::open(root)?;
            let q = PairQuery {
                team: team.map(TeamId::from),
                competition: filter.competition.map(CompetitionId::from),
                season: filter.season,
                metric,
                min_minutes,
                limit,
            };
            let rows = engine.pairs(&q)?;
            if json {
                writeln!(out, "{}", to_json(&engine.wrap(rows))?).map_err(io)?;
            } else {
                out.write_all(pairs_csv(&rows).as_bytes()).map_err(io)?;
            }
        }
        Command::Train {
            metric,
            seed,
            n_trees,
            max_depth,
            learning_rate,
            min_minutes,
        } => {
            let mut store = Store::open(root)?;
            if !store.has_metrics() {
                return Err(ServiceError::User(
                    "no metrics in the store (run `chemistry compute-metrics`)".to_string(),
                ));
            }
            let ds = store.dataset()?;
            let metrics = store.read_metrics()?;
            let fc = FeatureContext::new(&ds);
            let targets = metric.map(|t| vec![t]).unwrap_or_else(|| Target::ALL.to_vec());
            for t in targets {
                let mut params = t.default_params();
                params.seed = seed;
                params.n_trees = n_trees.unwrap_or(params.n_trees);
                params.max_depth = max_depth.unwrap_or(params.max_depth);
                params.learning_rate = learning_rate.unwrap_or(params.learning_rate);
                let sets = make_training_set(&fc, &metrics, t, min_minutes, &SplitBoundaries::default())?;
                let p = train(&sets, t, &params)?;
                store.write_model(
                    &p,
                    ModelRecord {
                        seed,
                        n_trees: params.n_trees,
                        max_depth: params.max_depth,
                        learning_rate: params.learning_rate,
                        min_minutes,
                    },
                )?;
                let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".to_string());
                writeln!(
                    out,
                    "{t}: train={} validation={} test={} baseline={:.6} validation_rmse={} test_rmse={}",
                    sets.train.len(),
                    sets.validation.len(),
                    sets.test.len(),
                    p.baseline,
                    fmt(p.validation_rmse),
                    fmt(p.test_rmse)
                )
                .map_err(io)?;
            }
        }
        Command::PredictPair {
            player_a,
            player_b,
            filter,
            json,
        } => {
            let engine = Engine::open(root)?;
            let p = engine.predict(&PredictRequest {
                player_a: player_a.into(),
                player_b: player_b.into(),
                competition: filter.competition.map(CompetitionId::from),
                season: filter.season,
            })?;
            if json {
                writeln!(out, "{}", to_json(&engine.wrap(p))?).map_err(io)?;
            } else {
                writeln!(out, "{} {} joi90={} jdi90={}", p.player_a, p.player_b, p.joi90, p.jdi90).map_err(io)?;
            }
        }
        Command::BuildTeam(a) => {
            let engine = Engine::open(root)?;
            let req = team_request(&engine, &a)?;
            let r = engine.build_team(&req)?;
            if a.json {
                writeln!(out, "{}", to_json(&engine.wrap(r))?).map_err(io)?;
            } else {
                let s = &r.solution;
                let mut text = String::new();
                let _ = writeln!(
                    text,
                    "status={} objective={} bound_gap={} nodes={} measured_pairs={} predicted_pairs={}",
                    match s.status {
                        chemistry_core::teambuilder::SolveStatus::Optimal => "optimal",
                        chemistry_core::teambuilder::SolveStatus::Heuristic => "heuristic",
                    },
                    s.objective,
                    s.bound_gap,
                    s.node_count,
                    r.measured_pairs,
                    r.predicted_pairs
                );
                for p in &s.selected {
                    let _ = writeln!(text, "{} {}", p, r.lines[p].code());
                }
                out.write_all(text.as_bytes()).map_err(io)?;
            }
        }
        Command::Report {
            metric,
            k,
            min_minutes,
            display_minutes,
            out: dir,
        } => {
            if k == 0 {
                return Err(ServiceError::User("--k must be at least 1".to_string()));
            }
            let engine = Engine::open(root)?;
            engine.require_metrics()?;
            let trends = report::trends_csv(&report::trends(engine.metrics(), metric, k, min_minutes));
            let edges = report::edges_csv(&report::edges(engine.metrics(), display_minutes));
            match dir {
                Some(dir) => {
                    write_report(&dir, "trends.csv", &trends)?;
                    write_report(&dir, "edges.csv", &edges)?;
                    writeln!(out, "wrote trends.csv, edges.csv").map_err(io)?;
                }
                None => {
                    out.write_all(trends.as_bytes()).map_err(io)?;
                    writeln!(out).map_err(io)?;
                    out.write_all(edges.as_bytes()).map_err(io)?;
                }
            }
        }
        Command::Serve { addr } => {
            let engine = Engine::open(root)?;
            let rt = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(io)?;
            rt.block_on(crate::http::serve(engine, &addr))?;
        }
    }
    Ok(())
}

fn write_report(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(name), text).map_err(io)
}

/// Runs the CLI and returns the process exit code: 0 ok, 1 user error,
/// 2 internal error.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
