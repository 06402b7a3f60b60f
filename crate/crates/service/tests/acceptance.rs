//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use chemistry_core::datamodel::{
    Action, ActionResult, ActionType, Appearance, BodyPart, Cell, GridPosition, MatchId, PitchPoint, PlayerId,
    PlayerProfile, Position, PositionLine, Split,
};
use chemistry_core::jdi::{expected_oi, responsibility_individual, responsibility_shares, ImpactHistory, JdiConfig};
use chemistry_core::joi::{extract_interactions, joi90, joi_by_pair, joi_match};
use chemistry_core::metrics::compute_pair_metrics;
use chemistry_core::predict::{
    baseline_rmse, build_pair_features, evaluate_rmse, train, Example, GbdtParams, Imputer, SeasonContext, Target,
    TrainedPredictor, TrainingSets,
};
use chemistry_core::synth::{generate, random_team_problem, MiniLeagueConfig, TeamInstanceConfig};
use chemistry_core::teambuilder::{
    brute_force_oracle, solve_exact, ChemistryMatrix, TeamBuildProblem, TeamBuildSolution, TeamError,
};
use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

const OFFENSIVE: [ActionType; 5] = [
    ActionType::Pass,
    ActionType::Cross,
    ActionType::Dribble,
    ActionType::TakeOn,
    ActionType::Shot,
];

fn random_actions(rng: &mut ChaCha8Rng) -> Vec<Action> {
    let n = rng.random_range(0..80);
    let mut t = 0.0;
    let mut period = 1;
    (0..n)
        .map(|_| {
            t += rng.random_range(0.5..15.0);
            if period == 1 && rng.random_bool(0.02) {
                period = 2;
                t = 0.0;
            }
            let team = if rng.random_bool(0.55) { "H" } else { "A" };
            let action_type = if rng.random_bool(0.15) {
                ActionType::Other
            } else {
                OFFENSIVE[rng.random_range(0..OFFENSIVE.len())]
            };
            Action {
                match_id: "m".into(),
                period,
                seconds: t,
                team_id: team.into(),
                player_id: format!("{team}{}", rng.random_range(0..5)).into(),
                action_type,
                result: ActionResult::Success,
                body_part: BodyPart::Foot,
                start: PitchPoint { x: 30.0, y: 30.0 },
                end: PitchPoint { x: 40.0, y: 30.0 },
                value: rng.random_range(-0.1..0.25),
            }
        })
        .collect()
}

/// Independent JOI: sum both actions' values over every adjacent pair of
/// offensive actions by `p` and `q` (either order) for the same team in the
/// same period.
fn oracle_joi(p: &PlayerId, q: &PlayerId, actions: &[Action]) -> f64 {
    let seq: Vec<&Action> = actions.iter().filter(|a| a.action_type != ActionType::Other).collect();
    seq.windows(2)
        .filter(|w| {
            let (x, y) = (w[0], w[1]);
            x.team_id == y.team_id
                && x.period == y.period
                && p != q
                && ((&x.player_id, &y.player_id) == (p, q) || (&x.player_id, &y.player_id) == (q, p))
        })
        .map(|w| w[0].value + w[1].value)
        .sum()
}

fn fixture_players() -> Vec<PlayerId> {
    ["H", "A"]
        .iter()
        .flat_map(|t| (0..5).map(move |i| PlayerId(format!("{t}{i}"))))
        .collect()
}

fn joi_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let players = fixture_players();
    let mut compared = 0;
    for _ in 0..500 {
        let actions = random_actions(&mut rng);
        let ints = extract_interactions(&actions);
        for p in &players {
            for q in &players {
                if p == q {
                    continue;
                }
                let (got, want) = (joi_match(p, q, &ints), oracle_joi(p, q, &actions));
                ensure!(got == want, "JOI({p},{q}) = {got}, oracle {want}");
                compared += 1;
            }
        }
    }
    let ds = generate(&MiniLeagueConfig::default());
    let t = Instant::now();
    let metrics = compute_pair_metrics(&ds, &JdiConfig::default());
    let secs = t.elapsed().as_secs_f64();
    ensure!(!metrics.is_empty(), "no metrics");
    ensure!(secs < 5.0, "mini-league season took {secs:.2}s");
    Ok(format!("{compared} pair comparisons exact; mini-league in {secs:.3}s"))
}

fn joi_decomposition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2025);
    let players = fixture_players();
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let actions = random_actions(&mut rng);
        let ints = extract_interactions(&actions);
        let pairs: f64 = joi_by_pair(&ints).values().map(|v| v.0).sum();
        let direct: f64 = ints.iter().map(|i| i.value).sum();
        worst = worst.max((pairs - direct).abs());
        for p in &players {
            for q in &players {
                let d = (joi_match(p, q, &ints) - joi_match(q, p, &ints)).abs();
                worst = worst.max(d);
            }
        }
    }
    for _ in 0..200 {
        let k = rng.random_range(1..8);
        let games: Vec<(f64, f64)> = (0..k)
            .map(|_| (rng.random_range(-0.5..2.0), rng.random_range(1.0..96.0)))
            .collect();
        let reps = rng.random_range(2..6);
        let once = joi90(games.iter().copied()).unwrap();
        let many = joi90(games.iter().cycle().take(reps * k).copied()).unwrap();
        worst = worst.max((once - many).abs());
    }
    ensure!(worst <= 1e-9, "largest deviation {worst:e}");
    Ok(format!("largest deviation {worst:e}"))
}

fn random_lineup(rng: &mut ChaCha8Rng) -> Vec<Appearance> {
    let mut apps = Vec::new();
    for team in ["H", "A"] {
        for i in 0..rng.random_range(1..=10) {
            let on = if rng.random_bool(0.75) {
                0.0
            } else {
                rng.random_range(0.0..85.0)
            };
            let off = if rng.random_bool(0.75) {
                94.0
            } else {
                rng.random_range(on..94.0)
            };
            apps.push(Appearance {
                match_id: "m".into(),
                player_id: format!("{team}{i}").into(),
                team_id: team.into(),
                position: Position::Grid(GridPosition::ALL[rng.random_range(0..GridPosition::ALL.len())]),
                minute_on: on,
                minute_off: off,
            });
        }
        apps.push(Appearance {
            match_id: "m".into(),
            player_id: format!("{team}gk").into(),
            team_id: team.into(),
            position: Position::Goalkeeper,
            minute_on: 0.0,
            minute_off: 94.0,
        });
    }
    apps
}

fn jdi_conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2026);
    let mut groups = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let apps = random_lineup(&mut rng);
        for o in &apps {
            let shares = responsibility_shares(&apps, o, true);
            if shares.is_empty() {
                continue;
            }
            worst = worst.max((shares.iter().map(|s| s.normalized).sum::<f64>() - 1.0).abs());
            groups += 1;
        }
    }
    ensure!(groups > 0, "no (match, opponent) groups");
    ensure!(worst <= 1e-9, "share sum off by {worst:e}");

    let (p, m) = (PlayerId::from("p"), MatchId::from("m"));
    let zero = expected_oi(&p, &m, ImpactHistory::default(), 0.1, 700.0);
    ensure!(zero.blended == 0.1, "0 minutes blended {}", zero.blended);
    let mut long = ImpactHistory::default();
    for i in 0..8 {
        long.add(0.1 * f64::from(i), 90.0);
    }
    let full = expected_oi(&p, &m, long, 0.1, 700.0);
    ensure!(
        full.blended == full.empirical_rate,
        "720 minutes blended {}",
        full.blended
    );
    let mut exact700 = ImpactHistory::default();
    exact700.add(1.4, 700.0);
    let at = expected_oi(&p, &m, exact700, 0.1, 700.0);
    ensure!(at.blended == at.empirical_rate, "700 minutes blended {}", at.blended);

    let mut two = ImpactHistory::default();
    two.add(0.2, 90.0);
    two.add(0.4, 90.0);
    let e = expected_oi(&p, &m, two, 0.1, 700.0);
    let hand = (180.0 / 700.0) * 0.3 + (520.0 / 700.0) * 0.1;
    ensure!(
        (e.blended - hand).abs() <= 1e-6,
        "worked example {} vs {hand}",
        e.blended
    );
    ensure!(
        format!("{:.4}", e.blended) == "0.1514",
        "worked example rounds to {:.4}",
        e.blended
    );
    Ok(format!(
        "{groups} groups, worst {worst:e}; worked example {:.6}",
        e.blended
    ))
}

/// The 5-by-5 position grid, one row per line, tab-separated cells.
const GRID: &str = "\
Left Wing Forward\t\tStriker\t\tRight Wing Forward
\tLeft Attacking Midfielder\tSecond Striker & Attacking Midfielder\tRight Attacking Midfielder\t
Left Winger\tLeft Center Midfielder\t\tRight Center Midfielder\tRight Winger
Left Wingback\tLeft Defensive Midfielder\tDefensive Midfielder\tRight Defensive Midfielder\tRight Wingback
Left Back\tLeft Center Back\tCenter Back\tRight Center Back\tRight Back";

fn grid_conformance() -> Outcome {
    let mut layout: BTreeMap<String, Cell> = BTreeMap::new();
    let mut entries = 0;
    for (r, line) in GRID.lines().enumerate() {
        for (c, name) in line.split('\t').enumerate() {
            if name.is_empty() {
                continue;
            }
            entries += 1;
            for part in name.split(" & ") {
                layout.insert(part.to_string(), Cell::new(r as u8, c as u8));
            }
        }
    }
    ensure!(entries == 20, "grid has {entries} positions");
    for g in GridPosition::ALL {
        let want = layout
            .get(g.display_name())
            .ok_or_else(|| format!("{} not in grid", g.display_name()))?;
        ensure!(
            g.cell() == *want,
            "{} at {:?}, expected {:?}",
            g.display_name(),
            g.cell(),
            want
        );
        let parsed: Position = g.code().parse().map_err(|e| format!("{e:?}"))?;
        ensure!(parsed == Position::Grid(g), "{} does not load", g.code());
    }
    let cells: std::collections::BTreeSet<Cell> = GridPosition::ALL.iter().map(|g| g.cell()).collect();
    ensure!(cells.len() == 20, "{} distinct cells", cells.len());

    let rb = GridPosition::RightBack.cell();
    let lw = GridPosition::LeftWinger.cell().mirrored();
    ensure!(rb.distance(lw) == 2.0, "RB vs opponent LW distance {}", rb.distance(lw));
    let share = responsibility_individual(
        Position::Grid(GridPosition::RightBack),
        Position::Grid(GridPosition::LeftWingForward),
    );
    ensure!(share == Some(1.0), "coincident share {share:?}");
    Ok("20 positions, distance 2, coincident share 1".to_string())
}

fn planted_sets(seed: u64, n: usize) -> TrainingSets {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profiles: BTreeMap<PlayerId, PlayerProfile> = (0..150)
        .map(|i| {
            let nat = ["NL", "BE", "BR", "FR"][rng.random_range(0..4)];
            let p = PlayerProfile {
                player_id: PlayerId(format!("P{i:03}")),
                name: format!("P{i}"),
                birth_date: NaiveDate::from_ymd_opt(rng.random_range(1988..2001), 6, 1),
                height_cm: Some(rng.random_range(168.0..198.0)),
                weight_kg: Some(rng.random_range(62.0..92.0)),
                nationality: Some(nat.to_string()),
                mother_tongue: None,
                region: Some("Europe".to_string()),
                subregion: None,
                preferred_foot: None,
                position_line: PositionLine::ALL[rng.random_range(0..4)],
                physical: std::array::from_fn(|_| Some(rng.random_range(1.0..5.0))),
                role_scores: std::array::from_fn(|_| Some(rng.random_range(0.0..1.0))),
            };
            (p.player_id.clone(), p)
        })
        .collect();
    let imputer = Imputer::fit(profiles.values());
    let ids: Vec<&PlayerId> = profiles.keys().collect();
    let mut sets = TrainingSets::default();
    for k in 0..n {
        let p = ids[rng.random_range(0..ids.len())];
        let q = loop {
            let q = ids[rng.random_range(0..ids.len())];
            if q != p {
                break q;
            }
        };
        let ctx = SeasonContext {
            reference_date: NaiveDate::from_ymd_opt(2018, 8, 1).unwrap(),
            matches_together_before_season: rng.random_range(0..30),
        };
        let features = build_pair_features(&profiles, &imputer, p, q, ctx).unwrap();
        // Label driven by one numeric feature: player a's height.
        let a = features.pair.a.clone();
        let label = (profiles[&a].height_cm.unwrap() - 183.0) / 100.0 + rng.random_range(-0.02..0.02);
        let split = [Split::Train, Split::Train, Split::Train, Split::Validation, Split::Test][k % 5];
        let ex = Example {
            competition_id: "SYN".into(),
            season_label: "2017/2018".to_string(),
            team_id: "T".into(),
            split,
            features,
            label,
        };
        match split {
            Split::Train => sets.train.push(ex),
            Split::Validation => sets.validation.push(ex),
            Split::Test => sets.test.push(ex),
        }
    }
    sets
}

fn predictor() -> Outcome {
    let sets = planted_sets(77, 800);
    let params = GbdtParams {
        n_trees: 150,
        max_depth: 4,
        ..GbdtParams::default()
    };
    let a = train(&sets, Target::Joi90, &params).map_err(|e| e.to_string())?;
    for (i, w) in a.train_rmse.windows(2).enumerate() {
        ensure!(
            w[1] <= w[0],
            "training RMSE rose at iteration {}: {} > {}",
            i + 1,
            w[1],
            w[0]
        );
    }
    let model = evaluate_rmse(&a, &sets.test).map_err(|e| e.to_string())?;
    let base = baseline_rmse(&sets.test, a.baseline).map_err(|e| e.to_string())?;
    let gain = 1.0 - model / base;
    ensure!(
        gain >= 0.20,
        "held-out RMSE {model} vs baseline {base} ({:.1}% better)",
        100.0 * gain
    );

    let b = train(&sets, Target::Joi90, &params).map_err(|e| e.to_string())?;
    let dump = a.dump();
    ensure!(dump == b.dump(), "same-seed retrain differs");
    let back = TrainedPredictor::load(&dump).map_err(|e| e.to_string())?;
    ensure!(back == a && back.dump() == dump, "dump/load round trip differs");
    for ex in &sets.test {
        let x = a.model.predict(&ex.features.values).unwrap();
        let y = back.model.predict(&ex.features.values).unwrap();
        ensure!(x.to_bits() == y.to_bits(), "reloaded prediction differs");
    }

    let joi = Target::Joi90.default_params();
    let jdi = Target::Jdi90.default_params();
    ensure!(
        (joi.n_trees, joi.max_depth) == (500, 7),
        "JOI90 defaults {}/{}",
        joi.n_trees,
        joi.max_depth
    );
    ensure!(
        (jdi.n_trees, jdi.max_depth) == (1000, 5),
        "JDI90 defaults {}/{}",
        jdi.n_trees,
        jdi.max_depth
    );
    Ok(format!(
        "held-out RMSE {:.1}% below baseline; retrain and round trip bit-identical",
        100.0 * gain
    ))
}

fn instance_cfg(pool: usize) -> TeamInstanceConfig {
    TeamInstanceConfig {
        pool,
        coarse_values: false,
        max_pins: 2,
        max_exclusions: 2,
        squad_restriction: false,
    }
}

fn reshape(p: &TeamBuildProblem, f: impl Fn(f64) -> f64) -> TeamBuildProblem {
    let n = p.matrix.len();
    let values: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 0.0 } else { f(p.matrix.values[i][j]) })
                .collect()
        })
        .collect();
    TeamBuildProblem {
        matrix: ChemistryMatrix::from_values(p.matrix.players.clone(), &values).unwrap(),
        ..p.clone()
    }
}

fn same_outcome(a: &Result<TeamBuildSolution, TeamError>, b: &Result<TeamBuildSolution, TeamError>) -> bool {
    match (a, b) {
        (Ok(x), Ok(y)) => x.selected == y.selected,
        (Err(TeamError::Infeasible(_)), Err(TeamError::Infeasible(_))) => true,
        _ => false,
    }
}

fn team_builder() -> Outcome {
    let mut solved = 0;
    for seed in 0..1000u64 {
        let mut cfg = instance_cfg(12 + (seed % 3) as usize);
        cfg.coarse_values = seed % 3 == 0;
        cfg.squad_restriction = seed % 7 == 0;
        let p = random_team_problem(seed, cfg);
        let (exact, oracle) = (solve_exact(&p), brute_force_oracle(&p));
        match (&exact, &oracle) {
            (Ok(x), Ok(y)) => {
                ensure!(
                    x.objective == y.objective,
                    "seed {seed}: objective {} vs oracle {}",
                    x.objective,
                    y.objective
                );
                ensure!(x.selected == y.selected, "seed {seed}: tie-broken sets differ");
                let v = p.violations(&x.selected);
                ensure!(v.is_empty(), "seed {seed}: {v:?}");
                ensure!(x.selected.len() == 11, "seed {seed}: {} players", x.selected.len());
                solved += 1;
            }
            (Err(TeamError::Infeasible(_)), Err(TeamError::Infeasible(_))) => {}
            _ => return Err(format!("seed {seed}: {exact:?} vs {oracle:?}")),
        }
    }
    ensure!(solved >= 500, "only {solved} feasible instances");

    let mut cfg = instance_cfg(25);
    cfg.max_pins = 0;
    cfg.max_exclusions = 0;
    let big = random_team_problem(4242, cfg);
    let t = Instant::now();
    let sol = solve_exact(&big).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    ensure!(secs < 10.0, "25-player pool took {secs:.2}s");
    ensure!(
        big.violations(&sol.selected).is_empty(),
        "25-player solution violates constraints"
    );

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..100u64 {
        let p = random_team_problem(10_000 + seed, instance_cfg(14));
        let base = solve_exact(&p);
        let shift = f64::from(rng.random_range(-16i32..16));
        let scale = f64::powi(2.0, rng.random_range(-3..4));
        let moved = solve_exact(&reshape(&p, |v| v * scale + shift));
        ensure!(
            same_outcome(&base, &moved),
            "seed {seed}: argmax moved under {scale}x + {shift}"
        );

        let n = p.matrix.len();
        let zero = vec![vec![0.0; n]; n];
        let noise: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.random_range(-1e3..1e3)).collect())
            .collect();
        for standardized in [false, true] {
            let a =
                ChemistryMatrix::from_components(p.matrix.players.clone(), &p.matrix.values, &zero, 1.0, standardized)
                    .unwrap();
            let b =
                ChemistryMatrix::from_components(p.matrix.players.clone(), &p.matrix.values, &noise, 1.0, standardized)
                    .unwrap();
            let sa = solve_exact(&TeamBuildProblem { matrix: a, ..p.clone() });
            let sb = solve_exact(&TeamBuildProblem { matrix: b, ..p.clone() });
            ensure!(same_outcome(&sa, &sb), "seed {seed}: alpha 1 depends on JDI");
        }
    }
    Ok(format!(
        "{solved}/1000 feasible instances match the oracle; 25-pool in {secs:.3}s"
    ))
}

fn pipeline() -> Outcome {
    let first = tempfile::tempdir().map_err(|e| e.to_string())?;
    let second = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = common::pipeline(first.path());
    let b = common::pipeline(second.path());
    ensure!(a == b, "two runs differ");
    let bad = common::golden_mismatches(&a);
    ensure!(bad.is_empty(), "golden mismatch: {}", bad.join(", "));

    let store = first.path().join("store");
    let client = common::api::Client::new(&store);
    let queries = common::api::random_queries(client.engine(), 2019, 50);
    for q in &queries {
        common::api::compare(&client, &store, q)?;
    }
    Ok(format!(
        "{} artifacts byte-identical to golden; 50 CLI/HTTP queries agree",
        a.len()
    ))
}

fn main() {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check); 7] = [
        ("JOI oracle", joi_oracle),
        ("JOI decomposition & symmetry", joi_decomposition),
        ("JDI conservation", jdi_conservation),
        ("Grid conformance", grid_conformance),
        ("Predictor", predictor),
        ("Team builder", team_builder),
        ("Pipeline determinism", pipeline),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.2}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{secs:.2}s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
