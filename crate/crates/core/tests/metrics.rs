use std::collections::BTreeMap;
use std::time::Instant;

use chemistry_core::datamodel::{
    shared_minutes, Action, ActionResult, ActionType, Appearance, BodyPart, GridPosition, PairKey, PitchPoint,
    PlayerId, Position,
};
use chemistry_core::jdi::{jdi_by_pair, responsibility_shares, JdiConfig};
use chemistry_core::joi::{extract_interactions, joi90, joi_by_pair, joi_match};
use chemistry_core::metrics::{compute_pair_metrics, opponent_deltas};
use chemistry_core::synth::{generate, MiniLeagueConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TYPES: [ActionType; 6] = [
    ActionType::Pass,
    ActionType::Cross,
    ActionType::Dribble,
    ActionType::TakeOn,
    ActionType::Shot,
    ActionType::Other,
];

fn random_actions(rng: &mut ChaCha8Rng) -> Vec<Action> {
    let n = rng.random_range(0..60);
    let mut t = 0.0;
    let mut period = 1;
    (0..n)
        .map(|_| {
            t += rng.random_range(1.0..20.0);
            if period == 1 && rng.random_bool(0.03) {
                period = 2;
                t = 0.0;
            }
            let team = if rng.random_bool(0.5) { "H" } else { "A" };
            Action {
                match_id: "m".into(),
                period,
                seconds: t,
                team_id: team.into(),
                player_id: format!("{team}{}", rng.random_range(0..4)).into(),
                action_type: TYPES[rng.random_range(0..TYPES.len())],
                result: ActionResult::Success,
                body_part: BodyPart::Foot,
                start: PitchPoint { x: 10.0, y: 10.0 },
                end: PitchPoint { x: 20.0, y: 20.0 },
                value: rng.random_range(-0.05..0.2),
            }
        })
        .collect()
}

/// Direct scan: walk the offensive actions and add every consecutive
/// same-team, same-period exchange between exactly `p` and `q`.
fn brute_joi(p: &PlayerId, q: &PlayerId, actions: &[Action]) -> f64 {
    let offensive: Vec<&Action> = actions
        .iter()
        .filter(|a| !matches!(a.action_type, ActionType::Other))
        .collect();
    let mut total = 0.0;
    for i in 1..offensive.len() {
        let (a, b) = (offensive[i - 1], offensive[i]);
        let players_match = (a.player_id == *p && b.player_id == *q) || (a.player_id == *q && b.player_id == *p);
        if players_match && p != q && a.team_id == b.team_id && a.period == b.period {
            total += a.value + b.value;
        }
    }
    total
}

#[test]
fn joi_matches_direct_scan_on_random_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let actions = random_actions(&mut rng);
        let ints = extract_interactions(&actions);
        let players: Vec<PlayerId> = ["H0", "H1", "H2", "H3", "A0", "A1"].map(PlayerId::from).to_vec();
        for p in &players {
            for q in &players {
                if p != q {
                    assert_eq!(joi_match(p, q, &ints), brute_joi(p, q, &actions));
                }
            }
        }
        let by_pair = joi_by_pair(&ints);
        let pair_total: f64 = by_pair.values().map(|v| v.0).sum();
        let int_total: f64 = ints.iter().map(|i| i.value).sum();
        assert!((pair_total - int_total).abs() < 1e-9);
    }
}

#[test]
fn per90_is_invariant_under_replication() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let k = rng.random_range(1..6);
        let games: Vec<(f64, f64)> = (0..k)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(1.0..95.0)))
            .collect();
        let once = joi90(games.clone()).unwrap();
        let thrice = joi90(games.iter().cycle().take(3 * k).copied()).unwrap();
        assert!((once - thrice).abs() < 1e-9);
    }
}

fn random_lineup(rng: &mut ChaCha8Rng) -> Vec<Appearance> {
    let mut apps = Vec::new();
    for team in ["H", "A"] {
        let n = rng.random_range(2..=10);
        for i in 0..n {
            let pos = GridPosition::ALL[rng.random_range(0..GridPosition::ALL.len())];
            let on = if rng.random_bool(0.7) {
                0.0
            } else {
                rng.random_range(0.0..80.0)
            };
            let off = if rng.random_bool(0.7) {
                93.0
            } else {
                rng.random_range(on..93.0)
            };
            apps.push(Appearance {
                match_id: "m".into(),
                player_id: format!("{team}{i}").into(),
                team_id: team.into(),
                position: Position::Grid(pos),
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
            minute_off: 93.0,
        });
    }
    apps
}

#[test]
fn normalized_shares_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut checked = 0;
    for _ in 0..200 {
        let apps = random_lineup(&mut rng);
        for o in &apps {
            let shares = responsibility_shares(&apps, o, true);
            if shares.is_empty() {
                continue;
            }
            let total: f64 = shares.iter().map(|s| s.normalized).sum();
            assert!((total - 1.0).abs() < 1e-9, "{total}");
            assert!(shares.iter().all(|s| !s.pair.contains(&o.player_id)));
            checked += 1;
        }
    }
    assert!(checked > 500);
}

#[test]
fn goalkeepers_get_no_share() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..50 {
        let apps = random_lineup(&mut rng);
        for o in &apps {
            for s in responsibility_shares(&apps, o, true) {
                assert!(!s.pair.a.as_str().ends_with("gk") && !s.pair.b.as_str().ends_with("gk"));
            }
        }
    }
}

#[test]
fn mini_league_metrics_are_consistent() {
    let ds = generate(&MiniLeagueConfig::default());
    let cfg = JdiConfig::default();
    let t = Instant::now();
    let metrics = compute_pair_metrics(&ds, &cfg);
    let elapsed = t.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "{elapsed:?}");
    assert!(!metrics.is_empty());

    // Season JOI decomposes into the interactions of each team-season. An
    // interaction across a substitution links two players who never shared
    // the pitch; such pairs have no per-90 rate and no metrics row.
    let mut by_season: BTreeMap<(String, String), f64> = BTreeMap::new();
    for m in ds.matches.values() {
        let apps = ds.match_appearances(&m.match_id);
        for i in extract_interactions(ds.match_actions(&m.match_id)) {
            if shared_minutes(apps, &[&i.first_player, &i.second_player]) > 0.0 {
                *by_season
                    .entry((m.season_label.clone(), i.team_id.0.clone()))
                    .or_default() += i.value;
            }
        }
    }
    let mut from_pairs: BTreeMap<(String, String), f64> = BTreeMap::new();
    for r in &metrics {
        *from_pairs
            .entry((r.season_label.clone(), r.team_id.0.clone()))
            .or_default() += r.joi;
        assert!(r.minutes_together > 0.0);
        assert!((r.joi90 - r.joi * 90.0 / r.minutes_together).abs() < 1e-12);
        assert!(r.player_a < r.player_b);
    }
    for (k, v) in &by_season {
        assert!((v - from_pairs.get(k).copied().unwrap_or(0.0)).abs() < 1e-9, "{k:?}");
    }

    // Per-match JDI agrees with a per-pair recomputation.
    let deltas = opponent_deltas(&ds, &cfg);
    let m = ds.matches_by_date()[5];
    let apps = ds.match_appearances(&m.match_id);
    let by_pair = jdi_by_pair(apps, &deltas[&m.match_id], true);
    let jdi_total: f64 = by_pair.values().sum();
    let delta_total: f64 = deltas[&m.match_id]
        .iter()
        .map(|d| {
            let o = apps.iter().find(|a| a.player_id == d.opponent).unwrap();
            responsibility_shares(apps, o, true)
                .iter()
                .map(|s| d.delta * s.normalized * s.minutes / 90.0)
                .sum::<f64>()
        })
        .sum();
    assert!((jdi_total - delta_total).abs() < 1e-9);
    let key: &PairKey = by_pair.keys().next().unwrap();
    assert!(chemistry_core::jdi::jdi_match(&key.a, &key.b, apps, &deltas[&m.match_id], true) == by_pair[key]);

    let qualifying = metrics.iter().filter(|r| r.minutes_together >= 700.0).count();
    eprintln!(
        "{} pair-seasons, {qualifying} with 700+ minutes, {elapsed:?}",
        metrics.len()
    );
}
