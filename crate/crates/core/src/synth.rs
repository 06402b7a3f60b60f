//! Seeded generator for a small synthetic league.
//!
//! The default configuration produces four teams of sixteen players, each
//! team playing twelve matches per season over three seasons (one per data
//! split). Action values carry a player skill term and a pair synergy term
//! that depends on player attributes, so the chemistry metrics and the
//! predictor have real structure to find.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::datamodel::{
    Action, ActionResult, ActionType, Appearance, BodyPart, CompetitionId, Dataset, GridPosition, MatchId, MatchInfo,
    PitchPoint, PlayerId, PlayerProfile, Position, PositionLine, PreferredFoot, TeamId, PHYSICAL_COUNT, ROLE_COUNT,
};
use crate::teambuilder::{ChemistryMatrix, SquadRestriction, TeamBuildProblem};

#[derive(Debug, Clone)]
pub struct MiniLeagueConfig {
    pub seed: u64,
    pub competition: String,
    pub teams: usize,
    /// Multiple of three (the four-team round robin has three rounds).
    pub matches_per_team: usize,
    pub season_start_years: Vec<i32>,
    pub possessions_per_match: usize,
}

impl Default for MiniLeagueConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            competition: "SYN".to_string(),
            teams: 4,
            matches_per_team: 12,
            season_start_years: vec![2016, 2017, 2018],
            possessions_per_match: 90,
        }
    }
}

const NATIONS: &[(&str, &str, &str, &str)] = &[
    ("Netherlands", "Dutch", "Europe", "Western Europe"),
    ("Belgium", "Dutch", "Europe", "Western Europe"),
    ("Germany", "German", "Europe", "Western Europe"),
    ("France", "French", "Europe", "Western Europe"),
    ("Spain", "Spanish", "Europe", "Southern Europe"),
    ("Portugal", "Portuguese", "Europe", "Southern Europe"),
    ("Brazil", "Portuguese", "Americas", "South America"),
    ("Argentina", "Spanish", "Americas", "South America"),
    ("Morocco", "Arabic", "Africa", "Northern Africa"),
    ("Senegal", "French", "Africa", "Western Africa"),
];

/// Squad template: natural position of each of the sixteen squad members.
const SQUAD: [Position; 16] = [
    Position::Goalkeeper,
    Position::Grid(GridPosition::LeftBack),
    Position::Grid(GridPosition::LeftCenterBack),
    Position::Grid(GridPosition::RightCenterBack),
    Position::Grid(GridPosition::RightBack),
    Position::Grid(GridPosition::LeftCenterMidfielder),
    Position::Grid(GridPosition::DefensiveMidfielder),
    Position::Grid(GridPosition::RightCenterMidfielder),
    Position::Grid(GridPosition::LeftWingForward),
    Position::Grid(GridPosition::Striker),
    Position::Grid(GridPosition::RightWingForward),
    Position::Goalkeeper,
    Position::Grid(GridPosition::CenterBack),
    Position::Grid(GridPosition::AttackingMidfielder),
    Position::Grid(GridPosition::LeftDefensiveMidfielder),
    Position::Grid(GridPosition::SecondStriker),
];

fn line_of(position: Position) -> PositionLine {
    match position {
        Position::Goalkeeper => PositionLine::Goalkeeper,
        Position::Grid(g) => match g.cell().row {
            0 => PositionLine::Forward,
            1 | 2 => PositionLine::Midfielder,
            3 if g == GridPosition::DefensiveMidfielder
                || g == GridPosition::LeftDefensiveMidfielder
                || g == GridPosition::RightDefensiveMidfielder =>
            {
                PositionLine::Midfielder
            }
            _ => PositionLine::Defender,
        },
    }
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (v * f).round() / f
}

struct Squad {
    team: TeamId,
    players: Vec<PlayerId>,
}

struct World {
    skill: BTreeMap<PlayerId, f64>,
    synergy_base: BTreeMap<PlayerId, [f64; ROLE_COUNT]>,
    tongue: BTreeMap<PlayerId, String>,
}

impl World {
    /// Attribute-driven pair synergy; symmetric by construction.
    fn synergy(&self, p: &PlayerId, q: &PlayerId) -> f64 {
        let (a, b) = (&self.synergy_base[p], &self.synergy_base[q]);
        let playmaking = 0.006 * (a[0] + b[0]) + 0.004 * (a[3] * b[3]);
        let language = if self.tongue[p] == self.tongue[q] { 0.002 } else { 0.0 };
        playmaking + language - 0.006
    }
}

/// Builds the synthetic league.
pub fn generate(cfg: &MiniLeagueConfig) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ds = Dataset::default();
    let mut squads = Vec::new();
    let mut world = World {
        skill: BTreeMap::new(),
        synergy_base: BTreeMap::new(),
        tongue: BTreeMap::new(),
    };
    let skill_dist = Normal::new(0.0, 0.004).expect("valid normal");

    for t in 0..cfg.teams {
        let team = TeamId(format!("T{}", t + 1));
        let mut players = Vec::new();
        for (k, position) in SQUAD.iter().enumerate() {
            let id = PlayerId(format!("T{}P{:02}", t + 1, k + 1));
            let nation = NATIONS.choose(&mut rng).expect("non-empty");
            let line = line_of(*position);
            let mut roles = [None; ROLE_COUNT];
            let mut base = [0.0; ROLE_COUNT];
            for (slot, b) in roles.iter_mut().zip(base.iter_mut()) {
                let v = round_to(rng.random::<f64>(), 2);
                *b = v;
                *slot = Some(v);
            }
            let mut physical = [None; PHYSICAL_COUNT];
            for slot in physical.iter_mut() {
                if rng.random_bool(0.95) {
                    *slot = Some(round_to(rng.random_range(1.0..=5.0), 1));
                }
            }
            let height = round_to(
                match line {
                    PositionLine::Goalkeeper => 190.0,
                    PositionLine::Defender => 184.0,
                    _ => 179.0,
                } + Normal::new(0.0, 5.0).expect("valid").sample(&mut rng),
                0,
            );
            let birth = NaiveDate::from_ymd_opt(
                rng.random_range(1986..=2000),
                rng.random_range(1..=12),
                rng.random_range(1..=28),
            )
            .expect("valid date");
            let profile = PlayerProfile {
                player_id: id.clone(),
                name: format!("Player {}-{:02}", t + 1, k + 1),
                birth_date: Some(birth),
                height_cm: Some(height),
                weight_kg: Some(round_to(height - 105.0 + rng.random_range(-5.0..5.0), 0)),
                nationality: Some(nation.0.to_string()),
                mother_tongue: Some(nation.1.to_string()),
                region: Some(nation.2.to_string()),
                subregion: Some(nation.3.to_string()),
                preferred_foot: Some(if rng.random_bool(0.75) {
                    PreferredFoot::Right
                } else {
                    PreferredFoot::Left
                }),
                position_line: line,
                physical,
                role_scores: roles,
            };
            world.skill.insert(id.clone(), skill_dist.sample(&mut rng));
            world.synergy_base.insert(id.clone(), base);
            world.tongue.insert(id.clone(), nation.1.to_string());
            ds.players.insert(id.clone(), profile);
            players.push(id);
        }
        squads.push(Squad { team, players });
    }

    let competition = CompetitionId(cfg.competition.clone());
    for &start_year in &cfg.season_start_years {
        let label = format!("{}/{}", start_year, start_year + 1);
        let first_day = NaiveDate::from_ymd_opt(start_year, 8, 12).expect("valid date");
        let rounds = round_robin(cfg.teams, cfg.matches_per_team);
        for (r, fixtures) in rounds.iter().enumerate() {
            let date = first_day + Duration::days(7 * r as i64);
            for (k, &(home, away)) in fixtures.iter().enumerate() {
                let match_id = MatchId(format!("M{}{:02}{}", start_year, r + 1, k + 1));
                let info = MatchInfo {
                    match_id: match_id.clone(),
                    competition_id: competition.clone(),
                    season_label: label.clone(),
                    calendar_cycle: false,
                    date,
                    home_team_id: squads[home].team.clone(),
                    away_team_id: squads[away].team.clone(),
                };
                let (apps, actions) = simulate_match(&mut rng, cfg, &world, &match_id, &squads[home], &squads[away]);
                ds.matches.insert(match_id.clone(), info);
                ds.appearances.insert(match_id.clone(), apps);
                ds.actions.insert(match_id, actions);
            }
        }
    }
    ds
}

/// Repeated single round robin (circle method) with alternating home sides.
/// Shape of a random team-building instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeamInstanceConfig {
    pub pool: usize,
    /// Entries drawn from a handful of small integers, so optima often tie.
    pub coarse_values: bool,
    pub max_pins: usize,
    pub max_exclusions: usize,
    pub squad_restriction: bool,
}

/// A random team-building problem. Values are multiples of 1/64 so sums
/// are exact in binary floating point.
#[allow(clippy::needless_range_loop)]
pub fn random_team_problem(seed: u64, cfg: TeamInstanceConfig) -> TeamBuildProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.pool;
    let players: Vec<PlayerId> = (0..n).map(|i| PlayerId(format!("P{i:03}"))).collect();
    let lines: Vec<PositionLine> = (0..n)
        .map(|i| match i {
            // Keep most instances feasible.
            0 => PositionLine::Goalkeeper,
            1..=3 => PositionLine::Defender,
            4..=6 => PositionLine::Midfielder,
            7 => PositionLine::Forward,
            _ => match rng.random_range(0..9) {
                0 => PositionLine::Goalkeeper,
                1..=3 => PositionLine::Defender,
                4..=6 => PositionLine::Midfielder,
                _ => PositionLine::Forward,
            },
        })
        .collect();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = if cfg.coarse_values {
                rng.random_range(-2..=3) as f64
            } else {
                rng.random_range(-64..=64) as f64 / 64.0
            };
            values[i][j] = v;
            values[j][i] = v;
        }
    }
    let matrix = ChemistryMatrix::from_values(players.clone(), &values).expect("square matrix");
    let mut problem = TeamBuildProblem::new(matrix, lines);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let pins = rng.random_range(0..=cfg.max_pins);
    let excl = rng.random_range(0..=cfg.max_exclusions);
    for &i in order.iter().take(pins) {
        problem.pinned.insert(players[i].clone());
    }
    for &i in order.iter().skip(pins).take(excl) {
        problem.excluded.insert(players[i].clone());
    }
    if cfg.squad_restriction {
        let members = players.iter().filter(|_| rng.random_bool(0.6)).cloned().collect();
        problem.squad_restriction = Some(SquadRestriction {
            players: members,
            count: rng.random_range(6..=10),
        });
    }
    problem
}

fn round_robin(teams: usize, matches_per_team: usize) -> Vec<Vec<(usize, usize)>> {
    let n = if teams.is_multiple_of(2) { teams } else { teams + 1 };
    let per_cycle = n - 1;
    let cycles = matches_per_team.div_ceil(per_cycle);
    let mut rounds = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    for cycle in 0..cycles {
        for _ in 0..per_cycle {
            let mut fixtures = Vec::new();
            for i in 0..n / 2 {
                let (a, b) = (order[i], order[n - 1 - i]);
                if a >= teams || b >= teams {
                    continue;
                }
                fixtures.push(if cycle % 2 == 0 { (a, b) } else { (b, a) });
            }
            rounds.push(fixtures);
            let last = order.pop().expect("non-empty");
            order.insert(1, last);
        }
    }
    rounds.truncate(matches_per_team);
    rounds
}

/// Formation slots: squad index of the first choice for each of the eleven slots.
const XI: [usize; 11] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

fn pick_lineup(rng: &mut ChaCha8Rng) -> (Vec<(usize, Position)>, Vec<usize>) {
    let mut starters = Vec::new();
    let mut bench: Vec<usize> = (11..16).collect();
    for &slot in &XI {
        let position = SQUAD[slot];
        let line = line_of(position);
        let mut chosen = slot;
        if rng.random_bool(0.18) {
            if let Some(pos) = bench.iter().position(|&b| line_of(SQUAD[b]) == line) {
                chosen = bench.remove(pos);
                bench.push(slot);
            }
        }
        starters.push((chosen, position));
    }
    (starters, bench)
}

struct OnPitch {
    player: PlayerId,
    position: Position,
    on: f64,
    off: f64,
}

fn simulate_match(
    rng: &mut ChaCha8Rng,
    cfg: &MiniLeagueConfig,
    world: &World,
    match_id: &MatchId,
    home: &Squad,
    away: &Squad,
) -> (Vec<Appearance>, Vec<Action>) {
    let length = 90.0 + f64::from(rng.random_range(0..=4u8));
    let mut stints: Vec<(TeamId, OnPitch)> = Vec::new();
    for squad in [home, away] {
        let (starters, mut bench) = pick_lineup(rng);
        let mut team_stints: Vec<OnPitch> = starters
            .iter()
            .map(|&(idx, position)| OnPitch {
                player: squad.players[idx].clone(),
                position,
                on: 0.0,
                off: length,
            })
            .collect();
        let subs = rng.random_range(1..=3usize);
        for _ in 0..subs {
            if bench.is_empty() {
                break;
            }
            let minute = f64::from(rng.random_range(55..=85u8));
            let out = rng.random_range(1..11usize);
            if team_stints[out].off < length {
                continue;
            }
            let b = bench.remove(rng.random_range(0..bench.len()));
            if matches!(SQUAD[b], Position::Goalkeeper) {
                continue;
            }
            team_stints[out].off = minute;
            let position = team_stints[out].position;
            team_stints.push(OnPitch {
                player: squad.players[b].clone(),
                position,
                on: minute,
                off: length,
            });
        }
        stints.extend(team_stints.into_iter().map(|s| (squad.team.clone(), s)));
    }

    let appearances: Vec<Appearance> = stints
        .iter()
        .map(|(team, s)| Appearance {
            match_id: match_id.clone(),
            player_id: s.player.clone(),
            team_id: team.clone(),
            position: s.position,
            minute_on: s.on,
            minute_off: s.off,
        })
        .collect();

    let noise = Normal::new(0.0, 0.008).expect("valid normal");
    let shot_noise = Normal::new(0.02, 0.05).expect("valid normal");
    let mut actions = Vec::new();
    let mut clock = 0.0f64;
    let step = length * 60.0 / (cfg.possessions_per_match as f64 * 4.0);
    for _ in 0..cfg.possessions_per_match {
        let attacking = if rng.random_bool(0.5) { home } else { away };
        let defending = if attacking.team == home.team { away } else { home };
        let chain = rng.random_range(1..=6usize);
        let mut previous: Option<PlayerId> = None;
        for _ in 0..chain {
            clock += rng.random_range(0.3..1.7) * step;
            let minute = (clock / 60.0).min(length - 0.01);
            let on_pitch: Vec<&OnPitch> = stints
                .iter()
                .filter(|(t, s)| *t == attacking.team && s.on <= minute && minute < s.off)
                .map(|(_, s)| s)
                .filter(|s| !matches!(s.position, Position::Goalkeeper) || rng.random_bool(0.2))
                .collect();
            let Some(actor) = on_pitch.choose(rng) else {
                continue;
            };
            let roll: f64 = rng.random();
            let action_type = match roll {
                r if r < 0.62 => ActionType::Pass,
                r if r < 0.70 => ActionType::Cross,
                r if r < 0.80 => ActionType::Dribble,
                r if r < 0.87 => ActionType::TakeOn,
                r if r < 0.92 => ActionType::Shot,
                _ => ActionType::Other,
            };
            let mut value = world.skill[&actor.player] + noise.sample(rng);
            if action_type == ActionType::Shot {
                value += shot_noise.sample(rng);
            }
            if let Some(prev) = &previous {
                if *prev != actor.player {
                    value += world.synergy(prev, &actor.player);
                }
            }
            actions.push(make_action(
                rng,
                match_id,
                &attacking.team,
                &actor.player,
                action_type,
                minute,
                value,
            ));
            previous = Some(actor.player.clone());
        }
        // Possession usually ends with a defensive action by the other side.
        let minute = (clock / 60.0).min(length - 0.01);
        let defenders: Vec<&OnPitch> = stints
            .iter()
            .filter(|(t, s)| *t == defending.team && s.on <= minute && minute < s.off)
            .map(|(_, s)| s)
            .collect();
        if let Some(d) = defenders.choose(rng) {
            if rng.random_bool(0.6) {
                actions.push(make_action(
                    rng,
                    match_id,
                    &defending.team,
                    &d.player,
                    ActionType::Other,
                    minute,
                    0.0,
                ));
            }
        }
    }
    actions.sort_by(|a, b| a.period.cmp(&b.period).then(a.seconds.total_cmp(&b.seconds)));
    (appearances, actions)
}

fn make_action(
    rng: &mut ChaCha8Rng,
    match_id: &MatchId,
    team: &TeamId,
    player: &PlayerId,
    action_type: ActionType,
    minute: f64,
    value: f64,
) -> Action {
    let (period, seconds) = if minute < 45.0 {
        (1, minute * 60.0)
    } else {
        (2, (minute - 45.0) * 60.0)
    };
    let point = |rng: &mut ChaCha8Rng| PitchPoint {
        x: round_to(rng.random_range(0.0..=105.0), 1),
        y: round_to(rng.random_range(0.0..=68.0), 1),
    };
    Action {
        match_id: match_id.clone(),
        period,
        seconds: round_to(seconds, 1),
        team_id: team.clone(),
        player_id: player.clone(),
        action_type,
        result: if rng.random_bool(0.8) {
            ActionResult::Success
        } else {
            ActionResult::Fail
        },
        body_part: if action_type == ActionType::Shot && rng.random_bool(0.2) {
            BodyPart::Head
        } else {
            BodyPart::Foot
        },
        start: point(rng),
        end: point(rng),
        value: round_to(value, 5),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_league_shape() {
        let ds = generate(&MiniLeagueConfig::default());
        assert_eq!(ds.players.len(), 64);
        assert_eq!(ds.matches.len(), 3 * 24);
        ds.validate().unwrap();
        for m in ds.matches.values() {
            let apps = ds.match_appearances(&m.match_id);
            for team in [&m.home_team_id, &m.away_team_id] {
                let starters = apps.iter().filter(|a| a.team_id == *team && a.minute_on == 0.0).count();
                assert_eq!(starters, 11);
            }
        }
        for team in ["T1", "T2", "T3", "T4"] {
            let n = ds
                .matches
                .values()
                .filter(|m| m.season_label == "2016/2017")
                .filter(|m| m.home_team_id.as_str() == team || m.away_team_id.as_str() == team)
                .count();
            assert_eq!(n, 12);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = MiniLeagueConfig::default();
        assert_eq!(generate(&cfg), generate(&cfg));
    }
}
