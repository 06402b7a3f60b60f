//! Reading and writing the comma-separated data files.
//!
//! Every reader checks the header row exactly and reports malformed rows by
//! their line number in the file (the header is line 1).

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::NaiveDate;
use csv::StringRecord;

use super::{
    Action, ActionResult, ActionType, Appearance, BodyPart, DataError, MatchId, MatchInfo, PairSeasonMetrics,
    PitchPoint, PlayerId, PlayerProfile, Position, PositionLine, PreferredFoot, Season, PHYSICAL_COUNT, ROLE_COUNT,
};

pub const ACTIONS_HEADER: &[&str] = &[
    "match_id",
    "period",
    "seconds",
    "team_id",
    "player_id",
    "action_type",
    "result",
    "body_part",
    "start_x",
    "start_y",
    "end_x",
    "end_y",
    "value",
];

pub const APPEARANCES_HEADER: &[&str] = &[
    "match_id",
    "player_id",
    "team_id",
    "position",
    "minute_on",
    "minute_off",
];

pub const PLAYERS_HEADER: &[&str] = &[
    "player_id",
    "name",
    "birth_date",
    "height_cm",
    "weight_kg",
    "nationality",
    "mother_tongue",
    "region",
    "subregion",
    "preferred_foot",
    "position_line",
    "phys_air",
    "phys_ground",
    "phys_speed",
    "phys_work",
    "role_01",
    "role_02",
    "role_03",
    "role_04",
    "role_05",
    "role_06",
    "role_07",
    "role_08",
    "role_09",
    "role_10",
    "role_11",
    "role_12",
    "role_13",
    "role_14",
    "role_15",
    "role_16",
    "role_17",
    "role_18",
    "role_19",
    "role_20",
    "role_21",
    "role_22",
];

pub const MATCHES_HEADER: &[&str] = &[
    "match_id",
    "competition_id",
    "season_label",
    "calendar_cycle",
    "date",
    "home_team_id",
    "away_team_id",
];

pub const PAIR_METRICS_HEADER: &[&str] = &[
    "competition_id",
    "season_label",
    "team_id",
    "player_a",
    "player_b",
    "minutes_together",
    "interaction_count",
    "joi",
    "joi90",
    "jdi",
    "jdi90",
];

const DATE_FORMAT: &str = "%Y-%m-%d";

struct Row<'a> {
    file: &'a str,
    line: u64,
    record: StringRecord,
}

impl Row<'_> {
    fn err(&self, message: impl Into<String>) -> DataError {
        DataError::Schema {
            file: self.file.to_string(),
            row: self.line,
            message: message.into(),
        }
    }

    fn raw(&self, idx: usize, name: &str) -> Result<&str, DataError> {
        self.record
            .get(idx)
            .ok_or_else(|| self.err(format!("missing field `{name}`")))
    }

    fn text(&self, idx: usize, name: &str) -> Result<String, DataError> {
        let s = self.raw(idx, name)?;
        if s.is_empty() {
            return Err(self.err(format!("empty `{name}`")));
        }
        Ok(s.to_string())
    }

    fn opt_text(&self, idx: usize, name: &str) -> Result<Option<String>, DataError> {
        let s = self.raw(idx, name)?;
        Ok((!s.is_empty()).then(|| s.to_string()))
    }

    fn parse<T: FromStr>(&self, idx: usize, name: &str) -> Result<T, DataError>
    where
        T::Err: std::fmt::Display,
    {
        let s = self.raw(idx, name)?;
        s.parse()
            .map_err(|e| self.err(format!("bad `{name}` value `{s}`: {e}")))
    }

    fn number(&self, idx: usize, name: &str) -> Result<f64, DataError> {
        let v: f64 = self.parse(idx, name)?;
        if !v.is_finite() {
            return Err(self.err(format!("`{name}` is not finite")));
        }
        Ok(v)
    }

    fn opt_number(&self, idx: usize, name: &str) -> Result<Option<f64>, DataError> {
        if self.raw(idx, name)?.is_empty() {
            return Ok(None);
        }
        self.number(idx, name).map(Some)
    }

    fn date(&self, idx: usize, name: &str) -> Result<NaiveDate, DataError> {
        let s = self.raw(idx, name)?;
        NaiveDate::parse_from_str(s, DATE_FORMAT).map_err(|e| self.err(format!("bad `{name}` value `{s}`: {e}")))
    }

    fn opt_date(&self, idx: usize, name: &str) -> Result<Option<NaiveDate>, DataError> {
        if self.raw(idx, name)?.is_empty() {
            return Ok(None);
        }
        self.date(idx, name).map(Some)
    }

    fn boolean(&self, idx: usize, name: &str) -> Result<bool, DataError> {
        match self.raw(idx, name)? {
            "true" | "1" => Ok(true),
            "false" | "0" => Ok(false),
            other => Err(self.err(format!("bad `{name}` value `{other}`"))),
        }
    }
}

fn read_rows<'a, R: Read>(reader: R, file: &'a str, header: &[&str]) -> Result<Vec<Row<'a>>, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let got = rdr.headers().map_err(|e| DataError::Header {
        file: file.to_string(),
        message: e.to_string(),
    })?;
    if got.is_empty() {
        return Err(DataError::Header {
            file: file.to_string(),
            message: "missing header row".to_string(),
        });
    }
    for (i, want) in header.iter().enumerate() {
        match got.get(i) {
            Some(h) if h.trim() == *want => {}
            Some(h) => {
                return Err(DataError::Header {
                    file: file.to_string(),
                    message: format!("column {} should be `{want}`, found `{h}`", i + 1),
                })
            }
            None => {
                return Err(DataError::Header {
                    file: file.to_string(),
                    message: format!("missing column `{want}`"),
                })
            }
        }
    }
    if got.len() > header.len() {
        return Err(DataError::Header {
            file: file.to_string(),
            message: format!("unexpected extra column `{}`", &got[header.len()]),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let record = rec.map_err(|e| DataError::Schema {
            file: file.to_string(),
            row: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row = Row { file, line, record };
        if row.record.len() != header.len() {
            return Err(row.err(format!("expected {} fields, found {}", header.len(), row.record.len())));
        }
        rows.push(row);
    }
    Ok(rows)
}

fn to_io(file: &str, e: impl std::fmt::Display) -> DataError {
    DataError::Io {
        path: file.into(),
        source: std::io::Error::other(e.to_string()),
    }
}

fn writer<W: Write>(w: W, header: &[&str], file: &str) -> Result<csv::Writer<W>, DataError> {
    let mut wtr = csv::WriterBuilder::new().from_writer(w);
    wtr.write_record(header).map_err(|e| to_io(file, e))?;
    Ok(wtr)
}

fn opt_num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Parses `actions.csv`, grouping by match and ordering each match by
/// (period, seconds). Rows with equal timestamps keep their file order.
pub fn parse_actions<R: Read>(reader: R) -> Result<BTreeMap<MatchId, Vec<Action>>, DataError> {
    const FILE: &str = "actions.csv";
    let mut out: BTreeMap<MatchId, Vec<Action>> = BTreeMap::new();
    for row in read_rows(reader, FILE, ACTIONS_HEADER)? {
        let period: u8 = row.parse(1, "period")?;
        if !(1..=2).contains(&period) {
            return Err(row.err(format!("period {period} outside 1..2")));
        }
        let seconds = row.number(2, "seconds")?;
        if seconds < 0.0 {
            return Err(row.err("negative `seconds`"));
        }
        let start = PitchPoint {
            x: row.number(8, "start_x")?,
            y: row.number(9, "start_y")?,
        };
        let end = PitchPoint {
            x: row.number(10, "end_x")?,
            y: row.number(11, "end_y")?,
        };
        for (name, p) in [("start", start), ("end", end)] {
            if !p.in_bounds() {
                return Err(row.err(format!("{name} location ({}, {}) outside the 105x68 pitch", p.x, p.y)));
            }
        }
        let action = Action {
            match_id: MatchId(row.text(0, "match_id")?),
            period,
            seconds,
            team_id: row.text(3, "team_id")?.into(),
            player_id: row.text(4, "player_id")?.into(),
            action_type: row.parse::<ActionType>(5, "action_type")?,
            result: row.parse::<ActionResult>(6, "result")?,
            body_part: row.parse::<BodyPart>(7, "body_part")?,
            start,
            end,
            value: row.number(12, "value")?,
        };
        out.entry(action.match_id.clone()).or_default().push(action);
    }
    for actions in out.values_mut() {
        actions.sort_by(|a, b| a.period.cmp(&b.period).then(a.seconds.total_cmp(&b.seconds)));
    }
    Ok(out)
}

pub fn write_actions<'a, W: Write>(w: W, actions: impl IntoIterator<Item = &'a Action>) -> Result<(), DataError> {
    const FILE: &str = "actions.csv";
    let mut wtr = writer(w, ACTIONS_HEADER, FILE)?;
    for a in actions {
        wtr.write_record([
            a.match_id.as_str(),
            &a.period.to_string(),
            &a.seconds.to_string(),
            a.team_id.as_str(),
            a.player_id.as_str(),
            a.action_type.code(),
            a.result.code(),
            a.body_part.code(),
            &a.start.x.to_string(),
            &a.start.y.to_string(),
            &a.end.x.to_string(),
            &a.end.y.to_string(),
            &a.value.to_string(),
        ])
        .map_err(|e| to_io(FILE, e))?;
    }
    wtr.flush().map_err(|e| to_io(FILE, e))
}

pub fn parse_appearances<R: Read>(reader: R) -> Result<BTreeMap<MatchId, Vec<Appearance>>, DataError> {
    const FILE: &str = "appearances.csv";
    let mut out: BTreeMap<MatchId, Vec<Appearance>> = BTreeMap::new();
    for row in read_rows(reader, FILE, APPEARANCES_HEADER)? {
        let minute_on = row.number(4, "minute_on")?;
        let minute_off = row.number(5, "minute_off")?;
        if minute_on < 0.0 || minute_on >= minute_off {
            return Err(row.err(format!(
                "minute_on {minute_on} must be non-negative and before minute_off {minute_off}"
            )));
        }
        let app = Appearance {
            match_id: MatchId(row.text(0, "match_id")?),
            player_id: row.text(1, "player_id")?.into(),
            team_id: row.text(2, "team_id")?.into(),
            position: row.parse::<Position>(3, "position")?,
            minute_on,
            minute_off,
        };
        out.entry(app.match_id.clone()).or_default().push(app);
    }
    Ok(out)
}

pub fn write_appearances<'a, W: Write>(
    w: W,
    appearances: impl IntoIterator<Item = &'a Appearance>,
) -> Result<(), DataError> {
    const FILE: &str = "appearances.csv";
    let mut wtr = writer(w, APPEARANCES_HEADER, FILE)?;
    for a in appearances {
        wtr.write_record([
            a.match_id.as_str(),
            a.player_id.as_str(),
            a.team_id.as_str(),
            a.position.code(),
            &a.minute_on.to_string(),
            &a.minute_off.to_string(),
        ])
        .map_err(|e| to_io(FILE, e))?;
    }
    wtr.flush().map_err(|e| to_io(FILE, e))
}

pub fn parse_players<R: Read>(reader: R) -> Result<BTreeMap<PlayerId, PlayerProfile>, DataError> {
    const FILE: &str = "players.csv";
    let mut out = BTreeMap::new();
    for row in read_rows(reader, FILE, PLAYERS_HEADER)? {
        let mut physical = [None; PHYSICAL_COUNT];
        for (i, slot) in physical.iter_mut().enumerate() {
            let idx = 11 + i;
            let v = row.opt_number(idx, PLAYERS_HEADER[idx])?;
            if let Some(x) = v {
                if !(1.0..=5.0).contains(&x) {
                    return Err(row.err(format!("`{}` = {x} outside the 1-5 scale", PLAYERS_HEADER[idx])));
                }
            }
            *slot = v;
        }
        let mut role_scores = [None; ROLE_COUNT];
        for (i, slot) in role_scores.iter_mut().enumerate() {
            let idx = 15 + i;
            let v = row.opt_number(idx, PLAYERS_HEADER[idx])?;
            if let Some(x) = v {
                if !(0.0..=1.0).contains(&x) {
                    return Err(row.err(format!("`{}` = {x} outside [0, 1]", PLAYERS_HEADER[idx])));
                }
            }
            *slot = v;
        }
        let preferred_foot = match row.raw(9, "preferred_foot")? {
            "" => None,
            _ => Some(row.parse::<PreferredFoot>(9, "preferred_foot")?),
        };
        let profile = PlayerProfile {
            player_id: row.text(0, "player_id")?.into(),
            name: row.raw(1, "name")?.to_string(),
            birth_date: row.opt_date(2, "birth_date")?,
            height_cm: row.opt_number(3, "height_cm")?,
            weight_kg: row.opt_number(4, "weight_kg")?,
            nationality: row.opt_text(5, "nationality")?,
            mother_tongue: row.opt_text(6, "mother_tongue")?,
            region: row.opt_text(7, "region")?,
            subregion: row.opt_text(8, "subregion")?,
            preferred_foot,
            position_line: row.parse::<PositionLine>(10, "position_line")?,
            physical,
            role_scores,
        };
        if out.contains_key(&profile.player_id) {
            return Err(row.err(format!("duplicate player `{}`", profile.player_id)));
        }
        out.insert(profile.player_id.clone(), profile);
    }
    Ok(out)
}

pub fn write_players<'a, W: Write>(
    w: W,
    players: impl IntoIterator<Item = &'a PlayerProfile>,
) -> Result<(), DataError> {
    const FILE: &str = "players.csv";
    let mut wtr = writer(w, PLAYERS_HEADER, FILE)?;
    for p in players {
        let mut rec: Vec<String> = vec![
            p.player_id.to_string(),
            p.name.clone(),
            p.birth_date
                .map(|d| d.format(DATE_FORMAT).to_string())
                .unwrap_or_default(),
            opt_num(p.height_cm),
            opt_num(p.weight_kg),
            p.nationality.clone().unwrap_or_default(),
            p.mother_tongue.clone().unwrap_or_default(),
            p.region.clone().unwrap_or_default(),
            p.subregion.clone().unwrap_or_default(),
            p.preferred_foot.map(|f| f.code().to_string()).unwrap_or_default(),
            p.position_line.code().to_string(),
        ];
        rec.extend(p.physical.iter().map(|v| opt_num(*v)));
        rec.extend(p.role_scores.iter().map(|v| opt_num(*v)));
        wtr.write_record(&rec).map_err(|e| to_io(FILE, e))?;
    }
    wtr.flush().map_err(|e| to_io(FILE, e))
}

pub fn parse_matches<R: Read>(reader: R) -> Result<BTreeMap<MatchId, MatchInfo>, DataError> {
    const FILE: &str = "matches.csv";
    let mut out = BTreeMap::new();
    for row in read_rows(reader, FILE, MATCHES_HEADER)? {
        let season_label = row.text(2, "season_label")?;
        let calendar_cycle = row.boolean(3, "calendar_cycle")?;
        let season: Season = season_label.parse().map_err(|e: DataError| row.err(e.to_string()))?;
        if season.is_calendar() != calendar_cycle {
            return Err(row.err(format!(
                "season `{season_label}` does not match calendar_cycle={calendar_cycle}"
            )));
        }
        let m = MatchInfo {
            match_id: MatchId(row.text(0, "match_id")?),
            competition_id: row.text(1, "competition_id")?.into(),
            season_label,
            calendar_cycle,
            date: row.date(4, "date")?,
            home_team_id: row.text(5, "home_team_id")?.into(),
            away_team_id: row.text(6, "away_team_id")?.into(),
        };
        if m.home_team_id == m.away_team_id {
            return Err(row.err("home and away team are identical"));
        }
        if out.contains_key(&m.match_id) {
            return Err(row.err(format!("duplicate match `{}`", m.match_id)));
        }
        out.insert(m.match_id.clone(), m);
    }
    Ok(out)
}

pub fn write_matches<'a, W: Write>(w: W, matches: impl IntoIterator<Item = &'a MatchInfo>) -> Result<(), DataError> {
    const FILE: &str = "matches.csv";
    let mut wtr = writer(w, MATCHES_HEADER, FILE)?;
    for m in matches {
        wtr.write_record([
            m.match_id.as_str(),
            m.competition_id.as_str(),
            &m.season_label,
            if m.calendar_cycle { "true" } else { "false" },
            &m.date.format(DATE_FORMAT).to_string(),
            m.home_team_id.as_str(),
            m.away_team_id.as_str(),
        ])
        .map_err(|e| to_io(FILE, e))?;
    }
    wtr.flush().map_err(|e| to_io(FILE, e))
}

pub fn parse_pair_metrics<R: Read>(reader: R) -> Result<Vec<PairSeasonMetrics>, DataError> {
    const FILE: &str = "pair_metrics.csv";
    let mut out = Vec::new();
    for row in read_rows(reader, FILE, PAIR_METRICS_HEADER)? {
        let m = PairSeasonMetrics {
            competition_id: row.text(0, "competition_id")?.into(),
            season_label: row.text(1, "season_label")?,
            team_id: row.text(2, "team_id")?.into(),
            player_a: row.text(3, "player_a")?.into(),
            player_b: row.text(4, "player_b")?.into(),
            minutes_together: row.number(5, "minutes_together")?,
            interaction_count: row.parse(6, "interaction_count")?,
            joi: row.number(7, "joi")?,
            joi90: row.number(8, "joi90")?,
            jdi: row.opt_number(9, "jdi")?,
            jdi90: row.opt_number(10, "jdi90")?,
        };
        if m.player_a >= m.player_b {
            return Err(row.err("pair is not in canonical (ascending) order"));
        }
        out.push(m);
    }
    Ok(out)
}

pub fn write_pair_metrics<'a, W: Write>(
    w: W,
    rows: impl IntoIterator<Item = &'a PairSeasonMetrics>,
) -> Result<(), DataError> {
    const FILE: &str = "pair_metrics.csv";
    let mut wtr = writer(w, PAIR_METRICS_HEADER, FILE)?;
    for m in rows {
        wtr.write_record([
            m.competition_id.as_str(),
            &m.season_label,
            m.team_id.as_str(),
            m.player_a.as_str(),
            m.player_b.as_str(),
            &m.minutes_together.to_string(),
            &m.interaction_count.to_string(),
            &m.joi.to_string(),
            &m.joi90.to_string(),
            &opt_num(m.jdi),
            &opt_num(m.jdi90),
        ])
        .map_err(|e| to_io(FILE, e))?;
    }
    wtr.flush().map_err(|e| to_io(FILE, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "match_id,period,seconds,team_id,player_id,action_type,result,body_part,start_x,start_y,end_x,end_y,value\n";

    #[test]
    fn empty_actions_file() {
        let out = parse_actions(HEADER.as_bytes()).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn one_pass_row() {
        let data = format!("{HEADER}m1,1,12.5,t1,p1,pass,success,foot,50,30,60,34,0.0125\n");
        let out = parse_actions(data.as_bytes()).unwrap();
        let actions = &out[&MatchId::from("m1")];
        assert_eq!(actions.len(), 1);
        assert_eq!(actions[0].value, 0.0125);
        assert_eq!(actions[0].action_type, ActionType::Pass);
    }

    #[test]
    fn out_of_bounds_coordinate_names_the_row() {
        let data = format!(
            "{HEADER}m1,1,1,t1,p1,pass,success,foot,50,30,60,34,0.01\nm1,1,2,t1,p2,pass,success,foot,999,30,60,34,0.01\n"
        );
        let err = parse_actions(data.as_bytes()).unwrap_err();
        match err {
            DataError::Schema { row, ref message, .. } => {
                assert_eq!(row, 3);
                assert!(message.contains("999"), "{message}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn unknown_type_and_missing_column_rejected() {
        let data = format!("{HEADER}m1,1,1,t1,p1,header,success,foot,50,30,60,34,0.01\n");
        assert!(matches!(
            parse_actions(data.as_bytes()),
            Err(DataError::Schema { row: 2, .. })
        ));
        let bad_header = "match_id,period,seconds\nm1,1,1\n";
        assert!(matches!(
            parse_actions(bad_header.as_bytes()),
            Err(DataError::Header { .. })
        ));
    }

    #[test]
    fn actions_sorted_by_period_then_time() {
        let data = format!(
            "{HEADER}m1,2,5,t1,p1,pass,success,foot,1,1,1,1,0.3\nm1,1,9,t1,p2,pass,success,foot,1,1,1,1,0.2\nm1,1,3,t1,p3,pass,success,foot,1,1,1,1,0.1\n"
        );
        let out = parse_actions(data.as_bytes()).unwrap();
        let vals: Vec<f64> = out[&MatchId::from("m1")].iter().map(|a| a.value).collect();
        assert_eq!(vals, vec![0.1, 0.2, 0.3]);
    }

    #[test]
    fn appearance_interval_must_be_positive() {
        let data = "match_id,player_id,team_id,position,minute_on,minute_off\nm1,p1,t1,right_back,60,60\n";
        assert!(parse_appearances(data.as_bytes()).is_err());
    }

    #[test]
    fn matches_reject_flag_mismatch() {
        let data = "match_id,competition_id,season_label,calendar_cycle,date,home_team_id,away_team_id\nm1,c,2018,false,2018-03-01,a,b\n";
        assert!(parse_matches(data.as_bytes()).is_err());
    }
}
