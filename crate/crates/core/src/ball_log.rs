//! Ball-by-ball ingestion.
//!
//! Two input encodings are accepted: the Cricsheet JSON match document and a
//! flat CSV ball log (one row per delivery, used for fixtures and export).
//! Both normalize into [`MatchRecord`]. [`trajectory`] folds an innings into
//! a cumulative score sequence indexed by legal deliveries.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of wickets in an innings.
pub const MAX_WICKETS: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MatchFormat {
    #[serde(rename = "ODI")]
    Odi,
    #[serde(rename = "T20I")]
    T20i,
    #[serde(rename = "IPL")]
    Ipl,
}

impl MatchFormat {
    pub const ALL: [MatchFormat; 3] = [MatchFormat::Odi, MatchFormat::T20i, MatchFormat::Ipl];

    /// Legal deliveries in a full innings.
    pub fn scheduled_balls(self) -> u32 {
        match self {
            MatchFormat::Odi => 300,
            MatchFormat::T20i | MatchFormat::Ipl => 120,
        }
    }

    pub fn max_overs(self) -> u32 {
        self.scheduled_balls() / 6
    }

    pub fn name(self) -> &'static str {
        match self {
            MatchFormat::Odi => "ODI",
            MatchFormat::T20i => "T20I",
            MatchFormat::Ipl => "IPL",
        }
    }

    /// Lower-case name used in CLI flags and output file names.
    pub fn slug(self) -> &'static str {
        match self {
            MatchFormat::Odi => "odi",
            MatchFormat::T20i => "t20i",
            MatchFormat::Ipl => "ipl",
        }
    }
}

impl fmt::Display for MatchFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatchFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "odi" => Ok(MatchFormat::Odi),
            "t20i" => Ok(MatchFormat::T20i),
            "ipl" => Ok(MatchFormat::Ipl),
            _ => Err(Error::UnsupportedFormat(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtrasKind {
    None,
    Wide,
    NoBall,
    Bye,
    LegBye,
    Penalty,
}

impl ExtrasKind {
    /// Wides and no-balls do not count toward the over.
    pub fn is_illegal(self) -> bool {
        matches!(self, ExtrasKind::Wide | ExtrasKind::NoBall)
    }

    pub fn name(self) -> &'static str {
        match self {
            ExtrasKind::None => "none",
            ExtrasKind::Wide => "wide",
            ExtrasKind::NoBall => "no_ball",
            ExtrasKind::Bye => "bye",
            ExtrasKind::LegBye => "leg_bye",
            ExtrasKind::Penalty => "penalty",
        }
    }
}

impl FromStr for ExtrasKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" | "" => ExtrasKind::None,
            "wide" => ExtrasKind::Wide,
            "no_ball" => ExtrasKind::NoBall,
            "bye" => ExtrasKind::Bye,
            "leg_bye" => ExtrasKind::LegBye,
            "penalty" => ExtrasKind::Penalty,
            other => return Err(Error::InvalidRecord(format!("unknown extras kind {other:?}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeliveryEvent {
    pub over: u32,
    pub ball_in_over: u32,
    pub batter_runs: u32,
    pub extras_runs: u32,
    pub extras_kind: ExtrasKind,
    pub wicket: bool,
    pub legal: bool,
}

impl DeliveryEvent {
    pub fn new(
        over: u32,
        ball_in_over: u32,
        batter_runs: u32,
        extras_runs: u32,
        extras_kind: ExtrasKind,
        wicket: bool,
    ) -> Result<Self> {
        if ball_in_over == 0 {
            return Err(Error::InvalidRecord(format!(
                "over {over}: ball_in_over must be positive"
            )));
        }
        if extras_kind.is_illegal() && extras_runs == 0 {
            return Err(Error::InvalidRecord(format!(
                "over {over} ball {ball_in_over}: {} with no extras runs",
                extras_kind.name()
            )));
        }
        Ok(DeliveryEvent {
            over,
            ball_in_over,
            batter_runs,
            extras_runs,
            extras_kind,
            wicket,
            legal: !extras_kind.is_illegal(),
        })
    }

    pub fn runs(&self) -> u32 {
        self.batter_runs + self.extras_runs
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InningsRecord {
    pub innings_index: u8,
    pub batting_team: String,
    pub deliveries: Vec<DeliveryEvent>,
}

impl InningsRecord {
    pub fn new(
        innings_index: u8,
        batting_team: impl Into<String>,
        deliveries: Vec<DeliveryEvent>,
    ) -> Result<Self> {
        if !(1..=2).contains(&innings_index) {
            return Err(Error::InvalidRecord(format!(
                "innings index {innings_index} outside 1..=2"
            )));
        }
        let ordered = deliveries
            .windows(2)
            .all(|w| (w[0].over, w[0].ball_in_over) < (w[1].over, w[1].ball_in_over));
        if !ordered {
            return Err(Error::InvalidRecord(format!(
                "innings {innings_index}: deliveries not ordered by (over, ball)"
            )));
        }
        let wickets = deliveries.iter().filter(|d| d.wicket).count();
        if wickets > MAX_WICKETS as usize {
            return Err(Error::InvalidRecord(format!(
                "innings {innings_index}: {wickets} wickets"
            )));
        }
        Ok(InningsRecord {
            innings_index,
            batting_team: batting_team.into(),
            deliveries,
        })
    }

    /// Sum of all runs off the bat and extras.
    pub fn total_runs(&self) -> u32 {
        self.deliveries.iter().map(DeliveryEvent::runs).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub match_id: String,
    pub format: MatchFormat,
    /// First day of play. Absent for CSV ball logs.
    pub date: Option<NaiveDate>,
    pub teams: Vec<String>,
    pub venue: Option<String>,
    pub innings: Vec<InningsRecord>,
    /// Overs were reduced or a rain rule decided the result.
    pub reduced: bool,
}

impl MatchRecord {
    pub fn innings(&self, index: u8) -> Option<&InningsRecord> {
        self.innings.iter().find(|i| i.innings_index == index)
    }

    fn validate(&self) -> Result<()> {
        if self.innings.is_empty() || self.innings.len() > 2 {
            return Err(Error::InvalidRecord(format!(
                "match {}: {} innings",
                self.match_id,
                self.innings.len()
            )));
        }
        if self.innings.len() == 2 && self.innings[0].innings_index == self.innings[1].innings_index
        {
            return Err(Error::InvalidRecord(format!(
                "match {}: duplicate innings index",
                self.match_id
            )));
        }
        Ok(())
    }
}

/// A parsed match plus the count of deliveries discarded from super overs
/// or innings past the second.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedMatch {
    pub record: MatchRecord,
    pub dropped_innings: usize,
    pub dropped_deliveries: usize,
}

/// Parse one match document. JSON is detected by a leading `{`; anything
/// else is read as a CSV ball log holding exactly one match.
pub fn parse_match(raw: &[u8], format_hint: Option<MatchFormat>) -> Result<ParsedMatch> {
    if looks_like_json(raw) {
        parse_cricsheet_json(raw, format_hint)
    } else {
        let mut matches = parse_ball_log(raw, format_hint)?;
        match matches.len() {
            1 => Ok(ParsedMatch {
                record: matches.pop().unwrap(),
                dropped_innings: 0,
                dropped_deliveries: 0,
            }),
            0 => Err(Error::InvalidRecord("ball log holds no deliveries".into())),
            n => Err(Error::InvalidRecord(format!(
                "ball log holds {n} matches, expected one"
            ))),
        }
    }
}

fn looks_like_json(raw: &[u8]) -> bool {
    let body = raw.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(raw);
    body.iter()
        .find(|b| !b.is_ascii_whitespace())
        .is_some_and(|&b| b == b'{')
}

// Cricsheet JSON, only the fields we read.

#[derive(Deserialize)]
struct RawMatch {
    info: RawInfo,
    #[serde(default)]
    innings: Vec<RawInnings>,
}

#[derive(Deserialize)]
struct RawInfo {
    match_type: Option<String>,
    #[serde(default)]
    dates: Vec<String>,
    #[serde(default)]
    teams: Vec<String>,
    venue: Option<String>,
    event: Option<RawEvent>,
    outcome: Option<RawOutcome>,
    overs: Option<u32>,
}

#[derive(Deserialize)]
struct RawEvent {
    name: Option<String>,
}

#[derive(Deserialize)]
struct RawOutcome {
    method: Option<String>,
}

#[derive(Deserialize)]
struct RawInnings {
    #[serde(default)]
    team: String,
    #[serde(default)]
    overs: Vec<RawOver>,
    #[serde(default)]
    super_over: bool,
    target: Option<RawTarget>,
}

#[derive(Deserialize)]
struct RawTarget {
    overs: Option<f64>,
}

#[derive(Deserialize)]
struct RawOver {
    over: u32,
    #[serde(default)]
    deliveries: Vec<RawDelivery>,
}

#[derive(Deserialize)]
struct RawDelivery {
    runs: RawRuns,
    extras: Option<RawExtras>,
    #[serde(default)]
    wickets: Vec<RawWicket>,
}

#[derive(Deserialize)]
struct RawRuns {
    #[serde(alias = "batsman")]
    batter: u32,
    #[serde(default)]
    extras: u32,
}

#[derive(Deserialize, Default)]
struct RawExtras {
    wides: Option<u32>,
    noballs: Option<u32>,
    byes: Option<u32>,
    legbyes: Option<u32>,
    penalty: Option<u32>,
}

impl RawExtras {
    fn kind(&self) -> ExtrasKind {
        if self.wides.is_some() {
            ExtrasKind::Wide
        } else if self.noballs.is_some() {
            ExtrasKind::NoBall
        } else if self.byes.is_some() {
            ExtrasKind::Bye
        } else if self.legbyes.is_some() {
            ExtrasKind::LegBye
        } else if self.penalty.is_some() {
            ExtrasKind::Penalty
        } else {
            ExtrasKind::None
        }
    }
}

#[derive(Deserialize)]
struct RawWicket {
    kind: Option<String>,
}

impl RawWicket {
    fn is_dismissal(&self) -> bool {
        !matches!(
            self.kind.as_deref(),
            Some("retired hurt") | Some("retired not out")
        )
    }
}

const IPL_EVENT: &str = "Indian Premier League";

fn detect_format(info: &RawInfo) -> Result<MatchFormat> {
    let is_ipl = info
        .event
        .as_ref()
        .and_then(|e| e.name.as_deref())
        .is_some_and(|n| n.contains(IPL_EVENT));
    if is_ipl {
        return Ok(MatchFormat::Ipl);
    }
    match info.match_type.as_deref() {
        Some("ODI") => Ok(MatchFormat::Odi),
        Some("T20") | Some("IT20") => Ok(MatchFormat::T20i),
        Some(other) => Err(Error::UnsupportedFormat(other.to_string())),
        None => Err(Error::UnsupportedFormat("missing info.match_type".into())),
    }
}

fn parse_cricsheet_json(raw: &[u8], format_hint: Option<MatchFormat>) -> Result<ParsedMatch> {
    let doc: RawMatch = serde_json::from_slice(raw).map_err(|e| Error::Parse {
        line: e.line(),
        column: Some(e.column()),
        message: e.to_string(),
    })?;
    let info = &doc.info;
    let format = match format_hint {
        Some(f) => f,
        None => detect_format(info)?,
    };
    let date = match info.dates.first() {
        Some(d) => Some(NaiveDate::parse_from_str(d, "%Y-%m-%d").map_err(|e| {
            Error::InvalidRecord(format!("info.dates[0] {d:?}: {e}"))
        })?),
        None => None,
    };

    let mut innings = Vec::new();
    let mut dropped_innings = 0;
    let mut dropped_deliveries = 0;
    let mut reduced = info
        .outcome
        .as_ref()
        .is_some_and(|o| o.method.is_some())
        || info.overs.is_some_and(|o| o < format.max_overs());

    for raw_innings in &doc.innings {
        let n_deliveries: usize = raw_innings.overs.iter().map(|o| o.deliveries.len()).sum();
        if raw_innings.super_over || innings.len() == 2 || n_deliveries == 0 {
            dropped_innings += 1;
            dropped_deliveries += n_deliveries;
            continue;
        }
        if let Some(target_overs) = raw_innings.target.as_ref().and_then(|t| t.overs) {
            if target_overs < f64::from(format.max_overs()) {
                reduced = true;
            }
        }
        let mut deliveries = Vec::with_capacity(n_deliveries);
        for over in &raw_innings.overs {
            for (i, d) in over.deliveries.iter().enumerate() {
                let extras = d.extras.as_ref();
                let kind = extras.map(RawExtras::kind).unwrap_or(ExtrasKind::None);
                let wicket = d.wickets.iter().any(RawWicket::is_dismissal);
                deliveries.push(DeliveryEvent::new(
                    over.over,
                    i as u32 + 1,
                    d.runs.batter,
                    d.runs.extras,
                    kind,
                    wicket,
                )?);
            }
        }
        let index = innings.len() as u8 + 1;
        innings.push(InningsRecord::new(index, raw_innings.team.clone(), deliveries)?);
    }

    let match_id = match (&date, info.teams.as_slice()) {
        (Some(d), [a, b, ..]) => format!("{d}_{a}_v_{b}"),
        (Some(d), _) => d.to_string(),
        (None, _) => info.teams.join("_v_"),
    };
    let record = MatchRecord {
        match_id,
        format,
        date,
        teams: info.teams.clone(),
        venue: info.venue.clone(),
        innings,
        reduced,
    };
    record.validate()?;
    Ok(ParsedMatch {
        record,
        dropped_innings,
        dropped_deliveries,
    })
}

/// Column order of the canonical CSV ball log.
pub const BALL_LOG_HEADER: [&str; 10] = [
    "match_id",
    "format",
    "innings",
    "over",
    "ball_in_over",
    "legal",
    "batter_runs",
    "extras_runs",
    "extras_kind",
    "wicket",
];

#[derive(Deserialize)]
struct BallLogRow {
    match_id: String,
    format: String,
    innings: u8,
    over: u32,
    ball_in_over: u32,
    legal: bool,
    batter_runs: u32,
    extras_runs: u32,
    extras_kind: String,
    wicket: bool,
}

fn csv_error(e: csv::Error) -> Error {
    let (line, byte) = e
        .position()
        .map(|p| (p.line() as usize, Some(p.byte())))
        .unwrap_or((0, None));
    let message = match byte {
        Some(b) => format!("{e} (byte {b})"),
        None => e.to_string(),
    };
    Error::Parse {
        line,
        column: None,
        message,
    }
}

/// Parse a CSV ball log. Matches come back in order of first appearance.
pub fn parse_ball_log(raw: &[u8], format_hint: Option<MatchFormat>) -> Result<Vec<MatchRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(raw);
    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.iter().ne(BALL_LOG_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            column: None,
            message: format!("unexpected ball log header {:?}", headers.iter().collect::<Vec<_>>()),
        });
    }

    // match_id -> (format, innings index -> deliveries)
    let mut order: Vec<String> = Vec::new();
    let mut grouped: BTreeMap<String, (MatchFormat, BTreeMap<u8, Vec<DeliveryEvent>>)> =
        BTreeMap::new();
    for row in reader.deserialize::<BallLogRow>() {
        let row = row.map_err(csv_error)?;
        let format = match format_hint {
            Some(f) => f,
            None => row.format.parse()?,
        };
        let kind: ExtrasKind = row.extras_kind.parse()?;
        let event = DeliveryEvent::new(
            row.over,
            row.ball_in_over,
            row.batter_runs,
            row.extras_runs,
            kind,
            row.wicket,
        )?;
        if event.legal != row.legal {
            return Err(Error::InvalidRecord(format!(
                "match {} over {} ball {}: legal={} contradicts extras_kind {}",
                row.match_id,
                row.over,
                row.ball_in_over,
                row.legal,
                kind.name()
            )));
        }
        let entry = grouped.entry(row.match_id.clone()).or_insert_with(|| {
            order.push(row.match_id.clone());
            (format, BTreeMap::new())
        });
        if entry.0 != format {
            return Err(Error::InvalidRecord(format!(
                "match {}: mixed formats",
                row.match_id
            )));
        }
        entry.1.entry(row.innings).or_default().push(event);
    }

    order
        .into_iter()
        .map(|id| {
            let (format, innings) = grouped.remove(&id).unwrap();
            let innings = innings
                .into_iter()
                .map(|(index, deliveries)| InningsRecord::new(index, "", deliveries))
                .collect::<Result<Vec<_>>>()?;
            let record = MatchRecord {
                match_id: id,
                format,
                date: None,
                teams: Vec::new(),
                venue: None,
                innings,
                reduced: false,
            };
            record.validate()?;
            Ok(record)
        })
        .collect()
}

/// Write matches as a canonical CSV ball log (LF line endings).
pub fn write_ball_log<W: Write>(matches: &[MatchRecord], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let csv_err = |e: csv::Error| Error::InvalidRecord(format!("writing ball log: {e}"));
    writer.write_record(BALL_LOG_HEADER).map_err(csv_err)?;
    for m in matches {
        for inn in &m.innings {
            for d in &inn.deliveries {
                writer
                    .write_record([
                        m.match_id.as_str(),
                        m.format.name(),
                        &inn.innings_index.to_string(),
                        &d.over.to_string(),
                        &d.ball_in_over.to_string(),
                        if d.legal { "true" } else { "false" },
                        &d.batter_runs.to_string(),
                        &d.extras_runs.to_string(),
                        d.extras_kind.name(),
                        if d.wicket { "true" } else { "false" },
                    ])
                    .map_err(csv_err)?;
            }
        }
    }
    writer
        .flush()
        .map_err(|e| Error::io("<ball log writer>", e))
}

/// A file that could not be read or parsed.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub source: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    pub matches: Vec<MatchRecord>,
    pub diagnostics: Vec<Diagnostic>,
    /// Deliveries discarded from super overs and extra innings.
    pub dropped_deliveries: usize,
}

impl Corpus {
    pub fn count(&self, format: MatchFormat) -> usize {
        self.matches.iter().filter(|m| m.format == format).count()
    }

    /// Keep only matches whose first day is on or before `last_day`.
    /// Undated matches are kept.
    pub fn until(mut self, last_day: NaiveDate) -> Self {
        self.matches.retain(|m| m.date.is_none_or(|d| d <= last_day));
        self
    }
}

fn is_match_file(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("json") | Some("csv")
    )
}

/// Parse every `.json` / `.csv` file in `dir`. Failures become diagnostics.
pub fn load_corpus(dir: &Path, filter: Option<MatchFormat>) -> Result<Corpus> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && is_match_file(&path) {
            paths.push(path);
        }
    }
    paths.sort();
    let sources: Vec<(String, Result<Vec<u8>>)> = paths
        .par_iter()
        .map(|p| {
            let name = p.display().to_string();
            (name, fs::read(p).map_err(|e| Error::io(p, e)))
        })
        .collect();
    Ok(collect_sources(sources, filter))
}

/// Same as [`load_corpus`] over in-memory `(name, bytes)` pairs.
pub fn load_sources<'a, I>(sources: I, filter: Option<MatchFormat>) -> Corpus
where
    I: IntoIterator<Item = (&'a str, &'a [u8])>,
{
    let owned = sources
        .into_iter()
        .map(|(name, bytes)| (name.to_string(), Ok(bytes.to_vec())))
        .collect();
    collect_sources(owned, filter)
}

fn stem(source: &str) -> String {
    Path::new(source)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| source.to_string())
}

fn parse_source(name: &str, bytes: &[u8]) -> Parsed {
    if looks_like_json(bytes) {
        let mut parsed = parse_cricsheet_json(bytes, None)?;
        parsed.record.match_id = stem(name);
        Ok((vec![parsed.record], parsed.dropped_deliveries))
    } else {
        Ok((parse_ball_log(bytes, None)?, 0))
    }
}

/// Matches from one file plus the deliveries it dropped.
type Parsed = Result<(Vec<MatchRecord>, usize)>;

fn collect_sources(sources: Vec<(String, Result<Vec<u8>>)>, filter: Option<MatchFormat>) -> Corpus {
    let parsed: Vec<(String, Parsed)> = sources
        .into_par_iter()
        .map(|(name, bytes)| {
            let result = bytes.and_then(|b| parse_source(&name, &b));
            (name, result)
        })
        .collect();

    let mut corpus = Corpus::default();
    for (name, result) in parsed {
        match result {
            Ok((matches, dropped)) => {
                corpus.dropped_deliveries += dropped;
                corpus
                    .matches
                    .extend(matches.into_iter().filter(|m| filter.is_none_or(|f| m.format == f)));
            }
            Err(e) => corpus.diagnostics.push(Diagnostic {
                source: name,
                message: e.to_string(),
            }),
        }
    }
    corpus.matches.sort_by(|a, b| a.match_id.cmp(&b.match_id));
    corpus.diagnostics.sort_by(|a, b| a.source.cmp(&b.source));
    corpus
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    /// Legal-delivery index, starting at 1.
    pub ball: u32,
    pub runs: u32,
    pub wickets: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InningsTrajectory {
    pub points: Vec<TrajectoryPoint>,
    pub total: u32,
    pub completed_balls: u32,
}

impl InningsTrajectory {
    /// State after legal ball `ball`, if the innings lasted that long.
    pub fn at(&self, ball: u32) -> Option<&TrajectoryPoint> {
        let idx = ball.checked_sub(1)? as usize;
        self.points.get(idx)
    }
}

/// Cumulative (ball, runs, wickets) per legal delivery.
///
/// Runs and wickets on wides and no-balls land on the next legal ball, or on
/// the last point when the innings ends on an illegal delivery. Legal
/// deliveries beyond the format's scheduled balls are folded into the final
/// scheduled point.
pub fn trajectory(innings: &InningsRecord, format: MatchFormat) -> InningsTrajectory {
    let cap = format.scheduled_balls() as usize;
    let mut points: Vec<TrajectoryPoint> = Vec::with_capacity(cap);
    let mut pending_runs = 0;
    let mut pending_wickets = 0;
    let mut runs = 0;
    let mut wickets = 0;

    for d in &innings.deliveries {
        pending_runs += d.runs();
        pending_wickets += u32::from(d.wicket);
        if d.legal && points.len() < cap {
            runs += pending_runs;
            wickets = (wickets + pending_wickets).min(MAX_WICKETS);
            pending_runs = 0;
            pending_wickets = 0;
            points.push(TrajectoryPoint {
                ball: points.len() as u32 + 1,
                runs,
                wickets,
            });
        }
    }

    let completed_balls = points.len() as u32;
    match points.last_mut() {
        Some(last) => {
            last.runs += pending_runs;
            last.wickets = (last.wickets + pending_wickets).min(MAX_WICKETS);
        }
        None => points.push(TrajectoryPoint {
            ball: 1,
            runs: pending_runs,
            wickets: pending_wickets.min(MAX_WICKETS),
        }),
    }
    let total = points.last().map_or(0, |p| p.runs);
    InningsTrajectory {
        points,
        total,
        completed_balls,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legal(runs: u32) -> (u32, ExtrasKind, u32, bool) {
        (runs, ExtrasKind::None, 0, false)
    }

    fn innings_of(plan: &[(u32, ExtrasKind, u32, bool)]) -> InningsRecord {
        let deliveries = plan
            .iter()
            .enumerate()
            .map(|(i, &(bat, kind, extras, wicket))| {
                DeliveryEvent::new(0, i as u32 + 1, bat, extras, kind, wicket).unwrap()
            })
            .collect();
        InningsRecord::new(1, "A", deliveries).unwrap()
    }

    #[test]
    fn wide_credits_next_legal_ball() {
        let inn = innings_of(&[legal(1), (0, ExtrasKind::Wide, 1, false), legal(2)]);
        let t = trajectory(&inn, MatchFormat::Odi);
        let got: Vec<_> = t.points.iter().map(|p| (p.ball, p.runs, p.wickets)).collect();
        assert_eq!(got, vec![(1, 1, 0), (2, 4, 0)]);
        assert_eq!(t.total, 4);
        assert_eq!(t.completed_balls, 2);
    }

    #[test]
    fn wicket_on_third_ball() {
        let mut plan = vec![legal(0); 6];
        plan[2].3 = true;
        let t = trajectory(&innings_of(&plan), MatchFormat::T20i);
        assert_eq!(t.points[1].wickets, 0);
        for p in &t.points[2..] {
            assert_eq!((p.runs, p.wickets), (0, 1));
        }
        assert_eq!(t.points.last().unwrap().ball, 6);
    }

    #[test]
    fn trailing_illegal_delivery_credits_last_point() {
        let inn = innings_of(&[legal(4), (0, ExtrasKind::NoBall, 1, false)]);
        let t = trajectory(&inn, MatchFormat::Odi);
        assert_eq!(t.points.len(), 1);
        assert_eq!(t.points[0].runs, 5);
        assert_eq!(t.total, 5);
    }

    #[test]
    fn all_illegal_innings_yields_synthetic_point() {
        let inn = innings_of(&[(0, ExtrasKind::Wide, 1, false), (0, ExtrasKind::Wide, 5, true)]);
        let t = trajectory(&inn, MatchFormat::Ipl);
        assert_eq!(t.points, vec![TrajectoryPoint { ball: 1, runs: 6, wickets: 1 }]);
        assert_eq!(t.completed_balls, 0);
    }

    #[test]
    fn surplus_legal_balls_fold_into_last_scheduled_point() {
        let plan = vec![legal(1); 123];
        let t = trajectory(&innings_of_many(&plan), MatchFormat::T20i);
        assert_eq!(t.points.len(), 120);
        assert_eq!(t.completed_balls, 120);
        assert_eq!(t.total, 123);
    }

    fn innings_of_many(plan: &[(u32, ExtrasKind, u32, bool)]) -> InningsRecord {
        let deliveries = plan
            .iter()
            .enumerate()
            .map(|(i, &(bat, kind, extras, wicket))| {
                DeliveryEvent::new(i as u32 / 6, i as u32 % 6 + 1, bat, extras, kind, wicket)
                    .unwrap()
            })
            .collect();
        InningsRecord::new(1, "A", deliveries).unwrap()
    }

    #[test]
    fn illegal_flag_follows_extras_kind() {
        for kind in [ExtrasKind::Wide, ExtrasKind::NoBall] {
            assert!(!DeliveryEvent::new(0, 1, 0, 1, kind, false).unwrap().legal);
        }
        for kind in [ExtrasKind::None, ExtrasKind::Bye, ExtrasKind::LegBye, ExtrasKind::Penalty] {
            assert!(DeliveryEvent::new(0, 1, 0, 1, kind, false).unwrap().legal);
        }
        assert!(DeliveryEvent::new(0, 1, 0, 0, ExtrasKind::Wide, false).is_err());
    }

    #[test]
    fn innings_rejects_out_of_order_and_eleven_wickets() {
        let a = DeliveryEvent::new(1, 1, 0, 0, ExtrasKind::None, false).unwrap();
        let b = DeliveryEvent::new(0, 1, 0, 0, ExtrasKind::None, false).unwrap();
        assert!(InningsRecord::new(1, "A", vec![a, b]).is_err());

        let mut plan = [(0, ExtrasKind::None, 0, true); 11];
        plan[0].3 = true;
        let deliveries = plan
            .iter()
            .enumerate()
            .map(|(i, &(bat, kind, ex, w))| DeliveryEvent::new(0, i as u32 + 1, bat, ex, kind, w).unwrap())
            .collect();
        assert!(InningsRecord::new(1, "A", deliveries).is_err());
    }

    #[test]
    fn format_parsing() {
        assert_eq!("ODI".parse::<MatchFormat>().unwrap(), MatchFormat::Odi);
        assert_eq!("t20i".parse::<MatchFormat>().unwrap(), MatchFormat::T20i);
        assert!("test".parse::<MatchFormat>().is_err());
        assert_eq!(MatchFormat::Ipl.scheduled_balls(), 120);
        assert_eq!(MatchFormat::Odi.scheduled_balls(), 300);
    }

    #[test]
    fn json_detection_skips_whitespace_and_bom() {
        assert!(looks_like_json(b"  \n{\"info\":{}}"));
        assert!(looks_like_json(b"\xEF\xBB\xBF{"));
        assert!(!looks_like_json(b"match_id,format"));
    }
}
