//! Epidemiological summaries: case-fatality rates, health-care worker burden,
//! super-spreaders, epi weeks, outbreak timelines and response lags.

use std::fmt;
use std::io::{Read, Write};
use std::num::NonZeroUsize;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::TransmissionGraph;
use crate::registry::{CaseId, CaseRegistry, Outcome, Role};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalyticsError {
    #[error("ZeroCases: case-fatality rate needs at least one case")]
    ZeroCases,
    #[error("InvalidCounts: {deaths} deaths exceed {cases} cases")]
    DeathsExceedCases { deaths: u64, cases: u64 },
    #[error("BeforeAnchor: {date} precedes anchor {anchor}{}", describe(.event))]
    BeforeAnchor {
        date: NaiveDate,
        anchor: NaiveDate,
        event: Option<String>,
    },
    #[error("MissingEventKind: no {0} event in timeline")]
    MissingEventKind(EventKind),
    #[error("timeline row {row}: {reason}")]
    Row { row: usize, reason: String },
}

fn describe(event: &Option<String>) -> String {
    event.as_ref().map(|e| format!(" (event {e:?})")).unwrap_or_default()
}

/// Exact deaths/cases ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cfr {
    pub deaths: u64,
    pub cases: u64,
}

impl Cfr {
    pub fn ratio(&self) -> f64 {
        self.deaths as f64 / self.cases as f64
    }

    /// Scaled value `deaths * 10^decimals / cases` rounded half-up, computed
    /// in integers.
    fn scaled_half_up(&self, decimals: u32, extra_scale: u128) -> u128 {
        let scale = 10u128.pow(decimals) * extra_scale;
        let num = self.deaths as u128 * scale;
        let den = self.cases as u128;
        (2 * num + den) / (2 * den)
    }

    /// Ratio rounded half-up to `decimals` places, e.g. `0.4994`.
    pub fn rounded(&self, decimals: u32) -> String {
        format_fixed(self.scaled_half_up(decimals, 1), decimals)
    }

    /// Percentage rounded half-up to `decimals` places, e.g. `50` or `49.9`.
    pub fn percent(&self, decimals: u32) -> String {
        format_fixed(self.scaled_half_up(decimals, 100), decimals)
    }
}

fn format_fixed(scaled: u128, decimals: u32) -> String {
    if decimals == 0 {
        return scaled.to_string();
    }
    let unit = 10u128.pow(decimals);
    format!(
        "{}.{:0width$}",
        scaled / unit,
        scaled % unit,
        width = decimals as usize
    )
}

impl fmt::Display for Cfr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.deaths, self.cases)
    }
}

pub fn case_fatality_rate(deaths: u64, cases: u64) -> Result<Cfr, AnalyticsError> {
    if cases == 0 {
        return Err(AnalyticsError::ZeroCases);
    }
    if deaths > cases {
        return Err(AnalyticsError::DeathsExceedCases { deaths, cases });
    }
    Ok(Cfr { deaths, cases })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HcwStats {
    pub cases: u64,
    pub deaths: u64,
    /// `None` when there are no health-care worker cases.
    pub cfr: Option<Cfr>,
}

/// Health-care worker cases and deaths. When a graph is given only its
/// nodes are counted.
pub fn hcw_stats(registry: &CaseRegistry, graph: Option<&TransmissionGraph>) -> HcwStats {
    let (mut cases, mut deaths) = (0u64, 0u64);
    for r in registry.records() {
        if r.fields.role != Role::HealthcareWorker {
            continue;
        }
        if graph.is_some_and(|g| !g.contains(&r.case_id)) {
            continue;
        }
        cases += 1;
        if r.fields.outcome == Outcome::Dead {
            deaths += 1;
        }
    }
    HcwStats {
        cases,
        deaths,
        cfr: case_fatality_rate(deaths, cases).ok(),
    }
}

/// Nodes with infection out-degree of at least `k`, highest first, ties by id.
pub fn super_spreaders(graph: &TransmissionGraph, k: NonZeroUsize) -> Vec<(CaseId, usize)> {
    let mut out: Vec<(CaseId, usize)> = graph
        .nodes()
        .map(|n| (n.case_id.clone(), graph.out_degree(&n.case_id)))
        .filter(|(_, deg)| *deg >= k.get())
        .collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Days 0-6 after the anchor are week 1.
pub fn epi_week(date: NaiveDate, anchor: NaiveDate) -> Result<u32, AnalyticsError> {
    let days = (date - anchor).num_days();
    if days < 0 {
        return Err(AnalyticsError::BeforeAnchor {
            date,
            anchor,
            event: None,
        });
    }
    Ok((days / 7 + 1) as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    OutbreakReport,
    BorderCrossing,
    WhoAction,
    NationalAction,
    NgoAction,
    MediaMilestone,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EventKind::OutbreakReport => "outbreak_report",
            EventKind::BorderCrossing => "border_crossing",
            EventKind::WhoAction => "who_action",
            EventKind::NationalAction => "national_action",
            EventKind::NgoAction => "ngo_action",
            EventKind::MediaMilestone => "media_milestone",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "outbreak_report" => EventKind::OutbreakReport,
            "border_crossing" => EventKind::BorderCrossing,
            "who_action" => EventKind::WhoAction,
            "national_action" => EventKind::NationalAction,
            "ngo_action" => EventKind::NgoAction,
            "media_milestone" => EventKind::MediaMilestone,
            other => return Err(format!("unknown event kind {other:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpiEvent {
    pub date: NaiveDate,
    pub kind: EventKind,
    pub description: String,
    pub country: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub week: u32,
    #[serde(flatten)]
    pub event: EpiEvent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpiTimeline {
    pub anchor_date: NaiveDate,
    pub events: Vec<TimelineEntry>,
}

/// Stable-sorts events by date and tags each with its epi week.
pub fn build_timeline(events: &[EpiEvent], anchor: NaiveDate) -> Result<EpiTimeline, AnalyticsError> {
    let mut entries = Vec::with_capacity(events.len());
    for ev in events {
        let week = epi_week(ev.date, anchor).map_err(|_| AnalyticsError::BeforeAnchor {
            date: ev.date,
            anchor,
            event: Some(ev.description.clone()),
        })?;
        entries.push(TimelineEntry {
            week,
            event: ev.clone(),
        });
    }
    entries.sort_by_key(|e| e.event.date);
    Ok(EpiTimeline {
        anchor_date: anchor,
        events: entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseLag {
    pub days: i64,
    pub weeks: i64,
}

/// Gap from the earliest `trigger` event to the earliest `response` event.
pub fn response_lag(
    timeline: &EpiTimeline,
    trigger: EventKind,
    response: EventKind,
) -> Result<ResponseLag, AnalyticsError> {
    let earliest = |kind: EventKind| {
        timeline
            .events
            .iter()
            .filter(|e| e.event.kind == kind)
            .min_by_key(|e| e.event.date)
            .ok_or(AnalyticsError::MissingEventKind(kind))
    };
    let t = earliest(trigger)?;
    let r = earliest(response)?;
    Ok(ResponseLag {
        days: (r.event.date - t.event.date).num_days(),
        weeks: r.week as i64 - t.week as i64,
    })
}

/// A timeline row as read from a file, with its recorded week if present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRow {
    pub event: EpiEvent,
    pub recorded_week: Option<u32>,
}

const TIMELINE_COLUMNS: [&str; 5] = ["date", "week", "kind", "country", "description"];

/// Reads `date,week,kind,country,description` rows; `week` and `country` may
/// be blank.
pub fn read_event_rows<R: Read>(input: R) -> Result<Vec<EventRow>, AnalyticsError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| AnalyticsError::Row { row: 0, reason: e.to_string() })?
        .clone();
    if header.iter().ne(TIMELINE_COLUMNS) {
        return Err(AnalyticsError::Row {
            row: 0,
            reason: format!("expected header {}", TIMELINE_COLUMNS.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let err = |reason: String| AnalyticsError::Row { row, reason };
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let date = crate::dates::parse_date(&rec[0]).ok_or_else(|| err(format!("bad date {:?}", &rec[0])))?;
        let recorded_week = match &rec[1] {
            "" => None,
            w => Some(w.parse().map_err(|_| err(format!("bad week {w:?}")))?),
        };
        let kind: EventKind = rec[2].parse().map_err(err)?;
        let country = (!rec[3].is_empty()).then(|| rec[3].to_string());
        rows.push(EventRow {
            event: EpiEvent {
                date,
                kind,
                description: rec[4].to_string(),
                country,
            },
            recorded_week,
        });
    }
    Ok(rows)
}

pub fn write_timeline_csv<W: Write>(timeline: &EpiTimeline, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TIMELINE_COLUMNS)?;
    for e in &timeline.events {
        w.write_record([
            e.event.date.to_string(),
            e.week.to_string(),
            e.event.kind.to_string(),
            e.event.country.clone().unwrap_or_default(),
            e.event.description.clone(),
        ])?;
    }
    w.flush()
}
