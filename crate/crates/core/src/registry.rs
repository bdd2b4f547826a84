//! Person-level case registry assembled from report observations.
//!
//! Observations are matched to records by identity key (name, else village,
//! else hospital within a 42-day window) and merged field by field with
//! source-tier precedence. Status only ever rises and death is terminal.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Twice the longest incubation period.
pub const MATCH_WINDOW_DAYS: i64 = 42;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegistryError {
    #[error("InvalidObservation: {0}")]
    InvalidObservation(String),
    #[error("AmbiguousMatch: observation matches {0:?} equally")]
    AmbiguousMatch(Vec<CaseId>),
    #[error("UnknownCase: {0}")]
    UnknownCase(CaseId),
    #[error("DuplicateId: {0}")]
    DuplicateId(CaseId),
    #[error("registry line {line}: {reason}")]
    Load { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CaseId(pub String);

impl CaseId {
    pub fn new(id: impl Into<String>) -> Self {
        CaseId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<String> for CaseId {
    fn from(s: String) -> Self {
        CaseId(s)
    }
}

impl From<&str> for CaseId {
    fn from(s: &str) -> Self {
        CaseId(s.to_string())
    }
}

/// Ordered `suspected < probable < confirmed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Suspected,
    Probable,
    Confirmed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Alive,
    Recovered,
    Dead,
    Evacuated,
    #[default]
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    HealthcareWorker,
    TraditionalHealer,
    Community,
    Traveler,
    #[default]
    Unknown,
}

/// Ordered by precedence: `other < major_news < official`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceTier {
    Other,
    MajorNews,
    Official,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseObservation {
    pub person_name: Option<String>,
    pub village: Option<String>,
    pub hospital: Option<String>,
    pub country: String,
    pub status: Status,
    pub outcome: Outcome,
    pub role: Role,
    pub report_date: NaiveDate,
    pub source_tier: SourceTier,
    pub source_ref: String,
}

impl CaseObservation {
    pub fn validate(&self) -> Result<(), RegistryError> {
        let present = |f: &Option<String>| f.as_deref().is_some_and(|s| !s.trim().is_empty());
        if !(present(&self.person_name) || present(&self.village) || present(&self.hospital)) {
            return Err(RegistryError::InvalidObservation(
                "one of person_name, village, hospital is required".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    PersonName,
    Village,
    Hospital,
    Country,
    Outcome,
    Role,
}

/// A value that lost field resolution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conflict {
    pub field: Field,
    pub kept: String,
    pub discarded: String,
    pub source_ref: String,
}

/// Resolved per-field values of a case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseFields {
    pub person_name: Option<String>,
    pub village: Option<String>,
    pub hospital: Option<String>,
    pub country: String,
    pub status: Status,
    pub outcome: Outcome,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Merged {
    pub fields: CaseFields,
    pub conflicts: Vec<Conflict>,
}

type Rank = (SourceTier, NaiveDate);

/// One field under resolution: current value plus the rank that set it.
struct Slot<T> {
    value: Option<T>,
    rank: Rank,
}

impl<T: PartialEq + Clone + fmt::Debug> Slot<T> {
    fn offer(&mut self, field: Field, value: Option<T>, rank: Rank, source: &str, conflicts: &mut Vec<Conflict>, show: impl Fn(&T) -> String) {
        let Some(value) = value else { return };
        match &self.value {
            None => {
                self.value = Some(value);
                self.rank = rank;
            }
            Some(cur) if *cur == value => self.rank = self.rank.max(rank),
            Some(cur) => {
                if rank > self.rank {
                    conflicts.push(Conflict {
                        field,
                        kept: show(&value),
                        discarded: show(cur),
                        source_ref: source.to_string(),
                    });
                    self.value = Some(value);
                    self.rank = rank;
                } else {
                    conflicts.push(Conflict {
                        field,
                        kept: show(cur),
                        discarded: show(&value),
                        source_ref: source.to_string(),
                    });
                }
            }
        }
    }
}

fn label<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn clean(s: &Option<String>) -> Option<String> {
    s.as_deref()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
}

struct Resolver {
    person_name: Slot<String>,
    village: Slot<String>,
    hospital: Slot<String>,
    country: Slot<String>,
    outcome: Slot<Outcome>,
    role: Slot<Role>,
    status: Status,
}

impl Resolver {
    fn new(first: &CaseObservation) -> Self {
        let rank = (first.source_tier, first.report_date);
        let slot = |v| Slot { value: v, rank };
        Resolver {
            person_name: slot(clean(&first.person_name)),
            village: slot(clean(&first.village)),
            hospital: slot(clean(&first.hospital)),
            country: slot(Some(first.country.trim().to_string())),
            outcome: Slot {
                value: (first.outcome != Outcome::Unknown).then_some(first.outcome),
                rank,
            },
            role: Slot {
                value: (first.role != Role::Unknown).then_some(first.role),
                rank,
            },
            status: first.status,
        }
    }

    fn absorb(&mut self, obs: &CaseObservation, conflicts: &mut Vec<Conflict>) {
        let rank = (obs.source_tier, obs.report_date);
        let src = obs.source_ref.as_str();
        let text = |s: &String| s.clone();
        self.person_name.offer(Field::PersonName, clean(&obs.person_name), rank, src, conflicts, text);
        self.village.offer(Field::Village, clean(&obs.village), rank, src, conflicts, text);
        self.hospital.offer(Field::Hospital, clean(&obs.hospital), rank, src, conflicts, text);
        self.country.offer(Field::Country, Some(obs.country.trim().to_string()), rank, src, conflicts, text);
        let role = (obs.role != Role::Unknown).then_some(obs.role);
        self.role.offer(Field::Role, role, rank, src, conflicts, label);
        self.absorb_outcome(obs, conflicts);
        self.status = self.status.max(obs.status);
    }

    fn absorb_outcome(&mut self, obs: &CaseObservation, conflicts: &mut Vec<Conflict>) {
        let rank = (obs.source_tier, obs.report_date);
        let new = obs.outcome;
        if new == Outcome::Unknown {
            return;
        }
        let conflict = |kept: Outcome, discarded: Outcome| Conflict {
            field: Field::Outcome,
            kept: label(&kept),
            discarded: label(&discarded),
            source_ref: obs.source_ref.clone(),
        };
        match self.outcome.value {
            Some(Outcome::Dead) if new != Outcome::Dead => {
                conflicts.push(conflict(Outcome::Dead, new));
            }
            Some(cur) if new == Outcome::Dead && cur != Outcome::Dead => {
                conflicts.push(conflict(Outcome::Dead, cur));
                self.outcome = Slot { value: Some(Outcome::Dead), rank };
            }
            _ => self.outcome.offer(Field::Outcome, Some(new), rank, &obs.source_ref, conflicts, label),
        }
    }

    fn fields(&self) -> CaseFields {
        CaseFields {
            person_name: self.person_name.value.clone(),
            village: self.village.value.clone(),
            hospital: self.hospital.value.clone(),
            country: self.country.value.clone().unwrap_or_default(),
            status: self.status,
            outcome: self.outcome.value.unwrap_or(Outcome::Unknown),
            role: self.role.value.unwrap_or(Role::Unknown),
        }
    }
}

/// Resolves two observations of the same person. Higher source tier wins
/// each field, later report date breaks tier ties, status takes the maximum,
/// and a reported death is never reverted.
pub fn merge_fields(a: &CaseObservation, b: &CaseObservation) -> Merged {
    resolve([a, b])
}

fn resolve<'a>(history: impl IntoIterator<Item = &'a CaseObservation>) -> Merged {
    let mut it = history.into_iter();
    let first = it.next().expect("history is never empty");
    let mut resolver = Resolver::new(first);
    let mut conflicts = Vec::new();
    for obs in it {
        resolver.absorb(obs, &mut conflicts);
    }
    Merged {
        fields: resolver.fields(),
        conflicts,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case_id: CaseId,
    #[serde(flatten)]
    pub fields: CaseFields,
    pub first_report_date: NaiveDate,
    pub last_report_date: NaiveDate,
    pub observation_history: Vec<CaseObservation>,
    pub conflicts: Vec<Conflict>,
}

impl CaseRecord {
    fn from_history(case_id: CaseId, history: Vec<CaseObservation>) -> Self {
        let merged = resolve(&history);
        let first_report_date = history.iter().map(|o| o.report_date).min().expect("non-empty");
        let last_report_date = history.iter().map(|o| o.report_date).max().expect("non-empty");
        CaseRecord {
            case_id,
            fields: merged.fields,
            first_report_date,
            last_report_date,
            observation_history: history,
            conflicts: merged.conflicts,
        }
    }

    fn near(&self, date: NaiveDate) -> bool {
        self.observation_history
            .iter()
            .any(|o| (o.report_date - date).num_days().abs() <= MATCH_WINDOW_DAYS)
    }

    fn mentions(&self, name: &str) -> bool {
        let name = name.to_lowercase();
        self.observation_history
            .iter()
            .any(|o| o.source_ref.to_lowercase().contains(&name))
    }
}

/// Strength of an identity or backtracking link, strongest last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Hospital,
    Village,
    Name,
}

fn same_text(a: &Option<String>, b: &Option<String>) -> bool {
    matches!((a, b), (Some(x), Some(y)) if x.trim().eq_ignore_ascii_case(y.trim()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub by_status: BTreeMap<Status, usize>,
    pub by_outcome: BTreeMap<Outcome, usize>,
}

impl StatusCounts {
    pub fn status(&self, s: Status) -> usize {
        self.by_status[&s]
    }

    pub fn outcome(&self, o: Outcome) -> usize {
        self.by_outcome[&o]
    }

    pub fn total(&self) -> usize {
        self.by_status.values().sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CaseRegistry {
    records: Vec<CaseRecord>,
    index: HashMap<CaseId, usize>,
    next_seq: u64,
}

impl CaseRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[CaseRecord] {
        &self.records
    }

    pub fn get(&self, id: &CaseId) -> Option<&CaseRecord> {
        self.index.get(id).map(|&i| &self.records[i])
    }

    pub fn observation_count(&self) -> usize {
        self.records.iter().map(|r| r.observation_history.len()).sum()
    }

    fn fresh_id(&mut self) -> CaseId {
        loop {
            self.next_seq += 1;
            let id = CaseId(format!("case-{:06}", self.next_seq));
            if !self.index.contains_key(&id) {
                return id;
            }
        }
    }

    fn push(&mut self, record: CaseRecord) {
        self.index.insert(record.case_id.clone(), self.records.len());
        self.records.push(record);
    }

    fn link_strength(record: &CaseRecord, obs: &CaseObservation) -> Option<LinkKind> {
        let obs_name = clean(&obs.person_name);
        if obs_name.is_some() && record.fields.person_name.is_some() {
            return same_text(&obs_name, &record.fields.person_name).then_some(LinkKind::Name);
        }
        if same_text(&clean(&obs.village), &record.fields.village) && record.near(obs.report_date) {
            return Some(LinkKind::Village);
        }
        if same_text(&clean(&obs.hospital), &record.fields.hospital) && record.near(obs.report_date) {
            return Some(LinkKind::Hospital);
        }
        None
    }

    /// Merges `obs` into the matching record or creates a new one.
    pub fn upsert_case(&mut self, obs: CaseObservation) -> Result<CaseId, RegistryError> {
        obs.validate()?;
        let mut best: Option<LinkKind> = None;
        let mut hits: Vec<usize> = Vec::new();
        for (i, rec) in self.records.iter().enumerate() {
            if let Some(kind) = Self::link_strength(rec, &obs) {
                match best {
                    Some(b) if kind < b => {}
                    Some(b) if kind == b => hits.push(i),
                    _ => {
                        best = Some(kind);
                        hits = vec![i];
                    }
                }
            }
        }
        match hits.as_slice() {
            [] => {
                let id = self.fresh_id();
                self.push(CaseRecord::from_history(id.clone(), vec![obs]));
                Ok(id)
            }
            [i] => {
                let rec = &mut self.records[*i];
                let mut history = std::mem::take(&mut rec.observation_history);
                history.push(obs);
                *rec = CaseRecord::from_history(rec.case_id.clone(), history);
                Ok(rec.case_id.clone())
            }
            many => {
                let mut ids: Vec<CaseId> = many.iter().map(|&i| self.records[i].case_id.clone()).collect();
                ids.sort();
                Err(RegistryError::AmbiguousMatch(ids))
            }
        }
    }

    /// Inserts a new record under a caller-chosen id, bypassing matching.
    pub fn insert_with_id(&mut self, id: CaseId, obs: CaseObservation) -> Result<(), RegistryError> {
        obs.validate()?;
        if self.index.contains_key(&id) {
            return Err(RegistryError::DuplicateId(id));
        }
        self.push(CaseRecord::from_history(id, vec![obs]));
        Ok(())
    }

    /// Appends an observation to a known record.
    pub fn observe(&mut self, id: &CaseId, obs: CaseObservation) -> Result<(), RegistryError> {
        obs.validate()?;
        let i = *self.index.get(id).ok_or_else(|| RegistryError::UnknownCase(id.clone()))?;
        let rec = &mut self.records[i];
        let mut history = std::mem::take(&mut rec.observation_history);
        history.push(obs);
        *rec = CaseRecord::from_history(id.clone(), history);
        Ok(())
    }

    /// Related records with the strongest link to each: a name of one
    /// appearing in the other's source references, a shared village, or a
    /// shared hospital. Sorted by case id; the query case is excluded.
    pub fn backtrack_links(&self, id: &CaseId) -> Result<Vec<(CaseId, LinkKind)>, RegistryError> {
        let query = self.get(id).ok_or_else(|| RegistryError::UnknownCase(id.clone()))?;
        let mut out: Vec<(CaseId, LinkKind)> = self
            .records
            .iter()
            .filter(|r| r.case_id != *id)
            .filter_map(|other| {
                let named = |a: &CaseRecord, b: &CaseRecord| {
                    a.fields.person_name.as_deref().is_some_and(|n| b.mentions(n))
                };
                if named(query, other) || named(other, query) {
                    Some((other.case_id.clone(), LinkKind::Name))
                } else if same_text(&query.fields.village, &other.fields.village) {
                    Some((other.case_id.clone(), LinkKind::Village))
                } else if same_text(&query.fields.hospital, &other.fields.hospital) {
                    Some((other.case_id.clone(), LinkKind::Hospital))
                } else {
                    None
                }
            })
            .collect();
        out.sort();
        Ok(out)
    }

    pub fn backtrack(&self, id: &CaseId) -> Result<Vec<CaseId>, RegistryError> {
        Ok(self.backtrack_links(id)?.into_iter().map(|(c, _)| c).collect())
    }

    pub fn status_counts(&self) -> StatusCounts {
        let mut by_status: BTreeMap<Status, usize> =
            [Status::Suspected, Status::Probable, Status::Confirmed].into_iter().map(|s| (s, 0)).collect();
        let mut by_outcome: BTreeMap<Outcome, usize> = [
            Outcome::Alive,
            Outcome::Recovered,
            Outcome::Dead,
            Outcome::Evacuated,
            Outcome::Unknown,
        ]
        .into_iter()
        .map(|o| (o, 0))
        .collect();
        for r in &self.records {
            *by_status.get_mut(&r.fields.status).expect("all statuses seeded") += 1;
            *by_outcome.get_mut(&r.fields.outcome).expect("all outcomes seeded") += 1;
        }
        StatusCounts { by_status, by_outcome }
    }

    /// One `CaseRecord` per line.
    pub fn save_jsonl<W: Write>(&self, mut out: W) -> Result<(), RegistryError> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r).map_err(|e| RegistryError::Io(e.to_string()))?;
            out.write_all(b"\n").map_err(|e| RegistryError::Io(e.to_string()))?;
        }
        Ok(())
    }

    pub fn load_jsonl<R: BufRead>(input: R) -> Result<Self, RegistryError> {
        let mut reg = CaseRegistry::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| RegistryError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let load_err = |reason: String| RegistryError::Load { line: i + 1, reason };
            let rec: CaseRecord = serde_json::from_str(&line).map_err(|e| load_err(e.to_string()))?;
            if rec.observation_history.is_empty() {
                return Err(load_err("observation_history is empty".into()));
            }
            if reg.index.contains_key(&rec.case_id) {
                return Err(RegistryError::DuplicateId(rec.case_id));
            }
            if let Some(seq) = rec.case_id.0.strip_prefix("case-").and_then(|s| s.parse::<u64>().ok()) {
                reg.next_seq = reg.next_seq.max(seq);
            }
            reg.push(rec);
        }
        Ok(reg)
    }
}
