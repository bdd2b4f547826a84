//! Surveillance report ingestion: ProMED headlines, tabular exports, windowed
//! keyword filtering and duplicate removal.

mod headline;
mod table;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use headline::{parse_headline_corpus, parse_promed_headline, ParsedHeadline, Qualifier};
pub use table::{ingest_report_table, read_media_counts, read_reports, Ingested, TableSchema};

/// Keyword attached to ProMED records that only repeat earlier posts.
pub const PERIOD_SUMMARY_KEYWORD: &str = "period_summary";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IngestError {
    #[error("MalformedHeadline{}: {reason}", line_suffix(*.line))]
    MalformedHeadline { line: Option<usize>, reason: String },
    #[error("SchemaError at row {row}: {reason}")]
    Schema { row: usize, reason: String },
    #[error("DateParseError at row {row}: cannot parse {value:?}")]
    DateParse { row: usize, value: String },
    #[error("InvalidWindow: start {start} is after end {end}")]
    InvalidWindow { start: NaiveDate, end: NaiveDate },
    #[error("InvalidReport: {0}")]
    InvalidReport(String),
    #[error("EmptyFieldSet: at least one search field is required")]
    EmptyFieldSet,
    #[error("io error: {0}")]
    Io(String),
}

fn line_suffix(line: Option<usize>) -> String {
    line.map(|l| format!(" at line {l}")).unwrap_or_default()
}

impl From<std::io::Error> for IngestError {
    fn from(e: std::io::Error) -> Self {
        IngestError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceMedium {
    Promed,
    NewsDb,
    Official,
    Other,
}

impl std::str::FromStr for SourceMedium {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "promed" => Ok(Self::Promed),
            "news_db" => Ok(Self::NewsDb),
            "official" => Ok(Self::Official),
            "other" => Ok(Self::Other),
            other => Err(format!("unknown source medium {other:?}")),
        }
    }
}

/// One surveillance bulletin or media record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawReport {
    pub source_medium: SourceMedium,
    pub outlet: String,
    pub headline: String,
    pub posted_date: NaiveDate,
    pub url: Option<String>,
    pub keywords: BTreeSet<String>,
    pub body_fields: BTreeMap<String, String>,
}

impl RawReport {
    pub fn new(
        source_medium: SourceMedium,
        outlet: impl Into<String>,
        headline: impl Into<String>,
        posted_date: NaiveDate,
    ) -> Result<Self, IngestError> {
        let headline = headline.into();
        if headline.trim().is_empty() {
            return Err(IngestError::InvalidReport("headline is empty".into()));
        }
        Ok(RawReport {
            source_medium,
            outlet: outlet.into(),
            headline,
            posted_date,
            url: None,
            keywords: BTreeSet::new(),
            body_fields: BTreeMap::new(),
        })
    }

    pub fn with_field(mut self, name: &str, value: impl Into<String>) -> Self {
        self.body_fields.insert(name.to_string(), value.into());
        self
    }

    pub fn with_keyword(mut self, keyword: impl Into<String>) -> Self {
        self.keywords.insert(keyword.into());
        self
    }

    pub fn is_period_summary(&self) -> bool {
        self.keywords.contains(PERIOD_SUMMARY_KEYWORD)
    }

    fn field(&self, field: SearchField) -> Option<&str> {
        match field {
            SearchField::Headline => Some(&self.headline),
            SearchField::Post => self.body_fields.get("post").map(String::as_str),
            SearchField::Subject => self.body_fields.get("subject").map(String::as_str),
        }
    }
}

/// Inclusive date range plus the keyword searched within it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QueryWindow {
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub keyword: String,
}

impl QueryWindow {
    pub fn new(
        start_date: NaiveDate,
        end_date: NaiveDate,
        keyword: impl Into<String>,
    ) -> Result<Self, IngestError> {
        if start_date > end_date {
            return Err(IngestError::InvalidWindow {
                start: start_date,
                end: end_date,
            });
        }
        Ok(QueryWindow {
            start_date,
            end_date,
            keyword: keyword.into(),
        })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start_date <= date && date <= self.end_date
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchField {
    Post,
    Subject,
    Headline,
}

impl std::str::FromStr for SearchField {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "post" => Ok(Self::Post),
            "subject" => Ok(Self::Subject),
            "headline" => Ok(Self::Headline),
            other => Err(format!("unknown search field {other:?}")),
        }
    }
}

/// Keeps reports posted inside `window` whose selected fields mention the
/// window keyword (case-insensitive substring). Input order is preserved.
pub fn filter_reports(
    reports: &[RawReport],
    window: &QueryWindow,
    fields: &[SearchField],
) -> Result<Vec<RawReport>, IngestError> {
    if fields.is_empty() {
        return Err(IngestError::EmptyFieldSet);
    }
    let needle = window.keyword.to_lowercase();
    Ok(reports
        .iter()
        .filter(|r| window.contains(r.posted_date))
        .filter(|r| {
            fields
                .iter()
                .filter_map(|f| r.field(*f))
                .any(|text| text.to_lowercase().contains(&needle))
        })
        .cloned()
        .collect())
}

/// Drops ProMED records that only summarize earlier posts.
pub fn drop_period_summaries(reports: &[RawReport]) -> Vec<RawReport> {
    reports
        .iter()
        .filter(|r| !r.is_period_summary())
        .cloned()
        .collect()
}

/// Lower-cases, strips punctuation and collapses whitespace.
pub fn normalize_headline(headline: &str) -> String {
    let stripped: String = headline
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect();
    stripped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Removes duplicates keyed on `(outlet, normalized headline)`. Within each key
/// the earliest-posted report survives (earliest input position on ties), and
/// survivors keep their input order.
pub fn dedupe_reports(reports: &[RawReport]) -> Vec<RawReport> {
    let mut keeper: HashMap<(String, String), usize> = HashMap::new();
    for (i, r) in reports.iter().enumerate() {
        let key = (r.outlet.trim().to_string(), normalize_headline(&r.headline));
        keeper
            .entry(key)
            .and_modify(|kept| {
                if r.posted_date < reports[*kept].posted_date {
                    *kept = i;
                }
            })
            .or_insert(i);
    }
    let mut survivors: Vec<usize> = keeper.into_values().collect();
    survivors.sort_unstable();
    survivors.into_iter().map(|i| reports[i].clone()).collect()
}

pub fn write_reports_jsonl<W: Write>(reports: &[RawReport], mut out: W) -> std::io::Result<()> {
    for r in reports {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_reports_jsonl<R: BufRead>(input: R) -> Result<Vec<RawReport>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let report: RawReport = serde_json::from_str(&line).map_err(|e| IngestError::Schema {
            row: i + 1,
            reason: e.to_string(),
        })?;
        if report.headline.trim().is_empty() {
            return Err(IngestError::Schema {
                row: i + 1,
                reason: "headline is empty".into(),
            });
        }
        out.push(report);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn report(outlet: &str, headline: &str, date: NaiveDate) -> RawReport {
        RawReport::new(SourceMedium::NewsDb, outlet, headline, date).unwrap()
    }

    fn five_reports() -> Vec<RawReport> {
        vec![
            report("CNN", "Ebola outbreak in Guinea", d(2014, 3, 25)),
            report("BBC", "Lassa fever suspected", d(2014, 3, 26)),
            report("CNN", "Guinea confirms EBOLA", d(2014, 3, 27)),
            report("VOA", "Cholera in the region", d(2014, 4, 2)),
            report("BBC", "ebola reaches Liberia", d(2014, 4, 3)),
        ]
    }

    fn brute_force_filter(reports: &[RawReport], w: &QueryWindow) -> Vec<usize> {
        let mut hits = Vec::new();
        for (i, r) in reports.iter().enumerate() {
            let in_window = r.posted_date >= w.start_date && r.posted_date <= w.end_date;
            let h = r.headline.to_ascii_lowercase();
            let k = w.keyword.to_ascii_lowercase();
            let mut found = false;
            for s in 0..h.len() {
                if h[s..].starts_with(&k) {
                    found = true;
                }
            }
            if in_window && found {
                hits.push(i);
            }
        }
        hits
    }

    #[test]
    fn empty_headline_rejected() {
        assert!(RawReport::new(SourceMedium::Other, "x", "  ", d(2014, 1, 1)).is_err());
    }

    #[test]
    fn window_order_enforced() {
        assert!(QueryWindow::new(d(2014, 5, 1), d(2014, 4, 1), "ebola").is_err());
    }

    #[test]
    fn filter_matches_brute_force() {
        let reports = five_reports();
        let w = QueryWindow::new(d(2014, 1, 1), d(2014, 12, 31), "ebola").unwrap();
        let got = filter_reports(&reports, &w, &[SearchField::Headline]).unwrap();
        let expected: Vec<RawReport> = brute_force_filter(&reports, &w)
            .into_iter()
            .map(|i| reports[i].clone())
            .collect();
        assert_eq!(got.len(), 3);
        assert_eq!(got, expected);
    }

    #[test]
    fn filter_inclusive_single_day() {
        let reports = five_reports();
        let w = QueryWindow::new(d(2014, 3, 26), d(2014, 3, 26), "").unwrap();
        let got = filter_reports(&reports, &w, &[SearchField::Headline]).unwrap();
        assert_eq!(got, vec![reports[1].clone()]);
    }

    #[test]
    fn filter_by_post_and_subject() {
        let reports = vec![
            report("ProMED", "UNDIAGNOSED FEVER - GUINEA: RFI", d(2014, 3, 19))
                .with_field("subject", "Ebola suspected"),
            report("ProMED", "LASSA - NIGERIA: UPDATE", d(2014, 3, 20)).with_field("post", "no"),
        ];
        let w = QueryWindow::new(d(2014, 3, 1), d(2014, 3, 31), "EBOLA").unwrap();
        let got =
            filter_reports(&reports, &w, &[SearchField::Post, SearchField::Subject]).unwrap();
        assert_eq!(got.len(), 1);
        assert!(filter_reports(&reports, &w, &[]).is_err());
    }

    #[test]
    fn dedupe_normalization_collapse() {
        let reports = vec![
            report("CNN", "ebola   spreads.", d(2014, 8, 2)),
            report("CNN", "Ebola spreads", d(2014, 8, 1)),
        ];
        let got = dedupe_reports(&reports);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].posted_date, d(2014, 8, 1));
    }

    #[test]
    fn dedupe_keeps_distinct_outlets() {
        let reports = vec![
            report("CNN", "Ebola spreads", d(2014, 8, 1)),
            report("BBC", "Ebola spreads", d(2014, 8, 1)),
        ];
        assert_eq!(dedupe_reports(&reports).len(), 2);
    }

    #[test]
    fn dedupe_ten_with_three_pairs() {
        let heads = [
            ("CNN", "Ebola in Guinea"),
            ("CNN", "Ebola in guinea!"),
            ("BBC", "Ebola in Guinea"),
            ("BBC", "Liberia closes border"),
            ("BBC", "liberia  closes border"),
            ("VOA", "MSF warns of spread"),
            ("VOA", "Nigeria confirms case"),
            ("VOA", "Nigeria confirms case."),
            ("Reuters", "Senegal tracks student"),
            ("Reuters", "Mali case confirmed"),
        ];
        let reports: Vec<RawReport> = heads
            .iter()
            .enumerate()
            .map(|(i, (o, h))| report(o, h, d(2014, 8, 1 + i as u32)))
            .collect();
        // brute-force pairwise key comparison
        let mut unique = 0;
        for i in 0..reports.len() {
            let dup_of_earlier = (0..i).any(|j| {
                reports[j].outlet == reports[i].outlet
                    && normalize_headline(&reports[j].headline)
                        == normalize_headline(&reports[i].headline)
            });
            if !dup_of_earlier {
                unique += 1;
            }
        }
        assert_eq!(unique, 7);
        assert_eq!(dedupe_reports(&reports).len(), 7);
    }

    #[test]
    fn jsonl_field_names() {
        let r = report("CNN", "Ebola", d(2014, 8, 1));
        let mut buf = Vec::new();
        write_reports_jsonl(&[r.clone()], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        for name in [
            "\"source_medium\"",
            "\"outlet\"",
            "\"headline\"",
            "\"posted_date\":\"2014-08-01\"",
            "\"url\"",
            "\"keywords\"",
            "\"body_fields\"",
        ] {
            assert!(text.contains(name), "{name} missing from {text}");
        }
        assert_eq!(read_reports_jsonl(&buf[..]).unwrap(), vec![r]);
    }

    fn arb_reports() -> impl Strategy<Value = Vec<RawReport>> {
        let one = (
            prop::sample::select(vec!["CNN", "BBC", "VOA"]),
            prop::sample::select(vec![
                "Ebola spreads",
                "ebola spreads!",
                "Guinea outbreak",
                "EBOLA in Lagos",
                "cholera update",
            ]),
            0u32..60,
        );
        prop::collection::vec(one, 0..25).prop_map(|v| {
            v.into_iter()
                .map(|(o, h, off)| {
                    report(o, h, d(2014, 7, 1) + chrono::Duration::days(off as i64))
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn filter_is_idempotent(reports in arb_reports(), a in 0u32..60, len in 0u32..30) {
            let start = d(2014, 7, 1) + chrono::Duration::days(a as i64);
            let end = start + chrono::Duration::days(len as i64);
            let w = QueryWindow::new(start, end, "ebola").unwrap();
            let f = [SearchField::Headline];
            let once = filter_reports(&reports, &w, &f).unwrap();
            let twice = filter_reports(&once, &w, &f).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn dedupe_shrinks_and_is_idempotent(reports in arb_reports()) {
            let once = dedupe_reports(&reports);
            prop_assert!(once.len() <= reports.len());
            let twice = dedupe_reports(&once);
            prop_assert_eq!(&once, &twice);
        }
    }
}
