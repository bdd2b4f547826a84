//! Delimited-table ingestion for the three supported export shapes.

use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{IngestError, QueryWindow, RawReport, SourceMedium};
use crate::dates::{parse_date, parse_long_span};
use crate::media::MediaQueryRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableSchema {
    /// `Database, Media, Key Word, Time Period, Non Duplicate Search Result`
    MediaCounts,
    /// `Diagram, Date Posted, Case(s), Medium, Title, Link`
    CaseSources,
    /// Canonical report columns, keywords `;`-separated.
    Reports,
}

impl TableSchema {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            TableSchema::MediaCounts => &[
                "Database",
                "Media",
                "Key Word",
                "Time Period",
                "Non Duplicate Search Result",
            ],
            TableSchema::CaseSources => {
                &["Diagram", "Date Posted", "Case(s)", "Medium", "Title", "Link"]
            }
            TableSchema::Reports => &[
                "source_medium",
                "outlet",
                "headline",
                "posted_date",
                "url",
                "keywords",
                "post",
                "subject",
            ],
        }
    }
}

impl std::str::FromStr for TableSchema {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "media_counts" => Ok(Self::MediaCounts),
            "case_sources" => Ok(Self::CaseSources),
            "reports" => Ok(Self::Reports),
            other => Err(format!("unknown table schema {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ingested {
    Reports(Vec<RawReport>),
    MediaCounts(Vec<MediaQueryRecord>),
}

impl Ingested {
    pub fn len(&self) -> usize {
        match self {
            Ingested::Reports(r) => r.len(),
            Ingested::MediaCounts(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Reads a comma-separated table with a header row. The header must name
/// exactly the schema's columns (any order, case-insensitive). Row numbers in
/// errors count data rows from 1.
pub fn ingest_report_table<R: Read>(input: R, schema: TableSchema) -> Result<Ingested, IngestError> {
    let rows = read_rows(input, schema)?;
    match schema {
        TableSchema::MediaCounts => rows
            .iter()
            .enumerate()
            .map(|(i, r)| media_row(i + 1, r))
            .collect::<Result<_, _>>()
            .map(Ingested::MediaCounts),
        TableSchema::CaseSources => {
            let mut diagram = String::new();
            rows.iter()
                .enumerate()
                .map(|(i, r)| case_source_row(i + 1, r, &mut diagram))
                .collect::<Result<_, _>>()
                .map(Ingested::Reports)
        }
        TableSchema::Reports => rows
            .iter()
            .enumerate()
            .map(|(i, r)| report_row(i + 1, r))
            .collect::<Result<_, _>>()
            .map(Ingested::Reports),
    }
}

pub fn read_reports<R: Read>(input: R, schema: TableSchema) -> Result<Vec<RawReport>, IngestError> {
    match ingest_report_table(input, schema)? {
        Ingested::Reports(r) => Ok(r),
        Ingested::MediaCounts(_) => Err(IngestError::Schema {
            row: 0,
            reason: "media_counts tables do not hold reports".into(),
        }),
    }
}

pub fn read_media_counts<R: Read>(input: R) -> Result<Vec<MediaQueryRecord>, IngestError> {
    match ingest_report_table(input, TableSchema::MediaCounts)? {
        Ingested::MediaCounts(m) => Ok(m),
        Ingested::Reports(_) => unreachable!("media_counts schema yields media records"),
    }
}

/// Rows re-ordered into the schema's column order.
fn read_rows<R: Read>(input: R, schema: TableSchema) -> Result<Vec<Vec<String>>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = reader.records();
    let expected = schema.columns();

    let header = match records.next() {
        None => return Ok(Vec::new()),
        Some(h) => h.map_err(|e| csv_error(0, e))?,
    };
    let mut order = Vec::with_capacity(expected.len());
    for name in expected {
        let pos = header
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| IngestError::Schema {
                row: 0,
                reason: format!("missing column {name:?}"),
            })?;
        order.push(pos);
    }
    if header.len() != expected.len() {
        let unknown: Vec<&str> = header
            .iter()
            .filter(|h| !expected.iter().any(|e| e.eq_ignore_ascii_case(h)))
            .collect();
        return Err(IngestError::Schema {
            row: 0,
            reason: format!("unknown columns {unknown:?}"),
        });
    }

    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_error(row, e))?;
        if rec.len() != expected.len() {
            return Err(IngestError::Schema {
                row,
                reason: format!("expected {} columns, found {}", expected.len(), rec.len()),
            });
        }
        rows.push(order.iter().map(|&p| rec[p].to_string()).collect());
    }
    Ok(rows)
}

fn csv_error(row: usize, e: csv::Error) -> IngestError {
    IngestError::Schema {
        row,
        reason: e.to_string(),
    }
}

fn date_at(row: usize, value: &str) -> Result<chrono::NaiveDate, IngestError> {
    parse_date(value).ok_or_else(|| IngestError::DateParse {
        row,
        value: value.to_string(),
    })
}

fn non_empty(s: &str) -> Option<String> {
    let s = s.trim();
    (!s.is_empty()).then(|| s.to_string())
}

fn schema_err(row: usize, reason: impl Into<String>) -> IngestError {
    IngestError::Schema {
        row,
        reason: reason.into(),
    }
}

fn media_row(row: usize, r: &[String]) -> Result<MediaQueryRecord, IngestError> {
    let (start, end) = parse_long_span(&r[3]).ok_or_else(|| IngestError::DateParse {
        row,
        value: r[3].clone(),
    })?;
    let window = QueryWindow::new(start, end, r[2].clone())?;
    let count = r[4]
        .replace(',', "")
        .parse::<u64>()
        .map_err(|_| schema_err(row, format!("bad count {:?}", r[4])))?;
    Ok(MediaQueryRecord {
        database: r[0].clone(),
        outlet: r[1].clone(),
        keyword: r[2].clone(),
        window,
        count,
    })
}

const OFFICIAL_OUTLETS: &[&str] = &["WHO", "CDC", "International SOS"];

fn case_source_row(row: usize, r: &[String], diagram: &mut String) -> Result<RawReport, IngestError> {
    if !r[0].is_empty() {
        *diagram = r[0].clone();
    }
    let posted = date_at(row, &r[1])?;
    let medium = if OFFICIAL_OUTLETS.iter().any(|o| o.eq_ignore_ascii_case(&r[3])) {
        SourceMedium::Official
    } else {
        SourceMedium::NewsDb
    };
    let mut report =
        RawReport::new(medium, r[3].clone(), r[4].clone(), posted).map_err(|e| schema_err(row, e.to_string()))?;
    report.url = non_empty(&r[5]);
    if !diagram.is_empty() {
        report.body_fields.insert("diagram".into(), diagram.clone());
    }
    if let Some(cases) = non_empty(&r[2]) {
        report.body_fields.insert("cases".into(), cases);
    }
    Ok(report)
}

fn report_row(row: usize, r: &[String]) -> Result<RawReport, IngestError> {
    let medium: SourceMedium = r[0].parse().map_err(|e: String| schema_err(row, e))?;
    let posted = date_at(row, &r[3])?;
    let mut report =
        RawReport::new(medium, r[1].clone(), r[2].clone(), posted).map_err(|e| schema_err(row, e.to_string()))?;
    report.url = non_empty(&r[4]);
    report.keywords = r[5]
        .split(';')
        .filter_map(non_empty)
        .collect();
    if let Some(post) = non_empty(&r[6]) {
        report.body_fields.insert("post".into(), post);
    }
    if let Some(subject) = non_empty(&r[7]) {
        report.body_fields.insert("subject".into(), subject);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    #[test]
    fn table2_first_row() {
        let csv = "Diagram,Date Posted,Case(s),Medium,Title,Link\n\
                   West Africa,5/4/2014,\"1,2\",Daily Observer (Liberia),Ebola claims another victim,http://www.liberianobserver.com/health/ebola-claims-another-victim\n\
                   ,23/9/2014,3-5,WHO,\"Global Alert and Response (GAR). Sierra Leone: a traditional healer and a funeral\",http://www.who.int/x\n";
        let reports = read_reports(csv.as_bytes(), TableSchema::CaseSources).unwrap();
        assert_eq!(reports.len(), 2);
        let first = &reports[0];
        assert_eq!(first.outlet, "Daily Observer (Liberia)");
        assert_eq!(first.posted_date, NaiveDate::from_ymd_opt(2014, 4, 5).unwrap());
        assert_eq!(first.headline, "Ebola claims another victim");
        assert_eq!(first.body_fields["cases"], "1,2");
        assert_eq!(reports[1].source_medium, SourceMedium::Official);
        assert_eq!(reports[1].body_fields["diagram"], "West Africa");
    }

    #[test]
    fn empty_input() {
        assert!(ingest_report_table("".as_bytes(), TableSchema::Reports).unwrap().is_empty());
        let header_only = "source_medium,outlet,headline,posted_date,url,keywords,post,subject\n";
        assert!(ingest_report_table(header_only.as_bytes(), TableSchema::Reports)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn malformed_date_names_row() {
        let csv = "source_medium,outlet,headline,posted_date,url,keywords,post,subject\n\
                   promed,ProMED,EBOLA - GUINEA: RFI,2014-03-19,,,,\n\
                   promed,ProMED,EBOLA - GUINEA (02): CONFIRMED,2014-03-32,,,,\n\
                   promed,ProMED,EBOLA - LIBERIA: SUSPECTED,30/3/2014,,,,\n";
        assert_eq!(
            ingest_report_table(csv.as_bytes(), TableSchema::Reports),
            Err(IngestError::DateParse {
                row: 2,
                value: "2014-03-32".into()
            })
        );
    }

    #[test]
    fn wrong_column_count() {
        let csv = "source_medium,outlet,headline,posted_date,url,keywords,post,subject\n\
                   promed,ProMED,EBOLA - GUINEA: RFI,2014-03-19\n";
        assert!(matches!(
            ingest_report_table(csv.as_bytes(), TableSchema::Reports),
            Err(IngestError::Schema { row: 1, .. })
        ));
    }

    #[test]
    fn unknown_column_rejected() {
        let csv = "source_medium,outlet,headline,posted_date,url,keywords,post,subject,extra\n";
        assert!(matches!(
            ingest_report_table(csv.as_bytes(), TableSchema::Reports),
            Err(IngestError::Schema { row: 0, .. })
        ));
        let csv = "source_medium,outlet,headline,posted_date,url,keywords,post,topic\n";
        assert!(matches!(
            ingest_report_table(csv.as_bytes(), TableSchema::Reports),
            Err(IngestError::Schema { row: 0, .. })
        ));
    }

    #[test]
    fn header_order_free() {
        let csv = "outlet,source_medium,headline,posted_date,url,keywords,subject,post\n\
                   ProMED,promed,EBOLA - GUINEA: RFI,2014-03-19,,ebola;period_summary,subj,body\n";
        let r = read_reports(csv.as_bytes(), TableSchema::Reports).unwrap();
        assert_eq!(r[0].outlet, "ProMED");
        assert_eq!(r[0].body_fields["post"], "body");
        assert_eq!(r[0].body_fields["subject"], "subj");
        assert!(r[0].is_period_summary());
    }

    #[test]
    fn media_counts_rows() {
        let csv = "Database,Media,Key Word,Time Period,Non Duplicate Search Result\n\
                   Factiva,CNN-All Sources,Ebola,1 July 2014 - 31 July 2014,123\n";
        let m = read_media_counts(csv.as_bytes()).unwrap();
        assert_eq!(m[0].count, 123);
        assert_eq!(m[0].window.start_date, NaiveDate::from_ymd_opt(2014, 7, 1).unwrap());
        assert_eq!(m[0].window.keyword, "Ebola");
        let bad = "Database,Media,Key Word,Time Period,Non Duplicate Search Result\n\
                   Factiva,CNN-All Sources,Ebola,July 2014,123\n";
        assert!(matches!(
            read_media_counts(bad.as_bytes()),
            Err(IngestError::DateParse { row: 1, .. })
        ));
    }
}
