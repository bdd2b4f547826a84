//! Media-attention time series: bucketing report counts, precomputed query
//! counts, alignment and Pearson correlation.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{dedupe_reports, QueryWindow, RawReport};

#[derive(Debug, Error, PartialEq)]
pub enum MediaError {
    #[error("NotFound: no count for outlet {outlet:?} over {start}..{end}")]
    NotFound {
        outlet: String,
        start: NaiveDate,
        end: NaiveDate,
    },
    #[error("MisalignedSeries: {0}")]
    MisalignedSeries(String),
    #[error("DegenerateVariance: series {0:?} is constant")]
    DegenerateVariance(String),
    #[error("EmptyIntersection: series share no periods")]
    EmptyIntersection,
    #[error("InvalidSeries: {0}")]
    InvalidSeries(String),
    #[error("io error: {0}")]
    Io(String),
}

/// One row of a news-database query export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaQueryRecord {
    pub database: String,
    pub outlet: String,
    pub keyword: String,
    pub window: QueryWindow,
    pub count: u64,
}

impl MediaQueryRecord {
    /// Exact outlet match, or a match on the base name before a `-` source
    /// qualifier (`CNN` matches `CNN-All Sources`).
    pub fn outlet_matches(&self, outlet: &str) -> bool {
        let outlet = outlet.trim();
        self.outlet.eq_ignore_ascii_case(outlet)
            || self
                .outlet
                .split_once('-')
                .is_some_and(|(base, _)| base.trim().eq_ignore_ascii_case(outlet))
    }

    fn same_period(&self, start: NaiveDate, end: NaiveDate) -> bool {
        self.window.start_date == start && self.window.end_date == end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Weekly,
    Monthly,
}

impl std::str::FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "weekly" => Ok(Self::Weekly),
            "monthly" => Ok(Self::Monthly),
            other => Err(format!("unknown granularity {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub label: String,
    pub granularity: Granularity,
    pub points: Vec<(NaiveDate, f64)>,
}

impl TimeSeries {
    /// Points must be strictly increasing by period start.
    pub fn new(
        label: impl Into<String>,
        granularity: Granularity,
        points: Vec<(NaiveDate, f64)>,
    ) -> Result<Self, MediaError> {
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(MediaError::InvalidSeries(
                "periods must be distinct and sorted".into(),
            ));
        }
        Ok(TimeSeries {
            label: label.into(),
            granularity,
            points,
        })
    }

    pub fn periods(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    pub fn total(&self) -> f64 {
        self.values().sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), MediaError> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| MediaError::Io(e.to_string());
        w.write_record(["period_start", "value"]).map_err(io)?;
        for (period, value) in &self.points {
            w.write_record([period.to_string(), value.to_string()])
                .map_err(io)?;
        }
        w.flush().map_err(|e| MediaError::Io(e.to_string()))
    }

    pub fn read_csv<R: Read>(
        input: R,
        label: impl Into<String>,
        granularity: Granularity,
    ) -> Result<Self, MediaError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut points = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| MediaError::Io(e.to_string()))?;
            let bad = || MediaError::InvalidSeries(format!("row {}: expected period_start,value", i + 1));
            if rec.len() != 2 {
                return Err(bad());
            }
            let period = crate::dates::parse_date(&rec[0]).ok_or_else(bad)?;
            let value: f64 = rec[1].parse().map_err(|_| bad())?;
            points.push((period, value));
        }
        TimeSeries::new(label, granularity, points)
    }
}

/// Period starts covering `window`: calendar months clipped to the window, or
/// 7-day spans anchored at the window start.
pub fn period_starts(window: &QueryWindow, granularity: Granularity) -> Vec<NaiveDate> {
    let mut out = Vec::new();
    let mut cursor = window.start_date;
    while cursor <= window.end_date {
        out.push(cursor);
        cursor = match granularity {
            Granularity::Weekly => cursor + Duration::days(7),
            Granularity::Monthly => next_month_start(cursor),
        };
    }
    out
}

fn next_month_start(date: NaiveDate) -> NaiveDate {
    let (y, m) = if date.month() == 12 {
        (date.year() + 1, 1)
    } else {
        (date.year(), date.month() + 1)
    };
    NaiveDate::from_ymd_opt(y, m, 1).expect("first of month is valid")
}

/// Counts in-window reports per period after window-scoped deduplication.
/// Every period in the window is present, zero-filled.
pub fn bucket_counts(
    reports: &[RawReport],
    granularity: Granularity,
    window: &QueryWindow,
) -> TimeSeries {
    let in_window: Vec<RawReport> = reports
        .iter()
        .filter(|r| window.contains(r.posted_date))
        .cloned()
        .collect();
    let unique = dedupe_reports(&in_window);

    let starts = period_starts(window, granularity);
    let mut counts = vec![0u64; starts.len()];
    for r in &unique {
        // last period starting on or before the report date
        let idx = starts.partition_point(|s| *s <= r.posted_date) - 1;
        counts[idx] += 1;
    }
    TimeSeries {
        label: window.keyword.clone(),
        granularity,
        points: starts
            .into_iter()
            .zip(counts)
            .map(|(s, c)| (s, c as f64))
            .collect(),
    }
}

pub fn lookup_count(
    records: &[MediaQueryRecord],
    outlet: &str,
    start: NaiveDate,
    end: NaiveDate,
) -> Result<u64, MediaError> {
    records
        .iter()
        .find(|r| r.outlet_matches(outlet) && r.same_period(start, end))
        .map(|r| r.count)
        .ok_or_else(|| MediaError::NotFound {
            outlet: outlet.to_string(),
            start,
            end,
        })
}

/// Full-window count next to the sum of its sub-period rows. The two are
/// reported side by side and never reconciled: deduplication is scoped to
/// each query window, so they legitimately differ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowTotals {
    pub outlet: String,
    pub full_window_count: u64,
    pub sub_period_sum: u64,
    pub sub_periods: usize,
}

impl WindowTotals {
    pub fn discrepancy(&self) -> i64 {
        self.sub_period_sum as i64 - self.full_window_count as i64
    }
}

fn sub_period_records<'a>(
    records: &'a [MediaQueryRecord],
    outlet: &'a str,
    start: NaiveDate,
    end: NaiveDate,
) -> impl Iterator<Item = &'a MediaQueryRecord> + 'a {
    records.iter().filter(move |r| {
        r.outlet_matches(outlet)
            && !r.same_period(start, end)
            && start <= r.window.start_date
            && r.window.end_date <= end
    })
}

pub fn window_totals(
    records: &[MediaQueryRecord],
    outlet: &str,
    start: NaiveDate,
    end: NaiveDate,
) -> Result<WindowTotals, MediaError> {
    let full_window_count = lookup_count(records, outlet, start, end)?;
    let (sum, n) = sub_period_records(records, outlet, start, end)
        .fold((0u64, 0usize), |(s, n), r| (s + r.count, n + 1));
    Ok(WindowTotals {
        outlet: outlet.to_string(),
        full_window_count,
        sub_period_sum: sum,
        sub_periods: n,
    })
}

/// Sub-period rows inside `[start, end]` as a monthly series keyed by each
/// row's window start.
pub fn series_from_records(
    records: &[MediaQueryRecord],
    outlet: &str,
    start: NaiveDate,
    end: NaiveDate,
) -> Result<TimeSeries, MediaError> {
    let points: BTreeMap<NaiveDate, f64> = sub_period_records(records, outlet, start, end)
        .map(|r| (r.window.start_date, r.count as f64))
        .collect();
    TimeSeries::new(outlet, Granularity::Monthly, points.into_iter().collect())
}

/// Restricts both series to their shared periods, preserving order.
pub fn align(a: &TimeSeries, b: &TimeSeries) -> Result<(TimeSeries, TimeSeries), MediaError> {
    if a.granularity != b.granularity {
        return Err(MediaError::MisalignedSeries(format!(
            "granularity {:?} vs {:?}",
            a.granularity, b.granularity
        )));
    }
    let in_b: std::collections::BTreeSet<NaiveDate> = b.periods().collect();
    let in_a: std::collections::BTreeSet<NaiveDate> = a.periods().collect();
    let keep = |s: &TimeSeries, other: &std::collections::BTreeSet<NaiveDate>| TimeSeries {
        label: s.label.clone(),
        granularity: s.granularity,
        points: s
            .points
            .iter()
            .filter(|p| other.contains(&p.0))
            .copied()
            .collect(),
    };
    let (ra, rb) = (keep(a, &in_b), keep(b, &in_a));
    if ra.points.is_empty() {
        return Err(MediaError::EmptyIntersection);
    }
    Ok((ra, rb))
}

/// Pearson product-moment correlation of two series over identical periods.
pub fn pearson(a: &TimeSeries, b: &TimeSeries) -> Result<f64, MediaError> {
    if a.granularity != b.granularity || a.points.len() != b.points.len() || !a.periods().eq(b.periods()) {
        return Err(MediaError::MisalignedSeries(
            "series must cover identical periods".into(),
        ));
    }
    let n = a.points.len();
    if n < 2 {
        return Err(MediaError::MisalignedSeries(
            "at least two periods are required".into(),
        ));
    }
    let mean = |s: &TimeSeries| s.total() / n as f64;
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.values().zip(b.values()) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 {
        return Err(MediaError::DegenerateVariance(a.label.clone()));
    }
    if sbb == 0.0 {
        return Err(MediaError::DegenerateVariance(b.label.clone()));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::SourceMedium;
    use proptest::prelude::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn series(values: &[f64]) -> TimeSeries {
        let points = values
            .iter()
            .enumerate()
            .map(|(i, v)| (d(2014, 1, 1) + Duration::days(7 * i as i64), *v))
            .collect();
        TimeSeries::new("s", Granularity::Weekly, points).unwrap()
    }

    #[test]
    fn empty_reports_give_zero_series() {
        let w = QueryWindow::new(d(2014, 4, 16), d(2014, 6, 3), "ebola").unwrap();
        let s = bucket_counts(&[], Granularity::Monthly, &w);
        assert_eq!(
            s.points,
            vec![(d(2014, 4, 16), 0.0), (d(2014, 5, 1), 0.0), (d(2014, 6, 1), 0.0)]
        );
        let weeks = bucket_counts(&[], Granularity::Weekly, &w);
        assert_eq!(weeks.points.len(), 7);
        assert!(weeks.values().all(|v| v == 0.0));
    }

    #[test]
    fn two_month_hand_count() {
        let days = [d(2014, 7, 3), d(2014, 7, 9), d(2014, 7, 20), d(2014, 7, 31), d(2014, 8, 1), d(2014, 8, 30)];
        let reports: Vec<RawReport> = days
            .iter()
            .enumerate()
            .map(|(i, day)| RawReport::new(SourceMedium::NewsDb, "CNN", format!("story {i}"), *day).unwrap())
            .collect();
        let w = QueryWindow::new(d(2014, 7, 1), d(2014, 8, 31), "ebola").unwrap();
        let s = bucket_counts(&reports, Granularity::Monthly, &w);
        assert_eq!(s.values().collect::<Vec<_>>(), vec![4.0, 2.0]);
    }

    #[test]
    fn clipped_window_excludes_outside_reports() {
        let reports = vec![
            RawReport::new(SourceMedium::NewsDb, "CNN", "a", d(2014, 4, 10)).unwrap(),
            RawReport::new(SourceMedium::NewsDb, "CNN", "b", d(2014, 4, 20)).unwrap(),
        ];
        let w = QueryWindow::new(d(2014, 4, 16), d(2014, 4, 30), "ebola").unwrap();
        assert_eq!(bucket_counts(&reports, Granularity::Monthly, &w).total(), 1.0);
    }

    #[test]
    fn pearson_known_value() {
        // 11 / sqrt(5 * 26), from centered sums of squares
        let r = pearson(&series(&[1.0, 2.0, 3.0, 4.0]), &series(&[2.0, 4.0, 5.0, 9.0])).unwrap();
        assert!((r - 0.9647638212377322).abs() < 1e-9);
    }

    #[test]
    fn pearson_extremes_and_errors() {
        let a = series(&[1.0, 5.0, 2.0, 8.0]);
        let neg = series(&[-1.0, -5.0, -2.0, -8.0]);
        assert!((pearson(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&a, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(pearson(&a, &series(&[3.0; 4])), Err(MediaError::DegenerateVariance(_))));
        assert!(matches!(pearson(&a, &series(&[1.0, 2.0, 3.0])), Err(MediaError::MisalignedSeries(_))));
        assert!(matches!(pearson(&series(&[1.0]), &series(&[1.0])), Err(MediaError::MisalignedSeries(_))));
    }

    #[test]
    fn align_cases() {
        let a = series(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let (x, y) = align(&a, &a).unwrap();
        assert_eq!((x, y), (a.clone(), a.clone()));

        let shifted = TimeSeries::new(
            "b",
            Granularity::Weekly,
            (2..6).map(|i| (d(2014, 1, 1) + Duration::days(7 * i), i as f64)).collect(),
        )
        .unwrap();
        let (x, y) = align(&a, &shifted).unwrap();
        assert_eq!((x.points.len(), y.points.len()), (3, 3));

        let far = TimeSeries::new("c", Granularity::Weekly, vec![(d(2020, 1, 1), 1.0)]).unwrap();
        assert_eq!(align(&a, &far), Err(MediaError::EmptyIntersection));
    }

    #[test]
    fn unsorted_series_rejected() {
        assert!(TimeSeries::new("x", Granularity::Weekly, vec![(d(2014, 2, 1), 1.0), (d(2014, 1, 1), 1.0)]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let a = series(&[1.0, 2.5, 3.0]);
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("period_start,value\n2014-01-01,1\n"));
        let back = TimeSeries::read_csv(&buf[..], "s", Granularity::Weekly).unwrap();
        assert_eq!(back, a);
    }

    proptest! {
        #[test]
        fn pearson_symmetric_and_affine_invariant(
            xs in prop::collection::vec(-100.0f64..100.0, 3..20),
            ys_seed in prop::collection::vec(-100.0f64..100.0, 20),
            scale in 0.1f64..10.0,
            shift in -50.0f64..50.0,
        ) {
            let ys: Vec<f64> = ys_seed[..xs.len()].to_vec();
            let a = series(&xs);
            let b = series(&ys);
            if let (Ok(r1), Ok(r2)) = (pearson(&a, &b), pearson(&b, &a)) {
                prop_assert!((r1 - r2).abs() < 1e-9);
                let t = series(&xs.iter().map(|x| scale * x + shift).collect::<Vec<_>>());
                let r3 = pearson(&t, &b).unwrap();
                prop_assert!((r1 - r3).abs() < 1e-9);
                prop_assert!((-1.0..=1.0).contains(&r1));
            }
        }

        #[test]
        fn align_idempotent(offset in 0i64..6, n in 1usize..8, m in 1usize..8) {
            let a = series(&vec![1.0; n]);
            let b = TimeSeries::new(
                "b",
                Granularity::Weekly,
                (0..m as i64).map(|i| (d(2014, 1, 1) + Duration::days(7 * (i + offset)), 2.0)).collect(),
            ).unwrap();
            if let Ok((x, y)) = align(&a, &b) {
                let (x2, y2) = align(&x, &y).unwrap();
                prop_assert_eq!(x, x2);
                prop_assert_eq!(y, y2);
            }
        }

        #[test]
        fn bucket_sum_equals_unique_in_window(
            offsets in prop::collection::vec((0i64..120, 0usize..4), 0..40),
            len in 0i64..100,
        ) {
            let heads = ["Ebola spreads", "ebola spreads.", "Guinea update", "Lagos case"];
            let reports: Vec<RawReport> = offsets
                .iter()
                .map(|(o, h)| RawReport::new(SourceMedium::NewsDb, "CNN", heads[*h], d(2014, 4, 1) + Duration::days(*o)).unwrap())
                .collect();
            let w = QueryWindow::new(d(2014, 5, 1), d(2014, 5, 1) + Duration::days(len), "ebola").unwrap();
            let in_window: Vec<RawReport> = reports.iter().filter(|r| w.contains(r.posted_date)).cloned().collect();
            let expected = dedupe_reports(&in_window).len() as f64;
            for g in [Granularity::Weekly, Granularity::Monthly] {
                prop_assert_eq!(bucket_counts(&reports, g, &w).total(), expected);
            }
        }
    }
}
