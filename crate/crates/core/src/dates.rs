//! Calendar-date parsing for the input forms that show up in surveillance tables.

use chrono::NaiveDate;

/// Parses `YYYY-MM-DD` or day-first `D/M/YYYY`.
pub fn parse_date(text: &str) -> Option<NaiveDate> {
    let text = text.trim();
    if text.contains('/') {
        let mut parts = text.split('/');
        let day: u32 = parts.next()?.trim().parse().ok()?;
        let month: u32 = parts.next()?.trim().parse().ok()?;
        let year: i32 = parts.next()?.trim().parse().ok()?;
        if parts.next().is_some() {
            return None;
        }
        NaiveDate::from_ymd_opt(year, month, day)
    } else {
        NaiveDate::parse_from_str(text, "%Y-%m-%d").ok()
    }
}

/// Parses long-form dates such as `16 Apr 2014` or `1 July 2014`.
pub fn parse_long_date(text: &str) -> Option<NaiveDate> {
    let text = text.trim();
    NaiveDate::parse_from_str(text, "%d %b %Y")
        .or_else(|_| NaiveDate::parse_from_str(text, "%d %B %Y"))
        .ok()
        .or_else(|| parse_date(text))
}

/// Parses `START - END` spans in long form, e.g. `16 Apr 2014 - 15 Oct 2014`.
pub fn parse_long_span(text: &str) -> Option<(NaiveDate, NaiveDate)> {
    let (start, end) = text.split_once(" - ")?;
    Some((parse_long_date(start)?, parse_long_date(end)?))
}
