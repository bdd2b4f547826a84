//! ProMED-style headlines: `<disease> - <region> [(<seq>)]: <detail>`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Qualifier {
    Rfi,
    Suspected,
    Confirmed,
    Probable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedHeadline {
    pub disease: String,
    pub region: String,
    pub sequence: Option<u32>,
    pub detail: String,
    pub qualifiers: BTreeSet<Qualifier>,
}

impl fmt::Display for ParsedHeadline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} - {}", self.disease, self.region)?;
        if let Some(seq) = self.sequence {
            write!(f, " ({seq:02})")?;
        }
        write!(f, ": {}", self.detail)
    }
}

fn malformed(reason: &str) -> IngestError {
    IngestError::MalformedHeadline {
        line: None,
        reason: reason.to_string(),
    }
}

pub fn parse_promed_headline(line: &str) -> Result<ParsedHeadline, IngestError> {
    let line = line.trim();
    if line.is_empty() {
        return Err(malformed("empty headline"));
    }
    let (disease, rest) = line
        .split_once(" - ")
        .ok_or_else(|| malformed("missing ' - ' separator"))?;
    let (head, detail) = rest
        .split_once(':')
        .ok_or_else(|| malformed("missing ':' separator"))?;

    let disease = disease.trim().to_uppercase();
    let (region, sequence) = split_sequence(head.trim())?;
    if disease.is_empty() {
        return Err(malformed("empty disease"));
    }
    if region.is_empty() {
        return Err(malformed("empty region"));
    }
    let detail = detail.trim().to_string();
    let qualifiers = scan_qualifiers(&detail);
    Ok(ParsedHeadline {
        disease,
        region: region.to_string(),
        sequence,
        detail,
        qualifiers,
    })
}

/// Splits a trailing ` (NN)` sequence number off the region. Parenthesized
/// text that is not all digits stays part of the region.
fn split_sequence(head: &str) -> Result<(&str, Option<u32>), IngestError> {
    if let Some(body) = head.strip_suffix(')') {
        if let Some(open) = body.rfind(" (") {
            let inner = &body[open + 2..];
            if !inner.is_empty() && inner.bytes().all(|b| b.is_ascii_digit()) {
                let seq: u32 = inner
                    .parse()
                    .map_err(|_| malformed("sequence number out of range"))?;
                if seq == 0 {
                    return Err(malformed("sequence number must be at least 1"));
                }
                return Ok((body[..open].trim(), Some(seq)));
            }
        }
    }
    Ok((head, None))
}

fn scan_qualifiers(detail: &str) -> BTreeSet<Qualifier> {
    let upper = detail.to_uppercase();
    let tokens: Vec<&str> = upper
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .collect();
    let mut found = BTreeSet::new();
    for (i, tok) in tokens.iter().enumerate() {
        match *tok {
            "RFI" => {
                found.insert(Qualifier::Rfi);
            }
            "REQUEST" if tokens[i + 1..].starts_with(&["FOR", "INFORMATION"]) => {
                found.insert(Qualifier::Rfi);
            }
            "SUSPECTED" => {
                found.insert(Qualifier::Suspected);
            }
            "CONFIRMED" => {
                found.insert(Qualifier::Confirmed);
            }
            "PROBABLE" => {
                found.insert(Qualifier::Probable);
            }
            _ => {}
        }
    }
    found
}

/// Parses one headline per line. Blank lines and `#` comments are skipped;
/// line numbers are 1-based physical lines.
pub fn parse_headline_corpus(text: &str) -> Vec<(usize, Result<ParsedHeadline, IngestError>)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            let parsed = parse_promed_headline(l).map_err(|e| match e {
                IngestError::MalformedHeadline { reason, .. } => IngestError::MalformedHeadline {
                    line: Some(i + 1),
                    reason,
                },
                other => other,
            });
            (i + 1, parsed)
        })
        .collect()
}
