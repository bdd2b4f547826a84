#![allow(dead_code)]

use std::fs;
use std::io::BufReader;
use std::path::PathBuf;

use chrono::NaiveDate;
use outbreak_core::dataset::{load_dataset, Dataset};
use outbreak_core::registry::{
    CaseId, CaseObservation, CaseRegistry, Outcome, Role, SourceTier, Status,
};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden").join(name)
}

pub fn read_fixture(name: &str) -> String {
    fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn dataset(name: &str) -> Dataset {
    let file = fs::File::open(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    load_dataset(BufReader::new(file)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

pub fn id(s: &str) -> CaseId {
    CaseId::from(s)
}

/// Registry of `cases` distinct people, the first `deaths` dead and the first
/// `hcw` health-care workers.
pub fn synthetic_registry(cases: usize, deaths: usize, hcw: usize) -> CaseRegistry {
    let mut reg = CaseRegistry::new();
    let statuses = [Status::Suspected, Status::Probable, Status::Confirmed];
    for i in 0..cases {
        let obs = CaseObservation {
            person_name: Some(format!("person {i}")),
            village: (i % 3 == 0).then(|| format!("village {}", i % 40)),
            hospital: (i % 5 == 0).then(|| format!("hospital {}", i % 12)),
            country: ["Guinea", "Liberia", "Sierra Leone"][i % 3].to_string(),
            status: statuses[i % 3],
            outcome: if i < deaths { Outcome::Dead } else { Outcome::Alive },
            role: if i < hcw { Role::HealthcareWorker } else { Role::Community },
            report_date: date(2014, 3, 19) + chrono::Duration::days((i % 200) as i64),
            source_tier: [SourceTier::Other, SourceTier::MajorNews, SourceTier::Official][i % 3],
            source_ref: format!("report {i}"),
        };
        reg.insert_with_id(CaseId::from(format!("S-{i:05}")), obs).unwrap();
    }
    reg
}
