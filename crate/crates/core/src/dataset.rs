//! Line-oriented outbreak datasets. Each JSON line is tagged by `record`:
//!
//! ```text
//! {"record":"case","case_id":"NG-01","city":"Lagos", ...CaseObservation fields}
//! {"record":"infection","infector":"NG-01","infectee":"NG-02","context":"hospital"}
//! {"record":"travel","person":"NG-01","origin":{...},"destination":{...},"reason":"other"}
//! ```
//!
//! Repeated case ids add observations to the same record. The graph is built
//! from the resolved records, then infection edges, then travel, in file order.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{GraphError, GraphNode, InfectionEdge, Location, TransmissionGraph, TravelEvent};
use crate::registry::{CaseId, CaseObservation, CaseRegistry, RegistryError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset line {line}: {reason}")]
    Line { line: usize, reason: String },
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseLine {
    pub case_id: CaseId,
    #[serde(default)]
    pub city: Option<String>,
    #[serde(flatten)]
    pub observation: CaseObservation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum DatasetLine {
    Case(CaseLine),
    Infection(InfectionEdge),
    Travel(TravelEvent),
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub registry: CaseRegistry,
    pub graph: TransmissionGraph,
}

pub fn parse_dataset_lines<R: BufRead>(input: R) -> Result<Vec<DatasetLine>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with("//") {
            continue;
        }
        let parsed = serde_json::from_str(trimmed).map_err(|e| DatasetError::Line {
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(parsed);
    }
    Ok(out)
}

pub fn load_dataset<R: BufRead>(input: R) -> Result<Dataset, DatasetError> {
    build_dataset(parse_dataset_lines(input)?)
}

pub fn build_dataset(lines: Vec<DatasetLine>) -> Result<Dataset, DatasetError> {
    let mut registry = CaseRegistry::new();
    let mut cities: BTreeMap<CaseId, String> = BTreeMap::new();
    let mut edges = Vec::new();
    let mut trips = Vec::new();
    for line in lines {
        match line {
            DatasetLine::Case(c) => {
                if let Some(city) = c.city {
                    cities.insert(c.case_id.clone(), city);
                }
                if registry.get(&c.case_id).is_some() {
                    registry.observe(&c.case_id, c.observation)?;
                } else {
                    registry.insert_with_id(c.case_id, c.observation)?;
                }
            }
            DatasetLine::Infection(e) => edges.push(e),
            DatasetLine::Travel(t) => trips.push(t),
        }
    }
    let mut graph = TransmissionGraph::new();
    for r in registry.records() {
        let location = Location::new(r.fields.country.clone(), cities.get(&r.case_id).map(String::as_str));
        let mut node = GraphNode::new(r.case_id.clone(), location);
        node.role = r.fields.role;
        node.outcome = r.fields.outcome;
        graph.add_node(node)?;
    }
    for e in edges {
        graph.add_infection(e)?;
    }
    for t in trips {
        graph.add_travel(t)?;
    }
    Ok(Dataset { registry, graph })
}
