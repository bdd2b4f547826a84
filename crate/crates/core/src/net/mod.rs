//! Directed transmission network: infection edges between cases plus travel
//! events, each of which relocates a single person.

mod export;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::registry::{CaseId, Outcome, Role};

pub use export::{export_graph, ExportFormat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("UnknownNode: {0}")]
    UnknownNode(CaseId),
    #[error("DuplicateNode: {0}")]
    DuplicateNode(CaseId),
    #[error("SelfLoop: {0} cannot infect itself")]
    SelfLoop(CaseId),
    #[error("TemporalViolation: {0}")]
    TemporalViolation(String),
    #[error("DegenerateTravel: {person} travels from {location} to itself")]
    DegenerateTravel { person: CaseId, location: Location },
    #[error("CycleDetected: ancestry of {0} loops")]
    CycleDetected(CaseId),
    #[error("graph json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Location {
    pub country: String,
    #[serde(default)]
    pub city: Option<String>,
}

impl Location {
    pub fn new(country: impl Into<String>, city: Option<&str>) -> Self {
        Location {
            country: country.into(),
            city: city.map(str::to_string),
        }
    }

    pub fn country(country: impl Into<String>) -> Self {
        Location {
            country: country.into(),
            city: None,
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.city {
            Some(city) => write!(f, "{city}, {}", self.country),
            None => f.write_str(&self.country),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub case_id: CaseId,
    pub location: Location,
    #[serde(default)]
    pub role: Role,
    #[serde(default)]
    pub outcome: Outcome,
}

impl GraphNode {
    pub fn new(case_id: impl Into<CaseId>, location: Location) -> Self {
        GraphNode {
            case_id: case_id.into(),
            location,
            role: Role::Unknown,
            outcome: Outcome::Unknown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfectionContext {
    Family,
    Funeral,
    Hospital,
    TraditionalHealer,
    TravelContact,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfectionEdge {
    pub infector: CaseId,
    pub infectee: CaseId,
    pub context: InfectionContext,
    #[serde(default)]
    pub date: Option<NaiveDate>,
    #[serde(default)]
    pub evidence: String,
}

impl InfectionEdge {
    pub fn new(infector: impl Into<CaseId>, infectee: impl Into<CaseId>, context: InfectionContext) -> Self {
        InfectionEdge {
            infector: infector.into(),
            infectee: infectee.into(),
            context,
            date: None,
            evidence: String::new(),
        }
    }

    pub fn on(mut self, date: NaiveDate) -> Self {
        self.date = Some(date);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TravelReason {
    Unknown,
    TreatmentSeeking,
    FamilyVisit,
    OrphanAdoption,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TravelEvent {
    pub person: CaseId,
    pub origin: Location,
    pub destination: Location,
    #[serde(default)]
    pub date: Option<NaiveDate>,
    pub reason: TravelReason,
    #[serde(default)]
    pub quarantined_on_arrival: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossBorderEntry {
    pub person: CaseId,
    pub origin_country: String,
    pub destination_country: String,
    pub date: Option<NaiveDate>,
    pub reason: TravelReason,
    pub downstream_size: usize,
}

/// Serialized graph layout: three arrays, field names as on the types.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub nodes: Vec<GraphNode>,
    pub infection_edges: Vec<InfectionEdge>,
    pub travel_events: Vec<TravelEvent>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransmissionGraph {
    nodes: BTreeMap<CaseId, GraphNode>,
    infection_edges: Vec<InfectionEdge>,
    travel_events: Vec<TravelEvent>,
}

impl TransmissionGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &GraphNode> {
        self.nodes.values()
    }

    pub fn node(&self, id: &CaseId) -> Option<&GraphNode> {
        self.nodes.get(id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, id: &CaseId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn infection_edges(&self) -> &[InfectionEdge] {
        &self.infection_edges
    }

    pub fn travel_events(&self) -> &[TravelEvent] {
        &self.travel_events
    }

    pub fn add_node(&mut self, node: GraphNode) -> Result<(), GraphError> {
        if self.nodes.contains_key(&node.case_id) {
            return Err(GraphError::DuplicateNode(node.case_id));
        }
        self.nodes.insert(node.case_id.clone(), node);
        Ok(())
    }

    fn require(&self, id: &CaseId) -> Result<(), GraphError> {
        if self.nodes.contains_key(id) {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(id.clone()))
        }
    }

    fn incoming<'a>(&'a self, id: &'a CaseId) -> impl Iterator<Item = &'a InfectionEdge> + 'a {
        self.infection_edges.iter().filter(move |e| e.infectee == *id)
    }

    fn outgoing<'a>(&'a self, id: &'a CaseId) -> impl Iterator<Item = &'a InfectionEdge> + 'a {
        self.infection_edges.iter().filter(move |e| e.infector == *id)
    }

    /// Earliest dated incoming edge, if any.
    pub fn infection_date(&self, id: &CaseId) -> Option<NaiveDate> {
        self.incoming(id).filter_map(|e| e.date).min()
    }

    pub fn in_degree(&self, id: &CaseId) -> usize {
        self.incoming(id).count()
    }

    pub fn out_degree(&self, id: &CaseId) -> usize {
        self.outgoing(id).count()
    }

    /// Appends an infection edge. An edge may not predate its infector's own
    /// infection, and may not make the infectee's infection postdate edges it
    /// already has going out.
    pub fn add_infection(&mut self, edge: InfectionEdge) -> Result<(), GraphError> {
        self.require(&edge.infector)?;
        self.require(&edge.infectee)?;
        if edge.infector == edge.infectee {
            return Err(GraphError::SelfLoop(edge.infector));
        }
        if let Some(date) = edge.date {
            if let Some(infected) = self.infection_date(&edge.infector) {
                if date < infected {
                    return Err(GraphError::TemporalViolation(format!(
                        "{} -> {} on {date} precedes {}'s infection on {infected}",
                        edge.infector, edge.infectee, edge.infector
                    )));
                }
            }
            let new_infection = self
                .infection_date(&edge.infectee)
                .map_or(date, |d| d.min(date));
            if let Some(early) = self
                .outgoing(&edge.infectee)
                .filter_map(|e| e.date)
                .find(|d| *d < new_infection)
            {
                return Err(GraphError::TemporalViolation(format!(
                    "{} already infects others on {early}, before {} -> {} on {date}",
                    edge.infectee, edge.infector, edge.infectee
                )));
            }
        }
        self.infection_edges.push(edge);
        Ok(())
    }

    /// Records a relocation; the person's current location becomes the
    /// destination.
    pub fn add_travel(&mut self, ev: TravelEvent) -> Result<(), GraphError> {
        self.require(&ev.person)?;
        if ev.origin == ev.destination {
            return Err(GraphError::DegenerateTravel {
                person: ev.person,
                location: ev.origin,
            });
        }
        let node = self.nodes.get_mut(&ev.person).expect("checked above");
        node.location = ev.destination.clone();
        self.travel_events.push(ev);
        Ok(())
    }

    /// Nodes with no incoming infection edge.
    pub fn index_cases(&self) -> BTreeSet<CaseId> {
        let infected: HashSet<&CaseId> = self.infection_edges.iter().map(|e| &e.infectee).collect();
        self.nodes
            .keys()
            .filter(|id| !infected.contains(id))
            .cloned()
            .collect()
    }

    /// Weakly connected components over infection edges, each sorted, ordered
    /// by smallest member.
    pub fn clusters(&self) -> Vec<Vec<CaseId>> {
        let ids: Vec<&CaseId> = self.nodes.keys().collect();
        let pos: HashMap<&CaseId, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.infection_edges {
            let (a, b) = (find(&mut parent, pos[&e.infector]), find(&mut parent, pos[&e.infectee]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: BTreeMap<usize, Vec<CaseId>> = BTreeMap::new();
        for i in 0..ids.len() {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(ids[i].clone());
        }
        // ids are sorted, so the smallest root index is the smallest member
        let mut out: Vec<Vec<CaseId>> = groups.into_values().collect();
        out.sort_by(|a, b| a[0].cmp(&b[0]));
        out
    }

    /// The infector followed when tracing back from `id`: earliest-dated edge,
    /// undated edges last, ties by infector id.
    fn primary_infector<'a>(&'a self, id: &'a CaseId) -> Option<&'a InfectionEdge> {
        self.incoming(id)
            .min_by(|a, b| {
                (a.date.is_none(), a.date, &a.infector).cmp(&(b.date.is_none(), b.date, &b.infector))
            })
    }

    /// Path from an index case down to `id`.
    pub fn transmission_chain(&self, id: &CaseId) -> Result<Vec<CaseId>, GraphError> {
        self.require(id)?;
        let mut path = vec![id.clone()];
        let mut seen: HashSet<CaseId> = HashSet::from([id.clone()]);
        let mut cursor = id.clone();
        while let Some(edge) = self.primary_infector(&cursor) {
            let next = edge.infector.clone();
            if !seen.insert(next.clone()) {
                return Err(GraphError::CycleDetected(id.clone()));
            }
            path.push(next.clone());
            cursor = next;
        }
        path.reverse();
        Ok(path)
    }

    /// Cases reachable from `start` over edges not dated before `after`.
    fn downstream(&self, start: &CaseId, after: Option<NaiveDate>) -> usize {
        let mut seen: HashSet<&CaseId> = HashSet::from([start]);
        let mut queue: VecDeque<&CaseId> = VecDeque::from([start]);
        while let Some(cur) = queue.pop_front() {
            for e in self.outgoing(cur) {
                let in_time = match (after, e.date) {
                    (Some(t), Some(d)) => d >= t,
                    _ => true,
                };
                if in_time && seen.insert(&e.infectee) {
                    queue.push_back(&e.infectee);
                }
            }
        }
        seen.len()
    }

    /// One entry per international travel event, with the number of cases
    /// infected downstream of the traveler after the trip (traveler included).
    pub fn cross_border_chains(&self) -> Vec<CrossBorderEntry> {
        self.travel_events
            .iter()
            .filter(|t| t.origin.country != t.destination.country)
            .map(|t| CrossBorderEntry {
                person: t.person.clone(),
                origin_country: t.origin.country.clone(),
                destination_country: t.destination.country.clone(),
                date: t.date,
                reason: t.reason,
                downstream_size: self.downstream(&t.person, t.date),
            })
            .collect()
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            nodes: self.nodes.values().cloned().collect(),
            infection_edges: self.infection_edges.clone(),
            travel_events: self.travel_events.clone(),
        }
    }

    /// Rebuilds a graph, re-validating every edge and travel event in order.
    pub fn from_document(doc: GraphDocument) -> Result<Self, GraphError> {
        let mut g = TransmissionGraph::new();
        for n in doc.nodes {
            g.add_node(n)?;
        }
        for e in doc.infection_edges {
            g.add_infection(e)?;
        }
        for t in doc.travel_events {
            g.add_travel(t)?;
        }
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDocument = serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("graph serializes")
    }
}
