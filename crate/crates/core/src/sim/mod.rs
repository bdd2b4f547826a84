//! Discrete-day stochastic outbreak simulation on a contact structure.
//!
//! The generator is ChaCha8 seeded from the run's `u64` seed. Each day runs in
//! four phases, and every random draw happens in the order listed:
//!
//! 1. Scheduled trips for the day move people (cancelled by an active border
//!    closure), then quarantine orders take effect.
//! 2. Persons reaching symptom onset, in ascending person order, draw death
//!    with probability `cfr`; those who will die then draw the death delay.
//! 3. Deaths and recoveries due that day are applied.
//! 4. Each infectious, non-quarantined person in ascending order tries each
//!    susceptible contact in ascending order with one Bernoulli draw. A newly
//!    exposed person draws its incubation period immediately.
//!
//! Persons are ordered by id. A contact can only transmit while both persons
//! are in the same country.

mod ensemble;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ensemble::{derive_seed, ensemble, ensemble_sequential, Distribution, EnsembleSummary, RunCounts};
#[cfg(feature = "parallel")]
pub use ensemble::ensemble_parallel;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("UnknownSeedPerson: {0}")]
    UnknownSeedPerson(String),
    #[error("InvalidParams: {0}")]
    InvalidParams(String),
    #[error("InvalidContacts: {0}")]
    InvalidContacts(String),
}

/// Inclusive integer range in days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayRange {
    pub low: u32,
    pub high: u32,
}

impl DayRange {
    pub const fn new(low: u32, high: u32) -> Self {
        DayRange { low, high }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimParams {
    pub per_contact_transmission_prob: f64,
    pub incubation_days: DayRange,
    pub symptom_to_death_days: DayRange,
    pub cfr: f64,
    pub infectious_period_days: u32,
    pub max_days: u32,
}

pub const DEFAULT_INCUBATION: DayRange = DayRange::new(2, 21);
pub const DEFAULT_DEATH_DELAY: DayRange = DayRange::new(6, 16);
pub const DEFAULT_INFECTIOUS_PERIOD: u32 = 10;

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            per_contact_transmission_prob: 0.1,
            incubation_days: DEFAULT_INCUBATION,
            symptom_to_death_days: DEFAULT_DEATH_DELAY,
            cfr: 0.5,
            infectious_period_days: DEFAULT_INFECTIOUS_PERIOD,
            max_days: 365,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidParams(m));
        let unit = 0.0..=1.0;
        if !unit.contains(&self.per_contact_transmission_prob) {
            return bad(format!(
                "per_contact_transmission_prob {} outside [0, 1]",
                self.per_contact_transmission_prob
            ));
        }
        if !unit.contains(&self.cfr) {
            return bad(format!("cfr {} outside [0, 1]", self.cfr));
        }
        for (name, r) in [
            ("incubation_days", self.incubation_days),
            ("symptom_to_death_days", self.symptom_to_death_days),
        ] {
            if r.low > r.high {
                return bad(format!("{name} low {} exceeds high {}", r.low, r.high));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Person {
    pub id: String,
    pub country: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactEdge {
    pub a: String,
    pub b: String,
    #[serde(default)]
    pub context: Option<String>,
}

/// A trip taken on a given simulation day.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledTrip {
    pub person: String,
    pub origin: String,
    pub destination: String,
    pub day: u32,
    #[serde(default)]
    pub quarantined_on_arrival: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactStructure {
    pub persons: Vec<Person>,
    #[serde(default)]
    pub contact_edges: Vec<ContactEdge>,
    #[serde(default)]
    pub travel_schedule: Vec<ScheduledTrip>,
}

impl ContactStructure {
    /// Every person in one country, joined by the given undirected pairs.
    pub fn from_pairs(country: &str, ids: &[&str], pairs: &[(&str, &str)]) -> Self {
        ContactStructure {
            persons: ids
                .iter()
                .map(|id| Person {
                    id: id.to_string(),
                    country: country.to_string(),
                })
                .collect(),
            contact_edges: pairs
                .iter()
                .map(|(a, b)| ContactEdge {
                    a: a.to_string(),
                    b: b.to_string(),
                    context: None,
                })
                .collect(),
            travel_schedule: Vec::new(),
        }
    }

    pub fn star(hub: &str, leaves: usize) -> Self {
        let ids: Vec<String> = std::iter::once(hub.to_string())
            .chain((1..=leaves).map(|i| format!("leaf-{i:03}")))
            .collect();
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let pairs: Vec<(&str, &str)> = refs[1..].iter().map(|l| (hub, *l)).collect();
        Self::from_pairs("X", &refs, &pairs)
    }

    pub fn complete(n: usize) -> Self {
        let ids: Vec<String> = (0..n).map(|i| format!("p{i:03}")).collect();
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((refs[i], refs[j]));
            }
        }
        Self::from_pairs("X", &refs, &pairs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterventionKind {
    QuarantinePerson,
    CloseBorder,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InterventionTarget {
    Person(String),
    CountryPair([String; 2]),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intervention {
    pub kind: InterventionKind,
    pub target: InterventionTarget,
    pub effective_day: u32,
}

impl Intervention {
    pub fn quarantine(person: &str, day: u32) -> Self {
        Intervention {
            kind: InterventionKind::QuarantinePerson,
            target: InterventionTarget::Person(person.to_string()),
            effective_day: day,
        }
    }

    pub fn close_border(a: &str, b: &str, day: u32) -> Self {
        Intervention {
            kind: InterventionKind::CloseBorder,
            target: InterventionTarget::CountryPair([a.to_string(), b.to_string()]),
            effective_day: day,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disposition {
    NeverInfected,
    Recovered,
    Dead,
    Quarantined,
    /// Still incubating, infectious or awaiting death at the horizon.
    Active,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub infector: String,
    pub infectee: String,
    pub day: u32,
}

/// Every draw made for one infected person.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfectionRecord {
    pub person: String,
    pub infected_day: u32,
    pub infector: Option<String>,
    pub incubation_days: u32,
    /// Present once onset was reached and the person was drawn to die.
    pub death_delay_days: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutbreakResult {
    pub dispositions: BTreeMap<String, Disposition>,
    pub infection_tree: Vec<TreeEdge>,
    pub infections: Vec<InfectionRecord>,
    pub total_infected: u64,
    pub total_dead: u64,
    pub duration_days: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Susceptible,
    Exposed,
    Infectious,
    Removed,
}

#[derive(Debug, Clone)]
struct PersonState {
    phase: Phase,
    country: usize,
    quarantined: bool,
    onset_day: u32,
    death_day: Option<u32>,
    died: bool,
    record: Option<usize>,
}

/// Validated, indexed inputs; one instance serves any number of runs.
#[derive(Debug, Clone)]
pub struct Simulator {
    ids: Vec<String>,
    home_country: Vec<usize>,
    countries: Vec<String>,
    adjacency: Vec<Vec<usize>>,
    trips: Vec<(u32, usize, usize, usize, bool)>,
    closures: Vec<((usize, usize), u32)>,
    quarantines: Vec<(u32, usize)>,
    params: SimParams,
    seed: usize,
}

impl Simulator {
    pub fn new(
        contacts: &ContactStructure,
        params: &SimParams,
        seed_person: &str,
        interventions: &[Intervention],
    ) -> Result<Self, SimError> {
        params.validate()?;
        let mut sorted: Vec<&Person> = contacts.persons.iter().collect();
        sorted.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = sorted.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(SimError::InvalidContacts(format!("duplicate person {}", w[0].id)));
        }
        let ids: Vec<String> = sorted.iter().map(|p| p.id.clone()).collect();
        let pos: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let person = |id: &str| {
            pos.get(id)
                .copied()
                .ok_or_else(|| SimError::InvalidContacts(format!("unknown person {id}")))
        };

        let mut countries: BTreeSet<String> = sorted.iter().map(|p| p.country.clone()).collect();
        for t in &contacts.travel_schedule {
            countries.insert(t.origin.clone());
            countries.insert(t.destination.clone());
        }
        for iv in interventions {
            if let InterventionTarget::CountryPair(pair) = &iv.target {
                countries.extend(pair.iter().cloned());
            }
        }
        let countries: Vec<String> = countries.into_iter().collect();
        let country = |c: &str| countries.binary_search_by(|x| x.as_str().cmp(c)).expect("collected above");

        let home_country = sorted.iter().map(|p| country(&p.country)).collect();
        let mut adjacency = vec![BTreeSet::new(); ids.len()];
        for e in &contacts.contact_edges {
            let (a, b) = (person(&e.a)?, person(&e.b)?);
            if a == b {
                return Err(SimError::InvalidContacts(format!("self contact on {}", e.a)));
            }
            adjacency[a].insert(b);
            adjacency[b].insert(a);
        }
        let adjacency = adjacency.into_iter().map(|s| s.into_iter().collect()).collect();

        let mut trips = Vec::with_capacity(contacts.travel_schedule.len());
        for t in &contacts.travel_schedule {
            trips.push((
                t.day,
                person(&t.person)?,
                country(&t.origin),
                country(&t.destination),
                t.quarantined_on_arrival,
            ));
        }
        // stable: same-day trips keep schedule order
        trips.sort_by_key(|t| t.0);

        let mut closures = Vec::new();
        let mut quarantines = Vec::new();
        for iv in interventions {
            if iv.effective_day > params.max_days {
                return Err(SimError::InvalidParams(format!(
                    "intervention day {} beyond horizon {}",
                    iv.effective_day, params.max_days
                )));
            }
            match (iv.kind, &iv.target) {
                (InterventionKind::QuarantinePerson, InterventionTarget::Person(p)) => {
                    let i = pos
                        .get(p.as_str())
                        .copied()
                        .ok_or_else(|| SimError::InvalidParams(format!("quarantine target {p} unknown")))?;
                    quarantines.push((iv.effective_day, i));
                }
                (InterventionKind::CloseBorder, InterventionTarget::CountryPair([a, b])) => {
                    let (a, b) = (country(a), country(b));
                    closures.push(((a.min(b), a.max(b)), iv.effective_day));
                }
                (kind, target) => {
                    return Err(SimError::InvalidParams(format!(
                        "{kind:?} cannot target {target:?}"
                    )))
                }
            }
        }
        quarantines.sort();

        let seed = *pos
            .get(seed_person)
            .ok_or_else(|| SimError::UnknownSeedPerson(seed_person.to_string()))?;
        Ok(Simulator {
            ids,
            home_country,
            countries,
            adjacency,
            trips,
            closures,
            quarantines,
            params: params.clone(),
            seed,
        })
    }

    pub fn person_count(&self) -> usize {
        self.ids.len()
    }

    fn border_closed(&self, a: usize, b: usize, day: u32) -> bool {
        let key = (a.min(b), a.max(b));
        self.closures.iter().any(|(pair, from)| *pair == key && day >= *from)
    }

    #[allow(clippy::too_many_arguments)]
    fn expose(
        &self,
        who: usize,
        day: u32,
        by: Option<usize>,
        state: &mut [PersonState],
        records: &mut Vec<InfectionRecord>,
        tree: &mut Vec<TreeEdge>,
        rng: &mut ChaCha8Rng,
    ) {
        let inc = self.params.incubation_days;
        let incubation = rng.random_range(inc.low..=inc.high);
        let s = &mut state[who];
        s.phase = Phase::Exposed;
        s.onset_day = day + incubation;
        s.record = Some(records.len());
        records.push(InfectionRecord {
            person: self.ids[who].clone(),
            infected_day: day,
            infector: by.map(|i| self.ids[i].clone()),
            incubation_days: incubation,
            death_delay_days: None,
        });
        if let Some(i) = by {
            tree.push(TreeEdge {
                infector: self.ids[i].clone(),
                infectee: self.ids[who].clone(),
                day,
            });
        }
    }

    pub fn run(&self, rng_seed: u64) -> OutbreakResult {
        let p = &self.params;
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let mut state: Vec<PersonState> = self
            .home_country
            .iter()
            .map(|&c| PersonState {
                phase: Phase::Susceptible,
                country: c,
                quarantined: false,
                onset_day: 0,
                death_day: None,
                died: false,
                record: None,
            })
            .collect();
        let mut records: Vec<InfectionRecord> = Vec::new();
        let mut tree: Vec<TreeEdge> = Vec::new();

        self.expose(self.seed, 0, None, &mut state, &mut records, &mut tree, &mut rng);

        let mut active = 1usize;
        let mut last_event = 0u32;
        let mut trip_cursor = 0usize;
        let mut quarantine_cursor = 0usize;
        let mut pending_deaths: Vec<(usize, u32)> = Vec::new();
        for t in 0..=p.max_days {
            if active == 0 && pending_deaths.is_empty() {
                break;
            }
            while trip_cursor < self.trips.len() && self.trips[trip_cursor].0 <= t {
                let (day, who, origin, dest, quarantine) = self.trips[trip_cursor];
                trip_cursor += 1;
                if day == t && !self.border_closed(origin, dest, t) {
                    state[who].country = dest;
                    state[who].quarantined |= quarantine;
                }
            }
            while quarantine_cursor < self.quarantines.len() && self.quarantines[quarantine_cursor].0 <= t {
                state[self.quarantines[quarantine_cursor].1].quarantined = true;
                quarantine_cursor += 1;
            }

            for (i, s) in state.iter_mut().enumerate() {
                if s.phase == Phase::Exposed && s.onset_day <= t {
                    s.phase = Phase::Infectious;
                    if rng.random_bool(p.cfr) {
                        let delay = rng.random_range(p.symptom_to_death_days.low..=p.symptom_to_death_days.high);
                        s.death_day = Some(t + delay);
                        records[s.record.expect("exposed persons have a record")].death_delay_days = Some(delay);
                        pending_deaths.push((i, t + delay));
                    }
                }
            }

            pending_deaths.retain(|&(i, day)| {
                if day <= t {
                    state[i].died = true;
                    last_event = t;
                    false
                } else {
                    true
                }
            });
            for s in state.iter_mut() {
                if s.phase == Phase::Infectious
                    && (s.died || t >= s.onset_day + p.infectious_period_days)
                {
                    s.phase = Phase::Removed;
                    active -= 1;
                    last_event = t;
                }
            }

            for i in 0..state.len() {
                let s = &state[i];
                if s.phase != Phase::Infectious || s.quarantined {
                    continue;
                }
                let country = s.country;
                for &j in &self.adjacency[i] {
                    if state[j].phase == Phase::Susceptible
                        && state[j].country == country
                        && rng.random_bool(p.per_contact_transmission_prob)
                    {
                        self.expose(j, t, Some(i), &mut state, &mut records, &mut tree, &mut rng);
                        active += 1;
                        last_event = t;
                    }
                }
            }
        }

        let dispositions = self
            .ids
            .iter()
            .zip(&state)
            .map(|(id, s)| {
                let d = if s.died {
                    Disposition::Dead
                } else if s.quarantined {
                    Disposition::Quarantined
                } else {
                    match (s.phase, s.death_day) {
                        (Phase::Susceptible, _) => Disposition::NeverInfected,
                        (Phase::Removed, None) => Disposition::Recovered,
                        _ => Disposition::Active,
                    }
                };
                (id.clone(), d)
            })
            .collect();
        let duration_days = if active > 0 || !pending_deaths.is_empty() {
            p.max_days
        } else {
            last_event
        };
        OutbreakResult {
            dispositions,
            total_infected: records.len() as u64,
            total_dead: state.iter().filter(|s| s.died).count() as u64,
            infection_tree: tree,
            infections: records,
            duration_days,
        }
    }

    pub fn countries(&self) -> &[String] {
        &self.countries
    }
}

/// One run; the result depends only on the inputs and `rng_seed`.
pub fn simulate(
    contacts: &ContactStructure,
    params: &SimParams,
    seed_person: &str,
    interventions: &[Intervention],
    rng_seed: u64,
) -> Result<OutbreakResult, SimError> {
    Ok(Simulator::new(contacts, params, seed_person, interventions)?.run(rng_seed))
}

/// Simulation input file: a contact structure plus parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub contacts: ContactStructure,
    #[serde(default)]
    pub params: SimParams,
    pub seed_person: String,
    #[serde(default)]
    pub interventions: Vec<Intervention>,
}
