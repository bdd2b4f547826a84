//! DOT, GraphML and JSON renderings of a transmission graph. Nodes are emitted
//! in case-id order and edges in insertion order, so output is stable.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::TransmissionGraph;
use crate::registry::{Outcome, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Dot,
    Graphml,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dot" => Ok(Self::Dot),
            "graphml" => Ok(Self::Graphml),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown export format {other:?}")),
        }
    }
}

pub fn export_graph(g: &TransmissionGraph, format: ExportFormat) -> String {
    match format {
        ExportFormat::Dot => to_dot(g),
        ExportFormat::Graphml => to_graphml(g),
        ExportFormat::Json => {
            let mut s = g.to_json();
            s.push('\n');
            s
        }
    }
}

fn snake<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn dot_id(id: &str) -> String {
    let mut chars = id.chars();
    let plain = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain {
        id.to_string()
    } else {
        format!("\"{}\"", dot_escape(id))
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Infection edges are solid arrows labelled with their context. A travel
/// event is a dashed loop on the traveler, since both ends are one person.
/// Deaths are filled nodes; health-care workers get a double border.
fn to_dot(g: &TransmissionGraph) -> String {
    let mut out = String::from("digraph G {\n");
    for n in g.nodes() {
        let mut attrs = vec![format!(
            "label=\"{}\\n{}\"",
            dot_escape(n.case_id.as_str()),
            dot_escape(&n.location.to_string())
        )];
        if n.outcome == Outcome::Dead {
            attrs.push("style=filled".into());
            attrs.push("fillcolor=gray70".into());
        }
        if n.role == Role::HealthcareWorker {
            attrs.push("peripheries=2".into());
        }
        let _ = writeln!(out, "  {} [{}];", dot_id(n.case_id.as_str()), attrs.join(", "));
    }
    for e in g.infection_edges() {
        let _ = writeln!(
            out,
            "  {} -> {} [style=solid, label=\"{}\"];",
            dot_id(e.infector.as_str()),
            dot_id(e.infectee.as_str()),
            snake(&e.context)
        );
    }
    for t in g.travel_events() {
        let id = dot_id(t.person.as_str());
        let _ = writeln!(
            out,
            "  {id} -> {id} [style=dashed, label=\"{}: {} to {}\"];",
            snake(&t.reason),
            dot_escape(&t.origin.to_string()),
            dot_escape(&t.destination.to_string())
        );
    }
    out.push_str("}\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

fn data(out: &mut String, key: &str, value: &str) {
    let _ = writeln!(out, "      <data key=\"{key}\">{}</data>", xml_escape(value));
}

fn to_graphml(g: &TransmissionGraph) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n",
    );
    let keys = [
        ("country", "node", "string"),
        ("city", "node", "string"),
        ("role", "node", "string"),
        ("outcome", "node", "string"),
        ("kind", "edge", "string"),
        ("context", "edge", "string"),
        ("date", "edge", "string"),
        ("evidence", "edge", "string"),
        ("reason", "edge", "string"),
        ("origin", "edge", "string"),
        ("destination", "edge", "string"),
        ("quarantined_on_arrival", "edge", "boolean"),
    ];
    for (id, target, ty) in keys {
        let _ = writeln!(
            out,
            "  <key id=\"{id}\" for=\"{target}\" attr.name=\"{id}\" attr.type=\"{ty}\"/>"
        );
    }
    out.push_str("  <graph id=\"G\" edgedefault=\"directed\">\n");
    for n in g.nodes() {
        let _ = writeln!(out, "    <node id=\"{}\">", xml_escape(n.case_id.as_str()));
        data(&mut out, "country", &n.location.country);
        if let Some(city) = &n.location.city {
            data(&mut out, "city", city);
        }
        data(&mut out, "role", &snake(&n.role));
        data(&mut out, "outcome", &snake(&n.outcome));
        out.push_str("    </node>\n");
    }
    let mut edge_no = 0usize;
    for e in g.infection_edges() {
        let _ = writeln!(
            out,
            "    <edge id=\"e{edge_no}\" source=\"{}\" target=\"{}\">",
            xml_escape(e.infector.as_str()),
            xml_escape(e.infectee.as_str())
        );
        edge_no += 1;
        data(&mut out, "kind", "infection");
        data(&mut out, "context", &snake(&e.context));
        if let Some(date) = e.date {
            data(&mut out, "date", &date.to_string());
        }
        if !e.evidence.is_empty() {
            data(&mut out, "evidence", &e.evidence);
        }
        out.push_str("    </edge>\n");
    }
    for t in g.travel_events() {
        let person = xml_escape(t.person.as_str());
        let _ = writeln!(out, "    <edge id=\"e{edge_no}\" source=\"{person}\" target=\"{person}\">");
        edge_no += 1;
        data(&mut out, "kind", "travel");
        data(&mut out, "reason", &snake(&t.reason));
        data(&mut out, "origin", &t.origin.to_string());
        data(&mut out, "destination", &t.destination.to_string());
        if let Some(date) = t.date {
            data(&mut out, "date", &date.to_string());
        }
        data(&mut out, "quarantined_on_arrival", if t.quarantined_on_arrival { "true" } else { "false" });
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}
