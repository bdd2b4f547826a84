//! DOT exports of the bundled fixtures against stored golden files. Set
//! `UPDATE_GOLDEN=1` to rewrite them.

mod common;

use std::fs;

use common::{dataset, golden};
use outbreak_core::net::{export_graph, ExportFormat};

fn check(name: &str) {
    let dot = export_graph(&dataset(&format!("{name}.jsonl")).graph, ExportFormat::Dot);
    let path = golden(&format!("{name}.dot"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, &dot).unwrap();
    }
    let stored = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(dot, stored, "{name}.dot drifted from its golden file");
}

#[test]
fn nigeria_dot() {
    check("nigeria");
}

#[test]
fn us_dot() {
    check("us");
}

#[test]
fn west_africa_dot() {
    check("west_africa");
}

#[test]
fn nigeria_dot_shape() {
    let dot = fs::read_to_string(golden("nigeria.dot")).unwrap();
    let nodes = dot.lines().filter(|l| l.contains("[label=")).count();
    let arcs = dot.lines().filter(|l| l.contains("style=solid")).count();
    let loops = dot.lines().filter(|l| l.contains("style=dashed")).count();
    assert_eq!((nodes, arcs, loops), (20, 19, 1));
    assert_eq!(dot.matches("fillcolor=gray70").count(), 8);
    assert_eq!(dot.matches("peripheries=2").count(), 11);
}
