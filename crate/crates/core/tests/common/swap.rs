//! The swap-test example: its open graph (reconstructed from the printed
//! correction table) and the printed flow table.

use std::collections::{BTreeMap, BTreeSet};

use zxbqc_core::flow::{odd_neighborhood, verify_pauli_flow, MeasurementPlane, OpenGraph, PauliFlowData};
use zxbqc_core::io::flow_to_json;
use zxbqc_core::{EdgeKind, Phase, SpiderId, ZXDiagram};

pub const NAMES: [&str; 13] = ["Q1", "Q2", "v1", "v2", "v3", "v4", "v5", "v6", "v7", "v8", "v9", "v10", "v11"];

pub fn id(name: &str) -> SpiderId {
    SpiderId(NAMES.iter().position(|&n| n == name).unwrap_or_else(|| panic!("unknown vertex {name}")))
}

pub fn name(v: SpiderId) -> &'static str {
    NAMES[v.0]
}

fn set(names: &[&str]) -> BTreeSet<SpiderId> {
    names.iter().map(|n| id(n)).collect()
}

pub fn graph() -> OpenGraph {
    let edges = [
        ("Q1", "v1"),
        ("v1", "v2"),
        ("v2", "v3"),
        ("v3", "v4"),
        ("v4", "v5"),
        ("Q2", "v8"),
        ("v8", "v9"),
        ("v9", "v10"),
        ("v10", "v11"),
        ("v3", "v6"),
        ("v6", "v7"),
        ("v7", "v11"),
    ];
    let xy = ["Q1", "Q2", "v3", "v5", "v9", "v11"];
    let planes = NAMES
        .iter()
        .map(|&n| (id(n), if xy.contains(&n) { MeasurementPlane::XY } else { MeasurementPlane::X }))
        .collect();
    OpenGraph::new(
        (0..NAMES.len()).map(SpiderId),
        edges.iter().map(|&(a, b)| (id(a), id(b))),
        [id("Q1"), id("Q2")],
        [id("v5"), id("v11")],
        planes,
    )
    .unwrap()
}

/// Rows `(u, f(u), printed Odd(f(u)))` of the printed table.
pub fn table() -> Vec<(&'static str, Vec<&'static str>, Vec<&'static str>)> {
    vec![
        ("Q1", vec!["v1", "v3", "v5", "v7"], vec!["Q1", "v11"]),
        ("Q2", vec!["v8"], vec!["Q2", "v9"]),
        ("v1", vec!["v2"], vec!["Q1", "v3"]),
        ("v2", vec!["v3", "v5", "v7"], vec!["v2", "v11"]),
        ("v3", vec!["v4"], vec!["v3", "v5"]),
        ("v4", vec!["v5"], vec!["v4"]),
        ("v6", vec!["v7"], vec!["v6", "v11"]),
        ("v7", vec!["v6"], vec!["v3", "v7"]),
        ("v8", vec!["v9", "v11"], vec!["v8"]),
        ("v9", vec!["v10"], vec!["v9", "v11"]),
        ("v10", vec!["v11", "v6"], vec!["v10", "v3"]),
    ]
}

/// The printed partial order as layers.
pub fn flow() -> PauliFlowData {
    let f = table().into_iter().map(|(u, fu, _)| (id(u), set(&fu))).collect();
    let layers = [
        vec!["v1", "v2", "v6", "v7", "v8", "v4", "v10"],
        vec!["Q1", "Q2"],
        vec!["v3", "v9"],
        vec!["v5", "v11"],
    ]
    .iter()
    .map(|l| l.iter().map(|n| id(n)).collect())
    .collect();
    PauliFlowData { f, layers }
}

fn names(s: &BTreeSet<SpiderId>) -> String {
    let v: Vec<&str> = s.iter().map(|&v| name(v)).collect();
    format!("{{{}}}", v.join(", "))
}

/// Verification of the printed table plus a comparison of the printed
/// Odd(f(u)) column with the computed odd neighbourhoods.
pub fn discrepancy_report() -> String {
    let g = graph();
    let mut out = String::from("# Swap-test flow table check\n\n## verify_pauli_flow on the printed table\n");
    let violations = verify_pauli_flow(&g, &flow());
    if violations.is_empty() {
        out.push_str("pass\n");
    }
    for v in &violations {
        match v.v {
            Some(w) => out.push_str(&format!("condition {} fails for u={} v={}\n", v.condition, name(v.u), name(w))),
            None => out.push_str(&format!("condition {} fails for u={}\n", v.condition, name(v.u))),
        }
    }
    out.push_str("\n## printed Odd(f(u)) versus computed\n");
    let mut clean = true;
    for (u, fu, printed) in table() {
        let computed = odd_neighborhood(&g, &set(&fu)).unwrap();
        if computed != set(&printed) {
            clean = false;
            out.push_str(&format!("{u}: printed {} computed {}\n", names(&set(&printed)), names(&computed)));
        }
    }
    if clean {
        out.push_str("all rows agree\n");
    }
    out
}

pub fn violations() -> usize {
    verify_pauli_flow(&graph(), &flow()).len()
}

pub fn odd_of(u: &str) -> BTreeSet<SpiderId> {
    let row = table().into_iter().find(|r| r.0 == u).unwrap();
    odd_neighborhood(&graph(), &set(&row.1)).unwrap()
}

pub fn correction_set(u: &str) -> BTreeSet<SpiderId> {
    flow().f[&id(u)].clone()
}

pub fn layers_by_name() -> BTreeMap<&'static str, usize> {
    let f = flow();
    f.layer_of().into_iter().map(|(v, l)| (name(v), l)).collect()
}

/// The fixture graph as a graph-like diagram: XY vertices carry phase π/4,
/// X vertices phase 0.
pub fn diagram() -> ZXDiagram {
    let g = graph();
    let mut d = ZXDiagram::new();
    for &n in NAMES.iter() {
        let phase = if g.plane(id(n)) == Some(MeasurementPlane::XY) { Phase::new(1, 2) } else { Phase::ZERO };
        assert_eq!(d.z(phase), id(n));
    }
    for (a, b) in g.edges() {
        d.add_wire(a, b, EdgeKind::Hadamard).unwrap();
    }
    d.add_input(id("Q1"), EdgeKind::Regular);
    d.add_input(id("Q2"), EdgeKind::Regular);
    d.add_output(id("v5"), EdgeKind::Regular);
    d.add_output(id("v11"), EdgeKind::Regular);
    d
}

/// The printed table in the flow file format.
pub fn flow_json() -> String {
    let g = graph();
    let planes = g.planes.iter().filter(|(v, _)| !g.is_output(**v)).map(|(&v, &p)| (v, p)).collect();
    flow_to_json(&flow(), &planes)
}
