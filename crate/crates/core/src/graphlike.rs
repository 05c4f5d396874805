//! Graph-like normal form: Z spiders joined only by Hadamard wires, no
//! parallel wires or self-loops, at most one boundary per spider.

use std::collections::BTreeMap;
use std::fmt;

use crate::diagram::{Color, EdgeKind, SpiderId, ZXDiagram};
use crate::error::{Error, Result};
use crate::phase::Phase;
use crate::rewrite::{apply_rewrite, Rewrite};

/// A failed clause of the graph-like definition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub clause: u8,
    pub spiders: Vec<SpiderId>,
    /// Index into the diagram's wire list, when a wire is at fault.
    pub wire: Option<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.clause {
            1 => "spider is not a Z-spider",
            2 => "spiders joined by a regular wire",
            3 => "parallel Hadamard wires or self-loop",
            4 => "boundary not attached to a Z-spider",
            _ => "spider carries more than one input or output",
        };
        write!(f, "clause {}: {what} (spiders", self.clause)?;
        for s in &self.spiders {
            write!(f, " {s}")?;
        }
        write!(f, ")")?;
        if let Some(w) = self.wire {
            write!(f, " at wire {w}")?;
        }
        Ok(())
    }
}

fn violations(d: &ZXDiagram, allow_regular: bool) -> Vec<Violation> {
    let mut out = Vec::new();
    for (id, s) in d.spiders() {
        if s.color != Color::Z {
            out.push(Violation { clause: 1, spiders: vec![id], wire: None });
        }
    }
    let mut seen_h: BTreeMap<(SpiderId, SpiderId), usize> = BTreeMap::new();
    for (i, w) in d.wires().iter().enumerate() {
        if w.is_self_loop() {
            out.push(Violation { clause: 3, spiders: vec![w.a], wire: Some(i) });
            continue;
        }
        match w.kind {
            EdgeKind::Regular if !allow_regular => {
                out.push(Violation { clause: 2, spiders: vec![w.a, w.b], wire: Some(i) });
            }
            EdgeKind::Regular => {}
            EdgeKind::Hadamard => {
                let key = (w.a.min(w.b), w.a.max(w.b));
                if seen_h.insert(key, i).is_some() {
                    out.push(Violation { clause: 3, spiders: vec![key.0, key.1], wire: Some(i) });
                }
            }
        }
    }
    for b in d.inputs.iter().chain(&d.outputs) {
        if d.contains(b.spider) && d.color(b.spider) != Color::Z {
            out.push(Violation { clause: 4, spiders: vec![b.spider], wire: None });
        }
    }
    for id in d.ids() {
        if d.boundary_count(id) > 1 {
            out.push(Violation { clause: 5, spiders: vec![id], wire: None });
        }
    }
    out
}

/// Every violated clause, or an empty list when `d` is graph-like.
pub fn is_graph_like(d: &ZXDiagram) -> Vec<Violation> {
    violations(d, false)
}

/// As [`is_graph_like`] but with regular wires permitted.
pub fn is_semi_graph_like(d: &ZXDiagram) -> Vec<Violation> {
    violations(d, true)
}

/// One simplification step; returns false once nothing applies.
fn step(d: &mut ZXDiagram) -> Result<bool> {
    if let Some(w) = d.wires().iter().find(|w| w.kind == EdgeKind::Regular && !w.is_self_loop()) {
        let (a, b) = (w.a, w.b);
        apply_rewrite(d, Rewrite::Fuse(a, b))?;
        return Ok(true);
    }
    if let Some(i) = d.wires().iter().position(|w| w.is_self_loop()) {
        let w = d.remove_wire(i);
        if w.kind == EdgeKind::Hadamard {
            let p = d.phase(w.a) + Phase::PI;
            d.set_phase(w.a, p);
        }
        return Ok(true);
    }
    let mut seen: BTreeMap<(SpiderId, SpiderId), usize> = BTreeMap::new();
    for (i, w) in d.wires().iter().enumerate() {
        let key = (w.a.min(w.b), w.a.max(w.b));
        if let Some(&j) = seen.get(&key) {
            d.remove_wires(vec![i, j]);
            return Ok(true);
        }
        seen.insert(key, i);
    }
    for id in d.ids() {
        if d.boundary_count(id) > 1 {
            // keep the first leg, route the next one through a fresh spider
            let (list, rank) = match d.inputs.iter().position(|b| b.spider == id) {
                Some(_) if d.inputs.iter().filter(|b| b.spider == id).count() > 1 => {
                    let r = d.inputs.iter().rposition(|b| b.spider == id).unwrap();
                    (0, r)
                }
                _ => (1, d.outputs.iter().rposition(|b| b.spider == id).unwrap()),
            };
            let t = d.z(Phase::ZERO);
            d.add_wire(id, t, EdgeKind::Hadamard)?;
            let leg = if list == 0 { &mut d.inputs[rank] } else { &mut d.outputs[rank] };
            leg.spider = t;
            leg.kind = leg.kind.toggled();
            return Ok(true);
        }
    }
    Ok(false)
}

/// Rewrites `d` into graph-like form, preserving its tensor up to scalar.
pub fn to_graph_like(d: &ZXDiagram) -> ZXDiagram {
    let mut g = d.clone();
    for id in g.ids() {
        if g.color(id) == Color::X {
            apply_rewrite(&mut g, Rewrite::ColorChange(id)).expect("color change always applies");
        }
    }
    while step(&mut g).expect("simplification steps are total on Z-only diagrams") {}
    g
}

/// Fuses every regular wire of a semi-graph-like diagram away.
pub fn reduce_semi_graph_like(d: &ZXDiagram) -> Result<ZXDiagram> {
    let bad = is_semi_graph_like(d);
    if let Some(v) = bad.first() {
        return Err(Error::NotSemiGraphLike(v.to_string()));
    }
    let mut g = d.clone();
    while let Some(w) = g.wires().iter().find(|w| w.kind == EdgeKind::Regular && !w.is_self_loop()) {
        let (a, b) = (w.a, w.b);
        apply_rewrite(&mut g, Rewrite::Fuse(a, b))?;
    }
    // fusion can leave parallel wires or loops behind; finish normally
    while step(&mut g)? {}
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{contract_tensor, equal_up_to_scalar};

    #[test]
    fn lone_x_spider_becomes_z() {
        let mut d = ZXDiagram::new();
        let s = d.x(Phase::new(1, 2));
        d.add_input(s, EdgeKind::Regular);
        d.add_output(s, EdgeKind::Regular);
        let g = to_graph_like(&d);
        assert!(equal_up_to_scalar(&contract_tensor(&d).unwrap(), &contract_tensor(&g).unwrap(), 1e-9).unwrap());
        assert!(is_graph_like(&g).is_empty(), "{:?}", is_graph_like(&g));
        assert!(g.spiders().all(|(_, s)| s.color == Color::Z));
    }

    #[test]
    fn clause_five_on_shared_boundary() {
        let mut d = ZXDiagram::new();
        let s = d.z(Phase::ZERO);
        d.add_input(s, EdgeKind::Regular);
        d.add_output(s, EdgeKind::Regular);
        let v = is_graph_like(&d);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].clause, 5);
    }

    #[test]
    fn clause_three_on_parallel_hadamards() {
        let mut d = ZXDiagram::new();
        let a = d.z(Phase::ZERO);
        let b = d.z(Phase::ZERO);
        d.add_wire(a, b, EdgeKind::Hadamard).unwrap();
        d.add_wire(a, b, EdgeKind::Hadamard).unwrap();
        let v = is_graph_like(&d);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].clause, 3);
        assert_eq!(v[0].spiders, vec![a, b]);
    }

    #[test]
    fn graph_like_input_is_a_fixed_point() {
        let mut d = ZXDiagram::new();
        let a = d.z(Phase::new(1, 2));
        let b = d.z(Phase::ZERO);
        d.add_wire(a, b, EdgeKind::Hadamard).unwrap();
        d.add_input(a, EdgeKind::Regular);
        d.add_output(b, EdgeKind::Hadamard);
        assert!(to_graph_like(&d).structurally_equal(&d));
    }

    #[test]
    fn reduce_merges_phases() {
        let mut d = ZXDiagram::new();
        let a = d.z(Phase::new(1, 3));
        let b = d.z(Phase::new(1, 3));
        d.add_wire(a, b, EdgeKind::Regular).unwrap();
        d.add_output(b, EdgeKind::Regular);
        let g = reduce_semi_graph_like(&d).unwrap();
        assert_eq!(g.spider_count(), 1);
        assert_eq!(g.phase(a), Phase::new(1, 2));
        let mut x = d.clone();
        x.x(Phase::ZERO);
        assert!(matches!(reduce_semi_graph_like(&x), Err(Error::NotSemiGraphLike(_))));
    }
}
