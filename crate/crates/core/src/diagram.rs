//! ZX-diagram data model.
//!
//! A diagram is a multigraph of Z/X spiders joined by regular or Hadamard
//! wires. Boundaries are not separate vertices: each entry of `inputs` or
//! `outputs` is a dangling leg attached to a spider, carrying its own wire
//! kind. The leg order of the diagram's linear map is inputs by rank, then
//! outputs by rank.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::Phase;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpiderId(pub usize);

impl fmt::Display for SpiderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for SpiderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    Z,
    X,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeKind {
    #[serde(rename = "N")]
    Regular,
    #[serde(rename = "H")]
    Hadamard,
}

impl EdgeKind {
    pub fn toggled(self) -> EdgeKind {
        match self {
            EdgeKind::Regular => EdgeKind::Hadamard,
            EdgeKind::Hadamard => EdgeKind::Regular,
        }
    }

    /// Kind of two wires composed in series through an identity.
    pub fn compose(self, other: EdgeKind) -> EdgeKind {
        if self == other {
            EdgeKind::Regular
        } else {
            EdgeKind::Hadamard
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spider {
    pub color: Color,
    pub phase: Phase,
}

impl Spider {
    pub fn z(phase: Phase) -> Spider {
        Spider { color: Color::Z, phase }
    }

    pub fn x(phase: Phase) -> Spider {
        Spider { color: Color::X, phase }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Wire {
    pub a: SpiderId,
    pub b: SpiderId,
    pub kind: EdgeKind,
}

impl Wire {
    pub fn is_self_loop(&self) -> bool {
        self.a == self.b
    }

    pub fn touches(&self, v: SpiderId) -> bool {
        self.a == v || self.b == v
    }

    /// The endpoint opposite `v`.
    pub fn other(&self, v: SpiderId) -> SpiderId {
        if self.a == v {
            self.b
        } else {
            self.a
        }
    }

    fn normalized(&self) -> Wire {
        Wire { a: self.a.min(self.b), b: self.a.max(self.b), kind: self.kind }
    }
}

/// A dangling leg: the diagram's open wire attached to `spider`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Boundary {
    pub spider: SpiderId,
    pub kind: EdgeKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IoRole {
    Input(usize),
    Output(usize),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ZXDiagram {
    spiders: BTreeMap<SpiderId, Spider>,
    wires: Vec<Wire>,
    pub inputs: Vec<Boundary>,
    pub outputs: Vec<Boundary>,
    next_id: usize,
}

impl ZXDiagram {
    pub fn new() -> ZXDiagram {
        ZXDiagram::default()
    }

    pub fn add_spider(&mut self, spider: Spider) -> SpiderId {
        let id = SpiderId(self.next_id);
        self.next_id += 1;
        self.spiders.insert(id, spider);
        id
    }

    /// Inserts a spider under a caller-chosen id (used by file loading).
    pub fn insert_spider(&mut self, id: SpiderId, spider: Spider) -> Result<()> {
        if self.spiders.contains_key(&id) {
            return Err(Error::InvalidArgument(format!("duplicate spider id {id}")));
        }
        self.spiders.insert(id, spider);
        self.next_id = self.next_id.max(id.0 + 1);
        Ok(())
    }

    pub fn z(&mut self, phase: Phase) -> SpiderId {
        self.add_spider(Spider::z(phase))
    }

    pub fn x(&mut self, phase: Phase) -> SpiderId {
        self.add_spider(Spider::x(phase))
    }

    pub fn add_wire(&mut self, a: SpiderId, b: SpiderId, kind: EdgeKind) -> Result<()> {
        for v in [a, b] {
            if !self.spiders.contains_key(&v) {
                return Err(Error::UnknownSpider(v));
            }
        }
        self.wires.push(Wire { a, b, kind });
        Ok(())
    }

    pub fn add_input(&mut self, spider: SpiderId, kind: EdgeKind) {
        self.inputs.push(Boundary { spider, kind });
    }

    pub fn add_output(&mut self, spider: SpiderId, kind: EdgeKind) {
        self.outputs.push(Boundary { spider, kind });
    }

    pub fn contains(&self, v: SpiderId) -> bool {
        self.spiders.contains_key(&v)
    }

    pub fn spider(&self, v: SpiderId) -> Result<&Spider> {
        self.spiders.get(&v).ok_or(Error::UnknownSpider(v))
    }

    pub fn spider_mut(&mut self, v: SpiderId) -> Result<&mut Spider> {
        self.spiders.get_mut(&v).ok_or(Error::UnknownSpider(v))
    }

    pub fn phase(&self, v: SpiderId) -> Phase {
        self.spiders[&v].phase
    }

    pub fn set_phase(&mut self, v: SpiderId, phase: Phase) {
        if let Some(s) = self.spiders.get_mut(&v) {
            s.phase = phase;
        }
    }

    pub fn color(&self, v: SpiderId) -> Color {
        self.spiders[&v].color
    }

    pub fn spiders(&self) -> impl Iterator<Item = (SpiderId, &Spider)> + '_ {
        self.spiders.iter().map(|(&k, v)| (k, v))
    }

    pub fn ids(&self) -> Vec<SpiderId> {
        self.spiders.keys().copied().collect()
    }

    pub fn spider_count(&self) -> usize {
        self.spiders.len()
    }

    pub fn wires(&self) -> &[Wire] {
        &self.wires
    }

    pub fn wire_count(&self) -> usize {
        self.wires.len()
    }

    pub(crate) fn wires_mut(&mut self) -> &mut Vec<Wire> {
        &mut self.wires
    }

    /// Indices of wires incident to `v` (self-loops once).
    pub fn incident(&self, v: SpiderId) -> Vec<usize> {
        self.wires
            .iter()
            .enumerate()
            .filter(|(_, w)| w.touches(v))
            .map(|(i, _)| i)
            .collect()
    }

    /// Number of wire ends at `v`, counting self-loops twice and including
    /// boundary legs.
    pub fn arity(&self, v: SpiderId) -> usize {
        let ends: usize = self
            .wires
            .iter()
            .map(|w| (w.a == v) as usize + (w.b == v) as usize)
            .sum();
        ends + self.boundary_count(v)
    }

    /// Number of wires to other spiders (no self-loops, no boundary legs).
    pub fn degree(&self, v: SpiderId) -> usize {
        self.wires.iter().filter(|w| w.touches(v) && !w.is_self_loop()).count()
    }

    pub fn neighbors(&self, v: SpiderId) -> BTreeSet<SpiderId> {
        self.wires
            .iter()
            .filter(|w| w.touches(v) && !w.is_self_loop())
            .map(|w| w.other(v))
            .collect()
    }

    /// Wires between `a` and `b` (excluding self-loops when `a == b`).
    pub fn wires_between(&self, a: SpiderId, b: SpiderId) -> Vec<usize> {
        self.wires
            .iter()
            .enumerate()
            .filter(|(_, w)| (w.a == a && w.b == b) || (w.a == b && w.b == a))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn remove_wire(&mut self, index: usize) -> Wire {
        self.wires.remove(index)
    }

    /// Removes the wires at the given indices (any order).
    pub fn remove_wires(&mut self, mut indices: Vec<usize>) {
        indices.sort_unstable();
        indices.dedup();
        for i in indices.into_iter().rev() {
            self.wires.remove(i);
        }
    }

    /// Removes a spider and every wire touching it. Boundary legs on it
    /// must have been moved first.
    pub fn remove_spider(&mut self, v: SpiderId) -> Result<Spider> {
        let s = self.spiders.remove(&v).ok_or(Error::UnknownSpider(v))?;
        self.wires.retain(|w| !w.touches(v));
        Ok(s)
    }

    pub fn boundary_count(&self, v: SpiderId) -> usize {
        self.inputs.iter().chain(&self.outputs).filter(|b| b.spider == v).count()
    }

    /// The single io role of `v`, if it has exactly one boundary leg.
    pub fn io(&self, v: SpiderId) -> Option<IoRole> {
        let ins = self.inputs.iter().position(|b| b.spider == v);
        let outs = self.outputs.iter().position(|b| b.spider == v);
        match (ins, outs) {
            (Some(r), None) => Some(IoRole::Input(r)),
            (None, Some(r)) => Some(IoRole::Output(r)),
            _ => None,
        }
    }

    pub fn input_spiders(&self) -> Vec<SpiderId> {
        self.inputs.iter().map(|b| b.spider).collect()
    }

    pub fn output_spiders(&self) -> Vec<SpiderId> {
        self.outputs.iter().map(|b| b.spider).collect()
    }

    /// Moves every wire end and boundary leg of `from` onto `to`.
    pub(crate) fn redirect(&mut self, from: SpiderId, to: SpiderId) {
        for w in &mut self.wires {
            if w.a == from {
                w.a = to;
            }
            if w.b == from {
                w.b = to;
            }
        }
        for b in self.inputs.iter_mut().chain(self.outputs.iter_mut()) {
            if b.spider == from {
                b.spider = to;
            }
        }
    }

    /// Order-insensitive equality of the wire multiset and spider data.
    pub fn structurally_equal(&self, other: &ZXDiagram) -> bool {
        let norm = |d: &ZXDiagram| {
            let mut w: Vec<Wire> = d.wires.iter().map(Wire::normalized).collect();
            w.sort();
            w
        };
        self.spiders == other.spiders
            && self.inputs == other.inputs
            && self.outputs == other.outputs
            && norm(self) == norm(other)
    }
}
