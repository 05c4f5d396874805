//! File formats: diagrams, flows, programs, client secrets and histograms.
//!
//! Every writer emits pretty JSON with sorted keys and a trailing newline,
//! so identical values always give identical bytes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diagram::{Boundary, Color, EdgeKind, SpiderId, ZXDiagram};
use crate::error::{Error, ParseError, Result};
use crate::flow::{MeasurementPlane, PauliFlowData};
use crate::obfuscate::{BlockPartition, BlockView, ObfuscatedProgram, SampleSecrets, SplitMap};
use crate::phase::Phase;

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiderRecord {
    pub id: usize,
    pub color: Color,
    pub phase: Phase,
    /// Boundary legs: `in:<rank>` or `out:<rank>`, with `:H` for a
    /// Hadamard leg, joined by `;` when a spider has several.
    pub io: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireRecord {
    pub a: usize,
    pub b: usize,
    pub kind: EdgeKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramFile {
    pub spiders: Vec<SpiderRecord>,
    pub wires: Vec<WireRecord>,
}

impl DiagramFile {
    pub fn from_diagram(d: &ZXDiagram) -> DiagramFile {
        let mut legs: BTreeMap<SpiderId, Vec<String>> = BTreeMap::new();
        let suffix = |k: EdgeKind| if k == EdgeKind::Hadamard { ":H" } else { "" };
        for (r, b) in d.inputs.iter().enumerate() {
            legs.entry(b.spider).or_default().push(format!("in:{r}{}", suffix(b.kind)));
        }
        for (r, b) in d.outputs.iter().enumerate() {
            legs.entry(b.spider).or_default().push(format!("out:{r}{}", suffix(b.kind)));
        }
        let spiders = d
            .spiders()
            .map(|(id, s)| SpiderRecord {
                id: id.0,
                color: s.color,
                phase: s.phase,
                io: legs.get(&id).map(|l| l.join(";")),
            })
            .collect();
        let wires = d.wires().iter().map(|w| WireRecord { a: w.a.0, b: w.b.0, kind: w.kind }).collect();
        DiagramFile { spiders, wires }
    }

    pub fn to_diagram(&self) -> Result<ZXDiagram> {
        let bad = |m: String| Error::Parse(ParseError::Diagram(m));
        let mut d = ZXDiagram::new();
        let mut inputs = BTreeMap::new();
        let mut outputs = BTreeMap::new();
        for s in &self.spiders {
            let id = SpiderId(s.id);
            d.insert_spider(id, crate::diagram::Spider { color: s.color, phase: s.phase })
                .map_err(|_| bad(format!("duplicate spider id {}", s.id)))?;
            for leg in s.io.iter().flat_map(|io| io.split(';')) {
                let parts: Vec<&str> = leg.split(':').collect();
                let kind = match parts.get(2) {
                    None => EdgeKind::Regular,
                    Some(&"H") => EdgeKind::Hadamard,
                    Some(other) => return Err(bad(format!("bad leg kind `{other}`"))),
                };
                let rank: usize = parts
                    .get(1)
                    .and_then(|r| r.parse().ok())
                    .ok_or_else(|| bad(format!("bad io `{leg}`")))?;
                let slot = match parts[0] {
                    "in" => &mut inputs,
                    "out" => &mut outputs,
                    _ => return Err(bad(format!("bad io `{leg}`"))),
                };
                if slot.insert(rank, Boundary { spider: id, kind }).is_some() {
                    return Err(bad(format!("rank {rank} used twice in `{leg}`")));
                }
            }
        }
        for w in &self.wires {
            d.add_wire(SpiderId(w.a), SpiderId(w.b), w.kind)
                .map_err(|_| bad(format!("wire {}-{} references an unknown spider", w.a, w.b)))?;
        }
        for (ranks, list) in [(&inputs, &mut d.inputs), (&outputs, &mut d.outputs)] {
            if ranks.keys().copied().ne(0..ranks.len()) {
                return Err(bad("boundary ranks must be 0..n without gaps".into()));
            }
            list.extend(ranks.values().copied());
        }
        Ok(d)
    }
}

pub fn diagram_to_json(d: &ZXDiagram) -> String {
    to_pretty(&DiagramFile::from_diagram(d))
}

pub fn diagram_from_json(text: &str) -> Result<ZXDiagram> {
    let file: DiagramFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(ParseError::Diagram(e.to_string())))?;
    file.to_diagram()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowFile {
    pub layers: Vec<Vec<SpiderId>>,
    pub f: BTreeMap<SpiderId, Vec<SpiderId>>,
    pub planes: BTreeMap<SpiderId, MeasurementPlane>,
}

pub fn flow_to_json(flow: &PauliFlowData, planes: &BTreeMap<SpiderId, MeasurementPlane>) -> String {
    let f = flow.f.iter().map(|(&u, s)| (u, s.iter().copied().collect())).collect();
    to_pretty(&FlowFile { layers: flow.layers.clone(), f, planes: planes.clone() })
}

pub fn flow_from_json(text: &str) -> Result<(PauliFlowData, BTreeMap<SpiderId, MeasurementPlane>)> {
    let file: FlowFile = serde_json::from_str(text).map_err(|e| Error::Parse(ParseError::Flow(e.to_string())))?;
    let f = file.f.into_iter().map(|(u, s)| (u, s.into_iter().collect())).collect();
    Ok((PauliFlowData { f, layers: file.layers }, file.planes))
}

/// What every agent may see: the public view of each block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgramFile {
    pub den_pow: u32,
    pub blocks: Vec<BlockView>,
}

impl ProgramFile {
    pub fn new(program: &ObfuscatedProgram) -> ProgramFile {
        ProgramFile { den_pow: program.den_pow, blocks: program.public_views() }
    }
}

/// The client's private record: the full obfuscated diagram with its
/// partition, split map and edge ids, and one bound set of secrets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecretsFile {
    pub closed: DiagramFile,
    pub diagram: DiagramFile,
    pub blocks: BTreeMap<SpiderId, usize>,
    /// `(parent, even child, odd child)`.
    pub split: Vec<(SpiderId, SpiderId, SpiderId)>,
    /// `(a, b, edge id)`.
    pub edge_ids: Vec<(SpiderId, SpiderId, u64)>,
    pub secrets: SampleSecrets,
}

impl SecretsFile {
    pub fn new(program: &ObfuscatedProgram, secrets: SampleSecrets) -> SecretsFile {
        SecretsFile {
            closed: DiagramFile::from_diagram(&program.closed),
            diagram: DiagramFile::from_diagram(&program.diagram),
            blocks: program.partition.iter().collect(),
            split: program.split.children.iter().map(|(&p, &(e, o))| (p, e, o)).collect(),
            edge_ids: program.edge_ids.iter().map(|(&(a, b), &id)| (a, b, id)).collect(),
            secrets,
        }
    }

    /// Rebuilds the program and checks it against the public file.
    pub fn program(&self, public: &ProgramFile) -> Result<ObfuscatedProgram> {
        let mut partition = BlockPartition::default();
        for (&v, &k) in &self.blocks {
            partition.assign(v, k);
        }
        let split = SplitMap { children: self.split.iter().map(|&(p, e, o)| (p, (e, o))).collect() };
        let ids = self.edge_ids.iter().map(|&(a, b, id)| ((a, b), id)).collect();
        let program =
            ObfuscatedProgram::from_parts(self.closed.to_diagram()?, self.diagram.to_diagram()?, partition, split, ids)?;
        if ProgramFile::new(&program) != *public {
            return Err(Error::InvalidArgument("secrets file does not match the program file".into()));
        }
        Ok(program)
    }
}

pub fn program_to_json(p: &ProgramFile) -> String {
    to_pretty(p)
}

pub fn program_from_json(text: &str) -> Result<ProgramFile> {
    serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("program file: {e}")))
}

pub fn secrets_to_json(s: &SecretsFile) -> String {
    to_pretty(s)
}

pub fn secrets_from_json(text: &str) -> Result<SecretsFile> {
    serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("secrets file: {e}")))
}

/// Histogram of counts or probabilities keyed by output bit string.
pub fn histogram_to_json<V: Serialize>(h: &BTreeMap<String, V>) -> String {
    to_pretty(h)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    to_pretty(value)
}
