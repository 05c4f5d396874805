//! Client-side preparation: closing the diagram, depth blocks, phase
//! splitting, connectivity obfuscation, dummy padding and secrets.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diagram::{EdgeKind, SpiderId, ZXDiagram};
use crate::error::{Error, Result};
use crate::flow::{semi_graph_flow, MeasurementPlane, SemiGraphFlow};
use crate::graphlike::{is_graph_like, to_graph_like};
use crate::phase::Phase;

/// Wire key with the smaller endpoint first.
pub type WireKey = (SpiderId, SpiderId);

pub fn wire_key(a: SpiderId, b: SpiderId) -> WireKey {
    (a.min(b), a.max(b))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    block_of: BTreeMap<SpiderId, usize>,
    block_count: usize,
}

impl BlockPartition {
    pub fn from_depths(depths: BTreeMap<SpiderId, usize>) -> BlockPartition {
        let block_count = depths.values().max().map_or(0, |m| m + 1);
        BlockPartition { block_of: depths, block_count }
    }

    pub fn block(&self, v: SpiderId) -> Option<usize> {
        self.block_of.get(&v).copied()
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn assign(&mut self, v: SpiderId, block: usize) {
        self.block_of.insert(v, block);
        self.block_count = self.block_count.max(block + 1);
    }

    /// Spiders of block `k` in id order.
    pub fn members(&self, k: usize) -> Vec<SpiderId> {
        self.block_of.iter().filter(|(_, &b)| b == k).map(|(&v, _)| v).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SpiderId, usize)> + '_ {
        self.block_of.iter().map(|(&v, &b)| (v, b))
    }

    pub fn is_inter_block(&self, a: SpiderId, b: SpiderId) -> bool {
        self.block(a) != self.block(b)
    }
}

/// Distance from every spider to its nearest output spider.
pub fn compute_depths(d: &ZXDiagram) -> Result<BTreeMap<SpiderId, usize>> {
    if d.outputs.is_empty() {
        return Err(Error::InvalidArgument("diagram has no outputs".into()));
    }
    let mut adj: BTreeMap<SpiderId, Vec<SpiderId>> = d.ids().into_iter().map(|v| (v, Vec::new())).collect();
    for w in d.wires().iter().filter(|w| !w.is_self_loop()) {
        adj.get_mut(&w.a).unwrap().push(w.b);
        adj.get_mut(&w.b).unwrap().push(w.a);
    }
    let mut depth = BTreeMap::new();
    let mut queue = VecDeque::new();
    for v in d.output_spiders() {
        if depth.insert(v, 0).is_none() {
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        let next = depth[&v] + 1;
        for &n in &adj[&v] {
            if let Entry::Vacant(e) = depth.entry(n) {
                e.insert(next);
                queue.push_back(n);
            }
        }
    }
    if let Some(v) = d.ids().into_iter().find(|v| !depth.contains_key(v)) {
        return Err(Error::Unreachable(v));
    }
    Ok(depth)
}

/// Finishes a closed diagram: graph-like, phase-0 identities removed and
/// every output leg a Hadamard leg.
fn normalize(d: &ZXDiagram) -> ZXDiagram {
    let mut g = to_graph_like(d);
    loop {
        let candidate = g.ids().into_iter().find(|&v| {
            g.phase(v).is_zero()
                && g.boundary_count(v) == 0
                && g.neighbors(v).len() == 2
                && g.incident(v).len() == 2
        });
        let Some(v) = candidate else { break };
        let n: Vec<SpiderId> = g.neighbors(v).into_iter().collect();
        g.remove_spider(v).expect("candidate exists");
        g.add_wire(n[0], n[1], EdgeKind::Regular).expect("neighbors exist");
        g = to_graph_like(&g);
    }
    // isolated phase-0 spiders only contribute a scalar
    for v in g.ids() {
        if g.phase(v).is_zero() && g.arity(v) == 0 {
            g.remove_spider(v).expect("exists");
        }
    }
    for rank in 0..g.outputs.len() {
        let b = g.outputs[rank];
        if b.kind == EdgeKind::Regular {
            let t = g.z(Phase::ZERO);
            g.add_wire(b.spider, t, EdgeKind::Hadamard).expect("exists");
            g.outputs[rank].spider = t;
            g.outputs[rank].kind = EdgeKind::Hadamard;
        }
    }
    g
}

/// Plugs every input with |0⟩ and normalizes the result into a closed
/// graph-like diagram with Hadamard output legs.
pub fn close_diagram(d: &ZXDiagram) -> ZXDiagram {
    let mut g = to_graph_like(d);
    for b in std::mem::take(&mut g.inputs) {
        // |0⟩ through a Hadamard leg is |+⟩, which the spider absorbs
        if b.kind == EdgeKind::Regular {
            let p = g.z(Phase::ZERO);
            g.add_wire(p, b.spider, EdgeKind::Hadamard).expect("exists");
        }
    }
    normalize(&g)
}

/// Even and odd children of every split parent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitMap {
    pub children: BTreeMap<SpiderId, (SpiderId, SpiderId)>,
}

impl SplitMap {
    /// Parent of a child and whether it is the odd one.
    pub fn parent_of(&self, child: SpiderId) -> Option<(SpiderId, bool)> {
        self.children.iter().find_map(|(&p, &(e, o))| match child {
            c if c == e => Some((p, false)),
            c if c == o => Some((p, true)),
            _ => None,
        })
    }

    pub fn child_parents(&self) -> BTreeMap<SpiderId, (SpiderId, bool)> {
        let mut m = BTreeMap::new();
        for (&p, &(e, o)) in &self.children {
            m.insert(e, (p, false));
            m.insert(o, (p, true));
        }
        m
    }

    /// Writes the phases `α − β` and `β` onto the children.
    pub fn bind(&self, d: &mut ZXDiagram, alpha: &BTreeMap<SpiderId, Phase>, beta: &BTreeMap<SpiderId, Phase>) {
        for (p, &(e, o)) in &self.children {
            let b = beta.get(p).copied().unwrap_or(Phase::ZERO);
            d.set_phase(e, alpha[p] - b);
            d.set_phase(o, b);
        }
    }
}

/// Splits every spider of a closed graph-like diagram into an even child
/// carrying `α` and an odd child carrying `0`, joined by a regular wire.
/// The odd child takes the output leg and the wires toward the outputs.
pub fn split_phases(d: &ZXDiagram) -> Result<(ZXDiagram, SplitMap)> {
    if let Some(v) = is_graph_like(d).first() {
        return Err(Error::NotGraphLike(v.to_string()));
    }
    let depth = compute_depths(d)?;
    let mut out = ZXDiagram::new();
    let mut split = SplitMap::default();
    for (id, s) in d.spiders() {
        let e = out.z(s.phase);
        let o = out.z(Phase::ZERO);
        out.add_wire(e, o, EdgeKind::Regular)?;
        split.children.insert(id, (e, o));
    }
    for w in d.wires() {
        let (a, b) = (w.a.min(w.b), w.a.max(w.b));
        let (ea, oa) = split.children[&a];
        let (eb, ob) = split.children[&b];
        let (x, y) = match depth[&a].cmp(&depth[&b]) {
            std::cmp::Ordering::Greater => (oa, eb),
            std::cmp::Ordering::Less => (ob, ea),
            std::cmp::Ordering::Equal => (ea, eb),
        };
        out.add_wire(x, y, EdgeKind::Hadamard)?;
    }
    for b in &d.inputs {
        out.add_input(split.children[&b.spider].0, b.kind);
    }
    for b in &d.outputs {
        out.add_output(split.children[&b.spider].1, b.kind);
    }
    Ok((out, split))
}

/// The regular-wire partner of `v`, if any.
fn regular_partner(d: &ZXDiagram, v: SpiderId) -> Option<SpiderId> {
    d.wires().iter().find(|w| w.kind == EdgeKind::Regular && w.touches(v) && !w.is_self_loop()).map(|w| w.other(v))
}

/// Moves every Hadamard wire inside one block onto the regular-wired
/// partner of its smaller endpoint, which sits in an adjacent block.
pub fn externalize_internal_edges(d: &ZXDiagram, p: &BlockPartition) -> Result<ZXDiagram> {
    let mut g = d.clone();
    let internal: Vec<usize> = g
        .wires()
        .iter()
        .enumerate()
        .filter(|(_, w)| w.kind == EdgeKind::Hadamard && !w.is_self_loop() && !p.is_inter_block(w.a, w.b))
        .map(|(i, _)| i)
        .collect();
    for i in internal {
        let w = g.wires()[i];
        let (a, b) = (w.a.min(w.b), w.a.max(w.b));
        let partner = regular_partner(&g, a)
            .filter(|&q| p.block(q).zip(p.block(a)).is_some_and(|(x, y)| x.abs_diff(y) == 1))
            .ok_or_else(|| Error::InvalidArgument(format!("internal wire {a}-{b} has no partner in an adjacent block")))?;
        if !g.wires_between(partner, b).is_empty() {
            return Err(Error::InvalidArgument(format!("moving wire {a}-{b} onto {partner} would duplicate a wire")));
        }
        let wire = &mut g.wires_mut()[i];
        if wire.a == a {
            wire.a = partner;
        } else {
            wire.b = partner;
        }
    }
    Ok(g)
}

fn fresh_edge_id<R: Rng + ?Sized>(rng: &mut R, used: &mut BTreeSet<u64>) -> u64 {
    loop {
        let id = rng.gen();
        if used.insert(id) {
            return id;
        }
    }
}

/// Subdivides every inter-block Hadamard wire `a-H-b` into
/// `a-H-W-H-W'-H-b` with `W` in `a`'s block and `W'` in `b`'s. The
/// middle wires receive fresh edge ids.
pub fn subdivide_interblock_edges<R: Rng + ?Sized>(
    d: &ZXDiagram,
    p: &BlockPartition,
    rng: &mut R,
) -> Result<(ZXDiagram, BlockPartition, BTreeMap<WireKey, u64>)> {
    let mut g = d.clone();
    let mut part = p.clone();
    let mut ids = BTreeMap::new();
    let mut used = BTreeSet::new();
    let targets: Vec<(SpiderId, SpiderId)> = d
        .wires()
        .iter()
        .filter(|w| w.kind == EdgeKind::Hadamard && !w.is_self_loop() && p.is_inter_block(w.a, w.b))
        .map(|w| (w.a, w.b))
        .collect();
    g.wires_mut().retain(|w| !(w.kind == EdgeKind::Hadamard && !w.is_self_loop() && p.is_inter_block(w.a, w.b)));
    for (a, b) in targets {
        let (ba, bb) = (part.block(a), part.block(b));
        let (Some(ba), Some(bb)) = (ba, bb) else {
            return Err(Error::InvalidArgument(format!("wire {a}-{b} has an unassigned endpoint")));
        };
        let w = g.z(Phase::ZERO);
        let w2 = g.z(Phase::ZERO);
        g.add_wire(a, w, EdgeKind::Hadamard)?;
        g.add_wire(w, w2, EdgeKind::Hadamard)?;
        g.add_wire(w2, b, EdgeKind::Hadamard)?;
        part.assign(w, ba);
        part.assign(w2, bb);
        ids.insert(wire_key(w, w2), fresh_edge_id(rng, &mut used));
    }
    Ok((g, part, ids))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DummyPolicy {
    None,
    /// Pad every hub to the largest hub degree of its block.
    #[default]
    Max,
}

impl std::str::FromStr for DummyPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<DummyPolicy> {
        match s {
            "none" => Ok(DummyPolicy::None),
            "max" => Ok(DummyPolicy::Max),
            _ => Err(Error::InvalidArgument(format!("unknown padding policy `{s}`"))),
        }
    }
}

/// Blocks of the appendage `(w, w')` for a hub in block `j`.
fn dummy_blocks(j: usize, n: usize) -> (usize, usize) {
    match j {
        0 if n <= 2 => (1, 0),
        0 => (1, 2),
        1 => (0, 1),
        _ => (j - 1, j - 2),
    }
}

/// Hub spiders: those with a regular wire, i.e. split children.
pub fn hubs(d: &ZXDiagram) -> Vec<SpiderId> {
    d.ids().into_iter().filter(|&v| regular_partner(d, v).is_some()).collect()
}

/// Appends `hub-H-w-H-w'` chains until `hub` has degree `target`.
pub fn pad_hub(d: &mut ZXDiagram, p: &mut BlockPartition, hub: SpiderId, target: usize) -> Result<()> {
    d.spider(hub)?;
    let j = p.block(hub).ok_or_else(|| Error::InvalidArgument(format!("{hub} has no block")))?;
    let current = d.degree(hub);
    if target < current {
        return Err(Error::InvalidArgument(format!("{hub} already has degree {current} > {target}")));
    }
    let (bw, bw2) = dummy_blocks(j, p.block_count());
    for _ in current..target {
        let w = d.z(Phase::ZERO);
        let w2 = d.z(Phase::ZERO);
        d.add_wire(hub, w, EdgeKind::Hadamard)?;
        d.add_wire(w, w2, EdgeKind::Hadamard)?;
        p.assign(w, bw);
        p.assign(w2, bw2);
    }
    Ok(())
}

pub fn add_dummy_resources(
    d: &ZXDiagram,
    p: &BlockPartition,
    policy: DummyPolicy,
) -> Result<(ZXDiagram, BlockPartition)> {
    let mut g = d.clone();
    let mut part = p.clone();
    if policy == DummyPolicy::None {
        return Ok((g, part));
    }
    let hub_list = hubs(d);
    let mut max_degree: BTreeMap<usize, usize> = BTreeMap::new();
    for &h in &hub_list {
        let k = part.block(h).ok_or_else(|| Error::InvalidArgument(format!("{h} has no block")))?;
        let e = max_degree.entry(k).or_default();
        *e = (*e).max(d.degree(h));
    }
    for h in hub_list {
        let target = max_degree[&part.block(h).unwrap()];
        pad_hub(&mut g, &mut part, h, target)?;
    }
    Ok((g, part))
}

/// Gives every inter-block wire without an id a fresh one.
pub fn assign_edge_ids<R: Rng + ?Sized>(
    d: &ZXDiagram,
    p: &BlockPartition,
    ids: &mut BTreeMap<WireKey, u64>,
    rng: &mut R,
) {
    let mut used: BTreeSet<u64> = ids.values().copied().collect();
    for w in d.wires() {
        let key = wire_key(w.a, w.b);
        if p.is_inter_block(w.a, w.b) && !ids.contains_key(&key) {
            ids.insert(key, fresh_edge_id(rng, &mut used));
        }
    }
}

/// Every spider has at most one regular wire and every wire stays inside
/// a block or joins adjacent blocks.
pub fn check_locality(d: &ZXDiagram, p: &BlockPartition) -> Result<()> {
    for v in d.ids() {
        let regular = d.wires().iter().filter(|w| w.kind == EdgeKind::Regular && w.touches(v)).count();
        if regular > 1 {
            return Err(Error::InvalidArgument(format!("{v} has {regular} regular wires")));
        }
        if p.block(v).is_none() {
            return Err(Error::InvalidArgument(format!("{v} has no block")));
        }
    }
    for w in d.wires() {
        let (a, b) = (p.block(w.a).unwrap(), p.block(w.b).unwrap());
        if a.abs_diff(b) > 1 {
            return Err(Error::InvalidArgument(format!("wire {}-{} joins blocks {a} and {b}", w.a, w.b)));
        }
    }
    Ok(())
}

/// A measurement order for the spiders of `d`: a linearization of the
/// flow's ordering constraints (lifted to every member of a fusion group)
/// with outputs last, chosen greedily to keep few qubits live. Several
/// seeded tie-breaking passes are tried and the narrowest order is kept.
pub fn measurement_order(d: &ZXDiagram, flow: &SemiGraphFlow) -> Result<Vec<SpiderId>> {
    use rand::SeedableRng;
    use MeasurementPlane::*;
    let g = &flow.reduced;
    let mut preds: BTreeMap<SpiderId, BTreeSet<SpiderId>> = g.vertices().map(|v| (v, BTreeSet::new())).collect();
    for (&u, set) in &flow.flow.f {
        let odd = crate::flow::odd_neighborhood(g, set)?;
        for &v in set.iter().filter(|&&v| v != u) {
            if !matches!(g.plane(v), Some(X | Y)) {
                preds.get_mut(&v).unwrap().insert(u);
            }
        }
        for &v in odd.iter().filter(|&&v| v != u) {
            if !matches!(g.plane(v), Some(Y | Z)) {
                preds.get_mut(&v).unwrap().insert(u);
            }
        }
    }
    let non_outputs: Vec<SpiderId> = g.vertices().filter(|v| !g.is_output(*v)).collect();
    for o in g.outputs.iter() {
        preds.get_mut(o).unwrap().extend(non_outputs.iter().copied());
    }
    let mut group_size: BTreeMap<SpiderId, usize> = BTreeMap::new();
    for &r in flow.group_of.values() {
        *group_size.entry(r).or_default() += 1;
    }
    let partner: BTreeMap<SpiderId, SpiderId> = d
        .wires()
        .iter()
        .filter(|w| w.kind == EdgeKind::Regular && !w.is_self_loop())
        .flat_map(|w| [(w.a, w.b), (w.b, w.a)])
        .collect();
    let closure: BTreeMap<SpiderId, Vec<SpiderId>> = d
        .ids()
        .into_iter()
        .map(|v| {
            let mut c = d.neighbors(v);
            c.insert(v);
            let extra: Vec<SpiderId> = c.iter().filter_map(|x| partner.get(x).copied()).collect();
            c.extend(extra);
            (v, c.into_iter().collect())
        })
        .collect();
    let pass = |noise: Option<u64>| -> Result<(usize, Vec<SpiderId>)> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(noise.unwrap_or(0));
        let mut allocated: BTreeSet<SpiderId> = BTreeSet::new();
        let mut measured: BTreeSet<SpiderId> = BTreeSet::new();
        // members of each reduced vertex still to be measured
        let mut remaining = group_size.clone();
        let mut order = Vec::with_capacity(d.spider_count());
        let mut width = 0;
        while order.len() < d.spider_count() {
            let best = flow
                .group_of
                .iter()
                .filter(|(v, r)| !measured.contains(*v) && preds[*r].iter().all(|p| remaining[p] == 0))
                .map(|(&v, _)| {
                    let fresh = closure[&v].iter().filter(|x| !allocated.contains(*x)).count() as i64;
                    let jitter = if noise.is_some() { rng.gen_range(0..6u32) } else { 0 };
                    (fresh - 1, jitter, v)
                })
                .min()
                .ok_or(Error::InvalidFlow("flow ordering constraints are cyclic".into()))?
                .2;
            allocated.extend(closure[&best].iter().copied());
            width = width.max(allocated.len() - measured.len());
            measured.insert(best);
            *remaining.get_mut(&flow.group_of[&best]).unwrap() -= 1;
            order.push(best);
        }
        Ok((width, order))
    };
    let mut best = pass(None)?;
    for seed in 1..=64 {
        let candidate = pass(Some(seed))?;
        if candidate.0 < best.0 {
            best = candidate;
        }
    }
    Ok(best.1)
}

/// Largest number of simultaneously live qubits when measuring in
/// `order` with lazy allocation.
pub fn live_width(d: &ZXDiagram, order: &[SpiderId]) -> usize {
    let partner: BTreeMap<SpiderId, SpiderId> = d
        .wires()
        .iter()
        .filter(|w| w.kind == EdgeKind::Regular && !w.is_self_loop())
        .flat_map(|w| [(w.a, w.b), (w.b, w.a)])
        .collect();
    let mut live = BTreeSet::new();
    let mut measured = BTreeSet::new();
    let mut width = 0;
    for &v in order {
        let mut need: BTreeSet<SpiderId> = d.neighbors(v);
        need.insert(v);
        let extra: Vec<SpiderId> = need.iter().filter_map(|x| partner.get(x).copied()).collect();
        need.extend(extra);
        for x in need {
            if !measured.contains(&x) {
                live.insert(x);
            }
        }
        width = width.max(live.len());
        live.remove(&v);
        measured.insert(v);
    }
    width
}

/// One intermediate diagram of the preparation pipeline.
#[derive(Clone, Debug)]
pub struct Stage {
    pub name: &'static str,
    pub diagram: ZXDiagram,
}

#[derive(Clone, Debug)]
pub struct ObfuscatedProgram {
    /// The closed graph-like diagram before splitting.
    pub closed: ZXDiagram,
    /// The final split diagram with children phases `(α, 0)`.
    pub diagram: ZXDiagram,
    pub partition: BlockPartition,
    pub split: SplitMap,
    /// Parent phases.
    pub alpha: BTreeMap<SpiderId, Phase>,
    /// Phase group exponent for `β`: multiples of `π/2^den_pow`.
    pub den_pow: u32,
    pub edge_ids: BTreeMap<WireKey, u64>,
    pub flow: SemiGraphFlow,
    pub order: Vec<SpiderId>,
    /// Parents carrying the output legs, by output rank.
    pub output_parents: Vec<SpiderId>,
}

impl ObfuscatedProgram {
    /// Rebuilds the derived fields (flow, order, phases) from the parts a
    /// client stores.
    pub fn from_parts(
        closed: ZXDiagram,
        diagram: ZXDiagram,
        partition: BlockPartition,
        split: SplitMap,
        edge_ids: BTreeMap<WireKey, u64>,
    ) -> Result<ObfuscatedProgram> {
        check_locality(&diagram, &partition)?;
        let flow = semi_graph_flow(&diagram, usize::MAX)?.ok_or(Error::NoFlow)?;
        let order = measurement_order(&diagram, &flow)?;
        let alpha: BTreeMap<SpiderId, Phase> = closed.spiders().map(|(id, s)| (id, s.phase)).collect();
        let den_pow = alpha.values().map(|p| p.den_pow()).max().unwrap_or(0).max(2);
        let output_parents = closed.output_spiders();
        Ok(ObfuscatedProgram { closed, diagram, partition, split, alpha, den_pow, edge_ids, flow, order, output_parents })
    }

    pub fn block_count(&self) -> usize {
        self.partition.block_count()
    }

    /// Agent executing block `k` when `agents` agents take blocks in turn.
    pub fn agent_of_block(k: usize, agents: usize) -> usize {
        k % agents
    }

    /// Reduced flow vertex of a spider.
    pub fn group(&self, v: SpiderId) -> SpiderId {
        self.flow.group_of[&v]
    }

    /// Unmasked, uncorrected angle of `v` under the given secrets.
    pub fn base_angle(&self, v: SpiderId, s: &SampleSecrets) -> Phase {
        match self.split.parent_of(v) {
            Some((p, false)) => self.alpha[&p] - s.beta[&p],
            Some((p, true)) => s.beta[&p],
            None => self.diagram.phase(v),
        }
    }

    /// Angles sent to the agents before adaptive corrections.
    pub fn masked_angles(&self, s: &SampleSecrets) -> BTreeMap<SpiderId, Phase> {
        self.diagram.ids().into_iter().map(|v| (v, self.base_angle(v, s) + Phase::from_bit(s.mask[&v]))).collect()
    }

    pub fn public_views(&self) -> Vec<BlockView> {
        (0..self.block_count()).map(|k| self.view(k)).collect()
    }

    fn view(&self, k: usize) -> BlockView {
        let local = self.partition.members(k);
        let index: BTreeMap<SpiderId, usize> = local.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let planes = local
            .iter()
            .map(|&v| {
                if self.split.parent_of(v).is_some() {
                    MeasurementPlane::XY
                } else {
                    MeasurementPlane::from_phase(self.diagram.phase(v))
                }
            })
            .collect();
        let mut wires = Vec::new();
        let mut stubs = Vec::new();
        for w in self.diagram.wires() {
            match (index.get(&w.a), index.get(&w.b)) {
                (Some(&a), Some(&b)) => wires.push((a.min(b), a.max(b))),
                (Some(&a), None) | (None, Some(&a)) => stubs.push((a, self.edge_ids[&wire_key(w.a, w.b)])),
                (None, None) => {}
            }
        }
        wires.sort_unstable();
        stubs.sort_unstable();
        let slots = self.order.iter().filter_map(|v| index.get(v).copied()).collect();
        BlockView { block: k, size: local.len(), planes, wires, stubs, slots }
    }
}

/// What the agent running one block is told: local qubits, local wires,
/// edge ids of its halves of shared pairs, and its measurement sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockView {
    pub block: usize,
    pub size: usize,
    pub planes: Vec<MeasurementPlane>,
    pub wires: Vec<(usize, usize)>,
    pub stubs: Vec<(usize, u64)>,
    /// Local qubits in measurement order.
    pub slots: Vec<usize>,
}

/// Per-sample client secrets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSecrets {
    pub beta: BTreeMap<SpiderId, Phase>,
    pub mask: BTreeMap<SpiderId, bool>,
    /// Per block, the label shown to the agent for each local qubit.
    pub shuffle: Vec<Vec<usize>>,
}

/// Draws fresh `β`, mask bits (all zero when `masks` is false) and label
/// shuffles.
pub fn bind_secrets<R: Rng + ?Sized>(program: &ObfuscatedProgram, rng: &mut R, masks: bool) -> SampleSecrets {
    let beta = program.split.children.keys().map(|&p| (p, Phase::random(rng, program.den_pow))).collect();
    let mask = program.diagram.ids().into_iter().map(|v| (v, masks && rng.gen::<bool>())).collect();
    let shuffle = (0..program.block_count())
        .map(|k| {
            let mut labels: Vec<usize> = (0..program.partition.members(k).len()).collect();
            labels.shuffle(rng);
            labels
        })
        .collect();
    SampleSecrets { beta, mask, shuffle }
}

/// The full preparation pipeline, keeping every intermediate diagram.
pub fn prepare_with_stages<R: Rng + ?Sized>(
    d: &ZXDiagram,
    policy: DummyPolicy,
    rng: &mut R,
) -> Result<(ObfuscatedProgram, Vec<Stage>)> {
    let closed = close_diagram(d);
    let (split, map) = split_phases(&closed)?;
    let partition = BlockPartition::from_depths(compute_depths(&split)?);
    let external = externalize_internal_edges(&split, &partition)?;
    let (subdivided, partition, mut ids) = subdivide_interblock_edges(&external, &partition, rng)?;
    let (padded, partition) = add_dummy_resources(&subdivided, &partition, policy)?;
    assign_edge_ids(&padded, &partition, &mut ids, rng);
    let stages = vec![
        Stage { name: "closed", diagram: closed.clone() },
        Stage { name: "split", diagram: split },
        Stage { name: "externalize", diagram: external },
        Stage { name: "subdivide", diagram: subdivided },
        Stage { name: "pad", diagram: padded.clone() },
    ];
    let program = ObfuscatedProgram::from_parts(closed, padded, partition, map, ids)?;
    Ok((program, stages))
}

pub fn prepare<R: Rng + ?Sized>(d: &ZXDiagram, policy: DummyPolicy, rng: &mut R) -> Result<ObfuscatedProgram> {
    Ok(prepare_with_stages(d, policy, rng)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{from_circuit, Circuit};
    use crate::graphlike::reduce_semi_graph_like;
    use crate::tensor::{contract_tensor, equal_up_to_scalar};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn same_tensor(a: &ZXDiagram, b: &ZXDiagram) -> bool {
        equal_up_to_scalar(&contract_tensor(a).unwrap(), &contract_tensor(b).unwrap(), 1e-9).unwrap()
    }

    /// One spider with phase `alpha` and a Hadamard output leg.
    fn single(alpha: Phase) -> ZXDiagram {
        let mut d = ZXDiagram::new();
        let s = d.z(alpha);
        d.add_output(s, EdgeKind::Hadamard);
        d
    }

    fn program(src: &str, seed: u64) -> ObfuscatedProgram {
        let d = from_circuit(&Circuit::parse(src).unwrap()).unwrap();
        prepare(&d, DummyPolicy::Max, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn depths_on_a_path() {
        let mut d = ZXDiagram::new();
        let a = d.z(Phase::ZERO);
        let v = d.z(Phase::ZERO);
        let o = d.z(Phase::ZERO);
        d.add_wire(a, v, EdgeKind::Hadamard).unwrap();
        d.add_wire(v, o, EdgeKind::Hadamard).unwrap();
        d.add_input(a, EdgeKind::Regular);
        d.add_output(o, EdgeKind::Regular);
        let depths = compute_depths(&d).unwrap();
        assert_eq!(depths.values().copied().collect::<Vec<_>>(), vec![2, 1, 0]);
        d.z(Phase::ZERO);
        assert!(matches!(compute_depths(&d), Err(Error::Unreachable(_))));
        assert!(compute_depths(&ZXDiagram::new()).is_err());
    }

    #[test]
    fn split_of_one_spider() {
        let alpha = Phase::new(1, 1);
        let d = single(alpha);
        let (s, map) = split_phases(&d).unwrap();
        assert_eq!(s.spider_count(), 2);
        assert_eq!(s.wire_count(), 1);
        assert_eq!(s.wires()[0].kind, EdgeKind::Regular);
        let (e, o) = map.children[&SpiderId(0)];
        let mut bound = s.clone();
        let alphas = BTreeMap::from([(SpiderId(0), alpha)]);
        map.bind(&mut bound, &alphas, &BTreeMap::from([(SpiderId(0), Phase::new(1, 3))]));
        assert_eq!(bound.phase(e), Phase::new(3, 3));
        assert_eq!(bound.phase(o), Phase::new(1, 3));
        assert_eq!(bound.phase(e) + bound.phase(o), alpha);
        map.bind(&mut bound, &alphas, &BTreeMap::from([(SpiderId(0), Phase::ZERO)]));
        assert_eq!((bound.phase(e), bound.phase(o)), (alpha, Phase::ZERO));
        let reduced = reduce_semi_graph_like(&bound).unwrap();
        assert_eq!(reduced.spider_count(), 1);
        assert!(same_tensor(&reduced, &d));
        assert_eq!(map.parent_of(o), Some((SpiderId(0), true)));
        assert_eq!(map.parent_of(e), Some((SpiderId(0), false)));
    }

    #[test]
    fn externalize_moves_same_depth_wires() {
        let mut d = ZXDiagram::new();
        let a = d.z(Phase::new(1, 2));
        let b = d.z(Phase::new(3, 2));
        d.add_wire(a, b, EdgeKind::Hadamard).unwrap();
        d.add_output(a, EdgeKind::Hadamard);
        d.add_output(b, EdgeKind::Hadamard);
        let (s, _) = split_phases(&d).unwrap();
        let p = BlockPartition::from_depths(compute_depths(&s).unwrap());
        let internal = |g: &ZXDiagram| {
            g.wires().iter().filter(|w| w.kind == EdgeKind::Hadamard && !p.is_inter_block(w.a, w.b)).count()
        };
        assert_eq!(internal(&s), 1);
        let x = externalize_internal_edges(&s, &p).unwrap();
        assert_eq!(internal(&x), 0);
        assert!(same_tensor(&x, &s));
        assert!(check_locality(&x, &p).is_ok());
        assert_eq!(externalize_internal_edges(&x, &p).unwrap(), x);
    }

    #[test]
    fn subdivision_of_one_edge() {
        let mut d = ZXDiagram::new();
        let a = d.z(Phase::ZERO);
        let b = d.z(Phase::ZERO);
        d.add_wire(a, b, EdgeKind::Hadamard).unwrap();
        let mut p = BlockPartition::default();
        p.assign(a, 0);
        p.assign(b, 1);
        let (g, q, ids) = subdivide_interblock_edges(&d, &p, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(g.spider_count(), 4);
        assert_eq!(g.wire_count(), 3);
        assert_eq!(ids.len(), 1);
        let (w, w2) = *ids.keys().next().unwrap();
        assert_eq!((q.block(w), q.block(w2)), (Some(0), Some(1)));
    }

    #[test]
    fn padding_one_hub() {
        let mut d = ZXDiagram::new();
        let hub = d.z(Phase::ZERO);
        let partner = d.z(Phase::ZERO);
        let other = d.z(Phase::ZERO);
        d.add_wire(hub, partner, EdgeKind::Regular).unwrap();
        d.add_wire(hub, other, EdgeKind::Hadamard).unwrap();
        let mut p = BlockPartition::default();
        p.assign(hub, 3);
        p.assign(partner, 2);
        p.assign(other, 4);
        let before = (d.spider_count(), d.wire_count());
        pad_hub(&mut d, &mut p, hub, 3).unwrap();
        assert_eq!(d.degree(hub), 3);
        assert_eq!((d.spider_count(), d.wire_count()), (before.0 + 2, before.1 + 2));
        let new: Vec<SpiderId> = d.ids().into_iter().filter(|v| v.0 > 2).collect();
        assert_eq!(new.iter().map(|&v| p.block(v).unwrap()).collect::<Vec<_>>(), vec![2, 1]);
        assert!(pad_hub(&mut d, &mut p, hub, 2).is_err());
        assert!(pad_hub(&mut d, &mut p, SpiderId(99), 5).is_err());
        assert_eq!(dummy_blocks(1, 4), (0, 1));
    }

    #[test]
    fn no_padding_policy_is_identity() {
        let c = from_circuit(&Circuit::parse("qubits 2\nH 0\nCX 0 1\nT 1\n").unwrap()).unwrap();
        let (s, _) = split_phases(&close_diagram(&c)).unwrap();
        let p = BlockPartition::from_depths(compute_depths(&s).unwrap());
        let (g, q) = add_dummy_resources(&s, &p, DummyPolicy::None).unwrap();
        assert_eq!((g, q), (s, p));
        assert_eq!("max".parse::<DummyPolicy>().unwrap(), DummyPolicy::Max);
        assert!("most".parse::<DummyPolicy>().is_err());
    }

    #[test]
    fn pad_to_max_equalizes_hub_degrees() {
        let p = program("qubits 3\nH 0\nCX 0 1\nT 1\nCX 1 2\nH 2\nT 0\n", 4);
        for k in 0..p.block_count() {
            let degrees: BTreeSet<usize> = hubs(&p.diagram)
                .into_iter()
                .filter(|&h| p.partition.block(h) == Some(k))
                .map(|h| p.diagram.degree(h))
                .collect();
            assert!(degrees.len() <= 1, "block {k}: {degrees:?}");
        }
    }

    #[test]
    fn bind_example_angles() {
        let p = program("qubits 1\nH 0\nT 0\nH 0\n", 2);
        let (&parent, &(e, o)) = p.split.children.iter().find(|(v, _)| p.alpha[v] == Phase::new(1, 2)).unwrap();
        let mut s = bind_secrets(&p, &mut ChaCha8Rng::seed_from_u64(0), false);
        s.beta.insert(parent, Phase::PI);
        s.mask.insert(e, true);
        let angles = p.masked_angles(&s);
        assert_eq!((angles[&e], angles[&o]), (Phase::new(1, 2), Phase::PI));
        s.beta.insert(parent, Phase::ZERO);
        s.mask.insert(e, false);
        let angles = p.masked_angles(&s);
        assert_eq!((angles[&e], angles[&o]), (Phase::new(1, 2), Phase::ZERO));
    }

    #[test]
    fn identity_circuit_gives_two_blocks() {
        let p = program("qubits 1\n", 0);
        assert_eq!(p.block_count(), 2);
        assert_eq!(p.diagram.spider_count(), 2);
        let views = p.public_views();
        assert_eq!(views.iter().map(|v| v.size).collect::<Vec<_>>(), vec![1, 1]);
    }

    #[test]
    fn views_hold_no_remote_endpoints() {
        let p = program("qubits 2\nH 0\nCX 0 1\nT 1\nH 1\n", 9);
        let views = p.public_views();
        let stubs: usize = views.iter().map(|v| v.stubs.len()).sum();
        assert_eq!(stubs, 2 * p.edge_ids.len());
        for v in &views {
            assert!(v.wires.iter().all(|&(a, b)| a < v.size && b < v.size));
            assert_eq!(v.slots.len(), v.size);
        }
        let ids: BTreeSet<u64> = p.edge_ids.values().copied().collect();
        assert_eq!(ids.len(), p.edge_ids.len());
    }

    #[test]
    fn stages_preserve_tensor() {
        let d = from_circuit(&Circuit::parse("qubits 2\nH 0\nT 0\nCX 0 1\nS 1\nH 1\n").unwrap()).unwrap();
        let (p, stages) = prepare_with_stages(&d, DummyPolicy::Max, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let reference = contract_tensor(&stages[0].diagram).unwrap();
        for s in &stages[1..] {
            let t = contract_tensor(&s.diagram).unwrap();
            assert!(equal_up_to_scalar(&t, &reference, 1e-9).unwrap(), "{}", s.name);
        }
        assert!(check_locality(&p.diagram, &p.partition).is_ok());
    }
}
