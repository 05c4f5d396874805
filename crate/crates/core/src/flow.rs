//! Open graphs, Pauli-flow verification and search.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diagram::{EdgeKind, SpiderId, ZXDiagram};
use crate::error::{Error, Result};
use crate::gf2::{self, BitVec};
use crate::graphlike::is_graph_like;
use crate::phase::Phase;

pub use crate::graphlike::reduce_semi_graph_like;

/// Default vertex limit for [`find_flow`].
pub const FIND_FLOW_LIMIT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasurementPlane {
    XY,
    XZ,
    YZ,
    X,
    Y,
    Z,
}

impl MeasurementPlane {
    /// Phases 0 and π are measured in the X plane, everything else in XY.
    pub fn from_phase(p: Phase) -> MeasurementPlane {
        if p.is_pauli() {
            MeasurementPlane::X
        } else {
            MeasurementPlane::XY
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenGraph {
    adj: BTreeMap<SpiderId, BTreeSet<SpiderId>>,
    pub inputs: BTreeSet<SpiderId>,
    pub outputs: BTreeSet<SpiderId>,
    pub planes: BTreeMap<SpiderId, MeasurementPlane>,
}

impl OpenGraph {
    pub fn new(
        vertices: impl IntoIterator<Item = SpiderId>,
        edges: impl IntoIterator<Item = (SpiderId, SpiderId)>,
        inputs: impl IntoIterator<Item = SpiderId>,
        outputs: impl IntoIterator<Item = SpiderId>,
        planes: BTreeMap<SpiderId, MeasurementPlane>,
    ) -> Result<OpenGraph> {
        let mut adj: BTreeMap<SpiderId, BTreeSet<SpiderId>> =
            vertices.into_iter().map(|v| (v, BTreeSet::new())).collect();
        for (a, b) in edges {
            for v in [a, b] {
                if !adj.contains_key(&v) {
                    return Err(Error::UnknownSpider(v));
                }
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on {a}")));
            }
            adj.get_mut(&a).unwrap().insert(b);
            adj.get_mut(&b).unwrap().insert(a);
        }
        let g = OpenGraph {
            adj,
            inputs: inputs.into_iter().collect(),
            outputs: outputs.into_iter().collect(),
            planes,
        };
        for v in g.inputs.iter().chain(&g.outputs).chain(g.planes.keys()) {
            if !g.adj.contains_key(v) {
                return Err(Error::UnknownSpider(*v));
            }
        }
        for v in g.vertices() {
            if !g.outputs.contains(&v) && !g.planes.contains_key(&v) {
                return Err(Error::InvalidArgument(format!("no measurement plane for {v}")));
            }
        }
        Ok(g)
    }

    /// The open graph of a graph-like diagram, with planes derived from
    /// phases.
    pub fn from_diagram(d: &ZXDiagram) -> Result<OpenGraph> {
        if let Some(v) = is_graph_like(d).first() {
            return Err(Error::NotGraphLike(v.to_string()));
        }
        let outputs: BTreeSet<SpiderId> = d.output_spiders().into_iter().collect();
        let planes = d
            .spiders()
            .filter(|(id, _)| !outputs.contains(id))
            .map(|(id, s)| (id, MeasurementPlane::from_phase(s.phase)))
            .collect();
        OpenGraph::new(
            d.ids(),
            d.wires().iter().map(|w| (w.a, w.b)),
            d.input_spiders(),
            outputs.iter().copied(),
            planes,
        )
    }

    pub fn vertices(&self) -> impl Iterator<Item = SpiderId> + '_ {
        self.adj.keys().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn contains(&self, v: SpiderId) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn neighbors(&self, v: SpiderId) -> &BTreeSet<SpiderId> {
        &self.adj[&v]
    }

    pub fn edges(&self) -> Vec<(SpiderId, SpiderId)> {
        self.adj
            .iter()
            .flat_map(|(&a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
            .collect()
    }

    pub fn plane(&self, v: SpiderId) -> Option<MeasurementPlane> {
        self.planes.get(&v).copied()
    }

    pub fn is_output(&self, v: SpiderId) -> bool {
        self.outputs.contains(&v)
    }
}

/// Correction sets plus a layered partial order (earlier layers first).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PauliFlowData {
    pub f: BTreeMap<SpiderId, BTreeSet<SpiderId>>,
    pub layers: Vec<Vec<SpiderId>>,
}

impl PauliFlowData {
    pub fn layer_of(&self) -> BTreeMap<SpiderId, usize> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().map(move |&v| (v, i)))
            .collect()
    }
}

pub fn odd_neighborhood(g: &OpenGraph, k: &BTreeSet<SpiderId>) -> Result<BTreeSet<SpiderId>> {
    let mut odd = BTreeSet::new();
    for &v in k {
        if !g.contains(v) {
            return Err(Error::UnknownSpider(v));
        }
        for &n in g.neighbors(v) {
            if !odd.remove(&n) {
                odd.insert(n);
            }
        }
    }
    Ok(odd)
}

/// A failed flow condition. Condition 0 covers structural problems: a
/// missing correction set, an input inside one, or a vertex outside the
/// layers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FlowViolation {
    pub condition: u8,
    pub u: SpiderId,
    pub v: Option<SpiderId>,
}

impl fmt::Display for FlowViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.v {
            Some(v) => write!(f, "condition {} fails for u={} v={}", self.condition, self.u, v),
            None => write!(f, "condition {} fails for u={}", self.condition, self.u),
        }
    }
}

/// Checks every Pauli-flow condition for every non-output vertex.
pub fn verify_pauli_flow(g: &OpenGraph, flow: &PauliFlowData) -> Vec<FlowViolation> {
    use MeasurementPlane::*;
    let mut out = Vec::new();
    let layer = flow.layer_of();
    for v in g.vertices() {
        if !layer.contains_key(&v) {
            out.push(FlowViolation { condition: 0, u: v, v: None });
        }
    }
    let before = |u: SpiderId, v: SpiderId| match (layer.get(&u), layer.get(&v)) {
        (Some(a), Some(b)) => a < b,
        _ => false,
    };
    for u in g.vertices().filter(|&u| !g.is_output(u)) {
        let Some(fu) = flow.f.get(&u) else {
            out.push(FlowViolation { condition: 0, u, v: None });
            continue;
        };
        if let Some(&bad) = fu.iter().find(|&&v| !g.contains(v) || g.inputs.contains(&v)) {
            out.push(FlowViolation { condition: 0, u, v: Some(bad) });
            continue;
        }
        let odd = odd_neighborhood(g, fu).expect("vertices checked above");
        let lam = g.plane(u).expect("non-outputs carry planes");
        let plane_of = |v: SpiderId| g.plane(v);
        for &v in fu {
            if v != u && !matches!(plane_of(v), Some(X) | Some(Y)) && !before(u, v) {
                out.push(FlowViolation { condition: 1, u, v: Some(v) });
            }
        }
        for &v in &odd {
            if v != u && !matches!(plane_of(v), Some(Y) | Some(Z)) && !before(u, v) {
                out.push(FlowViolation { condition: 2, u, v: Some(v) });
            }
        }
        for v in g.vertices() {
            if v != u && plane_of(v) == Some(Y) && !before(u, v) && fu.contains(&v) != odd.contains(&v) {
                out.push(FlowViolation { condition: 3, u, v: Some(v) });
            }
        }
        let (in_f, in_odd) = (fu.contains(&u), odd.contains(&u));
        let failed = match lam {
            XY if in_f || !in_odd => Some(4),
            XZ if !in_f || !in_odd => Some(5),
            YZ if !in_f || in_odd => Some(6),
            X if !in_odd => Some(7),
            Z if !in_f => Some(8),
            Y if in_f == in_odd => Some(9),
            _ => None,
        };
        if let Some(c) = failed {
            out.push(FlowViolation { condition: c, u, v: None });
        }
    }
    out.sort();
    out
}

/// Causal-flow search: repeatedly peel off vertices with a unique
/// unprocessed neighbour among the current correctors.
fn find_causal_flow(g: &OpenGraph) -> Option<PauliFlowData> {
    let mut processed: BTreeSet<SpiderId> = g.outputs.clone();
    let mut correctors: BTreeSet<SpiderId> = g.outputs.difference(&g.inputs).copied().collect();
    let mut f = BTreeMap::new();
    let mut layers = vec![g.outputs.iter().copied().collect::<Vec<_>>()];
    loop {
        let mut new_layer = BTreeSet::new();
        let mut used = BTreeSet::new();
        for &v in &correctors {
            let open: Vec<SpiderId> =
                g.neighbors(v).iter().copied().filter(|n| !processed.contains(n)).collect();
            if open.len() == 1 && !new_layer.contains(&open[0]) {
                f.insert(open[0], BTreeSet::from([v]));
                new_layer.insert(open[0]);
                used.insert(v);
            }
        }
        if new_layer.is_empty() {
            break;
        }
        processed.extend(new_layer.iter().copied());
        for v in used {
            correctors.remove(&v);
        }
        correctors.extend(new_layer.iter().copied().filter(|v| !g.inputs.contains(v)));
        layers.push(new_layer.into_iter().collect());
    }
    if processed.len() != g.vertex_count() {
        return None;
    }
    layers.reverse();
    Some(PauliFlowData { f, layers })
}

/// Layered Pauli-flow search for planes XY and X: each round solves, for
/// every unprocessed vertex, a GF(2) system asking for a correction set
/// whose odd neighbourhood avoids all unprocessed vertices except itself.
fn find_pauli_flow(g: &OpenGraph) -> Option<PauliFlowData> {
    use MeasurementPlane::*;
    if g.planes.values().any(|p| !matches!(p, XY | X)) {
        return None;
    }
    let mut later: BTreeSet<SpiderId> = g.outputs.clone();
    let mut f = BTreeMap::new();
    let mut layers = vec![g.outputs.iter().copied().collect::<Vec<_>>()];
    while later.len() < g.vertex_count() {
        let pending: Vec<SpiderId> = g.vertices().filter(|v| !later.contains(v)).collect();
        let row_index: BTreeMap<SpiderId, usize> = pending.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        // XY vertices are never their own correctors, and pending XY
        // vertices are not candidates, so one column set serves every u
        let cols: Vec<SpiderId> = g
            .vertices()
            .filter(|&c| !g.inputs.contains(&c))
            .filter(|&c| later.contains(&c) || g.plane(c) == Some(X))
            .collect();
        let mut rows = vec![BitVec::zeros(cols.len()); pending.len()];
        for (j, &c) in cols.iter().enumerate() {
            for n in g.neighbors(c) {
                if let Some(&i) = row_index.get(n) {
                    rows[i].set(j, true);
                }
            }
        }
        let targets: Vec<usize> = (0..pending.len()).collect();
        let mut layer = Vec::new();
        for (i, sol) in gf2::solve_unit_targets(&rows, cols.len(), &targets).into_iter().enumerate() {
            if let Some(x) = sol {
                let set = cols.iter().enumerate().filter(|(j, _)| x.get(*j)).map(|(_, &c)| c).collect();
                f.insert(pending[i], set);
                layer.push(pending[i]);
            }
        }
        if layer.is_empty() {
            return None;
        }
        later.extend(layer.iter().copied());
        layers.push(layer);
    }
    layers.reverse();
    Some(PauliFlowData { f, layers })
}

/// Finds a Pauli flow on graphs with at most [`FIND_FLOW_LIMIT`] vertices.
pub fn find_flow(g: &OpenGraph) -> Result<Option<PauliFlowData>> {
    find_flow_with_limit(g, FIND_FLOW_LIMIT)
}

pub fn find_flow_with_limit(g: &OpenGraph, limit: usize) -> Result<Option<PauliFlowData>> {
    if g.vertex_count() > limit {
        return Err(Error::SizeLimit(format!("{} vertices exceeds the flow search limit of {limit}", g.vertex_count())));
    }
    if let Some(flow) = find_causal_flow(g) {
        return Ok(Some(flow));
    }
    Ok(find_pauli_flow(g))
}

/// The flow of a semi-graph-like diagram: a flow on its reduced graph-like
/// diagram, plus the fusion groups that map split spiders to the reduced
/// vertex they were merged into.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemiGraphFlow {
    pub reduced: OpenGraph,
    pub flow: PauliFlowData,
    /// Reduced vertex of every spider of the semi-graph-like diagram.
    pub group_of: BTreeMap<SpiderId, SpiderId>,
}

impl SemiGraphFlow {
    pub fn members(&self, rep: SpiderId) -> Vec<SpiderId> {
        self.group_of.iter().filter(|(_, &r)| r == rep).map(|(&m, _)| m).collect()
    }

    /// The reduced flow with every vertex replaced by its whole group, so
    /// split siblings share their parent's layer.
    pub fn lifted(&self) -> PauliFlowData {
        let mut groups: BTreeMap<SpiderId, Vec<SpiderId>> = BTreeMap::new();
        for (&m, &r) in &self.group_of {
            groups.entry(r).or_default().push(m);
        }
        let layers = self
            .flow
            .layers
            .iter()
            .map(|l| l.iter().flat_map(|r| groups[r].iter().copied()).collect())
            .collect();
        let mut f = BTreeMap::new();
        for (r, set) in &self.flow.f {
            for &m in &groups[r] {
                f.insert(m, set.clone());
            }
        }
        PauliFlowData { f, layers }
    }
}

/// Connected components of the regular-wire subgraph, keyed by their
/// smallest spider id (the id that survives fusion).
pub fn fusion_groups(d: &ZXDiagram) -> BTreeMap<SpiderId, SpiderId> {
    let mut parent: BTreeMap<SpiderId, SpiderId> = d.ids().into_iter().map(|v| (v, v)).collect();
    fn root(p: &BTreeMap<SpiderId, SpiderId>, mut v: SpiderId) -> SpiderId {
        while p[&v] != v {
            v = p[&v];
        }
        v
    }
    for w in d.wires().iter().filter(|w| w.kind == EdgeKind::Regular) {
        let (ra, rb) = (root(&parent, w.a), root(&parent, w.b));
        if ra != rb {
            parent.insert(ra.max(rb), ra.min(rb));
        }
    }
    d.ids().into_iter().map(|v| (v, root(&parent, v))).collect()
}

/// Reduces `d`, searches a flow on the result (with vertex limit `limit`)
/// and keeps the fusion groups for lifting.
pub fn semi_graph_flow(d: &ZXDiagram, limit: usize) -> Result<Option<SemiGraphFlow>> {
    let groups = fusion_groups(d);
    let reduced_diagram = canonical_reduce(d, &groups)?;
    let reduced = OpenGraph::from_diagram(&reduced_diagram)?;
    Ok(find_flow_with_limit(&reduced, limit)?.map(|flow| SemiGraphFlow { reduced, flow, group_of: groups }))
}

/// Reduction whose surviving ids are the group representatives.
pub fn canonical_reduce(d: &ZXDiagram, groups: &BTreeMap<SpiderId, SpiderId>) -> Result<ZXDiagram> {
    let mut g = reduce_semi_graph_like(d)?;
    let survivors: BTreeSet<SpiderId> = g.ids().into_iter().collect();
    let reps: BTreeSet<SpiderId> = groups.values().copied().collect();
    if survivors != reps {
        // fusion kept a different member; relabel to the representative
        let mut relabeled = ZXDiagram::new();
        let mut map = BTreeMap::new();
        for (id, s) in g.spiders() {
            let rep = groups[&id];
            relabeled.insert_spider(rep, *s)?;
            map.insert(id, rep);
        }
        for w in g.wires() {
            relabeled.add_wire(map[&w.a], map[&w.b], w.kind)?;
        }
        for b in &g.inputs {
            relabeled.add_input(map[&b.spider], b.kind);
        }
        for b in &g.outputs {
            relabeled.add_output(map[&b.spider], b.kind);
        }
        g = relabeled;
    }
    Ok(g)
}

/// The reduced flow lifted onto the split spiders, or `None` if the
/// reduced diagram has no flow. No vertex limit applies.
pub fn flow_of_semi_graph_like(d: &ZXDiagram) -> Result<Option<PauliFlowData>> {
    Ok(semi_graph_flow(d, usize::MAX)?.map(|s| s.lifted()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sid(i: usize) -> SpiderId {
        SpiderId(i)
    }

    fn path() -> OpenGraph {
        let planes = BTreeMap::from([(sid(0), MeasurementPlane::XY), (sid(1), MeasurementPlane::XY)]);
        OpenGraph::new([sid(0), sid(1), sid(2)], [(sid(0), sid(1)), (sid(1), sid(2))], [sid(0)], [sid(2)], planes)
            .unwrap()
    }

    #[test]
    fn odd_neighborhood_basics() {
        let g = path();
        assert!(odd_neighborhood(&g, &BTreeSet::new()).unwrap().is_empty());
        assert_eq!(odd_neighborhood(&g, &BTreeSet::from([sid(1)])).unwrap(), BTreeSet::from([sid(0), sid(2)]));
        assert_eq!(odd_neighborhood(&g, &BTreeSet::from([sid(0), sid(2)])).unwrap(), BTreeSet::new());
        assert!(odd_neighborhood(&g, &BTreeSet::from([sid(9)])).is_err());
    }

    #[test]
    fn path_has_unique_causal_flow() {
        let g = path();
        let flow = find_flow(&g).unwrap().unwrap();
        assert_eq!(flow.f[&sid(0)], BTreeSet::from([sid(1)]));
        assert_eq!(flow.f[&sid(1)], BTreeSet::from([sid(2)]));
        assert_eq!(flow.layers, vec![vec![sid(0)], vec![sid(1)], vec![sid(2)]]);
        assert!(verify_pauli_flow(&g, &flow).is_empty());
    }

    #[test]
    fn bare_wire_is_vacuous() {
        let g = OpenGraph::new([sid(0)], [], [sid(0)], [sid(0)], BTreeMap::new()).unwrap();
        let flow = PauliFlowData { f: BTreeMap::new(), layers: vec![vec![sid(0)]] };
        assert!(verify_pauli_flow(&g, &flow).is_empty());
    }

    #[test]
    fn verifier_names_broken_conditions() {
        let g = path();
        let flow = PauliFlowData {
            f: BTreeMap::from([(sid(0), BTreeSet::from([sid(1)])), (sid(1), BTreeSet::from([sid(1)]))]),
            layers: vec![vec![sid(0)], vec![sid(1)], vec![sid(2)]],
        };
        let v = verify_pauli_flow(&g, &flow);
        assert!(v.contains(&FlowViolation { condition: 4, u: sid(1), v: None }));
        assert!(v.contains(&FlowViolation { condition: 2, u: sid(1), v: Some(sid(0)) }));
    }

    #[test]
    fn layered_search_agrees_on_path() {
        let g = path();
        let flow = find_pauli_flow(&g).unwrap();
        assert!(verify_pauli_flow(&g, &flow).is_empty());
        assert_eq!(flow.layers.len(), 3);
    }

    #[test]
    fn size_limit() {
        let planes = (0..70).map(|i| (sid(i), MeasurementPlane::XY)).collect();
        let g = OpenGraph::new((0..71).map(sid), [], [], [sid(70)], planes).unwrap();
        assert!(matches!(find_flow(&g), Err(Error::SizeLimit(_))));
    }
}
