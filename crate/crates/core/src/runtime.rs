//! Multi-agent execution: schedule extraction, adaptive measurement with
//! byproduct corrections, unmasking and transcripts.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagram::{EdgeKind, SpiderId};
use crate::error::{Error, Result};
use crate::flow::{odd_neighborhood, MeasurementPlane, OpenGraph, PauliFlowData};
use crate::obfuscate::{bind_secrets, wire_key, ObfuscatedProgram, SampleSecrets};
use crate::phase::Phase;
use crate::sim::StateVector;

/// A setup instruction for one agent. Qubits are agent-local labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum SetupOp {
    /// Prepare the qubit in |+⟩.
    Plus { qubit: usize },
    /// Receive one half of the shared pair `edge`, then apply H if told.
    BellHalf { qubit: usize, edge: u64, hadamard: bool },
    /// Take part in the setup-phase CZ identified by `edge`.
    SharedCz { qubit: usize, edge: u64 },
    /// Local CZ between two own qubits.
    Cz { a: usize, b: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentSchedule {
    pub agent: usize,
    pub blocks: Vec<usize>,
    pub qubit_count: usize,
    pub setup: Vec<SetupOp>,
    /// Local qubits in measurement order.
    pub slots: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    pub schedules: Vec<AgentSchedule>,
    /// Edge ids of the pre-shared Bell pairs.
    pub bell_pairs: Vec<u64>,
    /// Edge ids of setup-phase CZs between agents.
    pub shared_cz: Vec<u64>,
}

/// One instruction as the agent records it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TranscriptEntry {
    Setup(SetupOp),
    Measure { qubit: usize, angle: Phase, outcome: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentTranscript {
    pub agent: usize,
    pub entries: Vec<TranscriptEntry>,
}

impl AgentTranscript {
    /// `(angle, outcome)` per measurement slot.
    pub fn measurements(&self) -> Vec<(Phase, bool)> {
        self.entries
            .iter()
            .filter_map(|e| match e {
                TranscriptEntry::Measure { angle, outcome, .. } => Some((*angle, *outcome)),
                TranscriptEntry::Setup(_) => None,
            })
            .collect()
    }
}

/// Pending Pauli byproducts per reduced flow vertex.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ByproductState {
    pub x: BTreeMap<SpiderId, bool>,
    pub z: BTreeMap<SpiderId, bool>,
}

impl ByproductState {
    pub fn x(&self, v: SpiderId) -> bool {
        self.x.get(&v).copied().unwrap_or(false)
    }

    pub fn z(&self, v: SpiderId) -> bool {
        self.z.get(&v).copied().unwrap_or(false)
    }
}

/// Byproducts after `u` was measured with effective outcome `outcome`.
pub fn correct(
    b: &ByproductState,
    g: &OpenGraph,
    flow: &PauliFlowData,
    u: SpiderId,
    outcome: bool,
) -> Result<ByproductState> {
    let Some(set) = flow.f.get(&u) else {
        if g.is_output(u) {
            return Ok(b.clone());
        }
        return Err(Error::InvalidFlow(format!("{u} has no corrector set")));
    };
    let mut out = b.clone();
    if outcome {
        for &v in set.iter().filter(|&&v| v != u) {
            *out.x.entry(v).or_default() ^= true;
        }
        for v in odd_neighborhood(g, set)?.into_iter().filter(|&v| v != u) {
            *out.z.entry(v).or_default() ^= true;
        }
    }
    Ok(out)
}

fn agent_labels(program: &ObfuscatedProgram, agents: usize) -> BTreeMap<SpiderId, (usize, usize)> {
    let mut next = vec![0usize; agents];
    let mut labels = BTreeMap::new();
    for k in 0..program.block_count() {
        let a = ObfuscatedProgram::agent_of_block(k, agents);
        for v in program.partition.members(k) {
            labels.insert(v, (a, next[a]));
            next[a] += 1;
        }
    }
    labels
}

/// Splits the program into per-agent schedules. Regular inter-block wires
/// become Bell pairs with H on both ends or neither; inter-block Hadamard
/// wires between otherwise untouched qubits become Bell pairs with H on
/// one random end. Remaining inter-block wires are setup-phase CZs and
/// intra-block wires are local CZs.
pub fn extract_schedules<R: Rng + ?Sized>(program: &ObfuscatedProgram, agents: usize, rng: &mut R) -> Result<Extraction> {
    if agents < 2 {
        return Err(Error::InvalidArgument(format!("at least 2 agents are required, got {agents}")));
    }
    let labels = agent_labels(program, agents);
    let d = &program.diagram;
    let mut schedules: Vec<AgentSchedule> = (0..agents)
        .map(|a| AgentSchedule {
            agent: a,
            blocks: (0..program.block_count()).filter(|k| k % agents == a).collect(),
            qubit_count: 0,
            setup: Vec::new(),
            slots: Vec::new(),
        })
        .collect();
    for &(a, l) in labels.values() {
        schedules[a].qubit_count = schedules[a].qubit_count.max(l + 1);
    }
    let mut touched: BTreeSet<SpiderId> = BTreeSet::new();
    let mut paired: BTreeSet<SpiderId> = BTreeSet::new();
    let mut bell_pairs = Vec::new();
    let mut shared_cz = Vec::new();
    let mut regular: Vec<_> = d.wires().iter().filter(|w| w.kind == EdgeKind::Regular).collect();
    let hadamard: Vec<_> = d.wires().iter().filter(|w| w.kind == EdgeKind::Hadamard).collect();
    regular.extend(hadamard);
    for w in regular {
        let (la, lb) = (labels[&w.a], labels[&w.b]);
        if !program.partition.is_inter_block(w.a, w.b) {
            if la.0 != lb.0 {
                return Err(Error::InvalidArgument(format!("intra-block wire {}-{} spans agents", w.a, w.b)));
            }
            if w.kind == EdgeKind::Regular {
                return Err(Error::InvalidArgument(format!("regular wire {}-{} inside one block", w.a, w.b)));
            }
            schedules[la.0].setup.push(SetupOp::Cz { a: la.1, b: lb.1 });
            continue;
        }
        let edge = program.edge_ids[&wire_key(w.a, w.b)];
        let fresh = !touched.contains(&w.a) && !touched.contains(&w.b);
        if w.kind == EdgeKind::Regular || fresh {
            let (ha, hb) = if w.kind == EdgeKind::Regular {
                let both = rng.gen::<bool>();
                (both, both)
            } else {
                let first = rng.gen::<bool>();
                (first, !first)
            };
            schedules[la.0].setup.push(SetupOp::BellHalf { qubit: la.1, edge, hadamard: ha });
            schedules[lb.0].setup.push(SetupOp::BellHalf { qubit: lb.1, edge, hadamard: hb });
            bell_pairs.push(edge);
            paired.insert(w.a);
            paired.insert(w.b);
        } else {
            schedules[la.0].setup.push(SetupOp::SharedCz { qubit: la.1, edge });
            schedules[lb.0].setup.push(SetupOp::SharedCz { qubit: lb.1, edge });
            shared_cz.push(edge);
        }
        touched.insert(w.a);
        touched.insert(w.b);
    }
    for (&v, &(a, l)) in &labels {
        if !paired.contains(&v) {
            schedules[a].setup.push(SetupOp::Plus { qubit: l });
        }
    }
    for s in &mut schedules {
        // |+⟩ preparations first, then pairs, then CZs
        s.setup.sort_by_key(|op| match op {
            SetupOp::Plus { .. } => 0,
            SetupOp::BellHalf { .. } => 1,
            SetupOp::SharedCz { .. } => 2,
            SetupOp::Cz { .. } => 3,
        });
    }
    for &v in &program.order {
        let (a, l) = labels[&v];
        schedules[a].slots.push(l);
    }
    Ok(Extraction { schedules, bell_pairs, shared_cz })
}

/// Structural checks on schedules and transcripts; returns violations.
pub fn check_locality(ex: &Extraction, transcripts: &[AgentTranscript]) -> Vec<String> {
    let mut out = Vec::new();
    let mut pair_ends: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    let mut cz_ends: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    let own = |s: &AgentSchedule, q: usize, what: &str, out: &mut Vec<String>| {
        if q >= s.qubit_count {
            out.push(format!("agent {}: {what} references qubit {q} outside its {} qubits", s.agent, s.qubit_count));
        }
    };
    for s in &ex.schedules {
        for op in &s.setup {
            match *op {
                SetupOp::Plus { qubit } => own(s, qubit, "preparation", &mut out),
                SetupOp::BellHalf { qubit, edge, .. } => {
                    own(s, qubit, "Bell half", &mut out);
                    pair_ends.entry(edge).or_default().push(s.agent);
                }
                SetupOp::SharedCz { qubit, edge } => {
                    own(s, qubit, "shared CZ", &mut out);
                    cz_ends.entry(edge).or_default().push(s.agent);
                }
                SetupOp::Cz { a, b } => {
                    own(s, a, "CZ", &mut out);
                    own(s, b, "CZ", &mut out);
                }
            }
        }
        for &q in &s.slots {
            own(s, q, "measurement", &mut out);
        }
    }
    for (kind, ends, manifest) in [("Bell pair", &pair_ends, &ex.bell_pairs), ("shared CZ", &cz_ends, &ex.shared_cz)] {
        for (edge, agents) in ends {
            if agents.len() != 2 || agents[0] == agents[1] || !manifest.contains(edge) {
                out.push(format!("{kind} {edge:#x} is not shared by exactly two agents in the manifest"));
            }
        }
    }
    for t in transcripts {
        let Some(s) = ex.schedules.iter().find(|s| s.agent == t.agent) else {
            out.push(format!("transcript for unknown agent {}", t.agent));
            continue;
        };
        for e in &t.entries {
            match e {
                TranscriptEntry::Measure { qubit, .. } => own(s, *qubit, "transcript measurement", &mut out),
                TranscriptEntry::Setup(op) => {
                    let edge = match op {
                        SetupOp::BellHalf { edge, .. } | SetupOp::SharedCz { edge, .. } => Some(*edge),
                        _ => None,
                    };
                    if let Some(edge) = edge {
                        if !s.setup.iter().any(|o| matches!(o, SetupOp::BellHalf { edge: x, .. } | SetupOp::SharedCz { edge: x, .. } if *x == edge)) {
                            out.push(format!("agent {}: transcript names edge {edge:#x} it does not hold", t.agent));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Per-program data reused across samples.
#[derive(Clone, Debug)]
pub struct Runner<'a> {
    program: &'a ObfuscatedProgram,
    agents: usize,
    labels: BTreeMap<SpiderId, (usize, usize)>,
    /// Offset of each block's labels inside its agent's label range.
    block_offset: Vec<usize>,
    group: BTreeMap<SpiderId, SpiderId>,
    group_size: BTreeMap<SpiderId, usize>,
    first_member: BTreeMap<SpiderId, SpiderId>,
    x_targets: BTreeMap<SpiderId, Vec<SpiderId>>,
    z_targets: BTreeMap<SpiderId, Vec<SpiderId>>,
    partner: BTreeMap<SpiderId, SpiderId>,
    neighbors: BTreeMap<SpiderId, Vec<SpiderId>>,
    output_groups: Vec<SpiderId>,
}

/// Simulator state of one sample.
#[derive(Clone, Debug)]
struct Sim {
    state: StateVector,
    allocated: BTreeSet<SpiderId>,
    measured: BTreeSet<SpiderId>,
    done_members: BTreeMap<SpiderId, usize>,
    parity: BTreeMap<SpiderId, bool>,
    byproducts: ByproductState,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleOutcome {
    pub outputs: Vec<bool>,
    pub transcripts: Option<Vec<AgentTranscript>>,
}

impl SampleOutcome {
    pub fn bitstring(&self) -> String {
        bits_to_string(&self.outputs)
    }
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

impl<'a> Runner<'a> {
    pub fn new(program: &'a ObfuscatedProgram, agents: usize) -> Result<Runner<'a>> {
        if agents < 2 {
            return Err(Error::InvalidArgument(format!("at least 2 agents are required, got {agents}")));
        }
        let labels = agent_labels(program, agents);
        let mut block_offset = Vec::new();
        for k in 0..program.block_count() {
            let first = program.partition.members(k).first().map_or(0, |v| labels[v].1);
            block_offset.push(first);
        }
        let flow = &program.flow;
        let group = flow.group_of.clone();
        let mut group_size = BTreeMap::new();
        for &r in group.values() {
            *group_size.entry(r).or_insert(0) += 1;
        }
        let mut first_member = BTreeMap::new();
        for &v in &program.order {
            first_member.entry(group[&v]).or_insert(v);
        }
        let mut x_targets = BTreeMap::new();
        let mut z_targets = BTreeMap::new();
        for (&u, set) in &flow.flow.f {
            x_targets.insert(u, set.iter().copied().filter(|&v| v != u).collect());
            let odd = odd_neighborhood(&flow.reduced, set)?;
            z_targets.insert(u, odd.into_iter().filter(|&v| v != u).collect());
        }
        let d = &program.diagram;
        let partner = d
            .wires()
            .iter()
            .filter(|w| w.kind == EdgeKind::Regular)
            .flat_map(|w| [(w.a, w.b), (w.b, w.a)])
            .collect();
        let neighbors = d.ids().into_iter().map(|v| (v, d.neighbors(v).into_iter().collect())).collect();
        let output_groups = program.output_parents.iter().map(|p| group[&program.split.children[p].0]).collect();
        Ok(Runner {
            program,
            agents,
            labels,
            block_offset,
            group,
            group_size,
            first_member,
            x_targets,
            z_targets,
            partner,
            neighbors,
            output_groups,
        })
    }

    fn fresh_sim(&self) -> Sim {
        Sim {
            state: StateVector::new(),
            allocated: BTreeSet::new(),
            measured: BTreeSet::new(),
            done_members: BTreeMap::new(),
            parity: BTreeMap::new(),
            byproducts: ByproductState::default(),
        }
    }

    fn allocate(&self, sim: &mut Sim, v: SpiderId) {
        if sim.allocated.contains(&v) {
            return;
        }
        match self.partner.get(&v) {
            Some(&p) => {
                sim.state.add_bell(v, p);
                sim.allocated.insert(p);
            }
            None => sim.state.add_plus(v),
        }
        sim.allocated.insert(v);
    }

    /// Brings `v` and its neighbors into the state and applies every
    /// Hadamard wire at `v` whose other end is still live.
    fn entangle(&self, sim: &mut Sim, v: SpiderId) {
        self.allocate(sim, v);
        for &n in &self.neighbors[&v] {
            if sim.measured.contains(&n) || self.partner.get(&v) == Some(&n) {
                continue;
            }
            self.allocate(sim, n);
            sim.state.cz(v, n);
        }
    }

    /// Angle sent for `v` given the current byproducts.
    fn angle(&self, sim: &Sim, v: SpiderId, secrets: &SampleSecrets) -> Phase {
        let r = self.group[&v];
        let mut a = self.program.base_angle(v, secrets).signed(sim.byproducts.x(r));
        if sim.byproducts.z(r) && self.first_member[&r] == v {
            a += Phase::PI;
        }
        a + Phase::from_bit(secrets.mask[&v])
    }

    /// Records the unmasked outcome of `v` and applies corrections once its
    /// group is complete.
    fn finish(&self, sim: &mut Sim, v: SpiderId, raw: bool, secrets: &SampleSecrets) {
        sim.measured.insert(v);
        let r = self.group[&v];
        *sim.parity.entry(r).or_default() ^= raw ^ secrets.mask[&v];
        let done = sim.done_members.entry(r).or_default();
        *done += 1;
        if *done < self.group_size[&r] || !sim.parity[&r] {
            return;
        }
        for &t in self.x_targets.get(&r).into_iter().flatten() {
            // an X byproduct on a Pauli parent already measured is harmless
            if sim.done_members.get(&t).copied().unwrap_or(0) == 0 {
                *sim.byproducts.x.entry(t).or_default() ^= true;
            } else {
                debug_assert_eq!(self.program.flow.reduced.plane(t), Some(MeasurementPlane::X));
            }
        }
        for &t in self.z_targets.get(&r).into_iter().flatten() {
            debug_assert_eq!(sim.done_members.get(&t).copied().unwrap_or(0), 0, "late Z correction on {t}");
            *sim.byproducts.z.entry(t).or_default() ^= true;
        }
    }

    fn transcript_label(&self, v: SpiderId, secrets: &SampleSecrets) -> (usize, usize) {
        let (agent, label) = self.labels[&v];
        let k = self.program.partition.block(v).unwrap();
        let offset = self.block_offset[k];
        (agent, offset + secrets.shuffle[k][label - offset])
    }

    fn outputs(&self, sim: &Sim) -> Vec<bool> {
        self.output_groups.iter().map(|r| sim.parity.get(r).copied().unwrap_or(false)).collect()
    }

    /// One execution of the protocol with the given secrets.
    pub fn run_sample<R: Rng + ?Sized>(&self, secrets: &SampleSecrets, rng: &mut R, record: bool) -> Result<SampleOutcome> {
        let mut transcripts = record.then(|| {
            (0..self.agents).map(|agent| AgentTranscript { agent, entries: Vec::new() }).collect::<Vec<_>>()
        });
        // drawn unconditionally so recording does not shift the sample stream
        let coins: u64 = rng.gen();
        if let Some(ts) = transcripts.as_mut() {
            let ex = extract_schedules(self.program, self.agents, &mut ChaCha8Rng::seed_from_u64(coins))?;
            for (t, s) in ts.iter_mut().zip(ex.schedules) {
                t.entries.extend(s.setup.into_iter().map(|op| TranscriptEntry::Setup(self.relabel(op, s.agent, secrets))));
            }
        }
        let mut sim = self.fresh_sim();
        for &v in &self.program.order {
            self.entangle(&mut sim, v);
            let angle = self.angle(&sim, v, secrets);
            let raw = sim.state.measure(v, angle.to_radians(), rng);
            if let Some(ts) = transcripts.as_mut() {
                let (agent, qubit) = self.transcript_label(v, secrets);
                ts[agent].entries.push(TranscriptEntry::Measure { qubit, angle, outcome: raw });
            }
            self.finish(&mut sim, v, raw, secrets);
        }
        Ok(SampleOutcome { outputs: self.outputs(&sim), transcripts })
    }

    fn relabel(&self, op: SetupOp, agent: usize, secrets: &SampleSecrets) -> SetupOp {
        let map = |q: usize| -> usize {
            let v = self.labels.iter().find(|(_, &(a, l))| a == agent && l == q).map(|(&v, _)| v).unwrap();
            self.transcript_label(v, secrets).1
        };
        match op {
            SetupOp::Plus { qubit } => SetupOp::Plus { qubit: map(qubit) },
            SetupOp::BellHalf { qubit, edge, hadamard } => SetupOp::BellHalf { qubit: map(qubit), edge, hadamard },
            SetupOp::SharedCz { qubit, edge } => SetupOp::SharedCz { qubit: map(qubit), edge },
            SetupOp::Cz { a, b } => SetupOp::Cz { a: map(a), b: map(b) },
        }
    }

    /// Samples every non-output measurement (outcomes in `forced` are
    /// imposed), then enumerates the output measurements exactly. Returns
    /// the output distribution keyed by bit string.
    pub fn exact_distribution<R: Rng + ?Sized>(
        &self,
        secrets: &SampleSecrets,
        forced: &BTreeMap<SpiderId, bool>,
        rng: &mut R,
    ) -> Result<BTreeMap<String, f64>> {
        let outputs: BTreeSet<SpiderId> = self.output_groups.iter().copied().collect();
        let split = self.program.order.iter().position(|v| outputs.contains(&self.group[v])).unwrap_or(self.program.order.len());
        let (head, tail) = self.program.order.split_at(split);
        if tail.iter().any(|v| !outputs.contains(&self.group[v])) {
            return Err(Error::InvalidFlow("outputs are not measured last".into()));
        }
        let mut sim = self.fresh_sim();
        for &v in head {
            self.entangle(&mut sim, v);
            let theta = self.angle(&sim, v, secrets).to_radians();
            let raw = match forced.get(&v) {
                Some(&want) => {
                    // force the unmasked outcome
                    let raw = want ^ secrets.mask[&v];
                    if sim.state.outcome_probabilities(v, theta)[raw as usize] < 1e-12 {
                        return Err(Error::InvalidArgument(format!("forced outcome for {v} has probability 0")));
                    }
                    sim.state.project(v, theta, raw);
                    raw
                }
                None => sim.state.measure(v, theta, rng),
            };
            self.finish(&mut sim, v, raw, secrets);
        }
        let mut dist = BTreeMap::new();
        self.enumerate(sim, tail, 1.0, secrets, &mut dist);
        Ok(dist)
    }

    fn enumerate(&self, sim: Sim, rest: &[SpiderId], p: f64, secrets: &SampleSecrets, dist: &mut BTreeMap<String, f64>) {
        let Some((&v, rest)) = rest.split_first() else {
            *dist.entry(bits_to_string(&self.outputs(&sim))).or_default() += p;
            return;
        };
        let mut sim = sim;
        self.entangle(&mut sim, v);
        let theta = self.angle(&sim, v, secrets).to_radians();
        let probs = sim.state.outcome_probabilities(v, theta);
        for raw in [false, true] {
            let q = probs[raw as usize];
            if q < 1e-15 {
                continue;
            }
            let mut branch = sim.clone();
            branch.state.project(v, theta, raw);
            self.finish(&mut branch, v, raw, secrets);
            self.enumerate(branch, rest, p * q, secrets, dist);
        }
    }
}

/// Generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl Histogram {
    pub fn probabilities(&self) -> BTreeMap<String, f64> {
        self.counts.iter().map(|(k, &c)| (k.clone(), c as f64 / self.shots as f64)).collect()
    }
}

fn map_samples<T: Send>(n: u64, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Runs `shots` samples with fresh secrets each and counts output strings.
pub fn run_distribution(program: &ObfuscatedProgram, agents: usize, shots: u64, seed: u64) -> Result<Histogram> {
    if shots == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    let runner = Runner::new(program, agents)?;
    let bits = map_samples(shots, |i| {
        let mut rng = sample_rng(seed, i);
        let secrets = bind_secrets(program, &mut rng, true);
        Ok(runner.run_sample(&secrets, &mut rng, false)?.bitstring())
    })?;
    let mut h = Histogram { shots, counts: BTreeMap::new() };
    for b in bits {
        *h.counts.entry(b).or_default() += 1;
    }
    Ok(h)
}

/// Transcripts of `samples` runs, masks on or off.
pub fn run_transcripts(
    program: &ObfuscatedProgram,
    agents: usize,
    samples: u64,
    seed: u64,
    masks: bool,
) -> Result<Vec<Vec<AgentTranscript>>> {
    let runner = Runner::new(program, agents)?;
    map_samples(samples, |i| {
        let mut rng = sample_rng(seed, i);
        let secrets = bind_secrets(program, &mut rng, masks);
        Ok(runner.run_sample(&secrets, &mut rng, true)?.transcripts.unwrap())
    })
}

/// Histogram and transcripts of the same masked samples.
pub fn run_recorded(
    program: &ObfuscatedProgram,
    agents: usize,
    samples: u64,
    seed: u64,
) -> Result<(Histogram, Vec<Vec<AgentTranscript>>)> {
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    let runner = Runner::new(program, agents)?;
    let runs = map_samples(samples, |i| {
        let mut rng = sample_rng(seed, i);
        let secrets = bind_secrets(program, &mut rng, true);
        runner.run_sample(&secrets, &mut rng, true)
    })?;
    let mut h = Histogram { shots: samples, counts: BTreeMap::new() };
    let mut transcripts = Vec::with_capacity(runs.len());
    for r in runs {
        *h.counts.entry(r.bitstring()).or_default() += 1;
        transcripts.push(r.transcripts.unwrap());
    }
    Ok((h, transcripts))
}

/// Exact output distributions for `branches` independently sampled
/// histories of the non-output measurements.
pub fn run_exact(program: &ObfuscatedProgram, agents: usize, branches: u64, seed: u64) -> Result<Vec<BTreeMap<String, f64>>> {
    let runner = Runner::new(program, agents)?;
    map_samples(branches, |i| {
        let mut rng = sample_rng(seed, i);
        let secrets = bind_secrets(program, &mut rng, true);
        runner.exact_distribution(&secrets, &BTreeMap::new(), &mut rng)
    })
}
