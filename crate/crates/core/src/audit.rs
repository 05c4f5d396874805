//! Blindness checks: leakage profiles, transcript uniformity and
//! indistinguishability, the unmasked-correction leak and collusion.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diagram::SpiderId;
use crate::error::{Error, Result};
use crate::flow::MeasurementPlane;
use crate::obfuscate::{BlockView, ObfuscatedProgram, SampleSecrets};
use crate::phase::Phase;
use crate::runtime::{run_transcripts, AgentTranscript};
use crate::stats::{binomial_z, chi_square_uniform, family_threshold, frequencies, tv_distance, tv_from_uniform};

/// Minimum number of transcripts for the frequency tests.
pub const MIN_TRANSCRIPTS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeakageProfile {
    pub max_degree: usize,
    pub block_sizes: Vec<usize>,
    pub block_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub test: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub samples: usize,
    pub notes: Vec<String>,
}

impl std::fmt::Display for AuditReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "test: {}", self.test)?;
        writeln!(f, "statistic: {:.6}", self.statistic)?;
        writeln!(f, "threshold: {:.6}", self.threshold)?;
        writeln!(f, "samples: {}", self.samples)?;
        writeln!(f, "verdict: {}", if self.pass { "pass" } else { "fail" })?;
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

/// The leakage bound of the public views: largest local degree (local
/// wires plus shared-pair stubs), block sizes and block count.
pub fn leakage_profile(views: &[BlockView]) -> LeakageProfile {
    let mut max_degree = 0;
    for v in views {
        let mut deg = vec![0usize; v.size];
        for &(a, b) in &v.wires {
            deg[a] += 1;
            deg[b] += 1;
        }
        for &(a, _) in &v.stubs {
            deg[a] += 1;
        }
        max_degree = max_degree.max(deg.into_iter().max().unwrap_or(0));
    }
    LeakageProfile { max_degree, block_sizes: views.iter().map(|v| v.size).collect(), block_count: views.len() }
}

/// Per-(agent, slot) measurement records across samples.
type SlotTable = BTreeMap<(usize, usize), Vec<(Phase, bool)>>;

fn slot_table(samples: &[Vec<AgentTranscript>]) -> SlotTable {
    let mut t: SlotTable = BTreeMap::new();
    for sample in samples {
        for tr in sample {
            for (slot, m) in tr.measurements().into_iter().enumerate() {
                t.entry((tr.agent, slot)).or_default().push(m);
            }
        }
    }
    t
}

/// Frequency test of every slot's outcome bit against a fair coin. The 3σ
/// bound is widened so the family of all slots keeps a 3σ error rate.
pub fn outcome_uniformity(samples: &[Vec<AgentTranscript>]) -> Result<AuditReport> {
    if samples.len() < MIN_TRANSCRIPTS {
        return Err(Error::InsufficientSamples { got: samples.len(), needed: MIN_TRANSCRIPTS });
    }
    let table = slot_table(samples);
    let threshold = family_threshold(table.len());
    let mut worst = 0.0f64;
    let mut beyond_3 = 0;
    for records in table.values() {
        let ones = records.iter().filter(|r| r.1).count() as u64;
        let z = binomial_z(ones, records.len() as u64, 0.5).abs();
        if z > 3.0 {
            beyond_3 += 1;
        }
        worst = worst.max(z);
    }
    Ok(AuditReport {
        test: "outcome uniformity".into(),
        statistic: worst,
        threshold,
        pass: worst <= threshold,
        samples: samples.len(),
        notes: vec![format!("{} slots, {beyond_3} beyond 3 sigma individually", table.len())],
    })
}

/// Angle support of every measured spider as its agent sees it.
fn angle_supports(program: &ObfuscatedProgram) -> BTreeMap<SpiderId, Vec<Phase>> {
    let group: Vec<Phase> =
        (0..1u64 << (program.den_pow + 1)).map(|i| Phase::from_group_index(i, program.den_pow)).collect();
    program
        .diagram
        .ids()
        .into_iter()
        .map(|v| {
            let support = if program.split.parent_of(v).is_some() { group.clone() } else { vec![Phase::ZERO, Phase::PI] };
            (v, support)
        })
        .collect()
}

/// Spider measured in each (agent, slot).
fn slot_spiders(program: &ObfuscatedProgram, agents: usize) -> BTreeMap<(usize, usize), SpiderId> {
    let mut next = vec![0usize; agents];
    let mut out = BTreeMap::new();
    for &v in &program.order {
        let a = ObfuscatedProgram::agent_of_block(program.partition.block(v).unwrap(), agents);
        out.insert((a, next[a]), v);
        next[a] += 1;
    }
    out
}

/// χ² test of every masked child angle against the uniform group.
pub fn masked_angle_uniformity(program: &ObfuscatedProgram, secrets: &[SampleSecrets]) -> AuditReport {
    let size = 1usize << (program.den_pow + 1);
    let mut worst_p = 1.0f64;
    let mut tests = 0;
    for &(e, o) in program.split.children.values() {
        for child in [e, o] {
            let mut counts = vec![0u64; size];
            for s in secrets {
                let a = program.base_angle(child, s) + Phase::from_bit(s.mask[&child]);
                counts[a.group_index(program.den_pow).expect("angle in group") as usize] += 1;
            }
            worst_p = worst_p.min(chi_square_uniform(&counts).1);
            tests += 1;
        }
    }
    AuditReport {
        test: "masked angle uniformity".into(),
        statistic: worst_p,
        threshold: 0.01,
        pass: worst_p > 0.01,
        samples: secrets.len(),
        notes: vec![format!("smallest chi-square p-value over {tests} children")],
    }
}

/// Largest TV distance between the two programs' per-slot angle
/// histograms and outcome rates, plus any difference in message counts.
pub fn indistinguishability(
    a: &ObfuscatedProgram,
    b: &ObfuscatedProgram,
    agents: usize,
    trials: u64,
    seed: u64,
) -> Result<AuditReport> {
    if leakage_profile(&a.public_views()) != leakage_profile(&b.public_views()) || a.den_pow != b.den_pow {
        return Err(Error::ProfileMismatch);
    }
    let ta = run_transcripts(a, agents, trials, seed, true)?;
    let tb = run_transcripts(b, agents, trials, seed ^ 0x9e37_79b9_7f4a_7c15, true)?;
    transcript_distance(&ta, &tb)
}

/// The comparison behind [`indistinguishability`] on given transcripts.
pub fn transcript_distance(ta: &[Vec<AgentTranscript>], tb: &[Vec<AgentTranscript>]) -> Result<AuditReport> {
    let (sa, sb) = (slot_table(ta), slot_table(tb));
    if sa.keys().ne(sb.keys()) {
        return Err(Error::ProfileMismatch);
    }
    let counts = |ts: &[Vec<AgentTranscript>]| -> BTreeMap<(usize, usize), u64> {
        let mut m = BTreeMap::new();
        for s in ts {
            for t in s {
                m.insert((t.agent, t.entries.len()), 0);
            }
        }
        m
    };
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    if counts(ta) != counts(tb) {
        worst = 1.0;
        notes.push("message counts differ".into());
    }
    for (key, ra) in &sa {
        let rb = &sb[key];
        let hist = |r: &[(Phase, bool)]| -> BTreeMap<Phase, f64> {
            let mut c: BTreeMap<Phase, u64> = BTreeMap::new();
            for x in r {
                *c.entry(x.0).or_default() += 1;
            }
            frequencies(&c)
        };
        let angle_tv = tv_distance(&hist(ra), &hist(rb));
        let rate = |r: &[(Phase, bool)]| r.iter().filter(|x| x.1).count() as f64 / r.len() as f64;
        let outcome_tv = (rate(ra) - rate(rb)).abs();
        worst = worst.max(angle_tv).max(outcome_tv);
    }
    notes.push(format!("{} slots compared", sa.len()));
    Ok(AuditReport {
        test: "transcript indistinguishability".into(),
        statistic: worst,
        threshold: 0.05,
        pass: worst <= 0.05,
        samples: ta.len().min(tb.len()),
        notes,
    })
}

/// Largest TV distance from uniform of any slot's joint (angle, outcome)
/// distribution, the data an agent holds about one of its qubits.
pub fn slot_leakage(program: &ObfuscatedProgram, agents: usize, samples: &[Vec<AgentTranscript>]) -> (f64, f64) {
    let supports = angle_supports(program);
    let spiders = slot_spiders(program, agents);
    let table = slot_table(samples);
    let (mut joint, mut outcome) = (0.0f64, 0.0f64);
    for (key, records) in &table {
        let support: Vec<(Phase, bool)> =
            supports[&spiders[key]].iter().flat_map(|&a| [(a, false), (a, true)]).collect();
        let mut c: BTreeMap<(Phase, bool), u64> = BTreeMap::new();
        let mut o: BTreeMap<bool, u64> = BTreeMap::new();
        for &r in records {
            *c.entry(r).or_default() += 1;
            *o.entry(r.1).or_default() += 1;
        }
        joint = joint.max(tv_from_uniform(&c, &support));
        outcome = outcome.max(tv_from_uniform(&o, &[false, true]));
    }
    (joint, outcome)
}

/// Runs the program with masks disabled and enabled and reports the
/// largest per-slot deviation from uniform in each case.
pub fn correction_leakage_demo(
    program: &ObfuscatedProgram,
    agents: usize,
    samples: u64,
    seed: u64,
) -> Result<(AuditReport, AuditReport)> {
    let mut reports = Vec::new();
    for masks in [false, true] {
        let ts = run_transcripts(program, agents, samples, seed, masks)?;
        let (joint, outcome) = slot_leakage(program, agents, &ts);
        let (threshold, pass) = if masks { (0.05, joint <= 0.05) } else { (0.1, joint > 0.1) };
        reports.push(AuditReport {
            test: if masks { "masked slot distributions" } else { "unmasked slot distributions" }.into(),
            statistic: joint,
            threshold,
            pass,
            samples: ts.len(),
            notes: vec![
                if masks { "pass means every slot is within the threshold of uniform" } else { "pass means some slot exceeds the threshold, i.e. the leak is visible" }.into(),
                format!("largest outcome-only deviation {outcome:.4}"),
            ],
        });
    }
    let masked = reports.pop().unwrap();
    Ok((masked, reports.pop().unwrap()))
}

/// Parent phases recovered by merging the bound angles of blocks `j` and
/// `k`: the sum of both children's angles with their masks removed. Only
/// adjacent blocks hold both children of a parent.
pub fn collusion_recover(
    program: &ObfuscatedProgram,
    secrets: &SampleSecrets,
    blocks: (usize, usize),
) -> BTreeMap<SpiderId, Phase> {
    let angles = program.masked_angles(secrets);
    let held = |v: SpiderId| {
        let b = program.partition.block(v);
        b == Some(blocks.0) || b == Some(blocks.1)
    };
    let mut out = BTreeMap::new();
    if blocks.0.abs_diff(blocks.1) != 1 {
        return out;
    }
    for (&p, &(e, o)) in &program.split.children {
        if held(e) && held(o) {
            let unmask = |v: SpiderId| angles[&v] - Phase::from_bit(secrets.mask[&v]);
            out.insert(p, unmask(e) + unmask(o));
        }
    }
    out
}

/// Permutation test for association between edge ids and the total degree
/// of the wire's endpoints.
pub fn edge_id_independence<R: Rng + ?Sized>(program: &ObfuscatedProgram, permutations: usize, rng: &mut R) -> AuditReport {
    let d = &program.diagram;
    let (ids, degs): (Vec<f64>, Vec<f64>) = program
        .edge_ids
        .iter()
        .map(|(&(a, b), &id)| (id as f64, (d.degree(a) + d.degree(b)) as f64))
        .unzip();
    let corr = |x: &[f64], y: &[f64]| -> f64 {
        let n = x.len() as f64;
        let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
        let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        if vx == 0.0 || vy == 0.0 {
            0.0
        } else {
            cov / (vx * vy).sqrt()
        }
    };
    let observed = corr(&ids, &degs).abs();
    let mut shuffled = degs.clone();
    let mut extreme = 0;
    for _ in 0..permutations {
        shuffled.shuffle(rng);
        if corr(&ids, &shuffled).abs() >= observed {
            extreme += 1;
        }
    }
    let p = (extreme + 1) as f64 / (permutations + 1) as f64;
    AuditReport {
        test: "edge id independence".into(),
        statistic: p,
        threshold: 0.01,
        pass: p > 0.01,
        samples: ids.len(),
        notes: vec![format!("|correlation| {observed:.4}")],
    }
}

/// Measurement planes as the agents see them, for reports.
pub fn view_planes(views: &[BlockView]) -> BTreeMap<MeasurementPlane, usize> {
    let mut m = BTreeMap::new();
    for v in views {
        for &p in &v.planes {
            *m.entry(p).or_default() += 1;
        }
    }
    m
}
