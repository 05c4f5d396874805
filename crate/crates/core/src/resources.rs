//! Closed-form resource accounting for single-agent UBQC, multi-agent UBQC
//! and the obfuscated protocol, plus counts taken from prepared programs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::obfuscate::ObfuscatedProgram;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UbqcVariant {
    Single,
    Multi,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub scheme: String,
    /// Upper bound on the number of agents, when the scheme has one.
    pub agent_bound: Option<u64>,
    pub qubits: u64,
    pub external_entanglement: u64,
    pub internal_entanglement: u64,
    /// Set when the formula is evaluated at the edge of its domain.
    pub degenerate: bool,
}

fn check_positive(name: &str, v: u64) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
    }
    Ok(())
}

pub fn ubqc_cost(d: u64, w: u64, variant: UbqcVariant) -> Result<ResourceReport> {
    check_positive("depth", d)?;
    check_positive("width", w)?;
    let (scheme, agent_bound, qubits) = match variant {
        UbqcVariant::Single => ("UBQC (single agent)", Some(1), 2 * w + 1),
        UbqcVariant::Multi => ("UBQC (multi agent)", Some((4 * d + 1) * w), 2 * (4 * d + 1) * w),
    };
    Ok(ResourceReport {
        scheme: scheme.into(),
        agent_bound,
        qubits,
        external_entanglement: (4 * d + 1) * w,
        internal_entanglement: 8 * d * w,
        degenerate: false,
    })
}

/// Cost of the protocol for depth `d`, width `w` and `t` two-qubit gates.
pub fn protocol_cost(d: u64, w: u64, t: u64) -> Result<ResourceReport> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("depth {d} is below 2, where the qubit formula is undefined")));
    }
    check_positive("width", w)?;
    if 2 * t > d * w {
        return Err(Error::InvalidArgument(format!("t = {t} exceeds dw/2 = {}", d * w / 2)));
    }
    Ok(ResourceReport {
        scheme: "this protocol".into(),
        agent_bound: Some(2 * d),
        qubits: 3 * (d - 2) * w + 2 * t,
        external_entanglement: (d - 1) * w + t,
        internal_entanglement: 2 * (d - 2) * w + 2 * t,
        degenerate: d == 2,
    })
}

/// Counts qubits, inter-block wires and intra-block wires of a program.
pub fn measured_cost(program: &ObfuscatedProgram) -> ResourceReport {
    let d = &program.diagram;
    let (mut external, mut internal) = (0, 0);
    for w in d.wires() {
        if program.partition.block(w.a) == program.partition.block(w.b) {
            internal += 1;
        } else {
            external += 1;
        }
    }
    ResourceReport {
        scheme: "measured".into(),
        agent_bound: Some(program.partition.block_count() as u64),
        qubits: d.spider_count() as u64,
        external_entanglement: external,
        internal_entanglement: internal,
        degenerate: false,
    }
}

/// The three-scheme comparison table.
pub fn comparison(d: u64, w: u64, t: u64) -> Result<Vec<ResourceReport>> {
    Ok(vec![ubqc_cost(d, w, UbqcVariant::Single)?, ubqc_cost(d, w, UbqcVariant::Multi)?, protocol_cost(d, w, t)?])
}

fn bound(r: &ResourceReport) -> String {
    r.agent_bound.map_or_else(|| "-".into(), |b| b.to_string())
}

pub fn render_table(rows: &[ResourceReport]) -> String {
    let mut s = format!("{:<22} {:>8} {:>8} {:>10} {:>10}\n", "scheme", "agents", "qubits", "external", "internal");
    for r in rows {
        let flag = if r.degenerate { "  (degenerate)" } else { "" };
        writeln!(
            s,
            "{:<22} {:>8} {:>8} {:>10} {:>10}{flag}",
            r.scheme,
            bound(r),
            r.qubits,
            r.external_entanglement,
            r.internal_entanglement
        )
        .unwrap();
    }
    s
}

pub fn render_csv(rows: &[ResourceReport]) -> String {
    let mut s = String::from("scheme,agents,qubits,external,internal,degenerate\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            r.scheme,
            bound(r),
            r.qubits,
            r.external_entanglement,
            r.internal_entanglement,
            r.degenerate
        )
        .unwrap();
    }
    s
}
