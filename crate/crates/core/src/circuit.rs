//! Gate-level circuits, their line-based text format, and translation into
//! ZX-diagrams.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::diagram::{EdgeKind, SpiderId, ZXDiagram};
use crate::error::{Error, ParseError, Result};
use crate::phase::Phase;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    X,
    Z,
    S,
    T,
    RZ,
    RX,
    CZ,
    CX,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::CZ | GateKind::CX => 2,
            _ => 1,
        }
    }

    pub fn takes_phase(self) -> bool {
        matches!(self, GateKind::RZ | GateKind::RX)
    }

    fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::S => "S",
            GateKind::T => "T",
            GateKind::RZ => "RZ",
            GateKind::RX => "RX",
            GateKind::CZ => "CZ",
            GateKind::CX => "CX",
        }
    }
}

impl FromStr for GateKind {
    type Err = String;

    fn from_str(s: &str) -> Result<GateKind, String> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "H" => GateKind::H,
            "X" => GateKind::X,
            "Z" => GateKind::Z,
            "S" => GateKind::S,
            "T" => GateKind::T,
            "RZ" => GateKind::RZ,
            "RX" => GateKind::RX,
            "CZ" => GateKind::CZ,
            "CX" | "CNOT" => GateKind::CX,
            other => return Err(format!("unknown gate `{other}`")),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub phase: Option<Phase>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: &[usize]) -> Gate {
        Gate { kind, targets: targets.to_vec(), phase: None }
    }

    pub fn rotation(kind: GateKind, target: usize, phase: Phase) -> Gate {
        Gate { kind, targets: vec![target], phase: Some(phase) }
    }

    /// Phase of the spider this gate becomes (X/Z family only).
    pub fn spider_phase(&self) -> Phase {
        match self.kind {
            GateKind::X | GateKind::Z => Phase::PI,
            GateKind::S => Phase::new(1, 1),
            GateKind::T => Phase::new(1, 2),
            GateKind::RZ | GateKind::RX => self.phase.unwrap_or(Phase::ZERO),
            _ => Phase::ZERO,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Circuit {
    pub qubit_count: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubit_count: usize) -> Circuit {
        Circuit { qubit_count, gates: Vec::new() }
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Circuit> {
        self.check_gate(&gate)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn gate(mut self, kind: GateKind, targets: &[usize]) -> Result<Circuit> {
        self.push(Gate::new(kind, targets))?;
        Ok(self)
    }

    pub fn rotation(mut self, kind: GateKind, target: usize, phase: Phase) -> Result<Circuit> {
        self.push(Gate::rotation(kind, target, phase))?;
        Ok(self)
    }

    fn check_gate(&self, gate: &Gate) -> Result<()> {
        if gate.targets.len() != gate.kind.arity() {
            return Err(Error::InvalidGate(format!(
                "{} takes {} target(s), got {}",
                gate.kind.name(),
                gate.kind.arity(),
                gate.targets.len()
            )));
        }
        for &q in &gate.targets {
            if q >= self.qubit_count {
                return Err(Error::QubitOutOfRange { qubit: q, qubit_count: self.qubit_count });
            }
        }
        if gate.kind.arity() == 2 && gate.targets[0] == gate.targets[1] {
            return Err(Error::InvalidGate(format!("{} needs distinct targets", gate.kind.name())));
        }
        if gate.kind.takes_phase() != gate.phase.is_some() {
            return Err(Error::InvalidGate(format!(
                "{} {} a phase",
                gate.kind.name(),
                if gate.kind.takes_phase() { "requires" } else { "does not take" }
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.gates.iter().try_for_each(|g| self.check_gate(g))
    }

    /// Parses the line-based format: `qubits N`, then one gate per line.
    pub fn parse(text: &str) -> Result<Circuit, ParseError> {
        let mut circuit: Option<Circuit> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: String| ParseError::Circuit { line: line_no, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let Some(c) = circuit.as_mut() else {
                if tokens.len() != 2 || !tokens[0].eq_ignore_ascii_case("qubits") {
                    return Err(err("expected `qubits N` header".into()));
                }
                let n = tokens[1].parse().map_err(|_| err(format!("bad qubit count `{}`", tokens[1])))?;
                circuit = Some(Circuit::new(n));
                continue;
            };
            let kind: GateKind = tokens[0].parse().map_err(err)?;
            let want = kind.arity() + kind.takes_phase() as usize;
            if tokens.len() != 1 + want {
                return Err(err(format!("{} expects {} argument(s)", kind.name(), want)));
            }
            let targets = tokens[1..=kind.arity()]
                .iter()
                .map(|t| t.parse::<usize>().map_err(|_| err(format!("bad qubit index `{t}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            let phase = if kind.takes_phase() {
                Some(tokens[want].parse::<Phase>().map_err(|e| err(e.to_string()))?)
            } else {
                None
            };
            c.push(Gate { kind, targets, phase }).map_err(|e| err(e.to_string()))?;
        }
        circuit.ok_or(ParseError::Circuit { line: 0, msg: "missing `qubits N` header".into() })
    }

    /// Number of layers when gates are packed as early as possible.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.qubit_count];
        for g in &self.gates {
            let l = g.targets.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for &q in &g.targets {
                level[q] = l;
            }
        }
        level.into_iter().max().unwrap_or(0)
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind.arity() == 2).count()
    }

    /// Random Clifford+T circuit with at most `depth` layers.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, qubit_count: usize, depth: usize) -> Circuit {
        let single = [GateKind::H, GateKind::S, GateKind::T, GateKind::X, GateKind::Z, GateKind::RZ, GateKind::RX];
        let mut c = Circuit::new(qubit_count);
        let mut order: Vec<usize> = (0..qubit_count).collect();
        for _ in 0..depth {
            order.shuffle(rng);
            let mut i = 0;
            while i < order.len() {
                let q = order[i];
                if i + 1 < order.len() && rng.gen_bool(0.4) {
                    let kind = if rng.gen_bool(0.5) { GateKind::CZ } else { GateKind::CX };
                    c.gates.push(Gate::new(kind, &[q, order[i + 1]]));
                    i += 2;
                    continue;
                }
                if rng.gen_bool(0.85) {
                    let kind = *single.choose(rng).unwrap();
                    let gate = if kind.takes_phase() {
                        Gate::rotation(kind, q, Phase::new(rng.gen_range(1..8), 2))
                    } else {
                        Gate::new(kind, &[q])
                    };
                    c.gates.push(gate);
                }
                i += 1;
            }
        }
        c
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.qubit_count)?;
        for g in &self.gates {
            write!(f, "{}", g.kind.name())?;
            for t in &g.targets {
                write!(f, " {t}")?;
            }
            if let Some(p) = g.phase {
                write!(f, " {}/{}", p.num(), 1u64 << p.den_pow())?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Translates a circuit gate by gate. Each qubit gets a phase-0 Z input
/// spider and output spider; Hadamards become wire kinds.
pub fn from_circuit(c: &Circuit) -> Result<ZXDiagram> {
    c.validate()?;
    let mut d = ZXDiagram::new();
    let mut frontier: Vec<(SpiderId, EdgeKind)> = Vec::with_capacity(c.qubit_count);
    for _ in 0..c.qubit_count {
        let s = d.z(Phase::ZERO);
        d.add_input(s, EdgeKind::Regular);
        frontier.push((s, EdgeKind::Regular));
    }
    let attach = |d: &mut ZXDiagram, frontier: &mut Vec<(SpiderId, EdgeKind)>, q: usize, s: SpiderId| {
        let (prev, kind) = frontier[q];
        d.add_wire(prev, s, kind).expect("frontier spiders exist");
        frontier[q] = (s, EdgeKind::Regular);
    };
    for g in &c.gates {
        match g.kind {
            GateKind::H => {
                let q = g.targets[0];
                frontier[q].1 = frontier[q].1.toggled();
            }
            GateKind::Z | GateKind::S | GateKind::T | GateKind::RZ => {
                let s = d.z(g.spider_phase());
                attach(&mut d, &mut frontier, g.targets[0], s);
            }
            GateKind::X | GateKind::RX => {
                let s = d.x(g.spider_phase());
                attach(&mut d, &mut frontier, g.targets[0], s);
            }
            GateKind::CZ => {
                let a = d.z(Phase::ZERO);
                let b = d.z(Phase::ZERO);
                attach(&mut d, &mut frontier, g.targets[0], a);
                attach(&mut d, &mut frontier, g.targets[1], b);
                d.add_wire(a, b, EdgeKind::Hadamard)?;
            }
            GateKind::CX => {
                let a = d.z(Phase::ZERO);
                let b = d.x(Phase::ZERO);
                attach(&mut d, &mut frontier, g.targets[0], a);
                attach(&mut d, &mut frontier, g.targets[1], b);
                d.add_wire(a, b, EdgeKind::Regular)?;
            }
        }
    }
    for q in 0..c.qubit_count {
        let s = d.z(Phase::ZERO);
        attach(&mut d, &mut frontier, q, s);
        d.add_output(s, EdgeKind::Regular);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_example_file() {
        let text = "# swap test\nqubits 2\nCX 0 1\nH 0 # basis change\nRZ 1 3/4\nT 1\n";
        let c = Circuit::parse(text).unwrap();
        assert_eq!(c.qubit_count, 2);
        assert_eq!(c.gates.len(), 4);
        assert_eq!(c.gates[2].phase, Some(Phase::new(3, 2)));
        assert_eq!(Circuit::parse(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let e = Circuit::parse("qubits 2\nH 0\nFOO 1\n").unwrap_err();
        assert_eq!(e, ParseError::Circuit { line: 3, msg: "unknown gate `FOO`".into() });
        let e = Circuit::parse("qubits 2\nCZ 0 5\n").unwrap_err();
        assert!(matches!(e, ParseError::Circuit { line: 2, .. }));
        let e = Circuit::parse("qubits 1\nRZ 0\n").unwrap_err();
        assert!(matches!(e, ParseError::Circuit { line: 2, .. }));
        assert!(Circuit::parse("H 0\n").is_err());
    }

    #[test]
    fn rejects_out_of_range_and_bad_gates() {
        let c = Circuit::new(1);
        assert!(matches!(c.clone().gate(GateKind::H, &[1]), Err(Error::QubitOutOfRange { .. })));
        assert!(Circuit::new(2).gate(GateKind::CZ, &[1, 1]).is_err());
        assert!(c.gate(GateKind::RZ, &[0]).is_err());
    }

    #[test]
    fn empty_circuit_is_a_wire() {
        let d = from_circuit(&Circuit::new(1)).unwrap();
        assert_eq!(d.spider_count(), 2);
        assert_eq!(d.wire_count(), 1);
        assert_eq!(d.inputs.len(), 1);
        assert_eq!(d.outputs.len(), 1);
    }

    #[test]
    fn depth_counts_layers() {
        let c = Circuit::new(2)
            .gate(GateKind::H, &[0]).unwrap()
            .gate(GateKind::H, &[1]).unwrap()
            .gate(GateKind::CZ, &[0, 1]).unwrap();
        assert_eq!(c.depth(), 2);
        assert_eq!(c.two_qubit_count(), 1);
    }
}
