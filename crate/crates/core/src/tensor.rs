//! Exact dense evaluation of small diagrams.
//!
//! Every spider becomes one binary variable (an X spider is a Z spider with
//! a Hadamard on each leg), every wire a 2×2 factor, and the network is
//! contracted by greedy variable elimination.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::diagram::{Color, EdgeKind, SpiderId, ZXDiagram};
use crate::error::{Error, Result};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_spiders: usize,
    pub max_open: usize,
    /// Largest intermediate factor, in variables.
    pub max_width: usize,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits { max_spiders: 32, max_open: 12, max_width: 24 }
    }
}

/// A linear map from `inputs` qubits to `outputs` qubits.
///
/// Entry layout: legs are ordered inputs by rank then outputs by rank, and
/// leg 0 is the most significant bit of the flat index.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorValue {
    pub inputs: usize,
    pub outputs: usize,
    pub data: Vec<Complex64>,
}

impl TensorValue {
    pub fn legs(&self) -> usize {
        self.inputs + self.outputs
    }

    /// Matrix entry ⟨out|M|in⟩.
    pub fn entry(&self, out: usize, inp: usize) -> Complex64 {
        self.data[(inp << self.outputs) | out]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Output probabilities for a state (no inputs), normalized.
    pub fn probabilities(&self) -> Result<Vec<f64>> {
        if self.inputs != 0 {
            return Err(Error::ShapeMismatch(format!("expected a state, found {} inputs", self.inputs)));
        }
        let total = self.norm_sqr();
        if total == 0.0 {
            return Err(Error::Indeterminate);
        }
        Ok(self.data.iter().map(|c| c.norm_sqr() / total).collect())
    }
}

#[derive(Clone, Debug)]
struct Factor {
    vars: Vec<usize>,
    data: Vec<Complex64>,
}

impl Factor {
    fn unary(v: usize, d0: Complex64, d1: Complex64) -> Factor {
        Factor { vars: vec![v], data: vec![d0, d1] }
    }

    fn binary(a: usize, b: usize, kind: EdgeKind) -> Factor {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let m = match kind {
            EdgeKind::Regular => [one, zero, zero, one],
            EdgeKind::Hadamard => [h, h, h, -h],
        };
        if a == b {
            return Factor::unary(a, m[0], m[3]);
        }
        // index bit i refers to vars[i]
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let mut data = vec![zero; 4];
        for x in 0..2 {
            for y in 0..2 {
                let (xl, xh) = if a < b { (x, y) } else { (y, x) };
                data[xl | (xh << 1)] = m[x * 2 + y];
            }
        }
        Factor { vars: vec![lo, hi], data }
    }

    fn value(&self, assignment: &BTreeMap<usize, usize>) -> Complex64 {
        let mut idx = 0;
        for (i, v) in self.vars.iter().enumerate() {
            idx |= assignment[v] << i;
        }
        self.data[idx]
    }
}

/// Multiplies factors together and sums out `var`.
fn eliminate(factors: Vec<Factor>, var: usize) -> Factor {
    let mut vars: Vec<usize> = factors.iter().flat_map(|f| f.vars.iter().copied()).collect();
    vars.sort_unstable();
    vars.dedup();
    let pos = vars.iter().position(|&v| v == var).expect("variable present");
    let out_vars: Vec<usize> = vars.iter().copied().filter(|&v| v != var).collect();
    // For each factor, the bit positions of its vars inside the joint index.
    let maps: Vec<Vec<usize>> = factors
        .iter()
        .map(|f| f.vars.iter().map(|v| vars.binary_search(v).unwrap()).collect())
        .collect();
    let mut data = vec![Complex64::new(0.0, 0.0); 1 << out_vars.len()];
    for (out_idx, slot) in data.iter_mut().enumerate() {
        let low = out_idx & ((1 << pos) - 1);
        let high = (out_idx >> pos) << (pos + 1);
        let mut acc = Complex64::new(0.0, 0.0);
        for bit in 0..2 {
            let joint = low | (bit << pos) | high;
            let mut prod = Complex64::new(1.0, 0.0);
            for (f, map) in factors.iter().zip(&maps) {
                let mut idx = 0;
                for (i, &p) in map.iter().enumerate() {
                    idx |= ((joint >> p) & 1) << i;
                }
                prod *= f.data[idx];
                if prod == Complex64::new(0.0, 0.0) {
                    break;
                }
            }
            acc += prod;
        }
        *slot = acc;
    }
    Factor { vars: out_vars, data }
}

/// Evaluates `d` exactly under the default [`Limits`].
pub fn contract_tensor(d: &ZXDiagram) -> Result<TensorValue> {
    contract_tensor_with(d, Limits::default())
}

pub fn contract_tensor_with(d: &ZXDiagram, limits: Limits) -> Result<TensorValue> {
    let open = d.inputs.len() + d.outputs.len();
    if d.spider_count() > limits.max_spiders {
        return Err(Error::SizeLimit(format!(
            "{} spiders exceeds the limit of {}",
            d.spider_count(),
            limits.max_spiders
        )));
    }
    if open > limits.max_open {
        return Err(Error::SizeLimit(format!("{open} open wires exceeds the limit of {}", limits.max_open)));
    }
    // Open legs are variables 0..open, spiders follow.
    let var_of: BTreeMap<SpiderId, usize> =
        d.ids().into_iter().enumerate().map(|(i, id)| (id, open + i)).collect();
    let flip = |v: SpiderId| d.color(v) == Color::X;
    let mut factors = Vec::new();
    for (id, s) in d.spiders() {
        let phase = Complex64::from_polar(1.0, s.phase.to_radians());
        factors.push(Factor::unary(var_of[&id], Complex64::new(1.0, 0.0), phase));
    }
    for w in d.wires() {
        let mut kind = w.kind;
        if flip(w.a) {
            kind = kind.toggled();
        }
        if flip(w.b) {
            kind = kind.toggled();
        }
        factors.push(Factor::binary(var_of[&w.a], var_of[&w.b], kind));
    }
    for (leg, b) in d.inputs.iter().chain(&d.outputs).enumerate() {
        let kind = if flip(b.spider) { b.kind.toggled() } else { b.kind };
        factors.push(Factor::binary(leg, var_of[&b.spider], kind));
    }
    let mut pending: Vec<usize> = var_of.values().copied().collect();
    while !pending.is_empty() {
        // pick the variable whose elimination yields the smallest factor
        let (best_i, width) = pending
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut vars: Vec<usize> = factors
                    .iter()
                    .filter(|f| f.vars.contains(&v))
                    .flat_map(|f| f.vars.iter().copied())
                    .collect();
                vars.sort_unstable();
                vars.dedup();
                (i, vars.len().saturating_sub(1))
            })
            .min_by_key(|&(_, w)| w)
            .unwrap();
        if width > limits.max_width {
            return Err(Error::SizeLimit(format!("intermediate tensor over {width} indices")));
        }
        let v = pending.swap_remove(best_i);
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.vars.contains(&v));
        factors = rest;
        factors.push(eliminate(touching, v));
    }
    let mut data = vec![Complex64::new(0.0, 0.0); 1 << open];
    let mut assignment = BTreeMap::new();
    for (idx, slot) in data.iter_mut().enumerate() {
        for leg in 0..open {
            assignment.insert(leg, (idx >> (open - 1 - leg)) & 1);
        }
        *slot = factors.iter().map(|f| f.value(&assignment)).product();
    }
    Ok(TensorValue { inputs: d.inputs.len(), outputs: d.outputs.len(), data })
}

/// Whether `a = λ·b` for some nonzero λ, judged by normalized overlap
/// `|⟨a,b⟩| / (‖a‖‖b‖) ≥ 1 − tol`.
pub fn equal_up_to_scalar(a: &TensorValue, b: &TensorValue, tol: f64) -> Result<bool> {
    if a.inputs != b.inputs || a.outputs != b.outputs {
        return Err(Error::ShapeMismatch(format!(
            "{}→{} vs {}→{}",
            a.inputs, a.outputs, b.inputs, b.outputs
        )));
    }
    let (na, nb) = (a.norm_sqr().sqrt(), b.norm_sqr().sqrt());
    let eps = 1e-300;
    match (na <= eps, nb <= eps) {
        (true, true) => return Err(Error::Indeterminate),
        (true, false) | (false, true) => return Ok(false),
        _ => {}
    }
    let overlap: Complex64 = a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum();
    Ok(overlap.norm() / (na * nb) >= 1.0 - tol)
}

/// Square matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub qubits: usize,
    pub data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Reduced state on the output ranks in `keep`, built by joining the
/// diagram with its conjugate along every traced output.
pub fn reduced_density_matrix(d: &ZXDiagram, keep: &[usize]) -> Result<DensityMatrix> {
    if !d.inputs.is_empty() {
        return Err(Error::ShapeMismatch("reduced density matrix needs a state".into()));
    }
    if let Some(&r) = keep.iter().find(|&&r| r >= d.outputs.len()) {
        return Err(Error::InvalidArgument(format!("output rank {r} out of range")));
    }
    let mut doubled = ZXDiagram::new();
    let mut maps: [BTreeMap<SpiderId, SpiderId>; 2] = Default::default();
    for (copy, map) in maps.iter_mut().enumerate() {
        for (id, s) in d.spiders() {
            let mut s = *s;
            if copy == 1 {
                s.phase = -s.phase;
            }
            map.insert(id, doubled.add_spider(s));
        }
        for w in d.wires() {
            doubled.add_wire(map[&w.a], map[&w.b], w.kind)?;
        }
    }
    // bra copy first, so row index = ket bits, column = bra bits
    for copy in [0, 1] {
        for &r in keep {
            let b = d.outputs[r];
            doubled.add_output(maps[copy][&b.spider], b.kind);
        }
    }
    for (r, b) in d.outputs.iter().enumerate() {
        if keep.contains(&r) {
            continue;
        }
        // join the two legs through a fresh identity spider
        let mid = doubled.z(crate::phase::Phase::ZERO);
        doubled.add_wire(maps[0][&b.spider], mid, b.kind)?;
        doubled.add_wire(maps[1][&b.spider], mid, b.kind)?;
    }
    let limits = Limits { max_spiders: usize::MAX, ..Limits::default() };
    let t = contract_tensor_with(&doubled, limits)?;
    let tr: Complex64 = {
        let dim = 1usize << keep.len();
        (0..dim).map(|i| t.data[i * dim + i]).sum()
    };
    if tr.norm() < 1e-300 {
        return Err(Error::Indeterminate);
    }
    Ok(DensityMatrix { qubits: keep.len(), data: t.data.iter().map(|c| c / tr).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::Phase;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn z_spider_on_a_wire_is_diagonal() {
        let mut d = ZXDiagram::new();
        let s = d.z(Phase::new(1, 2));
        d.add_input(s, EdgeKind::Regular);
        d.add_output(s, EdgeKind::Regular);
        let t = contract_tensor(&d).unwrap();
        assert!(close(t.entry(0, 0), Complex64::new(1.0, 0.0)));
        assert!(close(t.entry(1, 1), Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)));
        assert!(close(t.entry(0, 1), Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn x_pi_spider_is_not_gate() {
        let mut d = ZXDiagram::new();
        let s = d.x(Phase::PI);
        d.add_input(s, EdgeKind::Regular);
        d.add_output(s, EdgeKind::Regular);
        let t = contract_tensor(&d).unwrap();
        assert!(t.entry(0, 0).norm() < 1e-12);
        assert!(close(t.entry(1, 0), t.entry(0, 1)));
        assert!(t.entry(1, 0).norm() > 0.5);
    }

    #[test]
    fn hadamard_leg_gives_plus_state() {
        let mut d = ZXDiagram::new();
        let s = d.z(Phase::ZERO);
        d.add_output(s, EdgeKind::Hadamard);
        let p = contract_tensor(&d).unwrap().probabilities().unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shape_and_zero_checks() {
        let a = TensorValue { inputs: 0, outputs: 1, data: vec![Complex64::new(0.0, 0.0); 2] };
        let b = TensorValue { inputs: 1, outputs: 0, data: a.data.clone() };
        assert!(matches!(equal_up_to_scalar(&a, &b, 1e-9), Err(Error::ShapeMismatch(_))));
        assert!(matches!(equal_up_to_scalar(&a, &a, 1e-9), Err(Error::Indeterminate)));
        let c = TensorValue { inputs: 0, outputs: 1, data: vec![Complex64::new(1.0, 0.0); 2] };
        assert!(!equal_up_to_scalar(&a, &c, 1e-9).unwrap());
        let e = TensorValue { data: c.data.iter().map(|x| x * Complex64::new(0.0, 3.0)).collect(), ..c.clone() };
        assert!(equal_up_to_scalar(&c, &e, 1e-9).unwrap());
    }

    #[test]
    fn size_limit_is_enforced() {
        let mut d = ZXDiagram::new();
        for _ in 0..33 {
            d.z(Phase::ZERO);
        }
        assert!(matches!(contract_tensor(&d), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn bell_pair_reduces_to_maximally_mixed() {
        let mut d = ZXDiagram::new();
        let s = d.z(Phase::ZERO);
        d.add_output(s, EdgeKind::Regular);
        d.add_output(s, EdgeKind::Regular);
        let rho = reduced_density_matrix(&d, &[0]).unwrap();
        assert!(close(rho.get(0, 0), Complex64::new(0.5, 0.0)));
        assert!(close(rho.get(1, 1), Complex64::new(0.5, 0.0)));
        assert!(rho.get(0, 1).norm() < 1e-12);
    }
}
