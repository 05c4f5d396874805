//! State-vector simulation with qubits added and removed on the fly.

use num_complex::Complex64;
use rand::Rng;

use crate::diagram::SpiderId;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A pure state over a changing set of labeled qubits; qubit `i` of
/// `labels` is bit `i` of the amplitude index.
#[derive(Clone, Debug)]
pub struct StateVector {
    amps: Vec<Complex64>,
    labels: Vec<SpiderId>,
}

impl Default for StateVector {
    fn default() -> Self {
        StateVector::new()
    }
}

impl StateVector {
    pub fn new() -> StateVector {
        StateVector { amps: vec![Complex64::new(1.0, 0.0)], labels: Vec::new() }
    }

    pub fn width(&self) -> usize {
        self.labels.len()
    }

    pub fn contains(&self, v: SpiderId) -> bool {
        self.labels.contains(&v)
    }

    fn bit(&self, v: SpiderId) -> usize {
        self.labels.iter().position(|&l| l == v).unwrap_or_else(|| panic!("qubit {v} is not live"))
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn labels(&self) -> &[SpiderId] {
        &self.labels
    }

    /// Appends a qubit in |+⟩.
    pub fn add_plus(&mut self, v: SpiderId) {
        let n = self.amps.len();
        self.amps.extend_from_within(..);
        for a in &mut self.amps[..] {
            *a *= SQRT_HALF;
        }
        debug_assert_eq!(self.amps.len(), 2 * n);
        self.labels.push(v);
    }

    /// Appends the pair `(|00⟩ + |11⟩)/√2`.
    pub fn add_bell(&mut self, a: SpiderId, b: SpiderId) {
        let n = self.amps.len();
        let mut amps = vec![Complex64::new(0.0, 0.0); 4 * n];
        for (i, &x) in self.amps.iter().enumerate() {
            amps[i] = x * SQRT_HALF;
            amps[i | (3 * n)] = x * SQRT_HALF;
        }
        self.amps = amps;
        self.labels.push(a);
        self.labels.push(b);
    }

    pub fn cz(&mut self, a: SpiderId, b: SpiderId) {
        let (lo, hi) = {
            let (x, y) = (self.bit(a), self.bit(b));
            (x.min(y), x.max(y))
        };
        // visit only indices with both bits set
        let quarter = self.amps.len() >> 2;
        let set = (1usize << lo) | (1usize << hi);
        for j in 0..quarter {
            let low = j & ((1 << lo) - 1);
            let mid = (j >> lo) & ((1 << (hi - lo - 1)) - 1);
            let high = j >> (hi - 1);
            let i = low | (mid << (lo + 1)) | (high << (hi + 1)) | set;
            self.amps[i] = -self.amps[i];
        }
    }

    pub fn h(&mut self, v: SpiderId) {
        let m = 1usize << self.bit(v);
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let (x, y) = (self.amps[i], self.amps[i | m]);
                self.amps[i] = (x + y) * SQRT_HALF;
                self.amps[i | m] = (x - y) * SQRT_HALF;
            }
        }
    }

    /// Probability of each outcome for measuring `v` in the XY plane at
    /// angle `theta`; outcome r is the effect `⟨0| + (−1)^r e^{iθ}⟨1|`.
    pub fn outcome_probabilities(&self, v: SpiderId, theta: f64) -> [f64; 2] {
        let k = self.bit(v);
        let m = 1usize << k;
        let phase = Complex64::from_polar(1.0, theta);
        let (mut p0, mut p1) = (0.0, 0.0);
        for i in (0..self.amps.len()).filter(|i| i & m == 0) {
            let (x0, x1) = (self.amps[i], self.amps[i | m] * phase);
            p0 += (x0 + x1).norm_sqr();
            p1 += (x0 - x1).norm_sqr();
        }
        let total = p0 + p1;
        [p0 / total, p1 / total]
    }

    /// Measures and removes `v`, forcing `outcome`; returns its probability.
    pub fn project(&mut self, v: SpiderId, theta: f64, outcome: bool) -> f64 {
        let k = self.bit(v);
        let p = self.outcome_probabilities(v, theta)[outcome as usize];
        self.collapse(k, theta, outcome, p);
        p
    }

    /// Keeps branch `outcome` (probability `p`) of qubit `k` in place and
    /// drops the qubit.
    fn collapse(&mut self, k: usize, theta: f64, outcome: bool, p: f64) {
        let low = (1usize << k) - 1;
        let sign = if outcome { -1.0 } else { 1.0 };
        let phase = Complex64::from_polar(sign, theta);
        let scale = SQRT_HALF / p.sqrt();
        let half = self.amps.len() / 2;
        for i in 0..half {
            let i0 = ((i >> k) << (k + 1)) | (i & low);
            self.amps[i] = (self.amps[i0] + self.amps[i0 | (1 << k)] * phase) * scale;
        }
        self.amps.truncate(half);
        self.labels.remove(k);
    }

    /// Measures and removes `v` at random.
    pub fn measure<R: Rng + ?Sized>(&mut self, v: SpiderId, theta: f64, rng: &mut R) -> bool {
        let [p0, p1] = self.outcome_probabilities(v, theta);
        let outcome = rng.gen::<f64>() >= p0;
        let k = self.bit(v);
        self.collapse(k, theta, outcome, if outcome { p1 } else { p0 });
        outcome
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn s(i: usize) -> SpiderId {
        SpiderId(i)
    }

    #[test]
    fn plus_state_measures_zero_in_x() {
        let mut st = StateVector::new();
        st.add_plus(s(0));
        let p = st.outcome_probabilities(s(0), 0.0);
        assert!((p[0] - 1.0).abs() < 1e-12);
        let p = st.outcome_probabilities(s(0), PI / 2.0);
        assert!((p[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bell_pair_outcomes_are_correlated() {
        let mut st = StateVector::new();
        st.add_plus(s(9));
        st.add_bell(s(0), s(1));
        st.project(s(0), 0.3, true);
        // remaining qubit is (|0⟩ − e^{0.3i}|1⟩)/√2, so angle −0.3 gives outcome 1
        let p = st.outcome_probabilities(s(1), -0.3);
        assert!((p[1] - 1.0).abs() < 1e-12, "{p:?}");
        assert_eq!(st.labels(), &[s(9), s(1)]);
    }

    #[test]
    fn cz_then_h_gives_bell() {
        let mut a = StateVector::new();
        a.add_plus(s(0));
        a.add_plus(s(1));
        a.cz(s(0), s(1));
        a.h(s(1));
        let mut b = StateVector::new();
        b.add_bell(s(0), s(1));
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn removal_keeps_other_qubits() {
        let mut st = StateVector::new();
        st.add_plus(s(0));
        st.add_plus(s(1));
        st.add_plus(s(2));
        st.h(s(2));
        st.project(s(1), 0.0, false);
        // qubit 2 is |0⟩ after H|+⟩, qubit 0 still |+⟩
        assert_eq!(st.width(), 2);
        let amps = st.amplitudes();
        assert!((amps[0].norm() - SQRT_HALF).abs() < 1e-12);
        assert!((amps[1].norm() - SQRT_HALF).abs() < 1e-12);
        assert!(amps[2].norm() < 1e-12 && amps[3].norm() < 1e-12);
    }
}
