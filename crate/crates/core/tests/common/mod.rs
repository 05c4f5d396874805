//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zxbqc_core::{Circuit, GateKind};

pub mod swap;

/// Gate-level state vector of `c` applied to |0…0⟩. Qubit 0 is the most
/// significant bit of the index.
pub fn circuit_state(c: &Circuit) -> Vec<Complex64> {
    let n = c.qubit_count;
    let mut psi = vec![Complex64::new(0.0, 0.0); 1 << n];
    psi[0] = Complex64::new(1.0, 0.0);
    let mask = |q: usize| 1usize << (n - 1 - q);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let single = |psi: &mut Vec<Complex64>, q: usize, m: [[Complex64; 2]; 2]| {
        let b = mask(q);
        for i in 0..psi.len() {
            if i & b == 0 {
                let (x, y) = (psi[i], psi[i | b]);
                psi[i] = m[0][0] * x + m[0][1] * y;
                psi[i | b] = m[1][0] * x + m[1][1] * y;
            }
        }
    };
    let c0 = Complex64::new(0.0, 0.0);
    let c1 = Complex64::new(1.0, 0.0);
    let diag = |a: f64| [[c1, c0], [c0, Complex64::from_polar(1.0, a)]];
    let hm = [[c1 * h, c1 * h], [c1 * h, -c1 * h]];
    for g in &c.gates {
        let q = g.targets[0];
        let angle = g.phase.map(|p| p.to_radians()).unwrap_or(0.0);
        match g.kind {
            GateKind::H => single(&mut psi, q, hm),
            GateKind::X => single(&mut psi, q, [[c0, c1], [c1, c0]]),
            GateKind::Z => single(&mut psi, q, diag(std::f64::consts::PI)),
            GateKind::S => single(&mut psi, q, diag(std::f64::consts::FRAC_PI_2)),
            GateKind::T => single(&mut psi, q, diag(std::f64::consts::FRAC_PI_4)),
            GateKind::RZ => single(&mut psi, q, diag(angle)),
            GateKind::RX => {
                single(&mut psi, q, hm);
                single(&mut psi, q, diag(angle));
                single(&mut psi, q, hm);
            }
            GateKind::CZ => {
                let m = mask(q) | mask(g.targets[1]);
                for (i, x) in psi.iter_mut().enumerate() {
                    if i & m == m {
                        *x = -*x;
                    }
                }
            }
            GateKind::CX => {
                let (cm, tm) = (mask(q), mask(g.targets[1]));
                for i in 0..psi.len() {
                    if i & cm != 0 && i & tm == 0 {
                        psi.swap(i, i | tm);
                    }
                }
            }
        }
    }
    psi
}

/// Z-basis outcome distribution keyed by bit string (qubit 0 first).
pub fn circuit_distribution(c: &Circuit) -> BTreeMap<String, f64> {
    let n = c.qubit_count;
    circuit_state(c)
        .iter()
        .enumerate()
        .map(|(i, a)| ((0..n).map(|q| if i >> (n - 1 - q) & 1 == 1 { '1' } else { '0' }).collect(), a.norm_sqr()))
        .collect()
}

pub fn tv_distance(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let keys: std::collections::BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    keys.into_iter().map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs()).sum::<f64>() / 2.0
}

pub fn max_abs_diff(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let keys: std::collections::BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    keys.into_iter().map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs()).fold(0.0, f64::max)
}

/// The seeded random circuits used across tests: 2 to 4 qubits, depth ≤ 6.
pub fn random_circuits(seed: u64, count: usize) -> Vec<Circuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| Circuit::random(&mut rng, 2 + i % 3, 6)).collect()
}
