mod common;

use std::collections::BTreeSet;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zxbqc_core::audit::collusion_recover;
use zxbqc_core::flow::{odd_neighborhood, semi_graph_flow, verify_pauli_flow, MeasurementPlane, OpenGraph};
use zxbqc_core::graphlike::{is_graph_like, to_graph_like};
use zxbqc_core::io::{diagram_from_json, diagram_to_json};
use zxbqc_core::obfuscate::{bind_secrets, check_locality, close_diagram, prepare, prepare_with_stages, DummyPolicy};
use zxbqc_core::rewrite::{apply_rewrite, Rewrite};
use zxbqc_core::runtime::run_distribution;
use zxbqc_core::tensor::{contract_tensor, equal_up_to_scalar, TensorValue};
use zxbqc_core::{from_circuit, Circuit, SpiderId, ZXDiagram};

fn circuit(seed: u64, max_qubits: usize, depth: usize) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 1 + (seed as usize) % max_qubits;
    Circuit::random(&mut rng, n, depth)
}

fn same(a: &TensorValue, b: &TensorValue) -> bool {
    equal_up_to_scalar(a, b, 1e-9).unwrap()
}

fn tensor(d: &ZXDiagram) -> TensorValue {
    contract_tensor(d).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn circuit_diagram_prepares_the_oracle_state(seed in any::<u64>()) {
        let c = circuit(seed, 4, 6);
        let t = tensor(&close_diagram(&from_circuit(&c).unwrap()));
        let psi = common::circuit_state(&c);
        let expected = TensorValue { inputs: 0, outputs: c.qubit_count, data: psi };
        prop_assert!(same(&t, &expected));
    }

    #[test]
    fn graph_like_form_keeps_the_tensor(seed in any::<u64>()) {
        let d = from_circuit(&circuit(seed, 3, 5)).unwrap();
        let g = to_graph_like(&d);
        prop_assert!(is_graph_like(&g).is_empty());
        prop_assert!(same(&tensor(&g), &tensor(&d)));
    }

    #[test]
    fn every_applicable_rewrite_keeps_the_tensor(seed in any::<u64>(), pick in any::<u64>()) {
        let d = from_circuit(&circuit(seed, 3, 4)).unwrap();
        let reference = tensor(&d);
        let ids = d.ids();
        let v = ids[(pick as usize) % ids.len()];
        let w = ids[(pick as usize / 7) % ids.len()];
        for rule in [
            Rewrite::ColorChange(v),
            Rewrite::Fuse(v, w),
            Rewrite::IdentityRemove(v),
            Rewrite::HadamardCancel(v),
            Rewrite::PiCopy { pi: v, target: w },
            Rewrite::Hopf(v, w),
            Rewrite::Bialgebra(v, w),
        ] {
            let mut e = d.clone();
            if apply_rewrite(&mut e, rule).is_ok() {
                prop_assert!(same(&tensor(&e), &reference), "{}", rule.name());
            } else {
                prop_assert_eq!(&e, &d);
            }
        }
    }

    #[test]
    fn odd_neighbourhood_is_linear(seed in any::<u64>(), a in any::<u16>(), b in any::<u16>()) {
        let d = to_graph_like(&from_circuit(&circuit(seed, 3, 5)).unwrap());
        let g = OpenGraph::from_diagram(&d).unwrap();
        let ids = d.ids();
        let subset = |mask: u16| -> BTreeSet<SpiderId> {
            ids.iter().enumerate().filter(|(i, _)| mask >> (i % 16) & 1 == 1).map(|(_, &v)| v).collect()
        };
        let (k1, k2) = (subset(a), subset(b));
        let sym: BTreeSet<SpiderId> = k1.symmetric_difference(&k2).copied().collect();
        let lhs = odd_neighborhood(&g, &sym).unwrap();
        let o1 = odd_neighborhood(&g, &k1).unwrap();
        let o2 = odd_neighborhood(&g, &k2).unwrap();
        let rhs: BTreeSet<SpiderId> = o1.symmetric_difference(&o2).copied().collect();
        prop_assert_eq!(lhs, rhs);
        for (v, p) in &g.planes {
            let expected = if d.phase(*v).is_pauli() { MeasurementPlane::X } else { MeasurementPlane::XY };
            prop_assert_eq!(*p, expected);
        }
    }

    #[test]
    fn diagram_files_round_trip(seed in any::<u64>()) {
        let d = to_graph_like(&from_circuit(&circuit(seed, 4, 6)).unwrap());
        let text = diagram_to_json(&d);
        let back = diagram_from_json(&text).unwrap();
        prop_assert!(back.structurally_equal(&d));
        prop_assert_eq!(diagram_to_json(&back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn stages_keep_tensor_flow_and_locality(seed in any::<u64>()) {
        let d = from_circuit(&circuit(seed, 2, 3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, stages) = prepare_with_stages(&d, DummyPolicy::Max, &mut rng).unwrap();
        prop_assume!(stages.iter().all(|s| s.diagram.spider_count() <= 32));
        let reference = tensor(&stages[0].diagram);
        for s in &stages[1..] {
            prop_assert!(same(&tensor(&s.diagram), &reference), "{}", s.name);
            let sf = semi_graph_flow(&s.diagram, usize::MAX).unwrap();
            prop_assert!(sf.is_some_and(|sf| verify_pauli_flow(&sf.reduced, &sf.flow).is_empty()), "{}", s.name);
        }
        prop_assert!(check_locality(&p.diagram, &p.partition).is_ok());
        for w in p.diagram.wires() {
            let (a, b) = (p.partition.block(w.a).unwrap(), p.partition.block(w.b).unwrap());
            prop_assert!(a.abs_diff(b) <= 1);
        }
        let regular_degree = |v: SpiderId| {
            p.diagram.wires().iter().filter(|w| w.kind == zxbqc_core::EdgeKind::Regular && w.touches(v)).count()
        };
        prop_assert!(p.diagram.ids().into_iter().all(|v| regular_degree(v) <= 1));
    }

    #[test]
    fn collusion_needs_adjacent_blocks(seed in any::<u64>()) {
        let d = from_circuit(&circuit(seed, 3, 5)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = prepare(&d, DummyPolicy::Max, &mut rng).unwrap();
        let s = bind_secrets(&p, &mut rng, true);
        let n = p.block_count();
        for j in 0..n {
            for k in j + 1..n {
                let got = collusion_recover(&p, &s, (j, k));
                if k == j + 1 {
                    let spanning: Vec<SpiderId> = p.split.children.iter()
                        .filter(|(_, &(e, o))| [e, o].iter().all(|&c| [Some(j), Some(k)].contains(&p.partition.block(c))))
                        .map(|(&v, _)| v)
                        .collect();
                    prop_assert_eq!(got.keys().copied().collect::<Vec<_>>(), spanning);
                    for (v, a) in &got {
                        prop_assert_eq!(*a, p.alpha[v]);
                    }
                } else {
                    prop_assert!(got.is_empty());
                }
            }
        }
    }
}

#[test]
fn runs_are_deterministic_in_the_seed() {
    let c = Circuit::parse("qubits 2\nH 0\nT 0\nCX 0 1\nH 1\n").unwrap();
    let d = from_circuit(&c).unwrap();
    let p = prepare(&d, DummyPolicy::Max, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let a = run_distribution(&p, 2, 200, 5).unwrap();
    assert_eq!(a, run_distribution(&p, 2, 200, 5).unwrap());
    assert_ne!(a, run_distribution(&p, 2, 200, 6).unwrap());
    let q = prepare(&d, DummyPolicy::Max, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(q.edge_ids, p.edge_ids);
    assert_eq!(q.order, p.order);
}

#[test]
fn state_oracle_sanity() {
    let c = Circuit::parse("qubits 2\nH 0\nCX 0 1\n").unwrap();
    let psi = common::circuit_state(&c);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let expected = [h, 0.0, 0.0, h];
    for (a, e) in psi.iter().zip(expected) {
        assert!((a - Complex64::new(e, 0.0)).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn corrections_are_involutions(seed in any::<u64>(), pick in any::<usize>()) {
        use zxbqc_core::runtime::{correct, ByproductState};
        let d = to_graph_like(&from_circuit(&circuit(seed, 3, 5)).unwrap());
        let g = OpenGraph::from_diagram(&d).unwrap();
        let Some(flow) = zxbqc_core::flow::find_flow(&g).unwrap() else { return Ok(()) };
        let measured: Vec<SpiderId> = flow.f.keys().copied().collect();
        prop_assume!(!measured.is_empty());
        let u = measured[pick % measured.len()];
        let b = ByproductState::default();
        let once = correct(&b, &g, &flow, u, true).unwrap();
        prop_assert_eq!(correct(&once, &g, &flow, u, false).unwrap(), once.clone());
        let twice = correct(&once, &g, &flow, u, true).unwrap();
        prop_assert!(twice.x.values().chain(twice.z.values()).all(|&bit| !bit));
    }

    #[test]
    fn masked_child_angles_are_uniform(alpha in 0i64..8, seed in any::<u64>()) {
        use zxbqc_core::audit::masked_angle_uniformity;
        use zxbqc_core::Phase;
        let src = format!("qubits 1\nRZ 0 {alpha}/4\nH 0\n");
        let d = from_circuit(&Circuit::parse(&src).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = prepare(&d, DummyPolicy::Max, &mut rng).unwrap();
        prop_assert!(p.alpha.values().any(|a| *a == Phase::new(alpha, 2)) || alpha % 8 == 0);
        let secrets: Vec<_> = (0..4000).map(|_| bind_secrets(&p, &mut rng, true)).collect();
        let report = masked_angle_uniformity(&p, &secrets);
        prop_assert!(report.statistic > 1e-4, "{}", report);
    }
}
