use zxbqc_demo::{convert, prepare_summary, resources};

const BELL: &str = "qubits 2\nH 0\nCX 0 1\n";

#[test]
fn convert_gives_a_graph_like_diagram() {
    let v: serde_json::Value = serde_json::from_str(&convert(BELL).unwrap()).unwrap();
    assert_eq!(v["graph_like"], true);
    assert!(v["diagram"]["spiders"].as_array().unwrap().len() >= 2);
    assert!(convert("qubits 2\nFOO 0\n").is_err());
}

#[test]
fn prepare_summary_is_deterministic() {
    let a = prepare_summary(BELL, 3, 5).unwrap();
    assert_eq!(a, prepare_summary(BELL, 3, 5).unwrap());
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    let blocks = v["blocks"].as_u64().unwrap();
    assert_eq!(v["agent_of_block"].as_array().unwrap().len() as u64, blocks);
    assert_eq!(v["profile"]["block_count"].as_u64().unwrap(), blocks);
    assert!(prepare_summary(BELL, 1, 5).is_err());
}

#[test]
fn resources_table_lists_three_schemes() {
    let t = resources(4, 3, 2).unwrap();
    assert!(t.contains("this protocol"));
    assert!(t.contains("UBQC (single agent)"));
    assert!(resources(1, 3, 0).is_err());
}
