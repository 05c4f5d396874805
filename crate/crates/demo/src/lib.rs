//! Browser bindings: circuit conversion, program preparation and the
//! resource comparison, each returning JSON or text for the page.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use wasm_bindgen::prelude::*;
use zxbqc_core::audit::leakage_profile;
use zxbqc_core::graphlike::{is_graph_like, to_graph_like};
use zxbqc_core::io::diagram_to_json;
use zxbqc_core::obfuscate::{live_width, prepare, DummyPolicy, ObfuscatedProgram};
use zxbqc_core::resources::{comparison, render_table};
use zxbqc_core::{from_circuit, Circuit};

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Graph-like diagram of a circuit in the diagram file format.
pub fn convert(src: &str) -> Result<String, String> {
    let c = Circuit::parse(src).map_err(err)?;
    let d = to_graph_like(&from_circuit(&c).map_err(err)?);
    let violations: Vec<String> = is_graph_like(&d).iter().map(|v| v.to_string()).collect();
    let diagram: serde_json::Value = serde_json::from_str(&diagram_to_json(&d)).map_err(err)?;
    Ok(json!({ "graph_like": violations.is_empty(), "violations": violations, "diagram": diagram }).to_string())
}

/// Block structure and public leakage profile of the prepared program.
pub fn prepare_summary(src: &str, agents: usize, seed: u64) -> Result<String, String> {
    if agents < 2 {
        return Err(format!("at least 2 agents are required, got {agents}"));
    }
    let c = Circuit::parse(src).map_err(err)?;
    let d = from_circuit(&c).map_err(err)?;
    let p = prepare(&d, DummyPolicy::Max, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(err)?;
    let views = p.public_views();
    let hosts: Vec<usize> = (0..p.block_count()).map(|k| ObfuscatedProgram::agent_of_block(k, agents)).collect();
    Ok(json!({
        "blocks": p.block_count(),
        "measured": p.order.len(),
        "width": live_width(&p.diagram, &p.order),
        "profile": leakage_profile(&views),
        "agent_of_block": hosts,
    })
    .to_string())
}

/// Resource comparison table for depth `d`, width `w` and `t` two-qubit gates.
pub fn resources(d: u64, w: u64, t: u64) -> Result<String, String> {
    comparison(d, w, t).map(|rows| render_table(&rows)).map_err(err)
}

#[wasm_bindgen(js_name = convertCircuit)]
pub fn convert_circuit(src: &str) -> Result<String, JsValue> {
    convert(src).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = prepareSummary)]
pub fn prepare_summary_js(src: &str, agents: usize, seed: u32) -> Result<String, JsValue> {
    prepare_summary(src, agents, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = resourceTable)]
pub fn resource_table(d: u32, w: u32, t: u32) -> Result<String, JsValue> {
    resources(d as u64, w as u64, t as u64).map_err(|e| JsValue::from_str(&e))
}
