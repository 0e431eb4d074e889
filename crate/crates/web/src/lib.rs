//! Browser bindings. Every exported function takes edge-list text and returns
//! a JSON string; the page in `www/` draws the graph and the growth trace.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use localdense::global::{global_density, global_guarantee_bound};
use localdense::io::{generate_planted, parse_edge_list, write_edge_list, Mode, PlantedConfig, ResultDocument};
use localdense::local::local_density;
use localdense::oracle::{top_eigenvalue, OracleError, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use localdense::{BipartiteGraph, Side};

fn load(text: &str, directed: bool) -> Result<BipartiteGraph, String> {
    parse_edge_list(text, directed.then_some(Mode::Directed)).map_err(|e| e.to_string())
}

fn graph_value(g: &BipartiteGraph) -> Value {
    let labels = |side| {
        g.side_vertices(side)
            .map(|v| g.label(v).to_owned())
            .collect::<Vec<_>>()
    };
    let nl = g.left_count();
    let edges: Vec<Value> = g
        .edges()
        .map(|(l, r, w)| json!([l.index(), r.index() - nl, w]))
        .collect();
    json!({
        "left": labels(Side::Left),
        "right": labels(Side::Right),
        "edges": edges,
        "max_degree": g.max_degree(),
    })
}

/// Vertex lists and edges (as left/right positions) for drawing.
pub fn graph_json(text: &str, directed: bool) -> Result<String, String> {
    Ok(graph_value(&load(text, directed)?).to_string())
}

/// Local search from the vertex labelled `seed` (left side first).
pub fn local_json(text: &str, directed: bool, seed: &str, target_size: usize) -> Result<String, String> {
    let g = load(text, directed)?;
    let v = g
        .find(Side::Left, seed)
        .or_else(|| g.find(Side::Right, seed))
        .ok_or_else(|| format!("unknown vertex {seed:?}"))?;
    let r = local_density(&g, v, target_size, true).map_err(|e| e.to_string())?;
    let mut doc = ResultDocument::from_result("local", &g, &r, true);
    doc.seed = Some(seed.to_owned());
    doc.target_size = Some(target_size);
    serde_json::to_string(&doc).map_err(|e| e.to_string())
}

/// Global approximation plus the spectral estimate and guarantee.
pub fn global_json(text: &str, directed: bool) -> Result<String, String> {
    let g = load(text, directed)?;
    let r = global_density(&g, true).map_err(|e| e.to_string())?;
    let eig = match top_eigenvalue(&g, DEFAULT_TOL, DEFAULT_MAX_ITERS) {
        Ok(e) => e,
        Err(OracleError::NoConvergence { estimate }) => *estimate,
        Err(e) => return Err(e.to_string()),
    };
    let mut doc = ResultDocument::from_result("global", &g, &r, true);
    doc.lambda = Some(eig.value);
    doc.lambda_residual = Some(eig.residual);
    doc.bound = global_guarantee_bound(eig.value, g.vertex_count()).ok();
    serde_json::to_string(&doc).map_err(|e| e.to_string())
}

/// A planted instance as `{edges, s, t}` with the edge list as text.
pub fn planted_json(
    n_left: usize,
    n_right: usize,
    noise_edges: usize,
    block_left: usize,
    block_right: usize,
    density_factor: f64,
    seed: u64,
) -> Result<String, String> {
    let inst = generate_planted(&PlantedConfig {
        n_left,
        n_right,
        noise_edges,
        block_left,
        block_right,
        density_factor,
        seed,
        isolate_block: false,
    })
    .map_err(|e| e.to_string())?;
    let g = &inst.graph;
    let names = |vs: &[localdense::VertexId]| vs.iter().map(|&v| g.label(v)).collect::<Vec<_>>();
    Ok(json!({
        "edges": write_edge_list(g),
        "s": names(&inst.planted_left),
        "t": names(&inst.planted_right),
    })
    .to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = graphJson)]
pub fn graph_json_js(text: &str, directed: bool) -> Result<String, JsError> {
    js(graph_json(text, directed))
}

#[wasm_bindgen(js_name = localSearch)]
pub fn local_js(text: &str, directed: bool, seed: &str, target_size: usize) -> Result<String, JsError> {
    js(local_json(text, directed, seed, target_size))
}

#[wasm_bindgen(js_name = globalSearch)]
pub fn global_js(text: &str, directed: bool) -> Result<String, JsError> {
    js(global_json(text, directed))
}

#[wasm_bindgen(js_name = plantedGraph)]
pub fn planted_js(
    n_left: usize,
    n_right: usize,
    noise_edges: usize,
    block_left: usize,
    block_right: usize,
    density_factor: f64,
    seed: u32,
) -> Result<String, JsError> {
    js(planted_json(
        n_left,
        n_right,
        noise_edges,
        block_left,
        block_right,
        density_factor,
        seed as u64,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const STAR: &str = "c r1\nc r2\nc r3\nc r4\n";

    #[test]
    fn local_star() {
        let v: Value = serde_json::from_str(&local_json(STAR, false, "c", 4).unwrap()).unwrap();
        assert_eq!(v["density"], 2.0);
        assert_eq!(v["trace"][0]["steps"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn global_reports_bound() {
        let text = "a x\na y\na z\nb x\nb y\nb z\n";
        let v: Value = serde_json::from_str(&global_json(text, false).unwrap()).unwrap();
        assert!((v["density"].as_f64().unwrap() - 6f64.sqrt()).abs() < 1e-12);
        assert!(v["bound"].as_f64().unwrap() < v["density"].as_f64().unwrap());
        assert_eq!(v["trace"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn planted_then_graph() {
        let p: Value =
            serde_json::from_str(&planted_json(30, 30, 40, 4, 4, 1.0, 3).unwrap()).unwrap();
        assert_eq!(p["s"].as_array().unwrap().len(), 4);
        let g: Value =
            serde_json::from_str(&graph_json(p["edges"].as_str().unwrap(), false).unwrap())
                .unwrap();
        assert_eq!(g["edges"].as_array().unwrap().len(), 56);
    }

    #[test]
    fn errors_are_strings() {
        assert!(local_json(STAR, false, "nope", 4).unwrap_err().contains("unknown"));
        assert!(graph_json("a b -1", false).is_err());
        assert!(planted_json(3, 3, 0, 4, 4, 1.0, 0).is_err());
    }
}
