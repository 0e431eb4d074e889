//! Edge-list ingestion, result documents and synthetic planted instances.
//!
//! Edge-list format, one record per line:
//!
//! ```text
//! # comment
//! #!directed            (header directive; or #!bipartite)
//! left_id right_id [weight]
//! ```
//!
//! Tokens are whitespace separated, the weight defaults to `1` and must be a
//! plain nonnegative decimal (`inf`, `nan` and signs are rejected). In
//! directed mode the columns are `src dst [weight]`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    build_bipartite, from_directed, BipartiteGraph, GraphBuilder, GraphError, Side, VertexId,
};
use crate::growth::{GrowthTrace, LevelSets};
use crate::local::{DensityResult, Start};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}, column {column}: {reason}")]
    Parse {
        line: usize,
        column: usize,
        reason: String,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{0}")]
    Domain(String),
    #[error("{path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Bipartite,
    Directed,
}

fn parse_weight(token: &str) -> Result<f64, String> {
    if token.starts_with('-') {
        return Err(format!("negative weight {token:?}"));
    }
    let plain = token
        .bytes()
        .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-'));
    if !plain || !token.bytes().any(|b| b.is_ascii_digit()) {
        return Err(format!("malformed weight {token:?}"));
    }
    match token.parse::<f64>() {
        Ok(w) if w.is_finite() => Ok(w),
        Ok(_) => Err(format!("weight {token:?} is not finite")),
        Err(_) => Err(format!("malformed weight {token:?}")),
    }
}

/// Splits a line into tokens with 1-based starting columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..k]));
            }
        } else if start.is_none() {
            start = Some(k);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(s, t)| (line[..s].chars().count() + 1, t))
        .collect()
}

/// Parses edge-list text. An explicit `mode` overrides any header directive.
pub fn parse_edge_list(text: &str, mode: Option<Mode>) -> Result<BipartiteGraph, IoError> {
    let mut directive: Option<Mode> = None;
    let mut seen_data = false;
    let mut records: Vec<(&str, &str, f64)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if let Some(d) = trimmed.strip_prefix("#!") {
            let parsed = match d.trim() {
                "directed" => Mode::Directed,
                "bipartite" => Mode::Bipartite,
                other => {
                    return Err(IoError::Parse {
                        line,
                        column: 1,
                        reason: format!("unknown directive {other:?}"),
                    })
                }
            };
            if seen_data {
                return Err(IoError::Parse {
                    line,
                    column: 1,
                    reason: "directive after the first edge".into(),
                });
            }
            directive = Some(parsed);
            continue;
        }
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        seen_data = true;
        let toks = tokens(raw);
        if toks.len() < 2 || toks.len() > 3 {
            return Err(IoError::Parse {
                line,
                column: toks.get(3).map_or(1, |t| t.0),
                reason: format!("expected 2 or 3 columns, found {}", toks.len()),
            });
        }
        let weight = match toks.get(2) {
            Some(&(column, tok)) => {
                parse_weight(tok).map_err(|reason| IoError::Parse { line, column, reason })?
            }
            None => 1.0,
        };
        records.push((toks[0].1, toks[1].1, weight));
    }
    let graph = match mode.or(directive).unwrap_or(Mode::Bipartite) {
        Mode::Bipartite => build_bipartite(records)?,
        Mode::Directed => from_directed(records)?,
    };
    Ok(graph)
}

pub fn load_edge_list(path: impl AsRef<Path>, mode: Option<Mode>) -> Result<BipartiteGraph, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_edge_list(&text, mode)
}

/// Writes the graph as a bipartite edge list. Isolated vertices are not
/// represented.
pub fn write_edge_list(g: &BipartiteGraph) -> String {
    let mut out = String::new();
    for (l, r, w) in g.edges() {
        let _ = writeln!(out, "{} {} {}", g.label(l), g.label(r), w);
    }
    out
}

/// Reads one vertex label per line (blank and `#` lines skipped).
pub fn parse_id_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoundAtRecord {
    pub t: usize,
    pub i: i32,
    pub j: i32,
    /// `"L"`, `"R"`, or the seed label for local runs.
    pub start: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WorkRecord {
    pub edges_touched: u64,
    pub steps: usize,
    pub max_support: usize,
}

/// One result record. Serialized as a single JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub kind: String,
    pub s: Vec<String>,
    pub t: Vec<String>,
    pub s_size: usize,
    pub t_size: usize,
    pub edge_weight: f64,
    pub density: f64,
    pub ratio_density: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub found_at: Option<FoundAtRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guarantee_divisor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub work: Option<WorkRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<serde_json::Value>,
}

impl ResultDocument {
    /// A document for `sub` with every optional field empty.
    pub fn from_subgraph(kind: &str, g: &BipartiteGraph, sub: &crate::graph::Subgraph) -> Self {
        let labels = |vs: &[VertexId]| vs.iter().map(|&v| g.label(v).to_owned()).collect();
        ResultDocument {
            kind: kind.to_owned(),
            s: labels(sub.left()),
            t: labels(sub.right()),
            s_size: sub.left().len(),
            t_size: sub.right().len(),
            edge_weight: sub.edge_weight(),
            density: sub.density(),
            ratio_density: sub.ratio_density(),
            found_at: None,
            seed: None,
            target_size: None,
            guarantee_divisor: None,
            log_factor: None,
            lambda: None,
            lambda_residual: None,
            bound: None,
            work: None,
            wall_time_ms: None,
            trace: None,
        }
    }

    /// A document for an algorithm result, with the trace attached when
    /// `with_trace` is set and one was recorded.
    pub fn from_result(kind: &str, g: &BipartiteGraph, r: &DensityResult, with_trace: bool) -> Self {
        let mut doc = Self::from_subgraph(kind, g, &r.subgraph);
        let start = match r.found_at.start {
            Start::Vertex(v) => g.label(v).to_owned(),
            Start::Side(side) => side.to_string(),
        };
        doc.found_at = Some(FoundAtRecord {
            t: r.found_at.t,
            i: r.found_at.i,
            j: r.found_at.j,
            start,
        });
        doc.guarantee_divisor = Some(r.guarantee_divisor);
        doc.log_factor = Some(r.log_factor);
        doc.work = Some(WorkRecord {
            edges_touched: r.work.edges_touched,
            steps: r.work.steps,
            max_support: r.work.max_support,
        });
        if with_trace && !r.traces.is_empty() {
            doc.trace = Some(trace_json(g, &r.traces));
        }
        doc
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("document serializes")
    }

    pub fn from_json_line(line: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(line)
    }

    /// Recomputes `d(S,T)` from the graph by label lookup.
    pub fn recompute_density(&self, g: &BipartiteGraph) -> Result<f64, IoError> {
        let resolve = |ids: &[String], side: Side| -> Result<Vec<VertexId>, IoError> {
            ids.iter()
                .map(|id| {
                    g.find(side, id)
                        .ok_or_else(|| IoError::Domain(format!("unknown {side} vertex {id:?}")))
                })
                .collect()
        };
        let s = resolve(&self.s, Side::Left)?;
        let t = resolve(&self.t, Side::Right)?;
        Ok(g.density(&s, &t)?.density())
    }
}

/// Traces as JSON with level-set members written as labels.
pub fn trace_json(g: &BipartiteGraph, traces: &[GrowthTrace]) -> serde_json::Value {
    let levels = |sets: &LevelSets| -> serde_json::Value {
        sets.levels()
            .iter()
            .map(|l| {
                serde_json::json!({
                    "exponent": l.exponent,
                    "vertices": l.vertices.iter().map(|&v| g.label(v)).collect::<Vec<_>>(),
                })
            })
            .collect()
    };
    traces
        .iter()
        .map(|tr| {
            let steps: Vec<serde_json::Value> = tr
                .steps
                .iter()
                .map(|s| {
                    let mut v = serde_json::to_value(s).expect("step serializes");
                    v["x_levels"] = levels(&s.x_levels);
                    v["rounded_levels"] = levels(&s.rounded_levels);
                    v
                })
                .collect();
            serde_json::json!({
                "start_side": tr.start_side,
                "epsilons": tr.epsilons,
                "steps": steps,
            })
        })
        .collect()
}

/// Parameters of a planted instance: uniform noise edges around a dense
/// block on `block_left × block_right` vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedConfig {
    pub n_left: usize,
    pub n_right: usize,
    pub noise_edges: usize,
    pub block_left: usize,
    pub block_right: usize,
    /// Block density is `factor·√(ab)`; the block gets `round(factor·a·b)`
    /// edges sampled without replacement.
    pub density_factor: f64,
    pub seed: u64,
    /// Keep noise edges away from block vertices entirely.
    pub isolate_block: bool,
}

#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub graph: BipartiteGraph,
    pub planted_left: Vec<VertexId>,
    pub planted_right: Vec<VertexId>,
}

/// Generates a planted instance. Vertices are labelled `l{k}` and `r{k}`,
/// noise edges are distinct, unit weight and never inside the block.
pub fn generate_planted(cfg: &PlantedConfig) -> Result<PlantedInstance, IoError> {
    let (a, b) = (cfg.block_left, cfg.block_right);
    if a == 0 || b == 0 || a > cfg.n_left || b > cfg.n_right {
        return Err(IoError::Domain(format!(
            "block {a}x{b} does not fit in {}x{}",
            cfg.n_left, cfg.n_right
        )));
    }
    if !(cfg.density_factor > 0.0 && cfg.density_factor <= 1.0) {
        return Err(IoError::Domain(format!(
            "density factor must lie in (0, 1], got {}",
            cfg.density_factor
        )));
    }
    let block_edges = (cfg.density_factor * (a * b) as f64).round() as usize;
    if block_edges == 0 {
        return Err(IoError::Domain("density factor leaves the block empty".into()));
    }
    let available = if cfg.isolate_block {
        (cfg.n_left - a) * (cfg.n_right - b)
    } else {
        cfg.n_left * cfg.n_right - a * b
    };
    if cfg.noise_edges > available {
        return Err(IoError::Domain(format!(
            "{} noise edges requested, only {available} pairs available",
            cfg.noise_edges
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut block_l = index::sample(&mut rng, cfg.n_left, a).into_vec();
    let mut block_r = index::sample(&mut rng, cfg.n_right, b).into_vec();
    block_l.sort_unstable();
    block_r.sort_unstable();
    let mut in_block_l = vec![false; cfg.n_left];
    let mut in_block_r = vec![false; cfg.n_right];
    block_l.iter().for_each(|&i| in_block_l[i] = true);
    block_r.iter().for_each(|&j| in_block_r[j] = true);

    let mut pairs: Vec<(usize, usize)> = index::sample(&mut rng, a * b, block_edges)
        .into_iter()
        .map(|k| (block_l[k / b], block_r[k % b]))
        .collect();
    pairs.sort_unstable();

    let allowed = |i: usize, j: usize| {
        if cfg.isolate_block {
            !in_block_l[i] && !in_block_r[j]
        } else {
            !(in_block_l[i] && in_block_r[j])
        }
    };
    if cfg.noise_edges * 2 > available {
        // dense regime: enumerate the allowed pairs and sample among them
        let all: Vec<(usize, usize)> = (0..cfg.n_left)
            .flat_map(|i| (0..cfg.n_right).map(move |j| (i, j)))
            .filter(|&(i, j)| allowed(i, j))
            .collect();
        for k in index::sample(&mut rng, all.len(), cfg.noise_edges) {
            pairs.push(all[k]);
        }
    } else {
        let mut seen: HashSet<(usize, usize)> = HashSet::with_capacity(cfg.noise_edges);
        while seen.len() < cfg.noise_edges {
            let i = rng.random_range(0..cfg.n_left);
            let j = rng.random_range(0..cfg.n_right);
            if allowed(i, j) && seen.insert((i, j)) {
                pairs.push((i, j));
            }
        }
    }

    let mut builder = GraphBuilder::with_capacity(cfg.n_left.max(cfg.n_right), pairs.len());
    let left_labels: Vec<String> = (0..cfg.n_left).map(|i| format!("l{i}")).collect();
    let right_labels: Vec<String> = (0..cfg.n_right).map(|j| format!("r{j}")).collect();
    for l in &left_labels {
        builder.add_vertex(Side::Left, l);
    }
    for r in &right_labels {
        builder.add_vertex(Side::Right, r);
    }
    for &(i, j) in &pairs {
        builder.add_edge(&left_labels[i], &right_labels[j], 1.0)?;
    }
    let graph = builder.build()?;
    let planted_left = block_l.iter().map(|&i| VertexId(i as u32)).collect();
    let planted_right = block_r
        .iter()
        .map(|&j| VertexId((cfg.n_left + j) as u32))
        .collect();
    Ok(PlantedInstance {
        graph,
        planted_left,
        planted_right,
    })
}
