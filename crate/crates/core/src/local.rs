//! Local dense subgraph search from a single starting vertex.

use std::thread;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{BipartiteGraph, Side, Subgraph, VertexId};
use crate::growth::{run_process, GrowthTrace, LevelVector, Work};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("unknown vertex #{0}")]
    UnknownVertex(u32),
    #[error("no candidate subgraph reachable from the start")]
    NoCandidate,
    #[error("domain error: {0}")]
    Domain(String),
}

/// Horizon and pruning thresholds for a target size `K`:
/// `T = ⌈log2 √(2K)⌉` and `ε_t = 2^-t / (8K)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalSchedule {
    pub target_size: usize,
    pub horizon: usize,
    pub epsilons: Vec<f64>,
}

impl LocalSchedule {
    pub fn new(target_size: usize) -> Result<Self, DensityError> {
        if target_size == 0 {
            return Err(DensityError::Domain("target size must be at least 1".into()));
        }
        // smallest T with 2^T >= sqrt(2K), i.e. 4^T >= 2K
        let twice = 2u128 * target_size as u128;
        let mut horizon = 0usize;
        while 4u128.pow(horizon as u32) < twice {
            horizon += 1;
        }
        let base = 1.0 / (8.0 * target_size as f64);
        let epsilons = (0..=horizon)
            .map(|t| base * 0.5f64.powi(t as i32))
            .collect();
        Ok(LocalSchedule {
            target_size,
            horizon,
            epsilons,
        })
    }
}

/// Where a process started.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    Vertex(VertexId),
    Side(Side),
}

/// `(t, i, j)`: step and the two level exponents of the winning pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FoundAt {
    pub start: Start,
    pub t: usize,
    pub i: i32,
    pub j: i32,
}

#[derive(Debug, Clone)]
pub struct DensityResult {
    pub subgraph: Subgraph,
    pub found_at: FoundAt,
    /// `L = log2(2Δ/ε_0)`, the log factor the analysis actually uses.
    pub log_factor: f64,
    /// Divisor of the stated guarantee: `8·log2(16ΔK)` locally,
    /// `8 + 4·log2 n` globally.
    pub guarantee_divisor: f64,
    pub work: Work,
    pub traces: Vec<GrowthTrace>,
}

/// Runs the pruned growth process from `1_v` with the schedule for `K` and
/// returns the densest level pair seen at any step.
pub fn local_density(
    g: &BipartiteGraph,
    v: VertexId,
    target_size: usize,
    keep_trace: bool,
) -> Result<DensityResult, DensityError> {
    if !g.contains(v) {
        return Err(DensityError::UnknownVertex(v.0));
    }
    let schedule = LocalSchedule::new(target_size)?;
    let run = run_process(g, LevelVector::unit(g, v), &schedule.epsilons, keep_trace);
    let best = run.best.ok_or(DensityError::NoCandidate)?;
    let delta = g.max_degree();
    Ok(DensityResult {
        subgraph: best.subgraph,
        found_at: FoundAt {
            start: Start::Vertex(v),
            t: best.t,
            i: best.i,
            j: best.j,
        },
        log_factor: (2.0 * delta / schedule.epsilons[0]).log2(),
        guarantee_divisor: 8.0 * (16.0 * delta * target_size as f64).log2(),
        work: run.work,
        traces: run.trace.into_iter().collect(),
    })
}

/// `θ / (8·log2(16ΔK))`.
pub fn local_guarantee_bound(
    theta: f64,
    max_degree: f64,
    target_size: usize,
) -> Result<f64, DensityError> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(DensityError::Domain(format!("theta must be positive, got {theta}")));
    }
    if !(max_degree.is_finite() && max_degree >= 1.0) {
        return Err(DensityError::Domain(format!(
            "max degree must be at least 1, got {max_degree}"
        )));
    }
    if target_size == 0 {
        return Err(DensityError::Domain("target size must be at least 1".into()));
    }
    Ok(theta / (8.0 * (16.0 * max_degree * target_size as f64).log2()))
}

#[derive(Debug, Clone)]
pub struct ScanHit {
    /// Position of the seed in the input sequence.
    pub seed_index: usize,
    pub seed: VertexId,
    pub result: DensityResult,
}

#[derive(Debug, Clone, Default)]
pub struct ScanOutcome {
    pub hits: Vec<ScanHit>,
    pub failures: Vec<(VertexId, DensityError)>,
}

/// Runs [`local_density`] from every seed, drops results whose vertex sets
/// repeat an earlier seed's, and keeps the `top_n` densest (ties to the
/// earlier seed). Up to `parallelism` threads share the graph.
pub fn seed_scan(
    g: &BipartiteGraph,
    seeds: &[VertexId],
    target_size: usize,
    top_n: usize,
    parallelism: usize,
) -> ScanOutcome {
    let workers = parallelism.clamp(1, seeds.len().max(1));
    let runs: Vec<Result<DensityResult, DensityError>> = if workers == 1 {
        seeds
            .iter()
            .map(|&s| local_density(g, s, target_size, false))
            .collect()
    } else {
        let chunk = seeds.len().div_ceil(workers);
        thread::scope(|scope| {
            let handles: Vec<_> = seeds
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        part.iter()
                            .map(|&s| local_density(g, s, target_size, false))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("scan worker panicked"))
                .collect()
        })
    };

    let mut outcome = ScanOutcome::default();
    for (seed_index, (run, &seed)) in runs.into_iter().zip(seeds).enumerate() {
        match run {
            Ok(result) => {
                let repeated = outcome
                    .hits
                    .iter()
                    .any(|h| h.result.subgraph.same_vertices(&result.subgraph));
                if !repeated {
                    outcome.hits.push(ScanHit {
                        seed_index,
                        seed,
                        result,
                    });
                }
            }
            Err(e) => outcome.failures.push((seed, e)),
        }
    }
    // stable sort keeps seed order among equal densities
    outcome.hits.sort_by(|a, b| {
        b.result
            .subgraph
            .density()
            .total_cmp(&a.result.subgraph.density())
    });
    outcome.hits.truncate(top_n);
    outcome
}
