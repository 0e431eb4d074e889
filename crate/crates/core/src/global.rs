//! Global approximation of the densest subgraph.
//!
//! Runs the pruned growth process twice, from `1_L` and from `1_R`, with
//! thresholds `ε_t = 2^t / (8√n)` that grow each step. Only the current
//! iterate and its rounded product are live at any time, both stored as
//! per-vertex integer exponents.

use serde::Serialize;

use crate::graph::{BipartiteGraph, Side};
use crate::growth::{run_process, Candidate, LevelVector, Work};
use crate::local::{DensityError, DensityResult, FoundAt, Start};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalSchedule {
    pub n: usize,
    pub horizon: usize,
    pub epsilons: Vec<f64>,
}

impl GlobalSchedule {
    /// `T = ⌈log2(2√n)⌉`, `ε_t = 2^t / (8√n)` for `t = 0..=T`.
    pub fn new(n: usize) -> Result<Self, DensityError> {
        if n == 0 {
            return Err(DensityError::Domain("graph has no vertices".into()));
        }
        // smallest T with 2^T >= 2√n, i.e. 4^(T-1) >= n
        let mut horizon = 1usize;
        while 4u128.pow(horizon as u32 - 1) < n as u128 {
            horizon += 1;
        }
        let root = (n as f64).sqrt();
        let epsilons: Vec<f64> = (0..=horizon)
            .map(|t| 2f64.powi(t as i32) / (8.0 * root))
            .collect();
        // 2^T < 4√n, so the last threshold stays below 1/2
        assert!(epsilons[horizon] <= 0.5, "schedule overshoots: {epsilons:?}");
        Ok(GlobalSchedule {
            n,
            horizon,
            epsilons,
        })
    }
}

/// Densest level pair over both starts. Ties keep the `1_L` run.
pub fn global_density(g: &BipartiteGraph, keep_trace: bool) -> Result<DensityResult, DensityError> {
    let schedule = GlobalSchedule::new(g.vertex_count())?;
    let mut best: Option<(Side, Candidate)> = None;
    let mut work = Work::default();
    let mut traces = Vec::new();
    for side in [Side::Left, Side::Right] {
        let run = run_process(
            g,
            LevelVector::side_indicator(g, side),
            &schedule.epsilons,
            keep_trace,
        );
        work.edges_touched += run.work.edges_touched;
        work.steps += run.work.steps;
        work.max_support = work.max_support.max(run.work.max_support);
        traces.extend(run.trace);
        if let Some(c) = run.best {
            if best
                .as_ref()
                .is_none_or(|(_, b)| c.subgraph.density() > b.subgraph.density())
            {
                best = Some((side, c));
            }
        }
    }
    let (side, best) = best.ok_or(DensityError::NoCandidate)?;
    let n = g.vertex_count() as f64;
    Ok(DensityResult {
        subgraph: best.subgraph,
        found_at: FoundAt {
            start: Start::Side(side),
            t: best.t,
            i: best.i,
            j: best.j,
        },
        log_factor: (2.0 * g.max_degree() / schedule.epsilons[0]).log2(),
        guarantee_divisor: 8.0 + 4.0 * n.log2(),
        work,
        traces,
    })
}

/// `λ / (8 + 4·log2 n)`.
pub fn global_guarantee_bound(lambda: f64, n: usize) -> Result<f64, DensityError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(DensityError::Domain(format!("lambda must be positive, got {lambda}")));
    }
    if n < 2 {
        return Err(DensityError::Domain(format!("need n >= 2, got {n}")));
    }
    Ok(lambda / (8.0 + 4.0 * (n as f64).log2()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_bipartite;

    fn complete(a: usize, b: usize, prefix: &str) -> Vec<(String, String, f64)> {
        let mut edges = Vec::new();
        for i in 0..a {
            for j in 0..b {
                edges.push((format!("{prefix}l{i}"), format!("{prefix}r{j}"), 1.0));
            }
        }
        edges
    }

    #[test]
    fn schedule_shape() {
        for n in 1..5000usize {
            let s = GlobalSchedule::new(n).unwrap();
            let exact = (2.0 * (n as f64).sqrt()).log2().ceil() as usize;
            assert_eq!(s.horizon, exact.max(1), "n={n}");
            assert!(s.epsilons.windows(2).all(|w| w[1] > w[0]));
            assert!(*s.epsilons.last().unwrap() <= 0.5);
        }
    }

    #[test]
    fn k23_found_at_first_step() {
        let g = build_bipartite(complete(2, 3, "")).unwrap();
        let r = global_density(&g, false).unwrap();
        assert!((r.subgraph.density() - 6f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.found_at.start, Start::Side(Side::Left));
        assert_eq!(r.found_at.t, 0);
    }

    #[test]
    fn single_edge() {
        let g = build_bipartite([("u", "v", 1.0)]).unwrap();
        assert_eq!(global_density(&g, false).unwrap().subgraph.density(), 1.0);
    }

    #[test]
    fn dense_block_among_single_edges() {
        let mut edges = complete(3, 3, "k");
        for s in 0..40 {
            edges.push((format!("sl{s}"), format!("sr{s}"), 1.0));
        }
        let g = build_bipartite(edges).unwrap();
        let r = global_density(&g, true).unwrap();
        assert_eq!(r.subgraph.density(), 3.0);
        assert_eq!(r.subgraph.left().len(), 3);
        assert_eq!(r.traces.len(), 2);
    }

    #[test]
    fn guarantee_examples() {
        let b = global_guarantee_bound(6f64.sqrt(), 5).unwrap();
        assert!((b - 0.141_7).abs() < 1e-4);
        assert_eq!(global_guarantee_bound(12.0, 4).unwrap(), 0.75);
        assert!(global_guarantee_bound(1.0, 1).is_err());
        assert!(global_guarantee_bound(0.0, 10).is_err());
    }
}
