//! Reference computations: exact densest subgraph on small graphs, the top
//! eigenpair by power iteration, and a constructive good-seed verifier.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{BipartiteGraph, GraphError, Side, Subgraph, VertexId};

pub const DEFAULT_SIDE_CAP: usize = 20;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITERS: usize = 10_000;

const CERT_TOL: f64 = 1e-12;
const CERT_MAX_ITERS: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("smaller side has {size} vertices, cap is {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("power iteration did not converge after {} iterations", .estimate.iterations)]
    NoConvergence { estimate: Box<EigenEstimate> },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Exact maximum of `d(S,T)`.
///
/// Every subset of the smaller side is enumerated. For a fixed subset the
/// best partner of each size `j` is the `j` vertices with the largest weight
/// into it, so one sort per subset suffices. Ties go to the first subset in
/// lexicographic order of vertex index, then the smallest partner size.
pub fn exact_densest(g: &BipartiteGraph, side_cap: usize) -> Result<Subgraph, OracleError> {
    let enum_side = if g.left_count() <= g.right_count() {
        Side::Left
    } else {
        Side::Right
    };
    let small: Vec<VertexId> = g.side_vertices(enum_side).collect();
    if small.len() > side_cap {
        return Err(OracleError::TooLarge {
            size: small.len(),
            cap: side_cap,
        });
    }
    let offset = match enum_side {
        Side::Left => g.left_count(),
        Side::Right => 0,
    };
    let other_len = g.vertex_count() - small.len();

    let mut search = Search {
        g,
        small: &small,
        offset,
        contrib: vec![0.0; other_len],
        stamp: vec![0; other_len],
        generation: 0,
        chosen: Vec::with_capacity(small.len()),
        best_density: f64::NEG_INFINITY,
        best: None,
        scratch: Vec::with_capacity(other_len),
    };
    search.extend(0);
    let (chosen, partners, e) = search.best.expect("graph has an edge");
    let (left, right) = match enum_side {
        Side::Left => (chosen, partners),
        Side::Right => (partners, chosen),
    };
    Ok(Subgraph::from_sorted(left, right, e))
}

type Best = (Vec<VertexId>, Vec<VertexId>, f64);

struct Search<'a> {
    g: &'a BipartiteGraph,
    small: &'a [VertexId],
    offset: usize,
    contrib: Vec<f64>,
    /// Marks partners already collected for the current subset.
    stamp: Vec<u64>,
    generation: u64,
    chosen: Vec<VertexId>,
    best_density: f64,
    best: Option<Best>,
    scratch: Vec<(f64, usize)>,
}

impl Search<'_> {
    /// Visits every subset that extends `chosen` with vertices from `from..`.
    /// Contributions are rebuilt by snapshot rather than subtraction so each
    /// subset sees sums taken in the same order.
    fn extend(&mut self, from: usize) {
        for k in from..self.small.len() {
            let u = self.small[k];
            let saved: Vec<(usize, f64)> = self
                .g
                .neighbors(u)
                .map(|(w, _)| (w.index() - self.offset, self.contrib[w.index() - self.offset]))
                .collect();
            for (w, weight) in self.g.neighbors(u) {
                self.contrib[w.index() - self.offset] += weight;
            }
            self.chosen.push(u);
            self.evaluate();
            self.extend(k + 1);
            self.chosen.pop();
            for (idx, old) in saved.into_iter().rev() {
                self.contrib[idx] = old;
            }
        }
    }

    fn evaluate(&mut self) {
        self.scratch.clear();
        self.generation += 1;
        // only partners adjacent to the chosen set can help
        for &u in &self.chosen {
            for (w, _) in self.g.neighbors(u) {
                let idx = w.index() - self.offset;
                if self.stamp[idx] != self.generation {
                    self.stamp[idx] = self.generation;
                    self.scratch.push((self.contrib[idx], idx));
                }
            }
        }
        // descending weight, then ascending index
        self.scratch
            .sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let s = self.chosen.len() as f64;
        let mut prefix = 0.0;
        let mut best_j = None;
        for (j, &(c, _)) in self.scratch.iter().enumerate() {
            prefix += c;
            let d = prefix / (s * (j + 1) as f64).sqrt();
            if d > self.best_density {
                self.best_density = d;
                best_j = Some((j + 1, prefix));
            }
        }
        if let Some((j, e)) = best_j {
            let mut partners: Vec<VertexId> = self.scratch[..j]
                .iter()
                .map(|&(_, idx)| VertexId((idx + self.offset) as u32))
                .collect();
            partners.sort_unstable();
            let mut chosen = self.chosen.clone();
            chosen.sort_unstable();
            self.best = Some((chosen, partners, e));
        }
    }
}

/// Largest eigenvalue of `A` with a nonnegative unit eigenvector over all
/// vertices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenEstimate {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `‖φA − λφ‖`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration from the all-ones vector.
pub fn top_eigenvalue(
    g: &BipartiteGraph,
    tol: f64,
    max_iters: usize,
) -> Result<EigenEstimate, OracleError> {
    let est = principal_pair(g, None, tol, max_iters);
    if est.converged {
        Ok(est)
    } else {
        Err(OracleError::NoConvergence {
            estimate: Box::new(est),
        })
    }
}

fn apply(g: &BipartiteGraph, active: Option<&[bool]>, x: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (u, &xu) in x.iter().enumerate() {
        if xu == 0.0 {
            continue;
        }
        for (w, weight) in g.neighbors(VertexId(u as u32)) {
            if active.is_none_or(|a| a[w.index()]) {
                out[w.index()] += xu * weight;
            }
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Power iteration on `A²` (restricted to `active` when given) so the ±λ
/// pair of a bipartite spectrum does not make the iterate oscillate. The
/// eigenvector for `+λ` is recovered as `x + xA/λ`.
pub(crate) fn principal_pair(
    g: &BipartiteGraph,
    active: Option<&[bool]>,
    tol: f64,
    max_iters: usize,
) -> EigenEstimate {
    let n = g.vertex_count();
    let mut x: Vec<f64> = (0..n)
        .map(|v| if active.is_none_or(|a| a[v]) { 1.0 } else { 0.0 })
        .collect();
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let start_norm = norm(&x);
    if start_norm == 0.0 {
        return EigenEstimate {
            value: 0.0,
            vector: x,
            residual: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    x.iter_mut().for_each(|v| *v /= start_norm);

    let mut lambda = 0.0f64;
    let mut phi = x.clone();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        apply(g, active, &x, &mut y);
        let next_lambda = norm(&y);
        if next_lambda == 0.0 {
            lambda = 0.0;
            phi = x.clone();
            residual = 0.0;
            converged = true;
            break;
        }
        // φ = x + xA/λ, then its residual
        for v in 0..n {
            phi[v] = x[v] + y[v] / next_lambda;
        }
        let pn = norm(&phi);
        phi.iter_mut().for_each(|v| *v /= pn);
        apply(g, active, &phi, &mut z);
        residual = z
            .iter()
            .zip(&phi)
            .map(|(a, b)| (a - next_lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        let change = (next_lambda - lambda).abs();
        lambda = next_lambda;
        if change < tol * lambda && residual < tol * lambda {
            converged = true;
            break;
        }
        apply(g, active, &y, &mut z);
        let zn = norm(&z);
        for v in 0..n {
            x[v] = z[v] / zn;
        }
    }
    EigenEstimate {
        value: lambda,
        vector: phi,
        residual,
        iterations,
        converged,
    }
}

/// One peeling round: an eigenvector of the graph restricted to the
/// remaining `S'` and `T`, and the vertices it certifies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeelRound {
    pub eigenvalue: f64,
    /// Nonzero entries of the unit vector `ψ`.
    pub psi: Vec<(VertexId, f64)>,
    /// `min over support(ψ) of (ψA)(u) − θψ(u)`, measured with the full `A`.
    pub margin: f64,
    /// Certified vertices with their `ψ(v)`.
    pub members: Vec<(VertexId, f64)>,
}

/// A good starting set: a subset `G` of `S` where every member carries a
/// certificate vector `ψ` with support in `S ∪ T`, `ψA ≥ θψ`, and
/// `ψ(v) ≥ 1/√(2|S|)`. Not necessarily the largest such set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodSeedReport {
    pub theta: f64,
    pub good_set: Vec<VertexId>,
    pub rounds: Vec<PeelRound>,
    /// `e(G,T) / e(S,T)`.
    pub coverage: f64,
}

/// Peels `S` in rounds. Each round takes the principal eigenvector `ψ` of
/// the graph restricted to `(S', T)`; if its eigenvalue reaches `θ`, every
/// remaining vertex with `ψ(v) ≥ 1/√(2|S|)` joins the good set.
pub fn good_seed_set(
    g: &BipartiteGraph,
    left: &[VertexId],
    right: &[VertexId],
    theta: f64,
) -> Result<GoodSeedReport, OracleError> {
    if theta.is_nan() || theta <= 0.0 {
        return Err(OracleError::PreconditionFailed(format!(
            "theta must be positive, got {theta}"
        )));
    }
    let sub = g.density(left, right)?;
    if sub.density() < 2.0 * theta {
        return Err(OracleError::PreconditionFailed(format!(
            "d(S,T) = {} is below 2θ = {}",
            sub.density(),
            2.0 * theta
        )));
    }
    let s_all = sub.left().to_vec();
    let t_all = sub.right().to_vec();
    let threshold = 1.0 / (2.0 * s_all.len() as f64).sqrt();

    let mut active = vec![false; g.vertex_count()];
    for &v in s_all.iter().chain(&t_all) {
        active[v.index()] = true;
    }
    let mut remaining = s_all.clone();
    let mut good = Vec::new();
    let mut rounds = Vec::new();
    let mut psi_a = vec![0.0; g.vertex_count()];
    while !remaining.is_empty() {
        let est = principal_pair(g, Some(&active), CERT_TOL, CERT_MAX_ITERS);
        if est.value < theta {
            break;
        }
        let members: Vec<(VertexId, f64)> = remaining
            .iter()
            .map(|&v| (v, est.vector[v.index()]))
            .filter(|&(_, p)| p >= threshold - CERT_TOL)
            .collect();
        if members.is_empty() {
            break;
        }
        apply(g, None, &est.vector, &mut psi_a);
        let psi: Vec<(VertexId, f64)> = est
            .vector
            .iter()
            .enumerate()
            .filter(|&(_, &p)| p != 0.0)
            .map(|(v, &p)| (VertexId(v as u32), p))
            .collect();
        let margin = psi
            .iter()
            .map(|&(v, p)| psi_a[v.index()] - theta * p)
            .fold(f64::INFINITY, f64::min);
        for &(v, _) in &members {
            active[v.index()] = false;
            good.push(v);
        }
        remaining.retain(|v| active[v.index()]);
        rounds.push(PeelRound {
            eigenvalue: est.value,
            psi,
            margin,
            members,
        });
    }
    good.sort_unstable();
    let coverage = g.edge_weight_between(&good, &t_all)? / sub.edge_weight();
    Ok(GoodSeedReport {
        theta,
        good_set: good,
        rounds,
        coverage,
    })
}

/// Re-checks a round's certificate against the full graph: support inside
/// `S ∪ T`, unit norm, `ψA ≥ θψ − 1e-9` on the support and each member's
/// `ψ(v) ≥ 1/√(2|S|) − 1e-12`.
pub fn verify_round(
    g: &BipartiteGraph,
    round: &PeelRound,
    left: &[VertexId],
    right: &[VertexId],
    theta: f64,
) -> bool {
    let in_st = |v: VertexId| left.contains(&v) || right.contains(&v);
    if !round.psi.iter().all(|&(v, p)| p >= 0.0 && in_st(v)) {
        return false;
    }
    let unit = round.psi.iter().map(|&(_, p)| p * p).sum::<f64>().sqrt();
    if (unit - 1.0).abs() > 1e-9 {
        return false;
    }
    let lookup = |v: VertexId| {
        round
            .psi
            .binary_search_by_key(&v, |e| e.0)
            .map_or(0.0, |k| round.psi[k].1)
    };
    let ok_support = round.psi.iter().all(|&(u, p)| {
        let psi_a: f64 = g.neighbors(u).map(|(w, wt)| lookup(w) * wt).sum();
        psi_a - theta * p >= -1e-9
    });
    let threshold = 1.0 / (2.0 * left.len() as f64).sqrt();
    ok_support
        && round
            .members
            .iter()
            .all(|&(v, _)| lookup(v) >= threshold - 1e-12)
}
