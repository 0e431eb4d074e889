//! The pruned growth process.
//!
//! Each step multiplies the current vector by the adjacency matrix, rounds
//! every entry up to a power of two and drops entries at most `ε·‖z‖`:
//!
//! ```text
//! x_{t+1} = truncate_{ε_{t+1}}(round(x_t A))
//! ```
//!
//! Iterates are stored as integer exponents, so a vector is a list of
//! `(vertex, i)` pairs meaning `x(vertex) = 2^i`.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{BipartiteGraph, Side, Subgraph, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrowthError {
    #[error("negative entry {value} at vertex {vertex}")]
    NegativeEntry { vertex: u32, value: f64 },
    #[error("non-finite entry at vertex {vertex}")]
    NonFinite { vertex: u32 },
    #[error("vector has empty support")]
    ZeroVector,
    #[error("no candidate pair to evaluate")]
    NoCandidate,
}

/// Exact `2^i` for every exponent a finite positive `f64` can round to.
#[inline]
pub fn exp2i(i: i32) -> f64 {
    if (-1022..=1023).contains(&i) {
        f64::from_bits(((i + 1023) as u64) << 52)
    } else if (-1074..-1022).contains(&i) {
        f64::from_bits(1u64 << (i + 1074))
    } else {
        2f64.powi(i)
    }
}

/// Smallest `i` with `2^i >= z`, for finite `z > 0`. Read off the bit
/// pattern so no `log2` rounding can creep in.
pub fn ceil_log2(z: f64) -> i32 {
    debug_assert!(z > 0.0 && z.is_finite());
    let bits = z.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let mantissa = bits & ((1u64 << 52) - 1);
    if biased == 0 {
        // subnormal: z = mantissa * 2^-1074
        let top = 63 - mantissa.leading_zeros() as i32;
        let exact = mantissa.is_power_of_two();
        top - 1074 + i32::from(!exact)
    } else {
        let e = biased - 1023;
        if mantissa == 0 {
            e
        } else {
            e + 1
        }
    }
}

/// A real-valued sparse vector, support on one side. Entries sorted by vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseVector {
    side: Side,
    entries: Vec<(VertexId, f64)>,
}

impl SparseVector {
    pub fn new(side: Side, mut entries: Vec<(VertexId, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        SparseVector { side, entries }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn entries(&self) -> &[(VertexId, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Sparse vector whose nonzero entries are exact powers of two.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelVector {
    side: Side,
    entries: Vec<(VertexId, i32)>,
    norm: f64,
}

impl LevelVector {
    /// Entries are sorted by vertex; duplicate vertices are not allowed.
    pub fn new(side: Side, mut entries: Vec<(VertexId, i32)>) -> Self {
        entries.sort_by_key(|e| e.0);
        debug_assert!(entries.windows(2).all(|w| w[0].0 != w[1].0));
        let norm = norm_of(&entries);
        LevelVector {
            side,
            entries,
            norm,
        }
    }

    /// The indicator `1_v`.
    pub fn unit(g: &BipartiteGraph, v: VertexId) -> Self {
        LevelVector::new(g.side(v), vec![(v, 0)])
    }

    /// The indicator of a whole side, `1_L` or `1_R`.
    pub fn side_indicator(g: &BipartiteGraph, side: Side) -> Self {
        LevelVector::new(side, g.side_vertices(side).map(|v| (v, 0)).collect())
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn entries(&self) -> &[(VertexId, i32)] {
        &self.entries
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn get(&self, v: VertexId) -> Option<i32> {
        self.entries
            .binary_search_by_key(&v, |e| e.0)
            .ok()
            .map(|k| self.entries[k].1)
    }

    pub fn value(&self, v: VertexId) -> f64 {
        self.get(v).map_or(0.0, exp2i)
    }

    /// Sum of fanouts over the support: the edges a multiply touches.
    pub fn incident_edges(&self, g: &BipartiteGraph) -> usize {
        self.entries.iter().map(|&(v, _)| g.fanout(v)).sum()
    }
}

fn norm_of(entries: &[(VertexId, i32)]) -> f64 {
    entries
        .iter()
        .map(|&(_, i)| {
            let x = exp2i(i);
            x * x
        })
        .sum::<f64>()
        .sqrt()
}

/// One level `S_i = { v : x(v) = 2^i }`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Level {
    pub exponent: i32,
    pub vertices: Vec<VertexId>,
}

/// Partition of a vector's support by exponent, ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSets {
    side: Side,
    levels: Vec<Level>,
}

impl LevelSets {
    pub fn side(&self) -> Side {
        self.side
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn get(&self, exponent: i32) -> Option<&[VertexId]> {
        self.levels
            .binary_search_by_key(&exponent, |l| l.exponent)
            .ok()
            .map(|k| self.levels[k].vertices.as_slice())
    }
}

/// Rounds every positive entry up to the nearest power of two. Zeros vanish.
pub fn round_up_pow2(z: &SparseVector) -> Result<LevelVector, GrowthError> {
    let mut entries = Vec::with_capacity(z.entries.len());
    for &(v, value) in &z.entries {
        if !value.is_finite() {
            return Err(GrowthError::NonFinite { vertex: v.0 });
        }
        if value < 0.0 {
            return Err(GrowthError::NegativeEntry { vertex: v.0, value });
        }
        if value > 0.0 {
            entries.push((v, ceil_log2(value)));
        }
    }
    Ok(LevelVector::new(z.side, entries))
}

/// Keeps entries strictly above `ε·‖z‖`.
pub fn truncate(z: &LevelVector, epsilon: f64) -> LevelVector {
    truncate_split(z, epsilon).0
}

/// Like [`truncate`] but also returns the removed part (the residual `r_t`).
pub fn truncate_split(z: &LevelVector, epsilon: f64) -> (LevelVector, LevelVector) {
    debug_assert!((0.0..=1.0).contains(&epsilon));
    let threshold = epsilon * z.norm;
    let (kept, removed): (Vec<_>, Vec<_>) =
        z.entries.iter().partition(|&&(_, i)| exp2i(i) > threshold);
    (
        LevelVector::new(z.side, kept),
        LevelVector::new(z.side, removed),
    )
}

/// `x A`, scattering over the edges incident to the support of `x`.
pub fn multiply(g: &BipartiteGraph, x: &LevelVector) -> SparseVector {
    let mut acc: HashMap<VertexId, f64> = HashMap::with_capacity(x.entries.len() * 2);
    for &(u, i) in &x.entries {
        let xu = exp2i(i);
        for (w, weight) in g.neighbors(u) {
            *acc.entry(w).or_insert(0.0) += xu * weight;
        }
    }
    SparseVector::new(x.side.opposite(), acc.into_iter().collect())
}

pub fn level_sets(x: &LevelVector) -> LevelSets {
    let mut by_level: BTreeMap<i32, Vec<VertexId>> = BTreeMap::new();
    for &(v, i) in &x.entries {
        by_level.entry(i).or_default().push(v);
    }
    LevelSets {
        side: x.side,
        levels: by_level
            .into_iter()
            .map(|(exponent, vertices)| Level { exponent, vertices })
            .collect(),
    }
}

#[derive(Debug, Clone)]
pub struct Step {
    pub next: LevelVector,
    /// Level sets of `round(x_t A)` before truncation.
    pub post_levels: LevelSets,
    /// `‖round(x_t A)‖`.
    pub pre_norm: f64,
}

/// One multiply-round-truncate step. An empty result is reported as
/// [`GrowthError::ZeroVector`].
pub fn step(g: &BipartiteGraph, x: &LevelVector, epsilon_next: f64) -> Result<Step, GrowthError> {
    let rounded = round_up_pow2(&multiply(g, x))?;
    let next = truncate(&rounded, epsilon_next);
    if next.is_empty() {
        return Err(GrowthError::ZeroVector);
    }
    Ok(Step {
        post_levels: level_sets(&rounded),
        pre_norm: rounded.norm,
        next,
    })
}

/// Densest level pair of one step.
#[derive(Debug, Clone)]
pub struct PairChoice {
    /// Oriented with the left side first regardless of where `x` lives.
    pub subgraph: Subgraph,
    /// Exponent of the `x` level.
    pub i: i32,
    /// Exponent of the `round(x A)` level.
    pub j: i32,
    pub pairs_evaluated: usize,
    pub edges_touched: usize,
}

/// Evaluates `d(S_i, S'_j)` for every pair of levels with one pass over the
/// edges leaving the `x` levels. Ties go to the smaller `(i, j)`.
pub fn evaluate_candidates(
    g: &BipartiteGraph,
    x_levels: &LevelSets,
    y_levels: &LevelSets,
) -> Result<PairChoice, GrowthError> {
    if x_levels.is_empty() || y_levels.is_empty() {
        return Err(GrowthError::NoCandidate);
    }
    let mut y_level_of: HashMap<VertexId, i32> = HashMap::new();
    for level in &y_levels.levels {
        for &v in &level.vertices {
            y_level_of.insert(v, level.exponent);
        }
    }
    let mut table: BTreeMap<(i32, i32), f64> = BTreeMap::new();
    let mut edges_touched = 0usize;
    for level in &x_levels.levels {
        for &u in &level.vertices {
            edges_touched += g.fanout(u);
            for (w, weight) in g.neighbors(u) {
                if let Some(&j) = y_level_of.get(&w) {
                    *table.entry((level.exponent, j)).or_insert(0.0) += weight;
                }
            }
        }
    }

    let size = |sets: &LevelSets, e: i32| sets.get(e).map_or(0, <[VertexId]>::len) as f64;
    let mut best: Option<((i32, i32), f64)> = None;
    for (&(i, j), &e) in &table {
        let d = e / (size(x_levels, i) * size(y_levels, j)).sqrt();
        if best.is_none_or(|(_, bd)| d > bd) {
            best = Some(((i, j), d));
        }
    }
    let ((i, j), _) = best.ok_or(GrowthError::NoCandidate)?;
    let xs = x_levels.get(i).unwrap_or_default().to_vec();
    let ys = y_levels.get(j).unwrap_or_default().to_vec();
    let e = table[&(i, j)];
    let subgraph = match x_levels.side {
        Side::Left => Subgraph::from_sorted(xs, ys, e),
        Side::Right => Subgraph::from_sorted(ys, xs, e),
    };
    Ok(PairChoice {
        subgraph,
        i,
        j,
        pairs_evaluated: table.len(),
        edges_touched,
    })
}

/// Growth bound for one recorded step: if no level pair is denser than
/// `theta`, then `‖round(x_t A)‖ <= 2 θ ‖x_t‖ log2(2Δ/ε_t)`. Vacuously true
/// when some pair is denser than `theta`.
pub fn growth_bound_check(
    theta: f64,
    max_degree: f64,
    epsilon: f64,
    x_norm: f64,
    rounded_norm: f64,
    max_pair_density: f64,
) -> bool {
    if max_pair_density > theta {
        return true;
    }
    rounded_norm <= 2.0 * theta * x_norm * (2.0 * max_degree / epsilon).log2()
}

/// `⌈log2(2Δ/ε)⌉ + 1`: the most levels `round(x_t A)` can occupy.
pub fn level_count_bound(max_degree: f64, epsilon: f64) -> usize {
    (2.0 * max_degree / epsilon).log2().ceil() as usize + 1
}

/// Per-step record of a run.
#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub t: usize,
    /// `ε_t`, which bounds `x_t`.
    pub epsilon: f64,
    /// `ε_{t+1}`, used to truncate `round(x_t A)`.
    pub epsilon_next: f64,
    pub x_norm: f64,
    pub x_support: usize,
    pub x_levels: LevelSets,
    /// `‖round(x_t A)‖` before truncation.
    pub rounded_norm: f64,
    pub rounded_levels: LevelSets,
    pub max_pair_density: f64,
    pub pair: (i32, i32),
    /// Norm of the entries removed by truncation.
    pub pruned_mass: f64,
    pub pruned_count: usize,
    pub next_support: usize,
    pub next_norm: f64,
    pub best_density: f64,
    pub best_at: (usize, i32, i32),
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthTrace {
    pub start_side: Side,
    pub epsilons: Vec<f64>,
    pub steps: Vec<StepRecord>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Work {
    /// Adjacency entries scanned, counting the multiply and the pair pass.
    pub edges_touched: u64,
    pub steps: usize,
    pub max_support: usize,
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub subgraph: Subgraph,
    pub t: usize,
    pub i: i32,
    pub j: i32,
}

#[derive(Debug, Clone)]
pub struct ProcessRun {
    pub best: Option<Candidate>,
    pub work: Work,
    pub trace: Option<GrowthTrace>,
}

/// Runs the process from `x0` for `epsilons.len() - 1` steps, evaluating
/// level pairs after every multiply. Stops early when the support dies out.
pub fn run_process(
    g: &BipartiteGraph,
    x0: LevelVector,
    epsilons: &[f64],
    keep_trace: bool,
) -> ProcessRun {
    let horizon = epsilons.len().saturating_sub(1);
    let mut trace = keep_trace.then(|| GrowthTrace {
        start_side: x0.side,
        epsilons: epsilons.to_vec(),
        steps: Vec::with_capacity(horizon),
    });
    let mut work = Work {
        max_support: x0.support_size(),
        ..Work::default()
    };
    let mut best: Option<Candidate> = None;
    let mut x = x0;

    for t in 0..horizon {
        if x.is_empty() {
            break;
        }
        work.edges_touched += x.incident_edges(g) as u64;
        let rounded = round_up_pow2(&multiply(g, &x)).expect("nonnegative graph");
        work.steps += 1;
        if rounded.is_empty() {
            break;
        }
        let x_levels = level_sets(&x);
        let rounded_levels = level_sets(&rounded);
        let choice = evaluate_candidates(g, &x_levels, &rounded_levels)
            .expect("nonempty product has an incident edge");
        work.edges_touched += choice.edges_touched as u64;
        let step_density = choice.subgraph.density();
        let (i, j) = (choice.i, choice.j);
        if best
            .as_ref()
            .is_none_or(|b| step_density > b.subgraph.density())
        {
            best = Some(Candidate {
                subgraph: choice.subgraph,
                t,
                i,
                j,
            });
        }

        let (next, removed) = truncate_split(&rounded, epsilons[t + 1]);
        work.max_support = work.max_support.max(next.support_size());
        if let Some(trace) = trace.as_mut() {
            let b = best.as_ref().expect("set above");
            trace.steps.push(StepRecord {
                t,
                epsilon: epsilons[t],
                epsilon_next: epsilons[t + 1],
                x_norm: x.norm(),
                x_support: x.support_size(),
                x_levels,
                rounded_norm: rounded.norm(),
                rounded_levels,
                max_pair_density: step_density,
                pair: (i, j),
                pruned_mass: removed.norm(),
                pruned_count: removed.support_size(),
                next_support: next.support_size(),
                next_norm: next.norm(),
                best_density: b.subgraph.density(),
                best_at: (b.t, b.i, b.j),
            });
        }
        x = next;
    }

    ProcessRun { best, work, trace }
}
