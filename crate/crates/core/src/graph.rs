//! Immutable weighted bipartite graphs and density arithmetic.
//!
//! Vertices are addressed by a dense [`VertexId`]. Left vertices occupy
//! `0..left_count` and right vertices `left_count..n`, so the side of a vertex
//! is a comparison away. External string labels are kept per side; the same
//! label may exist on both sides (the directed reduction relies on this).

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => write!(f, "L"),
            Side::Right => write!(f, "R"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("negative or non-finite weight {weight} on edge ({left}, {right})")]
    NegativeWeight {
        left: String,
        right: String,
        weight: f64,
    },
    #[error("graph has no positive-weight edge")]
    EmptyGraph,
    #[error("vertex {vertex} is not on the {expected:?} side")]
    SideViolation { vertex: String, expected: Side },
    #[error("subgraph side is empty")]
    EmptySide,
    #[error("too many vertices for 32-bit indexing")]
    TooManyVertices,
}

/// Degree statistics. `max_degree` is the weighted degree used in bound
/// formulas; `max_fanout` is the neighbor count used for work accounting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub n: usize,
    pub m: f64,
    pub max_degree: f64,
    pub max_fanout: usize,
    pub avg_degree: f64,
}

/// Incremental constructor. Labels get indices in order of first appearance.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    left_labels: Vec<String>,
    right_labels: Vec<String>,
    left_lookup: HashMap<String, u32>,
    right_lookup: HashMap<String, u32>,
    edges: Vec<(u32, u32, f64)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(vertices: usize, edges: usize) -> Self {
        Self {
            left_labels: Vec::with_capacity(vertices),
            right_labels: Vec::with_capacity(vertices),
            left_lookup: HashMap::with_capacity(vertices),
            right_lookup: HashMap::with_capacity(vertices),
            edges: Vec::with_capacity(edges),
        }
    }

    /// Registers a vertex without edges. Returns its per-side index.
    pub fn add_vertex(&mut self, side: Side, label: &str) -> u32 {
        let (labels, lookup) = match side {
            Side::Left => (&mut self.left_labels, &mut self.left_lookup),
            Side::Right => (&mut self.right_labels, &mut self.right_lookup),
        };
        if let Some(&i) = lookup.get(label) {
            return i;
        }
        let i = labels.len() as u32;
        labels.push(label.to_owned());
        lookup.insert(label.to_owned(), i);
        i
    }

    pub fn add_edge(&mut self, left: &str, right: &str, weight: f64) -> Result<(), GraphError> {
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(GraphError::NegativeWeight {
                left: left.to_owned(),
                right: right.to_owned(),
                weight,
            });
        }
        let l = self.add_vertex(Side::Left, left);
        let r = self.add_vertex(Side::Right, right);
        self.edges.push((l, r, weight));
        Ok(())
    }

    /// Merges duplicate pairs by summing, drops zero-weight edges and lays out
    /// the adjacency lists.
    pub fn build(self) -> Result<BipartiteGraph, GraphError> {
        let GraphBuilder {
            left_labels,
            right_labels,
            left_lookup,
            right_lookup,
            mut edges,
        } = self;
        let left_count = left_labels.len();
        let n = left_count + right_labels.len();
        if n > u32::MAX as usize {
            return Err(GraphError::TooManyVertices);
        }
        // stable: duplicates are summed in insertion order
        edges.sort_by_key(|&(l, r, _)| (l, r));
        let mut merged: Vec<(u32, u32, f64)> = Vec::with_capacity(edges.len());
        for (l, r, w) in edges {
            match merged.last_mut() {
                Some(last) if last.0 == l && last.1 == r => last.2 += w,
                _ => merged.push((l, r, w)),
            }
        }
        merged.retain(|e| e.2 > 0.0);
        if merged.is_empty() {
            return Err(GraphError::EmptyGraph);
        }

        let mut offsets = vec![0usize; n + 1];
        for &(l, r, _) in &merged {
            offsets[l as usize + 1] += 1;
            offsets[left_count + r as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let total = offsets[n];
        let mut targets = vec![VertexId(0); total];
        let mut weights = vec![0.0; total];
        let mut cursor = offsets.clone();
        // merged is sorted by (l, r): left lists come out sorted by r, and
        // right lists are filled in increasing l.
        for &(l, r, w) in &merged {
            let lu = l as usize;
            let rv = left_count + r as usize;
            targets[cursor[lu]] = VertexId(rv as u32);
            weights[cursor[lu]] = w;
            cursor[lu] += 1;
            targets[cursor[rv]] = VertexId(lu as u32);
            weights[cursor[rv]] = w;
            cursor[rv] += 1;
        }

        let mut max_degree = 0.0f64;
        let mut max_fanout = 0usize;
        for v in 0..n {
            let d: f64 = weights[offsets[v]..offsets[v + 1]].iter().sum();
            max_degree = max_degree.max(d);
            max_fanout = max_fanout.max(offsets[v + 1] - offsets[v]);
        }
        let total_weight = merged.iter().map(|e| e.2).sum();
        let max_weight = merged.iter().map(|e| e.2).fold(0.0, f64::max);

        Ok(BipartiteGraph {
            left_labels,
            right_labels,
            left_lookup,
            right_lookup,
            offsets,
            targets,
            weights,
            max_degree,
            max_fanout,
            total_weight,
            max_weight,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    left_labels: Vec<String>,
    right_labels: Vec<String>,
    left_lookup: HashMap<String, u32>,
    right_lookup: HashMap<String, u32>,
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    weights: Vec<f64>,
    max_degree: f64,
    max_fanout: usize,
    total_weight: f64,
    max_weight: f64,
}

/// Builds a bipartite graph from `(left, right, weight)` triples.
pub fn build_bipartite<I, A, B>(edges: I) -> Result<BipartiteGraph, GraphError>
where
    I: IntoIterator<Item = (A, B, f64)>,
    A: AsRef<str>,
    B: AsRef<str>,
{
    let mut builder = GraphBuilder::new();
    for (l, r, w) in edges {
        builder.add_edge(l.as_ref(), r.as_ref(), w)?;
    }
    builder.build()
}

/// Directed-to-bipartite reduction: every vertex gets a left and a right copy
/// and the arc `x -> y` becomes the edge `(x_L, y_R)`.
pub fn from_directed<I, A, B>(arcs: I) -> Result<BipartiteGraph, GraphError>
where
    I: IntoIterator<Item = (A, B, f64)>,
    A: AsRef<str>,
    B: AsRef<str>,
{
    let mut builder = GraphBuilder::new();
    for (src, dst, w) in arcs {
        let (src, dst) = (src.as_ref(), dst.as_ref());
        for label in [src, dst] {
            builder.add_vertex(Side::Left, label);
            builder.add_vertex(Side::Right, label);
        }
        builder.add_edge(src, dst, w)?;
    }
    builder.build()
}

impl BipartiteGraph {
    #[inline]
    pub fn left_count(&self) -> usize {
        self.left_labels.len()
    }

    #[inline]
    pub fn right_count(&self) -> usize {
        self.right_labels.len()
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.left_labels.len() + self.right_labels.len()
    }

    /// Number of stored (merged) edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Sum of all edge weights, `m`.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Maximum weighted degree, `Δ`.
    pub fn max_degree(&self) -> f64 {
        self.max_degree
    }

    pub fn max_fanout(&self) -> usize {
        self.max_fanout
    }

    pub fn max_weight(&self) -> f64 {
        self.max_weight
    }

    pub fn degree_stats(&self) -> DegreeStats {
        let n = self.vertex_count();
        DegreeStats {
            n,
            m: self.total_weight,
            max_degree: self.max_degree,
            max_fanout: self.max_fanout,
            avg_degree: 2.0 * self.total_weight / n as f64,
        }
    }

    #[inline]
    pub fn side(&self, v: VertexId) -> Side {
        if v.index() < self.left_count() {
            Side::Left
        } else {
            Side::Right
        }
    }

    #[inline]
    pub fn contains(&self, v: VertexId) -> bool {
        v.index() < self.vertex_count()
    }

    pub fn label(&self, v: VertexId) -> &str {
        let i = v.index();
        if i < self.left_count() {
            &self.left_labels[i]
        } else {
            &self.right_labels[i - self.left_count()]
        }
    }

    pub fn find(&self, side: Side, label: &str) -> Option<VertexId> {
        match side {
            Side::Left => self.left_lookup.get(label).map(|&i| VertexId(i)),
            Side::Right => self
                .right_lookup
                .get(label)
                .map(|&i| VertexId(self.left_count() as u32 + i)),
        }
    }

    pub fn left_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.left_count() as u32).map(VertexId)
    }

    pub fn right_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (self.left_count() as u32..self.vertex_count() as u32).map(VertexId)
    }

    pub fn side_vertices(&self, side: Side) -> Box<dyn Iterator<Item = VertexId> + '_> {
        match side {
            Side::Left => Box::new(self.left_vertices()),
            Side::Right => Box::new(self.right_vertices()),
        }
    }

    /// `(neighbor, weight)` pairs in increasing neighbor order.
    #[inline]
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        let range = self.offsets[v.index()]..self.offsets[v.index() + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    #[inline]
    pub fn fanout(&self, v: VertexId) -> usize {
        self.offsets[v.index() + 1] - self.offsets[v.index()]
    }

    pub fn weighted_degree(&self, v: VertexId) -> f64 {
        self.neighbors(v).map(|(_, w)| w).sum()
    }

    /// Each edge once, as `(left, right, weight)`, ordered by left then right.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        self.left_vertices()
            .flat_map(move |l| self.neighbors(l).map(move |(r, w)| (l, r, w)))
    }

    /// The same graph with sides exchanged. Label order is preserved.
    pub fn transposed(&self) -> BipartiteGraph {
        let mut b = GraphBuilder::with_capacity(self.vertex_count(), self.edge_count());
        for r in self.right_vertices() {
            b.add_vertex(Side::Left, self.label(r));
        }
        for l in self.left_vertices() {
            b.add_vertex(Side::Right, self.label(l));
        }
        for (l, r, w) in self.edges() {
            b.add_edge(self.label(r), self.label(l), w)
                .expect("weights were validated at build");
        }
        b.build().expect("source graph is nonempty")
    }

    /// `e(S,T)`: total weight of edges with one end in `left` and the other in
    /// `right`. Iterates the adjacency of whichever set has fewer incidences.
    pub fn edge_weight_between(
        &self,
        left: &[VertexId],
        right: &[VertexId],
    ) -> Result<f64, GraphError> {
        let s = self.canonical_set(left, Side::Left)?;
        let t = self.canonical_set(right, Side::Right)?;
        Ok(self.edge_weight_sorted(&s, &t))
    }

    fn edge_weight_sorted(&self, s: &[VertexId], t: &[VertexId]) -> f64 {
        if s.is_empty() || t.is_empty() {
            return 0.0;
        }
        let incid_s: usize = s.iter().map(|&v| self.fanout(v)).sum();
        let incid_t: usize = t.iter().map(|&v| self.fanout(v)).sum();
        let (scan, probe) = if incid_s <= incid_t { (s, t) } else { (t, s) };
        let mut total = 0.0;
        for &u in scan {
            for (w, weight) in self.neighbors(u) {
                if probe.binary_search(&w).is_ok() {
                    total += weight;
                }
            }
        }
        total
    }

    /// Sorts, dedups and side-checks a vertex set.
    pub(crate) fn canonical_set(
        &self,
        set: &[VertexId],
        side: Side,
    ) -> Result<Vec<VertexId>, GraphError> {
        let mut out = set.to_vec();
        out.sort_unstable();
        out.dedup();
        for &v in &out {
            if !self.contains(v) || self.side(v) != side {
                return Err(GraphError::SideViolation {
                    vertex: if self.contains(v) {
                        self.label(v).to_owned()
                    } else {
                        format!("#{}", v.0)
                    },
                    expected: side,
                });
            }
        }
        Ok(out)
    }

    /// Density `d(S,T)` of the induced subgraph.
    pub fn density(&self, left: &[VertexId], right: &[VertexId]) -> Result<Subgraph, GraphError> {
        let s = self.canonical_set(left, Side::Left)?;
        let t = self.canonical_set(right, Side::Right)?;
        if s.is_empty() || t.is_empty() {
            return Err(GraphError::EmptySide);
        }
        let e = self.edge_weight_sorted(&s, &t);
        Ok(Subgraph::from_sorted(s, t, e))
    }

    /// `g(S,T) = e(S,T) / (|S| + |T|)`, for comparison only.
    pub fn ratio_density(&self, left: &[VertexId], right: &[VertexId]) -> Result<f64, GraphError> {
        let s = self.canonical_set(left, Side::Left)?;
        let t = self.canonical_set(right, Side::Right)?;
        if s.is_empty() && t.is_empty() {
            return Err(GraphError::EmptySide);
        }
        Ok(self.edge_weight_sorted(&s, &t) / (s.len() + t.len()) as f64)
    }

    /// Induced bipartite subgraph on `S ∪ T` keeping only `S × T` edges.
    /// Labels are carried over in their original relative order.
    pub fn restrict(
        &self,
        left: &[VertexId],
        right: &[VertexId],
    ) -> Result<BipartiteGraph, GraphError> {
        let s = self.canonical_set(left, Side::Left)?;
        let t = self.canonical_set(right, Side::Right)?;
        let mut b = GraphBuilder::with_capacity(s.len().max(t.len()), 0);
        for &u in &s {
            b.add_vertex(Side::Left, self.label(u));
        }
        for &v in &t {
            b.add_vertex(Side::Right, self.label(v));
        }
        for &u in &s {
            for (v, w) in self.neighbors(u) {
                if t.binary_search(&v).is_ok() {
                    b.add_edge(self.label(u), self.label(v), w)?;
                }
            }
        }
        b.build()
    }
}

/// A pair `(S ⊆ L, T ⊆ R)`, both nonempty, with cached `e(S,T)` and `d(S,T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgraph {
    left: Vec<VertexId>,
    right: Vec<VertexId>,
    edge_weight: f64,
    density: f64,
}

impl Subgraph {
    /// Caller guarantees both lists sorted, deduplicated and nonempty.
    pub(crate) fn from_sorted(left: Vec<VertexId>, right: Vec<VertexId>, edge_weight: f64) -> Self {
        debug_assert!(!left.is_empty() && !right.is_empty());
        let density = edge_weight / ((left.len() as f64) * (right.len() as f64)).sqrt();
        Subgraph {
            left,
            right,
            edge_weight,
            density,
        }
    }

    pub fn left(&self) -> &[VertexId] {
        &self.left
    }

    pub fn right(&self) -> &[VertexId] {
        &self.right
    }

    pub fn edge_weight(&self) -> f64 {
        self.edge_weight
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn ratio_density(&self) -> f64 {
        self.edge_weight / (self.left.len() + self.right.len()) as f64
    }

    pub fn same_vertices(&self, other: &Subgraph) -> bool {
        self.left == other.left && self.right == other.right
    }
}
