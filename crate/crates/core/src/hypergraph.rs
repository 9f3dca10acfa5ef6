//! k-uniform hypergraph instances, projections onto a vertex subset, the JSON
//! instance document and a seeded instance generator.

use std::fmt;
use std::sync::Arc;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::gf2m::{FieldElem, FieldSpec};

const NOT_IN_U: usize = usize::MAX;

/// The first broken instance invariant found by [`validate`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Violation {
    #[error("uniformity k must be positive")]
    ZeroUniformity,
    #[error("edge {edge} has {found} vertices, expected {expected}")]
    Arity {
        edge: usize,
        expected: usize,
        found: usize,
    },
    #[error("edge {edge} uses vertex {vertex}, out of range for n = {n}")]
    VertexOutOfRange {
        edge: usize,
        vertex: usize,
        n: usize,
    },
    #[error("edge {edge} repeats vertex {vertex}")]
    RepeatedVertex { edge: usize, vertex: usize },
    #[error("partition has {found} blocks, expected {expected}")]
    PartitionBlockCount { expected: usize, found: usize },
    #[error("n = {n} is not divisible into {k} equal blocks")]
    PartitionIndivisible { n: usize, k: usize },
    #[error("partition block {block} has {found} vertices, expected {expected}")]
    PartitionBlockSize {
        block: usize,
        expected: usize,
        found: usize,
    },
    #[error("partition block {block} uses vertex {vertex}, out of range for n = {n}")]
    PartitionVertexOutOfRange {
        block: usize,
        vertex: usize,
        n: usize,
    },
    #[error("vertex {vertex} appears in more than one partition slot")]
    PartitionOverlap { vertex: usize },
    #[error("edge {edge} meets block {block} twice")]
    EdgeMeetsBlockTwice { edge: usize, block: usize },
}

/// Serialized instance, exactly as it appears on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub k: usize,
    pub n: usize,
    pub edges: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<Vec<usize>>>,
}

/// Checks every instance invariant and reports the first one that fails.
pub fn validate(doc: &InstanceDoc) -> std::result::Result<(), Violation> {
    let InstanceDoc {
        k,
        n,
        edges,
        partition,
    } = doc;
    let (k, n) = (*k, *n);
    if k == 0 {
        return Err(Violation::ZeroUniformity);
    }
    let mut seen = vec![usize::MAX; n];
    for (edge, e) in edges.iter().enumerate() {
        if e.len() != k {
            return Err(Violation::Arity {
                edge,
                expected: k,
                found: e.len(),
            });
        }
        for &vertex in e {
            if vertex >= n {
                return Err(Violation::VertexOutOfRange { edge, vertex, n });
            }
            if seen[vertex] == edge {
                return Err(Violation::RepeatedVertex { edge, vertex });
            }
            seen[vertex] = edge;
        }
    }
    let Some(blocks) = partition else {
        return Ok(());
    };
    if blocks.len() != k {
        return Err(Violation::PartitionBlockCount {
            expected: k,
            found: blocks.len(),
        });
    }
    if n % k != 0 {
        return Err(Violation::PartitionIndivisible { n, k });
    }
    let mut block_of = vec![usize::MAX; n];
    for (block, vertices) in blocks.iter().enumerate() {
        if vertices.len() != n / k {
            return Err(Violation::PartitionBlockSize {
                block,
                expected: n / k,
                found: vertices.len(),
            });
        }
        for &vertex in vertices {
            if vertex >= n {
                return Err(Violation::PartitionVertexOutOfRange { block, vertex, n });
            }
            if block_of[vertex] != usize::MAX {
                return Err(Violation::PartitionOverlap { vertex });
            }
            block_of[vertex] = block;
        }
    }
    // k blocks of n/k distinct in-range vertices cover 0..n.
    for (edge, e) in edges.iter().enumerate() {
        let mut hit = vec![false; k];
        for &v in e {
            let block = block_of[v];
            if hit[block] {
                return Err(Violation::EdgeMeetsBlockTwice { edge, block });
            }
            hit[block] = true;
        }
    }
    Ok(())
}

/// A validated k-uniform hypergraph with a multiset of edges.
///
/// Edge ids are positions in the edge list; parallel edges keep distinct ids.
#[derive(Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    k: usize,
    edges: Vec<Vec<usize>>,
    partition: Option<Vec<Vec<usize>>>,
    words: usize,
    /// Per-edge vertex bitsets, `words` u64s each.
    incidence: Vec<u64>,
}

impl fmt::Debug for Hypergraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hypergraph")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("edges", &self.edges)
            .field("partition", &self.partition)
            .finish()
    }
}

impl Hypergraph {
    pub fn new(
        n: usize,
        k: usize,
        edges: Vec<Vec<usize>>,
        partition: Option<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        Self::from_doc(InstanceDoc {
            k,
            n,
            edges,
            partition,
        })
    }

    pub fn from_doc(mut doc: InstanceDoc) -> Result<Self> {
        validate(&doc)?;
        doc.edges.iter_mut().for_each(|e| e.sort_unstable());
        let words = doc.n.div_ceil(64).max(1);
        let mut incidence = vec![0u64; words * doc.edges.len()];
        for (id, e) in doc.edges.iter().enumerate() {
            for &v in e {
                incidence[id * words + v / 64] |= 1 << (v % 64);
            }
        }
        Ok(Hypergraph {
            n: doc.n,
            k: doc.k,
            edges: doc.edges,
            partition: doc.partition,
            words,
            incidence,
        })
    }

    pub fn to_doc(&self) -> InstanceDoc {
        InstanceDoc {
            k: self.k,
            n: self.n,
            edges: self.edges.clone(),
            partition: self.partition.clone(),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// Sorted vertices of one edge.
    #[inline]
    pub fn edge(&self, id: usize) -> &[usize] {
        &self.edges[id]
    }

    pub fn partition(&self) -> Option<&[Vec<usize>]> {
        self.partition.as_deref()
    }

    /// Bitset of the vertices of edge `id`.
    #[inline]
    pub fn edge_mask(&self, id: usize) -> &[u64] {
        &self.incidence[id * self.words..(id + 1) * self.words]
    }

    /// Bitset over `0..n` with the given vertices set.
    pub fn vertex_mask(&self, vertices: &[usize]) -> Result<Vec<u64>> {
        let mut mask = vec![0u64; self.words];
        for &v in vertices {
            if v >= self.n {
                return Err(Error::VertexOutOfRange {
                    vertex: v,
                    n: self.n,
                });
            }
            mask[v / 64] |= 1 << (v % 64);
        }
        Ok(mask)
    }

    /// Number of vertices of edge `id` inside the bitset `mask`.
    #[inline]
    pub fn meet_count(&self, id: usize, mask: &[u64]) -> usize {
        self.edge_mask(id)
            .iter()
            .zip(mask)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// A copy keeping only the edges accepted by `keep`, in order. The
    /// returned vector maps new edge ids to old ones.
    pub fn retain_edges(
        &self,
        mut keep: impl FnMut(usize, &[usize]) -> bool,
    ) -> (Hypergraph, Vec<usize>) {
        let kept: Vec<usize> = (0..self.num_edges())
            .filter(|&id| keep(id, self.edge(id)))
            .collect();
        let mut incidence = Vec::with_capacity(kept.len() * self.words);
        for &id in &kept {
            incidence.extend_from_slice(self.edge_mask(id));
        }
        let h = Hypergraph {
            n: self.n,
            k: self.k,
            edges: kept.iter().map(|&id| self.edges[id].clone()).collect(),
            partition: self.partition.clone(),
            words: self.words,
            incidence,
        };
        (h, kept)
    }
}

/// An edge whose projection on U is a pair of distinct U-vertices `i < j`
/// (dense U indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairEdge {
    pub edge: usize,
    pub i: usize,
    pub j: usize,
}

/// An edge whose projection on U is the single U-vertex `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoopEdge {
    pub edge: usize,
    pub i: usize,
}

/// Edges of a hypergraph classified by the size of their projection on U.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectedView {
    u_vertices: Arc<[usize]>,
    u_index: Arc<[usize]>,
    pub pairs: Vec<PairEdge>,
    pub loops: Vec<LoopEdge>,
    pub empties: Vec<usize>,
    pub dropped: Vec<usize>,
}

impl ProjectedView {
    /// Sorted U.
    pub fn u_vertices(&self) -> &[usize] {
        &self.u_vertices
    }

    pub fn u_len(&self) -> usize {
        self.u_vertices.len()
    }

    /// Dense index of a vertex in U.
    pub fn index_of(&self, vertex: usize) -> Option<usize> {
        match self.u_index.get(vertex) {
            Some(&i) if i != NOT_IN_U => Some(i),
            _ => None,
        }
    }

    pub fn contains(&self, vertex: usize) -> bool {
        self.index_of(vertex).is_some()
    }

    /// Total number of classified edges.
    pub fn edge_count(&self) -> usize {
        self.pairs.len() + self.loops.len() + self.empties.len() + self.dropped.len()
    }

    /// All edge ids in the view, in no particular order.
    pub fn edge_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs
            .iter()
            .map(|p| p.edge)
            .chain(self.loops.iter().map(|l| l.edge))
            .chain(self.empties.iter().copied())
            .chain(self.dropped.iter().copied())
    }

    /// The same U with only the edges accepted by `keep`.
    pub fn filter_edges(&self, mut keep: impl FnMut(usize) -> bool) -> ProjectedView {
        ProjectedView {
            u_vertices: Arc::clone(&self.u_vertices),
            u_index: Arc::clone(&self.u_index),
            pairs: self
                .pairs
                .iter()
                .filter(|p| keep(p.edge))
                .copied()
                .collect(),
            loops: self
                .loops
                .iter()
                .filter(|l| keep(l.edge))
                .copied()
                .collect(),
            empties: self.empties.iter().copied().filter(|&e| keep(e)).collect(),
            dropped: self.dropped.iter().copied().filter(|&e| keep(e)).collect(),
        }
    }

    /// Removes every edge meeting `x`, testing the full edge in `h`.
    pub fn restrict_avoiding(&self, h: &Hypergraph, x: &[usize]) -> Result<ProjectedView> {
        if let Some(&v) = x.iter().find(|&&v| self.contains(v)) {
            return Err(Error::AvoidedOverlapsU(v));
        }
        let mask = h.vertex_mask(x)?;
        Ok(self.filter_edges(|id| h.meet_count(id, &mask) == 0))
    }
}

/// Classifies every edge of `h` by `|e ∩ U|`.
pub fn project(h: &Hypergraph, u: &[usize]) -> Result<ProjectedView> {
    let mut u_vertices: Vec<usize> = u.to_vec();
    u_vertices.sort_unstable();
    u_vertices.dedup();
    let mut u_index = vec![NOT_IN_U; h.n()];
    for (i, &v) in u_vertices.iter().enumerate() {
        if v >= h.n() {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                n: h.n(),
            });
        }
        u_index[v] = i;
    }
    let mut view = ProjectedView {
        u_vertices: u_vertices.into(),
        u_index: u_index.into(),
        pairs: Vec::new(),
        loops: Vec::new(),
        empties: Vec::new(),
        dropped: Vec::new(),
    };
    for (edge, e) in h.edges().iter().enumerate() {
        let inside: Vec<usize> = e.iter().filter_map(|&v| view.index_of(v)).collect();
        match inside.as_slice() {
            [] => view.empties.push(edge),
            &[i] => view.loops.push(LoopEdge { edge, i }),
            &[a, b] => view.pairs.push(PairEdge {
                edge,
                i: a.min(b),
                j: a.max(b),
            }),
            _ => view.dropped.push(edge),
        }
    }
    Ok(view)
}

/// Removes from `view` every edge of `h` meeting `x`.
pub fn restrict_avoiding(
    view: &ProjectedView,
    h: &Hypergraph,
    x: &[usize],
) -> Result<ProjectedView> {
    view.restrict_avoiding(h, x)
}

/// Values of the edge variables at one evaluation point, indexed by edge id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeAssignment {
    values: Vec<FieldElem>,
}

impl EdgeAssignment {
    pub fn new(values: Vec<FieldElem>) -> Self {
        EdgeAssignment { values }
    }

    /// Independent uniform values for `edge_count` edges.
    pub fn random<R: Rng + ?Sized>(field: &FieldSpec, rng: &mut R, edge_count: usize) -> Self {
        EdgeAssignment {
            values: (0..edge_count).map(|_| field.sample(rng)).collect(),
        }
    }

    #[inline]
    pub fn get(&self, edge: usize) -> FieldElem {
        self.values[edge]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[FieldElem] {
        &self.values
    }

    pub(crate) fn check_covers(&self, h: &Hypergraph) -> Result<()> {
        if self.values.len() != h.num_edges() {
            return Err(Error::AssignmentLength {
                expected: h.num_edges(),
                got: self.values.len(),
            });
        }
        Ok(())
    }
}

/// Parses and validates an instance document.
pub fn parse(text: &str) -> Result<Hypergraph> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Hypergraph::from_doc(doc)
}

/// Canonical single-line document followed by a newline.
pub fn serialize(h: &Hypergraph) -> String {
    let mut out = serde_json::to_string(&h.to_doc()).expect("instance documents always serialize");
    out.push('\n');
    out
}

/// Shape of a generated instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenSpec {
    pub k: usize,
    pub n: usize,
    pub edge_count: usize,
    /// Make the first `n / k` edges a hidden exact cover.
    pub plant: bool,
    /// Emit a partition into `k` consecutive blocks and respect it.
    pub kdm: bool,
}

/// Uniformly random instance, optionally with a planted cover.
pub fn generate<R: Rng + ?Sized>(rng: &mut R, spec: GenSpec) -> Result<Hypergraph> {
    let GenSpec {
        k,
        n,
        edge_count,
        plant,
        kdm,
    } = spec;
    let infeasible = |why: &str| Err(Error::InfeasibleArguments(why.to_string()));
    if k < 2 {
        return infeasible("k must be at least 2");
    }
    if n % k != 0 {
        return infeasible("n must be divisible by k");
    }
    let blocks = n / k;
    if plant && edge_count < blocks {
        return infeasible("a planted cover needs at least n/k edges");
    }
    if n == 0 && edge_count > 0 {
        return infeasible("cannot place edges on zero vertices");
    }

    let mut edges = Vec::with_capacity(edge_count);
    if plant {
        if kdm {
            let perms: Vec<Vec<usize>> = (0..k)
                .map(|_| {
                    let mut p: Vec<usize> = (0..blocks).collect();
                    p.shuffle(rng);
                    p
                })
                .collect();
            for j in 0..blocks {
                edges.push(
                    perms
                        .iter()
                        .enumerate()
                        .map(|(b, p)| b * blocks + p[j])
                        .collect(),
                );
            }
        } else {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            edges.extend(order.chunks(k).map(|c| c.to_vec()));
        }
    }
    while edges.len() < edge_count {
        let e: Vec<usize> = if kdm {
            (0..k)
                .map(|b| b * blocks + rng.random_range(0..blocks))
                .collect()
        } else {
            index::sample(rng, n, k).into_vec()
        };
        edges.push(e);
    }
    let partition = kdm.then(|| {
        (0..k)
            .map(|b| (b * blocks..(b + 1) * blocks).collect())
            .collect()
    });
    Hypergraph::new(n, k, edges, partition)
}
