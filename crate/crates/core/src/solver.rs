//! Inclusion-exclusion sieve over `X ⊆ V − U` and the two randomized
//! decision procedures built on it.
//!
//! Every edge variable is fixed to a random field value before the sieve
//! starts. Summing the per-X weighted family counts over all X cancels every
//! family that is not an exact cover (signs vanish in characteristic two), so
//! the sum is the cover polynomial evaluated at that point. A nonzero sum
//! proves a cover exists; a zero sum is a "no" that is wrong only when the
//! random point hit a root.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2m::{FieldElem, FieldSpec};
use crate::hypergraph::{project, EdgeAssignment, Hypergraph, ProjectedView};
use crate::linalg::determinant_in_place;
use crate::matchweight::MatchWeightEngine;
use crate::params::{plan_xkc, XkcPlan};

/// Largest `|V − U|` the sieve will enumerate (X subsets are u64 bitmasks).
pub const MAX_SIEVE_EXPONENT: usize = 63;

pub type Rng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SieveConfig {
    pub field: FieldSpec,
    pub seed: u64,
    /// Target probability of never sampling a good U (XkC only).
    pub epsilon: f64,
    /// Worker count for the X loop; `0` uses rayon's global pool, `1` runs serially.
    pub threads: usize,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            field: FieldSpec::gf64(),
            seed: 0,
            epsilon: 2f64.powi(-20),
            threads: 1,
        }
    }
}

impl SieveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Epsilon(self.epsilon));
        }
        if !matches!(self.field.m(), 8 | 64) {
            return Err(Error::UnsupportedWidth(self.field.m()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    /// `k` does not divide `n`.
    Cardinality,
    /// No vertices: the empty family is a cover.
    EmptyInstance,
    /// The sieve sum was nonzero.
    NonzeroSum,
    /// Every sieve sum was zero.
    ZeroSum,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decision {
    pub answer: Answer,
    pub reason: Reason,
    /// Evaluations of the per-X weight, over all attempts.
    pub probes: u64,
    /// Sampled U sets (XkC) or `1` (kDM).
    pub attempts: u64,
    #[serde(skip)]
    pub elapsed: Duration,
    /// XkC parameters used, if any.
    pub plan: Option<XkcPlan>,
}

impl Decision {
    pub fn is_yes(&self) -> bool {
        self.answer == Answer::Yes
    }
}

/// Result of one full sieve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SieveOutcome {
    pub value: FieldElem,
    pub probes: u64,
}

/// Per-edge bitmask over the vertices outside U.
struct OutsideIndex {
    len: usize,
    edge_masks: Vec<u64>,
}

impl OutsideIndex {
    fn new(h: &Hypergraph, view: &ProjectedView) -> Result<Self> {
        let outside: Vec<usize> = (0..h.n()).filter(|&v| !view.contains(v)).collect();
        if outside.len() > MAX_SIEVE_EXPONENT {
            return Err(Error::GuardExceeded {
                what: "|V - U| for the sieve",
                value: outside.len(),
                limit: MAX_SIEVE_EXPONENT,
            });
        }
        let mut position = vec![usize::MAX; h.n()];
        for (i, &v) in outside.iter().enumerate() {
            position[v] = i;
        }
        let edge_masks = h
            .edges()
            .iter()
            .map(|e| {
                e.iter()
                    .filter(|&&v| position[v] != usize::MAX)
                    .fold(0u64, |m, &v| m | 1 << position[v])
            })
            .collect();
        Ok(OutsideIndex {
            len: outside.len(),
            edge_masks,
        })
    }

    #[inline]
    fn avoids(&self, edge: usize, x: u64) -> bool {
        self.edge_masks[edge] & x == 0
    }
}

trait Probe: Sync {
    fn eval(&self, x: u64) -> FieldElem;
}

struct TutteProbe<'a> {
    engine: MatchWeightEngine,
    view: ProjectedView,
    r: &'a EdgeAssignment,
    index: OutsideIndex,
}

impl Probe for TutteProbe<'_> {
    fn eval(&self, x: u64) -> FieldElem {
        let restricted = self.view.filter_edges(|id| self.index.avoids(id, x));
        self.engine.w2f(&restricted, self.r)
    }
}

struct EdmondsProbe<'a> {
    field: FieldSpec,
    dim: usize,
    /// (row, column, edge id)
    cells: Vec<(usize, usize, usize)>,
    r: &'a EdgeAssignment,
    index: OutsideIndex,
}

impl Probe for EdmondsProbe<'_> {
    fn eval(&self, x: u64) -> FieldElem {
        let mut mat = vec![FieldElem::ZERO; self.dim * self.dim];
        for &(row, col, edge) in &self.cells {
            if self.index.avoids(edge, x) {
                mat[row * self.dim + col] += self.r.get(edge);
            }
        }
        determinant_in_place(&self.field, self.dim, &mut mat)
    }
}

fn sum_serial(probe: &dyn Probe, exponent: usize) -> SieveOutcome {
    let (value, probes) = (0..1u64 << exponent).fold((FieldElem::ZERO, 0u64), |(acc, count), x| {
        (acc + probe.eval(x), count + 1)
    });
    SieveOutcome { value, probes }
}

#[cfg(feature = "parallel")]
fn sum_parallel(probe: &dyn Probe, exponent: usize, threads: usize) -> SieveOutcome {
    use rayon::prelude::*;
    let run = || {
        let (value, probes) = (0..1u64 << exponent)
            .into_par_iter()
            .map(|x| (probe.eval(x), 1u64))
            .reduce(|| (FieldElem::ZERO, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        SieveOutcome { value, probes }
    };
    if threads == 0 {
        return run();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(run),
        Err(_) => sum_serial(probe, exponent),
    }
}

#[cfg(not(feature = "parallel"))]
fn sum_parallel(probe: &dyn Probe, exponent: usize, _threads: usize) -> SieveOutcome {
    sum_serial(probe, exponent)
}

fn run_probe(probe: &dyn Probe, exponent: usize, threads: usize) -> SieveOutcome {
    if threads == 1 {
        sum_serial(probe, exponent)
    } else {
        sum_parallel(probe, exponent, threads)
    }
}

fn tutte_probe<'a>(
    field: &FieldSpec,
    h_u: &Hypergraph,
    u: &[usize],
    r: &'a EdgeAssignment,
) -> Result<TutteProbe<'a>> {
    r.check_covers(h_u)?;
    let view = project(h_u, u)?;
    if let Some(&edge) = view.dropped.first() {
        return Err(Error::ProjectionShape {
            edge,
            expected: "projection of size at most two",
        });
    }
    let index = OutsideIndex::new(h_u, &view)?;
    Ok(TutteProbe {
        engine: MatchWeightEngine::new(*field, view.u_len(), h_u.n(), h_u.k())?,
        view,
        r,
        index,
    })
}

/// `sum over X ⊆ V − U` of the weighted family count, through Tutte
/// determinants. Every edge of `h_u` must meet `u` in at most two vertices.
pub fn sieve_decide(
    field: &FieldSpec,
    h_u: &Hypergraph,
    u: &[usize],
    r: &EdgeAssignment,
) -> Result<SieveOutcome> {
    let probe = tutte_probe(field, h_u, u, r)?;
    Ok(sum_serial(&probe, probe.index.len))
}

/// [`sieve_decide`] with the X loop spread over `threads` workers. The
/// result is bit-identical for every worker count.
pub fn sieve_decide_parallel(
    field: &FieldSpec,
    h_u: &Hypergraph,
    u: &[usize],
    r: &EdgeAssignment,
    threads: usize,
) -> Result<SieveOutcome> {
    let probe = tutte_probe(field, h_u, u, r)?;
    Ok(sum_parallel(&probe, probe.index.len, threads))
}

fn edmonds_probe<'a>(
    field: &FieldSpec,
    h: &Hypergraph,
    r: &'a EdgeAssignment,
) -> Result<EdmondsProbe<'a>> {
    r.check_covers(h)?;
    let blocks = h.partition().ok_or(Error::MissingPartition)?;
    if h.k() < 2 {
        return Err(Error::Domain(format!("kDM needs k >= 2, got {}", h.k())));
    }
    let (left, right) = (&blocks[0], &blocks[1]);
    let mut side = vec![None; h.n()];
    for (pos, &v) in left.iter().enumerate() {
        side[v] = Some((0u8, pos));
    }
    for (pos, &v) in right.iter().enumerate() {
        side[v] = Some((1u8, pos));
    }
    let mut cells = Vec::with_capacity(h.num_edges());
    for (edge, e) in h.edges().iter().enumerate() {
        let mut row = None;
        let mut col = None;
        for &v in e {
            match side[v] {
                Some((0, p)) => row = Some(p),
                Some((_, p)) => col = Some(p),
                None => {}
            }
        }
        // validation guarantees one vertex per block
        let (Some(row), Some(col)) = (row, col) else {
            return Err(Error::ProjectionShape {
                edge,
                expected: "bipartite pair",
            });
        };
        cells.push((row, col, edge));
    }
    let u: Vec<usize> = left.iter().chain(right).copied().collect();
    let view = project(h, &u)?;
    Ok(EdmondsProbe {
        field: *field,
        dim: left.len(),
        cells,
        r,
        index: OutsideIndex::new(h, &view)?,
    })
}

/// Sieve sum for a partitioned instance with `U` the first two blocks, each
/// probe a single Edmonds determinant.
pub fn kdm_sieve(
    field: &FieldSpec,
    h: &Hypergraph,
    r: &EdgeAssignment,
    threads: usize,
) -> Result<SieveOutcome> {
    let probe = edmonds_probe(field, h, r)?;
    Ok(run_probe(&probe, probe.index.len, threads))
}

/// k-Dimensional Matching: one sieve over `X ⊆ V − (V1 ∪ V2)`.
pub fn solve_kdm(h: &Hypergraph, cfg: &SieveConfig) -> Result<Decision> {
    cfg.validate()?;
    let start = Instant::now();
    if h.partition().is_none() {
        return Err(Error::MissingPartition);
    }
    if h.n() == 0 {
        return Ok(Decision {
            answer: Answer::Yes,
            reason: Reason::EmptyInstance,
            probes: 0,
            attempts: 0,
            elapsed: start.elapsed(),
            plan: None,
        });
    }
    let mut rng = Rng::seed_from_u64(cfg.seed);
    let r = EdgeAssignment::random(&cfg.field, &mut rng, h.num_edges());
    let outcome = kdm_sieve(&cfg.field, h, &r, cfg.threads)?;
    let yes = !outcome.value.is_zero();
    Ok(Decision {
        answer: if yes { Answer::Yes } else { Answer::No },
        reason: if yes {
            Reason::NonzeroSum
        } else {
            Reason::ZeroSum
        },
        probes: outcome.probes,
        attempts: 1,
        elapsed: start.elapsed(),
        plan: None,
    })
}

/// Exact Cover by k-Sets: repeat with random `U` until a nonzero sieve sum
/// or the planned number of attempts runs out.
pub fn solve_xkc(h: &Hypergraph, cfg: &SieveConfig) -> Result<Decision> {
    cfg.validate()?;
    let start = Instant::now();
    let (n, k) = (h.n(), h.k());
    if k < 2 {
        return Err(Error::Domain(format!("XkC needs k >= 2, got {k}")));
    }
    let early = |answer, reason| Decision {
        answer,
        reason,
        probes: 0,
        attempts: 0,
        elapsed: start.elapsed(),
        plan: None,
    };
    if n % k != 0 {
        return Ok(early(Answer::No, Reason::Cardinality));
    }
    if n == 0 {
        return Ok(early(Answer::Yes, Reason::EmptyInstance));
    }
    let plan = plan_xkc(n, k, cfg.epsilon)?;
    if n - plan.u_size > MAX_SIEVE_EXPONENT {
        return Err(Error::GuardExceeded {
            what: "|V - U| for the sieve",
            value: n - plan.u_size,
            limit: MAX_SIEVE_EXPONENT,
        });
    }
    let mut rng = Rng::seed_from_u64(cfg.seed);
    let mut vertices: Vec<usize> = (0..n).collect();
    let mut probes = 0u64;
    for attempt in 1..=plan.repetitions {
        let (chosen, _) = vertices.partial_shuffle(&mut rng, plan.u_size);
        let u = chosen.to_vec();
        let mask = h.vertex_mask(&u)?;
        let (h_u, _) = h.retain_edges(|id, _| h.meet_count(id, &mask) <= 2);
        let r = EdgeAssignment::random(&cfg.field, &mut rng, h_u.num_edges());
        let probe = tutte_probe(&cfg.field, &h_u, &u, &r)?;
        let outcome = run_probe(&probe, probe.index.len, cfg.threads);
        probes += outcome.probes;
        if !outcome.value.is_zero() {
            return Ok(Decision {
                answer: Answer::Yes,
                reason: Reason::NonzeroSum,
                probes,
                attempts: attempt,
                elapsed: start.elapsed(),
                plan: Some(plan),
            });
        }
    }
    Ok(Decision {
        answer: Answer::No,
        reason: Reason::ZeroSum,
        probes,
        attempts: plan.repetitions,
        elapsed: start.elapsed(),
        plan: Some(plan),
    })
}

/// kDM when a partition is present, XkC otherwise.
pub fn solve_auto(h: &Hypergraph, cfg: &SieveConfig) -> Result<Decision> {
    if h.partition().is_some() {
        solve_kdm(h, cfg)
    } else {
        solve_xkc(h, cfg)
    }
}
