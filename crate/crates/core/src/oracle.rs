//! Exact reference engines the randomized solvers are checked against.
//!
//! None of these are fast. They exist so that every answer of the sieve can be
//! confirmed by an independent computation: Dancing Links backtracking for
//! explicit covers, inclusion-exclusion over the integers for cover counts,
//! exhaustive perfect-matching enumeration, and a definition-level brute force
//! of the weighted family sum.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2m::{FieldElem, FieldSpec};
use crate::hypergraph::{EdgeAssignment, Hypergraph, ProjectedView};

pub const IE_MAX_VERTICES: usize = 30;
pub const MATCHING_MAX_U: usize = 12;
pub const SYMBOLIC_MAX_EDGES: usize = 24;

/// Exact number of exact covers, edges counted with multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct CoverCount(#[serde(serialize_with = "serialize_decimal")] pub BigUint);

fn serialize_decimal<S: serde::Serializer>(
    v: &BigUint,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_str_radix(10))
}

impl CoverCount {
    pub fn exists(&self) -> bool {
        !self.0.is_zero()
    }
}

impl std::fmt::Display for CoverCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for CoverCount {
    fn from(v: u64) -> Self {
        CoverCount(BigUint::from(v))
    }
}

// Dancing Links over columns = vertices, rows = edges.
struct Dlx {
    left: Vec<usize>,
    right: Vec<usize>,
    up: Vec<usize>,
    down: Vec<usize>,
    column: Vec<usize>,
    row: Vec<usize>,
    size: Vec<usize>,
}

const ROOT: usize = 0;

impl Dlx {
    fn new(h: &Hypergraph) -> Self {
        let n = h.n();
        let nodes = 1 + n + h.num_edges() * h.k();
        let mut d = Dlx {
            left: Vec::with_capacity(nodes),
            right: Vec::with_capacity(nodes),
            up: Vec::with_capacity(nodes),
            down: Vec::with_capacity(nodes),
            column: Vec::with_capacity(nodes),
            row: Vec::with_capacity(nodes),
            size: vec![0; n + 1],
        };
        // root and column headers 1..=n form the horizontal header ring
        for i in 0..=n {
            d.left.push(if i == 0 { n } else { i - 1 });
            d.right.push(if i == n { 0 } else { i + 1 });
            d.up.push(i);
            d.down.push(i);
            d.column.push(i);
            d.row.push(usize::MAX);
        }
        for (edge, vertices) in h.edges().iter().enumerate() {
            let first = d.left.len();
            for (pos, &v) in vertices.iter().enumerate() {
                let col = v + 1;
                let node = d.left.len();
                let last_in_col = d.up[col];
                d.left.push(if pos == 0 {
                    node + vertices.len() - 1
                } else {
                    node - 1
                });
                d.right.push(if pos + 1 == vertices.len() {
                    first
                } else {
                    node + 1
                });
                d.up.push(last_in_col);
                d.down.push(col);
                d.column.push(col);
                d.row.push(edge);
                d.down[last_in_col] = node;
                d.up[col] = node;
                d.size[col] += 1;
            }
        }
        d
    }

    fn cover(&mut self, col: usize) {
        self.right[self.left[col]] = self.right[col];
        self.left[self.right[col]] = self.left[col];
        let mut i = self.down[col];
        while i != col {
            let mut j = self.right[i];
            while j != i {
                self.down[self.up[j]] = self.down[j];
                self.up[self.down[j]] = self.up[j];
                self.size[self.column[j]] -= 1;
                j = self.right[j];
            }
            i = self.down[i];
        }
    }

    fn uncover(&mut self, col: usize) {
        let mut i = self.up[col];
        while i != col {
            let mut j = self.left[i];
            while j != i {
                self.size[self.column[j]] += 1;
                self.down[self.up[j]] = j;
                self.up[self.down[j]] = j;
                j = self.left[j];
            }
            i = self.up[i];
        }
        self.right[self.left[col]] = col;
        self.left[self.right[col]] = col;
    }

    /// Fewest remaining rows, ties to the lowest vertex id.
    fn choose_column(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        let mut c = self.right[ROOT];
        while c != ROOT {
            if best.is_none_or(|b| self.size[c] < self.size[b]) {
                best = Some(c);
            }
            c = self.right[c];
        }
        best
    }

    fn search(&mut self, partial: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        let Some(col) = self.choose_column() else {
            visit(partial);
            return;
        };
        if self.size[col] == 0 {
            return;
        }
        self.cover(col);
        let mut r = self.down[col];
        while r != col {
            partial.push(self.row[r]);
            let mut j = self.right[r];
            while j != r {
                self.cover(self.column[j]);
                j = self.right[j];
            }
            self.search(partial, visit);
            let mut j = self.left[r];
            while j != r {
                self.uncover(self.column[j]);
                j = self.left[j];
            }
            partial.pop();
            r = self.down[r];
        }
        self.uncover(col);
    }
}

fn dlx_visit(h: &Hypergraph, visit: &mut dyn FnMut(&[usize])) {
    let mut dlx = Dlx::new(h);
    dlx.search(&mut Vec::new(), visit);
}

/// Number of exact covers, by backtracking.
pub fn dlx_count(h: &Hypergraph) -> CoverCount {
    let mut count = 0u64;
    dlx_visit(h, &mut |_| count += 1);
    CoverCount::from(count)
}

/// Every exact cover as a sorted list of edge ids.
pub fn dlx_enumerate(h: &Hypergraph) -> Vec<Vec<usize>> {
    let mut covers = Vec::new();
    dlx_visit(h, &mut |c| {
        let mut c = c.to_vec();
        c.sort_unstable();
        covers.push(c);
    });
    covers
}

/// Cover count by inclusion-exclusion over all `X ⊆ V` with `U = ∅`:
/// `sum_X (-1)^|X| C(d(X), n/k)` where `d(X)` counts edges missing `X`.
pub fn ie_count(h: &Hypergraph) -> Result<CoverCount> {
    let n = h.n();
    if n > IE_MAX_VERTICES {
        return Err(Error::GuardExceeded {
            what: "vertices for inclusion-exclusion",
            value: n,
            limit: IE_MAX_VERTICES,
        });
    }
    if !n.is_multiple_of(h.k()) {
        return Ok(CoverCount::from(0));
    }
    let target = n / h.k();
    let masks: Vec<u64> = h
        .edges()
        .iter()
        .map(|e| e.iter().fold(0u64, |m, &v| m | 1 << v))
        .collect();
    // choose[d] = C(d, target)
    let choose: Vec<BigUint> = (0..=masks.len()).map(|d| binomial(d, target)).collect();
    let mut positive = BigUint::zero();
    let mut negative = BigUint::zero();
    for x in 0..(1u64 << n) {
        let d = masks.iter().filter(|&&m| m & x == 0).count();
        if x.count_ones() % 2 == 0 {
            positive += &choose[d];
        } else {
            negative += &choose[d];
        }
    }
    let total = BigInt::from(positive) - BigInt::from(negative);
    Ok(CoverCount(
        total
            .to_biguint()
            .expect("inclusion-exclusion count is non-negative"),
    ))
}

/// `C(n, r)` as a big integer.
pub fn binomial(n: usize, r: usize) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// One perfect matching of a projected multigraph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatchingTerm {
    pub loops: usize,
    pub edges: usize,
    /// `prod r(e)^p(e)`, `p = 1` on loops and `2` on pairs.
    pub weight: FieldElem,
}

/// All perfect matchings of the pairs and loops of `view`, where a loop
/// covers its single vertex.
pub fn enumerate_matchings(
    field: &FieldSpec,
    view: &ProjectedView,
    r: &EdgeAssignment,
) -> Result<Vec<MatchingTerm>> {
    let u = view.u_len();
    if u > MATCHING_MAX_U {
        return Err(Error::GuardExceeded {
            what: "|U| for matching enumeration",
            value: u,
            limit: MATCHING_MAX_U,
        });
    }
    // incident[v] = (other endpoint or v for a loop, edge id)
    let mut incident: Vec<Vec<(usize, usize)>> = vec![Vec::new(); u];
    for l in &view.loops {
        incident[l.i].push((l.i, l.edge));
    }
    for p in &view.pairs {
        incident[p.i].push((p.j, p.edge));
        incident[p.j].push((p.i, p.edge));
    }

    struct Walk<'a> {
        field: &'a FieldSpec,
        r: &'a EdgeAssignment,
        incident: &'a [Vec<(usize, usize)>],
        covered: Vec<bool>,
        out: Vec<MatchingTerm>,
    }

    impl Walk<'_> {
        fn go(&mut self, loops: usize, edges: usize, weight: FieldElem) {
            let Some(v) = self.covered.iter().position(|&c| !c) else {
                self.out.push(MatchingTerm {
                    loops,
                    edges,
                    weight,
                });
                return;
            };
            self.covered[v] = true;
            for idx in 0..self.incident[v].len() {
                let (w, edge) = self.incident[v][idx];
                let value = self.r.get(edge);
                if w == v {
                    self.go(loops + 1, edges + 1, self.field.mul(weight, value));
                } else if !self.covered[w] {
                    self.covered[w] = true;
                    let sq = self.field.square(value);
                    self.go(loops, edges + 1, self.field.mul(weight, sq));
                    self.covered[w] = false;
                }
            }
            self.covered[v] = false;
        }
    }

    let mut walk = Walk {
        field,
        r,
        incident: &incident,
        covered: vec![false; u],
        out: Vec::new(),
    };
    walk.go(0, 0, FieldElem::ONE);
    Ok(walk.out)
}

/// Sums matching weights by loop count into `|U| + 1` strata.
pub fn strata(terms: &[MatchingTerm], u_len: usize) -> Vec<FieldElem> {
    let mut out = vec![FieldElem::ZERO; u_len + 1];
    for t in terms {
        out[t.loops] += t.weight;
    }
    out
}

/// Weighted sum over every edge family `E''` of `h` that avoids `x`, has
/// `n / k` edges, covers `u`, and is disjoint on `u`; each family weighs
/// `prod r(e)^f(e)` with `f(e) = 2` when `|e ∩ U| = 2` and `1` otherwise.
pub fn symbolic_w2f(
    field: &FieldSpec,
    h: &Hypergraph,
    u: &[usize],
    x: &[usize],
    r: &EdgeAssignment,
) -> Result<FieldElem> {
    let e = h.num_edges();
    if e > SYMBOLIC_MAX_EDGES {
        return Err(Error::GuardExceeded {
            what: "edges for symbolic evaluation",
            value: e,
            limit: SYMBOLIC_MAX_EDGES,
        });
    }
    r.check_covers(h)?;
    if !h.n().is_multiple_of(h.k()) {
        return Ok(FieldElem::ZERO);
    }
    let cardinality = h.n() / h.k();
    let in_u = |v: &usize| u.contains(v);
    let avoids: Vec<bool> = h
        .edges()
        .iter()
        .map(|ed| ed.iter().all(|v| !x.contains(v)))
        .collect();
    let exponent: Vec<u64> = h
        .edges()
        .iter()
        .map(|ed| {
            if ed.iter().filter(|v| in_u(v)).count() == 2 {
                2
            } else {
                1
            }
        })
        .collect();

    let mut total = FieldElem::ZERO;
    for family in 0..(1u32 << e) {
        if family.count_ones() as usize != cardinality {
            continue;
        }
        let members: Vec<usize> = (0..e).filter(|&i| family >> i & 1 == 1).collect();
        if !members.iter().all(|&i| avoids[i]) {
            continue;
        }
        let mut hits = vec![0usize; h.n()];
        for &i in &members {
            for &v in h.edge(i) {
                hits[v] += 1;
            }
        }
        if !u.iter().all(|&v| hits[v] == 1) {
            continue;
        }
        total += members.iter().fold(FieldElem::ONE, |acc, &i| {
            field.mul(acc, field.pow(r.get(i), exponent[i]))
        });
    }
    Ok(total)
}

/// `sum over exact covers of prod r(e)`, from the explicit cover list.
pub fn cover_polynomial(field: &FieldSpec, h: &Hypergraph, r: &EdgeAssignment) -> FieldElem {
    dlx_enumerate(h)
        .iter()
        .map(|cover| {
            cover
                .iter()
                .fold(FieldElem::ONE, |acc, &i| field.mul(acc, r.get(i)))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{generate, project, GenSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dlx_examples() {
        let single = Hypergraph::new(3, 3, vec![vec![0, 1, 2]], None).unwrap();
        assert_eq!(dlx_count(&single), CoverCount::from(1));
        assert_eq!(dlx_enumerate(&single), vec![vec![0]]);

        let doubled = Hypergraph::new(3, 3, vec![vec![0, 1, 2], vec![0, 1, 2]], None).unwrap();
        assert_eq!(dlx_count(&doubled), CoverCount::from(2));

        let empty = Hypergraph::new(0, 3, vec![], None).unwrap();
        assert_eq!(dlx_count(&empty), CoverCount::from(1));
        let uncoverable = Hypergraph::new(6, 3, vec![vec![0, 1, 2]], None).unwrap();
        assert_eq!(dlx_count(&uncoverable), CoverCount::from(0));
    }

    #[test]
    fn dlx_enumerates_disjoint_covers() {
        let edges = vec![
            vec![0, 1, 2],
            vec![3, 4, 5],
            vec![0, 3, 4],
            vec![1, 2, 5],
            vec![0, 1, 3],
        ];
        let h = Hypergraph::new(6, 3, edges, None).unwrap();
        let mut covers = dlx_enumerate(&h);
        covers.sort();
        assert_eq!(covers, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn ie_examples() {
        let none = Hypergraph::new(6, 3, vec![], None).unwrap();
        assert_eq!(ie_count(&none).unwrap(), CoverCount::from(0));
        let single = Hypergraph::new(3, 3, vec![vec![0, 1, 2]], None).unwrap();
        assert_eq!(ie_count(&single).unwrap(), CoverCount::from(1));
        let big = Hypergraph::new(33, 3, vec![], None).unwrap();
        assert!(matches!(ie_count(&big), Err(Error::GuardExceeded { .. })));
    }

    #[test]
    fn ie_agrees_with_dlx_on_planted() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for round in 0..200 {
            let (k, n) = if round % 2 == 0 { (3, 12) } else { (4, 12) };
            let spec = GenSpec {
                k,
                n,
                edge_count: 8 + round % 10,
                plant: true,
                kdm: round % 3 == 0,
            };
            let h = generate(&mut rng, spec).unwrap();
            let count = dlx_count(&h);
            assert!(count.exists());
            assert_eq!(ie_count(&h).unwrap(), count);
        }
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(2, 5), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
    }

    #[test]
    fn matching_examples() {
        let f = FieldSpec::gf64();
        let h = Hypergraph::new(3, 3, vec![vec![0, 1, 2]], None).unwrap();
        let r = EdgeAssignment::new(vec![FieldElem::from_bits(0x1234)]);

        let none = project(&h, &[]).unwrap();
        let terms = enumerate_matchings(&f, &none, &r).unwrap();
        assert_eq!(
            terms,
            vec![MatchingTerm {
                loops: 0,
                edges: 0,
                weight: FieldElem::ONE
            }]
        );

        let pair = project(&h, &[0, 1]).unwrap();
        let terms = enumerate_matchings(&f, &pair, &r).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].loops, 0);
        assert_eq!(terms[0].weight, f.square(r.get(0)));
    }

    #[test]
    fn symbolic_examples() {
        let f = FieldSpec::gf64();
        let h = Hypergraph::new(6, 3, vec![vec![0, 1, 2], vec![3, 4, 5]], None).unwrap();
        let r = EdgeAssignment::new(vec![FieldElem::from_bits(3), FieldElem::from_bits(7)]);
        assert_eq!(
            symbolic_w2f(&f, &h, &[], &[0, 3], &r).unwrap(),
            FieldElem::ZERO
        );
        assert_eq!(
            symbolic_w2f(&f, &h, &[], &[], &r).unwrap(),
            f.mul(r.get(0), r.get(1))
        );
        // U = {0, 1}: edge 0 projects to a pair, so f = 2 on it
        let w = symbolic_w2f(&f, &h, &[0, 1], &[], &r).unwrap();
        assert_eq!(w, f.mul(f.square(r.get(0)), r.get(1)));
    }

    #[test]
    fn lemma_identity_with_empty_u() {
        let f = FieldSpec::gf64();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..20 {
            let h = generate(
                &mut rng,
                GenSpec {
                    k: 3,
                    n: 6,
                    edge_count: 9,
                    plant: true,
                    kdm: false,
                },
            )
            .unwrap();
            let r = EdgeAssignment::random(&f, &mut rng, h.num_edges());
            let sieve: FieldElem = (0..1u32 << 6)
                .map(|x| {
                    let x: Vec<usize> = (0..6).filter(|b| x >> b & 1 == 1).collect();
                    symbolic_w2f(&f, &h, &[], &x, &r).unwrap()
                })
                .sum();
            assert_eq!(sieve, cover_polynomial(&f, &h, &r));
        }
    }
}
