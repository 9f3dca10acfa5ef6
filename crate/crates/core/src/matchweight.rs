//! Matching weights of a projected multigraph at a fixed evaluation point.
//!
//! For a view whose edges project to at most two U-vertices, the Tutte matrix
//! of index `s` has determinant `sum_M s^(loops in M) * prod_e r(e)^p(e)` over
//! the perfect matchings `M` of the projection, with `p(e) = 1` for loops and
//! `2` otherwise. Evaluating it at `|U| + 1` points and interpolating splits the
//! matchings by loop count. Combining those strata with the elementary
//! symmetric sums `Z(i)` of the edges that miss U gives the weighted count of
//! edge families of size `n / k` covering U disjointly.

use crate::error::{Error, Result};
use crate::gf2m::{FieldElem, FieldSpec};
use crate::hypergraph::{EdgeAssignment, ProjectedView};
use crate::linalg::{determinant_in_place, Interpolator, SquareMatrix};

/// `m_values[i]` is the total weight of perfect matchings with exactly `i` loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopStratifiedWeights {
    pub m_values: Vec<FieldElem>,
}

/// `z_values[i]` is the i-th elementary symmetric sum of the pool's edge values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZTable {
    pub z_values: Vec<FieldElem>,
}

impl ZTable {
    /// `Z(i)`, zero for indices past the table.
    #[inline]
    pub fn get(&self, i: usize) -> FieldElem {
        self.z_values.get(i).copied().unwrap_or(FieldElem::ZERO)
    }
}

/// Edmonds matrix of a bipartite projection, rows indexed by `left` and
/// columns by `right` (both given as vertex ids in U, in that order).
pub fn build_edmonds(
    view: &ProjectedView,
    r: &EdgeAssignment,
    left: &[usize],
    right: &[usize],
) -> Result<SquareMatrix> {
    if left.len() != right.len() {
        return Err(Error::UnequalSides {
            left: left.len(),
            right: right.len(),
        });
    }
    if let Some(edge) = view
        .loops
        .iter()
        .map(|l| l.edge)
        .chain(view.empties.iter().copied())
        .chain(view.dropped.iter().copied())
        .next()
    {
        return Err(Error::ProjectionShape {
            edge,
            expected: "bipartite pair",
        });
    }
    // dense U index -> (side, position)
    let mut side = vec![None; view.u_len()];
    for (pos, &v) in left.iter().enumerate() {
        let i = view.index_of(v).ok_or(Error::VertexOutOfRange {
            vertex: v,
            n: view.u_len(),
        })?;
        side[i] = Some((0u8, pos));
    }
    for (pos, &v) in right.iter().enumerate() {
        let i = view.index_of(v).ok_or(Error::VertexOutOfRange {
            vertex: v,
            n: view.u_len(),
        })?;
        side[i] = Some((1u8, pos));
    }
    let mut mat = SquareMatrix::zeros(left.len());
    for p in &view.pairs {
        let (row, col) = match (side[p.i], side[p.j]) {
            (Some((0, a)), Some((1, b))) => (a, b),
            (Some((1, b)), Some((0, a))) => (a, b),
            _ => {
                return Err(Error::ProjectionShape {
                    edge: p.edge,
                    expected: "bipartite pair",
                })
            }
        };
        mat.accumulate(row, col, r.get(p.edge));
    }
    Ok(mat)
}

/// Tutte matrix of index `s`: symmetric pair sums off the diagonal and
/// `s` times the loop sums on it. Edges that miss U or were dropped do not
/// appear in the matrix.
pub fn build_tutte(
    field: &FieldSpec,
    view: &ProjectedView,
    r: &EdgeAssignment,
    s: FieldElem,
) -> SquareMatrix {
    let dim = view.u_len();
    let mut mat = SquareMatrix::zeros(dim);
    for p in &view.pairs {
        let v = r.get(p.edge);
        mat.accumulate(p.i, p.j, v);
        mat.accumulate(p.j, p.i, v);
    }
    let loops = loop_sums(view, r);
    for (i, sum) in loops.into_iter().enumerate() {
        mat.set(i, i, field.mul(s, sum));
    }
    mat
}

fn loop_sums(view: &ProjectedView, r: &EdgeAssignment) -> Vec<FieldElem> {
    let mut sums = vec![FieldElem::ZERO; view.u_len()];
    for l in &view.loops {
        sums[l.i] += r.get(l.edge);
    }
    sums
}

/// Elementary symmetric sums of the values of `pool`, up to `max_count`.
pub fn z_table(field: &FieldSpec, pool: &[usize], r: &EdgeAssignment, max_count: usize) -> ZTable {
    let mut z = vec![FieldElem::ZERO; max_count + 1];
    z[0] = FieldElem::ONE;
    for (seen, &edge) in pool.iter().enumerate() {
        let v = r.get(edge);
        for i in (1..=max_count.min(seen + 1)).rev() {
            let extended = field.mul(z[i - 1], v);
            z[i] += extended;
        }
    }
    ZTable { z_values: z }
}

/// Reusable evaluator for one U size: fixes the interpolation abscissas and
/// the target cover size `n / k`.
#[derive(Clone, Debug)]
pub struct MatchWeightEngine {
    field: FieldSpec,
    u_len: usize,
    /// `None` when `k` does not divide `n`, so no family has size `n / k`.
    cover_size: Option<usize>,
    interpolator: Interpolator,
}

impl MatchWeightEngine {
    pub fn new(field: FieldSpec, u_len: usize, n: usize, k: usize) -> Result<Self> {
        let abscissas = field.distinct_points(u_len + 1)?;
        Ok(MatchWeightEngine {
            field,
            u_len,
            cover_size: (k > 0 && n.is_multiple_of(k)).then(|| n / k),
            interpolator: Interpolator::new(field, abscissas)?,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    /// Loop-stratified matching weights, via `|U| + 1` Tutte determinants.
    pub fn loop_weights(&self, view: &ProjectedView, r: &EdgeAssignment) -> LoopStratifiedWeights {
        assert_eq!(
            view.u_len(),
            self.u_len,
            "view does not match engine U size"
        );
        let dim = self.u_len;
        let base = build_tutte(&self.field, view, r, FieldElem::ZERO);
        let loops = loop_sums(view, r);
        let mut scratch = vec![FieldElem::ZERO; dim * dim];
        let ordinates: Vec<FieldElem> = self
            .interpolator
            .abscissas()
            .iter()
            .map(|&s| {
                scratch.copy_from_slice(base.entries());
                for (i, &sum) in loops.iter().enumerate() {
                    scratch[i * dim + i] = self.field.mul(s, sum);
                }
                determinant_in_place(&self.field, dim, &mut scratch)
            })
            .collect();
        LoopStratifiedWeights {
            m_values: self.interpolator.coefficients(&ordinates).coeffs,
        }
    }

    /// Weighted count of the families of `n / k` edges of the view that
    /// cover U disjointly, each weighted by `prod r(e)^f(e)` with `f = 2` on
    /// pairs and `1` elsewhere.
    pub fn w2f(&self, view: &ProjectedView, r: &EdgeAssignment) -> FieldElem {
        debug_assert!(
            view.dropped.is_empty(),
            "dropped edges must be removed before evaluation"
        );
        let Some(cover_size) = self.cover_size else {
            return FieldElem::ZERO;
        };
        let strata = self.loop_weights(view, r);
        let z = z_table(&self.field, &view.empties, r, cover_size);
        strata
            .m_values
            .iter()
            .enumerate()
            .filter_map(|(loops, &m)| {
                // a matching with `loops` loops uses floor((|U| + loops) / 2) edges
                let used = (self.u_len + loops) / 2;
                let rest = cover_size.checked_sub(used)?;
                Some(self.field.mul(z.get(rest), m))
            })
            .sum()
    }
}

/// One-shot form of [`MatchWeightEngine::loop_weights`].
pub fn loop_weights(
    field: &FieldSpec,
    view: &ProjectedView,
    r: &EdgeAssignment,
) -> Result<LoopStratifiedWeights> {
    Ok(MatchWeightEngine::new(*field, view.u_len(), 0, 1)?.loop_weights(view, r))
}

/// One-shot form of [`MatchWeightEngine::w2f`].
pub fn w2f_eval(
    field: &FieldSpec,
    view: &ProjectedView,
    r: &EdgeAssignment,
    n: usize,
    k: usize,
) -> Result<FieldElem> {
    Ok(MatchWeightEngine::new(*field, view.u_len(), n, k)?.w2f(view, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{project, Hypergraph};

    fn f64() -> FieldSpec {
        FieldSpec::gf64()
    }

    fn assign(values: &[u64]) -> EdgeAssignment {
        EdgeAssignment::new(values.iter().map(|&v| FieldElem::from_bits(v)).collect())
    }

    #[test]
    fn edmonds_examples() {
        let f = f64();
        // k = 3, blocks {0}, {1}, {2}; U = {0, 1}
        let h = Hypergraph::new(3, 3, vec![vec![0, 1, 2]], None).unwrap();
        let view = project(&h, &[0, 1]).unwrap();
        let r = assign(&[0xABC]);
        let m = build_edmonds(&view, &r, &[0], &[1]).unwrap();
        assert_eq!(m.dim(), 1);
        assert_eq!(m.determinant(&f), FieldElem::from_bits(0xABC));

        let h = Hypergraph::new(3, 3, vec![vec![0, 1, 2], vec![0, 1, 2]], None).unwrap();
        let view = project(&h, &[0, 1]).unwrap();
        let r = assign(&[0x5, 0x3]);
        let m = build_edmonds(&view, &r, &[0], &[1]).unwrap();
        assert_eq!(m.get(0, 0), FieldElem::from_bits(0x6));
    }

    #[test]
    fn edmonds_complete_bipartite_2x2() {
        let f = f64();
        // left {0, 1}, right {2, 3}, third block {4, 5}
        let edges = vec![vec![0, 2, 4], vec![0, 3, 5], vec![1, 2, 5], vec![1, 3, 4]];
        let h = Hypergraph::new(6, 3, edges, None).unwrap();
        let view = project(&h, &[0, 1, 2, 3]).unwrap();
        let r = assign(&[0x11, 0x22, 0x33, 0x44]);
        let m = build_edmonds(&view, &r, &[0, 1], &[2, 3]).unwrap();
        let (v00, v01, v10, v11) = (r.get(0), r.get(1), r.get(2), r.get(3));
        assert_eq!(m.determinant(&f), f.mul(v00, v11) + f.mul(v01, v10));
    }

    #[test]
    fn edmonds_errors() {
        let h = Hypergraph::new(6, 3, vec![vec![0, 1, 4]], None).unwrap();
        let view = project(&h, &[0, 1, 2, 3]).unwrap();
        let r = assign(&[1]);
        assert!(matches!(
            build_edmonds(&view, &r, &[0, 1], &[2, 3]),
            Err(Error::ProjectionShape { edge: 0, .. })
        ));
        assert!(matches!(
            build_edmonds(&view, &r, &[0, 1], &[2]),
            Err(Error::UnequalSides { .. })
        ));
    }

    #[test]
    fn tutte_examples() {
        let f = f64();
        let h = Hypergraph::new(3, 3, vec![vec![0, 1, 2]], None).unwrap();
        let view = project(&h, &[2]).unwrap();
        let r = assign(&[0x77]);
        let s = FieldElem::from_bits(0x1234);
        let t = build_tutte(&f, &view, &r, s);
        assert_eq!(t.get(0, 0), f.mul(s, r.get(0)));

        let view = project(&h, &[0, 1]).unwrap();
        for sv in [0u64, 1, 5, 0xFFFF] {
            let t = build_tutte(&f, &view, &r, FieldElem::from_bits(sv));
            assert_eq!(t, t.transpose());
            assert_eq!(t.determinant(&f), f.mul(r.get(0), r.get(0)));
        }
    }

    #[test]
    fn loop_weight_examples() {
        let f = f64();
        let h = Hypergraph::new(6, 3, vec![], None).unwrap();
        let view = project(&h, &[0, 1, 2]).unwrap();
        let w = loop_weights(&f, &view, &assign(&[])).unwrap();
        assert!(w.m_values.iter().all(|x| x.is_zero()));

        let h = Hypergraph::new(3, 3, vec![vec![0, 1, 2]], None).unwrap();
        let view = project(&h, &[1]).unwrap();
        let w = loop_weights(&f, &view, &assign(&[0x99])).unwrap();
        assert_eq!(
            w.m_values,
            vec![FieldElem::ZERO, FieldElem::from_bits(0x99)]
        );
    }

    #[test]
    fn z_table_examples() {
        let f = f64();
        let r = assign(&[0x1F, 0x2E]);
        let z = z_table(&f, &[], &r, 3);
        assert_eq!(
            z.z_values,
            vec![
                FieldElem::ONE,
                FieldElem::ZERO,
                FieldElem::ZERO,
                FieldElem::ZERO
            ]
        );
        let z = z_table(&f, &[0, 1], &r, 2);
        assert_eq!(z.get(1), r.get(0) + r.get(1));
        assert_eq!(z.get(2), f.mul(r.get(0), r.get(1)));
        let z = z_table(&f, &[0, 1], &r, 4);
        assert_eq!(z.get(3), FieldElem::ZERO);
        assert_eq!(z.get(9), FieldElem::ZERO);
        // pool order is irrelevant
        assert_eq!(z_table(&f, &[1, 0], &r, 4), z);
    }

    #[test]
    fn w2f_examples() {
        let f = f64();
        // kDM-shaped: n = 6, k = 3, U = first two blocks, one perfect pair set
        let edges = vec![vec![0, 2, 4], vec![1, 3, 5]];
        let h = Hypergraph::new(6, 3, edges, None).unwrap();
        let view = project(&h, &[0, 1, 2, 3]).unwrap();
        let r = assign(&[0x3, 0x5]);
        let w = w2f_eval(&f, &view, &r, 6, 3).unwrap();
        let m0 = loop_weights(&f, &view, &r).unwrap().m_values[0];
        assert_eq!(w, m0);
        let expected = f.mul(f.square(r.get(0)), f.square(r.get(1)));
        assert_eq!(w, expected);

        let empty = Hypergraph::new(6, 3, vec![], None).unwrap();
        let view = project(&empty, &[0, 1]).unwrap();
        assert_eq!(
            w2f_eval(&f, &view, &assign(&[]), 6, 3).unwrap(),
            FieldElem::ZERO
        );
    }

    #[test]
    fn parity_of_strata() {
        use rand::{Rng, SeedableRng};
        let f = f64();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100 {
            let h = crate::hypergraph::generate(
                &mut rng,
                crate::hypergraph::GenSpec {
                    k: 3,
                    n: 12,
                    edge_count: 14,
                    plant: true,
                    kdm: false,
                },
            )
            .unwrap();
            let u_len = rng.random_range(1..=7);
            let u: Vec<usize> = rand::seq::index::sample(&mut rng, 12, u_len).into_vec();
            let view = project(&h, &u).unwrap();
            let view = view.filter_edges(|id| !view.dropped.contains(&id));
            let r = EdgeAssignment::random(&f, &mut rng, h.num_edges());
            let w = loop_weights(&f, &view, &r).unwrap();
            for (i, m) in w.m_values.iter().enumerate() {
                if (i + u_len) % 2 == 1 {
                    assert!(m.is_zero());
                }
            }
        }
    }
}
