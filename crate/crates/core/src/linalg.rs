//! Dense determinants and univariate interpolation over `GF(2^m)`.

use crate::error::{Error, Result};
use crate::gf2m::{FieldElem, FieldSpec};

/// A dense `dim x dim` matrix in row-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareMatrix {
    dim: usize,
    entries: Vec<FieldElem>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        SquareMatrix {
            dim,
            entries: vec![FieldElem::ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, FieldElem::ONE);
        }
        m
    }

    /// Builds a matrix from rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<FieldElem>]) -> Option<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return None;
        }
        Some(SquareMatrix {
            dim,
            entries: rows.concat(),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> FieldElem {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: FieldElem) {
        self.entries[row * self.dim + col] = value;
    }

    /// Adds `value` into an entry.
    #[inline]
    pub fn accumulate(&mut self, row: usize, col: usize, value: FieldElem) {
        self.entries[row * self.dim + col] += value;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn entries(&self) -> &[FieldElem] {
        &self.entries
    }

    /// Determinant by Gaussian elimination on a private copy.
    pub fn determinant(&self, field: &FieldSpec) -> FieldElem {
        let mut scratch = self.entries.clone();
        determinant_in_place(field, self.dim, &mut scratch)
    }
}

/// Determinant of the row-major `dim x dim` matrix held in `a`, which is
/// destroyed. In characteristic two row swaps need no sign correction.
pub fn determinant_in_place(field: &FieldSpec, dim: usize, a: &mut [FieldElem]) -> FieldElem {
    debug_assert_eq!(a.len(), dim * dim);
    let mut det = FieldElem::ONE;
    for col in 0..dim {
        let Some(pivot_row) = (col..dim).find(|&r| !a[r * dim + col].is_zero()) else {
            return FieldElem::ZERO;
        };
        if pivot_row != col {
            for j in col..dim {
                a.swap(pivot_row * dim + j, col * dim + j);
            }
        }
        let pivot = a[col * dim + col];
        det = field.mul(det, pivot);
        let pivot_inv = field.inv(pivot).expect("pivot is nonzero");
        for row in col + 1..dim {
            let lead = a[row * dim + col];
            if lead.is_zero() {
                continue;
            }
            let factor = field.mul(lead, pivot_inv);
            for j in col + 1..dim {
                let sub = field.mul(factor, a[col * dim + j]);
                a[row * dim + j] += sub;
            }
        }
    }
    det
}

/// Coefficients of a univariate polynomial; `coeffs[i]` multiplies `s^i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyCoeffs {
    pub coeffs: Vec<FieldElem>,
}

impl PolyCoeffs {
    pub fn new(coeffs: Vec<FieldElem>) -> Self {
        PolyCoeffs { coeffs }
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Horner evaluation.
    pub fn evaluate(&self, field: &FieldSpec, s: FieldElem) -> FieldElem {
        self.coeffs
            .iter()
            .rev()
            .fold(FieldElem::ZERO, |acc, &c| field.mul(acc, s) + c)
    }
}

pub fn evaluate(field: &FieldSpec, p: &PolyCoeffs, s: FieldElem) -> FieldElem {
    p.evaluate(field, s)
}

/// Lagrange interpolation with the abscissas fixed up front.
///
/// The basis polynomials are expanded once, so recovering coefficients from a
/// fresh set of ordinates costs `O(d^2)` multiplications.
#[derive(Clone, Debug)]
pub struct Interpolator {
    field: FieldSpec,
    abscissas: Vec<FieldElem>,
    /// `basis[j]` holds the coefficients of the j-th Lagrange basis polynomial.
    basis: Vec<Vec<FieldElem>>,
}

impl Interpolator {
    pub fn new(field: FieldSpec, abscissas: Vec<FieldElem>) -> Result<Self> {
        if abscissas.is_empty() {
            return Err(Error::TooFewPoints { needed: 1, got: 0 });
        }
        for (i, a) in abscissas.iter().enumerate() {
            if abscissas[..i].contains(a) {
                return Err(Error::DuplicateAbscissa(a.bits()));
            }
        }
        let n = abscissas.len();
        // master(s) = prod_j (s + x_j); basis_j = master / (s + x_j) / prod_{l != j} (x_j + x_l)
        let mut master = vec![FieldElem::ZERO; n + 1];
        master[0] = FieldElem::ONE;
        for (deg, &x) in abscissas.iter().enumerate() {
            for i in (0..=deg + 1).rev() {
                let shifted = if i > 0 {
                    master[i - 1]
                } else {
                    FieldElem::ZERO
                };
                master[i] = shifted + field.mul(master[i], x);
            }
        }
        let mut basis = Vec::with_capacity(n);
        for (j, &xj) in abscissas.iter().enumerate() {
            // synthetic division of master by (s + xj)
            let mut quotient = vec![FieldElem::ZERO; n];
            let mut carry = FieldElem::ZERO;
            for i in (1..=n).rev() {
                carry = master[i] + field.mul(carry, xj);
                quotient[i - 1] = carry;
            }
            let denom = abscissas
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != j)
                .fold(FieldElem::ONE, |acc, (_, &xl)| field.mul(acc, xj + xl));
            let scale = field.inv(denom)?;
            quotient.iter_mut().for_each(|c| *c = field.mul(*c, scale));
            basis.push(quotient);
        }
        Ok(Interpolator {
            field,
            abscissas,
            basis,
        })
    }

    pub fn abscissas(&self) -> &[FieldElem] {
        &self.abscissas
    }

    /// Coefficients of the unique polynomial of degree below `abscissas.len()`
    /// taking `ordinates[j]` at `abscissas[j]`.
    pub fn coefficients(&self, ordinates: &[FieldElem]) -> PolyCoeffs {
        assert_eq!(ordinates.len(), self.abscissas.len());
        let mut coeffs = vec![FieldElem::ZERO; self.abscissas.len()];
        for (basis, &y) in self.basis.iter().zip(ordinates) {
            if y.is_zero() {
                continue;
            }
            for (c, &b) in coeffs.iter_mut().zip(basis) {
                *c += self.field.mul(y, b);
            }
        }
        PolyCoeffs { coeffs }
    }
}

/// The unique polynomial of degree at most `degree_bound` through `points`.
///
/// The first `degree_bound + 1` points determine the polynomial; any further
/// points must lie on it.
pub fn interpolate(
    field: &FieldSpec,
    points: &[(FieldElem, FieldElem)],
    degree_bound: usize,
) -> Result<PolyCoeffs> {
    let needed = degree_bound + 1;
    if points.len() < needed {
        return Err(Error::TooFewPoints {
            needed,
            got: points.len(),
        });
    }
    for (i, (x, _)) in points.iter().enumerate() {
        if points[..i].iter().any(|(y, _)| y == x) {
            return Err(Error::DuplicateAbscissa(x.bits()));
        }
    }
    let (head, tail) = points.split_at(needed);
    let interp = Interpolator::new(*field, head.iter().map(|p| p.0).collect())?;
    let ordinates: Vec<FieldElem> = head.iter().map(|p| p.1).collect();
    let poly = interp.coefficients(&ordinates);
    if tail.iter().any(|&(x, y)| poly.evaluate(field, x) != y) {
        return Err(Error::InconsistentPoints(degree_bound));
    }
    Ok(poly)
}
