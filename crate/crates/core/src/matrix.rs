//! Dense exact matrices over a [`Field`] and integer matrices with lattice
//! kernels.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::AlgebraError;
use crate::field::Field;

/// Row-major dense matrix with optional row and column labels.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactMatrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
    row_labels: Option<Vec<String>>,
    col_labels: Option<Vec<String>>,
}

impl<E: Clone> ExactMatrix<E> {
    pub fn filled(rows: usize, cols: usize, value: E) -> Self {
        ExactMatrix { rows, cols, data: vec![value; rows * cols], row_labels: None, col_labels: None }
    }

    pub fn zeros<F: Field<Elem = E>>(field: &F, rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, field.zero())
    }

    pub fn identity<F: Field<Elem = E>>(field: &F, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    /// Build from row vectors; fails unless every row has the same length.
    pub fn from_rows(rows: Vec<Vec<E>>) -> Result<Self, AlgebraError> {
        let cols = rows.first().map_or(0, Vec::len);
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for r in rows {
            if r.len() != cols {
                return Err(AlgebraError::DimensionMismatch { expected: cols, found: r.len() });
            }
            data.extend(r);
        }
        Ok(ExactMatrix { rows: nrows, cols, data, row_labels: None, col_labels: None })
    }

    pub fn from_integer<F: Field<Elem = E>>(field: &F, m: &IntegerMatrix) -> Self {
        ExactMatrix {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|x| field.from_bigint(x)).collect(),
            row_labels: m.row_labels.clone(),
            col_labels: m.col_labels.clone(),
        }
    }

    pub fn with_labels(
        mut self,
        row_labels: Option<Vec<String>>,
        col_labels: Option<Vec<String>>,
    ) -> Result<Self, AlgebraError> {
        check_labels(&row_labels, self.rows)?;
        check_labels(&col_labels, self.cols)?;
        self.row_labels = row_labels;
        self.col_labels = col_labels;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_labels(&self) -> Option<&[String]> {
        self.row_labels.as_deref()
    }

    pub fn col_labels(&self) -> Option<&[String]> {
        self.col_labels.as_deref()
    }

    pub fn get(&self, i: usize, j: usize) -> &E {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: E) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        ExactMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
        }
    }

    pub fn mul<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Result<Self, AlgebraError> {
        if self.cols != other.rows {
            return Err(AlgebraError::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out = Self::zeros(field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if field.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let v = field.add(out.get(i, j), &field.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply<F: Field<Elem = E>>(&self, field: &F, v: &[E]) -> Result<Vec<E>, AlgebraError> {
        if v.len() != self.cols {
            return Err(AlgebraError::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(field.zero(), |acc, (a, b)| field.add(&acc, &field.mul(a, b))))
            .collect())
    }
}

fn check_labels(labels: &Option<Vec<String>>, len: usize) -> Result<(), AlgebraError> {
    if let Some(l) = labels {
        if l.len() != len {
            return Err(AlgebraError::DimensionMismatch { expected: len, found: l.len() });
        }
        let mut sorted: Vec<&String> = l.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(AlgebraError::DuplicateLabel);
        }
    }
    Ok(())
}

/// Result of Gauss-Jordan elimination.
#[derive(Clone, Debug, PartialEq)]
pub struct Rref<E> {
    pub rank: usize,
    pub rref: ExactMatrix<E>,
    /// Pivot column of each nonzero row.
    pub pivots: Vec<usize>,
}

/// Reduced row echelon form and rank over `field`.
pub fn rank_rref<F: Field>(field: &F, m: &ExactMatrix<F::Elem>) -> Rref<F::Elem> {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let Some(p) = (r..a.rows).find(|&i| !field.is_zero(a.get(i, c))) else {
            continue;
        };
        if p != r {
            for j in 0..a.cols {
                a.data.swap(p * a.cols + j, r * a.cols + j);
            }
        }
        let inv = field.inv(a.get(r, c)).expect("pivot is nonzero");
        for j in c..a.cols {
            let v = field.mul(a.get(r, j), &inv);
            a.set(r, j, v);
        }
        for i in 0..a.rows {
            if i == r || field.is_zero(a.get(i, c)) {
                continue;
            }
            let factor = a.get(i, c).clone();
            for j in c..a.cols {
                let v = field.sub(a.get(i, j), &field.mul(&factor, a.get(r, j)));
                a.set(i, j, v);
            }
        }
        pivots.push(c);
        r += 1;
    }
    Rref { rank: r, rref: a, pivots }
}

/// Reduce `v` against a reduced echelon form; zero iff `v` is in the row space.
fn reduce_against<F: Field>(field: &F, v: &[F::Elem], echelon: &Rref<F::Elem>) -> Vec<F::Elem> {
    let mut v = v.to_vec();
    for (i, &c) in echelon.pivots.iter().enumerate() {
        if field.is_zero(&v[c]) {
            continue;
        }
        let factor = v[c].clone();
        for (x, r) in v.iter_mut().zip(echelon.rref.row(i)) {
            *x = field.sub(x, &field.mul(&factor, r));
        }
    }
    v
}

/// Whether the two matrices have the same row space.
pub fn rowspan_equal<F: Field>(
    field: &F,
    a: &ExactMatrix<F::Elem>,
    b: &ExactMatrix<F::Elem>,
) -> Result<bool, AlgebraError> {
    if a.cols != b.cols {
        return Err(AlgebraError::DimensionMismatch { expected: a.cols, found: b.cols });
    }
    let contained = |x: &ExactMatrix<F::Elem>, y: &ExactMatrix<F::Elem>| {
        let ey = rank_rref(field, y);
        (0..x.rows).all(|i| reduce_against(field, x.row(i), &ey).iter().all(|e| field.is_zero(e)))
    };
    Ok(contained(a, b) && contained(b, a))
}

/// Solve `m * x = rhs`, or invert `m` when `rhs` is `None`.
///
/// For underdetermined consistent systems the free variables are set to zero.
pub fn solve_or_invert<F: Field>(
    field: &F,
    m: &ExactMatrix<F::Elem>,
    rhs: Option<&ExactMatrix<F::Elem>>,
) -> Result<ExactMatrix<F::Elem>, AlgebraError> {
    let inverting = rhs.is_none();
    let owned;
    let rhs = match rhs {
        Some(r) => {
            if r.rows != m.rows {
                return Err(AlgebraError::DimensionMismatch { expected: m.rows, found: r.rows });
            }
            r
        }
        None => {
            if m.rows != m.cols {
                return Err(AlgebraError::DimensionMismatch { expected: m.rows, found: m.cols });
            }
            owned = ExactMatrix::identity(field, m.rows);
            &owned
        }
    };
    let mut aug = ExactMatrix::zeros(field, m.rows, m.cols + rhs.cols);
    for i in 0..m.rows {
        for j in 0..m.cols {
            aug.set(i, j, m.get(i, j).clone());
        }
        for j in 0..rhs.cols {
            aug.set(i, m.cols + j, rhs.get(i, j).clone());
        }
    }
    let red = rank_rref(field, &aug);
    if red.pivots.iter().any(|&c| c >= m.cols) {
        return Err(if inverting { AlgebraError::Singular } else { AlgebraError::Inconsistent });
    }
    if inverting && red.rank < m.cols {
        return Err(AlgebraError::Singular);
    }
    let mut x = ExactMatrix::zeros(field, m.cols, rhs.cols);
    for (i, &c) in red.pivots.iter().enumerate() {
        for j in 0..rhs.cols {
            x.set(c, j, red.rref.get(i, m.cols + j).clone());
        }
    }
    Ok(x)
}

/// Dense matrix of arbitrary-precision integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
    row_labels: Option<Vec<String>>,
    col_labels: Option<Vec<String>>,
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols], row_labels: None, col_labels: None }
    }

    pub fn from_rows_i64(rows: &[Vec<i64>]) -> Result<Self, AlgebraError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(AlgebraError::DimensionMismatch { expected: cols, found: r.len() });
            }
            for (j, &v) in r.iter().enumerate() {
                m.data[i * cols + j] = BigInt::from(v);
            }
        }
        Ok(m)
    }

    pub fn with_labels(
        mut self,
        row_labels: Option<Vec<String>>,
        col_labels: Option<Vec<String>>,
    ) -> Result<Self, AlgebraError> {
        check_labels(&row_labels, self.rows)?;
        check_labels(&col_labels, self.cols)?;
        self.row_labels = row_labels;
        self.col_labels = col_labels;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_labels(&self) -> Option<&[String]> {
        self.row_labels.as_deref()
    }

    pub fn col_labels(&self) -> Option<&[String]> {
        self.col_labels.as_deref()
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Append a row (labels are dropped).
    pub fn push_row(&mut self, row: Vec<BigInt>) -> Result<(), AlgebraError> {
        if row.len() != self.cols {
            return Err(AlgebraError::DimensionMismatch { expected: self.cols, found: row.len() });
        }
        self.data.extend(row);
        self.rows += 1;
        self.row_labels = None;
        Ok(())
    }

    /// Append a column (labels are dropped).
    pub fn push_col(&mut self, col: Vec<BigInt>) -> Result<(), AlgebraError> {
        if col.len() != self.rows {
            return Err(AlgebraError::DimensionMismatch { expected: self.rows, found: col.len() });
        }
        let mut data = Vec::with_capacity(self.rows * (self.cols + 1));
        for (i, c) in col.into_iter().enumerate() {
            data.extend_from_slice(self.row(i));
            data.push(c);
        }
        self.data = data;
        self.cols += 1;
        self.col_labels = None;
        Ok(())
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>, AlgebraError> {
        if v.len() != self.cols {
            return Err(AlgebraError::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect())
    }
}

/// A basis of the integer kernel `{v in Z^cols : m v = 0}`.
///
/// The transpose of `m` is row-reduced over the integers next to an identity
/// block using only unimodular row operations; the identity-block rows that
/// end up next to zero rows span exactly the kernel lattice, so the basis is
/// saturated.
pub fn integer_kernel(m: &IntegerMatrix) -> Vec<Vec<BigInt>> {
    let (r, c) = (m.rows, m.cols);
    let width = r + c;
    let mut w: Vec<Vec<BigInt>> = (0..c)
        .map(|k| {
            let mut row = vec![BigInt::zero(); width];
            for i in 0..r {
                row[i] = m.get(i, k).clone();
            }
            row[r + k] = BigInt::one();
            row
        })
        .collect();
    let mut piv = 0;
    for col in 0..r {
        if piv == c {
            break;
        }
        loop {
            // smallest nonzero entry at or below the pivot row
            let best =
                (piv..c).filter(|&i| !w[i][col].is_zero()).min_by(|&a, &b| w[a][col].abs().cmp(&w[b][col].abs()));
            let Some(best) = best else { break };
            w.swap(piv, best);
            let mut done = true;
            for i in piv + 1..c {
                if w[i][col].is_zero() {
                    continue;
                }
                let q = w[i][col].div_floor(&w[piv][col]);
                let (head, tail) = w.split_at_mut(i);
                let prow = &head[piv];
                for (x, p) in tail[0].iter_mut().zip(prow) {
                    *x -= &q * p;
                }
                if !tail[0][col].is_zero() {
                    done = false;
                }
            }
            if done {
                piv += 1;
                break;
            }
        }
    }
    w.into_iter().skip(piv).map(|row| row[r..].to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, Rationals, PRIME_A};
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn q(v: i64) -> BigRational {
        Rationals.from_i64(v)
    }

    fn qm(rows: &[&[i64]]) -> ExactMatrix<BigRational> {
        ExactMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect()).unwrap()
    }

    #[test]
    fn rank_examples() {
        let f = Rationals;
        assert_eq!(rank_rref(&f, &ExactMatrix::identity(&f, 3)).rank, 3);
        assert_eq!(rank_rref(&f, &ExactMatrix::zeros(&f, 3, 4)).rank, 0);
        assert_eq!(rank_rref(&f, &qm(&[&[1, 2], &[2, 4]])).rank, 1);
    }

    #[test]
    fn rowspan_examples() {
        let f = Rationals;
        let a = qm(&[&[1, 2, 3], &[0, 1, 1]]);
        assert!(rowspan_equal(&f, &a, &a).unwrap());
        assert!(!rowspan_equal(&f, &qm(&[&[1, 0]]), &qm(&[&[0, 1]])).unwrap());
        let b = qm(&[&[1, 3, 4], &[2, 5, 7]]);
        assert!(rowspan_equal(&f, &a, &b).unwrap());
        assert_eq!(
            rowspan_equal(&f, &a, &qm(&[&[1, 0]])),
            Err(AlgebraError::DimensionMismatch { expected: 3, found: 2 })
        );
    }

    #[test]
    fn kernel_examples() {
        let m = IntegerMatrix::from_rows_i64(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        let k = integer_kernel(&m);
        assert_eq!(k.len(), 1);
        let v: Vec<i64> = k[0].iter().map(|x| i64::try_from(x).unwrap()).collect();
        assert!(v == [1, -1, 1] || v == [-1, 1, -1]);

        let id = IntegerMatrix::from_rows_i64(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert!(integer_kernel(&id).is_empty());

        // columns e_i + e_j for 0 <= i < j <= 3
        let mut cols = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                let mut c = vec![0i64; 4];
                c[i] = 1;
                c[j] = 1;
                cols.push(c);
            }
        }
        let rows: Vec<Vec<i64>> = (0..4).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
        let b = IntegerMatrix::from_rows_i64(&rows).unwrap();
        let k = integer_kernel(&b);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(b.mul_vec(v).unwrap().iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn kernel_is_saturated() {
        // kernel of [2 4] is spanned by (2,-1); (4,-2) alone would not be saturated
        let m = IntegerMatrix::from_rows_i64(&[vec![2, 4]]).unwrap();
        let k = integer_kernel(&m);
        assert_eq!(k.len(), 1);
        let v: Vec<i64> = k[0].iter().map(|x| i64::try_from(x).unwrap()).collect();
        assert!(v == [2, -1] || v == [-2, 1]);
    }

    #[test]
    fn invert_and_solve() {
        let f = Rationals;
        let inv = solve_or_invert(&f, &qm(&[&[2, 0], &[0, 3]]), None).unwrap();
        assert_eq!(*inv.get(0, 0), BigRational::new(1.into(), 2.into()));
        assert_eq!(*inv.get(1, 1), BigRational::new(1.into(), 3.into()));

        let b = qm(&[&[4], &[5]]);
        assert_eq!(solve_or_invert(&f, &ExactMatrix::identity(&f, 2), Some(&b)).unwrap(), b);

        // Sigma on the 2-leaf star with t = (2, 2, 1); 2x2 closed form adj/det
        let sigma = qm(&[&[2, 1], &[1, 2]]);
        let third = |v: i64| BigRational::new(v.into(), 3.into());
        let expected = ExactMatrix::from_rows(vec![vec![third(2), third(-1)], vec![third(-1), third(2)]]).unwrap();
        assert_eq!(solve_or_invert(&f, &sigma, None).unwrap(), expected);

        assert_eq!(solve_or_invert(&f, &qm(&[&[1, 2], &[2, 4]]), None), Err(AlgebraError::Singular));
        let rhs = qm(&[&[1], &[3]]);
        assert_eq!(solve_or_invert(&f, &qm(&[&[1, 2], &[2, 4]]), Some(&rhs)), Err(AlgebraError::Inconsistent));
    }

    #[test]
    fn prime_field_rank() {
        let f = PrimeField::new(PRIME_A);
        let m = ExactMatrix::from_rows(vec![vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(rank_rref(&f, &m).rank, 2);
    }

    #[test]
    fn labels_must_be_distinct() {
        let m = qm(&[&[1, 2]]);
        let dup = Some(vec!["a".into(), "a".into()]);
        assert_eq!(m.with_labels(None, dup), Err(AlgebraError::DuplicateLabel));
    }

    fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..5, 1usize..6)
            .prop_flat_map(|(r, c)| proptest::collection::vec(proptest::collection::vec(-3i64..4, c), r))
    }

    proptest! {
        #[test]
        fn rref_properties(rows in small_matrix()) {
            let f = Rationals;
            let m = ExactMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect()).unwrap();
            let once = rank_rref(&f, &m);
            let twice = rank_rref(&f, &once.rref);
            prop_assert_eq!(&once.rref, &twice.rref);
            prop_assert_eq!(once.rank, rank_rref(&f, &m.transpose()).rank);
            prop_assert!(rowspan_equal(&f, &m, &once.rref).unwrap());
        }

        #[test]
        fn kernel_vectors(rows in small_matrix()) {
            let m = IntegerMatrix::from_rows_i64(&rows).unwrap();
            let k = integer_kernel(&m);
            for v in &k {
                prop_assert!(m.mul_vec(v).unwrap().iter().all(Zero::is_zero));
            }
            let f = Rationals;
            let qmat = ExactMatrix::from_integer(&f, &m);
            let rank = rank_rref(&f, &qmat).rank;
            prop_assert_eq!(k.len(), m.cols() - rank);
            if !k.is_empty() {
                let kb = ExactMatrix::from_rows(k.iter().map(|v| v.iter().map(|x| f.from_bigint(x)).collect()).collect()).unwrap();
                prop_assert_eq!(rank_rref(&f, &kb).rank, k.len());
            }
        }

        #[test]
        fn inverse_times_matrix(rows in proptest::collection::vec(proptest::collection::vec(-4i64..5, 3), 3)) {
            let f = Rationals;
            let m = ExactMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect()).unwrap();
            match solve_or_invert(&f, &m, None) {
                Ok(inv) => prop_assert_eq!(inv.mul(&f, &m).unwrap(), ExactMatrix::identity(&f, 3)),
                Err(e) => {
                    prop_assert_eq!(e, AlgebraError::Singular);
                    prop_assert!(rank_rref(&f, &m).rank < 3);
                }
            }
        }
    }
}
