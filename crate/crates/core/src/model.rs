//! Linear algebra attached to a tree: the design matrix `A_T`, the path
//! matrix `B_T`, the `p`-coordinates of a concentration matrix and the affine
//! system cutting out the likelihood slice.
//!
//! Columns are indexed by unordered leaf pairs `{i,j}`, `0 <= i < j <= n`, in
//! lexicographic order `01, 02, ..., 0n, 12, ...`. Rows are indexed by the
//! non-root vertices `1, 2, ...` (or, for `B_T`, the edges they name).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;

use crate::error::ModelError;
use crate::field::Field;
use crate::matrix::{ExactMatrix, IntegerMatrix};
use crate::tree::{RootedTree, Vertex};

pub fn num_pairs(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Column index of the unordered pair `{i,j}`, `i != j`, among leaves `0..=n`.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    debug_assert!(i != j && j <= n);
    i * n - i * (i.saturating_sub(1)) / 2 + (j - i - 1)
}

/// All pairs `(i,j)`, `i < j`, in column order.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(num_pairs(n));
    for i in 0..=n {
        for j in i + 1..=n {
            out.push((i, j));
        }
    }
    out
}

/// `"ij"` when all labels are single digits, `"i_j"` otherwise.
pub fn pair_label(n: usize, i: usize, j: usize) -> String {
    if n < 10 {
        format!("{i}{j}")
    } else {
        format!("{i}_{j}")
    }
}

pub fn pair_labels(n: usize) -> Vec<String> {
    pairs(n).into_iter().map(|(i, j)| pair_label(n, i, j)).collect()
}

/// Variable names `p01, p02, ...` for the polynomial ring of a tree.
pub fn p_var_names(n: usize) -> Vec<String> {
    pair_labels(n).into_iter().map(|l| format!("p{l}")).collect()
}

fn vertex_labels(t: &RootedTree) -> Vec<String> {
    t.non_root_vertices().map(|v| format!("{v}")).collect()
}

fn edge_labels(t: &RootedTree) -> Vec<String> {
    t.non_root_vertices().map(|v| format!("e({v})")).collect()
}

/// The covariance pattern `sigma_ij = t_{lca(i,j)}` on leaves `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CovariancePattern {
    tree: RootedTree,
    class: Vec<Vec<Vertex>>,
}

impl CovariancePattern {
    pub fn new(tree: &RootedTree) -> Self {
        let n = tree.n();
        let class =
            (1..=n).map(|i| (1..=n).map(|j| tree.lca(i, j).expect("leaf labels are valid")).collect()).collect();
        CovariancePattern { tree: tree.clone(), class }
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    pub fn dim(&self) -> usize {
        self.tree.n()
    }

    /// `lca(i,j)` for leaves `1 <= i, j <= n`.
    pub fn class_of(&self, i: usize, j: usize) -> Vertex {
        self.class[i - 1][j - 1]
    }

    /// The pairs `(i,j)`, `1 <= i <= j <= n`, in the class of vertex `v`.
    pub fn members(&self, v: Vertex) -> Vec<(usize, usize)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 1..=n {
            for j in i..=n {
                if self.class_of(i, j) == v {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// `Sigma(t)` for one parameter per non-root vertex, given in vertex
    /// order `1, 2, ...`.
    pub fn sigma<T: Clone>(&self, params: &[T]) -> Vec<Vec<T>> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| params[self.class[i][j] - 1].clone()).collect()).collect()
    }

    /// Basis of `L_T`: the 0/1 indicator matrices `E_v` of each class.
    pub fn basis<F: Field>(&self, field: &F) -> Vec<ExactMatrix<F::Elem>> {
        let n = self.dim();
        self.tree
            .non_root_vertices()
            .map(|v| {
                let mut m = ExactMatrix::zeros(field, n, n);
                for i in 0..n {
                    for j in 0..n {
                        if self.class[i][j] == v {
                            m.set(i, j, field.one());
                        }
                    }
                }
                m
            })
            .collect()
    }
}

/// `A_T(v,{i,j}) = 1` iff `v` is `i`, `j` or `lca(i,j)`.
pub fn design_a(t: &RootedTree) -> IntegerMatrix {
    let n = t.n();
    let mut m = IntegerMatrix::zeros(t.num_vertices() - 1, num_pairs(n));
    for (c, (i, j)) in pairs(n).into_iter().enumerate() {
        let l = t.lca(i, j).expect("leaf labels are valid");
        for v in [i, j, l] {
            if v != 0 {
                m.set(v - 1, c, BigInt::from(1));
            }
        }
    }
    m.with_labels(Some(vertex_labels(t)), Some(pair_labels(n))).expect("labels are distinct")
}

/// `B_T(e,{i,j}) = 1` iff edge `e` lies on the path between `i` and `j`.
pub fn path_b(t: &RootedTree) -> IntegerMatrix {
    let n = t.n();
    let mut m = IntegerMatrix::zeros(t.num_vertices() - 1, num_pairs(n));
    for (c, (i, j)) in pairs(n).into_iter().enumerate() {
        for e in t.path_edges(i, j).expect("distinct leaves") {
            m.set(e - 1, c, BigInt::from(1));
        }
    }
    m.with_labels(Some(edge_labels(t)), Some(pair_labels(n))).expect("labels are distinct")
}

/// `B_T` with an extra zero column `*` and then an all-ones row `*`.
pub fn path_b_starred(t: &RootedTree) -> IntegerMatrix {
    let b = path_b(t);
    let (rows, cols) = (b.rows(), b.cols());
    let mut m = IntegerMatrix::zeros(rows + 1, cols + 1);
    for r in 0..rows {
        for c in 0..cols {
            m.set(r, c, b.get(r, c).clone());
        }
    }
    for c in 0..=cols {
        m.set(rows, c, BigInt::from(1));
    }
    let mut rl = edge_labels(t);
    rl.push("*".into());
    let mut cl = pair_labels(t.n());
    cl.push("*".into());
    m.with_labels(Some(rl), Some(cl)).expect("labels are distinct")
}

/// Coefficients `c` (indexed like the rows of `A_T`) with
/// `b^{e(v)} = sum_k c_k a^k`, namely `+1` on leaves below `v` and `-2` on
/// internal vertices below `v`, `v` included. The identity is checked
/// against the two matrices before returning.
pub fn row_transform_b_of_a(t: &RootedTree, v: Vertex) -> Result<Vec<i64>, ModelError> {
    if v == 0 || v >= t.num_vertices() {
        return Err(ModelError::BadVertex(v));
    }
    let mut coeffs = vec![0i64; t.num_vertices() - 1];
    for k in t.descendant_leaves(v) {
        coeffs[k - 1] = 1;
    }
    for k in t.descendant_internal(v) {
        coeffs[k - 1] = -2;
    }
    let a = design_a(t);
    let b = path_b(t);
    for c in 0..a.cols() {
        let lhs: BigInt = (0..a.rows()).map(|r| a.get(r, c) * BigInt::from(coeffs[r])).sum();
        if &lhs != b.get(v - 1, c) {
            return Err(ModelError::IdentityFailed(v));
        }
    }
    Ok(coeffs)
}

/// `p_ij = -k_ij` for `1 <= i < j <= n` and `p_0i = sum_j k_ij`, in column
/// order.
pub fn p_coords<F: Field>(field: &F, k: &ExactMatrix<F::Elem>) -> Result<Vec<F::Elem>, ModelError> {
    let n = k.rows();
    if k.cols() != n {
        return Err(ModelError::DimensionMismatch { expected: n, found: k.cols() });
    }
    for i in 0..n {
        for j in 0..i {
            if k.get(i, j) != k.get(j, i) {
                return Err(ModelError::NotSymmetric);
            }
        }
    }
    Ok(pairs(n)
        .into_iter()
        .map(|(i, j)| {
            if i == 0 {
                k.row(j - 1).iter().fold(field.zero(), |acc, x| field.add(&acc, x))
            } else {
                field.neg(k.get(i - 1, j - 1))
            }
        })
        .collect())
}

/// Inverse of [`p_coords`]: `k_ij = -p_ij`, `k_ii = p_0i + sum_{j != i} p_ij`.
pub fn k_from_p<F: Field>(field: &F, n: usize, p: &[F::Elem]) -> Result<ExactMatrix<F::Elem>, ModelError> {
    if p.len() != num_pairs(n) {
        return Err(ModelError::DimensionMismatch { expected: num_pairs(n), found: p.len() });
    }
    let mut k = ExactMatrix::zeros(field, n, n);
    for i in 1..=n {
        let mut diag = p[pair_index(n, 0, i)].clone();
        for j in 1..=n {
            if j != i {
                let pij = &p[pair_index(n, i, j)];
                diag = field.add(&diag, pij);
                k.set(i - 1, j - 1, field.neg(pij));
            }
        }
        k.set(i - 1, i - 1, diag);
    }
    Ok(k)
}

/// Floating-point version of [`p_coords`] for a dense symmetric matrix.
pub fn p_coords_f64(k: &[Vec<f64>]) -> Vec<f64> {
    pairs(k.len()).into_iter().map(|(i, j)| if i == 0 { k[j - 1].iter().sum() } else { -k[i - 1][j - 1] }).collect()
}

/// Affine system `coeffs * p = rhs`, one equation per non-root vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem<E> {
    pub coeffs: ExactMatrix<E>,
    pub rhs: Vec<E>,
}

/// For each internal `v`: `sum_{lca(i,j)=v} (p_ij - u_ij) = 0`; for each
/// leaf `i >= 1`: `sum_{j != i} (p_ij - u_ij) = 0`. Built from the tree
/// directly, not from [`design_a`].
pub fn perp_linear_system<F: Field>(
    field: &F,
    t: &RootedTree,
    u: &[F::Elem],
) -> Result<LinearSystem<F::Elem>, ModelError> {
    let n = t.n();
    if u.len() != num_pairs(n) {
        return Err(ModelError::DimensionMismatch { expected: num_pairs(n), found: u.len() });
    }
    let rows = t.num_vertices() - 1;
    let mut coeffs = ExactMatrix::zeros(field, rows, num_pairs(n));
    let mut rhs = vec![field.zero(); rows];
    let mut touch = |v: Vertex, c: usize, coeffs: &mut ExactMatrix<F::Elem>| {
        coeffs.set(v - 1, c, field.one());
        rhs[v - 1] = field.add(&rhs[v - 1], &u[c]);
    };
    for v in t.internal_vertices() {
        for (c, (i, j)) in pairs(n).into_iter().enumerate() {
            if t.lca(i, j).expect("valid leaves") == v {
                touch(v, c, &mut coeffs);
            }
        }
    }
    for i in 1..=n {
        for j in (0..=n).filter(|&j| j != i) {
            touch(i, pair_index(n, i, j), &mut coeffs);
        }
    }
    Ok(LinearSystem { coeffs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rationals;
    use crate::matrix::{rank_rref, rowspan_equal};
    use crate::tree::{enumerate_topologies, parse_newick, star_tree};
    use num_traits::ToPrimitive;

    fn nested() -> RootedTree {
        parse_newick("(1,2,(3,4,5));").unwrap()
    }

    fn col(n: usize, label: &str) -> usize {
        pair_labels(n).iter().position(|l| l == label).unwrap()
    }

    fn dense(m: &IntegerMatrix) -> Vec<Vec<i64>> {
        (0..m.rows()).map(|r| m.row(r).iter().map(|x| x.to_i64().unwrap()).collect()).collect()
    }

    #[test]
    fn pair_indexing() {
        for n in 1..8 {
            for (c, (i, j)) in pairs(n).into_iter().enumerate() {
                assert_eq!(pair_index(n, i, j), c);
                assert_eq!(pair_index(n, j, i), c);
            }
        }
        assert_eq!(pair_labels(2), ["01", "02", "12"]);
    }

    #[test]
    fn nested_design_entries() {
        let t = nested();
        let a = design_a(&t);
        assert_eq!(a.rows(), 7);
        assert_eq!(a.get(5, col(5, "34")), &BigInt::from(1));
        assert_eq!(a.get(0, col(5, "13")), &BigInt::from(1));
        assert_eq!(a.get(6, col(5, "23")), &BigInt::from(1));
        let b = path_b(&t);
        assert_eq!(b.get(5, col(5, "03")), &BigInt::from(1));
        assert_eq!(b.get(6, col(5, "34")), &BigInt::from(0));
    }

    #[test]
    fn nested_path_matrix_fixture() {
        let fixture = [
            [1, 0, 0, 0, 0, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0],
            [0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 0, 0, 0],
            [0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 1, 0],
            [0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 1, 0, 1],
            [0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 1, 1],
            [0, 0, 1, 1, 1, 0, 1, 1, 1, 1, 1, 1, 0, 0, 0],
            [1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        ];
        let b = dense(&path_b(&nested()));
        for (r, row) in fixture.iter().enumerate() {
            assert_eq!(b[r], row.to_vec());
        }
    }

    // An older fixture left row 7 empty at 23, 24, 25 even though
    // lca(2,3) = lca(2,4) = lca(2,5) = 7. The definition wins.
    #[test]
    fn nested_design_row7_differs_from_old_fixture_at_23_24_25() {
        let fixture_row7 = [0, 0, 0, 0, 0, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0];
        let a = dense(&design_a(&nested()));
        let diff: Vec<String> =
            (0..15).filter(|&c| a[6][c] != fixture_row7[c]).map(|c| pair_labels(5)[c].clone()).collect();
        assert_eq!(diff, ["23", "24", "25"]);
        let fixture_rows_1_to_6 = [
            [1, 0, 0, 0, 0, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0],
            [0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 0, 0, 0],
            [0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 1, 0],
            [0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 1, 0, 1],
            [0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 1, 1],
            [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1],
        ];
        for (r, row) in fixture_rows_1_to_6.iter().enumerate() {
            assert_eq!(a[r], row.to_vec());
        }
    }

    #[test]
    fn row_transforms() {
        let t = nested();
        assert_eq!(row_transform_b_of_a(&t, 6).unwrap(), [0, 0, 1, 1, 1, -2, 0]);
        assert_eq!(row_transform_b_of_a(&t, 7).unwrap(), [1, 1, 1, 1, 1, -2, -2]);
        assert_eq!(row_transform_b_of_a(&t, 2).unwrap(), [0, 1, 0, 0, 0, 0, 0]);
        assert_eq!(row_transform_b_of_a(&t, 0), Err(ModelError::BadVertex(0)));
    }

    #[test]
    fn rowspans_and_ranks_over_small_trees() {
        let q = Rationals;
        for n in 2..=5 {
            for t in enumerate_topologies(n) {
                let a = ExactMatrix::from_integer(&q, &design_a(&t));
                let b = ExactMatrix::from_integer(&q, &path_b(&t));
                assert!(rowspan_equal(&q, &a, &b).unwrap());
                assert_eq!(rank_rref(&q, &a).rank, t.num_vertices() - 1);
                for v in t.non_root_vertices() {
                    row_transform_b_of_a(&t, v).unwrap();
                }
            }
        }
    }

    #[test]
    fn starred_path_matrix() {
        let b = path_b_starred(&star_tree(2).unwrap());
        assert_eq!(dense(&b), [[1, 0, 1, 0], [0, 1, 1, 0], [1, 1, 0, 0], [1, 1, 1, 1]]);
    }

    #[test]
    fn p_coordinate_examples() {
        let q = Rationals;
        let k = ExactMatrix::from_rows(vec![vec![q.from_i64(2), q.from_i64(-1)], vec![q.from_i64(-1), q.from_i64(3)]])
            .unwrap();
        let p = p_coords(&q, &k).unwrap();
        assert_eq!(p, [q.from_i64(1), q.from_i64(2), q.from_i64(1)]);
        assert_eq!(k_from_p(&q, 2, &p).unwrap(), k);
        let id = ExactMatrix::identity(&q, 2);
        assert_eq!(p_coords(&q, &id).unwrap(), [q.from_i64(1), q.from_i64(1), q.from_i64(0)]);
    }

    #[test]
    fn perp_system_matches_design() {
        let q = Rationals;
        for t in [nested(), star_tree(2).unwrap(), star_tree(4).unwrap()] {
            let n = t.n();
            let u: Vec<_> = (0..num_pairs(n)).map(|c| q.from_i64(c as i64 + 1)).collect();
            let sys = perp_linear_system(&q, &t, &u).unwrap();
            let a = ExactMatrix::from_integer(&q, &design_a(&t));
            assert_eq!(sys.coeffs.rows(), a.rows());
            for r in 0..a.rows() {
                assert_eq!(sys.coeffs.row(r), a.row(r));
            }
            assert_eq!(sys.rhs, a.apply(&q, &u).unwrap());
        }
        let s2 = star_tree(2).unwrap();
        let zero = vec![q.zero(); 3];
        let sys = perp_linear_system(&q, &s2, &zero).unwrap();
        assert!(sys.rhs.iter().all(|x| *x == q.zero()));
    }

    #[test]
    fn pattern_classes() {
        let pat = CovariancePattern::new(&nested());
        assert_eq!(pat.class_of(3, 3), 3);
        assert_eq!(pat.class_of(3, 4), 6);
        assert_eq!(pat.members(7).len(), 7);
        let s = pat.sigma(&[1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(s[0], [1, 7, 7, 7, 7]);
        assert_eq!(s[3], [7, 7, 6, 4, 6]);
    }
}
