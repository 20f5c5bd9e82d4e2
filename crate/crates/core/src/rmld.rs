//! Reciprocal ML-degrees: the closed-form product over internal vertices and
//! its certification by counting standard monomials of the likelihood slice.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GroebnerError, RmldError};
use crate::field::{Field, PrimeField, Rationals, PRIME_A, PRIME_B};
use crate::groebner::{buchberger, quotient_degree, GroebnerOptions};
use crate::matrix::{rank_rref, ExactMatrix, IntegerMatrix};
use crate::model::{design_a, num_pairs};
use crate::poly::{Monomial, MonomialOrder, PolyRing, Polynomial, VarTable};
use crate::toric::{hypersimplex_binomials, lattice_member, p_ring, tree_binomials, Binomial};
use crate::tree::{star_tree, RootedTree};

/// `prod_{v in Int(T)} (2^outdeg(v) - outdeg(v) - 1)`.
pub fn rmld_formula(t: &RootedTree) -> BigUint {
    t.internal_vertices()
        .map(|v| {
            let d = t.outdeg(v);
            (BigUint::one() << d) - BigUint::from(d) - BigUint::one()
        })
        .product()
}

/// Coefficient field of one certification run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldChoice {
    Prime(u64),
    Rational,
}

impl FieldChoice {
    pub fn prime(&self) -> Option<u64> {
        match self {
            FieldChoice::Prime(p) => Some(*p),
            FieldChoice::Rational => None,
        }
    }
}

/// Upper bound for random rational data entries.
pub const RATIONAL_SAMPLE_MAX: i64 = 1 << 15;

/// Seeded data point `u`, one entry per pair column.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericData<E> {
    pub u: Vec<E>,
    pub seed: u64,
    pub prime: Option<u64>,
}

fn sample<F: Field, R: Rng>(field: &F, rng: &mut R) -> F::Elem {
    match field.modulus() {
        Some(p) => field.from_i64(rng.gen_range(1..p as i64)),
        None => field.from_i64(rng.gen_range(1..=RATIONAL_SAMPLE_MAX)),
    }
}

impl<E> GenericData<E> {
    /// Nonzero entries uniform in `[1, p-1]`, or in `[1, 2^15]` over the
    /// rationals.
    pub fn draw<F: Field<Elem = E>>(field: &F, len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = (0..len).map(|_| sample(field, &mut rng)).collect();
        GenericData { u, seed, prime: field.modulus() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifyOptions {
    pub leaf_cap: usize,
    pub fields: Vec<FieldChoice>,
    /// Number of seeds, `seed, seed+1, ...`.
    pub seed_count: u64,
    pub max_resample: usize,
    pub groebner: GroebnerOptions,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            leaf_cap: 7,
            fields: vec![FieldChoice::Prime(PRIME_A), FieldChoice::Prime(PRIME_B)],
            seed_count: 2,
            max_resample: 3,
            groebner: GroebnerOptions::default(),
        }
    }
}

/// One degree computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceRun {
    pub field: FieldChoice,
    pub seed: u64,
    pub degree: u64,
    /// Samples discarded because the slice was not zero-dimensional.
    pub resamples: usize,
    pub pairs_reduced: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificationReport {
    pub newick: String,
    pub formula_value: BigUint,
    /// Degree of the first run.
    pub certified_degree: u64,
    pub runs: Vec<SliceRun>,
    /// All runs returned the same degree.
    pub agree: bool,
    /// All runs returned `formula_value`.
    pub matches: bool,
}

impl CertificationReport {
    pub fn from_runs(t: &RootedTree, runs: Vec<SliceRun>) -> Self {
        let formula_value = rmld_formula(t);
        let certified_degree = runs.first().map_or(0, |r| r.degree);
        let agree = runs.iter().all(|r| r.degree == certified_degree);
        let matches = !runs.is_empty() && runs.iter().all(|r| BigUint::from(r.degree) == formula_value);
        CertificationReport { newick: t.to_newick(), formula_value, certified_degree, runs, agree, matches }
    }
}

/// Degree of a zero-dimensional ideal, or `None` when it is positive
/// dimensional.
fn degree_of<F: Field>(
    ring: &PolyRing<F>,
    gens: &[Polynomial<F::Elem>],
    opts: &GroebnerOptions,
) -> Result<(Option<u64>, usize), GroebnerError> {
    let gb = buchberger(ring, gens, opts)?;
    Ok((quotient_degree(&gb).ok(), gb.pairs_reduced()))
}

/// `design * p - design * u` as affine forms in the variables of `ring`.
fn affine_forms<F: Field>(ring: &PolyRing<F>, design: &IntegerMatrix, u: &[F::Elem]) -> Vec<Polynomial<F::Elem>> {
    let f = ring.field();
    (0..design.rows())
        .map(|r| {
            let coeffs: Vec<F::Elem> = design.row(r).iter().map(|x| f.from_bigint(x)).collect();
            let au = coeffs.iter().zip(u).fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b)));
            ring.linear(&coeffs, f.neg(&au))
        })
        .collect()
}

/// Degree of `V(gens) ∩ {design * p = design * u}` for seeded `u`, drawing a
/// fresh `u` from the same stream while the slice is positive dimensional.
fn slice_degree<F: Field>(
    ring: &PolyRing<F>,
    gens: &[Polynomial<F::Elem>],
    design: &IntegerMatrix,
    seed: u64,
    max_resample: usize,
    opts: &GroebnerOptions,
) -> Result<(u64, usize, usize), RmldError> {
    let f = ring.field();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..=max_resample {
        let u: Vec<F::Elem> = (0..design.cols()).map(|_| sample(f, &mut rng)).collect();
        let mut all = gens.to_vec();
        all.extend(affine_forms(ring, design, &u));
        if let (Some(d), pairs) = degree_of(ring, &all, opts)? {
            return Ok((d, attempt, pairs));
        }
    }
    Err(RmldError::Degenerate(max_resample + 1))
}

fn tree_run<F: Field>(field: F, t: &RootedTree, seed: u64, opts: &CertifyOptions) -> Result<SliceRun, RmldError> {
    let ring = p_ring(field, t.n())?;
    let gens: Vec<_> = tree_binomials(t).iter().map(|b| b.to_polynomial(&ring)).collect();
    let (degree, resamples, pairs_reduced) =
        slice_degree(&ring, &gens, &design_a(t), seed, opts.max_resample, &opts.groebner)?;
    let field = match ring.field().modulus() {
        Some(p) => FieldChoice::Prime(p),
        None => FieldChoice::Rational,
    };
    Ok(SliceRun { field, seed, degree, resamples, pairs_reduced })
}

/// A single certification run of the tree's likelihood slice.
pub fn certify_run(
    t: &RootedTree,
    field: FieldChoice,
    seed: u64,
    opts: &CertifyOptions,
) -> Result<SliceRun, RmldError> {
    if t.num_leaves() > opts.leaf_cap {
        return Err(RmldError::TooManyLeaves { leaves: t.num_leaves(), cap: opts.leaf_cap });
    }
    match field {
        FieldChoice::Prime(p) => tree_run(PrimeField::new(p), t, seed, opts),
        FieldChoice::Rational => tree_run(Rationals, t, seed, opts),
    }
}

/// Certify the formula on `t` over every configured field and seed.
pub fn rmld_certify(t: &RootedTree, seed: u64, opts: &CertifyOptions) -> Result<CertificationReport, RmldError> {
    let mut runs = Vec::new();
    for &field in &opts.fields {
        for s in 0..opts.seed_count {
            runs.push(certify_run(t, field, seed.wrapping_add(s), opts)?);
        }
    }
    Ok(CertificationReport::from_runs(t, runs))
}

/// Degree of the toric slice `V(gens) ∩ {A p = A u}` for supplied
/// generators of `I(A)`. Two-term generators with coefficients `1, -1` are
/// checked against the lattice of `design`.
pub fn toric_mld_given_gens<F: Field>(
    ring: &PolyRing<F>,
    gens: &[Polynomial<F::Elem>],
    design: &IntegerMatrix,
    seed: u64,
    opts: &CertifyOptions,
) -> Result<u64, RmldError> {
    if design.cols() != ring.nvars() {
        return Err(
            crate::error::AlgebraError::DimensionMismatch { expected: ring.nvars(), found: design.cols() }.into()
        );
    }
    let f = ring.field();
    for (k, g) in gens.iter().enumerate() {
        if let [(m1, c1), (m2, c2)] = g.terms() {
            if f.is_zero(&f.add(c1, c2)) {
                let b = Binomial::new(*m1, *m2)?;
                if !lattice_member(&b, design)? {
                    return Err(RmldError::NotInToricIdeal(k));
                }
            }
        }
    }
    let (d, _, _) = slice_degree(ring, gens, design, seed, opts.max_resample, &opts.groebner)?;
    Ok(d)
}

/// Column labels of the counterexample design: `k11, k12, ..., k44`.
pub fn bad_toric_vars() -> Vec<String> {
    let mut out = Vec::new();
    for i in 1..=4 {
        for j in i..=4 {
            out.push(format!("k{i}{j}"));
        }
    }
    out
}

/// The 3x10 design matrix of the counterexample.
pub fn bad_toric_design() -> IntegerMatrix {
    IntegerMatrix::from_rows_i64(&[
        vec![2, 1, 1, 1, 0, 0, 0, 0, 0, 0],
        vec![0, 0, 0, 0, 1, 0, 0, 1, 0, 1],
        vec![0, 1, 1, 1, 0, 2, 2, 0, 2, 0],
    ])
    .expect("rectangular")
    .with_labels(None, Some(bad_toric_vars()))
    .expect("distinct labels")
}

/// Generators of the closure of inverses of the counterexample subspace.
pub const BAD_TORIC_GENERATORS: [&str; 7] =
    ["k22 - k33", "k33 - k44", "k12 - k13", "k13 - k14", "k23 - k24", "k24 - k34", "k12^2 - k11*k23"];

pub fn bad_toric_ring<F: Field>(field: F) -> PolyRing<F> {
    PolyRing::new(field, VarTable::new(bad_toric_vars()).expect("distinct names"), MonomialOrder::Grevlex)
}

pub fn bad_toric_generators<F: Field>(ring: &PolyRing<F>) -> Vec<Polynomial<F::Elem>> {
    BAD_TORIC_GENERATORS.iter().map(|g| ring.parse(g).expect("fixture parses")).collect()
}

fn int_matrix(rows: &[[i64; 4]; 4]) -> ExactMatrix<BigRational> {
    let q = Rationals;
    ExactMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| q.from_i64(x)).collect()).collect()).expect("square")
}

/// Basis `a, b, c` of the counterexample subspace of 4x4 symmetric matrices.
pub fn bad_toric_subspace() -> Vec<ExactMatrix<BigRational>> {
    vec![
        int_matrix(&[[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]),
        int_matrix(&[[0, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]),
        int_matrix(&[[0, 1, 1, 1], [1, 0, 0, 0], [1, 0, 0, 0], [1, 0, 0, 0]]),
    ]
}

/// Diagonal matrices of size `n`.
pub fn diagonal_subspace(n: usize) -> Vec<ExactMatrix<BigRational>> {
    let q = Rationals;
    (0..n)
        .map(|i| {
            let mut m = ExactMatrix::zeros(&q, n, n);
            m.set(i, i, q.one());
            m
        })
        .collect()
}

/// Largest matrix size accepted by [`linear_rmld`].
pub const LINEAR_RMLD_MAX_N: usize = 4;

/// Reciprocal ML-degree of the linear covariance model spanned by `basis`:
/// the number of solutions of `Sigma in L`, `Sigma K = Id` and
/// `<K - W, B_i> = 0` for a seeded symmetric `W`.
pub fn linear_rmld<F: Field>(
    field: F,
    basis: &[ExactMatrix<BigRational>],
    seed: u64,
    opts: &CertifyOptions,
) -> Result<u64, RmldError> {
    let n = basis.first().map_or(0, ExactMatrix::rows);
    let bad = RmldError::BadSubspace { n, cap: LINEAR_RMLD_MAX_N };
    if n == 0 || n > LINEAR_RMLD_MAX_N {
        return Err(bad);
    }
    for b in basis {
        if b.rows() != n || b.cols() != n || (0..n).any(|i| (0..i).any(|j| b.get(i, j) != b.get(j, i))) {
            return Err(bad);
        }
    }
    let conv = |x: &BigRational| field.from_rational(x).ok_or(GroebnerError::NotRepresentable);
    let bs: Vec<Vec<Vec<F::Elem>>> = basis
        .iter()
        .map(|b| (0..n).map(|i| (0..n).map(|j| conv(b.get(i, j))).collect::<Result<Vec<_>, _>>()).collect())
        .collect::<Result<_, _>>()?;

    let d = basis.len();
    let mut names: Vec<String> = (1..=d).map(|l| format!("s{l}")).collect();
    let mut kvar = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in i..n {
            kvar[i][j] = names.len();
            kvar[j][i] = names.len();
            names.push(format!("k{}{}", i + 1, j + 1));
        }
    }
    let ring = PolyRing::new(field.clone(), VarTable::new(names)?, MonomialOrder::Grevlex);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let has_invertible = (0..3).any(|_| {
        let c: Vec<F::Elem> = (0..d).map(|_| sample(&field, &mut rng)).collect();
        let mut sigma = ExactMatrix::zeros(&field, n, n);
        for i in 0..n {
            for j in 0..n {
                let v = (0..d).fold(field.zero(), |acc, l| field.add(&acc, &field.mul(&c[l], &bs[l][i][j])));
                sigma.set(i, j, v);
            }
        }
        rank_rref(&field, &sigma).rank == n
    });
    if !has_invertible {
        return Err(RmldError::NoInvertibleElement);
    }

    // Sigma K - Id, entrywise
    let mut fixed = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let mut terms = Vec::new();
            for m in 0..n {
                for l in 0..d {
                    if !field.is_zero(&bs[l][i][m]) {
                        terms.push((Monomial::var(l).mul(&Monomial::var(kvar[m][j])), bs[l][i][m].clone()));
                    }
                }
            }
            if i == j {
                terms.push((Monomial::one(), field.neg(&field.one())));
            }
            fixed.push(ring.from_terms(terms));
        }
    }

    for attempt in 0..=opts.max_resample {
        let mut w = vec![vec![field.zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let x = sample(&field, &mut rng);
                w[i][j] = x.clone();
                w[j][i] = x;
            }
        }
        let mut gens = fixed.clone();
        for b in &bs {
            let mut terms = Vec::new();
            let mut constant = field.zero();
            for i in 0..n {
                for j in 0..n {
                    terms.push((Monomial::var(kvar[i][j]), b[i][j].clone()));
                    constant = field.sub(&constant, &field.mul(&w[i][j], &b[i][j]));
                }
            }
            terms.push((Monomial::one(), constant));
            gens.push(ring.from_terms(terms));
        }
        if let (Some(deg), _) = degree_of(&ring, &gens, &opts.groebner)? {
            return Ok(deg);
        }
        let _ = attempt;
    }
    Err(RmldError::Degenerate(opts.max_resample + 1))
}

/// Whether the hypersimplex variety of the star `S_n` meets the kernel of
/// its design matrix only at the origin.
pub fn star_origin_check(n: usize, opts: &GroebnerOptions) -> Result<bool, RmldError> {
    if !(2..=5).contains(&n) {
        return Err(RmldError::OutOfRange { n, min: 2, max: 5 });
    }
    let ring = p_ring(PrimeField::new(PRIME_A), n)?;
    let mut gens: Vec<_> = hypersimplex_binomials(n).iter().map(|b| b.to_polynomial(&ring)).collect();
    let zero = vec![0u64; num_pairs(n)];
    gens.extend(affine_forms(&ring, &design_a(&star_tree(n).expect("n >= 2")), &zero));
    let gb = buchberger(&ring, &gens, opts)?;
    Ok(gb.zero_dimensional())
}

/// Integer entries as a rational matrix, for building subspace bases.
pub fn rational_matrix(rows: &[Vec<i64>]) -> ExactMatrix<BigRational> {
    ExactMatrix::from_rows(
        rows.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect()).collect(),
    )
    .expect("rectangular")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CovariancePattern;
    use crate::tree::parse_newick;

    fn fast() -> CertifyOptions {
        CertifyOptions { fields: vec![FieldChoice::Prime(PRIME_A)], seed_count: 1, ..Default::default() }
    }

    #[test]
    fn formula_values() {
        assert_eq!(rmld_formula(&parse_newick("(1,2,(3,4,5));").unwrap()), BigUint::from(16u32));
        assert_eq!(rmld_formula(&star_tree(4).unwrap()), BigUint::from(11u32));
        assert_eq!(rmld_formula(&parse_newick("((1,2),(3,4));").unwrap()), BigUint::one());
    }

    #[test]
    fn certify_star3() {
        let r = rmld_certify(&star_tree(3).unwrap(), 42, &CertifyOptions::default()).unwrap();
        assert_eq!(r.runs.len(), 4);
        assert_eq!(r.certified_degree, 4);
        assert!(r.matches && r.agree);
    }

    #[test]
    fn certify_caterpillar() {
        let t = parse_newick("(1,(2,3,4));").unwrap();
        let r = rmld_certify(&t, 1, &fast()).unwrap();
        assert_eq!(r.certified_degree, 4);
    }

    #[test]
    fn leaf_cap_enforced() {
        let opts = CertifyOptions { leaf_cap: 4, ..fast() };
        let err = rmld_certify(&star_tree(4).unwrap(), 1, &opts).unwrap_err();
        assert_eq!(err, RmldError::TooManyLeaves { leaves: 5, cap: 4 });
    }

    #[test]
    fn bad_toric_degrees() {
        let f = PrimeField::new(PRIME_A);
        let ring = bad_toric_ring(f);
        let gens = bad_toric_generators(&ring);
        assert_eq!(toric_mld_given_gens(&ring, &gens, &bad_toric_design(), 3, &fast()).unwrap(), 2);
        assert_eq!(linear_rmld(f, &bad_toric_subspace(), 3, &fast()).unwrap(), 1);
    }

    #[test]
    fn generator_outside_lattice_rejected() {
        let ring = bad_toric_ring(PrimeField::new(PRIME_A));
        let gens = vec![ring.parse("k11 - k22").unwrap()];
        let err = toric_mld_given_gens(&ring, &gens, &bad_toric_design(), 3, &fast()).unwrap_err();
        assert_eq!(err, RmldError::NotInToricIdeal(0));
    }

    #[test]
    fn empty_generators_square_design() {
        let ring = PolyRing::new(
            PrimeField::new(PRIME_A),
            VarTable::new(vec!["x".into(), "y".into()]).unwrap(),
            MonomialOrder::Grevlex,
        );
        let a = IntegerMatrix::from_rows_i64(&[vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(toric_mld_given_gens(&ring, &[], &a, 0, &fast()).unwrap(), 1);
    }

    #[test]
    fn linear_rmld_small_subspaces() {
        let f = PrimeField::new(PRIME_A);
        assert_eq!(linear_rmld(f, &diagonal_subspace(2), 5, &fast()).unwrap(), 1);
        for (t, want) in [(star_tree(2).unwrap(), 1), (star_tree(3).unwrap(), 4)] {
            let basis = CovariancePattern::new(&t).basis(&Rationals);
            assert_eq!(linear_rmld(f, &basis, 5, &fast()).unwrap(), want);
        }
    }

    #[test]
    fn linear_rmld_guards() {
        let f = PrimeField::new(PRIME_A);
        assert!(matches!(linear_rmld(f, &diagonal_subspace(5), 0, &fast()), Err(RmldError::BadSubspace { .. })));
        let off = vec![rational_matrix(&[vec![0, 0], vec![0, 1]])];
        assert_eq!(linear_rmld(f, &off, 0, &fast()), Err(RmldError::NoInvertibleElement));
    }

    #[test]
    fn star_origin() {
        let opts = GroebnerOptions::default();
        for n in 2..=4 {
            assert!(star_origin_check(n, &opts).unwrap());
        }
        assert!(star_origin_check(1, &opts).is_err());
    }
}
