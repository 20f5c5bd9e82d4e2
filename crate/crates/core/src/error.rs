use alloc::string::String;

use thiserror::Error;

/// Errors raised while building or querying rooted trees.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("newick syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("leaf label {0} appears more than once")]
    DuplicateLabel(usize),
    #[error("leaf label {0} is missing (labels must be exactly 1..=n)")]
    MissingLabel(usize),
    #[error("leaf label 0 is reserved for the implicit root leaf")]
    ReservedRootLabel,
    #[error("vertex with a single child would have degree two")]
    DegreeTwo,
    #[error("unknown leaf label {0}")]
    UnknownLabel(usize),
    #[error("path between a leaf and itself is empty")]
    SameLeaf,
    #[error("the root leaf 0 cannot be used here")]
    RootLeaf,
    #[error("a star tree needs at least two non-root leaves, got {0}")]
    TooFewLeaves(usize),
    #[error("quartet labels must be distinct")]
    NotDistinct,
}

/// Errors from exact linear algebra.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("linear system is inconsistent")]
    Inconsistent,
    #[error("row/column labels must be distinct")]
    DuplicateLabel,
    #[error("value is not representable in the target field")]
    NotRepresentable,
}

/// Errors from polynomial arithmetic and the Groebner engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroebnerError {
    #[error("too many variables: {0} (at most {max})", max = crate::poly::MAX_VARS)]
    TooManyVariables(usize),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("polynomial parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("empty generator list")]
    NoGenerators,
    #[error("resource cap exceeded after {0} pair reductions")]
    ResourceCap(usize),
    #[error("ideal is not zero-dimensional")]
    NotZeroDimensional,
    #[error("coefficient is not representable in the target field")]
    NotRepresentable,
    #[error("exponent overflow")]
    ExponentOverflow,
}

/// Errors from toric-ideal constructions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ToricError {
    #[error("binomial has identical monomials")]
    ZeroBinomial,
    #[error("dimension mismatch: design has {expected} columns, monomial has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
    #[error("parametrization exponent for row {0} is odd and cannot be halved")]
    OddExponent(usize),
}

/// Errors from the degree certification engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RmldError {
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
    #[error(transparent)]
    Toric(#[from] ToricError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("tree has {leaves} leaves, above the cap of {cap}")]
    TooManyLeaves { leaves: usize, cap: usize },
    #[error("slice stayed positive-dimensional after {0} samples")]
    Degenerate(usize),
    #[error("generator {0} is not in the toric ideal of the design matrix")]
    NotInToricIdeal(usize),
    #[error("subspace must consist of symmetric {n}x{n} matrices with n <= {cap}")]
    BadSubspace { n: usize, cap: usize },
    #[error("subspace contains no invertible matrix")]
    NoInvertibleElement,
    #[error("degrees disagree across samples: {0} vs {1}")]
    Disagreement(u64, u64),
    #[error("n must lie in {min}..={max}, got {n}")]
    OutOfRange { n: usize, min: usize, max: usize },
}

/// Errors from the floating-point reciprocal MLE solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MleError {
    #[error("matrix must be square with {expected} entries, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("sample covariance is not symmetric")]
    NotSymmetric,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("parameter vector has length {found}, expected {expected}")]
    ParamLength { expected: usize, found: usize },
    #[error("sample covariance has dimension {found}, tree needs {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error("stationarity residuals disagree: trace form {trace}, design form {design}")]
    ResidualMismatch { trace: f64, design: f64 },
}

/// Errors from model matrix constructions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("vertex {0} is not a non-root vertex of the tree")]
    BadVertex(usize),
    #[error("row identity for edge e({0}) does not hold")]
    IdentityFailed(usize),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}
