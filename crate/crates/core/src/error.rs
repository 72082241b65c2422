use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid precision context: {0}")]
    InvalidContext(String),
    #[error("elements belong to different precision contexts")]
    ContextMismatch,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("residue is not a unit")]
    NotAUnit,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("T-adic depth exhausted: need index {needed}, window holds {available}")]
    TDepthExhausted { needed: usize, available: usize },
    #[error("divisor is not a distinguished polynomial")]
    NotDistinguished,
    #[error("Weierstrass iteration did not converge within {0} steps")]
    NoConvergence(usize),
    #[error("element is not an exact polynomial")]
    NotExact,

    #[error("presentation is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("determinant vanishes (identically zero: {identically_zero})")]
    ZeroDeterminant { identically_zero: bool },
    #[error("quotient at layer {layer} is infinite")]
    InfiniteQuotient { layer: u32 },
    #[error("no stabilization: {0}")]
    Unstable(String),
    #[error("expanded matrix needs {rows} rows, budget is {budget}")]
    BudgetExceeded { rows: usize, budget: usize },
    #[error("invalid layer range: {0}")]
    InvalidRange(String),

    #[error("invalid group table: {0}")]
    InvalidTable(String),
    #[error("group order {order} is not a power of {p}")]
    NotPPower { order: usize, p: u64 },
    #[error("table has no identity element")]
    NoIdentity,
    #[error("element {0} has no inverse")]
    NoInverse(usize),
    #[error("table is not associative at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),

    #[error("boundary shapes do not match ranks at degree {0}")]
    BoundaryMismatch(i64),
    #[error("d∘d is nonzero at degree {0}")]
    NotAComplex(i64),
    #[error("map does not commute with boundaries at degree {0}")]
    NotChainMap(i64),
    #[error("complex is not torsion")]
    NotTorsion,
    #[error("complex does not have mu = 0")]
    NotMuZero,
    #[error("top cohomology does not have mu = 0")]
    MuNotZeroAtTop,
    #[error("element does not annihilate the top cohomology")]
    NotAnnihilating,
    #[error("complex too short for a reduction step")]
    LengthTooShort,

    #[error("missing local data: {0}")]
    MissingLocalData(String),
    #[error("integer overflow in formula evaluation")]
    Overflow,
    #[error("exact determinant too large: {0}")]
    WorkLimit(String),
    #[error("cross-check failed: {0}")]
    CrossCheckFailed(String),

    #[error("schema error: {0}")]
    Schema(String),
}
