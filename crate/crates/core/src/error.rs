use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero polynomial has no content")]
    ZeroPolynomial,
    #[error("gcd of two zero polynomials is undefined")]
    GcdOfZeros,
    #[error("polynomial is not primitive")]
    NotPrimitive,
    #[error("polynomial is not squarefree")]
    NotSquarefree,
    #[error("polynomial must have degree at least 1")]
    ConstantPolynomial,
    #[error("polynomial is not irreducible: {0}")]
    NotIrreducible(String),
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("singular matrix")]
    SingularMatrix,
    #[error("group not finite (closure exceeded bound {0})")]
    GroupNotFinite(usize),
    #[error("orbit hits infinity (degree drops by {dropped})")]
    OrbitHitsInfinity { dropped: usize },
    #[error("mixed quadratic fields Q(sqrt({0})) and Q(sqrt({1}))")]
    MixedFields(i64, i64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("unsupported radicand {0}; expected 0, -1 or -3")]
    UnsupportedField(i64),
    #[error("O infinite: zeros are all roots of unity")]
    OrbitSetInfinite,
    #[error("no witness exists (O infinite)")]
    NoWitness,
    #[error("bound too small: no root of unity of order <= {0} has positive orbit height")]
    BoundTooSmall(u32),
    #[error("orbit is not a member of O")]
    OrbitNotInO,
    #[error("indeterminate at pole {0}")]
    IndeterminateAtPole(String),
    #[error("root isolation failed: {0}")]
    RootIsolation(String),
    #[error("empty search space")]
    EmptySearch,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("table row excluded: {0}")]
    RowExcluded(String),
    #[error("invalid table row: {0}")]
    InvalidRow(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
