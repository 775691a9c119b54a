use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid modulus {0}")]
    InvalidModulus(i64),
    #[error("symbol undefined: {0}")]
    SymbolUndefined(String),
    #[error("{a} has no square root modulo {p}")]
    NoSquareRoot { a: i64, p: u64 },
    #[error("division by zero in Z[i]")]
    DivisionByZero,
    #[error("{0} does not split in Z[i]")]
    NotSplit(u64),
    #[error("symbol argument divisible by the prime")]
    ZeroSymbol,
    #[error("invalid Gaussian prime: {0}")]
    InvalidPrime(String),
    #[error("invalid radicand {0}")]
    InvalidRadicand(i64),
    #[error("invalid discriminant {0}")]
    InvalidDiscriminant(i64),
    #[error("unit square-class condition violated: {0}")]
    SquareClassViolation(String),
    #[error("invalid triple: {}", Conditions(.0))]
    InvalidTriple(Vec<String>),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("construction invariant failed: {0}")]
    ConstructionInvariant(String),
    #[error("coset enumeration exceeded {0} cosets")]
    EnumerationOverflow(usize),
    #[error("presentation interpretation failed: {0}")]
    PresentationInterpretation(String),
    #[error("group of order {order} exceeds the element cap {cap}")]
    SizeCap { order: u64, cap: u64 },
    #[error("group is not abelian")]
    NotAbelian,
    #[error("rank error: {0}")]
    Rank(String),
    #[error("prediction consistency failure: {0}")]
    PredictionConsistency(String),
    #[error("fixture format error: {0}")]
    FixtureFormat(String),
}

struct Conditions<'a>(&'a [String]);

impl fmt::Display for Conditions<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(", "))
    }
}
