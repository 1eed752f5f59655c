use thiserror::Error;

/// Every failure the pipeline can report. Payloads are rendered strings so the
/// error stays `Send + Sync` and serializes cleanly into reports.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown variable `{name}` (expected one of {expected})")]
    UnknownVariable { name: String, expected: String },

    #[error("variable lists differ: [{left}] vs [{right}]")]
    VariableMismatch { left: String, right: String },

    #[error("cannot homogenize a polynomial of degree {degree} to degree {requested}")]
    DegreeTooSmall { degree: u32, requested: u32 },

    #[error("exact division failed: {0}")]
    ExactnessViolation(String),

    #[error("maps are not mutually inverse; residual {residual}")]
    NotInverse { residual: String },

    #[error("map is constant")]
    ConstantMap,

    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),

    #[error("term budget exceeded: {terms} terms > cap {cap}")]
    BudgetExceeded { terms: usize, cap: usize },

    #[error("indeterminacy point has irrational coordinates; defining polynomial {polynomial}")]
    NonRationalIndeterminacy { polynomial: String },

    #[error("expected at most one indeterminacy point, found {count}")]
    UniquenessViolated { count: usize },

    #[error("degree >= 2 required (map has degree {degree})")]
    DegreeTooLow { degree: u32 },

    #[error("point already blown up: {0}")]
    DuplicateCenter(String),

    #[error("blow-up step budget of {cap} exhausted")]
    StepBudgetExceeded { cap: usize },

    #[error("genericity failure: {0}")]
    GenericityFailure(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("D(0) is not expressible over the known effective classes")]
    InfeasibleAtZero,

    #[error("coefficient of the strict transform of H in the pulled-back line is {0}, expected 1")]
    HyperplaneCoefficient(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
