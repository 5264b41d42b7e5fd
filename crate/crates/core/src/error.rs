use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("invalid rational `{0}` (expected \"p/q\")")]
    Rational(String),
    #[error("invalid branch id `{0}` (expected \"prefix|period\" over {{0,1}})")]
    Branch(String),
    #[error("invalid space `{0}`")]
    Space(String),
    #[error("invalid index set `{0}`")]
    IndexSet(String),
    #[error("invalid index `{0}`")]
    Index(String),
    #[error("invalid sequence: {0}")]
    Sequence(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("branches coincide: {0}")]
    SameBranch(String),
    #[error("duplicate branch {0} in family")]
    DuplicateBranch(String),
    #[error("invalid tail term: {0}")]
    InvalidTail(String),
    #[error("index set is finite: {0}")]
    FiniteSet(String),
    #[error("convergence outside the decidable catalog: {0}")]
    UnknownConvergence(String),
    #[error("membership undecidable: {0}")]
    Undecidable(String),
    #[error("sequence not in {space}: {reason}")]
    NotInSpace { space: String, reason: String },
    #[error("distance bound too coarse for a finite pointwise bound at index {0}")]
    TooCoarse(String),
    #[error("({y}, {x}) is not a strict chain pair")]
    NotAChainPair { y: String, x: String },
    #[error("space {0} is not a member of the chain for these parameters")]
    NotInChain(String),
    #[error("leading coefficient is zero")]
    LeadingCoefficientZero,
    #[error("element is zero")]
    ZeroElement,
    #[error("coefficient c_{0} is zero")]
    ZeroCoefficient(u64),
    #[error("designated element is zero")]
    ZeroDesignated,
    #[error("value too large to enclose: {0}")]
    Overflow(String),
    #[error("comparison undecided at the precision floor: {0}")]
    Undecided(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("search limit exceeded: {0}")]
    SearchLimit(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("malformed json: {0}")]
    Json(String),
    #[error("unsupported certificate schema `{0}`")]
    Schema(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
