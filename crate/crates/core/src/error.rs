use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("transition matrix has shape {rows}x{cols}, expected {expected}x{expected}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("alphabet size must be between 2 and 256, got {0}")]
    AlphabetSize(usize),

    #[error("transition matrix entry ({row}, {col}) must be 0 or 1")]
    NonBinaryEntry { row: usize, col: usize },

    #[error("symbol {0} has no outgoing transition (zero row)")]
    DeadRow(usize),

    #[error("symbol {0} has no incoming transition (zero column)")]
    DeadColumn(usize),

    #[error("word {word} is not admissible at position {position}")]
    Inadmissible { word: String, position: usize },

    #[error("word of length {len} is too short, need at least {required} symbols")]
    WordTooShort { len: usize, required: usize },

    #[error("cylinder set members {0} and {1} overlap (one is a prefix of the other)")]
    NotAntichain(String, String),

    #[error("cylinder set is empty")]
    EmptySet,

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("models live on different shift spaces")]
    SpaceMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument must be nonnegative, got {0}")]
    NegativeArgument(f64),

    #[error("enumeration too large: {nodes} nodes exceeds the limit of {limit}")]
    TooLarge { nodes: u128, limit: u128 },

    #[error("critical exponent bracket could not be established after {doublings} doublings: {tail}")]
    Bracket { doublings: u32, tail: String },

    #[error(
        "q = {q} > 0 requires the entropy doubling condition, which this measure violates \
         (a zero-mass admissible cylinder makes the ratio unbounded)"
    )]
    DoublingViolated { q: f64 },

    #[error("shift space is not irreducible (no positive power of the transition matrix)")]
    Reducible,

    #[error("Perron iteration did not converge within {iterations} iterations (gap {gap:e})")]
    PerronStagnation { iterations: usize, gap: f64 },

    #[error("operation not supported for {0} models")]
    UnsupportedModel(&'static str),

    #[error("q grid needs {0}")]
    Grid(String),

    #[error("q = {0} is not an interior grid point")]
    NotInterior(f64),

    #[error(
        "h has a kink at q = {q}: one-sided derivatives {minus} and {plus} differ; \
         only the one-sided identities apply there"
    )]
    Kink { q: f64, minus: f64, plus: f64 },

    #[error("beta = {beta} lies outside [{lower}, {upper}]; the level set is empty there")]
    OutsideDomain { beta: f64, lower: f64, upper: f64 },

    #[error("no symbol frequency vector with denominator {n} reaches beta = {beta} within {tol}")]
    NoTypeWithinTolerance { beta: f64, tol: f64, n: usize },
}

impl Error {
    /// Numeric failures (non-convergence, no bracket, kinks) as opposed to
    /// invalid input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Bracket { .. }
                | Error::PerronStagnation { .. }
                | Error::Kink { .. }
                | Error::NoTypeWithinTolerance { .. }
        )
    }
}
