use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sequence lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("index sequence is not a permutation")]
    NotAPermutation,
    #[error("basis labels must be nonempty")]
    EmptyLabel,
    #[error("duplicate basis label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown basis label {0:?}")]
    UnknownLabel(String),
    #[error("{0}")]
    DimensionMismatch(String),
    #[error("pairing entry ({row}, {col}) violates the parity selection rule")]
    PairingParity { row: String, col: String },
    #[error("pairing entries ({row}, {col}) and ({col}, {row}) violate graded symmetry")]
    PairingSymmetry { row: String, col: String },
    #[error("pairing matrix is singular")]
    SingularPairing,
    #[error("letter index {0} is out of range for the space")]
    LetterOutOfRange(usize),
    #[error("operands belong to different flavors")]
    FlavorMismatch,
    #[error("operands belong to different spaces")]
    SpaceMismatch,
    #[error("pairing parity {pairing} does not match flavor {flavor}")]
    FlavorPairingParity { pairing: String, flavor: String },
    #[error("matrix size {n} exceeds the configured cap {cap}; raise the cap to proceed")]
    MatrixSizeCap { n: usize, cap: usize },
    #[error("expansion produced more than {cap} terms; raise the cap to proceed")]
    TermCap { cap: usize },
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("structure constants are not associative: ({i}{j}){k} != {i}({j}{k})")]
    NotAssociative { i: usize, j: usize, k: usize },
    #[error("pairing is not invariant: l({i}{j},{k}) != l({i},{j}{k})")]
    NotInvariant { i: usize, j: usize, k: usize },
    #[error("element is not in the algebra: {0}")]
    NotInAlgebra(String),
    #[error("pairing is not in the standard form required here: {0}")]
    NotStandardForm(String),
    #[error("flag {0} does not occur in the tensor")]
    UnknownFlag(u32),
    #[error("flags {0} and {1} must be distinct")]
    EqualFlags(u32, u32),
    #[error("series exponent {0} is below the minimum -1")]
    ExponentRange(i64),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
