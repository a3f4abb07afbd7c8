use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("letter `{0}` is not in the alphabet")]
    UnknownLetter(String),
    #[error("letter index {0} out of range for alphabet of size {1}")]
    LetterOutOfRange(usize, usize),
    #[error("alphabets do not match: {0}")]
    AlphabetMismatch(String),
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),
    #[error("coordinate {0} out of range for arity {1}")]
    BadCoordinate(usize, usize),
    #[error("ill-padded symbol sequence: {0}")]
    IllPadded(String),
    #[error("concatenation of two infinite synchronous languages is not supported")]
    SyncConcatUnbounded,
    #[error("enumeration guard exceeded ({0} items)")]
    EnumerationGuard(usize),
    #[error("invalid group specification: {0}")]
    InvalidGroup(String),
    #[error("ball entry limit exceeded ({0} entries)")]
    BallLimit(usize),
    #[error("element outside ball of radius {0}")]
    OutsideBall(u32),
    #[error("fellow-traveler difference escapes ball of radius {0}")]
    BallEscape(u32),
    #[error("word is geodesic; no witness exists")]
    GeodesicInput,
    #[error("word is already the normal form of its element")]
    AlreadyNormal(String),
    #[error("ball too small: need radius at least {needed}, have {have}")]
    BallTooSmall { needed: u32, have: u32 },
    #[error("no witness with fellow-traveler constant {0}")]
    NoWitness(u32),
    #[error("rewrite step limit {0} exhausted")]
    StepLimit(usize),
    #[error("no right-hand side enumerable within window {0}")]
    RhsWindow(usize),
    #[error("rule does not satisfy the middle-word bound: |{word}| > {bound}")]
    MiddleBound { word: String, bound: usize },
    #[error("suffix pair violates |v2| <= |u2l| + k: |{v2}| > {bound}")]
    SuffixBound { v2: String, bound: usize },
    #[error("input system is not weight non-increasing: ({0}, {1})")]
    WeightIncreasing(String, String),
    #[error("no applicable rule for `{0}`; input system not convergent on this word")]
    NoRule(String),
    #[error("almost-convexity chain repeated letter `{0}`")]
    ChainRepeat(String),
    #[error("almost-convexity preconditions violated: {0}")]
    AlmostConvexPre(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
