use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("chromosome must have length 3*{segment_len} = {expected}, got {actual}")]
    ChromosomeLength {
        segment_len: usize,
        expected: usize,
        actual: usize,
    },

    #[error("segment length must be in 1..=63, got {0}")]
    SegmentLength(usize),

    #[error("segment has length {actual}, expected {expected}")]
    SegmentMismatch { expected: usize, actual: usize },

    #[error("invalid bit character {0:?}; only '0' and '1' are allowed")]
    InvalidBit(char),

    #[error("decoded value {value} out of range for segment length {segment_len}")]
    DecodedOutOfRange { value: u64, segment_len: usize },

    #[error("population size must be even and >= 2, got {0}")]
    PopulationSize(usize),

    #[error("{name} = {value} is outside its valid range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("degenerate Beta shapes ({a}, {b}) must use the limiting distribution")]
    DegenerateShapes { a: f64, b: f64 },

    #[error("inverse incomplete beta did not converge for u = {u}, shapes = ({a}, {b})")]
    NumericalFailure { u: f64, a: f64, b: f64 },

    #[error("analytic fitness requires an all-binary population, found {nonbinary} nonbinary individuals")]
    ModeMismatch { nonbinary: usize },

    #[error("fitness vector has {fitness} entries but population has {population}")]
    FitnessLength { fitness: usize, population: usize },

    #[error("profile {0} is not a pure Nash equilibrium of the stage game")]
    NotNash(String),

    #[error("generation {generation}: {source}")]
    Generation {
        generation: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("replication {replication}: {source}")]
    Replication {
        replication: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("expected columns [{expected}], found [{found}]")]
    Schema { expected: String, found: String },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
