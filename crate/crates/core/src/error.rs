use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    /// Indices in this error are 1-based.
    #[error("index {index} out of range 1..={bound} ({context})")]
    IndexOutOfRange {
        context: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is rank deficient (condition estimate {condition:.3e})")]
    RankDeficient { condition: f64 },

    #[error("sketch needs {requested} entries but the memory cap is {cap}; increase eps or delta, or pass an explicit m")]
    SketchTooLarge { requested: usize, cap: usize },

    #[error("dense materialization needs {requested} entries but the oracle cap is {cap}")]
    OracleCapExceeded { requested: usize, cap: usize },

    #[error("block height {block} does not divide factor {factor} row count {rows}")]
    BlockDivisibility {
        factor: usize,
        block: usize,
        rows: usize,
    },

    #[error("{solver} did not converge within {iterations} iterations")]
    IterationLimit {
        solver: &'static str,
        iterations: usize,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dimension product overflows usize")]
    Overflow,
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
