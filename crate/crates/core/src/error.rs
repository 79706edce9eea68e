//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A probability tensor cell is negative. Carries the offending index tuple.
    #[error("NEGATIVE_MASS at cell {cell:?}: {value}")]
    NegativeMass { cell: Vec<usize>, value: f64 },

    /// A probability tensor does not sum to one.
    #[error("NOT_NORMALIZED: total mass {total}")]
    NotNormalized { total: f64 },

    /// A conditional kernel row does not sum to one or has a negative entry.
    #[error("row {row} of {what} is not a distribution (sum {sum})")]
    RowNotStochastic {
        what: &'static str,
        row: usize,
        sum: f64,
    },

    #[error("ALPHABET_MISMATCH: {context}")]
    AlphabetMismatch { context: String },

    #[error("UNKNOWN_AXIS: {name}")]
    UnknownAxis { name: String },

    #[error("OVERLAPPING_SETS: axis {name} appears in more than one argument")]
    OverlappingSets { name: String },

    /// Dense-tensor guard: the product of alphabet sizes exceeds the cell cap.
    #[error("tensor of {cells} cells exceeds the cap of {cap}")]
    TensorTooLarge { cells: u128, cap: usize },

    #[error("NO_CONVERGENCE after {iterations} iterations (gap {gap})")]
    NoConvergence { iterations: usize, gap: f64 },

    #[error("SYMBOL_OUT_OF_RANGE at position {position}: symbol {symbol} not in alphabet of size {alphabet}")]
    SymbolOutOfRange {
        position: usize,
        symbol: usize,
        alphabet: usize,
    },

    #[error("invalid distortion matrix: {context}")]
    InvalidDistortion { context: String },

    #[error("NO_FEASIBLE_POINT: no restart satisfied the rate and distortion constraints")]
    NoFeasiblePoint,

    #[error("auxiliary alphabet {which} of size {size} exceeds the admissible bound {bound}")]
    AuxSizeTooLarge {
        which: &'static str,
        size: usize,
        bound: usize,
    },

    /// Codebook construction would exceed the word cap. Suggests a viable blocklength.
    #[error("SIZE_EXPLOSION: {words} codebook words exceed the cap of {cap}; try n <= {max_n} or a smaller delta")]
    SizeExplosion { words: u128, cap: u64, max_n: usize },

    #[error("BUDGET_EXCEEDED: enumeration over {states} states exceeds the cap of {cap}")]
    BudgetExceeded { states: u128, cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
