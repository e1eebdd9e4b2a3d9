use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operands built over different generator sets or incompatible shapes.
    #[error("structural mismatch: {0}")]
    Structure(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// `d∘d` does not vanish.
    #[error("differential does not square to zero in degree {degree} (residual {residual:e})")]
    NotADifferential { degree: i32, residual: f64 },

    #[error("perturbation not small: 1 - δη is singular in degree {0}")]
    PerturbationNotSmall(i32),

    #[error("truncation {truncation} is below the generator count {n}")]
    TruncationTooLow { truncation: usize, n: usize },

    #[error("index of D⁺ is nonzero ({plus} vs {minus})")]
    NonzeroIndex { plus: usize, minus: usize },

    #[error("sample {0} lies outside the chart")]
    OutsideChart(usize),

    #[error("cocycle violated: residual {0:e}")]
    Cocycle(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
