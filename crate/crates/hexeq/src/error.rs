use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value/parameter domains do not match the equation family ({0})")]
    DomainMismatch(String),
    #[error("{0} needs an elliptic context")]
    EllipticUnavailable(String),
    #[error("singular linear solve in {0}")]
    SingularSolve(String),
    #[error("{0} is not applicable to {1}")]
    NotApplicable(String, String),
    #[error("sampler guard exhausted after {0} attempts")]
    GuardExhausted(usize),
    #[error("leg evaluated too close to a branch point ({0})")]
    BranchAmbiguity(String),
    #[error("evolution stalled with {unknown} unknown vertices left")]
    Stalled { unknown: usize },
    #[error("initial pattern cannot seed any hexagon: {0}")]
    PatternTooSmall(String),
    #[error("combination {row} is not legal for {shape}")]
    IllegalCombo { row: String, shape: String },
    #[error("unknown combination row {0}")]
    UnknownRow(String),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("parse: {0}")]
    Parse(String),
    #[error("\u{2118} has a pole at {0}")]
    PoleAtLatticePoint(String),
    #[error("\u{2118} did not converge (residual {0:e})")]
    NonConvergent(f64),
    #[error("degenerate elliptic curve (zero discriminant)")]
    DegenerateCurve,
    #[error("degenerate sample: {0}")]
    Degenerate(String),
    #[error("{0} is not implemented")]
    NotImplemented(String),
}

pub type Result<T> = std::result::Result<T, Error>;
