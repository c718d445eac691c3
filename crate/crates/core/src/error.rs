use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A tail of the thresholded function exceeds 1 in modulus, so the
    /// integrable excess would carry infinite total variation.
    #[error("tail value {0} exceeds the threshold; excess part is not integrable")]
    NonIntegrableExcess(f64),

    #[error("atom at {0} does not coincide with a grid node")]
    AssemblyContract(f64),

    #[error("method not applicable: {0}")]
    MethodInapplicable(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("m(V) = {0} is not positive; no Sobolev-type inequality holds")]
    NoInequality(f64),

    #[error("every sweep point failed")]
    AllPointsFailed,

    #[error("failed to parse potential: {0}")]
    Parse(String),
}
