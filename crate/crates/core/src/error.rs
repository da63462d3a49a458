use thiserror::Error;

/// Errors raised by the engine and its front ends.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CasimirError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("permittivity undefined for this variant ({0})")]
    PermittivityUndefined(&'static str),

    #[error("model {model} does not support the {scheme} reflection scheme")]
    UnsupportedScheme { model: &'static str, scheme: &'static str },

    #[error("zero Matsubara frequency must use the zero-frequency prescription")]
    ZeroFrequency,

    #[error("quadrature did not converge: value {value:e}, error estimate {error:e} after {intervals} intervals")]
    Quadrature { value: f64, error: f64, intervals: usize },

    #[error("Matsubara sum not converged after {terms} terms (last term {last_term:e}, running sum {sum:e})")]
    MatsubaraNonConvergence { terms: usize, last_term: f64, sum: f64 },

    #[error("Richardson step collapse: estimates {coarse:e} and {fine:e} disagree beyond tolerance")]
    StepCollapse { coarse: f64, fine: f64 },

    #[error("dispersion pole: {0}")]
    DispersionPole(&'static str),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: frequency {omega:e} is not strictly greater than the previous row")]
    NonMonotone { line: usize, omega: f64 },

    #[error("line {line}: negative loss Im eps = {im_eps:e}")]
    NegativeLoss { line: usize, im_eps: f64 },

    #[error("io: {0}")]
    Io(String),
}

impl CasimirError {
    /// True for errors caused by bad user input rather than numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            CasimirError::InvalidInput(_)
                | CasimirError::PermittivityUndefined(_)
                | CasimirError::UnsupportedScheme { .. }
                | CasimirError::Parse { .. }
                | CasimirError::NonMonotone { .. }
                | CasimirError::NegativeLoss { .. }
                | CasimirError::Io(_)
        )
    }
}

impl From<std::io::Error> for CasimirError {
    fn from(e: std::io::Error) -> Self {
        CasimirError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CasimirError>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(CasimirError::InvalidInput(msg()))
    }
}
