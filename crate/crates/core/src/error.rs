use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {func}: argument {arg} is outside the admissible domain")]
    Domain { func: &'static str, arg: f64 },

    #[error("range error in {func}: result for argument {arg} is not representable")]
    Range { func: &'static str, arg: f64 },

    #[error("Bessel order {0} exceeds the configured maximum {1}")]
    OrderTooLarge(u32, u32),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("singular linear system ({unknowns} unknowns): {detail}")]
    SingularSystem { unknowns: usize, detail: String },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e}){}",
        .smallest_singular_value.map(|s| format!(", smallest singular value of the boundary Jacobian {s:.3e}")).unwrap_or_default())]
    NewtonDiverged {
        iterations: usize,
        residual: f64,
        smallest_singular_value: Option<f64>,
    },

    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),

    #[error("continuation aborted: {0}")]
    Continuation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
