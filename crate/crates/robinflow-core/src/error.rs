use thiserror::Error;

/// Every failure the library reports. The `code` strings are stable and
/// appear in CLI diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("E_DOMAIN: {0}")]
    Domain(String),
    #[error("E_POLE: nu = {nu} is a pole of the continued integral")]
    Pole { nu: f64 },
    #[error("E_ORDER: {0}")]
    Order(String),
    #[error("E_DIAGONAL: |x - y| = {0:e} is below the diagonal threshold")]
    Diagonal(f64),
    #[error("E_CONTOUR: radius {radius} reaches a neighbouring pole (spacing {spacing})")]
    Contour { radius: f64, spacing: f64 },
    #[error("E_STIFF: step control failed at r = {r}")]
    Stiff { r: f64 },
    #[error("E_DIRICHLET: lambda = {lambda} is within {distance:e} of a Dirichlet eigenvalue of mode {n}")]
    Dirichlet { n: i64, lambda: f64, distance: f64 },
    #[error("E_WINDOW: window [{lo}, {hi}] touches the Landau level {level}")]
    Window { lo: f64, hi: f64, level: f64 },
    #[error("E_NOT_EIGEN: secular value {residual:e} at lambda = {lambda}")]
    NotEigen { lambda: f64, residual: f64 },
    #[error("E_LANDAU: mu = {mu} is within {tol:e} of a Landau level")]
    Landau { mu: f64, tol: f64 },
    #[error("E_RANGE: {0}")]
    Range(String),
    #[error("E_ENDPOINT: {0}")]
    Endpoint(String),
    #[error("E_UNRESOLVED: {0}")]
    Unresolved(String),
    #[error("E_SINGULAR: 1 + A is singular (smallest singular value {0:e})")]
    Singular(f64),
    #[error("E_NOT_ON_BRANCH: |F(t, mu)| = {0:e}")]
    NotOnBranch(f64),
    #[error("E_NOT_MONOTONE: tau1 - tau0 = {diff} < 0 at mode {n}")]
    NotMonotone { n: i64, diff: f64 },
    #[error("E_VALIDATION: {0}")]
    Validation(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "E_DOMAIN",
            Error::Pole { .. } => "E_POLE",
            Error::Order(_) => "E_ORDER",
            Error::Diagonal(_) => "E_DIAGONAL",
            Error::Contour { .. } => "E_CONTOUR",
            Error::Stiff { .. } => "E_STIFF",
            Error::Dirichlet { .. } => "E_DIRICHLET",
            Error::Window { .. } => "E_WINDOW",
            Error::NotEigen { .. } => "E_NOT_EIGEN",
            Error::Landau { .. } => "E_LANDAU",
            Error::Range(_) => "E_RANGE",
            Error::Endpoint(_) => "E_ENDPOINT",
            Error::Unresolved(_) => "E_UNRESOLVED",
            Error::Singular(_) => "E_SINGULAR",
            Error::NotOnBranch(_) => "E_NOT_ON_BRANCH",
            Error::NotMonotone { .. } => "E_NOT_MONOTONE",
            Error::Validation(_) => "E_VALIDATION",
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) => 2,
            Error::Unresolved(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
