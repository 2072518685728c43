use thiserror::Error;

/// Errors surfaced by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    /// The deflection has (numerically) touched the ground plate: min(1 + u) <= 0.
    #[error("domain degeneracy: min(1 + u) = {min_gap} <= 0, elliptic problem is singular")]
    DomainDegeneracy { min_gap: f64 },

    /// A physical-domain sample point lies outside the gap region.
    #[error("sample (r = {r}, z = {z}) outside [-1, v(r) = {v_at_r}]")]
    OutOfDomain { r: f64, z: f64, v_at_r: f64 },

    /// Direct factorization hit a zero pivot.
    #[error("linear solver breakdown on {n_r}x{n_eta} grid (min gap {min_gap:.3e})")]
    SolverBreakdown { n_r: usize, n_eta: usize, min_gap: f64 },

    /// A quantity violated an identity that holds analytically.
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    /// Newton iteration did not reach tolerance; interpreted as "no nearby solution".
    #[error("Newton did not converge within {iterations} iterations (last residual {residual:.3e})")]
    Nonconvergence { iterations: usize, residual: f64 },

    /// Inverse power iteration stalled before reaching its residual target.
    #[error("eigenvalue iteration stagnated at residual {residual:.3e}")]
    EigenStagnation { residual: f64 },

    /// Parameter or tolerance validation failure.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A field violated a required boundary condition.
    #[error("boundary violation: {0}")]
    BoundaryViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
