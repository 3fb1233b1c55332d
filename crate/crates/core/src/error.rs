use thiserror::Error;

/// Errors raised by the solver, the analysis routines and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("hermitian symmetry violated: imaginary residue {residue:.3e} exceeds {tolerance:.1e} relative")]
    Symmetry { residue: f64, tolerance: f64 },

    #[error("mean-zero violation: zero mode {zero_mode:.3e} relative to field magnitude (limit 1e-12)")]
    MeanZero { zero_mode: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("aliasing risk: input has modes up to {max_mode} but products need max|k_i| <= {limit}")]
    AliasingRisk { max_mode: i64, limit: i64 },

    #[error("grid mismatch: {left} vs {right} points per side")]
    GridMismatch { left: usize, right: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("band error: band {band} exceeds grid_n/4 = {limit}")]
    Band { band: i64, limit: i64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
