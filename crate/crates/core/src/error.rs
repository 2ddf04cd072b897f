use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(
        "h_s is not Hermitian: worst pair ({row}, {col}) has |h[{row}][{col}] - conj(h[{col}][{row}])| = {defect:e}"
    )]
    NotHermitian { row: usize, col: usize, defect: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid reservoir parameters: {0}")]
    Reservoir(String),

    #[error("initial state is not normalized: |psi0|^2 + |psi|^2 = {0}")]
    NotNormalized(f64),

    #[error("time grid is not ascending at index {index} ({prev} -> {next})")]
    NonAscendingGrid { index: usize, prev: f64, next: f64 },

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solver did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Rejects negative start times and decreasing grids.
pub(crate) fn check_time_grid(times: &[f64]) -> Result<()> {
    if let Some(&t0) = times.first() {
        if !(t0 >= 0.0) {
            return Err(Error::NegativeTime(t0));
        }
    }
    for (i, w) in times.windows(2).enumerate() {
        if !(w[1] >= w[0]) {
            return Err(Error::NonAscendingGrid { index: i + 1, prev: w[0], next: w[1] });
        }
    }
    Ok(())
}
