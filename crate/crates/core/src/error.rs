use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^H| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix dimension {rows}x{cols} is not supported (square, at most 16)")]
    Dimension { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("sector state is not normalized (<psi|psi> = {0})")]
    NotNormalized(f64),

    #[error("unsupported excitation number {0} (expected 1 or 2)")]
    UnsupportedSector(u32),

    #[error("sector mismatch: hamiltonian acts on n={hamiltonian}, state lives in n={state}")]
    SectorMismatch { hamiltonian: u32, state: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A computed quantity left its theoretical range by more than the
    /// numerical tolerance. Indicates a bug upstream, never clamped.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}
