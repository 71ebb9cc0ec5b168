use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid dimensions must be at least 1x1 with 2 or more types (got {rows}x{cols}, S={types})")]
    InvalidDimensions { rows: usize, cols: usize, types: usize },
    #[error("periodic boundaries need at least 3 rows and 3 columns (got {rows}x{cols})")]
    PeriodicTooSmall { rows: usize, cols: usize },
    #[error("cell data has {got} entries, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("type code {code} out of range for S={types}")]
    TypeOutOfRange { code: usize, types: usize },
    #[error("suitability field {field_rows}x{field_cols}x{field_types} incompatible with grid {grid_rows}x{grid_cols}x{grid_types}")]
    IncompatibleField {
        grid_rows: usize,
        grid_cols: usize,
        grid_types: usize,
        field_rows: usize,
        field_cols: usize,
        field_types: usize,
    },
    #[error("non-finite suitability score at ({row}, {col}, {ty})")]
    NonFiniteScore { row: usize, col: usize, ty: usize },
    #[error("cell ({row}, {col}) outside {rows}x{cols} grid")]
    OutOfBounds { row: usize, col: usize, rows: usize, cols: usize },
    #[error("invalid priorities: {0}")]
    InvalidPriorities(&'static str),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(&'static str),
    #[error("operation requires S=3 (got S={0})")]
    RequiresThreeTypes(usize),
    #[error("use counts sum to {got}, expected {expected}")]
    CountSumMismatch { expected: usize, got: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("inconsistent sample dimensions")]
    InconsistentSamples,
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("region mask is empty")]
    EmptyMask,
    #[error("no on-site incentive: mean suitability margin {0} is not positive")]
    NoOnSiteIncentive(f64),
}
