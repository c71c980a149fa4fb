use thiserror::Error;

/// Grid multi-index as reported in error messages.
pub type ErrIdx = [usize; 3];

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero level set reaches the {0}-node boundary layer; enlarge the domain")]
    DomainTooSmall(usize),

    #[error("stencil at index {0:?} leaves the grid or the swept mask")]
    OutOfStencil(ErrIdx),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time step {dt:.3e} exceeds the stability limit {limit:.3e}")]
    UnstableTimestep { dt: f64, limit: f64 },

    #[error("non-finite value produced at step {step}, node {index:?}")]
    NumericalBlowup { step: usize, index: ErrIdx },

    #[error("sweep incomplete: {remaining} nodes still positive at t = {t:.6}")]
    IncompleteSweep { remaining: usize, t: f64 },

    #[error("invalid crossing: need v_prev > 0 >= v_next and t_prev < t_next, got v=({v_prev}, {v_next}), t=({t_prev}, {t_next})")]
    InvalidCrossing {
        v_prev: f64,
        v_next: f64,
        t_prev: f64,
        t_next: f64,
    },

    #[error("near-critical node: |grad u| = {grad:.3e} below floor {floor:.3e}")]
    NearCritical { grad: f64, floor: f64 },

    #[error("operation requires a complete (non-partial) arrival field")]
    PartialField,

    #[error("position {0:?} lies outside the oracle's domain")]
    OutsideDomain([f64; 3]),

    #[error("no critical points supplied")]
    NoCriticalPoints,

    #[error("degenerate geometry probe at {index:?}: arrival residual {residual:.3} exceeds 0.5")]
    DegenerateProbe { index: ErrIdx, residual: f64 },

    #[error("no sample survived rejection on the shell of radius {0:.4}")]
    EmptyShell(f64),

    #[error("slice maximum not attained in the interior ({0})")]
    NoInteriorMax(String),

    #[error("connected component mixes strata {0:?}")]
    MixedStratum(Vec<usize>),

    #[error("insufficient data: need {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("initial surface is not mean convex: speed {0:.4} at a sampled surface point")]
    NotMeanConvex(f64),

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 config, 3 numerical, 4 incomplete
    /// sweep, 5 format, 6 is reserved for verify failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) => 2,
            Error::IncompleteSweep { .. } | Error::PartialField => 4,
            Error::Format(_) => 5,
            Error::Io(_) => 5,
            _ => 3,
        }
    }
}
