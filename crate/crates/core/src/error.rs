use thiserror::Error;

/// Everything that can go wrong while building states, probes, or reports.
///
/// Messages name the violated invariant so CLI users see *which* input
/// check failed, not just that one did.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid subsystem dimensions {0:?}: need at least two sites, each of local dimension >= 2")]
    InvalidDims(Vec<usize>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("dense operators are capped at total dimension {max}, got {dim}")]
    DenseTooLarge { dim: usize, max: usize },

    #[error("kron of an empty factor list")]
    EmptyFactors,

    #[error("matrix is not square: {rows} rows, {cols} columns")]
    NotSquare { rows: usize, cols: usize },

    #[error("normalization violated: vector norm is {norm}, expected 1 within {tol:e}")]
    NotNormalized { norm: f64, tol: f64 },

    #[error("hermiticity violated: max |rho[a][b] - conj(rho[b][a])| = {max_dev:e}")]
    NotHermitian { max_dev: f64 },

    #[error("unit trace violated: tr(rho) = {trace}")]
    TraceNotOne { trace: f64 },

    #[error("positivity violated: an eigenvalue lies below -{bound:e}")]
    NotPositive { bound: f64 },

    #[error("mixing weights invalid: {detail}")]
    InvalidWeights { detail: String },

    #[error("site index {site} out of range for {n} sites")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("partition count k={k} out of range for n={n} sites (need 2 <= k <= n)")]
    KOutOfRange { k: usize, n: usize },

    #[error("rank {rank} out of range for dimension {dim}")]
    RankOutOfRange { rank: usize, dim: usize },

    #[error("probe pair at site {site} is (anti)parallel: |<x|x~>| = {overlap}")]
    ParallelPair { site: usize, overlap: f64 },

    #[error("family requires identical local dimensions, got {0:?}")]
    HeterogeneousDims(Vec<usize>),

    #[error("two-copy oracle is capped at total dimension {max}, got {dim}")]
    OracleTooLarge { dim: usize, max: usize },

    #[error("no detection boundary inside bracket: margin {lo_margin:e} at {lo}, {hi_margin:e} at {hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        lo_margin: f64,
        hi_margin: f64,
    },

    #[error("invalid scan grid: {detail}")]
    InvalidGrid { detail: String },

    #[error("shot count must be positive")]
    NoShots,

    #[error("sampling found an outcome probability of {min_prob:e}; the state failed positivity upstream")]
    NegativeProbability { min_prob: f64 },

    #[error("probe list is empty")]
    EmptyProbeSet,

    #[error("unknown family {0:?}; expected gw, w-noise, or w-antiw")]
    UnknownFamily(String),

    #[error("unknown probe {0:?}; expected computational, 45, phase-flip, random:<seed>, or file:<path>")]
    UnknownProbe(String),

    #[error("bad state or probe file: {detail}")]
    BadFile { detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
