use std::path::PathBuf;

/// Everything that can go wrong inside the laboratory.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid too large: {n_points} points exceeds the cap of {max_points}")]
    GridTooLarge { n_points: usize, max_points: usize },

    #[error("kernel fails ŵ ≥ 0: minimum discrete Fourier coefficient {min_coefficient:e}")]
    KernelNotPositive { min_coefficient: f64 },

    #[error("cut outside grid: {0}")]
    CutOutsideGrid(String),

    #[error("potential not symmetric: max |V(x) - V(-x)| = {max_deviation:e}")]
    PotentialNotSymmetric { max_deviation: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("k exceeds grid size: requested {k} eigenpairs from a {n}-dimensional operator")]
    KExceedsGrid { k: usize, n: usize },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("scf did not converge after {iterations} iterations (last residual {residual:e})")]
    ScfNotConverged { iterations: usize, residual: f64 },

    #[error("scf energy increased at iteration {iteration}: {previous:.17e} -> {current:.17e}")]
    EnergyIncrease {
        iteration: usize,
        previous: f64,
        current: f64,
    },

    #[error("negative density at node {node}: {value:e}")]
    NegativeDensity { node: usize, value: f64 },

    #[error("phase fix failed: state has a node value {value:e} below -1e-10")]
    SignedState { value: f64 },

    #[error("parity split unavailable: {0}")]
    ParitySplitUnavailable(String),

    #[error("spectral consistency check failed: {0}")]
    Consistency(String),

    #[error("region empty: {0}")]
    RegionEmpty(String),

    #[error("cutoff bands overlap wells: 3c = {three_c} must be smaller than L = {separation}")]
    CutoffBandsOverlap { three_c: f64, separation: f64 },

    #[error("degenerate denominator: |psi_r - psi_l| = {0:e}")]
    DegenerateDenominator(f64),

    #[error("insufficient points above noise floor for {quantity}: {usable} usable, 3 required")]
    InsufficientPoints { quantity: String, usable: usize },

    #[error("no instances")]
    NoInstances,

    #[error("L_list must be strictly increasing")]
    NotIncreasing,

    #[error("window mismatch: {0}")]
    WindowMismatch(String),

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("type mismatch for `{key}`: {message}")]
    TypeMismatch { key: String, message: String },

    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),

    #[error("config parse error in {}: {message}", path.display())]
    ConfigParse { path: PathBuf, message: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
