use thiserror::Error;

#[derive(Debug, Error)]
pub enum FilError {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("cannot invert a series that is zero to known order")]
    ZeroSeries,

    #[error("leading coefficient {0} is not invertible in the coefficient ring")]
    NonUnit(String),

    #[error("singular normalization system for n = {0}")]
    SingularSystem(usize),

    #[error("point is not in the upper half-plane (im = {0})")]
    NotUpperHalf(f64),

    #[error("reduction exceeded {steps} steps; best point {best_re} + {best_im}i")]
    ReductionStalled { steps: usize, best_re: f64, best_im: f64 },

    #[error("segment height {height} too low: |J(tau)/J(z)| reached {ratio}")]
    SegmentTooLow { height: f64, ratio: f64 },

    #[error("index {n} exceeds the built basis (n_max = {n_max}); rebuild with a larger n_max")]
    IndexBeyondBuilt { n: usize, n_max: usize },

    #[error("double precision is limited to n <= {max}; n = {n} needs --precision extended")]
    PrecisionGuard { n: usize, max: usize },

    #[error("tail route needs |x| >= sqrt(n): |x| = {x}, n = {n}")]
    TailDomain { n: usize, x: f64 },

    #[error("cache version {found} does not match {expected}; rebuild required")]
    CacheVersion { found: u32, expected: u32 },

    #[error("cache is corrupt: {0}")]
    CacheCorrupt(String),

    #[error("no tabulated value for n = {n} at node {node}")]
    MissingValue { n: usize, node: usize },

    #[error("Neumann inversion inapplicable: defect {0} >= 1")]
    NeumannInapplicable(f64),

    #[error("Neumann series did not converge in {terms} terms (last increment {last})")]
    NeumannStalled { terms: usize, last: f64 },

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("sequence is not strictly increasing at index {0}")]
    NonMonotone(usize),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("grid spacing {h} too coarse for derivative order {beta}")]
    GridTooCoarse { beta: usize, h: f64 },

    #[error("divergent majorant: {0}")]
    DivergentMajorant(String),

    #[error("values grow on the grid; not in the class at h = {0}")]
    NotInClass(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, FilError>;
