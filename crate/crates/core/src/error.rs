use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: expected L={expected_l}, N={expected_n}; got L={got_l}, N={got_n}")]
    GridMismatch {
        expected_l: f64,
        expected_n: usize,
        got_l: f64,
        got_n: usize,
    },

    #[error("non-finite value at sample ({i}, {j})")]
    NonFinite { i: usize, j: usize },

    #[error("|mu| = {modulus} >= 1 at supported sample ({i}, {j})")]
    NotElliptic { i: usize, j: usize, modulus: f64 },

    #[error("mu is nonzero off its support at sample ({i}, {j})")]
    OffSupport { i: usize, j: usize },

    #[error("support reaches sample ({i}, {j}), inside the L/4 edge margin")]
    SupportMargin { i: usize, j: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error(
        "boundary component {component} has diameter {diameter:.3e} < 2h = {limit:.3e}; \
         a boundary component collapsing to a point makes the Dirichlet problem unsolvable \
         in general (consider the punctured unit disk with data 1 on the circle and 0 at the center)"
    )]
    DegenerateBoundary {
        component: usize,
        diameter: f64,
        limit: f64,
    },

    #[error("invalid boundary data: {0}")]
    InvalidBoundaryData(String),

    #[error("support of the density touches the padding boundary at sample ({i}, {j})")]
    Wraparound { i: usize, j: usize },

    #[error("{solver} did not converge after {iterations} iterations (last increment {last:.3e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        last: f64,
    },

    #[error("degenerate affine fit: |a| = {0:.3e}")]
    DegenerateFit(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resolution: {0}")]
    Resolution(String),

    #[error("geometry leaves the grid: {0}")]
    OutsideGrid(String),

    #[error("topology: {0}")]
    Topology(String),

    #[error("no boundary value reachable from sample ({i}, {j})")]
    UnreachableBoundary { i: usize, j: usize },

    #[error("not elliptic: (1+a11)(1+a22) <= a12 a21 at sample ({i}, {j})")]
    MatrixNotElliptic { i: usize, j: usize },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: u64, message: String },

    #[error("unsupported format version {found:?} (expected {expected:?})")]
    Version { found: String, expected: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// The innermost error, unwrapping stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for iterative solvers that ran out of iterations.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(self.root(), Error::NotConverged { .. })
    }
}
