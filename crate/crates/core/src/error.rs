use thiserror::Error;

/// Errors raised by the laboratory's operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: expected {expected} points, found {found}")]
    GridMismatch { expected: usize, found: usize },
    #[error("grid has no node at x = 0")]
    MissingOriginNode,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("group element `{element}` does not act on a model with {symmetry} symmetry")]
    WrongGroupElement { element: String, symmetry: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("CFL violation: dt = {dt} exceeds the limit {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("domain too small for light-cone sizing: need |x| >= {required}, grid reaches {available}")]
    DomainTooSmall { required: f64, available: f64 },
    #[error("solution became non-finite at t = {t}")]
    BlowUp { t: f64 },
    #[error("no stationary orbit: {0}")]
    NoOrbit(String),
    #[error("too few samples: {found} < {required}")]
    TooFewSamples { found: usize, required: usize },
    #[error("orbit list is empty")]
    EmptyOrbitList,
    #[error("no kink present: fit residual {residual} exceeds half the field norm {norm}")]
    NoKink { residual: f64, norm: f64 },
    #[error("potential admits {found} bound states, at least 2 required")]
    TooFewBoundStates { found: usize },
    #[error("ray left the potential domain at t = {t} (x3 = {x3})")]
    DomainExit { t: f64, x3: f64 },
    #[error("initial Hamiltonian H(x0, p0) = {h} violates the emission tolerance {tolerance}")]
    EmissionEnergy { h: f64, tolerance: f64 },
    #[error("endpoint spread {spread} too small for stable differencing")]
    DegenerateSpread { spread: f64 },
    #[error("trajectory terminates at x3 = {x3}, outside the field-free region beyond {anode}")]
    NotFieldFree { x3: f64, anode: f64 },
    #[error("aperture quadrature disagrees with the closed form: relative error {relative}")]
    QuadratureMismatch { relative: f64 },
    #[error("lattice spacing {spacing} exceeds the phase-resolution limit {limit}")]
    LatticeTooCoarse { spacing: f64, limit: f64 },
    #[error("all screen points fall below the amplitude threshold")]
    BelowThreshold,
    #[error("found {found} fringe peaks, at least 3 required")]
    TooFewPeaks { found: usize },
    #[error("fringe geometry requires a two-slit aperture")]
    NotTwoSlit,
    #[error("verdict `{verdict}` references missing metric `{metric}`")]
    MissingMetric { verdict: String, metric: String },
}

pub type Result<T> = std::result::Result<T, LabError>;
