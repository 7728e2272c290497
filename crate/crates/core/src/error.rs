use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit can surface. Variants are grouped by the stage
/// that raises them; the CLI maps them onto exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // curve and chain construction
    #[error("curve self-intersects: points at t={t1:.6} and t={t2:.6} are {distance:.3e} apart")]
    SelfIntersection { t1: f64, t2: f64, distance: f64 },
    #[error("curve tangent degenerates at t={t:.6} (|gamma'| = {speed:.3e})")]
    DegenerateTangent { t: f64, speed: f64 },
    #[error("curve is flagged closed but gamma(0) and gamma(1) differ by {gap:.3e}")]
    ClosureMismatch { gap: f64 },
    #[error("malformed curve data: {0}")]
    CurveData(String),
    #[error("chain parameters must be strictly increasing in [0,1): {0}")]
    OrderViolation(String),
    #[error("a closed curve carries only chains of even length, got n = {0}")]
    OddChainOnClosedCurve(usize),
    #[error("argument out of range: {0}")]
    RangeViolation(String),

    // discretization and linear algebra
    #[error("grid resolution rejected: {0}")]
    ResolutionError(String),
    #[error("metric factor is not positive (min J = {min_jacobian:.3e}); R too small for curvature {kappa_max:.3e}")]
    CurvatureTooLarge { min_jacobian: f64, kappa_max: f64 },
    #[error("operator is not positive definite (pivot {pivot} = {value:.3e})")]
    IndefiniteOperator { pivot: usize, value: f64 },
    #[error("linear solver did not converge: {0}")]
    SolverDivergence(String),
    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(String),

    // limit problem
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("Newton iteration diverged: {0}")]
    NewtonDivergence(String),
    #[error("iterate collapsed to the trivial solution (norm {0:.3e})")]
    CollapseToZero(f64),
    #[error("decay fit window reaches the noise floor: {0}")]
    WindowUnderflow(String),
    #[error("linearization has {count} eigenvalues in (-{eps0}, {eps0})")]
    DegeneracySuspected { count: usize, eps0: f64 },

    // ansatz
    #[error("bump window does not fit in the tube: {0}")]
    WindowOverflow(String),
    #[error("windowed operator is not positive definite")]
    IndefiniteWindow,
    #[error("projected bump changes sign (min {min:.3e}, max {max:.3e})")]
    SignViolation { min: f64, max: f64 },
    #[error("sign pattern broken at chain point {index}: expected {expected}, found value {value:.3e}")]
    SignPatternBroken { index: usize, expected: i8, value: f64 },

    // reduction and minimization
    #[error("normal-space iteration is not contracting: {0}")]
    ContractionFailure(String),
    #[error("normal correction left the trust region: |w|_a = {norm:.3e} > r0 = {radius:.3e}")]
    LeftTrustRegion { norm: f64, radius: f64 },
    #[error("minimizer sits on an admissibility constraint (slack {slack:.3e})")]
    StuckOnBoundary { slack: f64 },

    // configuration and files
    #[error("config error at line {line}, field `{field}`: {message}")]
    Config { line: usize, field: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl Error {
    /// True for errors raised while validating configuration rather than while computing.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Hypothesis(_) | Error::OddChainOnClosedCurve(_))
    }
}
