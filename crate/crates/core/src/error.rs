use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside the domain of {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("h1/h2 have a pole at p = 0")]
    PoleAtOrigin,

    #[error("time step {dt} under-resolves the drive or kernel phase; use dt <= {suggested}")]
    StepTooLarge { dt: f64, suggested: f64 },

    #[error("k_max = {k_max} too large for dt = {dt}; need k_max <= {bound:.4}")]
    SpectralResolution { k_max: f64, dt: f64, bound: f64 },

    #[error("solution left the growth envelope at t = {t}: |Y| = {value:e} > {bound:e}")]
    Instability { t: f64, value: f64, bound: f64 },

    #[error("continued fraction depth {depth} below required {required}")]
    InsufficientDepth { depth: usize, required: usize },

    #[error("scaled value out of exponent range")]
    ExponentRange,

    #[error("inconsistent minimal solutions: Wronskian drift {drift:e}")]
    InconsistentSolutions { drift: f64 },

    #[error("singular source term at p_n = {p_re} + {p_im}i")]
    SingularSource { p_re: f64, p_im: f64 },

    #[error("lattice index n = {n} is not regularizable at the axis; use the shifted functional equation")]
    UseShiftedRelation { n: i64 },

    #[error("evaluation requested on a branch point p = {p_re} + {p_im}i")]
    BranchPoint { p_re: f64, p_im: f64 },

    #[error("Bromwich tail estimate {tail:e} exceeds tolerance {tol:e} at P_max = {p_max}")]
    BromwichTail { tail: f64, tol: f64, p_max: f64 },

    #[error("root search did not converge after {iterations} iterations (|W|/scale = {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("continuation ambiguity: a square-root factor came within {distance:e} of its cut")]
    ContinuationAmbiguity { distance: f64 },

    #[error("resonant frequency: 1/omega = {inv} is an integer")]
    Resonance { inv: f64 },

    #[error("empty fit window: {0}")]
    EmptyWindow(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("config error: {0}")]
    Config(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
