use thiserror::Error;

/// Failures raised by constructions and certificates.
///
/// Every construction either returns a certified object or one of these;
/// nothing is silently accepted.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("aliasing: grid of {grid} points cannot resolve degree {degree}")]
    Aliasing { grid: usize, degree: u64 },

    #[error("grid size {0} is not a power of two")]
    GridSize(usize),

    #[error("curve too close to zero: min modulus {min_modulus:e} on a grid of {grid} points")]
    CurveTooClose { min_modulus: f64, grid: usize },

    #[error("no certification: argument step {max_step:.3} rad still unresolved at grid {grid}")]
    NoCertification { max_step: f64, grid: usize },

    #[error("psi domain: argument {value} outside [0, {cap}]")]
    PsiDomain { value: f64, cap: f64 },

    #[error("direction undefined: zero vector has no argument")]
    DirectionUndefined,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("frequency budget exceeded: {0}")]
    FrequencyBudget(String),

    #[error("sign flattening failed: best sup {best:.6} above target {target:.6}")]
    Flatten { best: f64, target: f64 },

    #[error("adaptive search for {what} hit its cap; residual trace {trace:?}")]
    AdaptiveCap { what: String, trace: Vec<(u64, f64)> },

    #[error("certificate failed: {0}")]
    Certificate(String),

    #[error("ε₂ exhausted: {0}")]
    DipScan(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
