use core::fmt;

#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// A matrix had the wrong shape for the requested operation.
    Dimension {
        expected: &'static str,
        rows: usize,
        cols: usize,
    },
    /// Input rejected before any computation ran.
    InvalidInput(&'static str),
    /// Matrix or parameter entries contained NaN or infinity.
    NonFinite,
    /// The linear model violates a structural requirement (e.g. n < 2).
    InvalidModel(&'static str),
    /// Feedback gains must be non-negative.
    InvalidGain(f64),
    /// Mode index beyond the configured `k_max`.
    ModeOutOfRange { k: usize, k_max: usize },
    /// An operation precondition did not hold.
    Precondition(&'static str),
    /// The QR iteration failed to converge.
    NoConvergence,
    /// Gray-Scott parameters with `v = γ + k η₂ = 0`.
    DegenerateParameters,
    /// The simulation exceeded the blow-up threshold.
    Divergence { time: f64 },
    /// A simulation configuration value is out of range.
    Config(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension { expected, rows, cols } => {
                write!(f, "dimension error: expected {expected}, got {rows}x{cols}")
            }
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::NonFinite => f.write_str("invalid model: non-finite entry"),
            Error::InvalidModel(msg) => write!(f, "invalid model: {msg}"),
            Error::InvalidGain(g) => write!(f, "invalid gain: {g} (must be >= 0)"),
            Error::ModeOutOfRange { k, k_max } => {
                write!(f, "mode index {k} exceeds k_max = {k_max}")
            }
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::NoConvergence => f.write_str("eigenvalue iteration did not converge"),
            Error::DegenerateParameters => f.write_str("degenerate parameters: v = gamma + k*eta2 is zero"),
            Error::Divergence { time } => write!(f, "simulation diverged at t = {time}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
