//! Shared error type for the statistics, estimation, simulation, and I/O layers.

/// Library-wide error type.
///
/// Every variant maps to a stable one-word [`category`](Error::category)
/// used by the CLI for machine-parsable reporting, and to a process
/// [`exit_code`](Error::exit_code) (1 computation, 2 usage, 3 I/O).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{what} = {got} out of range, admissible {lo}..={hi}")]
    OutOfRange {
        what: &'static str,
        got: i64,
        lo: i64,
        hi: i64,
    },

    #[error("insufficient data for {what}: need {need}, have {have}")]
    InsufficientData {
        what: &'static str,
        need: usize,
        have: usize,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The denominator Allan variance of the independent variable vanished;
    /// a constant record carries no sensitivity information.
    #[error("degenerate independent variable: Allan variance of x is zero at m = {m}")]
    DegenerateNiv { m: usize },

    #[error("domain error: {0}")]
    Domain(String),

    /// No window satisfied the extraction rules. Carries the best
    /// candidate window and by how much it violated the mid-band, in
    /// units of the mid-band half-width.
    #[error("extraction failed: {reason}")]
    ExtractionFailed {
        reason: String,
        m_lo: usize,
        m_hi: usize,
        violation: f64,
    },

    #[error("compensation failed: {0}")]
    CompensationFailed(String),

    #[error("budget has no entries")]
    EmptyBudget,

    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("unknown preset `{name}`; valid presets: {valid}")]
    UnknownPreset { name: String, valid: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-parsable category word.
    pub fn category(&self) -> &'static str {
        match self {
            Error::OutOfRange { .. } => "range",
            Error::InsufficientData { .. } => "insufficient-data",
            Error::ShapeMismatch(_) => "shape",
            Error::DegenerateNiv { .. } => "degenerate-niv",
            Error::Domain(_) => "domain",
            Error::ExtractionFailed { .. } => "extraction-failed",
            Error::CompensationFailed(_) => "compensation-failed",
            Error::EmptyBudget => "empty-budget",
            Error::Parse { .. } => "parse",
            Error::UnknownPreset { .. } => "unknown-preset",
            Error::Usage(_) => "usage",
            Error::Io { .. } => "io",
        }
    }

    /// CLI exit status: 0 is success, 1 computation, 2 usage, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::UnknownPreset { .. } => 2,
            Error::Io { .. } => 3,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
