use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the suite can report.
///
/// Infeasibility-type errors (no design satisfies the constraints) are kept
/// apart from input/numerical errors so callers can map them to distinct
/// exit statuses.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("lift is never positive over alpha range [{lo}, {hi}] rad")]
    DegenerateRange { lo: f64, hi: f64 },

    #[error("section geometry: {0}")]
    Geometry(String),

    #[error("thin-wall assumption violated: t = {t} m exceeds D/10 = {limit} m")]
    ThinWallViolation { t: f64, limit: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("no (s, AR) on the grid meets P_req = {p_req:.1} W")]
    EmptySet { p_req: f64 },

    #[error("design matrix rank {rank} is below the {terms} polynomial terms")]
    RankDeficient { rank: usize, terms: usize },

    #[error("mass matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("numeric blow-up at t = {time:.3} s: {what}")]
    NumericBlowup { time: f64, what: String },

    #[error("path lost at t = {time:.3} s: interior angle {angle:.3} rad")]
    PathLost { time: f64, angle: f64 },

    #[error("lap has no duration")]
    EmptyLap,

    #[error("final GA population has no feasible individual")]
    NoFeasibleIndividual,

    #[error("config: {0}")]
    Config(String),

    #[error("parse {what}: {msg}")]
    Parse { what: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the error means "no admissible design", as opposed to bad
    /// input or a numerical failure.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible(_) | Error::EmptySet { .. } | Error::NoFeasibleIndividual)
    }

    /// Short machine-readable tag used in error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::DegenerateRange { .. } => "degenerate_range",
            Error::Geometry(_) => "geometry",
            Error::ThinWallViolation { .. } => "thin_wall_violation",
            Error::Infeasible(_) => "infeasible",
            Error::EmptySet { .. } => "empty_set",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::NotPositiveDefinite(_) => "not_positive_definite",
            Error::NumericBlowup { .. } => "numeric_blowup",
            Error::PathLost { .. } => "path_lost",
            Error::EmptyLap => "empty_lap",
            Error::NoFeasibleIndividual => "no_feasible_individual",
            Error::Config(_) => "config",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidInput(msg()))
    }
}
