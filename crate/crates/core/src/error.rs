use alloc::string::String;

/// Errors reported by the algorithmic core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {what} (got {value})")]
    Domain {
        /// Which argument or constraint was violated.
        what: &'static str,
        /// The offending value.
        value: f64,
    },

    /// The bisection target is not enclosed by the bracket values.
    #[error("root not bracketed: target {target} outside [{f_low}, {f_high}]")]
    BracketFailure {
        /// Requested function value.
        target: f64,
        /// Function value at the lower bracket end.
        f_low: f64,
        /// Function value at the upper bracket end.
        f_high: f64,
    },

    /// An iterative method ran out of iterations.
    #[error("iteration limit of {max_iter} reached (last x = {last_x})")]
    IterationLimit {
        /// Configured iteration cap.
        max_iter: usize,
        /// Last iterate.
        last_x: f64,
    },

    /// The requested operating point cannot be reached.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Input data violates a structural precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An atom carries zero total mass where a posterior is required.
    #[error("degenerate atom {index}: all class weights are zero")]
    DegenerateAtom {
        /// Atom position.
        index: usize,
    },

    /// Feature or score vectors do not have the expected length.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        /// Expected length.
        expected: usize,
        /// Observed length.
        got: usize,
    },

    /// Exhaustive search was asked to enumerate too many atoms.
    #[error("brute force supports at most {limit} atoms, got {got}")]
    SizeLimit {
        /// Maximum supported size.
        limit: usize,
        /// Requested size.
        got: usize,
    },
}

/// Result alias for the core crate.
pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// [`Error::InvalidInput`] from a message.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// [`Error::Infeasible`] from a message.
    pub fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }
}
