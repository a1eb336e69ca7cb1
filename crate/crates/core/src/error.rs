use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomials live in different variable spaces")]
    SpaceMismatch,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{0}` is out of role order (decision, weight, multiplier, objective)")]
    RoleOrder(String),
    #[error("no value assigned to variable `{0}`")]
    MissingAssignment(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("Macaulay degree {degree} is below the largest equation degree {max_equation_degree}")]
    DegreeTooLow {
        degree: usize,
        max_equation_degree: usize,
    },
    #[error("no eliminant up to degree {d_max}; intersection dimensions by degree: {profile:?}")]
    DegreeCapExceeded {
        d_max: usize,
        profile: Vec<(usize, usize)>,
    },
    #[error("Macaulay matrix of degree {degree} ({rows}x{cols}) exceeds the dense size limit; intersection dimensions so far: {profile:?}")]
    MatrixTooLarge {
        degree: usize,
        rows: usize,
        cols: usize,
        profile: Vec<(usize, usize)>,
    },
    #[error("every row of V^T M fell below the threshold; the rank tolerance is likely misconfigured")]
    EmptyEliminant,
    #[error("singular value decomposition failed to converge")]
    Factorization,
    #[error("eliminant Jacobian vanishes at the requested point (singular point of the variety)")]
    ZeroGradient,
    #[error("Newton iteration did not converge from any start; best residual {best_residual:e}")]
    NoConvergence { best_residual: f64 },
    #[error("size violation: {0}")]
    Size(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Numerical failures as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegreeCapExceeded { .. }
                | Error::MatrixTooLarge { .. }
                | Error::EmptyEliminant
                | Error::Factorization
                | Error::ZeroGradient
                | Error::NoConvergence { .. }
        )
    }
}
