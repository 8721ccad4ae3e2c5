use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A closed-form expression left its mathematical range; this is a bug.
    #[error("internal error: {0}")]
    Internal(String),
    #[error("quasi-energy gap closes at k = {k} (sin E = {sin_e:e}); norm vector undefined")]
    SingularPoint { k: f64, sin_e: f64 },
    #[error("integration path touches a Dirac point near k = {k}")]
    SingularPath { k: f64 },
    #[error("no convergence after {nodes} nodes (last change {change:e})")]
    NoConvergence { nodes: usize, change: f64 },
    #[error("division by zero: tan(theta1) vanishes")]
    DivisionByZero,
    #[error("Bloch argument undefined at k = {k}: n1 and n2 both vanish")]
    UndefinedArgument { k: f64 },
    #[error("theta1 = {0} makes tan(theta1) vanish")]
    DegenerateTheta1(f64),
    #[error("operation requires SSQW parameters, got {0}")]
    WrongVariant(&'static str),
    #[error("overlap modulus {0:e} too small to define a phase")]
    VanishingOverlap(f64),
    #[error("ambiguous time binning: {0}")]
    AmbiguousBinning(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
