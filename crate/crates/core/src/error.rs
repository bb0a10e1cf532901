use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A matrix that must be Hermitian fails the tolerance check.
    #[error("matrix is not hermitian (max |M - M^dag| = {0:.3e})")]
    InvalidMatrix(f64),
    /// A matrix that must be unitary fails the tolerance check.
    #[error("matrix is not unitary (max |U^dag U - I| = {0:.3e})")]
    NotUnitary(f64),
    /// Parameters do not satisfy the enforced special-case pattern
    /// (second detuning twice the first, equal couplings and phases).
    #[error("parameters violate the special-case pattern: {0}")]
    NotSpecialCase(String),
    /// An inverse trigonometric argument left its domain by more than the
    /// clamping tolerance.
    #[error("arccos/arcsin argument {0} outside [-1, 1] beyond tolerance")]
    NumericalDomain(f64),
    /// A unitary-log eigenphase sits on the principal-branch cut.
    #[error("unitary log: eigenphase at the principal-branch cut")]
    BranchAmbiguity,
    /// The resonance condition degenerates (division by an exact zero with a
    /// nonzero numerator).
    #[error("no solution: degenerate division in resonance condition")]
    NoSolution,
    /// A formula divides by a parameter that is zero here.
    #[error("degenerate division: {0} is zero")]
    DivisionDegenerate(&'static str),
    /// Probe periods for the coefficient fit stayed degenerate after retries.
    #[error("probe periods degenerate after {0} retries")]
    ProbeDegeneracy(usize),
    /// The extracted quantities violate the pure-coupling consistency
    /// conditions.
    #[error("consistency violation: {0}")]
    ConsistencyViolation(String),
    /// Effective coupling is zero; no finite pulse count exists.
    #[error("frozen dynamics: effective coupling is zero")]
    FrozenDynamics,
    /// The requested amplitude is unreachable within the kick budget.
    #[error("kick budget of {budget} periods exceeded (best population {best:.4})")]
    BudgetExceeded { budget: usize, best: f64 },
    /// The impulse matrix is zero, so no replacement duration exists.
    #[error("degenerate impulse: eigenvalue scale is zero")]
    DegenerateImpulse,
    /// A duration that must be positive is not.
    #[error("invalid duration: {0} must be > 0")]
    InvalidDuration(&'static str),
    /// A physical parameter fails its type invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
