use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("dimension N = {0} is below 5")]
    DimensionTooSmall(usize),
    #[error("exponent {name} = {value} must lie in [2, {upper})")]
    ExponentOutOfRange { name: &'static str, value: f64, upper: f64 },
    #[error("mean-curvature ratio D = {0} must exceed 1")]
    NonPhysicalD(f64),
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    #[error("profile {profile} is not positive inside the window (minimum {min})")]
    ProfileNotPositive { profile: &'static str, min: f64 },
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BubbleError {
    #[error("bubble center sits at the origin; the radial derivative is undefined")]
    CenterAtOrigin,
    #[error("kernel index {index} out of range for N = {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("point is not on the boundary (y_N = {0})")]
    NotOnBoundary(f64),
    #[error("point projects onto the ring axis; sector undefined")]
    DegenerateAxis,
    #[error("Green's function evaluated at coincident points")]
    CoincidentPoints,
    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("tolerance not met: estimate {estimate:e} exceeds target {target:e} after {evals} evaluations")]
    ToleranceNotMet { estimate: f64, target: f64, evals: usize },
    #[error("integrand symmetry {integrand} does not admit reduction {reduction}")]
    SymmetryMismatch { integrand: &'static str, reduction: &'static str },
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoeffError {
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("regime is not admissible for the given signs of c0, d0")]
    InadmissibleRegime,
    #[error("least-squares fit is ill-conditioned: {0}")]
    FitIllConditioned(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bubble(#[from] BubbleError),
    #[error("(r, Lambda) = ({r}, {lambda}) lies outside the box D_j")]
    OutsideBox { r: f64, lambda: f64 },
    #[error("sampling budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("weighted norm requested on an empty grid")]
    EmptyGrid,
    #[error("least-squares fit is ill-conditioned: {0}")]
    FitIllConditioned(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("regime is not admissible; no critical point is predicted")]
    NotAdmissible,
    #[error("no interior critical point found in the box: {0}")]
    NoInteriorCriticalPoint(String),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
