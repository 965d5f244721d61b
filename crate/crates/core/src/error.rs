use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid success model: {0}")]
    InvalidModel(String),
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),
    #[error("agent set is empty")]
    EmptySet,
    #[error("agent index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("network is not unweighted")]
    NotUnweighted,
    #[error("team performance must be nonnegative, got {0}")]
    NegativePerformance(f64),
    #[error("capped-linear success probability reached its kink at Y = {0}")]
    KinkReached(f64),
    #[error("no equilibrium: alpha * beta * rho(Sigma G) = {0} >= 1 with linear P")]
    NoEquilibriumLinearP(f64),
    #[error("resolvent I - beta P'(y) Sigma G is singular")]
    SpectralInfeasible,
    #[error("subnetwork is singular (condition number {0:e})")]
    SingularSubnetwork(f64),
    #[error("active set cannot host a balanced positive allocation")]
    InvalidActiveSet,
    #[error("{n} agents exceed the enumeration cap of {cap}")]
    TooLargeForEnumeration { n: usize, cap: usize },
    #[error("no interior optimum for the residual-profit objective")]
    NoInteriorOptimum,
    #[error("beta * alpha = {beta_alpha} must be below k* = {k_star}")]
    InfeasibleComplementarity { beta_alpha: f64, k_star: f64 },
    #[error("active set changes under a perturbation of size {0:e}")]
    ActiveSetUnstable(f64),
    #[error("three-agent weights must satisfy 1 >= g13 >= g23 > 0")]
    BadNormalization,
    #[error("{0} out of range")]
    OutOfRange(String),
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
