use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-positive mean damping rate: (gamma1 + gamma2)/2 = {0}")]
    NonPositiveGamma0(f64),
    #[error("negative damping rate {name} = {value}")]
    NegativeDamping { name: &'static str, value: f64 },
    #[error("negative thermal occupancy nbar0 = {0}")]
    NegativeNoise(f64),
    #[error("non-finite value for {0}")]
    NonFinite(&'static str),
    #[error("singular stationary system (|det| = {det:e}); no stationary solution exists")]
    SingularSystem { det: f64 },
    #[error("regime violation: {0}")]
    RegimeViolation(String),
    #[error("malformed correlation matrix: {0}")]
    MalformedCM(String),
    #[error("criterion margin does not change sign on nbar0 in [0, {nbar_max}]")]
    NoSignChange { nbar_max: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
