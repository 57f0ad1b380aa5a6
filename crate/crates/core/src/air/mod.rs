//! Achievable information rates by mismatched decoding with a 4D Gaussian
//! auxiliary channel, plus a reference AWGN mutual-information oracle.

mod aux;
mod kernel;
mod mi;
mod oracle;

pub use aux::{
    fit_gain, fit_gaussian_auxiliary, AuxChannel, Covariance, CovarianceMode, FitOptions, Gain,
    GainModel, VARIANCE_FLOOR,
};
pub use mi::{information_densities, mutual_information, AirReport, JACKKNIFE_GROUPS};
pub use oracle::{awgn_mi_oracle, AwgnOracle, OracleEstimate};
