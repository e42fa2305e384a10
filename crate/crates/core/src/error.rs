use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("photon count {0} outside supported range 1..=4")]
    PhotonCount(usize),

    #[error("photon index {index} out of range for a {n_photons}-photon state")]
    PhotonOutOfRange { index: usize, n_photons: usize },

    #[error("photon pair ({0}, {1}) is not a pair of distinct photons in range")]
    InvalidPair(usize, usize),

    #[error("amplitudes have squared norm {0}, expected 1")]
    NotNormalized(f64),

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("matrix '{0}' is not unitary")]
    NotUnitary(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("port phase sums are not pairwise distinguishable modulo 2π for theta = {0}")]
    DegeneratePortPhases(f64),

    #[error("candidate list is empty")]
    EmptyCandidates,

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error("analysis is not deterministic: branches disagree on the label")]
    NotDeterministic,
}
