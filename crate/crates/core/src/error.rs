use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite numeric input")]
    NonFinite,
    #[error("lattice parameter must lie in the upper half-plane (im = {0})")]
    InvalidTau(f64),
    #[error("zero input where a nonzero value is required")]
    ZeroInput,
    #[error("torsion order must be positive")]
    InvalidOrder,
    #[error("point too close to the lattice (distance {0:e})")]
    PoleProximity(f64),
    #[error("{0} did not converge")]
    NonConvergence(&'static str),
    #[error("points do not sum to zero in the Jacobian (residual {0:e})")]
    NotZeroSum(f64),
    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),
    #[error("invalid bundle data: {0}")]
    InvalidClassData(&'static str),
    #[error("matrices do not commute (residual {0:e})")]
    NotCommuting(f64),
    #[error("det {which} differs from 1 (residual {residual:e})")]
    NotUnimodular { which: char, residual: f64 },
    #[error("eigenvalues cannot be separated or merged at tolerance (score {0:e})")]
    IndistinguishableEigenvalues(f64),
    #[error("commuting pair has no normal form of the three listed shapes")]
    UnsupportedJordanStructure,
    #[error("inadmissible weights: spread {0} is not below 1")]
    InadmissibleWeights(f64),
    #[error("flag point is not on the flag line (residual {0:e})")]
    FlagNotIncident(f64),
    #[error("flag is not stable in the requested chamber")]
    NotStableInChamber,
    #[error("three or more of the four cross-ratio arguments coincide")]
    TripleCoincidence,
    #[error("point is not on the line (residual {0:e})")]
    NotOnLine(f64),
    #[error("line is tangent to the cubic")]
    TangentLine,
    #[error("correspondence system is ill-conditioned (ratio {0:e})")]
    IllConditioned(f64),
}

impl Error {
    /// Stable machine-readable identifier, used by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonFinite => "NonFinite",
            Error::InvalidTau(_) => "InvalidTau",
            Error::ZeroInput => "ZeroInput",
            Error::InvalidOrder => "InvalidOrder",
            Error::PoleProximity(_) => "PoleProximity",
            Error::NonConvergence(_) => "NonConvergence",
            Error::NotZeroSum(_) => "NotZeroSum",
            Error::Degenerate(_) => "Degenerate",
            Error::InvalidClassData(_) => "InvalidClassData",
            Error::NotCommuting(_) => "NotCommuting",
            Error::NotUnimodular { .. } => "NotUnimodular",
            Error::IndistinguishableEigenvalues(_) => "IndistinguishableEigenvalues",
            Error::UnsupportedJordanStructure => "UnsupportedJordanStructure",
            Error::InadmissibleWeights(_) => "InadmissibleWeights",
            Error::FlagNotIncident(_) => "FlagNotIncident",
            Error::NotStableInChamber => "NotStableInChamber",
            Error::TripleCoincidence => "TripleCoincidence",
            Error::NotOnLine(_) => "NotOnLine",
            Error::TangentLine => "TangentLine",
            Error::IllConditioned(_) => "IllConditioned",
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
