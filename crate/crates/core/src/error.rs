//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coupling list has length {got}, expected {expected} for {sites} sites")]
    LengthMismatch {
        expected: usize,
        got: usize,
        sites: usize,
    },

    #[error("chain must have at least one site")]
    EmptyChain,

    #[error("non-finite {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("site index {site} out of range for {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("bond index {bond} out of range for {bonds} bonds")]
    BondOutOfRange { bond: usize, bonds: usize },

    #[error("range [{start}, {end}] is not a reflection-symmetric domain: {reason}")]
    InvalidDomain {
        start: usize,
        end: usize,
        reason: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("chain sizes differ: {a} vs {b}")]
    SizeMismatch { a: usize, b: usize },

    #[error("spectrum dimension {spectrum} does not match chain size {chain}")]
    DimensionMismatch { chain: usize, spectrum: usize },

    #[error(
        "eigenvalue is degenerate (nearest gap {gap:.3e}); CP component formula is undefined there"
    )]
    DegenerateEigenvalue { gap: f64 },

    #[error("spectrum has a degenerate pair (gap {gap:.3e}); eigenvector-based relation is basis-dependent there")]
    DegenerateSpectrum { gap: f64 },

    #[error("unsupported on-site degeneracy involving sites {sites:?}: only isolated adjacent pairs are expansible")]
    UnsupportedDegeneracy { sites: Vec<usize> },

    #[error("site {site} is part of a degenerate group; nondegenerate series is undefined")]
    DegenerateSite { site: usize },

    #[error("sites {a} and {b} do not form an adjacent degenerate pair")]
    NotAdjacentDegenerate { a: usize, b: usize },

    #[error("eigenvalue tracks become indistinguishable at center coupling {eps_c:.6e}")]
    TrackingAmbiguity { eps_c: f64 },
}
