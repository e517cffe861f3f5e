//! Spectral analysis of one-dimensional tight-binding chains with locally
//! reflection-symmetric domains.
//!
//! A chain is a real symmetric tridiagonal Hamiltonian: on-site energies on
//! the diagonal, nearest-neighbor couplings on the off-diagonals. When a
//! contiguous block of on-site energies is palindromic, the two halves of the
//! block are isospectral and the spectrum of the decoupled block consists of
//! degenerate pairs; switching on the coupling across the block's center bond
//! splits each pair linearly. This crate provides:
//!
//! - [`chain`]: chain and domain types, config parsing, palindrome detection
//! - [`tridiag`]: a dense symmetric tridiagonal eigensolver (implicit QL with
//!   Wilkinson shift), the numerical reference for everything else
//! - [`charpoly`]: characteristic-polynomial machinery in overflow-safe
//!   sign/log form — squared eigenvector components from CP ratios, Sturm
//!   counts, bisection eigenvalues, sign recovery
//! - [`weak_coupling`]: second-order expansion of eigenvalues and squared
//!   eigenvector components around zero coupling, for nondegenerate sites and
//!   adjacent degenerate pairs
//! - [`symmetry`]: isospectrality checks, center-coupling sweeps with pair
//!   tracking, splitting slopes, eigenstate maps, and domain-weight
//!   localization counting

pub mod chain;
pub mod charpoly;
pub mod error;
pub mod symmetry;
pub mod tridiag;
pub mod weak_coupling;

pub use chain::{build, Chain, ChainConfig, CouplingSpec, LSDomain, SymmetryKind};
pub use error::Error;
pub use tridiag::Spectrum;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
