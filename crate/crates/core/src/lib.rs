//! Desk-scale numerical verification of topological boundary-map identities.
//!
//! Three laboratories share one theme — an integer attached to a "bulk" object
//! equals an integer attached to a "boundary" object:
//!
//! * [`cocycle`] / [`algebra`] — magnetic flux 2-cocycles `ω^B` and the twisted
//!   crossed-product convolution they define, including the exact decomposition
//!   of an n-dimensional magnetic algebra as an iterated (n−1)+1 product.
//! * [`pairings`] — finite-matrix Connes pairings: antisymmetrised trace
//!   formulas pairing projections (even) and unitaries (odd) with traces and
//!   derivations, plus winding numbers of unitary paths.
//! * [`hall`] — the Hofstadter model: plaquette Chern numbers, integrated
//!   density of states, cylinder edge spectra, spectral flow, and Streda's
//!   formula.
//! * [`scattering`] — radial Schrödinger scattering: phase shifts, the on-shell
//!   S-matrix, bound-state censuses, and the equality of the S-matrix winding
//!   integral with 2π times the number of bound states.
//!
//! [`report`] and [`suites`] provide the deterministic check/report plumbing
//! used by the command-line runner.

pub mod algebra;
pub mod cocycle;
pub mod hall;
pub mod linalg;
pub mod pairings;
pub mod report;
pub mod scattering;
pub mod suites;

pub use num_complex::Complex64;
