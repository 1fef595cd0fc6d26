//! Radial Schrödinger scattering in 3D (units 2m = ħ = 1, so H₀ = −Δ and
//! λ = k²).
//!
//! The pipeline: phase shifts δ_ℓ(λ) from Numerov integration of the radial
//! equation with Riccati–Bessel matching ([`phase`]), a two-route bound-state
//! census ([`census`]), and the winding-number form of Levinson's theorem on
//! the resulting S-matrix path ([`levinson`]):
//!
//! ```text
//! ∫₀^∞ dλ tr[i(S(λ)−1)† S′(λ)] = 2π Tr[P]
//! ```
//!
//! together with the corrected form ∫ {tr[iS†S′] − ν/√λ} dλ = 2π Tr[P] with
//! ν = ∫₀^∞ V(r) r² dr, and the time delay tr[−iS†S′] = Σ(2ℓ+1)·2δ_ℓ′.

pub mod bessel;
pub mod census;
pub mod levinson;
pub mod numerov;
pub mod phase;
pub mod potential;

pub use census::{bound_states, BoundStateCensus, CensusParams, ChannelCensus};
pub use levinson::{
    levinson_check, levinson_lhs, martin_form, time_delay, time_delay_curve, LevinsonReport,
    LhsResult, MartinResult,
};
pub use phase::{build_table, phase_shift, GridSpec, PhaseShiftTable, SolverParams};
pub use potential::Potential;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScatteringError {
    #[error("matching determinant singular for l={l}, k={k} after refinement")]
    MatchingSingular { l: usize, k: f64 },
    #[error("phase table unresolved: {0}")]
    Resolution(String),
    #[error("ambiguous census in channel l={l}: eigenvalue {eigenvalue:.3e} within {window:.1e} of threshold; change the potential or box parameters")]
    AmbiguousCensus { l: usize, eigenvalue: f64, window: f64 },
    #[error("census mismatch in channel l={l}: {sturm} negative eigenvalues vs {nodes} zero-energy nodes")]
    CensusMismatch { l: usize, sturm: usize, nodes: usize },
    #[error("branch anchor failed for l={l}: |delta(lambda_max)| = {delta:.3} too close to pi/2")]
    BranchAnchor { l: usize, delta: f64 },
    #[error("lambda->0 tail uncertainty {estimate:.3e} exceeds 1% of the integral; lower lambda_min or densify the low-energy grid")]
    TailTooLarge { estimate: f64 },
    #[error("Born truncation tail {estimate:.3e} exceeds 5%; raise l_max")]
    Truncation { estimate: f64 },
    #[error("invalid potential: {0}")]
    BadPotential(String),
}
