//! Bound-state census with two independent counting routes.
//!
//! Route (a): negative eigenvalues of the finite-difference radial
//! Hamiltonian on [0, R_box] with Dirichlet ends, counted by Sturm pivots and
//! refined by bisection. Route (b): Sturm-oscillation node count of the
//! zero-energy regular solution, including the possible node beyond the
//! potential range read off the power-law tail u = A r^{ℓ+1} + B r^{−ℓ}.
//!
//! The census uses (a); any disagreement with (b) is an error, as is any
//! eigenvalue within the threshold window of zero (half-bound suspicion —
//! those are rejected, not modelled). Channels stop at the first ℓ with two
//! consecutive empty counts, which is safe because n_{ℓ+1} ≤ n_ℓ for central
//! potentials.

use super::numerov;
use super::potential::Potential;
use super::ScatteringError;
use crate::linalg::{tridiag_count_below, tridiag_eigenvalue};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CensusParams {
    /// Dirichlet box radius; 0 → automatic (max(4·r_max, 80)).
    pub r_box: f64,
    /// Finite-difference step.
    pub grid_step: f64,
    /// Half-width of the ambiguous window around E = 0.
    pub threshold_window: f64,
    /// Hard cap on partial waves scanned.
    pub l_cap: usize,
}

impl Default for CensusParams {
    fn default() -> Self {
        CensusParams { r_box: 0.0, grid_step: 0.01, threshold_window: 1e-8, l_cap: 24 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelCensus {
    pub l: usize,
    /// Number of bound states (negative eigenvalues).
    pub count: usize,
    /// The negative eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Zero-energy node count (independent route; equals `count`).
    pub node_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundStateCensus {
    pub channels: Vec<ChannelCensus>,
    /// Tr[P] = Σ_ℓ (2ℓ+1) n_ℓ.
    pub trace_p: i64,
}

impl BoundStateCensus {
    pub fn count(&self, l: usize) -> usize {
        self.channels.get(l).map(|c| c.count).unwrap_or(0)
    }

    /// Largest ℓ with a bound state, or None.
    pub fn top_occupied_channel(&self) -> Option<usize> {
        self.channels.iter().rev().find(|c| c.count > 0).map(|c| c.l)
    }
}

fn census_channel(
    v: &Potential,
    l: usize,
    params: &CensusParams,
) -> Result<ChannelCensus, ScatteringError> {
    let r_box = if params.r_box > 0.0 { params.r_box } else { (4.0 * v.r_max()).max(80.0) };
    let h = params.grid_step;
    let n = (r_box / h).round() as usize - 1;
    let lf = (l * (l + 1)) as f64;
    let inv_h2 = 1.0 / (h * h);
    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        let r = (i + 1) as f64 * h;
        diag.push(2.0 * inv_h2 + v.eval(r) + lf / (r * r));
    }
    let off = vec![-inv_h2; n - 1];
    let win = params.threshold_window;
    let below = tridiag_count_below(&diag, &off, -win);
    let upto = tridiag_count_below(&diag, &off, win);
    if upto != below {
        let e = tridiag_eigenvalue(&diag, &off, below, 1e-12);
        return Err(ScatteringError::AmbiguousCensus { l, eigenvalue: e, window: win });
    }
    let mut eigenvalues = Vec::with_capacity(below);
    for k in 0..below {
        eigenvalues.push(tridiag_eigenvalue(&diag, &off, k, 1e-12));
    }
    let node_count = zero_energy_nodes(v, l);
    if node_count != below {
        return Err(ScatteringError::CensusMismatch { l, sturm: below, nodes: node_count });
    }
    Ok(ChannelCensus { l, count: below, eigenvalues, node_count })
}

/// Node count of the zero-energy regular solution over (0, ∞).
fn zero_energy_nodes(v: &Potential, l: usize) -> usize {
    let r_end = v.r_max() * 1.05 + 2.0;
    let h = {
        let target: f64 = 0.002;
        match v.breakpoints().first() {
            Some(&b) => b / (b / target).ceil(),
            None => target,
        }
    };
    let lf = (l * (l + 1)) as f64;
    let q = |r: f64| lf / (r * r) + v.eval(r);
    let r0 = h;
    let a = v.eval(r0) / (4.0 * l as f64 + 6.0);
    let u0 = 1.0 + a * r0 * r0;
    let r1 = r0 + h;
    let u1 = (r1 / r0).powi(l as i32 + 1) * (1.0 + a * r1 * r1);
    let steps = ((r_end - r0) / h).ceil() as usize;
    let out = numerov::integrate(q, r0, h, steps, u0, u1, true);
    let mut nodes = out.nodes;
    // beyond r_end: u = A r^{l+1} + B r^{-l}; one more sign change iff the
    // growing coefficient disagrees in sign with u(r_end)
    let du = (out.u_last - out.u_prev) / out.step;
    let a_coeff = l as f64 * out.u_last + out.r_last * du;
    if a_coeff != 0.0 && out.u_last != 0.0 && a_coeff.signum() != out.u_last.signum() {
        nodes += 1;
    }
    nodes
}

/// Census over channels 0..=l_max_hint (extended until two consecutive empty
/// channels, capped by `params.l_cap`).
pub fn bound_states(
    v: &Potential,
    l_max_hint: usize,
    params: &CensusParams,
) -> Result<BoundStateCensus, ScatteringError> {
    v.validate().map_err(ScatteringError::BadPotential)?;
    let mut channels = Vec::new();
    let mut empty_run = 0usize;
    let mut l = 0usize;
    loop {
        let ch = census_channel(v, l, params)?;
        empty_run = if ch.count == 0 { empty_run + 1 } else { 0 };
        channels.push(ch);
        l += 1;
        if (l > l_max_hint && empty_run >= 2) || l > params.l_cap {
            break;
        }
    }
    let trace_p: i64 = channels.iter().map(|c| ((2 * c.l + 1) * c.count) as i64).sum();
    Ok(BoundStateCensus { channels, trace_p })
}
