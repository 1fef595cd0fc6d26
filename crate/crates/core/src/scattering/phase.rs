//! Phase shifts δ_ℓ(λ) and their continuous-in-energy branch.
//!
//! For each (ℓ, k) the regular solution (u ~ r^{ℓ+1} at the origin) is pushed
//! out through the potential with Numerov and matched against the free
//! Riccati–Bessel pair at two exterior points:
//!
//! ```text
//! tan δ = (Ŝ(kr₁) u₂ − Ŝ(kr₂) u₁) / (Ĉ(kr₂) u₁ − Ĉ(kr₁) u₂)
//! ```
//!
//! which fixes δ mod π. The table lifts this to the continuous branch by
//! anchoring δ_ℓ(λ_max) to the representative nearest 0 (Born decay) and
//! continuing downward in energy, refining the grid wherever adjacent values
//! jump too much.
//!
//! Step sizes: one uniform step per (ℓ, k), snapped so potential
//! discontinuities land on grid nodes; the step scales with 1/k so the local
//! wave is always resolved.

use super::bessel::riccati;
use super::numerov;
use super::potential::Potential;
use super::ScatteringError;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    /// Base radial step.
    pub h_target: f64,
    /// Upper bound on k·h (points per radian of free phase).
    pub wave_resolution: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams { h_target: 0.003, wave_resolution: 0.03 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points_per_decade: usize,
    /// Refinement trigger on adjacent |Δδ| (radians).
    pub max_jump: f64,
    pub max_refine_passes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            lambda_min: 1e-8,
            lambda_max: 400.0,
            points_per_decade: 160,
            max_jump: 0.05 * PI,
            max_refine_passes: 14,
        }
    }
}

/// δ_ℓ(k) mod π, in (−π/2, π/2].
pub fn phase_shift(
    v: &Potential,
    l: usize,
    k: f64,
    params: &SolverParams,
) -> Result<f64, ScatteringError> {
    assert!(k > 0.0, "phase shifts need k > 0");
    let mut h = params.h_target.min(params.wave_resolution / k);
    for attempt in 0..3 {
        match phase_shift_with_step(v, l, k, h) {
            Some(d) => return Ok(d),
            None => {
                // matching determinant singular: refine and retry
                h *= 0.5;
                let _ = attempt;
            }
        }
    }
    Err(ScatteringError::MatchingSingular { l, k })
}

fn phase_shift_with_step(v: &Potential, l: usize, k: f64, h_req: f64) -> Option<f64> {
    // snap the step so the first discontinuity is a grid node (all integer
    // multiples of it then align too)
    let breaks = v.breakpoints();
    let h = match breaks.first() {
        Some(&b) => b / (b / h_req).ceil(),
        None => h_req,
    };
    let r_start = h;
    // first matching radius: first grid point at or beyond the potential range
    let r_pot = v.r_max();
    let i1 = ((r_pot - r_start) / h).ceil() as usize + 1;
    let r1 = r_start + i1 as f64 * h;
    // second matching radius about a quarter free wavelength further out
    let di = ((PI / (2.0 * k)) / h).ceil().max(16.0) as usize;
    let r2 = r_start + (i1 + di) as f64 * h;
    let lf = (l * (l + 1)) as f64;
    let q = |r: f64| lf / (r * r) + v.eval(r) - k * k;
    // series start u = r^{l+1}(1 + a r²), a = (V(r0) − k²)/(4l+6)
    let a = (v.eval(r_start) - k * k) / (4.0 * l as f64 + 6.0);
    let u0 = 1.0 + a * r_start * r_start;
    let r_next = r_start + h;
    let u1 = (r_next / r_start).powi(l as i32 + 1) * (1.0 + a * r_next * r_next);
    // integrate to r1, record, continue to r2
    let first = numerov::integrate(q, r_start, h, i1 - 1, u0, u1, false);
    let u_r1 = first.u_last;
    let second = numerov::integrate(q, first.r_last - h, h, di, first.u_prev, first.u_last, false);
    let u_r2 = second.u_last;
    debug_assert!((second.r_last - r2).abs() < 1e-9 * (1.0 + r2));
    let lmax = l;
    let (s1, c1) = riccati(lmax, k * r1);
    let (s2, c2) = riccati(lmax, k * r2);
    let num = s1[l] * u_r2 - s2[l] * u_r1;
    let den = c2[l] * u_r1 - c1[l] * u_r2;
    let scale = (s1[l].abs() + s2[l].abs() + c1[l].abs() + c2[l].abs())
        * (u_r1.abs() + u_r2.abs());
    if num.abs() + den.abs() <= 1e-250 * scale.max(1e-250) {
        return None;
    }
    let mut d = num.atan2(den);
    // fold to (−π/2, π/2]
    if d > PI / 2.0 {
        d -= PI;
    } else if d <= -PI / 2.0 {
        d += PI;
    }
    Some(d)
}

/// Continuous-branch phase shifts on a shared energy grid.
#[derive(Debug, Clone)]
pub struct PhaseShiftTable {
    /// energies λ = k², ascending
    pub lambdas: Vec<f64>,
    /// deltas[l][i]: continuous branch of δ_ℓ(λ_i)
    pub deltas: Vec<Vec<f64>>,
    pub refine_passes_used: usize,
}

impl PhaseShiftTable {
    pub fn channels(&self) -> usize {
        self.deltas.len()
    }

    /// S-matrix eigenvalue e^{2iδ_ℓ(λ_i)}.
    pub fn s_value(&self, l: usize, i: usize) -> num_complex::Complex64 {
        num_complex::Complex64::from_polar(1.0, 2.0 * self.deltas[l][i])
    }
}

fn geometric_grid(spec: &GridSpec) -> Vec<f64> {
    let decades = (spec.lambda_max / spec.lambda_min).log10();
    let n = (decades * spec.points_per_decade as f64).ceil() as usize + 1;
    let ratio = (spec.lambda_max / spec.lambda_min).powf(1.0 / (n - 1) as f64);
    let mut v = Vec::with_capacity(n);
    let mut x = spec.lambda_min;
    for _ in 0..n {
        v.push(x);
        x *= ratio;
    }
    *v.last_mut().unwrap() = spec.lambda_max;
    v
}

fn lift_branch(raw: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; raw.len()];
    let last = raw.len() - 1;
    out[last] = raw[last]; // already folded near 0
    for i in (0..last).rev() {
        let n = ((out[i + 1] - raw[i]) / PI).round();
        out[i] = raw[i] + PI * n;
    }
    out
}

/// Build the table for channels ℓ = 0..n_channels−1 over the grid, with
/// adaptive refinement where the branch moves fast.
pub fn build_table(
    v: &Potential,
    n_channels: usize,
    grid: &GridSpec,
    solver: &SolverParams,
) -> Result<PhaseShiftTable, ScatteringError> {
    v.validate().map_err(ScatteringError::BadPotential)?;
    let mut lambdas = geometric_grid(grid);
    let raw_for = |lams: &[f64], l: usize| -> Result<Vec<f64>, ScatteringError> {
        lams.par_iter()
            .map(|&lam| phase_shift(v, l, lam.sqrt(), solver))
            .collect()
    };
    let mut raw: Vec<Vec<f64>> = (0..n_channels)
        .map(|l| raw_for(&lambdas, l))
        .collect::<Result<_, _>>()?;
    let mut passes = 0usize;
    loop {
        let deltas: Vec<Vec<f64>> = raw.iter().map(|r| lift_branch(r)).collect();
        // anchor sanity: top raw value must be safely inside one branch
        for (l, d) in deltas.iter().enumerate() {
            let top = d.last().unwrap().abs();
            if top > 0.45 * PI {
                return Err(ScatteringError::BranchAnchor { l, delta: top });
            }
        }
        let mut bad = Vec::new();
        for i in 0..lambdas.len() - 1 {
            let jump = deltas
                .iter()
                .map(|d| (d[i + 1] - d[i]).abs())
                .fold(0.0, f64::max);
            if jump > grid.max_jump {
                bad.push(i);
            }
        }
        if bad.is_empty() || passes >= grid.max_refine_passes {
            // final continuity requirement: |Δδ| < π/2 everywhere
            for i in 0..lambdas.len() - 1 {
                for d in &deltas {
                    if (d[i + 1] - d[i]).abs() >= PI / 2.0 {
                        return Err(ScatteringError::Resolution(format!(
                            "branch jump {:.3} rad at λ ∈ [{:.3e}, {:.3e}] after {passes} refinement passes",
                            (d[i + 1] - d[i]).abs(),
                            lambdas[i],
                            lambdas[i + 1]
                        )));
                    }
                }
            }
            return Ok(PhaseShiftTable { lambdas, deltas, refine_passes_used: passes });
        }
        // insert geometric midpoints of all offending intervals
        let mids: Vec<f64> = bad.iter().map(|&i| (lambdas[i] * lambdas[i + 1]).sqrt()).collect();
        let mid_raws: Vec<Vec<f64>> = (0..n_channels)
            .map(|l| raw_for(&mids, l))
            .collect::<Result<_, _>>()?;
        let mut merged = Vec::with_capacity(lambdas.len() + mids.len());
        let mut merged_raw: Vec<Vec<f64>> = vec![Vec::new(); n_channels];
        let mut mi = 0usize;
        for i in 0..lambdas.len() {
            merged.push(lambdas[i]);
            for l in 0..n_channels {
                merged_raw[l].push(raw[l][i]);
            }
            if mi < bad.len() && bad[mi] == i {
                merged.push(mids[mi]);
                for l in 0..n_channels {
                    merged_raw[l].push(mid_raws[l][mi]);
                }
                mi += 1;
            }
        }
        lambdas = merged;
        raw = merged_raw;
        passes += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::potential::Potential;

    /// Closed-form s-wave phase shift of the attractive square well:
    /// K cot(Ka) = k cot(ka + δ), K = sqrt(k² + V₀).
    fn square_well_delta0(v0: f64, a: f64, k: f64) -> f64 {
        let kk = (k * k + v0).sqrt();
        let rhs = kk * (kk * a).tan().recip(); // K cot(Ka)
        // k cot(ka + δ) = rhs  =>  δ = acot(rhs/k) − ka (mod π)
        let cot_inv = (k / rhs).atan(); // atan(tan(ka+δ)) up to branch
        let mut d = cot_inv - k * a;
        while d > PI / 2.0 {
            d -= PI;
        }
        while d <= -PI / 2.0 {
            d += PI;
        }
        d
    }

    #[test]
    fn zero_potential_gives_zero_shift() {
        let v = Potential::SquareWell { depth: 0.0, radius: 1.0 };
        let params = SolverParams::default();
        for l in 0..4 {
            for k in [0.05, 1.0, 7.0] {
                let d = phase_shift(&v, l, k, &params).unwrap();
                assert!(d.abs() < 1e-9, "l={l} k={k}: {d}");
            }
        }
    }

    #[test]
    fn square_well_matches_closed_form() {
        let (v0, a) = (4.0, 1.0);
        let v = Potential::SquareWell { depth: v0, radius: a };
        let params = SolverParams::default();
        for k in [0.3, 0.9, 2.1, 5.0] {
            let got = phase_shift(&v, 0, k, &params).unwrap();
            let exact = square_well_delta0(v0, a, k);
            assert!(
                (got - exact).abs() < 1e-6,
                "k={k}: numerov {got} vs closed form {exact}"
            );
        }
    }

    #[test]
    fn exponential_well_matches_refined_oracle() {
        // Richardson-extrapolated fine-step oracle
        let v = Potential::Exponential { strength: 3.0, range: 1.0 };
        for (l, k) in [(0usize, 0.8), (1, 1.5)] {
            let coarse = SolverParams { h_target: 0.004, wave_resolution: 0.04 };
            let got = phase_shift(&v, l, k, &coarse).unwrap();
            let fine = SolverParams { h_target: 0.001, wave_resolution: 0.01 };
            let finer = SolverParams { h_target: 0.0005, wave_resolution: 0.005 };
            let d1 = phase_shift(&v, l, k, &fine).unwrap();
            let d2 = phase_shift(&v, l, k, &finer).unwrap();
            let oracle = (16.0 * d2 - d1) / 15.0;
            assert!((got - oracle).abs() < 1e-6, "l={l} k={k}: {got} vs {oracle}");
        }
    }

    #[test]
    fn step_halving_changes_little() {
        let v = Potential::SquareWell { depth: 5.5, radius: 1.0 };
        let base = SolverParams::default();
        let halved = SolverParams {
            h_target: base.h_target / 2.0,
            wave_resolution: base.wave_resolution / 2.0,
        };
        for (l, k) in [(0usize, 0.5), (1, 2.0), (2, 6.0)] {
            let d1 = phase_shift(&v, l, k, &base).unwrap();
            let d2 = phase_shift(&v, l, k, &halved).unwrap();
            assert!((d1 - d2).abs() < 1e-6, "l={l} k={k}: {d1} vs {d2}");
        }
    }

    #[test]
    fn table_branch_is_continuous_and_anchored() {
        let v = Potential::SquareWell { depth: (0.75 * PI).powi(2), radius: 1.0 };
        let grid = GridSpec { lambda_min: 1e-6, points_per_decade: 60, ..Default::default() };
        let table = build_table(&v, 2, &grid, &SolverParams::default()).unwrap();
        // one bound state: δ_0(λ_min) ≈ π, δ_0(λ_max) ≈ 0
        let d0 = &table.deltas[0];
        assert!((d0[0] - PI).abs() < 0.02, "{}", d0[0]);
        assert!(d0.last().unwrap().abs() < 0.2);
        for w in d0.windows(2) {
            assert!((w[1] - w[0]).abs() < PI / 2.0);
        }
        // no p-wave bound state: δ_1 starts near 0
        assert!(table.deltas[1][0].abs() < 0.05);
    }
}
