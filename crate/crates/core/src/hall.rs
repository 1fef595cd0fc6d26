//! Hofstadter-model laboratory: bulk Chern numbers, integrated density of
//! states, cylinder edge spectra and spectral flow, and Streda's formula.
//!
//! Conventions (pinned once, everything else follows):
//!
//! * Landau gauge with the flux phase attached to x-directed hops, so the
//!   magnetic Bloch Hamiltonian at flux φ = p/q is the q×q matrix
//!   `H(k₁,k₂)_{jj} = −2t cos(k₁ + 2πφ j)` with −t on the off-diagonal and a
//!   Bloch phase e^{±ik₂} on the corner. The cylinder (open in y) is momentum
//!   diagonal in x with the same diagonal kernel.
//! * Orientation is anchored by the lowest band at φ = 1/3 having Chern
//!   number +1; the Diophantine labels p·s_r ≡ r (mod q), |s_r| ≤ q/2 then
//!   agree with the plaquette algorithm for every gap.
//! * Edge spectral flow counts upward crossings (+1) of the gap centre by
//!   branches attributed to the bottom edge as k₁ sweeps the Brillouin zone.
//!
//! Two independent Chern routes are kept deliberately separate: the plaquette
//! Berry-curvature algorithm on Bloch bundles, and the real-space pairing
//! 𝒯(P[δ₁P, δ₂P])/(2πi) with covariant finite-difference derivations
//! δ_j(a) = L(U_j a U_j† − a) on an L×L torus. The latter is evaluated in an
//! exact x-momentum block decomposition (same value as the dense formula, at
//! a fraction of the cost); the dense route stays available for cross checks.

use crate::linalg::{pairwise_sum, sorted_symmetric_eigen};
use crate::pairings::{self, DerivationDescriptor, TraceDescriptor};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HallError {
    #[error("flux must satisfy 0 <= p < q, gcd(p,q) = 1; got {p}/{q}")]
    BadFlux { p: i64, q: i64 },
    #[error("grid parameter {name} = {got} must be at least q = {q}")]
    GridTooSmall { name: &'static str, got: usize, q: i64 },
    #[error("bands {lo}..={hi} touch their complement at k = ({k1:.4}, {k2:.4}): separation {sep:.3e}")]
    Degenerate { lo: usize, hi: usize, k1: f64, k2: f64, sep: f64 },
    #[error("no spectral gap with index {index} at flux {p}/{q} (found {found} open gaps)")]
    NoSuchGap { index: usize, p: i64, q: i64, found: usize },
    #[error("energy {e} does not lie in a spectral gap")]
    NotInGap { e: f64 },
    #[error("plaquette sum {sum} is {dev:.2e} away from an integer; refine the grid")]
    NotInteger { sum: f64, dev: f64 },
    #[error("ambiguous edge attribution for {count} crossing branches (weights below {threshold}): {details}")]
    AmbiguousLocalization { count: usize, threshold: f64, details: String },
    #[error("fluxes coincide; Streda slope denominator is zero")]
    ZeroDenominator,
    #[error("gap with label (n0={n0}, sigma={sigma}) closed or out of range at flux {p}/{q}")]
    GapTracking { n0: i64, sigma: i64, p: i64, q: i64 },
    #[error(transparent)]
    Pairing(#[from] pairings::PairingError),
}

/// Hofstadter model family at rational flux p/q per plaquette.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HofstadterSpec {
    pub p: i64,
    pub q: i64,
    /// hopping amplitude
    pub t: f64,
}

impl HofstadterSpec {
    pub fn new(p: i64, q: i64) -> Result<Self, HallError> {
        if q < 1 || p < 0 || p >= q || gcd(p.unsigned_abs(), q.unsigned_abs()) != 1 {
            return Err(HallError::BadFlux { p, q });
        }
        Ok(HofstadterSpec { p, q, t: 1.0 })
    }

    pub fn flux(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// q×q magnetic Bloch Hamiltonian at (k₁, k₂), both in [0, 2π).
    pub fn bloch_hamiltonian(&self, k1: f64, k2: f64) -> DMatrix<Complex64> {
        let q = self.q as usize;
        let phi = self.flux();
        let mut h = DMatrix::<Complex64>::zeros(q, q);
        for j in 0..q {
            h[(j, j)] = Complex64::new(-2.0 * self.t * (k1 + 2.0 * PI * phi * j as f64).cos(), 0.0);
        }
        if q == 1 {
            // single site: both hops wrap
            h[(0, 0)] += Complex64::new(-2.0 * self.t * k2.cos(), 0.0) * Complex64::new(1.0, 0.0);
            return h;
        }
        for j in 0..q - 1 {
            h[(j, j + 1)] += Complex64::new(-self.t, 0.0);
            h[(j + 1, j)] += Complex64::new(-self.t, 0.0);
        }
        h[(q - 1, 0)] += Complex64::new(-self.t, 0.0) * Complex64::from_polar(1.0, k2);
        h[(0, q - 1)] += Complex64::new(-self.t, 0.0) * Complex64::from_polar(1.0, -k2);
        h
    }

    /// W×W cylinder Hamiltonian (x periodic with momentum k, y open).
    pub fn cylinder_hamiltonian(&self, k: f64, width: usize) -> DMatrix<f64> {
        let phi = self.flux();
        let mut h = DMatrix::<f64>::zeros(width, width);
        for y in 0..width {
            h[(y, y)] = -2.0 * self.t * (k + 2.0 * PI * phi * y as f64).cos();
        }
        for y in 0..width - 1 {
            h[(y, y + 1)] = -self.t;
            h[(y + 1, y)] = -self.t;
        }
        h
    }

    /// L-site periodic Harper chain at x-momentum k (the x-Fourier block of
    /// the L×L torus Hamiltonian).
    pub fn harper_chain(&self, k: f64, l: usize) -> DMatrix<f64> {
        let phi = self.flux();
        let mut h = DMatrix::<f64>::zeros(l, l);
        for y in 0..l {
            h[(y, y)] = -2.0 * self.t * (k + 2.0 * PI * phi * y as f64).cos();
        }
        for y in 0..l {
            let yn = (y + 1) % l;
            h[(y, yn)] += -self.t;
            h[(yn, y)] += -self.t;
        }
        h
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Bulk band data on an M×M Brillouin grid: per-band ranges, the full sorted
/// eigenvalue list, and the open gaps.
#[derive(Debug, Clone)]
pub struct BandData {
    pub spec: HofstadterSpec,
    pub m: usize,
    pub band_min: Vec<f64>,
    pub band_max: Vec<f64>,
    pub all_sorted: Vec<f64>,
}

/// An open spectral gap between bands `below` and `below+1` (0-based count of
/// bands beneath it starts at 1).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Gap {
    /// 1-based gap index: number of bands below.
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Gap {
    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Minimal band separation treated as an open gap (10× the target 1e-8
/// numerical tolerance).
pub const GAP_DETECTION_THRESHOLD: f64 = 1e-7;

/// Diagonalise the Bloch family on an M×M grid.
pub fn build_bulk(spec: &HofstadterSpec, m: usize) -> Result<BandData, HallError> {
    if (m as i64) < spec.q {
        return Err(HallError::GridTooSmall { name: "M", got: m, q: spec.q });
    }
    let q = spec.q as usize;
    let per_k: Vec<Vec<f64>> = (0..m * m)
        .into_par_iter()
        .map(|idx| {
            let (a, b) = (idx / m, idx % m);
            let k1 = 2.0 * PI * a as f64 / m as f64;
            let k2 = 2.0 * PI * b as f64 / m as f64;
            crate::linalg::symmetric_eigenvalues_complex(spec.bloch_hamiltonian(k1, k2))
        })
        .collect();
    let mut band_min = vec![f64::INFINITY; q];
    let mut band_max = vec![f64::NEG_INFINITY; q];
    let mut all = Vec::with_capacity(q * m * m);
    for ev in &per_k {
        for (b, &e) in ev.iter().enumerate() {
            band_min[b] = band_min[b].min(e);
            band_max[b] = band_max[b].max(e);
            all.push(e);
        }
    }
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(BandData { spec: *spec, m, band_min, band_max, all_sorted: all })
}

impl BandData {
    /// Open gaps, in energy order.
    pub fn gaps(&self) -> Vec<Gap> {
        let mut out = Vec::new();
        for b in 0..self.band_max.len() - 1 {
            let lo = self.band_max[b];
            let hi = self.band_min[b + 1];
            if hi - lo > GAP_DETECTION_THRESHOLD {
                out.push(Gap { index: b + 1, lo, hi });
            }
        }
        out
    }

    pub fn gap(&self, index: usize) -> Result<Gap, HallError> {
        let gaps = self.gaps();
        gaps.iter()
            .find(|g| g.index == index)
            .copied()
            .ok_or(HallError::NoSuchGap {
                index,
                p: self.spec.p,
                q: self.spec.q,
                found: gaps.len(),
            })
    }

    /// Integrated density of states: fraction of states below `e_f` per site.
    pub fn ids(&self, e_f: f64) -> f64 {
        let below = self.all_sorted.partition_point(|&e| e < e_f);
        below as f64 / self.all_sorted.len() as f64
    }
}

/// TKNN Diophantine label of gap r at flux p/q: the unique s_r with
/// p·s_r ≡ r (mod q) and |s_r| ≤ q/2, plus the integer offset n₀ so that
/// IDS = n₀ + s_r·φ on the gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapLabel {
    pub n0: i64,
    pub sigma: i64,
}

pub fn diophantine_label(spec: &HofstadterSpec, gap_index: usize) -> GapLabel {
    let q = spec.q;
    let r = gap_index as i64;
    let mut sigma = 0;
    for s in -(q / 2)..=(q / 2) {
        if (spec.p * s - r).rem_euclid(q) == 0 {
            sigma = s;
            break;
        }
    }
    GapLabel { n0: (r - sigma * spec.p) / q, sigma }
}

/// Chern number of the band bundle `bands` (contiguous, 0-based, inclusive)
/// by the plaquette field-strength algorithm on an M×M grid. The plaquette
/// sum is an exact integer multiple of 2π when the bundle stays separated;
/// non-integer sums and on-grid degeneracies are reported as errors.
pub fn chern_berry(
    spec: &HofstadterSpec,
    m: usize,
    bands: (usize, usize),
) -> Result<i64, HallError> {
    if (m as i64) < spec.q {
        return Err(HallError::GridTooSmall { name: "M", got: m, q: spec.q });
    }
    let (lo, hi) = bands;
    let q = spec.q as usize;
    assert!(lo <= hi && hi < q);
    let nb = hi - lo + 1;
    // eigenvector bundles on the grid
    let vecs: Vec<DMatrix<Complex64>> = (0..m * m)
        .into_par_iter()
        .map(|idx| {
            let (a, b) = (idx / m, idx % m);
            let k1 = 2.0 * PI * a as f64 / m as f64;
            let k2 = 2.0 * PI * b as f64 / m as f64;
            let h = spec.bloch_hamiltonian(k1, k2);
            let (vals, v) = crate::linalg::sorted_hermitian_eigen(h);
            // record separation for degeneracy detection in column 0 imag? no:
            // stash eigenvalues alongside via first row? keep simple: recompute
            let _ = vals;
            v.columns(lo, nb).into_owned()
        })
        .collect();
    // degeneracy check (grid-wise band separation)
    let seps: Vec<(f64, f64, f64)> = (0..m * m)
        .into_par_iter()
        .map(|idx| {
            let (a, b) = (idx / m, idx % m);
            let k1 = 2.0 * PI * a as f64 / m as f64;
            let k2 = 2.0 * PI * b as f64 / m as f64;
            let vals =
                crate::linalg::symmetric_eigenvalues_complex(spec.bloch_hamiltonian(k1, k2));
            let mut sep = f64::INFINITY;
            if lo > 0 {
                sep = sep.min(vals[lo] - vals[lo - 1]);
            }
            if hi + 1 < q {
                sep = sep.min(vals[hi + 1] - vals[hi]);
            }
            (k1, k2, sep)
        })
        .collect();
    for (k1, k2, sep) in &seps {
        if *sep < 1e-10 {
            return Err(HallError::Degenerate { lo, hi, k1: *k1, k2: *k2, sep: *sep });
        }
    }
    let link = |a: usize, b: usize, da: usize, db: usize| -> Complex64 {
        let from = &vecs[a * m + b];
        let to = &vecs[((a + da) % m) * m + (b + db) % m];
        (from.adjoint() * to).determinant()
    };
    let mut fluxes = Vec::with_capacity(m * m);
    for a in 0..m {
        for b in 0..m {
            let u1 = link(a, b, 1, 0);
            let u2 = link((a + 1) % m, b, 0, 1);
            let u3 = link(a, (b + 1) % m, 1, 0);
            let u4 = link(a, b, 0, 1);
            fluxes.push((u1 * u2 / (u3 * u4)).arg());
        }
    }
    let total = pairwise_sum(&fluxes) / (2.0 * PI);
    let rounded = total.round();
    if (total - rounded).abs() > 1e-6 {
        return Err(HallError::NotInteger { sum: total, dev: (total - rounded).abs() });
    }
    Ok(rounded as i64)
}

/// Hall conductivity of a gap: cumulative Chern number of the bands below it.
pub fn sigma_h_of_gap(spec: &HofstadterSpec, m: usize, gap_index: usize) -> Result<i64, HallError> {
    chern_berry(spec, m, (0, gap_index - 1))
}

/// Result of the real-space (noncommutative) Chern evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct NcChern {
    /// Re[pair/(2πi)], the Chern-normalised pairing.
    pub value: f64,
    /// Im[pair/(2πi)], a diagnostic.
    pub imag_residual: f64,
    pub torus_size: usize,
    pub fermi_energy: f64,
    /// Width of the surrounding spectral gap relative to the 1/L resolution.
    pub gap_resolution_warning: bool,
}

/// 𝒯(P[δ₁P, δ₂P])/(2πi) on the L×L torus with E_F inside a bulk gap,
/// evaluated in the exact x-momentum block decomposition.
///
/// The result equals the dense-matrix pairing (see [`chern_nc_dense`]) to
/// rounding error; blocks make tori of side 30q–60q affordable.
pub fn chern_nc_at_energy(spec: &HofstadterSpec, l: usize, e_f: f64) -> Result<NcChern, HallError> {
    if (l as i64) < spec.q {
        return Err(HallError::GridTooSmall { name: "L", got: l, q: spec.q });
    }
    // projections per x-momentum block
    let projections: Vec<DMatrix<f64>> = (0..l)
        .into_par_iter()
        .map(|mk| {
            let k = 2.0 * PI * mk as f64 / l as f64;
            let (vals, vecs) = sorted_symmetric_eigen(spec.harper_chain(k, l));
            let occ = vals.partition_point(|&e| e < e_f);
            let v = vecs.columns(0, occ).into_owned();
            &v * v.transpose()
        })
        .collect();
    let scale = l as f64;
    let phases: Vec<Complex64> = (0..l)
        .map(|y| Complex64::from_polar(1.0, 2.0 * PI * y as f64 / l as f64))
        .collect();
    let traces: Vec<Complex64> = (0..l)
        .into_par_iter()
        .map(|mk| {
            let p = &projections[mk];
            let prev = &projections[(mk + l - 1) % l];
            // δ₁P block at k_m is L(P_{k−δ} − P_k); both real.
            let d1 = (prev - p) * scale;
            // δ₂P = L(u₂ P u₂† − P): phase-twisted entries.
            let pd1 = p * &d1;
            let d1p = &d1 * p;
            let mut acc = Complex64::default();
            for i in 0..l {
                for j in 0..l {
                    // d2[j,i] = L * (phases[j] * conj(phases[i]) - 1) * p[j,i]
                    let tw = phases[j] * phases[i].conj();
                    let d2ji = (tw - Complex64::new(1.0, 0.0)) * p[(j, i)] * scale;
                    acc += (Complex64::new(pd1[(i, j)], 0.0) - Complex64::new(d1p[(i, j)], 0.0))
                        * d2ji;
                }
            }
            acc
        })
        .collect();
    // tr(P d1 d2 − P d2 d1) = tr((P d1 − d1 P) d2) by cyclicity of the trace.
    let pair = crate::linalg::pairwise_sum_complex(&traces) / Complex64::new((l * l) as f64, 0.0);
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let c = pair / two_pi_i;
    Ok(NcChern {
        value: c.re,
        imag_residual: c.im,
        torus_size: l,
        fermi_energy: e_f,
        gap_resolution_warning: false,
    })
}

/// Gap-indexed wrapper around [`chern_nc_at_energy`]: places E_F at the gap
/// centre and warns when the gap is narrow compared to the 1/L resolution.
pub fn chern_nc(spec: &HofstadterSpec, l: usize, gap_index: usize) -> Result<NcChern, HallError> {
    let bands = build_bulk(spec, (4 * spec.q as usize).max(24))?;
    let gap = bands.gap(gap_index)?;
    let mut res = chern_nc_at_energy(spec, l, gap.center())?;
    res.gap_resolution_warning = gap.width() < 10.0 / l as f64 * bands.spec.t;
    Ok(res)
}

/// Dense-torus companion of [`chern_nc_at_energy`]: the same pairing computed
/// literally as pair_even(n = 2) on the L²×L² Fermi projection with covariant
/// finite-difference derivations. Only affordable for small L; used to pin
/// the block decomposition.
pub fn chern_nc_dense(spec: &HofstadterSpec, l: usize, e_f: f64) -> Result<NcChern, HallError> {
    let n = l * l;
    let phi = spec.flux();
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    let idx = |x: usize, y: usize| (x % l) * l + (y % l);
    for x in 0..l {
        for y in 0..l {
            // x-hop with phase exp(−2πiφy) on t_{x→x+1}
            let ph = Complex64::from_polar(1.0, -2.0 * PI * phi * y as f64);
            h[(idx(x + 1, y), idx(x, y))] += Complex64::new(-spec.t, 0.0) * ph;
            h[(idx(x, y), idx(x + 1, y))] += Complex64::new(-spec.t, 0.0) * ph.conj();
            h[(idx(x, y + 1), idx(x, y))] += Complex64::new(-spec.t, 0.0);
            h[(idx(x, y), idx(x, y + 1))] += Complex64::new(-spec.t, 0.0);
        }
    }
    let (vals, vecs) = crate::linalg::sorted_hermitian_eigen(h);
    let occ = vals.partition_point(|&e| e < e_f);
    let v = vecs.columns(0, occ).into_owned();
    let p = &v * v.adjoint();
    let mk_u = |axis: usize| -> DMatrix<Complex64> {
        DMatrix::from_fn(n, n, |r, c| {
            if r != c {
                return Complex64::default();
            }
            let (x, y) = (r / l, r % l);
            let coord = if axis == 0 { x } else { y };
            Complex64::from_polar(1.0, 2.0 * PI * coord as f64 / l as f64)
        })
    };
    let deltas = [
        DerivationDescriptor::CovariantPhase { unitary: mk_u(0), scale: l as f64 },
        DerivationDescriptor::CovariantPhase { unitary: mk_u(1), scale: l as f64 },
    ];
    let trace = TraceDescriptor::TracePerVolume { volume: n as f64 };
    let pair = pairings::pair_even(&trace, &deltas, &p)?;
    let c = pair / Complex64::new(0.0, 2.0 * PI);
    Ok(NcChern {
        value: c.re,
        imag_residual: c.im,
        torus_size: l,
        fermi_energy: e_f,
        gap_resolution_warning: false,
    })
}

/// Cylinder spectra over the Brillouin zone with boundary-weight bookkeeping.
#[derive(Debug, Clone)]
pub struct EdgeSpectrum {
    pub spec: HofstadterSpec,
    pub width: usize,
    /// k values, 0 to 2π inclusive (closed loop).
    pub ks: Vec<f64>,
    /// eigenvalues sorted ascending per k
    pub energies: Vec<Vec<f64>>,
    /// per state: |ψ|² weight on the outermost ⌈W/10⌉ bottom rows
    pub weight_bottom: Vec<Vec<f64>>,
    pub weight_top: Vec<Vec<f64>>,
    pub boundary_rows: usize,
}

/// Localisation weight a state needs on one boundary to count as an edge
/// state of that boundary.
pub const EDGE_ATTRIBUTION_THRESHOLD: f64 = 0.6;

pub fn build_edge_spectrum(
    spec: &HofstadterSpec,
    width: usize,
    k_points: usize,
) -> Result<EdgeSpectrum, HallError> {
    if (width as i64) < spec.q {
        return Err(HallError::GridTooSmall { name: "W", got: width, q: spec.q });
    }
    if (k_points as i64) < spec.q {
        return Err(HallError::GridTooSmall { name: "K", got: k_points, q: spec.q });
    }
    let nb = width.div_ceil(10);
    let ks: Vec<f64> = (0..=k_points)
        .map(|i| 2.0 * PI * i as f64 / k_points as f64)
        .collect();
    let rows: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = ks
        .par_iter()
        .map(|&k| {
            let (vals, vecs) = sorted_symmetric_eigen(spec.cylinder_hamiltonian(k, width));
            let mut wb = Vec::with_capacity(width);
            let mut wt = Vec::with_capacity(width);
            for c in 0..width {
                let col = vecs.column(c);
                let b: f64 = (0..nb).map(|r| col[r] * col[r]).sum();
                let t: f64 = (width - nb..width).map(|r| col[r] * col[r]).sum();
                wb.push(b);
                wt.push(t);
            }
            (vals, wb, wt)
        })
        .collect();
    let mut energies = Vec::with_capacity(rows.len());
    let mut weight_bottom = Vec::with_capacity(rows.len());
    let mut weight_top = Vec::with_capacity(rows.len());
    for (e, b, t) in rows {
        energies.push(e);
        weight_bottom.push(b);
        weight_top.push(t);
    }
    Ok(EdgeSpectrum {
        spec: *spec,
        width,
        ks,
        energies,
        weight_bottom,
        weight_top,
        boundary_rows: nb,
    })
}

/// Net signed number of bottom-edge branches crossing the gap centre as k
/// sweeps the Brillouin zone (+1 for upward crossings).
pub fn edge_spectral_flow(es: &EdgeSpectrum, gap: &Gap) -> Result<i64, HallError> {
    let ec = gap.center();
    let mut flow = 0i64;
    let mut ambiguous = Vec::new();
    for i in 0..es.ks.len() - 1 {
        for n in 0..es.width {
            let (a, b) = (es.energies[i][n], es.energies[i + 1][n]);
            let crosses_up = a < ec && ec <= b;
            let crosses_down = b < ec && ec <= a;
            if !(crosses_up || crosses_down) {
                continue;
            }
            let wb = 0.5 * (es.weight_bottom[i][n] + es.weight_bottom[i + 1][n]);
            let wt = 0.5 * (es.weight_top[i][n] + es.weight_top[i + 1][n]);
            if wb > EDGE_ATTRIBUTION_THRESHOLD {
                flow += if crosses_up { 1 } else { -1 };
            } else if wt > EDGE_ATTRIBUTION_THRESHOLD {
                // other boundary; not counted
            } else {
                ambiguous.push(format!(
                    "k∈[{:.4},{:.4}] branch {} weights ({:.2},{:.2})",
                    es.ks[i],
                    es.ks[i + 1],
                    n,
                    wb,
                    wt
                ));
            }
        }
    }
    if !ambiguous.is_empty() {
        return Err(HallError::AmbiguousLocalization {
            count: ambiguous.len(),
            threshold: EDGE_ATTRIBUTION_THRESHOLD,
            details: ambiguous.join("; "),
        });
    }
    Ok(flow)
}

/// The gap unitary u(t) = 1 + χ_Δ(t)(exp(−2πi(t−inf Δ)/|Δ|) − 1).
pub fn gap_unitary_value(t: f64, gap: &Gap) -> Complex64 {
    if t >= gap.lo && t < gap.hi {
        Complex64::from_polar(1.0, -2.0 * PI * (t - gap.lo) / gap.width())
    } else {
        Complex64::new(1.0, 0.0)
    }
}

/// u(H(k)) as a W×W matrix by functional calculus (for spot checks; the
/// pairing itself uses the determinant restricted to one boundary).
pub fn edge_unitary_matrix(
    spec: &HofstadterSpec,
    width: usize,
    k: f64,
    gap: &Gap,
) -> DMatrix<Complex64> {
    let (vals, vecs) = sorted_symmetric_eigen(spec.cylinder_hamiltonian(k, width));
    let mut u = DMatrix::<Complex64>::zeros(width, width);
    for n in 0..width {
        let phase = gap_unitary_value(vals[n], gap);
        let col = vecs.column(n);
        for r in 0..width {
            for c in 0..width {
                u[(r, c)] += phase * Complex64::new(col[r] * col[c], 0.0);
            }
        }
    }
    u
}

/// Closed path k ↦ det of u(H(k)) restricted to bottom-edge states. States
/// outside the gap contribute u = 1, so attribution flips deep in the bands
/// are harmless and the path is continuous.
pub fn edge_unitary_path(es: &EdgeSpectrum, gap: &Gap) -> (Vec<f64>, Vec<Complex64>) {
    let mut vals = Vec::with_capacity(es.ks.len());
    for i in 0..es.ks.len() {
        let mut g = Complex64::new(1.0, 0.0);
        for n in 0..es.width {
            if es.weight_bottom[i][n] > EDGE_ATTRIBUTION_THRESHOLD {
                g *= gap_unitary_value(es.energies[i][n], gap);
            }
        }
        vals.push(g);
    }
    (es.ks.clone(), vals)
}

/// Winding of the bottom-edge gap-unitary determinant over the Brillouin
/// zone: the n = 1 pairing of the edge unitary, normalised to match
/// [`edge_spectral_flow`].
pub fn edge_unitary_pairing(es: &EdgeSpectrum, gap: &Gap) -> Result<f64, HallError> {
    let (ks, vals) = edge_unitary_path(es, gap);
    let res = pairings::closed_scalar_winding(&ks, &vals)?;
    Ok(res.value)
}

/// Streda check: finite-difference slope of the IDS against flux at a fixed
/// Diophantine gap label, compared with the Chern σ_H of the gap.
#[derive(Debug, Clone, Serialize)]
pub struct StredaResult {
    pub label: GapLabel,
    pub ids_a: f64,
    pub ids_b: f64,
    pub slope: f64,
    pub sigma_h: i64,
    pub residual: f64,
}

pub fn streda_check(
    spec_a: &HofstadterSpec,
    spec_b: &HofstadterSpec,
    gap_index_a: usize,
    m: usize,
) -> Result<StredaResult, HallError> {
    if spec_a.flux() == spec_b.flux() {
        return Err(HallError::ZeroDenominator);
    }
    let label = diophantine_label(spec_a, gap_index_a);
    let bands_a = build_bulk(spec_a, m.max(spec_a.q as usize))?;
    let gap_a = bands_a.gap(gap_index_a)?;
    // track the same label at the second flux
    let r_b = label.n0 * spec_b.q + label.sigma * spec_b.p;
    if r_b < 1 || r_b >= spec_b.q {
        return Err(HallError::GapTracking {
            n0: label.n0,
            sigma: label.sigma,
            p: spec_b.p,
            q: spec_b.q,
        });
    }
    let bands_b = build_bulk(spec_b, m.max(spec_b.q as usize))?;
    let gap_b = bands_b.gap(r_b as usize).map_err(|_| HallError::GapTracking {
        n0: label.n0,
        sigma: label.sigma,
        p: spec_b.p,
        q: spec_b.q,
    })?;
    let ids_a = bands_a.ids(gap_a.center());
    let ids_b = bands_b.ids(gap_b.center());
    let slope = (ids_b - ids_a) / (spec_b.flux() - spec_a.flux());
    let sigma_h = sigma_h_of_gap(spec_a, m.max(spec_a.q as usize), gap_index_a)?;
    Ok(StredaResult {
        label,
        ids_a,
        ids_b,
        slope,
        sigma_h,
        residual: (slope - sigma_h as f64).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_lattice_band_range() {
        // p/q = 0/1: E(k) = -2t(cos k1 + cos k2), range [-4t, 4t]
        let spec = HofstadterSpec::new(0, 1).unwrap();
        let bands = build_bulk(&spec, 40).unwrap();
        assert!((bands.band_min[0] + 4.0).abs() < 1e-12);
        assert!((bands.band_max[0] - 4.0).abs() < 1e-3); // grid may miss the exact max
        assert_eq!(bands.gaps().len(), 0);
    }

    #[test]
    fn half_flux_bands_touch_at_zero() {
        let spec = HofstadterSpec::new(1, 2).unwrap();
        let bands = build_bulk(&spec, 48).unwrap();
        assert_eq!(bands.band_max.len(), 2);
        // touching at E = 0: no open gap
        assert!(bands.gaps().is_empty());
        assert!(bands.band_max[0].abs() < 1e-6);
        assert!(bands.band_min[1].abs() < 1e-6);
    }

    #[test]
    fn third_flux_has_three_bands_two_gaps() {
        let spec = HofstadterSpec::new(1, 3).unwrap();
        let bands = build_bulk(&spec, 30).unwrap();
        let gaps = bands.gaps();
        assert_eq!(gaps.len(), 2);
        assert!(gaps[0].width() > 1.0);
        assert!(gaps[1].width() > 1.0);
    }

    #[test]
    fn chern_anchor_and_sum_rule() {
        let spec = HofstadterSpec::new(1, 3).unwrap();
        // anchor: lowest band at 1/3 has Chern +1
        assert_eq!(chern_berry(&spec, 24, (0, 0)).unwrap(), 1);
        let c2 = chern_berry(&spec, 24, (1, 1)).unwrap();
        let c3 = chern_berry(&spec, 24, (2, 2)).unwrap();
        assert_eq!(c2, -2);
        assert_eq!(c3, 1);
        assert_eq!(1 + c2 + c3, 0);
        // whole spectrum as one bundle: trivial
        assert_eq!(chern_berry(&spec, 24, (0, 2)).unwrap(), 0);
    }

    #[test]
    fn chern_zero_flux_is_zero() {
        let spec = HofstadterSpec::new(0, 1).unwrap();
        assert_eq!(chern_berry(&spec, 24, (0, 0)).unwrap(), 0);
    }

    #[test]
    fn chern_degenerate_bundle_is_rejected() {
        let spec = HofstadterSpec::new(1, 2).unwrap();
        let err = chern_berry(&spec, 24, (0, 0));
        assert!(matches!(err, Err(HallError::Degenerate { .. })), "{err:?}");
    }

    #[test]
    fn diophantine_matches_plaquette_cherns() {
        for (p, q) in [(1i64, 3i64), (1, 5), (2, 5)] {
            let spec = HofstadterSpec::new(p, q).unwrap();
            for r in 1..q as usize {
                let label = diophantine_label(&spec, r);
                let cum = sigma_h_of_gap(&spec, 25, r).unwrap();
                assert_eq!(label.sigma, cum, "p/q={p}/{q} gap {r}");
            }
        }
    }

    #[test]
    fn ids_trivial_and_gap_values() {
        let spec = HofstadterSpec::new(1, 3).unwrap();
        let bands = build_bulk(&spec, 30).unwrap();
        assert_eq!(bands.ids(-10.0), 0.0);
        assert_eq!(bands.ids(10.0), 1.0);
        let g = bands.gap(1).unwrap();
        assert!((bands.ids(g.center()) - 1.0 / 3.0).abs() < 1e-12);
        // IDS constant across the gap
        assert_eq!(bands.ids(g.lo + 1e-6), bands.ids(g.hi - 1e-6));
    }

    #[test]
    fn cylinder_spectra_symmetric_under_k_reflection() {
        // with W ≡ 1 (mod q) the spectrum at -k equals the spectrum at k
        let spec = HofstadterSpec::new(1, 3).unwrap();
        let w = 31;
        for k in [0.3, 1.1, 2.9] {
            let a = crate::linalg::symmetric_eigenvalues(spec.cylinder_hamiltonian(k, w));
            let b = crate::linalg::symmetric_eigenvalues(spec.cylinder_hamiltonian(-k, w));
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn streda_rejects_equal_fluxes() {
        let spec = HofstadterSpec::new(1, 3).unwrap();
        assert!(matches!(
            streda_check(&spec, &spec, 1, 12),
            Err(HallError::ZeroDenominator)
        ));
    }

    #[test]
    fn gap_unitary_is_identity_outside_gap() {
        let gap = Gap { index: 1, lo: -1.0, hi: 1.0 };
        assert_eq!(gap_unitary_value(-2.0, &gap), Complex64::new(1.0, 0.0));
        assert_eq!(gap_unitary_value(1.5, &gap), Complex64::new(1.0, 0.0));
        let mid = gap_unitary_value(0.0, &gap);
        assert!((mid - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((gap_unitary_value(0.3, &gap).norm() - 1.0).abs() < 1e-14);
    }
}
