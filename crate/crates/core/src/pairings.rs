//! Finite-matrix Connes pairings.
//!
//! An n-trace is a trace 𝒯 together with n commuting trace-invariant
//! derivations δ_j. Against a projection p (n even) or unitary u (n odd) it
//! pairs as the antisymmetrised trace
//!
//! ```text
//! even: Σ_π sgn(π) 𝒯(p δ_{π(1)}(p) ⋯ δ_{π(n)}(p))
//! odd:  Σ_π sgn(π) 𝒯((u*−1) δ_{π(1)}(u) δ_{π(2)}(u*) ⋯ δ_{π(n)}(u))
//! ```
//!
//! Pairings are defined up to constants; the normalisations fixed here are
//!
//! * Chern: `C = pair_even(n=2) / (2πi)`, with the covariant finite-difference
//!   derivations δ_j(a) = L(U_j a U_j† − a), U_j = exp(2πi Q_j/L) — the sign
//!   is anchored so the lowest Hofstadter band at flux 1/3 has C = +1.
//! * Winding: `W = pair_odd(n=1) / (−2πi)`; for the S-matrix path of a
//!   potential, W equals the number of bound states (positive).
//!
//! Unitary paths over an energy-like parameter are paired through the
//! composite midpoint rule `Σ tr[i(u_mid−1)† Δu]`, which is the quadrature of
//! `∫ tr[i(u−1)† u′] dλ`.

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PairingError {
    #[error("matrix is not a projection: ‖p²−p‖ = {dev:.3e} (tolerance {tol:.1e})")]
    NotAProjection { dev: f64, tol: f64 },
    #[error("matrix is not unitary: ‖u†u−1‖ = {dev:.3e}")]
    NotUnitary { dev: f64 },
    #[error("pair_even needs an even number of derivations, got {0}")]
    OddArity(usize),
    #[error("pair_odd needs an odd number of derivations, got {0}")]
    EvenArity(usize),
    #[error("path needs at least two samples")]
    PathTooShort,
}

/// A trace functional on matrices.
#[derive(Debug, Clone)]
pub enum TraceDescriptor {
    /// Plain matrix trace.
    MatrixTrace,
    /// Trace divided by a volume (trace per unit volume).
    TracePerVolume { volume: f64 },
}

impl TraceDescriptor {
    pub fn apply(&self, m: &DMatrix<Complex64>) -> Complex64 {
        let tr: Complex64 = m.diagonal().iter().sum();
        match self {
            TraceDescriptor::MatrixTrace => tr,
            TraceDescriptor::TracePerVolume { volume } => tr / Complex64::new(*volume, 0.0),
        }
    }

    /// Traciality residual |T(ab) − T(ba)| on a given pair.
    pub fn traciality_residual(&self, a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (self.apply(&(a * b)) - self.apply(&(b * a))).norm()
    }
}

/// A derivation acting on matrices.
#[derive(Debug, Clone)]
pub enum DerivationDescriptor {
    /// δ(a) = i[G, a] for a fixed Hermitian generator G.
    Commutator { generator: DMatrix<Complex64> },
    /// Gauge-covariant finite difference δ(a) = scale·(U a U† − a) with a
    /// fixed diagonal unitary U; the standard bounded substitute for the
    /// position commutator on a finite torus.
    CovariantPhase { unitary: DMatrix<Complex64>, scale: f64 },
}

impl DerivationDescriptor {
    pub fn apply(&self, a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        match self {
            DerivationDescriptor::Commutator { generator } => {
                let i = Complex64::new(0.0, 1.0);
                (generator * a - a * generator) * i
            }
            DerivationDescriptor::CovariantPhase { unitary, scale } => {
                (unitary * a * unitary.adjoint() - a) * Complex64::new(*scale, 0.0)
            }
        }
    }

    /// Leibniz residual ‖δ(ab) − δ(a)b − aδ(b)‖ on a given pair.
    pub fn leibniz_residual(&self, a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        let lhs = self.apply(&(a * b));
        let rhs = self.apply(a) * b + a * self.apply(b);
        (lhs - rhs).norm()
    }
}

pub const PROJECTION_TOL: f64 = 1e-8;

pub fn validate_projection(p: &DMatrix<Complex64>) -> Result<(), PairingError> {
    let dev = (p * p - p).norm().max((p.adjoint() - p).norm());
    if dev > PROJECTION_TOL {
        return Err(PairingError::NotAProjection { dev, tol: PROJECTION_TOL });
    }
    Ok(())
}

pub fn validate_unitary(u: &DMatrix<Complex64>) -> Result<(), PairingError> {
    let id = DMatrix::<Complex64>::identity(u.nrows(), u.ncols());
    let dev = (u.adjoint() * u - &id).norm().max((u * u.adjoint() - &id).norm());
    if dev > PROJECTION_TOL {
        return Err(PairingError::NotUnitary { dev });
    }
    Ok(())
}

/// Even pairing Σ_π sgn(π) 𝒯(p δ_{π(1)}(p) ⋯ δ_{π(n)}(p)); n = 0 gives 𝒯(p).
pub fn pair_even(
    trace: &TraceDescriptor,
    deltas: &[DerivationDescriptor],
    p: &DMatrix<Complex64>,
) -> Result<Complex64, PairingError> {
    if deltas.len() % 2 != 0 {
        return Err(PairingError::OddArity(deltas.len()));
    }
    validate_projection(p)?;
    if deltas.is_empty() {
        return Ok(trace.apply(p));
    }
    let dps: Vec<DMatrix<Complex64>> = deltas.iter().map(|d| d.apply(p)).collect();
    let mut total = Complex64::default();
    for (perm, sign) in signed_permutations(deltas.len()) {
        let mut acc = p.clone();
        for &j in &perm {
            acc = acc * &dps[j];
        }
        total += trace.apply(&acc) * Complex64::new(sign, 0.0);
    }
    Ok(total)
}

/// Odd pairing Σ_π sgn(π) 𝒯((u†−1) δ_{π(1)}(u) δ_{π(2)}(u†) ⋯ δ_{π(n)}(u)).
pub fn pair_odd(
    trace: &TraceDescriptor,
    deltas: &[DerivationDescriptor],
    u: &DMatrix<Complex64>,
) -> Result<Complex64, PairingError> {
    if deltas.len() % 2 != 1 {
        return Err(PairingError::EvenArity(deltas.len()));
    }
    validate_unitary(u)?;
    let ud = u.adjoint();
    let dus: Vec<DMatrix<Complex64>> = deltas.iter().map(|d| d.apply(u)).collect();
    let duds: Vec<DMatrix<Complex64>> = deltas.iter().map(|d| d.apply(&ud)).collect();
    let id = DMatrix::<Complex64>::identity(u.nrows(), u.ncols());
    let lead = &ud - &id;
    let mut total = Complex64::default();
    for (perm, sign) in signed_permutations(deltas.len()) {
        let mut acc = lead.clone();
        for (slot, &j) in perm.iter().enumerate() {
            acc = if slot % 2 == 0 { acc * &dus[j] } else { acc * &duds[j] };
        }
        total += trace.apply(&acc) * Complex64::new(sign, 0.0);
    }
    Ok(total)
}

fn signed_permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    (0..n)
        .permutations(n)
        .map(|perm| {
            let mut sign = 1.0;
            for i in 0..perm.len() {
                for j in (i + 1)..perm.len() {
                    if perm[i] > perm[j] {
                        sign = -sign;
                    }
                }
            }
            (perm, sign)
        })
        .collect()
}

/// A path of unitary matrices sampled over a parameter grid.
#[derive(Debug, Clone)]
pub struct UnitaryPath {
    pub params: Vec<f64>,
    pub mats: Vec<DMatrix<Complex64>>,
}

/// Outcome of a winding-number evaluation.
#[derive(Debug, Clone)]
pub struct WindingResult {
    /// (1/2π) ∫ tr[i(u−1)† u′] dλ, real part.
    pub value: f64,
    /// Imaginary residual of the same integral (diagnostic; small for closed
    /// anchored paths).
    pub imag_residual: f64,
    /// max(‖u(λ_min)−1‖, ‖u(λ_max)−1‖).
    pub endpoint_deviation: f64,
    /// Set when the endpoints are farther than 1e−3 from the identity.
    pub endpoint_warning: bool,
}

/// Raw odd path pairing ∫ tr[(u†−1) u′] dλ by the composite midpoint rule.
pub fn pair_odd_path(path: &UnitaryPath) -> Result<Complex64, PairingError> {
    if path.mats.len() < 2 {
        return Err(PairingError::PathTooShort);
    }
    let mut terms = Vec::with_capacity(path.mats.len() - 1);
    for i in 0..path.mats.len() - 1 {
        let mid = (&path.mats[i] + &path.mats[i + 1]) * Complex64::new(0.5, 0.0);
        let id = DMatrix::<Complex64>::identity(mid.nrows(), mid.ncols());
        let du = &path.mats[i + 1] - &path.mats[i];
        let m = (mid.adjoint() - id) * du;
        let tr: Complex64 = m.diagonal().iter().sum();
        terms.push(tr);
    }
    Ok(crate::linalg::pairwise_sum_complex(&terms))
}

/// Winding number (1/2π) ∫ tr[i(u−1)† u′] dλ of a unitary path whose
/// endpoints sit near the identity. Endpoints far from 1 set a warning flag
/// on the result rather than failing hard.
pub fn winding_number(path: &UnitaryPath) -> Result<WindingResult, PairingError> {
    let raw = pair_odd_path(path)?;
    let i = Complex64::new(0.0, 1.0);
    let scaled = i * raw / Complex64::new(2.0 * std::f64::consts::PI, 0.0);
    let first = path.mats.first().unwrap();
    let last = path.mats.last().unwrap();
    let idf = DMatrix::<Complex64>::identity(first.nrows(), first.ncols());
    let idl = DMatrix::<Complex64>::identity(last.nrows(), last.ncols());
    let dev = (first - idf).norm().max((last - idl).norm());
    Ok(WindingResult {
        value: scaled.re,
        imag_residual: scaled.im,
        endpoint_deviation: dev,
        endpoint_warning: dev > 1e-3,
    })
}

/// Winding of a closed scalar path g(k) (not anchored at 1): the path is
/// normalised by its first value, which shifts it to the identity without
/// changing the winding, then evaluated as a 1×1 unitary path.
pub fn closed_scalar_winding(
    params: &[f64],
    values: &[Complex64],
) -> Result<WindingResult, PairingError> {
    if values.len() < 2 {
        return Err(PairingError::PathTooShort);
    }
    let g0 = values[0];
    let mats: Vec<DMatrix<Complex64>> =
        values.iter().map(|v| DMatrix::from_element(1, 1, v / g0)).collect();
    winding_number(&UnitaryPath { params: params.to_vec(), mats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_hermitian(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        let m = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
    }

    fn rand_projection(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        let h = rand_hermitian(n, rng);
        let (_, vecs) = crate::linalg::sorted_hermitian_eigen(h);
        let mut p = DMatrix::<Complex64>::zeros(n, n);
        for c in 0..rank {
            let v = vecs.column(c);
            p += &v * v.adjoint();
        }
        p
    }

    #[test]
    fn n0_pairing_is_trace_of_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = rand_projection(6, 1, &mut rng);
        let v = pair_even(&TraceDescriptor::MatrixTrace, &[], &p).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn commuting_projection_pairs_to_zero() {
        // p diagonal, generators diagonal: all derivations vanish on p
        let n = 4;
        let p = DMatrix::from_fn(n, n, |r, c| {
            if r == c && r < 2 { Complex64::new(1.0, 0.0) } else { Complex64::default() }
        });
        let g1 = DMatrix::from_fn(n, n, |r, c| {
            if r == c { Complex64::new(r as f64, 0.0) } else { Complex64::default() }
        });
        let g2 = DMatrix::from_fn(n, n, |r, c| {
            if r == c { Complex64::new((r * r) as f64, 0.0) } else { Complex64::default() }
        });
        let deltas = [
            DerivationDescriptor::Commutator { generator: g1 },
            DerivationDescriptor::Commutator { generator: g2 },
        ];
        let v = pair_even(&TraceDescriptor::MatrixTrace, &deltas, &p).unwrap();
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn swapping_derivations_flips_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let p = rand_projection(6, 2, &mut rng);
        let d1 = DerivationDescriptor::Commutator { generator: rand_hermitian(6, &mut rng) };
        let d2 = DerivationDescriptor::Commutator { generator: rand_hermitian(6, &mut rng) };
        let t = TraceDescriptor::MatrixTrace;
        let a = pair_even(&t, &[d1.clone(), d2.clone()], &p).unwrap();
        let b = pair_even(&t, &[d2, d1], &p).unwrap();
        assert!((a + b).norm() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn block_diagonal_additivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 4;
        let p = rand_projection(n, 1, &mut rng);
        let q = rand_projection(n, 2, &mut rng);
        let g1a = rand_hermitian(n, &mut rng);
        let g2a = rand_hermitian(n, &mut rng);
        let mut psum = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
        psum.view_mut((0, 0), (n, n)).copy_from(&p);
        psum.view_mut((n, n), (n, n)).copy_from(&q);
        let mut g1 = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
        g1.view_mut((0, 0), (n, n)).copy_from(&g1a);
        g1.view_mut((n, n), (n, n)).copy_from(&g1a);
        let mut g2 = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
        g2.view_mut((0, 0), (n, n)).copy_from(&g2a);
        g2.view_mut((n, n), (n, n)).copy_from(&g2a);
        let t = TraceDescriptor::MatrixTrace;
        let small = [
            DerivationDescriptor::Commutator { generator: g1a.clone() },
            DerivationDescriptor::Commutator { generator: g2a.clone() },
        ];
        let big = [
            DerivationDescriptor::Commutator { generator: g1 },
            DerivationDescriptor::Commutator { generator: g2 },
        ];
        let whole = pair_even(&t, &big, &psum).unwrap();
        let parts = pair_even(&t, &small, &p).unwrap() + pair_even(&t, &small, &q).unwrap();
        assert!((whole - parts).norm() < 1e-10, "{whole} vs {parts}");
    }

    #[test]
    fn pair_even_rejects_non_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let m = rand_hermitian(4, &mut rng);
        assert!(matches!(
            pair_even(&TraceDescriptor::MatrixTrace, &[], &m),
            Err(PairingError::NotAProjection { .. })
        ));
    }

    #[test]
    fn identity_unitary_pairs_to_zero() {
        let u = DMatrix::<Complex64>::identity(5, 5);
        let d = DerivationDescriptor::Commutator {
            generator: DMatrix::from_fn(5, 5, |r, c| {
                if r == c { Complex64::new(r as f64, 0.0) } else { Complex64::default() }
            }),
        };
        let v = pair_odd(&TraceDescriptor::MatrixTrace, &[d], &u).unwrap();
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn leibniz_holds_for_commutator_derivations() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let d = DerivationDescriptor::Commutator { generator: rand_hermitian(5, &mut rng) };
        for _ in 0..5 {
            let a = rand_hermitian(5, &mut rng);
            let b = rand_hermitian(5, &mut rng);
            assert!(d.leibniz_residual(&a, &b) < 1e-12);
        }
    }

    #[test]
    fn scalar_path_winding_matches_analytic() {
        // u(t) = exp(2 pi i k t) over [0,1]: winding_number returns -k
        for k in [-2i32, -1, 1, 3] {
            let n = 4001;
            let params: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let mats: Vec<DMatrix<Complex64>> = params
                .iter()
                .map(|&t| {
                    DMatrix::from_element(
                        1,
                        1,
                        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 * t),
                    )
                })
                .collect();
            let res = winding_number(&UnitaryPath { params, mats }).unwrap();
            assert!(
                (res.value + k as f64).abs() < 1e-6,
                "k={k}: got {} (imag {})",
                res.value,
                res.imag_residual
            );
            assert!(res.imag_residual.abs() < 1e-6);
            assert!(!res.endpoint_warning);
        }
    }

    #[test]
    fn constant_path_has_zero_winding() {
        let n = 11;
        let params: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let mats = vec![DMatrix::<Complex64>::identity(3, 3); n];
        let res = winding_number(&UnitaryPath { params, mats }).unwrap();
        assert_eq!(res.value, 0.0);
        assert!(!res.endpoint_warning);
    }

    #[test]
    fn product_of_commuting_closed_paths_adds_windings() {
        let n = 6001;
        let params: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let path = |k: f64| -> Vec<Complex64> {
            params
                .iter()
                .map(|&t| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k * t))
                .collect()
        };
        let u = path(2.0);
        let v = path(-1.0);
        let prod: Vec<Complex64> = u.iter().zip(&v).map(|(a, b)| a * b).collect();
        let w = |vals: &[Complex64]| closed_scalar_winding(&params, vals).unwrap().value;
        assert!((w(&prod) - (w(&u) + w(&v))).abs() < 1e-6);
    }

    #[test]
    fn far_endpoints_raise_warning_not_error() {
        let n = 101;
        let params: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let mats: Vec<DMatrix<Complex64>> = params
            .iter()
            .map(|&t| DMatrix::from_element(1, 1, Complex64::from_polar(1.0, 1.0 + t)))
            .collect();
        let res = winding_number(&UnitaryPath { params, mats }).unwrap();
        assert!(res.endpoint_warning);
    }
}
