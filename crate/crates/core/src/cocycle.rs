//! Magnetic flux 2-cocycles.
//!
//! For a magnetic field with antisymmetric components `B_jk` the unit-modulus
//! phase
//!
//! ```text
//! ω^B(q; x, y) = exp(−i Γ^B⟨q, q+x, q+x+y⟩)
//! ```
//!
//! is built from the flux `Γ^B` through the triangle with those vertices, and
//! satisfies the normalized 2-cocycle relation
//!
//! ```text
//! ω(x,y) ω(x+y,z) = α_x[ω(y,z)] ω(x,y+z)
//! ```
//!
//! together with ω(x,0) = ω(0,x) = 1, ω(x,−x) = 1 and ω(x,tx) = 1.
//!
//! Only flux-based, gauge-invariant phases live here. Everything downstream
//! (twisted products, iterated decompositions, magnetic representations)
//! consumes these evaluations. The translation action is fixed once and for
//! all as `α_x[f](q) = f(q + x)`.

use crate::linalg::gauss_legendre_unit;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CocycleError {
    #[error("dimension mismatch: field is {field}-dimensional, got vector of length {got}")]
    DimensionMismatch { field: usize, got: usize },
    #[error("components matrix must be {n}x{n} antisymmetric; entry ({j},{k}) violates B_jk = -B_kj by {dev}")]
    NotAntisymmetric { n: usize, j: usize, k: usize, dev: f64 },
    #[error("empty sample list")]
    EmptySamples,
}

/// One Fourier-type mode of a spatially varying field component:
/// `B_jk(q) += amplitude * cos(wave · q + phase)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldMode {
    pub j: usize,
    pub k: usize,
    pub amplitude: f64,
    pub wave: Vec<f64>,
    pub phase: f64,
}

/// A magnetic field on R^n, either constant or smoothly sampled.
///
/// The sampled variant stores a constant base plus cosine modes, which keeps
/// it serializable for configs while staying smooth and bounded. Units are
/// natural (ħ = e = 1): flux is a dimensionless phase.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum MagneticField {
    Constant {
        dimension: usize,
        /// Row-major n×n antisymmetric matrix of components B_jk.
        components: Vec<f64>,
    },
    Sampled {
        dimension: usize,
        base: Vec<f64>,
        modes: Vec<FieldMode>,
        /// Gauss–Legendre order per axis for triangle quadrature.
        quad_order: usize,
    },
}

impl MagneticField {
    pub fn constant(dimension: usize, components: Vec<f64>) -> Result<Self, CocycleError> {
        assert_eq!(components.len(), dimension * dimension);
        for j in 0..dimension {
            for k in 0..dimension {
                let dev = (components[j * dimension + k] + components[k * dimension + j]).abs();
                if dev > 1e-12 {
                    return Err(CocycleError::NotAntisymmetric { n: dimension, j, k, dev });
                }
            }
        }
        Ok(MagneticField::Constant { dimension, components })
    }

    /// Constant 2D field with B_12 = b.
    pub fn constant_2d(b: f64) -> Self {
        MagneticField::Constant {
            dimension: 2,
            components: vec![0.0, b, -b, 0.0],
        }
    }

    /// Constant 3D field with components (B_12, B_13, B_23).
    pub fn constant_3d(b12: f64, b13: f64, b23: f64) -> Self {
        MagneticField::Constant {
            dimension: 3,
            components: vec![0.0, b12, b13, -b12, 0.0, b23, -b13, -b23, 0.0],
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            MagneticField::Constant { dimension, .. } => *dimension,
            MagneticField::Sampled { dimension, .. } => *dimension,
        }
    }

    /// Whether ω(q; x, y) is independent of the base point q.
    pub fn is_uniform(&self) -> bool {
        matches!(self, MagneticField::Constant { .. })
    }

    /// Components B_jk at a point (row-major n×n).
    pub fn components_at(&self, q: &[f64]) -> Vec<f64> {
        match self {
            MagneticField::Constant { components, .. } => components.clone(),
            MagneticField::Sampled { dimension, base, modes, .. } => {
                let n = *dimension;
                let mut out = base.clone();
                for m in modes {
                    let arg: f64 =
                        m.wave.iter().zip(q).map(|(w, qi)| w * qi).sum::<f64>() + m.phase;
                    let v = m.amplitude * arg.cos();
                    out[m.j * n + m.k] += v;
                    out[m.k * n + m.j] -= v;
                }
                out
            }
        }
    }

    fn check_dims(&self, vecs: &[&[f64]]) -> Result<(), CocycleError> {
        let n = self.dimension();
        for v in vecs {
            if v.len() != n {
                return Err(CocycleError::DimensionMismatch { field: n, got: v.len() });
            }
        }
        Ok(())
    }

    /// Antisymmetric pairing Σ_{j<k} B_jk (u_j v_k − u_k v_j) at base point q.
    fn wedge_at(&self, q: &[f64], u: &[f64], v: &[f64]) -> f64 {
        let n = self.dimension();
        let b = self.components_at(q);
        let mut s = 0.0;
        for j in 0..n {
            for k in (j + 1)..n {
                s += b[j * n + k] * (u[j] * v[k] - u[k] * v[j]);
            }
        }
        s
    }

    /// Flux Γ^B⟨q, q+x, q+x+y⟩ through the triangle.
    ///
    /// Constant field: (1/2) Σ_{j<k} B_jk (x_j y_k − x_k y_j), exactly.
    /// Sampled field: tensor-product Gauss–Legendre quadrature over the
    /// parametrisation P(u,v) = q + u·x + u·v·y with surface element
    /// u · B(P)(x, y). Degenerate (collinear) triangles return 0 exactly.
    pub fn triangle_flux(&self, q: &[f64], x: &[f64], y: &[f64]) -> Result<f64, CocycleError> {
        self.check_dims(&[q, x, y])?;
        if is_degenerate(x, y) {
            return Ok(0.0);
        }
        match self {
            MagneticField::Constant { .. } => Ok(0.5 * self.wedge_at(q, x, y)),
            MagneticField::Sampled { quad_order, .. } => {
                let (nodes, weights) = gauss_legendre_unit(*quad_order);
                let n = self.dimension();
                let mut p = vec![0.0; n];
                let mut total = 0.0;
                for (iu, &u) in nodes.iter().enumerate() {
                    for (iv, &v) in nodes.iter().enumerate() {
                        for d in 0..n {
                            p[d] = q[d] + u * x[d] + u * v * y[d];
                        }
                        total += weights[iu] * weights[iv] * u * self.wedge_at(&p, x, y);
                    }
                }
                Ok(total)
            }
        }
    }

    /// ω^B(q; x, y) = exp(−i Γ^B⟨q, q+x, q+x+y⟩).
    pub fn omega(&self, q: &[f64], x: &[f64], y: &[f64]) -> Result<num_complex::Complex64, CocycleError> {
        let gamma = self.triangle_flux(q, x, y)?;
        Ok(num_complex::Complex64::from_polar(1.0, -gamma))
    }

    /// Box phase Box(x⊥, x∥) = ω((0∥,x⊥),(x∥,0⊥)) · conj(ω((x∥,0⊥),(0∥,x⊥)))
    /// evaluated at q, with x⊥ along the last axis. Equals exp(−i Γ^B_□) with
    /// Γ^B_□ the flux through the rectangle q, q+(0∥,x⊥), q+(x∥,x⊥), q+(x∥,0⊥).
    pub fn box_flux(
        &self,
        q: &[f64],
        x_perp: f64,
        x_par: &[f64],
    ) -> Result<num_complex::Complex64, CocycleError> {
        let n = self.dimension();
        if x_par.len() != n - 1 {
            return Err(CocycleError::DimensionMismatch { field: n, got: x_par.len() + 1 });
        }
        let mut u = vec![0.0; n];
        u[n - 1] = x_perp;
        let mut v = vec![0.0; n];
        v[..n - 1].copy_from_slice(x_par);
        let a = self.omega(q, &u, &v)?;
        let b = self.omega(q, &v, &u)?;
        Ok(a * b.conj())
    }

    /// Max residual of the 2-cocycle relation over the given samples:
    /// |ω(q;x,y)·ω(q;x+y,z) − ω(q+x;y,z)·ω(q;x,y+z)|.
    pub fn check_cocycle_relation(
        &self,
        samples: &[(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)],
    ) -> Result<f64, CocycleError> {
        if samples.is_empty() {
            return Err(CocycleError::EmptySamples);
        }
        let mut worst: f64 = 0.0;
        for (q, x, y, z) in samples {
            worst = worst.max(self.cocycle_residual(q, x, y, z)?);
        }
        Ok(worst)
    }

    /// Residual of the 2-cocycle relation at a single sample.
    pub fn cocycle_residual(
        &self,
        q: &[f64],
        x: &[f64],
        y: &[f64],
        z: &[f64],
    ) -> Result<f64, CocycleError> {
        self.check_dims(&[q, x, y, z])?;
        let xpy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        let ypz: Vec<f64> = y.iter().zip(z).map(|(a, b)| a + b).collect();
        let qpx: Vec<f64> = q.iter().zip(x).map(|(a, b)| a + b).collect();
        let lhs = self.omega(q, x, y)? * self.omega(q, &xpy, z)?;
        let rhs = self.omega(&qpx, y, z)? * self.omega(q, x, &ypz)?;
        Ok((lhs - rhs).norm())
    }
}

/// Collinearity test: every 2×2 minor of (x, y) vanishes.
fn is_degenerate(x: &[f64], y: &[f64]) -> bool {
    let n = x.len();
    for j in 0..n {
        for k in (j + 1)..n {
            if (x[j] * y[k] - x[k] * y[j]).abs() > 0.0 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    /// Midpoint-rule flux oracle over the triangle, refined until converged.
    fn midpoint_flux(field: &MagneticField, q: &[f64], x: &[f64], y: &[f64]) -> f64 {
        let n = q.len();
        let mut prev = f64::NAN;
        for m in [64usize, 128, 256, 512] {
            let h = 1.0 / m as f64;
            let mut total = 0.0;
            let mut p = vec![0.0; n];
            for iu in 0..m {
                let u = (iu as f64 + 0.5) * h;
                for iv in 0..m {
                    let v = (iv as f64 + 0.5) * h;
                    for d in 0..n {
                        p[d] = q[d] + u * x[d] + u * v * y[d];
                    }
                    let b = field.components_at(&p);
                    let mut s = 0.0;
                    for j in 0..n {
                        for k in (j + 1)..n {
                            s += b[j * n + k] * (x[j] * y[k] - x[k] * y[j]);
                        }
                    }
                    total += h * h * u * s;
                }
            }
            if (total - prev).abs() < 1e-9 {
                return total;
            }
            prev = total;
        }
        prev
    }

    #[test]
    fn constant_unit_triangle_flux_is_half_b() {
        // Oracle value frozen from the midpoint rule: b/2 for the unit triangle.
        let b = 0.7343;
        let field = MagneticField::constant_2d(b);
        let got = field.triangle_flux(&[0.0, 0.0], &e(2, 0), &e(2, 1)).unwrap();
        let oracle = midpoint_flux(&field, &[0.0, 0.0], &e(2, 0), &e(2, 1));
        assert!((got - b / 2.0).abs() < 1e-14);
        assert!((got - oracle).abs() < 1e-8, "{got} vs oracle {oracle}");
    }

    #[test]
    fn degenerate_triangles_have_zero_flux() {
        let field = MagneticField::constant_2d(2.1);
        let x = vec![0.3, -1.2];
        let tx: Vec<f64> = x.iter().map(|v| v * 0.77).collect();
        assert_eq!(field.triangle_flux(&[0.5, 0.5], &x, &tx).unwrap(), 0.0);
        assert_eq!(field.triangle_flux(&[0.5, 0.5], &[0.0, 0.0], &x).unwrap(), 0.0);
        let sampled = MagneticField::Sampled {
            dimension: 2,
            base: vec![0.0, 1.0, -1.0, 0.0],
            modes: vec![],
            quad_order: 8,
        };
        assert_eq!(sampled.triangle_flux(&[0.0, 0.0], &x, &tx).unwrap(), 0.0);
    }

    #[test]
    fn omega_normalisation_conditions() {
        let field = MagneticField::constant_2d(1.3);
        let q = [0.2, -0.4];
        let x = vec![1.0, 2.0];
        let zero = vec![0.0, 0.0];
        let mx: Vec<f64> = x.iter().map(|v| -v).collect();
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(field.omega(&q, &x, &zero).unwrap(), one);
        assert_eq!(field.omega(&q, &zero, &x).unwrap(), one);
        assert_eq!(field.omega(&q, &x, &mx).unwrap(), one);
        // omega(x, tx) = 1 for all t
        for t in [-2.0, -0.5, 0.1, 3.0] {
            let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
            assert!((field.omega(&q, &x, &tx).unwrap() - one).norm() < 1e-12);
        }
    }

    #[test]
    fn omega_pi_flux_square_is_minus_i() {
        // B12 = pi, unit triangle flux pi/2, omega = exp(-i pi/2) = -i.
        let field = MagneticField::constant_2d(std::f64::consts::PI);
        let w = field.omega(&[0.0, 0.0], &e(2, 0), &e(2, 1)).unwrap();
        assert!((w - Complex64::new(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn box_flux_orientation_and_degenerate_cases() {
        let b = 0.9;
        let field = MagneticField::constant_2d(b);
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(field.box_flux(&[0.0, 0.0], 0.0, &[1.3]).unwrap(), one);
        assert_eq!(field.box_flux(&[0.0, 0.0], 0.7, &[0.0]).unwrap(), one);
        // composing the two omegas directly: Box = exp(+i b t s)
        let (s, t) = (0.6, 1.7);
        let w = field.box_flux(&[0.0, 0.0], s, &[t]).unwrap();
        assert!((w - Complex64::from_polar(1.0, b * t * s)).norm() < 1e-13);
    }

    #[test]
    fn box_decomposes_into_triangle_pair() {
        // Box equals exp(-i [flux(q,q+u,q+u+v) + flux(q,q+u+v,q+v)]) with
        // u = (0,s), v = (t,0): the rectangle split along its diagonal.
        let field = MagneticField::Sampled {
            dimension: 2,
            base: vec![0.0, 0.8, -0.8, 0.0],
            modes: vec![FieldMode { j: 0, k: 1, amplitude: 0.3, wave: vec![0.9, 0.4], phase: 0.3 }],
            quad_order: 12,
        };
        let q = [0.3, 0.1];
        let (s, t) = (0.8, 0.5);
        let u = vec![0.0, s];
        let v = vec![t, 0.0];
        let uv: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let mu: Vec<f64> = u.iter().map(|a| -a).collect();
        let g1 = field.triangle_flux(&q, &u, &v).unwrap();
        // second triangle q, q+u+v, q+v has edges (u+v) and (v-(u+v)) = -u
        let g2 = field.triangle_flux(&q, &uv, &mu).unwrap();
        let direct = field.box_flux(&q, s, &[t]).unwrap();
        let recomposed = Complex64::from_polar(1.0, -(g1 + g2));
        assert!((direct - recomposed).norm() < 1e-10, "{direct} vs {recomposed}");
    }

    #[test]
    fn cocycle_relation_constant_field_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let field = MagneticField::constant_3d(0.7, -1.1, 0.4);
        let mut samples = Vec::new();
        for _ in 0..100 {
            let mut v = || (0..3).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<f64>>();
            samples.push((v(), v(), v(), v()));
        }
        let res = field.check_cocycle_relation(&samples).unwrap();
        assert!(res < 1e-12, "residual {res}");
    }

    #[test]
    fn cocycle_relation_zero_field_exact() {
        let field = MagneticField::constant_2d(0.0);
        let samples = vec![(vec![0.1, 0.2], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0])];
        assert_eq!(field.check_cocycle_relation(&samples).unwrap(), 0.0);
    }

    #[test]
    fn cocycle_relation_sampled_field_quadrature() {
        let field = MagneticField::Sampled {
            dimension: 2,
            base: vec![0.0, 1.0, -1.0, 0.0],
            modes: vec![FieldMode { j: 0, k: 1, amplitude: 0.4, wave: vec![0.6, 0.8], phase: 0.1 }],
            quad_order: 10,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut samples = Vec::new();
        for _ in 0..40 {
            let mut v = || (0..2).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
            samples.push((v(), v(), v(), v()));
        }
        let res = field.check_cocycle_relation(&samples).unwrap();
        assert!(res < 1e-8, "residual {res}");
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let field = MagneticField::constant_2d(1.0);
        let err = field.triangle_flux(&[0.0, 0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]);
        assert!(matches!(err, Err(CocycleError::DimensionMismatch { .. })));
    }

    #[test]
    fn sampled_flux_matches_midpoint_oracle() {
        let field = MagneticField::Sampled {
            dimension: 2,
            base: vec![0.0, 0.5, -0.5, 0.0],
            modes: vec![FieldMode { j: 0, k: 1, amplitude: 0.25, wave: vec![1.1, 0.7], phase: 0.5 }],
            quad_order: 10,
        };
        let q = [0.2, -0.3];
        let x = [0.9, 0.1];
        let y = [-0.2, 1.1];
        let got = field.triangle_flux(&q, &x, &y).unwrap();
        let oracle = midpoint_flux(&field, &q, &x, &y);
        assert!((got - oracle).abs() < 1e-7, "{got} vs {oracle}");
    }
}
