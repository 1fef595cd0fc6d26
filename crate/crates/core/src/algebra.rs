//! Discretized magnetic twisted crossed product.
//!
//! Elements are finitely supported maps from the lattice group (h_g·Z)^m into
//! the abelian algebra 𝒞 of complex functions on a periodic position grid,
//! with the κ-parametrised product
//!
//! ```text
//! (F ⋄ G)(x) = Σ_y w · α_{κ(y−x)}[F(y)] α_{(1−κ)y}[G(x−y)] α_{−κx}[ω(y, x−y)]
//! ```
//!
//! (w the group cell weight replacing dy), the involution
//! `F^⋄(x) = α_{(1−2κ)x}[F(−x)*]`, and the translation action
//! `α_x[f](q) = f(q + x)`.
//!
//! The group is the full integer lattice (supports are finite but unwrapped),
//! while 𝒞 lives on a torus; fluxes are computed in R^n, where ω^B is exactly
//! a 2-cocycle, so the algebra laws hold on the grid to rounding error.
//!
//! The position grid is `subdivision` times finer than the group lattice so
//! that translations by κ·x stay exact for κ ∈ {0, 1/2, 1} (or any κ whose
//! product with the subdivision is integral).
//!
//! A perpendicular/parallel split of the group (last axis ⊥, first axes ∥)
//! gives the iterated structure: the action β, the bijection F ↦ F′, and the
//! product ⋄_β under which F ↦ F′ is a *-isomorphism.

use crate::cocycle::{CocycleError, MagneticField};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("position grids differ between operands")]
    GridMismatch,
    #[error("kappa {kappa} not in [0, 1]")]
    KappaRange { kappa: f64 },
    #[error("translation by {coeff} * {x:?} does not land on the position grid (subdivision {s})")]
    OffGridTranslation { coeff: f64, x: Vec<i64>, s: usize },
    #[error("group points per axis {group_points} not divisible by cocycle denominator q = {q}")]
    TorusNotDivisible { group_points: usize, q: i64 },
    #[error("representation requires a 2-dimensional group over a 2-dimensional grid")]
    NotTwoDimensional,
    #[error("representation requires rational flux p/q in lowest terms with q > 0")]
    BadFlux,
    #[error("grid points {points} not divisible by subdivision {subdivision}")]
    BadSubdivision { points: usize, subdivision: usize },
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error("serialized element is malformed: {0}")]
    Malformed(String),
}

/// Periodic position grid for 𝒞 plus the coarser group lattice living on it.
///
/// `points` fine points per axis with spacing `h = period/points`; the group
/// lattice spacing is `subdivision · h`. Integer group translations therefore
/// map fine grid points to fine grid points exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionGrid {
    pub dimension: usize,
    pub period: Vec<f64>,
    pub points: usize,
    pub subdivision: usize,
}

impl PositionGrid {
    pub fn new(
        dimension: usize,
        period: Vec<f64>,
        points: usize,
        subdivision: usize,
    ) -> Result<Self, AlgebraError> {
        assert_eq!(period.len(), dimension);
        if subdivision == 0 || points % subdivision != 0 {
            return Err(AlgebraError::BadSubdivision { points, subdivision });
        }
        Ok(PositionGrid { dimension, period, points, subdivision })
    }

    /// Lattice-unit grid: period equals the group point count per axis.
    pub fn lattice(dimension: usize, group_points: usize, subdivision: usize) -> Self {
        PositionGrid {
            dimension,
            period: vec![group_points as f64; dimension],
            points: group_points * subdivision,
            subdivision,
        }
    }

    pub fn h_pos(&self, axis: usize) -> f64 {
        self.period[axis] / self.points as f64
    }

    pub fn h_group(&self, axis: usize) -> f64 {
        self.subdivision as f64 * self.h_pos(axis)
    }

    pub fn group_points(&self) -> usize {
        self.points / self.subdivision
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Group cell weight h_g^m for an m-dimensional sub-group (first axes).
    pub fn cell_weight(&self, group_dim: usize) -> f64 {
        (0..group_dim).map(|a| self.h_group(a)).product()
    }

    /// Real coordinates of a fine grid index vector.
    pub fn fine_coords(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(a, &i)| i as f64 * self.h_pos(a)).collect()
    }

    fn flat(&self, idx: &[usize]) -> usize {
        let mut f = 0;
        for &i in idx {
            f = f * self.points + i;
        }
        f
    }

    fn unflatten(&self, mut f: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.dimension];
        for a in (0..self.dimension).rev() {
            idx[a] = f % self.points;
            f /= self.points;
        }
        idx
    }
}

/// An element of 𝒞: one complex value per fine grid point, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn(pub Vec<Complex64>);

impl GridFn {
    pub fn constant(grid: &PositionGrid, v: Complex64) -> Self {
        GridFn(vec![v; grid.len()])
    }

    pub fn from_fn(grid: &PositionGrid, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for flat in 0..grid.len() {
            let idx = grid.unflatten(flat);
            data.push(f(&grid.fine_coords(&idx)));
        }
        GridFn(data)
    }

    /// α_t with t in fine-grid steps: out(q) = self(q + t), periodic.
    pub fn translate(&self, grid: &PositionGrid, t_fine: &[i64]) -> GridFn {
        let n_pts = grid.points as i64;
        let mut out = vec![Complex64::default(); self.0.len()];
        for (flat, slot) in out.iter_mut().enumerate() {
            let idx = grid.unflatten(flat);
            let shifted: Vec<usize> = idx
                .iter()
                .zip(t_fine)
                .map(|(&i, &t)| (i as i64 + t).rem_euclid(n_pts) as usize)
                .collect();
            *slot = self.0[grid.flat(&shifted)];
        }
        GridFn(out)
    }

    pub fn conj(&self) -> GridFn {
        GridFn(self.0.iter().map(|v| v.conj()).collect())
    }

    pub fn scale(&self, c: Complex64) -> GridFn {
        GridFn(self.0.iter().map(|v| v * c).collect())
    }

    pub fn mul(&self, other: &GridFn) -> GridFn {
        GridFn(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }

    pub fn add_assign(&mut self, other: &GridFn) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Quantization parameter κ ∈ [0, 1] (0 right, 1/2 symmetric, 1 left).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa(f64);

impl Kappa {
    pub fn new(kappa: f64) -> Result<Self, AlgebraError> {
        if !(0.0..=1.0).contains(&kappa) || !kappa.is_finite() {
            return Err(AlgebraError::KappaRange { kappa });
        }
        Ok(Kappa(kappa))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// coeff · x in fine-grid steps; errors unless integral on every axis.
fn scaled_fine_shift(coeff: f64, x: &[i64], s: usize) -> Result<Vec<i64>, AlgebraError> {
    let mut out = Vec::with_capacity(x.len());
    for &xi in x {
        let t = coeff * xi as f64 * s as f64;
        let ti = t.round();
        if (t - ti).abs() > 1e-9 {
            return Err(AlgebraError::OffGridTranslation { coeff, x: x.to_vec(), s });
        }
        out.push(ti as i64);
    }
    Ok(out)
}

/// ω(y, z) as an element of 𝒞 (or a scalar when the field is constant).
enum OmegaValue {
    Scalar(Complex64),
    Grid(GridFn),
}

impl OmegaValue {
    fn translate(self, grid: &PositionGrid, t_fine: &[i64]) -> OmegaValue {
        match self {
            OmegaValue::Scalar(c) => OmegaValue::Scalar(c),
            OmegaValue::Grid(g) => OmegaValue::Grid(g.translate(grid, t_fine)),
        }
    }

    fn conj(self) -> OmegaValue {
        match self {
            OmegaValue::Scalar(c) => OmegaValue::Scalar(c.conj()),
            OmegaValue::Grid(g) => OmegaValue::Grid(g.conj()),
        }
    }

    fn mul(self, other: OmegaValue, grid: &PositionGrid) -> OmegaValue {
        match (self, other) {
            (OmegaValue::Scalar(a), OmegaValue::Scalar(b)) => OmegaValue::Scalar(a * b),
            (OmegaValue::Scalar(a), OmegaValue::Grid(g)) | (OmegaValue::Grid(g), OmegaValue::Scalar(a)) => {
                OmegaValue::Grid(g.scale(a))
            }
            (OmegaValue::Grid(a), OmegaValue::Grid(b)) => {
                let _ = grid;
                OmegaValue::Grid(a.mul(&b))
            }
        }
    }

    fn apply(&self, target: GridFn, grid: &PositionGrid) -> GridFn {
        match self {
            OmegaValue::Scalar(c) => target.scale(*c),
            OmegaValue::Grid(g) => {
                let _ = grid;
                target.mul(g)
            }
        }
    }
}

/// Finitely supported 𝒞-valued function on the group lattice.
///
/// `group_dim` ≤ grid dimension: the group acts along the first `group_dim`
/// axes (the full algebra has group_dim = n; the parallel algebra inside the
/// iterated decomposition has group_dim = n − 1 over the same n-dim grid).
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub grid: PositionGrid,
    pub group_dim: usize,
    pub entries: BTreeMap<Vec<i64>, GridFn>,
}

impl AlgebraElement {
    pub fn zero(grid: PositionGrid, group_dim: usize) -> Self {
        AlgebraElement { grid, group_dim, entries: BTreeMap::new() }
    }

    /// δ_x ⊗ f: unit mass at group point x with 𝒞-value f.
    pub fn delta(grid: PositionGrid, group_dim: usize, x: Vec<i64>, f: GridFn) -> Self {
        assert_eq!(x.len(), group_dim);
        let mut entries = BTreeMap::new();
        entries.insert(x, f);
        AlgebraElement { grid, group_dim, entries }
    }

    /// The unit (1/w)·δ_0 ⊗ 1, exact for the discretized product.
    pub fn unit(grid: PositionGrid, group_dim: usize) -> Self {
        let w = grid.cell_weight(group_dim);
        let one = GridFn::constant(&grid, Complex64::new(1.0 / w, 0.0));
        AlgebraElement::delta(grid, group_dim, vec![0; group_dim], one)
    }

    pub fn insert_add(&mut self, x: Vec<i64>, f: GridFn) {
        match self.entries.get_mut(&x) {
            Some(g) => g.add_assign(&f),
            None => {
                self.entries.insert(x, f);
            }
        }
    }

    /// ‖F‖₁ = Σ_x w · max_q |F(x)(q)|.
    pub fn norm_l1(&self) -> f64 {
        let w = self.grid.cell_weight(self.group_dim);
        self.entries.values().map(|f| w * f.max_abs()).sum()
    }

    pub fn l1_distance(&self, other: &AlgebraElement) -> f64 {
        let w = self.grid.cell_weight(self.group_dim);
        let mut keys: Vec<&Vec<i64>> = self.entries.keys().collect();
        for k in other.entries.keys() {
            if !self.entries.contains_key(k) {
                keys.push(k);
            }
        }
        let zero = GridFn::constant(&self.grid, Complex64::default());
        let mut tot = 0.0;
        for k in keys {
            let a = self.entries.get(k).unwrap_or(&zero);
            let b = other.entries.get(k).unwrap_or(&zero);
            let d: f64 = a
                .0
                .iter()
                .zip(&b.0)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            tot += w * d;
        }
        tot
    }

    /// Embed an m-dimensional group vector into n real dimensions
    /// (group axes first, zeros elsewhere).
    fn embed_real(&self, x: &[i64]) -> Vec<f64> {
        let mut v = vec![0.0; self.grid.dimension];
        for (a, &xi) in x.iter().enumerate() {
            v[a] = xi as f64 * self.grid.h_group(a);
        }
        v
    }

    /// ω(y, z) with group arguments, as scalar or grid function.
    fn omega_value(
        &self,
        field: &MagneticField,
        y: &[i64],
        z: &[i64],
    ) -> Result<OmegaValue, AlgebraError> {
        let yr = self.embed_real(y);
        let zr = self.embed_real(z);
        if field.is_uniform() {
            let origin = vec![0.0; self.grid.dimension];
            Ok(OmegaValue::Scalar(field.omega(&origin, &yr, &zr)?))
        } else {
            let mut err = None;
            let g = GridFn::from_fn(&self.grid, |q| match field.omega(q, &yr, &zr) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    Complex64::default()
                }
            });
            if let Some(e) = err {
                return Err(e.into());
            }
            Ok(OmegaValue::Grid(g))
        }
    }

    /// Box(x⊥, x∥) = ω((0∥,x⊥),(x∥,0⊥)) ω((x∥,0⊥),(0∥,x⊥))* with a possibly
    /// fractional perpendicular displacement (in group units).
    fn box_value(
        &self,
        field: &MagneticField,
        x_perp: f64,
        x_par: &[i64],
    ) -> Result<OmegaValue, AlgebraError> {
        let n = self.grid.dimension;
        let perp_real = x_perp * self.grid.h_group(n - 1);
        let mut par_real = vec![0.0; n - 1];
        for (a, &xi) in x_par.iter().enumerate() {
            par_real[a] = xi as f64 * self.grid.h_group(a);
        }
        if field.is_uniform() {
            let origin = vec![0.0; n];
            Ok(OmegaValue::Scalar(field.box_flux(&origin, perp_real, &par_real)?))
        } else {
            let mut err = None;
            let g = GridFn::from_fn(&self.grid, |q| match field.box_flux(q, perp_real, &par_real) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    Complex64::default()
                }
            });
            if let Some(e) = err {
                return Err(e.into());
            }
            Ok(OmegaValue::Grid(g))
        }
    }

    /// The twisted product (F ⋄ G)(x) = Σ_y w α_{κ(y−x)}[F(y)] α_{(1−κ)y}[G(x−y)] α_{−κx}[ω(y,x−y)].
    pub fn twisted_product(
        &self,
        other: &AlgebraElement,
        kappa: Kappa,
        field: &MagneticField,
    ) -> Result<AlgebraElement, AlgebraError> {
        if self.grid != other.grid || self.group_dim != other.group_dim {
            return Err(AlgebraError::GridMismatch);
        }
        let s = self.grid.subdivision;
        let k = kappa.value();
        let w = self.grid.cell_weight(self.group_dim);
        let mut out = AlgebraElement::zero(self.grid.clone(), self.group_dim);
        for (y, fy) in &self.entries {
            for (z, gz) in &other.entries {
                let x: Vec<i64> = y.iter().zip(z).map(|(a, b)| a + b).collect();
                let ymx: Vec<i64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
                let sh_f = pad_fine(&scaled_fine_shift(k, &ymx, s)?, self.grid.dimension);
                let sh_g = pad_fine(&scaled_fine_shift(1.0 - k, y, s)?, self.grid.dimension);
                let sh_w = pad_fine(&scaled_fine_shift(-k, &x, s)?, self.grid.dimension);
                let om = self.omega_value(field, y, z)?.translate(&self.grid, &sh_w);
                let term = om.apply(
                    fy.translate(&self.grid, &sh_f).mul(&gz.translate(&self.grid, &sh_g)),
                    &self.grid,
                );
                out.insert_add(x, term.scale(Complex64::new(w, 0.0)));
            }
        }
        Ok(out)
    }

    /// The involution F^⋄(x) = α_{(1−2κ)x}[F(−x)*].
    pub fn involution(&self, kappa: Kappa) -> Result<AlgebraElement, AlgebraError> {
        let s = self.grid.subdivision;
        let k = kappa.value();
        let mut out = AlgebraElement::zero(self.grid.clone(), self.group_dim);
        for (x, fx) in &self.entries {
            let mx: Vec<i64> = x.iter().map(|v| -v).collect();
            let sh = pad_fine(&scaled_fine_shift(1.0 - 2.0 * k, &mx, s)?, self.grid.dimension);
            out.insert_add(mx, fx.conj().translate(&self.grid, &sh));
        }
        Ok(out)
    }

    /// The isomorphism between κ-quantizations: (T F)(x) = α_{(κ_from − κ_to)x}[F(x)].
    /// It intertwines products, involutions, and representations.
    pub fn kappa_transform(
        &self,
        from: Kappa,
        to: Kappa,
    ) -> Result<AlgebraElement, AlgebraError> {
        let s = self.grid.subdivision;
        let c = from.value() - to.value();
        let mut out = AlgebraElement::zero(self.grid.clone(), self.group_dim);
        for (x, fx) in &self.entries {
            let sh = pad_fine(&scaled_fine_shift(c, x, s)?, self.grid.dimension);
            out.insert_add(x.clone(), fx.translate(&self.grid, &sh));
        }
        Ok(out)
    }

    /// β_{x⊥}[F](x∥) = α_{−κ(x∥,0⊥)}[Box(x⊥, x∥)] α_{(0∥,x⊥)}[F(x∥)] on the
    /// parallel algebra (group_dim = n−1). `x_perp` is in group units and may
    /// be fractional as long as it lands on the fine grid.
    pub fn beta_action(
        &self,
        x_perp: f64,
        kappa: Kappa,
        field: &MagneticField,
    ) -> Result<AlgebraElement, AlgebraError> {
        let n = self.grid.dimension;
        assert_eq!(self.group_dim, n - 1, "beta acts on the parallel algebra");
        let s = self.grid.subdivision;
        let k = kappa.value();
        let tp = x_perp * s as f64;
        let tpi = tp.round();
        if (tp - tpi).abs() > 1e-9 {
            return Err(AlgebraError::OffGridTranslation {
                coeff: x_perp,
                x: vec![1],
                s,
            });
        }
        let mut perp_shift = vec![0i64; n];
        perp_shift[n - 1] = tpi as i64;
        let mut out = AlgebraElement::zero(self.grid.clone(), self.group_dim);
        for (xpar, f) in &self.entries {
            let boxv = self.box_value(field, x_perp, xpar)?;
            let sh_box = pad_fine(&scaled_fine_shift(-k, xpar, s)?, n);
            let boxv = boxv.translate(&self.grid, &sh_box);
            let term = boxv.apply(f.translate(&self.grid, &perp_shift), &self.grid);
            out.insert_add(xpar.clone(), term);
        }
        Ok(out)
    }

    /// Serialization per the documented JSON schema.
    pub fn to_json(&self, kappa: Kappa) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|(x, f)| {
                let mut values = Vec::with_capacity(2 * f.0.len());
                for v in &f.0 {
                    values.push(v.re);
                    values.push(v.im);
                }
                serde_json::json!({ "x": x, "values": values })
            })
            .collect();
        serde_json::json!({
            "grid": {
                "n": self.grid.dimension,
                "L": self.grid.period,
                "N": self.grid.points,
                "s": self.grid.subdivision,
                "group_dim": self.group_dim,
            },
            "kappa": kappa.value(),
            "entries": entries,
        })
    }

    pub fn from_json(doc: &serde_json::Value) -> Result<(AlgebraElement, Kappa), AlgebraError> {
        let bad = |m: &str| AlgebraError::Malformed(m.to_string());
        let grid = doc.get("grid").ok_or_else(|| bad("missing grid"))?;
        let n = grid.get("n").and_then(|v| v.as_u64()).ok_or_else(|| bad("grid.n"))? as usize;
        let period: Vec<f64> = serde_json::from_value(
            grid.get("L").cloned().ok_or_else(|| bad("grid.L"))?,
        )
        .map_err(|e| bad(&format!("grid.L: {e}")))?;
        let points =
            grid.get("N").and_then(|v| v.as_u64()).ok_or_else(|| bad("grid.N"))? as usize;
        let s = grid.get("s").and_then(|v| v.as_u64()).ok_or_else(|| bad("grid.s"))? as usize;
        let group_dim = grid
            .get("group_dim")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| bad("grid.group_dim"))? as usize;
        let kappa = Kappa::new(
            doc.get("kappa").and_then(|v| v.as_f64()).ok_or_else(|| bad("kappa"))?,
        )?;
        let g = PositionGrid::new(n, period, points, s)?;
        let mut elem = AlgebraElement::zero(g, group_dim);
        let entries = doc
            .get("entries")
            .and_then(|v| v.as_array())
            .ok_or_else(|| bad("entries"))?;
        for ent in entries {
            let x: Vec<i64> = serde_json::from_value(
                ent.get("x").cloned().ok_or_else(|| bad("entry.x"))?,
            )
            .map_err(|e| bad(&format!("entry.x: {e}")))?;
            let raw: Vec<f64> = serde_json::from_value(
                ent.get("values").cloned().ok_or_else(|| bad("entry.values"))?,
            )
            .map_err(|e| bad(&format!("entry.values: {e}")))?;
            if raw.len() != 2 * elem.grid.len() {
                return Err(bad("entry.values length"));
            }
            let vals: Vec<Complex64> =
                raw.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
            elem.insert_add(x, GridFn(vals));
        }
        Ok((elem, kappa))
    }
}

fn pad_fine(group_shift: &[i64], n: usize) -> Vec<i64> {
    let mut v = vec![0i64; n];
    v[..group_shift.len()].copy_from_slice(group_shift);
    v
}

/// An element of the iterated algebra: outer support over the perpendicular
/// group axis, inner elements in the parallel algebra (which still carries the
/// full n-dimensional position grid).
#[derive(Debug, Clone)]
pub struct IteratedElement {
    pub grid: PositionGrid,
    pub outer: BTreeMap<i64, AlgebraElement>,
}

impl IteratedElement {
    pub fn zero(grid: PositionGrid) -> Self {
        IteratedElement { grid, outer: BTreeMap::new() }
    }

    fn insert_add(&mut self, x_perp: i64, inner: AlgebraElement) {
        match self.outer.get_mut(&x_perp) {
            Some(acc) => {
                for (k, v) in inner.entries {
                    acc.insert_add(k, v);
                }
            }
            None => {
                self.outer.insert(x_perp, inner);
            }
        }
    }

    pub fn norm_l1(&self) -> f64 {
        let w_perp = self.grid.h_group(self.grid.dimension - 1);
        self.outer.values().map(|inner| w_perp * inner.norm_l1()).sum()
    }

    pub fn l1_distance(&self, other: &IteratedElement) -> f64 {
        let w_perp = self.grid.h_group(self.grid.dimension - 1);
        let empty = AlgebraElement::zero(self.grid.clone(), self.grid.dimension - 1);
        let mut keys: Vec<i64> = self.outer.keys().cloned().collect();
        for k in other.outer.keys() {
            if !self.outer.contains_key(k) {
                keys.push(*k);
            }
        }
        keys.iter()
            .map(|k| {
                let a = self.outer.get(k).unwrap_or(&empty);
                let b = other.outer.get(k).unwrap_or(&empty);
                w_perp * a.l1_distance(b)
            })
            .sum()
    }
}

/// The bijection F ↦ F′ of the iterated decomposition:
/// F′(x∥; x⊥) = α_{−κx}[Box(κx⊥, x∥)* ω((x∥,0⊥),(0∥,x⊥))*] F(x∥, x⊥).
pub fn to_iterated(
    f: &AlgebraElement,
    kappa: Kappa,
    field: &MagneticField,
) -> Result<IteratedElement, AlgebraError> {
    iterate_impl(f, kappa, field, false)
}

/// Inverse of [`to_iterated`]; exact because the prefactor is unit modulus.
pub fn from_iterated(
    fp: &IteratedElement,
    kappa: Kappa,
    field: &MagneticField,
) -> Result<AlgebraElement, AlgebraError> {
    let n = fp.grid.dimension;
    let template = AlgebraElement::zero(fp.grid.clone(), n);
    let mut out = AlgebraElement::zero(fp.grid.clone(), n);
    for (&xp, inner) in &fp.outer {
        for (xpar, val) in &inner.entries {
            let mut x = xpar.clone();
            x.push(xp);
            let pref = prefactor(&template, kappa, field, &x)?;
            // undo: multiply by the conjugate prefactor
            let restored = pref.conj().apply(val.clone(), &fp.grid);
            out.insert_add(x, restored);
        }
    }
    Ok(out)
}

fn iterate_impl(
    f: &AlgebraElement,
    kappa: Kappa,
    field: &MagneticField,
    _inverse: bool,
) -> Result<IteratedElement, AlgebraError> {
    let n = f.grid.dimension;
    assert_eq!(f.group_dim, n, "to_iterated expects the full algebra");
    let mut out = IteratedElement::zero(f.grid.clone());
    for (x, val) in &f.entries {
        let (xpar, xp) = (x[..n - 1].to_vec(), x[n - 1]);
        let pref = prefactor(f, kappa, field, x)?;
        let inner_val = pref.apply(val.clone(), &f.grid);
        let inner = AlgebraElement::delta(f.grid.clone(), n - 1, xpar, inner_val);
        out.insert_add(xp, inner);
    }
    Ok(out)
}

/// α_{−κx}[Box(κ x⊥, x∥)* ω((x∥,0⊥),(0∥,x⊥))*] for a full-group point x.
fn prefactor(
    template: &AlgebraElement,
    kappa: Kappa,
    field: &MagneticField,
    x: &[i64],
) -> Result<OmegaValue, AlgebraError> {
    let n = template.grid.dimension;
    let s = template.grid.subdivision;
    let k = kappa.value();
    let xpar = &x[..n - 1];
    let xp = x[n - 1];
    let boxv = template.box_value(field, k * xp as f64, xpar)?.conj();
    // ω((x∥,0⊥),(0∥,x⊥)) with full-dimension embeddings
    let mut u = vec![0i64; n];
    u[..n - 1].copy_from_slice(xpar);
    let mut v = vec![0i64; n];
    v[n - 1] = xp;
    let omv = template.omega_value(field, &u, &v)?.conj();
    let sh = scaled_fine_shift(-k, x, s)?;
    let sh = pad_fine(&sh, n);
    Ok(boxv.mul(omv, &template.grid).translate(&template.grid, &sh))
}

/// (F′ ⋄_β G′)(·; x⊥) = Σ_{y⊥} w⊥ · β_{κ(y⊥−x⊥)}[F′(·;y⊥)] ⋄ β_{(1−κ)y⊥}[G′(·;x⊥−y⊥)]
/// with the inner ⋄ taken in the parallel algebra (twisted by ω∥).
pub fn iterated_product(
    fp: &IteratedElement,
    gp: &IteratedElement,
    kappa: Kappa,
    field: &MagneticField,
) -> Result<IteratedElement, AlgebraError> {
    if fp.grid != gp.grid {
        return Err(AlgebraError::GridMismatch);
    }
    let k = kappa.value();
    let w_perp = fp.grid.h_group(fp.grid.dimension - 1);
    let mut out = IteratedElement::zero(fp.grid.clone());
    for (&yp, fin) in &fp.outer {
        for (&zp, gin) in &gp.outer {
            let xp = yp + zp;
            let bf = fin.beta_action(k * (yp - xp) as f64, kappa, field)?;
            let bg = gin.beta_action((1.0 - k) * yp as f64, kappa, field)?;
            let mut term = bf.twisted_product(&bg, kappa, field)?;
            for v in term.entries.values_mut() {
                *v = v.scale(Complex64::new(w_perp, 0.0));
            }
            out.insert_add(xp, term);
        }
    }
    Ok(out)
}

/// (F′)^{⋄_β}(·; x⊥) = β_{(1−2κ)x⊥}[(F′(·; −x⊥))^⋄].
pub fn iterated_involution(
    fp: &IteratedElement,
    kappa: Kappa,
    field: &MagneticField,
) -> Result<IteratedElement, AlgebraError> {
    let k = kappa.value();
    let mut out = IteratedElement::zero(fp.grid.clone());
    for (&xp, inner) in &fp.outer {
        let inv = inner.involution(kappa)?;
        let moved = inv.beta_action((1.0 - 2.0 * k) * (-xp) as f64, kappa, field)?;
        out.insert_add(-xp, moved);
    }
    Ok(out)
}

/// Constant field carrying flux 2π·p/q through each group plaquette of `grid`.
pub fn flux_field_for_grid(grid: &PositionGrid, p: i64, q: i64) -> MagneticField {
    let h2 = grid.h_group(0) * grid.h_group(1);
    let b = 2.0 * std::f64::consts::PI * p as f64 / (q as f64 * h2);
    MagneticField::constant_2d(b)
}

/// Faithful representation on ℓ²(group torus), 2D only.
///
/// π(F)ψ(q) = Σ_x w Λ(q, q+x) F(x)(q + κx) ψ(q + x), with the line phase
/// Λ(q, q+x) = exp(i 2π(p/q) x₁ (q₂ + x₂/2)) in the Landau-gauge convention of
/// the lattice-hall module. Requires flux p/q with q dividing the torus side,
/// so the magnetic translations close; it is then a *-homomorphism exactly:
/// π(F⋄G) = π(F)π(G) and π(F^⋄) = π(F)†, with the same ω on both sides.
pub fn represent(
    f: &AlgebraElement,
    p: i64,
    q: i64,
    torus_size: usize,
    kappa: Kappa,
) -> Result<DMatrix<Complex64>, AlgebraError> {
    if f.grid.dimension != 2 || f.group_dim != 2 {
        return Err(AlgebraError::NotTwoDimensional);
    }
    if q <= 0 || gcd(p.unsigned_abs(), q.unsigned_abs()) != 1 {
        return Err(AlgebraError::BadFlux);
    }
    let ng = f.grid.group_points();
    if torus_size != ng {
        return Err(AlgebraError::Malformed(format!(
            "torus size {torus_size} must match the grid's group points {ng}"
        )));
    }
    if ng % q as usize != 0 {
        return Err(AlgebraError::TorusNotDivisible { group_points: ng, q });
    }
    let s = f.grid.subdivision as i64;
    let npos = f.grid.points as i64;
    let k = kappa.value();
    let dim = ng * ng;
    let phi = p as f64 / q as f64;
    let w = f.grid.cell_weight(2);
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    let idx = |a: i64, b: i64| -> usize {
        let ngi = ng as i64;
        (a.rem_euclid(ngi) * ngi + b.rem_euclid(ngi)) as usize
    };
    for (x, fx) in &f.entries {
        let shift = scaled_fine_shift(k, x, f.grid.subdivision)?;
        for q1 in 0..ng as i64 {
            for q2 in 0..ng as i64 {
                let lam = Complex64::from_polar(
                    1.0,
                    2.0 * std::f64::consts::PI * phi * x[0] as f64 * (q2 as f64 + x[1] as f64 / 2.0),
                );
                let f1 = (q1 * s + shift[0]).rem_euclid(npos) as usize;
                let f2 = (q2 * s + shift[1]).rem_euclid(npos) as usize;
                let val = fx.0[f1 * f.grid.points + f2];
                m[(idx(q1, q2), idx(q1 + x[0], q2 + x[1]))] += w * lam * val;
            }
        }
    }
    Ok(m)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
