//! Short-range radial potentials (|V(r)| ≤ c(1+r)^{−β} with β > 1; the
//! built-in families are compactly supported or exponentially decaying).

use serde::{Deserialize, Serialize};

/// A real short-range radial potential V(r).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Potential {
    /// V = −depth on r < radius.
    SquareWell { depth: f64, radius: f64 },
    /// Piecewise constant: value `v` on (previous r, r]; zero beyond the last.
    /// Radii strictly increasing.
    Staircase { steps: Vec<StaircaseStep> },
    /// −depth on r < well_radius, +barrier on well_radius < r < barrier_radius.
    WellBarrier { depth: f64, well_radius: f64, barrier: f64, barrier_radius: f64 },
    /// V = −strength · exp(−r/range).
    Exponential { strength: f64, range: f64 },
    /// V = −strength · exp(−r/range) / (r + core), core > 0.
    YukawaRegularized { strength: f64, range: f64, core: f64 },
    /// Piecewise-linear interpolation of (r, V) samples; zero beyond the last.
    Table { rs: Vec<f64>, vs: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaircaseStep {
    pub r: f64,
    pub v: f64,
}

impl Potential {
    pub fn validate(&self) -> Result<(), String> {
        match self {
            Potential::SquareWell { radius, .. } if *radius <= 0.0 => {
                Err("square well radius must be positive".into())
            }
            Potential::Staircase { steps } => {
                if steps.is_empty() {
                    return Err("staircase needs at least one step".into());
                }
                let mut prev = 0.0;
                for s in steps {
                    if s.r <= prev {
                        return Err("staircase radii must be strictly increasing".into());
                    }
                    prev = s.r;
                }
                Ok(())
            }
            Potential::WellBarrier { well_radius, barrier_radius, .. } => {
                if *well_radius <= 0.0 || *barrier_radius <= *well_radius {
                    Err("well/barrier radii must satisfy 0 < a < b".into())
                } else {
                    Ok(())
                }
            }
            Potential::Exponential { range, .. } | Potential::YukawaRegularized { range, .. }
                if *range <= 0.0 =>
            {
                Err("range must be positive".into())
            }
            Potential::YukawaRegularized { core, .. } if *core <= 0.0 => {
                Err("core must be positive".into())
            }
            Potential::Table { rs, vs } => {
                if rs.len() != vs.len() || rs.len() < 2 {
                    return Err("table needs matching rs/vs with at least two samples".into());
                }
                if rs.windows(2).any(|w| w[1] <= w[0]) {
                    return Err("table radii must be strictly increasing".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Potential::SquareWell { depth, radius } => {
                if r < *radius {
                    -depth
                } else {
                    0.0
                }
            }
            Potential::Staircase { steps } => {
                for s in steps {
                    if r < s.r {
                        return s.v;
                    }
                }
                0.0
            }
            Potential::WellBarrier { depth, well_radius, barrier, barrier_radius } => {
                if r < *well_radius {
                    -depth
                } else if r < *barrier_radius {
                    *barrier
                } else {
                    0.0
                }
            }
            Potential::Exponential { strength, range } => -strength * (-r / range).exp(),
            Potential::YukawaRegularized { strength, range, core } => {
                -strength * (-r / range).exp() / (r + core)
            }
            Potential::Table { rs, vs } => {
                if r >= *rs.last().unwrap() {
                    return 0.0;
                }
                if r <= rs[0] {
                    return vs[0];
                }
                let i = rs.partition_point(|&x| x <= r);
                let (r0, r1) = (rs[i - 1], rs[i]);
                let t = (r - r0) / (r1 - r0);
                vs[i - 1] * (1.0 - t) + vs[i] * t
            }
        }
    }

    /// Effective cutoff radius beyond which V is treated as zero.
    pub fn r_max(&self) -> f64 {
        match self {
            Potential::SquareWell { radius, .. } => *radius,
            Potential::Staircase { steps } => steps.last().unwrap().r,
            Potential::WellBarrier { barrier_radius, .. } => *barrier_radius,
            Potential::Exponential { strength, range } => {
                range * (strength.abs().max(1.0) / 1e-12).ln()
            }
            Potential::YukawaRegularized { strength, range, core } => {
                range * ((strength.abs().max(1.0) / core.min(1.0)) / 1e-12).ln()
            }
            Potential::Table { rs, .. } => *rs.last().unwrap(),
        }
    }

    /// Radii at which V is discontinuous (integration grids align to these).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Potential::SquareWell { radius, .. } => vec![*radius],
            Potential::Staircase { steps } => steps.iter().map(|s| s.r).collect(),
            Potential::WellBarrier { well_radius, barrier_radius, .. } => {
                vec![*well_radius, *barrier_radius]
            }
            _ => vec![],
        }
    }

    /// ν = ∫₀^∞ V(r) r² dr = (4π)⁻¹ ∫ V d³x, analytic where available.
    pub fn nu(&self) -> f64 {
        match self {
            Potential::SquareWell { depth, radius } => -depth * radius.powi(3) / 3.0,
            Potential::Staircase { steps } => {
                let mut acc = 0.0;
                let mut prev = 0.0;
                for s in steps {
                    acc += s.v * (s.r.powi(3) - prev.powi(3)) / 3.0;
                    prev = s.r;
                }
                acc
            }
            Potential::WellBarrier { depth, well_radius, barrier, barrier_radius } => {
                -depth * well_radius.powi(3) / 3.0
                    + barrier * (barrier_radius.powi(3) - well_radius.powi(3)) / 3.0
            }
            Potential::Exponential { strength, range } => {
                // ∫ r² e^{−r/a} dr = 2a³
                -strength * 2.0 * range.powi(3)
            }
            _ => self.nu_quadrature(),
        }
    }

    /// Composite-Simpson fallback for ν.
    fn nu_quadrature(&self) -> f64 {
        let rmax = self.r_max();
        let n = 20_000usize; // even
        let h = rmax / n as f64;
        let f = |r: f64| self.eval(r) * r * r;
        let mut acc = f(0.0) + f(rmax);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / 3.0
    }
}
