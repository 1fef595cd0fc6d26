//! Renormalised fixed-step Numerov integration of u″ = Q(r) u.
//!
//! The three-term recurrence
//!
//! ```text
//! u_{n+1}(1 − h²Q_{n+1}/12) = 2u_n(1 + 5h²Q_n/12) − u_{n−1}(1 − h²Q_{n−1}/12)
//! ```
//!
//! has local error O(h⁶), global O(h⁴). The solution is rescaled whenever it
//! grows past 1e200 (only ratios matter for matching) and sign changes can be
//! counted along the way.

pub struct NumerovOutcome {
    /// u at the final grid point.
    pub u_last: f64,
    /// u one step before the final point.
    pub u_prev: f64,
    pub r_last: f64,
    pub step: f64,
    pub nodes: usize,
}

/// Integrate from r0 with initial values u(r0) = u0, u(r0 + h) = u1 over
/// `steps` further points (so the final point is r0 + (steps+1)·h).
pub fn integrate(
    q: impl Fn(f64) -> f64,
    r0: f64,
    h: f64,
    steps: usize,
    u0: f64,
    u1: f64,
    count_nodes: bool,
) -> NumerovOutcome {
    let h2 = h * h / 12.0;
    let mut um = u0;
    let mut uc = u1;
    let mut qm = q(r0);
    let mut qc = q(r0 + h);
    let mut nodes = 0usize;
    if count_nodes && um != 0.0 && uc != 0.0 && um.signum() != uc.signum() {
        nodes += 1;
    }
    let mut r = r0 + h;
    for _ in 0..steps {
        let rn = r + h;
        let qn = q(rn);
        let un = (2.0 * uc * (1.0 + 5.0 * h2 * qc) - um * (1.0 - h2 * qm)) / (1.0 - h2 * qn);
        if count_nodes && un != 0.0 && uc != 0.0 && uc.signum() != un.signum() {
            nodes += 1;
        }
        um = uc;
        uc = un;
        qm = qc;
        qc = qn;
        r = rn;
        let mag = uc.abs().max(um.abs());
        if mag > 1e200 {
            uc /= mag;
            um /= mag;
        }
    }
    NumerovOutcome { u_last: uc, u_prev: um, r_last: r, step: h, nodes }
}
