//! Small dense-linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted ascending
/// and columns permuted to match.
pub fn sorted_hermitian_eigen(m: DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let dim = m.nrows();
    let se = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(dim, dim);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Same for a real symmetric matrix.
pub fn sorted_symmetric_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let dim = m.nrows();
    let se = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(dim, dim);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Eigenvalues of a real symmetric matrix, sorted ascending.
pub fn symmetric_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().cloned().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Eigenvalues of a complex Hermitian matrix, sorted ascending.
pub fn symmetric_eigenvalues_complex(m: DMatrix<Complex64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().cloned().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Pairwise (tree) summation. Deterministic for a fixed input order and
/// independent of any thread count, so parallel maps that collect in index
/// order stay bit-reproducible.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Pairwise summation of complex values.
pub fn pairwise_sum_complex(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum_complex(&values[..mid]) + pairwise_sum_complex(&values[mid..])
        }
    }
}

/// Number of eigenvalues of a symmetric tridiagonal matrix strictly below `e`,
/// by the Sturm/LDLᵀ pivot-sign count. `diag` has length n, `off` length n−1.
pub fn tridiag_count_below(diag: &[f64], off: &[f64], e: f64) -> usize {
    let mut count = 0usize;
    let mut q = diag[0] - e;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let mut denom = q;
        if denom == 0.0 {
            denom = 1e-300;
        }
        q = diag[i] - e - off[i - 1] * off[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th (0-based) smallest eigenvalue of a symmetric tridiagonal matrix,
/// located by bisection on the Sturm count.
pub fn tridiag_eigenvalue(diag: &[f64], off: &[f64], k: usize, tol: f64) -> f64 {
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let n = diag.len();
    for i in 0..n {
        let mut r = 0.0;
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i + 1 < n {
            r += off[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let mut a = lo;
    let mut b = hi;
    while b - a > tol * (1.0 + a.abs().max(b.abs())) {
        let mid = 0.5 * (a + b);
        if tridiag_count_below(diag, off, mid) > k {
            b = mid;
        } else {
            a = mid;
        }
    }
    0.5 * (a + b)
}

/// Gauss–Legendre nodes and weights on [0, 1], by Newton iteration on the
/// Legendre polynomial.
pub fn gauss_legendre_unit(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // initial guess (Chebyshev-like)
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[i] = 0.5 * (1.0 - x); // map [-1,1] -> [0,1], reversed order is fine
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp); // 2/(...)/2 for the interval map
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Frobenius-norm distance between complex matrices.
pub fn mat_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).norm()
}

/// Build a complex diagonal matrix from a vector of phases.
pub fn diag_unitary(phases: &DVector<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_diagonal(phases)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for order in [2usize, 4, 8, 12] {
            let (x, w) = gauss_legendre_unit(order);
            // exact for degree <= 2*order-1 on [0,1]
            for deg in 0..(2 * order) {
                let quad: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(&xi, &wi)| wi * xi.powi(deg as i32))
                    .sum();
                let exact = 1.0 / (deg as f64 + 1.0);
                assert!(
                    (quad - exact).abs() < 1e-13,
                    "order {order} deg {deg}: {quad} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn sturm_count_matches_dense_eigen() {
        // simple chain: diag 2, off -1 (free Dirichlet Laplacian), eigenvalues known
        let n = 20;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let exact: Vec<f64> = (1..=n)
            .map(|k| 2.0 - 2.0 * (std::f64::consts::PI * k as f64 / (n as f64 + 1.0)).cos())
            .collect();
        for e in [0.1, 0.5, 1.0, 2.0, 3.9] {
            let expect = exact.iter().filter(|&&x| x < e).count();
            assert_eq!(tridiag_count_below(&diag, &off, e), expect);
        }
        let ev = tridiag_eigenvalue(&diag, &off, 0, 1e-12);
        let mut sorted = exact.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev - sorted[0]).abs() < 1e-9);
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-9);
    }
}
