//! Real symmetric tridiagonal helpers for the Lanczos projection:
//! Sturm counts, edge bisection and inverse iteration.

/// Number of eigenvalues strictly below `sigma` of the tridiagonal matrix
/// with diagonal `a` and off-diagonal `b` (`b.len() == a.len() - 1`).
pub(crate) fn sturm_count(a: &[f64], b: &[f64], sigma: f64) -> usize {
    let scale = a
        .iter()
        .map(|x| x.abs())
        .chain(b.iter().map(|x| x.abs()))
        .fold(f64::MIN_POSITIVE, f64::max);
    let tiny = f64::EPSILON * scale;
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..a.len() {
        let off = if i == 0 { 0.0 } else { b[i - 1] * b[i - 1] / d };
        d = a[i] - sigma - off;
        if d == 0.0 {
            d = -tiny;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..a.len() {
        let r =
            if i > 0 { b[i - 1].abs() } else { 0.0 } + if i < b.len() { b[i].abs() } else { 0.0 };
        lo = lo.min(a[i] - r);
        hi = hi.max(a[i] + r);
    }
    (lo, hi)
}

/// Smallest (`lowest = true`) or largest eigenvalue by bisection.
pub(crate) fn edge_eigenvalue(a: &[f64], b: &[f64], lowest: bool) -> f64 {
    let n = a.len();
    let (mut lo, mut hi) = gershgorin(a, b);
    let target = if lowest { 1 } else { n };
    // Invariant: count(lo) < target <= count(hi).
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(a, b, mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T - shift) x = rhs` by Gaussian elimination with partial
/// pivoting on the tridiagonal structure.
fn tridiag_solve(a: &[f64], b: &[f64], shift: f64, rhs: &mut [f64]) {
    let n = a.len();
    if n == 1 {
        let d = a[0] - shift;
        rhs[0] /= if d == 0.0 { f64::EPSILON } else { d };
        return;
    }
    // Row i after elimination: u0[i] x_i + u1[i] x_{i+1} + u2[i] x_{i+2}.
    let mut u0 = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let mut diag = a[0] - shift;
    let mut sup = b[0];
    for i in 0..n - 1 {
        let sub = b[i];
        let next_diag = a[i + 1] - shift;
        let next_sup = if i + 1 < n - 1 { b[i + 1] } else { 0.0 };
        if diag.abs() >= sub.abs() {
            let d = if diag == 0.0 { f64::EPSILON } else { diag };
            let m = sub / d;
            u0[i] = d;
            u1[i] = sup;
            u2[i] = 0.0;
            rhs[i + 1] -= m * rhs[i];
            diag = next_diag - m * sup;
            sup = next_sup;
        } else {
            let m = diag / sub;
            u0[i] = sub;
            u1[i] = next_diag;
            u2[i] = next_sup;
            rhs.swap(i, i + 1);
            rhs[i + 1] -= m * rhs[i];
            diag = sup - m * next_diag;
            sup = -m * next_sup;
        }
    }
    u0[n - 1] = if diag == 0.0 { f64::EPSILON } else { diag };
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= u1[i] * rhs[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * rhs[i + 2];
        }
        rhs[i] = s / u0[i];
    }
}

/// Unit eigenvector for the eigenvalue `theta` by inverse iteration.
pub(crate) fn eigenvector(a: &[f64], b: &[f64], theta: f64) -> Vec<f64> {
    let n = a.len();
    let scale = a.iter().chain(b).fold(1.0f64, |m, x| m.max(x.abs()));
    let shift = theta + 4.0 * f64::EPSILON * scale;
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7 % 11) as f64)).collect();
    for _ in 0..4 {
        tridiag_solve(a, b, shift, &mut x);
        let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(nrm.is_finite() && nrm > 0.0) {
            break;
        }
        x.iter_mut().for_each(|v| *v /= nrm);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph_edges() {
        let n = 50;
        let a = vec![0.0; n];
        let b = vec![1.0; n - 1];
        let exact = 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((edge_eigenvalue(&a, &b, true) + exact).abs() < 1e-13);
        assert!((edge_eigenvalue(&a, &b, false) - exact).abs() < 1e-13);
        assert_eq!(sturm_count(&a, &b, 0.0), 25);
    }

    #[test]
    fn inverse_iteration_gives_eigenvector() {
        let a = vec![2.0, -1.0, 0.5, 3.0, 0.0];
        let b = vec![1.0, 0.3, -2.0, 0.7];
        let theta = edge_eigenvalue(&a, &b, true);
        let v = eigenvector(&a, &b, theta);
        let n = a.len();
        let mut res = 0.0f64;
        for i in 0..n {
            let mut tv = a[i] * v[i];
            if i > 0 {
                tv += b[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                tv += b[i] * v[i + 1];
            }
            res = res.max((tv - theta * v[i]).abs());
        }
        assert!(res < 1e-12, "residual {res}");
    }
}
