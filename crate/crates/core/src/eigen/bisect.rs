//! Edge eigenvalues of Hermitian band matrices by bisection on positive
//! definiteness: `A - σ` is positive definite iff `λ_min(A) > σ`, decided by
//! an `LDLᴴ` factorization in band storage (`O(n b²)` per test).

use super::op::{Field, SparseOp};

/// Lower band of `sign · (A - σ)` in row-major band storage.
struct Band<E> {
    n: usize,
    b: usize,
    /// `lower[i * (b + 1) + (j + b - i)]` holds entry `(i, j)` for `i - b <= j <= i`.
    lower: Vec<E>,
}

impl<E: Field> Band<E> {
    fn from_op(op: &SparseOp<E>) -> Self {
        let n = op.n;
        let b = op.index_band;
        let mut lower = vec![E::zero(); n * (b + 1)];
        for i in 0..n {
            for (j, v) in op.row(i) {
                if j <= i {
                    lower[i * (b + 1) + (j + b - i)] = v;
                }
            }
        }
        Band { n, b, lower }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> E {
        self.lower[i * (self.b + 1) + (j + self.b - i)]
    }

    /// Whether `sign · (A - σ)` is positive definite.
    fn positive_definite(&self, sign: f64, sigma: f64, l: &mut [E], d: &mut [f64]) -> bool {
        let (n, b) = (self.n, self.b);
        let w = b + 1;
        for i in 0..n {
            let lo_i = i.saturating_sub(b);
            for j in lo_i..i {
                let lo_j = j.saturating_sub(b);
                let mut s = self.at(i, j) * E::real_scalar(sign);
                for k in lo_i.max(lo_j)..j {
                    s -= l[i * w + (k + b - i)]
                        * E::real_scalar(d[k])
                        * l[j * w + (k + b - j)].conjugate();
                }
                l[i * w + (j + b - i)] = s / E::real_scalar(d[j]);
            }
            let mut di = sign * (self.at(i, i).real() - sigma);
            for k in lo_i..i {
                di -= l[i * w + (k + b - i)].modulus_squared() * d[k];
            }
            if di.is_nan() || di <= 0.0 {
                return false;
            }
            d[i] = di;
        }
        true
    }
}

/// Bracket `[lo, hi]` of `λ_min` (or `λ_max` when `lowest` is false), with
/// the factorization backward error added on both sides.
pub(crate) fn edge_bracket<E: Field>(op: &SparseOp<E>, lowest: bool, width: f64) -> (f64, f64) {
    let band = Band::from_op(op);
    let mut l = vec![E::zero(); band.n * (band.b + 1)];
    let mut d = vec![0.0; band.n];
    let (g_lo, g_hi) = op.gershgorin();
    let scale = op.hahn.max(f64::MIN_POSITIVE);
    let slack = 1e-14 * (1.0 + scale);
    // Rayleigh quotients of unit vectors bound the edge from the inside.
    let diag = (0..op.n).map(|i| band.at(i, i).real());
    let (mut lo, mut hi) = if lowest {
        (g_lo - slack, diag.fold(f64::INFINITY, f64::min) + slack)
    } else {
        (
            -(g_hi + slack),
            -(diag.fold(f64::NEG_INFINITY, f64::max) - slack),
        )
    };
    // Work on `sign · A` so that the target is always the lowest eigenvalue.
    let sign = if lowest { 1.0 } else { -1.0 };
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if band.positive_definite(sign, sign * mid, &mut l, &mut d) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let pad = 4.0 * (band.b as f64 + 1.0) * f64::EPSILON * scale;
    if lowest {
        (lo - pad, hi + pad)
    } else {
        (-hi - pad, -lo + pad)
    }
}
