use nalgebra::ComplexField;
use num_complex::Complex64;

use crate::kernel::{BandKernel, SiteSet};
use crate::scalar::Scalar;

/// Field the numerical routines run in: `f64` for real kernels,
/// `Complex64` for Hermitian ones.
pub(crate) trait Field: ComplexField<RealField = f64> + Copy {
    fn from_c64(z: Complex64) -> Self;
    fn real_scalar(x: f64) -> Self {
        Self::from_real(x)
    }
}

impl Field for f64 {
    fn from_c64(z: Complex64) -> Self {
        z.re
    }
}

impl Field for Complex64 {
    fn from_c64(z: Complex64) -> Self {
        z
    }
}

/// A kernel compressed to a window, in local row-compressed form.
pub(crate) struct SparseOp<E> {
    pub n: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<E>,
    /// `max |i - j|` over stored entries.
    pub index_band: usize,
    pub hahn: f64,
}

impl<E: Field> SparseOp<E> {
    pub fn new<T: Scalar>(k: &BandKernel<T>, window: &SiteSet) -> Self {
        let n = window.len();
        let mut row_start = vec![0usize; n + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut index_band = 0;
        let mut row_sums = vec![0.0; n];
        let mut col_sums = vec![0.0; n];
        for (i, x) in window.iter().enumerate() {
            for &(_, y, v) in k.row(x) {
                if let Some(j) = window.position(y) {
                    cols.push(j);
                    vals.push(E::from_c64(v.to_c64()));
                    index_band = index_band.max(i.abs_diff(j));
                    row_sums[i] += v.modulus();
                    col_sums[j] += v.modulus();
                }
            }
            row_start[i + 1] = cols.len();
        }
        let hahn = row_sums
            .iter()
            .chain(&col_sums)
            .fold(0.0f64, |m, &s| m.max(s));
        SparseOp {
            n,
            row_start,
            cols,
            vals,
            index_band,
            hahn,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, E)> + '_ {
        let r = self.row_start[i]..self.row_start[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn matvec(&self, x: &[E], y: &mut [E]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = E::zero();
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            *yi = acc;
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<E> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let mut d = 0.0;
            let mut r = 0.0;
            for (j, v) in self.row(i) {
                if j == i {
                    d = v.real();
                } else {
                    r += v.modulus();
                }
            }
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }
}

pub(crate) fn dot<E: Field>(a: &[E], b: &[E]) -> E {
    a.iter()
        .zip(b)
        .fold(E::zero(), |acc, (x, y)| acc + x.conjugate() * *y)
}

pub(crate) fn norm<E: Field>(a: &[E]) -> f64 {
    a.iter().map(|x| x.modulus_squared()).sum::<f64>().sqrt()
}
