use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::model::{trace_set, Shell, SubshiftModel};
use super::seq::{SeqPoint, Word};
use super::symbol::HoppingSymbol;
use crate::eigen::SpectralInterval;
use crate::error::{Error, Result};
use crate::kernel::BandKernel;
use crate::scalar::Scalar;
use crate::space::SiteSpace;

fn window_space(window: i64) -> Result<Arc<SiteSpace>> {
    if window < 0 {
        return Err(Error::Range(format!("window {window} < 0")));
    }
    Ok(Arc::new(SiteSpace::integer_window(-window, window)?))
}

/// `H^N_x` on `[-window, window]`: `K(k, l) = h(τ_l(x), k - l)` for
/// `k, l ∈ ℤ_x(N)`. The kernel lives on the whole window; its support is the
/// trace set.
pub fn subshift_operator<T: Scalar>(
    h: &HoppingSymbol<T>,
    x: &SeqPoint,
    shell: &Shell,
    window: i64,
) -> Result<BandKernel<T>> {
    let sites = trace_set(x, shell, window)?;
    let space = window_space(window)?;
    let hops = h.hop_support();
    let mut entries = Vec::new();
    for l in sites.iter() {
        for &d in &hops {
            let k = l + d;
            if sites.contains(k) {
                entries.push((k, l, h.value_at_shift(x, l, d)));
            }
        }
    }
    BandKernel::from_entries(space, entries, h.max_hop() as f64)
}

/// `H_M` on the orbit of the generator, with orbit points `τ_k(z)` labelled
/// by `k`: the entry in row `x` and column `τ_{-l}(x)` is `h(τ_{-l}(x), l)`.
pub fn main_orbit_operator<T: Scalar>(
    h: &HoppingSymbol<T>,
    model: &SubshiftModel,
    shell: &Shell,
    window: i64,
) -> Result<BandKernel<T>> {
    let i = shell.radius();
    if window < i {
        return Err(Error::Range(format!(
            "window {window} is smaller than the shell radius {i}"
        )));
    }
    let z = model.generator();
    let label = |y: &SeqPoint| y.shift_amount() - z.shift_amount();
    let in_range = |k: i64| (-window + i..=window - i).contains(&k);
    let space = window_space(window)?;
    let mut entries = Vec::new();
    for k in -window + i..=window - i {
        let x = z.shifted(k);
        if !shell.contains(&x) {
            continue;
        }
        for l in h.hop_support() {
            let y = x.shifted(-l);
            if in_range(label(&y)) && shell.contains(&y) {
                entries.push((label(&x), label(&y), h.value(&y, l)));
            }
        }
    }
    BandKernel::from_entries(space, entries, h.max_hop() as f64)
}

/// `H^{X_∞}_x` for a limit point: the full-line kernel on `[-window, window]`.
pub fn limit_operator<T: Scalar>(
    h: &HoppingSymbol<T>,
    x_inf: &SeqPoint,
    window: i64,
) -> Result<BandKernel<T>> {
    subshift_operator(h, x_inf, &Shell::Full, window)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjointWitness {
    /// `y|_[-p-|k|, p+|k|]` for the offending point `y`.
    pub word: Word,
    pub hop: i64,
    /// `h(y, k)` and `h(τ_k(y), -k)`.
    pub value: (f64, f64),
    pub partner: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceWitness {
    pub shift: i64,
    pub row: i64,
    pub col: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolReport {
    pub window: i64,
    pub shift_margin: i64,
    pub self_adjoint: Vec<AdjointWitness>,
    pub covariance: Vec<CovarianceWitness>,
}

impl SymbolReport {
    pub fn passes(&self) -> bool {
        self.self_adjoint.is_empty() && self.covariance.is_empty()
    }
}

fn parts<T: Scalar>(v: T) -> (f64, f64) {
    let c = v.to_c64();
    (c.re, c.im)
}

/// Checks `h(τ_k(y), -k) = conj h(y, k)` on every orbit point of the
/// generator and the limit generators in the window, and the covariance
/// `K_{τ_m z}(k, l) = K_z(k + m, l + m)` for `|m| ≤ window / 4`.
pub fn validate_symbol<T: Scalar>(
    h: &HoppingSymbol<T>,
    model: &SubshiftModel,
    window: i64,
) -> Result<SymbolReport> {
    let p = h.radius() as i64;
    let hops: BTreeSet<i64> = h.hop_support().into_iter().flat_map(|k| [k, -k]).collect();
    let mut seen = BTreeSet::new();
    let mut self_adjoint = Vec::new();
    let points = std::iter::once(model.generator()).chain(model.limit_generators());
    for g in points {
        for l in -window..=window {
            let y = g.shifted(l);
            for &k in &hops {
                let v = h.value(&y, k);
                let w = h.value(&y.shifted(k), -k);
                if w != v.conj() {
                    let r = p + k.abs();
                    let word = y.evaluate(-r, r);
                    if seen.insert((word.clone(), k)) {
                        self_adjoint.push(AdjointWitness {
                            word,
                            hop: k,
                            value: parts(v),
                            partner: parts(w),
                        });
                    }
                }
            }
        }
    }

    let margin = (window / 4).max(1);
    let z = model.generator();
    let base = subshift_operator(h, z, &Shell::Full, window)?;
    let mut covariance = Vec::new();
    for m in -margin..=margin {
        let moved = subshift_operator(h, &z.shifted(m), &Shell::Full, window)?;
        let lo = (-window).max(-window - m);
        let hi = window.min(window - m);
        for l in lo..=hi {
            for &d in &hops {
                let k = l + d;
                if (lo..=hi).contains(&k) && moved.get(k, l) != base.get(k + m, l + m) {
                    covariance.push(CovarianceWitness {
                        shift: m,
                        row: k,
                        col: l,
                    });
                }
            }
        }
    }
    Ok(SymbolReport {
        window,
        shift_margin: margin,
        self_adjoint,
        covariance,
    })
}

/// Range of the Bloch symbol of `h` over a τ-periodic sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolRange {
    /// Minimum and maximum eigenvalue over the grid.
    pub range: SpectralInterval,
    /// Bound on how far the true extremes can lie outside `range`.
    pub error_bound: f64,
    pub period: usize,
    pub grid: usize,
}

impl SymbolRange {
    /// Enclosure of the bottom of the spectrum.
    pub fn lower_edge(&self) -> SpectralInterval {
        SpectralInterval::new(self.range.lo - self.error_bound, self.range.lo, true)
    }

    /// Enclosure of the top of the spectrum.
    pub fn upper_edge(&self) -> SpectralInterval {
        SpectralInterval::new(self.range.hi, self.range.hi + self.error_bound, true)
    }
}

/// For `x` of period `P`, the operator `K(k, l) = h(τ_l x, k - l)` is unitarily
/// equivalent to multiplication by the `P × P` matrix function
/// `Ĥ(t)[a, b] = Σ_n K(a, b + nP) e^{int}`; its eigenvalue range over a
/// uniform grid of `t` is returned with the Lipschitz error bound
/// `π · max_b Σ_k |n_k| |h(τ_b x, k)| / grid`.
pub fn symbol_range<T: Scalar>(
    h: &HoppingSymbol<T>,
    x_const: &SeqPoint,
    grid: usize,
) -> Result<SymbolRange> {
    let period = x_const.period().ok_or_else(|| {
        Error::Precondition("symbol range needs a constant or periodic sequence".into())
    })?;
    if grid == 0 {
        return Err(Error::Precondition("grid must be positive".into()));
    }
    let p = period as i64;
    let hops = h.hop_support();
    // (a, b, n, value)
    let mut terms = Vec::new();
    let mut lipschitz = 0.0f64;
    for b in 0..p {
        let mut col = 0.0;
        for &k in &hops {
            let v = h.value_at_shift(x_const, b, k);
            if v.conj() != h.value_at_shift(x_const, b + k, -k) {
                return Err(Error::Precondition(format!(
                    "symbol is not self-adjoint at shift {b}, hop {k}"
                )));
            }
            let a = (b + k).rem_euclid(p);
            let n = (a - b - k) / p;
            col += n.abs() as f64 * v.modulus();
            terms.push((a as usize, b as usize, n, v.to_c64()));
        }
        lipschitz = lipschitz.max(col);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for j in 0..grid {
        let t = 2.0 * std::f64::consts::PI * j as f64 / grid as f64;
        let mut m = DMatrix::<Complex64>::zeros(period, period);
        for &(a, b, n, v) in &terms {
            m[(a, b)] += v * Complex64::from_polar(1.0, t * n as f64);
        }
        let eig = m.symmetric_eigenvalues();
        lo = lo.min(eig.min());
        hi = hi.max(eig.max());
    }
    Ok(SymbolRange {
        range: SpectralInterval::new(lo, hi, true),
        error_bound: lipschitz * std::f64::consts::PI / grid as f64,
        period,
        grid,
    })
}
