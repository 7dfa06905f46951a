//! Certified extreme eigenvalues of finite self-adjoint band kernels.
//!
//! Three routes are available:
//!
//! * [`Mode::Dense`]: full Hermitian eigendecomposition of the compressed
//!   matrix;
//! * [`Mode::Iterative`]: Lanczos with full reorthogonalization; the returned
//!   intervals are `[θ - ‖r‖, θ + ‖r‖]` for the Ritz pair `(θ, v)` and its
//!   explicitly recomputed residual `r = Kv - θv`;
//! * [`Mode::Bisection`]: bisection on positive definiteness of `K - σ`,
//!   tested by a band `LDLᴴ` factorization.
//!
//! [`Mode::Auto`] picks bisection for narrow index bands and otherwise dense
//! or iterative by size.

mod bisect;
mod lanczos;
mod op;
mod tridiag;

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{BandKernel, FiniteVector, SiteSet};
use crate::scalar::Scalar;

use op::{Field, SparseOp};

/// Default absolute tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Largest window handled by the dense route in [`Mode::Auto`].
pub const DEFAULT_DENSE_THRESHOLD: usize = 2000;
/// Self-adjointness tolerance checked before solving.
pub const SELF_ADJOINT_TOL: f64 = 1e-12;
/// [`Mode::Auto`] uses bisection when the index band is at most this wide.
pub const BISECTION_MAX_BAND: usize = 64;

/// An enclosure `[lo, hi]` of a real number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralInterval {
    pub lo: f64,
    pub hi: f64,
    pub certified: bool,
}

impl SpectralInterval {
    pub fn new(lo: f64, hi: f64, certified: bool) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}]");
        SpectralInterval { lo, hi, certified }
    }

    pub fn point(x: f64) -> Self {
        SpectralInterval::new(x, x, true)
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Auto,
    Dense,
    Iterative,
    Bisection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigenOptions {
    pub mode: Mode,
    pub tol: f64,
    pub dense_threshold: usize,
    /// Overrides the Lanczos budget of `50·√n` matvecs.
    pub max_iter: Option<usize>,
    /// Record the Lanczos iteration trace.
    pub trace: bool,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            mode: Mode::Auto,
            tol: DEFAULT_TOL,
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            max_iter: None,
            trace: false,
        }
    }
}

impl EigenOptions {
    pub fn with_mode(mode: Mode) -> Self {
        EigenOptions {
            mode,
            ..Self::default()
        }
    }
}

/// One convergence check of the Lanczos run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub ritz_min: f64,
    pub ritz_max: f64,
    pub res_min: f64,
    pub res_max: f64,
}

/// Renders a trace as CSV `iter ritz_min ritz_max res_min res_max`.
pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut s = String::from("iter,ritz_min,ritz_max,res_min,res_max\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:e},{:e},{:e},{:e}",
            r.iter, r.ritz_min, r.ritz_max, r.res_min, r.res_max
        );
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtremeEigs {
    pub min: SpectralInterval,
    pub max: SpectralInterval,
    /// The route actually taken (never `Auto`).
    pub mode: Mode,
    pub trace: Vec<TraceRow>,
}

/// Encloses `λ_min` and `λ_max` of `K` compressed to `window`.
pub fn extreme_eigs<T: Scalar>(
    k: &BandKernel<T>,
    window: &SiteSet,
    opts: &EigenOptions,
) -> Result<ExtremeEigs> {
    if window.is_empty() {
        return Err(Error::Precondition("empty window".into()));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::Precondition(format!(
            "tolerance {} must be positive",
            opts.tol
        )));
    }
    let compressed = k.restrict(window);
    let defect = compressed.hermitian_defect();
    if defect > SELF_ADJOINT_TOL {
        return Err(Error::Precondition(format!(
            "kernel is not self-adjoint on the window (defect {defect:e})"
        )));
    }
    let real = T::IS_REAL || compressed.entries().iter().all(|e| e.2.to_c64().im == 0.0);
    if real {
        solve::<f64, T>(&compressed, window, opts)
    } else {
        solve::<Complex64, T>(&compressed, window, opts)
    }
}

fn solve<E: Field, T: Scalar>(
    k: &BandKernel<T>,
    window: &SiteSet,
    opts: &EigenOptions,
) -> Result<ExtremeEigs> {
    let op = SparseOp::<E>::new(k, window);
    let n = op.n;
    let mode = match opts.mode {
        Mode::Auto if op.index_band <= BISECTION_MAX_BAND => Mode::Bisection,
        Mode::Auto if n <= opts.dense_threshold => Mode::Dense,
        Mode::Auto => Mode::Iterative,
        m => m,
    };
    let width = 1e-12 * (1.0 + op.hahn);
    match mode {
        Mode::Dense => {
            let eig = op.to_dense().symmetric_eigenvalues();
            let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let half = 0.5 * width;
            Ok(ExtremeEigs {
                min: SpectralInterval::new(lo - half, lo + half, true),
                max: SpectralInterval::new(hi - half, hi + half, true),
                mode,
                trace: Vec::new(),
            })
        }
        Mode::Bisection => {
            let (a, b) = bisect::edge_bracket(&op, true, 0.5 * width);
            let (c, d) = bisect::edge_bracket(&op, false, 0.5 * width);
            Ok(ExtremeEigs {
                min: SpectralInterval::new(a, b, true),
                max: SpectralInterval::new(c, d, true),
                mode,
                trace: Vec::new(),
            })
        }
        Mode::Iterative => {
            let start: Vec<E> = start_vector(window)
                .into_iter()
                .map(E::real_scalar)
                .collect();
            let tol = opts.tol * op.hahn.max(1.0);
            let budget = opts
                .max_iter
                .unwrap_or_else(|| (50.0 * (n as f64).sqrt()).ceil() as usize)
                .min(n);
            let params = lanczos::LanczosParams {
                budget,
                basis_cap: 1200,
                tol,
                check_every: 10,
            };
            let run = lanczos::run(&op, start, &params, opts.trace);
            let enclose = |p: &lanczos::RitzPair<E>| {
                // Rounding in the residual itself.
                let floor = 16.0 * f64::EPSILON * (op.hahn + p.value.abs());
                let r = residual_norm(&op, &p.vector, p.value) + floor;
                SpectralInterval::new(p.value - r, p.value + r, r <= 2.0 * tol)
            };
            Ok(ExtremeEigs {
                min: enclose(&run.min),
                max: enclose(&run.max),
                mode,
                trace: run.trace,
            })
        }
        Mode::Auto => unreachable!(),
    }
}

/// Deterministic start vector: alternating signs with magnitudes spread by
/// the golden-ratio sequence of the site ids.
pub fn start_vector(window: &SiteSet) -> Vec<f64> {
    let mut v: Vec<f64> = window
        .iter()
        .map(|id| {
            let sign = if id.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let frac = (id as f64 * 0.618_033_988_749_894_9).rem_euclid(1.0);
            sign * (1.0 + frac)
        })
        .collect();
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= nrm);
    v
}

fn residual_norm<E: Field>(op: &SparseOp<E>, v: &[E], lam: f64) -> f64 {
    let mut w = vec![E::zero(); op.n];
    op.matvec(v, &mut w);
    w.iter()
        .zip(v)
        .map(|(&kv, &x)| (kv - x * E::real_scalar(lam)).modulus_squared())
        .sum::<f64>()
        .sqrt()
}

/// `‖Kv - λv‖` for a unit vector `v` on the window; for self-adjoint `K`
/// some eigenvalue lies within this distance of `λ`.
pub fn residual_certify<T: Scalar, V: Scalar>(
    k: &BandKernel<T>,
    window: &SiteSet,
    v: &FiniteVector<V>,
    lam: f64,
) -> Result<f64> {
    if !v.sites().same_members(window) {
        return Err(Error::Structural(
            "vector is not indexed by the window".into(),
        ));
    }
    let nrm = v.norm();
    if nrm == 0.0 {
        return Err(Error::Precondition("zero vector".into()));
    }
    if (nrm - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!("vector norm {nrm} is not 1")));
    }
    let op = SparseOp::<Complex64>::new(k, window);
    let x: Vec<Complex64> = v.values().iter().map(|z| z.to_c64()).collect();
    Ok(residual_norm(&op, &x, lam))
}

/// Lowest Ritz pair of the `steps`-dimensional Krylov space started at `v`.
pub fn lanczos_refine<T: Scalar, V: Scalar>(
    k: &BandKernel<T>,
    window: &SiteSet,
    v: &FiniteVector<V>,
    steps: usize,
) -> Result<(f64, FiniteVector<Complex64>)> {
    if !v.sites().same_members(window) {
        return Err(Error::Structural(
            "vector is not indexed by the window".into(),
        ));
    }
    if v.norm() == 0.0 {
        return Err(Error::Precondition("zero vector".into()));
    }
    let op = SparseOp::<Complex64>::new(k, window);
    let start = v.values().iter().map(|z| z.to_c64()).collect();
    let params = lanczos::LanczosParams {
        budget: steps,
        basis_cap: steps,
        tol: 0.0,
        check_every: steps.max(1),
    };
    let run = lanczos::run(&op, start, &params, false);
    Ok((
        run.min.value,
        FiniteVector::new(window.clone(), run.min.vector)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{graph_kernel, GraphKernelKind, GraphModel, SiteSpace};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn path(n: i64) -> BandKernel<f64> {
        let s = Arc::new(SiteSpace::integer_window(0, n - 1).unwrap());
        BandKernel::from_fn(s, 1.0, |x, y| ((x - y).abs() == 1) as i64 as f64).unwrap()
    }

    const ALL: [Mode; 3] = [Mode::Dense, Mode::Iterative, Mode::Bisection];

    #[test]
    fn one_by_one() {
        let s = Arc::new(SiteSpace::integer_window(4, 4).unwrap());
        let k = BandKernel::from_entries(s.clone(), [(4, 4, 2.5)], 0.0).unwrap();
        for mode in ALL {
            let e = extreme_eigs(&k, s.sites(), &EigenOptions::with_mode(mode)).unwrap();
            assert!(
                e.min.contains(2.5) && e.max.contains(2.5),
                "{mode:?}: {e:?}"
            );
            assert!(e.min.width() < 1e-11);
        }
    }

    #[test]
    fn path_of_three() {
        let k = path(3);
        let w = k.space().sites().clone();
        for mode in ALL {
            let e = extreme_eigs(&k, &w, &EigenOptions::with_mode(mode)).unwrap();
            assert!(e.min.contains(-2f64.sqrt()), "{mode:?}: {e:?}");
            assert!(e.max.contains(2f64.sqrt()), "{mode:?}: {e:?}");
            assert!(e.min.certified && e.max.certified);
        }
    }

    #[test]
    fn path_graph_three_vertices() {
        let g = GraphModel::new(
            [0, 1, 2],
            [(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)],
        )
        .unwrap();
        let k = graph_kernel(&g, GraphKernelKind::Adjacency).unwrap();
        let dense = op::SparseOp::<f64>::new(&k, g.vertices())
            .to_dense()
            .symmetric_eigenvalues();
        let mut ev: Vec<f64> = dense.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let expect = [-2f64.sqrt(), 0.0, 2f64.sqrt()];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let edge = graph_kernel(
            &GraphModel::new([0, 1], [(0, 1, 1.0), (1, 0, 1.0)]).unwrap(),
            GraphKernelKind::Laplacian,
        )
        .unwrap();
        let e = extreme_eigs(&edge, edge.space().sites(), &EigenOptions::default()).unwrap();
        assert!(e.min.contains(0.0) && e.max.contains(2.0));
    }

    #[test]
    fn path_thousand_bisection() {
        let k = path(1000);
        let e = extreme_eigs(&k, k.space().sites(), &EigenOptions::default()).unwrap();
        assert_eq!(e.mode, Mode::Bisection);
        let exact = -2.0 * (PI / 1001.0).cos();
        assert!(e.min.contains(exact));
        assert!(e.min.width() < 1e-10);
    }

    #[test]
    fn hermitian_complex_kernel() {
        // i·(shift) - i·(shift)ᵀ on a 4-cycle-free path: spectrum ±2cos(kπ/5)
        let s = Arc::new(SiteSpace::integer_window(0, 3).unwrap());
        let i = Complex64::i();
        let k = BandKernel::from_fn(s.clone(), 1.0, |x, y| match y - x {
            1 => i,
            -1 => -i,
            _ => Complex64::new(0.0, 0.0),
        })
        .unwrap();
        let exact = 2.0 * (PI / 5.0).cos();
        for mode in ALL {
            let e = extreme_eigs(&k, s.sites(), &EigenOptions::with_mode(mode)).unwrap();
            assert!(
                e.min.contains(-exact) && e.max.contains(exact),
                "{mode:?}: {e:?}"
            );
        }
    }

    #[test]
    fn rejects_non_self_adjoint() {
        let s = Arc::new(SiteSpace::integer_window(0, 1).unwrap());
        let k = BandKernel::from_entries(s.clone(), [(0, 1, 1.0)], 1.0).unwrap();
        assert!(matches!(
            extreme_eigs(&k, s.sites(), &EigenOptions::default()),
            Err(Error::Precondition(_))
        ));
        assert!(extreme_eigs(&k, &SiteSet::default(), &EigenOptions::default()).is_err());
    }

    #[test]
    fn residual_examples() {
        let s = Arc::new(SiteSpace::integer_window(-5, 5).unwrap());
        let k = BandKernel::from_fn(s.clone(), 1.0, |x, y| ((x - y).abs() == 1) as i64).unwrap();
        let e0 = FiniteVector::<f64>::basis(s.sites().clone(), 0).unwrap();
        let r = residual_certify(&k, s.sites(), &e0, 0.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        let zero = FiniteVector::<f64>::zeros(s.sites().clone());
        assert!(matches!(
            residual_certify(&k, s.sites(), &zero, 0.0),
            Err(Error::Precondition(_))
        ));

        // exact eigenpair of the path on 11 sites
        let v: Vec<f64> = (1..=11).map(|j| (PI * j as f64 / 12.0).sin()).collect();
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let v = FiniteVector::new(s.sites().clone(), v.iter().map(|x| x / nrm).collect()).unwrap();
        let lam = 2.0 * (PI / 12.0).cos();
        assert!(residual_certify(&k, s.sites(), &v, lam).unwrap() < 1e-14);
    }

    #[test]
    fn trace_is_recorded() {
        let k = path(200);
        let opts = EigenOptions {
            mode: Mode::Iterative,
            trace: true,
            ..EigenOptions::default()
        };
        let e = extreme_eigs(&k, k.space().sites(), &opts).unwrap();
        assert!(!e.trace.is_empty());
        let csv = trace_csv(&e.trace);
        assert!(csv.starts_with("iter,ritz_min,ritz_max,res_min,res_max\n"));
        assert_eq!(csv.lines().count(), e.trace.len() + 1);
    }
}
