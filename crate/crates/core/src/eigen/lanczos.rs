//! Lanczos with full reorthogonalization, targeting both spectral edges.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::op::{dot, norm, Field, SparseOp};
use super::tridiag;
use super::TraceRow;

/// Converged (or budget-limited) Ritz pair.
pub(crate) struct RitzPair<E> {
    pub value: f64,
    pub vector: Vec<E>,
}

pub(crate) struct LanczosRun<E> {
    pub min: RitzPair<E>,
    pub max: RitzPair<E>,
    pub trace: Vec<TraceRow>,
}

pub(crate) struct LanczosParams {
    /// Total matvec budget.
    pub budget: usize,
    /// Basis size before an explicit restart.
    pub basis_cap: usize,
    /// Absolute residual target.
    pub tol: f64,
    pub check_every: usize,
}

struct Basis<E> {
    n: usize,
    q: Vec<E>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl<E: Field> Basis<E> {
    fn len(&self) -> usize {
        self.alpha.len()
    }

    fn vec(&self, j: usize) -> &[E] {
        &self.q[j * self.n..(j + 1) * self.n]
    }

    /// Two passes of classical Gram-Schmidt against every stored vector.
    fn orthogonalize(&self, w: &mut [E], upto: usize) {
        for _ in 0..2 {
            for j in 0..upto {
                let qj = self.vec(j);
                let c = dot(qj, w);
                for (wi, &qi) in w.iter_mut().zip(qj) {
                    *wi -= c * qi;
                }
            }
        }
    }

    fn ritz(&self, lowest: bool) -> (f64, Vec<f64>) {
        let theta = tridiag::edge_eigenvalue(&self.alpha, &self.beta, lowest);
        let s = tridiag::eigenvector(&self.alpha, &self.beta, theta);
        (theta, s)
    }

    fn lift(&self, s: &[f64]) -> Vec<E> {
        let mut y = vec![E::zero(); self.n];
        for (j, &sj) in s.iter().enumerate() {
            let qj = self.vec(j);
            for (yi, &qi) in y.iter_mut().zip(qj) {
                *yi += qi * E::real_scalar(sj);
            }
        }
        let nrm = norm(&y);
        y.iter_mut().for_each(|v| *v /= E::real_scalar(nrm));
        y
    }
}

fn random_unit<E: Field>(n: usize, seed: u64) -> Vec<E> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<E> = (0..n)
        .map(|_| E::real_scalar(rng.random::<f64>() - 0.5))
        .collect();
    let nrm = norm(&v);
    v.iter_mut().for_each(|x| *x /= E::real_scalar(nrm));
    v
}

/// Runs Lanczos from `start` until both edge residual estimates fall below
/// `tol`, the budget is spent, or the whole space is spanned.
pub(crate) fn run<E: Field>(
    op: &SparseOp<E>,
    start: Vec<E>,
    params: &LanczosParams,
    record_trace: bool,
) -> LanczosRun<E> {
    let n = op.n;
    let budget = params.budget.max(1);
    let cap = params.basis_cap.clamp(1, n);
    let mut steps = 0;
    let mut trace = Vec::new();
    let mut start = start;
    let breakdown = 64.0 * f64::EPSILON * op.hahn.max(1.0);

    loop {
        let mut basis = Basis {
            n,
            q: Vec::with_capacity(cap.min(budget) * n),
            alpha: Vec::new(),
            beta: Vec::new(),
        };
        let nrm = norm(&start);
        basis
            .q
            .extend(start.iter().map(|&x| x / E::real_scalar(nrm)));
        let mut w = vec![E::zero(); n];
        let mut converged = false;
        loop {
            let j = basis.len();
            op.matvec(basis.vec(j), &mut w);
            steps += 1;
            let alpha = dot(basis.vec(j), &w).real();
            basis.alpha.push(alpha);
            basis.orthogonalize(&mut w, j + 1);
            let mut beta = norm(&w);

            let full = basis.len() == n;
            let out_of_budget = steps >= budget || basis.len() >= cap;
            let check =
                full || out_of_budget || beta <= breakdown || basis.len() % params.check_every == 0;
            if check {
                let (tmin, smin) = basis.ritz(true);
                let (tmax, smax) = basis.ritz(false);
                let rmin = beta * smin.last().unwrap().abs();
                let rmax = beta * smax.last().unwrap().abs();
                if record_trace {
                    trace.push(TraceRow {
                        iter: steps,
                        ritz_min: tmin,
                        ritz_max: tmax,
                        res_min: rmin,
                        res_max: rmax,
                    });
                }
                // A breakdown makes the estimates vanish without the edges
                // being found, so it never counts as convergence.
                if full || (beta > breakdown && rmin <= params.tol && rmax <= params.tol) {
                    converged = true;
                }
            }
            if converged || out_of_budget {
                break;
            }
            if beta <= breakdown {
                // Invariant subspace: continue with a fresh direction so
                // that eigenvectors the start vector missed stay reachable.
                let mut fresh = random_unit::<E>(n, steps as u64);
                basis.orthogonalize(&mut fresh, j + 1);
                let f = norm(&fresh);
                if f <= breakdown {
                    converged = true;
                    break;
                }
                w = fresh;
                beta = f;
                basis.beta.push(0.0);
            } else {
                basis.beta.push(beta);
            }
            basis.q.extend(w.iter().map(|&x| x / E::real_scalar(beta)));
        }
        let (tmin, smin) = basis.ritz(true);
        let (tmax, smax) = basis.ritz(false);
        let min = RitzPair {
            value: tmin,
            vector: basis.lift(&smin),
        };
        let max = RitzPair {
            value: tmax,
            vector: basis.lift(&smax),
        };
        if converged || steps >= budget {
            return LanczosRun { min, max, trace };
        }
        // Explicit restart on both edge Ritz vectors.
        start = min
            .vector
            .iter()
            .zip(&max.vector)
            .map(|(&a, &b)| a + b)
            .collect();
        if norm(&start) <= breakdown {
            start = min.vector;
        }
    }
}
