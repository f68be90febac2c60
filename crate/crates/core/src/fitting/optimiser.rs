//! Box-constrained Levenberg–Marquardt for small nonlinear least-squares problems.
//!
//! Steps are computed on the free variables (those not pinned at a bound by the
//! gradient) and projected back onto the box, so every iterate is feasible.
//! The Jacobian is a forward difference pointing into the box.

use crate::linalg::cholesky_solve;
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// An accepted step improved the cost by less than the tolerance.
    Tolerance,
    MaxIterations,
    /// No damped step reduced the cost.
    NoProgress,
}

#[derive(Debug, Clone)]
pub struct LsqOutcome<T> {
    pub x: Vec<T>,
    pub cost: T,
    pub initial_cost: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: StopReason,
}

#[derive(Debug, Clone)]
pub struct BoxLeastSquares<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    pub max_iterations: usize,
    /// Absolute cost improvement below which iteration stops.
    pub tolerance: T,
}

const MAX_DAMPING_TRIES: usize = 16;

impl<T: Real> BoxLeastSquares<T> {
    pub fn project(&self, x: &mut [T]) {
        for ((v, &lo), &hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.max(lo).min(hi);
        }
    }

    pub fn is_feasible(&self, x: &[T]) -> bool {
        x.iter()
            .zip(&self.lower)
            .zip(&self.upper)
            .all(|((&v, &lo), &hi)| v >= lo && v <= hi)
    }

    /// Minimises `Σ r_i(x)²` where `residuals(x, r)` fills `r` (length `m`).
    pub fn minimise<F>(&self, residuals: F, m: usize, x0: &[T]) -> LsqOutcome<T>
    where
        F: Fn(&[T], &mut [T]),
    {
        let n = x0.len();
        assert_eq!(self.lower.len(), n);
        assert_eq!(self.upper.len(), n);
        let mut x = x0.to_vec();
        self.project(&mut x);

        let mut r = vec![T::zero(); m];
        residuals(&x, &mut r);
        let mut evaluations = 1;
        let mut cost = sum_sq(&r);
        let initial_cost = cost;

        let mut jac = vec![vec![T::zero(); m]; n];
        let mut r_step = vec![T::zero(); m];
        let mut x_try = vec![T::zero(); n];
        let mut r_try = vec![T::zero(); m];
        let mut lambda = lit::<T>(1e-3);
        let sqrt_eps = T::epsilon().sqrt();
        let mut stop = StopReason::MaxIterations;
        let mut iterations = 0;

        while iterations < self.max_iterations {
            iterations += 1;
            debug_assert!(self.is_feasible(&x), "iterate left the box: {x:?}");

            for j in 0..n {
                let mut h = sqrt_eps * x[j].abs().max(T::one());
                if x[j] + h > self.upper[j] {
                    h = -h;
                }
                let mut xs = x.clone();
                xs[j] = x[j] + h;
                let h = xs[j] - x[j];
                residuals(&xs, &mut r_step);
                evaluations += 1;
                for i in 0..m {
                    jac[j][i] = (r_step[i] - r[i]) / h;
                }
            }

            let mut jtj = vec![T::zero(); n * n];
            let mut grad = vec![T::zero(); n];
            for a in 0..n {
                grad[a] = dot(&jac[a], &r);
                for b in a..n {
                    let v = dot(&jac[a], &jac[b]);
                    jtj[a * n + b] = v;
                    jtj[b * n + a] = v;
                }
            }
            let free: Vec<usize> = (0..n)
                .filter(|&j| {
                    let pinned_low = x[j] <= self.lower[j] && grad[j] > T::zero();
                    let pinned_high = x[j] >= self.upper[j] && grad[j] < T::zero();
                    !(pinned_low || pinned_high)
                })
                .collect();
            let k = free.len();
            let max_diag = (0..n).fold(T::zero(), |acc, j| acc.max(jtj[j * n + j]));
            let floor = (max_diag * lit(1e-12)).max(T::min_positive_value());

            let mut accepted = None;
            for _ in 0..MAX_DAMPING_TRIES {
                if k == 0 {
                    break;
                }
                let mut a = vec![T::zero(); k * k];
                let mut b = vec![T::zero(); k];
                for (p, &fp) in free.iter().enumerate() {
                    b[p] = -grad[fp];
                    for (q, &fq) in free.iter().enumerate() {
                        a[p * k + q] = jtj[fp * n + fq];
                    }
                    a[p * k + p] = a[p * k + p] + lambda * jtj[fp * n + fp].max(floor);
                }
                if !cholesky_solve(&mut a, &mut b, k) {
                    lambda = lambda * lit(10.0);
                    continue;
                }
                x_try.copy_from_slice(&x);
                for (p, &fp) in free.iter().enumerate() {
                    x_try[fp] = x[fp] + b[p];
                }
                self.project(&mut x_try);
                if x_try == x || x_try.iter().any(|v| !v.is_finite()) {
                    lambda = lambda * lit(4.0);
                    continue;
                }
                residuals(&x_try, &mut r_try);
                evaluations += 1;
                let c = sum_sq(&r_try);
                if c < cost {
                    accepted = Some(c);
                    lambda = (lambda / lit(3.0)).max(lit(1e-12));
                    break;
                }
                lambda = lambda * lit(4.0);
            }

            let Some(new_cost) = accepted else {
                stop = StopReason::NoProgress;
                break;
            };
            let improvement = cost - new_cost;
            std::mem::swap(&mut x, &mut x_try);
            std::mem::swap(&mut r, &mut r_try);
            cost = new_cost;
            if improvement < self.tolerance {
                stop = StopReason::Tolerance;
                break;
            }
        }

        LsqOutcome {
            x,
            cost,
            initial_cost,
            iterations,
            evaluations,
            stop,
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn sum_sq<T: Real>(r: &[T]) -> T {
    r.iter().fold(T::zero(), |acc, &v| acc + v * v)
}
