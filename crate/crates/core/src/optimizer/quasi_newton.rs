//! BFGS minimization with a backtracking (Armijo) line search.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions<T: Real> {
    pub gradient_tolerance: T,
    pub max_iterations: usize,
    /// Sufficient-decrease constant.
    pub armijo: T,
    /// Step contraction per backtrack.
    pub contraction: T,
    pub max_backtracks: usize,
}

impl<T: Real> Default for BfgsOptions<T> {
    fn default() -> Self {
        Self {
            gradient_tolerance: T::lit(1e-8),
            max_iterations: 500,
            armijo: T::lit(1e-4),
            contraction: T::lit(0.5),
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfgsStatus {
    /// Gradient norm fell below tolerance.
    Converged,
    /// No step along the search direction decreased the objective.
    LineSearchStalled,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsOutcome<T: Real> {
    pub x: DVector<T>,
    pub value: T,
    pub gradient_norm: T,
    pub iterations: usize,
    pub status: BfgsStatus,
}

/// Minimize `f`, which returns the value and gradient at a point.
pub fn minimize<T, F>(mut f: F, x0: DVector<T>, opts: &BfgsOptions<T>) -> BfgsOutcome<T>
where
    T: Real,
    F: FnMut(&DVector<T>) -> (T, DVector<T>),
{
    let n = x0.len();
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    let mut h_inv = DMatrix::<T>::identity(n, n);
    let mut first_step = true;

    for iter in 0..opts.max_iterations {
        let gnorm = g.norm();
        if gnorm <= opts.gradient_tolerance {
            return BfgsOutcome {
                x,
                value: fx,
                gradient_norm: gnorm,
                iterations: iter,
                status: BfgsStatus::Converged,
            };
        }

        let mut d = -(&h_inv * &g);
        let mut slope = g.dot(&d);
        if !(slope < T::zero()) {
            h_inv.fill_with_identity();
            d = -g.clone();
            slope = -gnorm * gnorm;
        }

        let mut step = if first_step {
            T::one() / gnorm.max(T::one())
        } else {
            T::one()
        };
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let trial = &x + &d * step;
            let (ft, gt) = f(&trial);
            if ft.is_finite() && ft <= fx + opts.armijo * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= opts.contraction;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            return BfgsOutcome {
                x,
                value: fx,
                gradient_norm: gnorm,
                iterations: iter,
                status: BfgsStatus::LineSearchStalled,
            };
        };

        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > T::default_epsilon() * s.norm() * y.norm() {
            if first_step {
                // Rescale the initial inverse Hessian to the observed curvature.
                h_inv *= sy / y.dot(&y);
            }
            let rho = T::one() / sy;
            let hy = &h_inv * &y;
            let yhy = y.dot(&hy);
            // H ← H − ρ(H y sᵀ + s yᵀ H) + (ρ² yᵀHy + ρ) s sᵀ
            h_inv -= (&hy * s.transpose() + &s * hy.transpose()) * rho;
            h_inv += (&s * s.transpose()) * (rho * rho * yhy + rho);
            first_step = false;
        }
        x = x_new;
        fx = f_new;
        g = g_new;
    }

    let gnorm = g.norm();
    BfgsOutcome {
        x,
        value: fx,
        gradient_norm: gnorm,
        iterations: opts.max_iterations,
        status: if gnorm <= opts.gradient_tolerance {
            BfgsStatus::Converged
        } else {
            BfgsStatus::MaxIterations
        },
    }
}
