//! Levenberg-Marquardt with central-difference Jacobians.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions<T> {
    pub max_iterations: usize,
    /// Relative step below which the fit is converged.
    pub step_tol: T,
    /// Gradient norm ‖Jᵀr‖ below which the fit is converged.
    pub gradient_tol: T,
}

impl<T: Real> Default for LmOptions<T> {
    fn default() -> Self {
        Self { max_iterations: 200, step_tol: lit(1e-9), gradient_tol: lit(1e-10) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome<T: Real> {
    pub params: Vec<T>,
    /// ‖r‖ at the optimum.
    pub residual_norm: T,
    pub gradient_norm: T,
    pub iterations: usize,
    pub converged: bool,
    /// ‖r‖ after each accepted step, starting with the initial guess.
    pub history: Vec<T>,
    /// Jacobian at the optimum.
    pub jacobian: DMatrix<T>,
    pub n_residuals: usize,
}

impl<T: Real> LmOutcome<T> {
    /// s²(JᵀJ)⁻¹ with s² = ‖r‖²/(m − n); `None` when JᵀJ is singular.
    pub fn covariance(&self) -> Option<DMatrix<T>> {
        let n = self.params.len();
        let dof = self.n_residuals.saturating_sub(n).max(1);
        let s2 = self.residual_norm * self.residual_norm / lit(dof as f64);
        let jtj = self.jacobian.transpose() * &self.jacobian;
        jtj.try_inverse().map(|inv| inv * s2)
    }

    /// Diagonal of [`Self::covariance`], clamped at zero; infinite if singular.
    pub fn variances(&self) -> Vec<T> {
        match self.covariance() {
            Some(c) => (0..self.params.len()).map(|i| c[(i, i)].max(T::zero())).collect(),
            None => vec![T::max_value().unwrap_or(lit(f64::MAX)); self.params.len()],
        }
    }
}

fn residuals<T: Real, F>(f: &F, p: &[T]) -> Result<DVector<T>>
where
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    let r = f(p)?;
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("model produced non-finite residuals".into()));
    }
    Ok(DVector::from_vec(r))
}

fn jacobian<T: Real, F>(f: &F, p: &[T], m: usize) -> Result<DMatrix<T>>
where
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    let mut jac = DMatrix::zeros(m, p.len());
    let mut q = p.to_vec();
    for j in 0..p.len() {
        let h = lit::<T>(1e-6).max(lit::<T>(1e-4) * p[j].abs());
        q[j] = p[j] + h;
        let up = residuals(f, &q)?;
        q[j] = p[j] - h;
        let down = residuals(f, &q)?;
        q[j] = p[j];
        if up.len() != m || down.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: up.len() });
        }
        jac.set_column(j, &((up - down) / (lit::<T>(2.0) * h)));
    }
    Ok(jac)
}

/// Minimises ‖f(p)‖² from `p0`. Only steps that lower the residual norm are
/// accepted, so [`LmOutcome::history`] is non-increasing.
pub fn levenberg_marquardt<T: Real, F>(f: F, p0: &[T], opts: &LmOptions<T>) -> Result<LmOutcome<T>>
where
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    let n = p0.len();
    let mut p = p0.to_vec();
    let mut r = residuals(&f, &p)?;
    let m = r.len();
    if m < n {
        return Err(Error::InvalidParameter(format!("{m} residuals cannot determine {n} parameters")));
    }
    let mut cost = r.norm_squared();
    let mut history = vec![cost.sqrt()];
    let mut lambda = lit::<T>(1e-3);
    let mut jac = jacobian(&f, &p, m)?;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        if grad.norm() < opts.gradient_tol {
            converged = true;
            break;
        }
        let mut accepted = false;
        while lambda < lit(1e16) {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * jtj[(i, i)].max(lit(1e-12));
            }
            let Some(step) = a.lu().solve(&(-&grad)) else {
                lambda *= lit(10.0);
                continue;
            };
            let trial: Vec<T> = p.iter().zip(step.iter()).map(|(a, b)| *a + *b).collect();
            let trial_r = match residuals(&f, &trial) {
                Ok(v) => v,
                Err(_) => {
                    lambda *= lit(10.0);
                    continue;
                }
            };
            let trial_cost = trial_r.norm_squared();
            if trial_cost <= cost {
                let p_norm = p.iter().fold(T::zero(), |s, v| s + *v * *v).sqrt();
                let small = step.norm() <= opts.step_tol * (p_norm + opts.step_tol);
                p = trial;
                r = trial_r;
                cost = trial_cost;
                history.push(cost.sqrt());
                lambda = (lambda * lit(0.3)).max(lit(1e-12));
                accepted = true;
                if small {
                    converged = true;
                }
                break;
            }
            lambda *= lit(10.0);
        }
        if !accepted {
            // no descent direction left at working precision
            converged = true;
            break;
        }
        jac = jacobian(&f, &p, m)?;
        if converged {
            break;
        }
    }
    let gradient_norm = (jac.transpose() * &r).norm();
    if !converged {
        return Err(Error::NonConvergence { iterations });
    }
    Ok(LmOutcome {
        params: p,
        residual_norm: cost.sqrt(),
        gradient_norm,
        iterations,
        converged,
        history,
        jacobian: jac,
        n_residuals: m,
    })
}
