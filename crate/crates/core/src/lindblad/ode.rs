//! Explicit Runge-Kutta integrators for matrix-valued ODEs.
//!
//! The adaptive stepper is Dormand-Prince 5(4) with FSAL and a PI step-size
//! controller. The fixed stepper is classical RK4 with a step that is
//! shrunk to land exactly on every output time, so results only depend on
//! the configuration.

use nalgebra::ComplexField;
use crate::error::{Error, Result};
use crate::scalar::{lit, re, to_f64, CMatrix, Real};

/// Step control for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stepper<T> {
    Adaptive {
        /// Absolute tolerance on matrix entries.
        atol: T,
        /// Relative tolerance on matrix entries.
        rtol: T,
        /// Smallest permitted step, ns.
        h_min: T,
        max_steps: usize,
    },
    Fixed {
        /// Largest step, ns.
        h: T,
    },
}

impl<T: Real> Stepper<T> {
    /// Adaptive stepping with absolute tolerance 1e-10.
    pub fn default_adaptive() -> Self {
        Self::Adaptive { atol: lit(1e-10), rtol: lit(1e-10), h_min: lit(1e-12), max_steps: 5_000_000 }
    }

    pub fn adaptive(atol: T, rtol: T) -> Self {
        Self::Adaptive { atol, rtol, h_min: lit(1e-12), max_steps: 5_000_000 }
    }
}

/// Integration statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th-order weights minus 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn axpy_sum<T: Real>(y: &CMatrix<T>, h: T, coeffs: &[f64], ks: &[CMatrix<T>]) -> CMatrix<T> {
    let mut out = y.clone();
    for (c, k) in coeffs.iter().zip(ks) {
        if *c != 0.0 {
            out += k * re(h * lit::<T>(*c));
        }
    }
    out
}

/// Integrates `dy/dt = f(t, y)` from `t0` and returns `y` at each of
/// `t_out` (which must be non-decreasing and start at or after `t0`).
pub fn integrate<T, F>(
    mut f: F,
    t0: T,
    y0: &CMatrix<T>,
    t_out: &[T],
    stepper: Stepper<T>,
) -> Result<(Vec<CMatrix<T>>, OdeStats)>
where
    T: Real,
    F: FnMut(T, &CMatrix<T>) -> CMatrix<T>,
{
    if t_out.windows(2).any(|w| w[1] < w[0]) || t_out.first().is_some_and(|t| *t < t0) {
        return Err(Error::NonIncreasingGrid);
    }
    match stepper {
        Stepper::Fixed { h } => integrate_fixed(&mut f, t0, y0, t_out, h),
        Stepper::Adaptive { atol, rtol, h_min, max_steps } => {
            integrate_dopri(&mut f, t0, y0, t_out, atol, rtol, h_min, max_steps)
        }
    }
}

fn integrate_fixed<T, F>(
    f: &mut F,
    t0: T,
    y0: &CMatrix<T>,
    t_out: &[T],
    h_max: T,
) -> Result<(Vec<CMatrix<T>>, OdeStats)>
where
    T: Real,
    F: FnMut(T, &CMatrix<T>) -> CMatrix<T>,
{
    if !(h_max > T::zero()) {
        return Err(Error::InvalidParameter("fixed step must be positive".into()));
    }
    let mut stats = OdeStats::default();
    let mut t = t0;
    let mut y = y0.clone();
    let mut out = Vec::with_capacity(t_out.len());
    let two = lit::<T>(2.0);
    let six = lit::<T>(6.0);
    for &target in t_out {
        let span = target - t;
        let n = to_f64(span / h_max).ceil().max(0.0) as usize;
        if n > 0 {
            let h = span / lit(n as f64);
            for _ in 0..n {
                let k1 = f(t, &y);
                let k2 = f(t + h / two, &(&y + &k1 * re(h / two)));
                let k3 = f(t + h / two, &(&y + &k2 * re(h / two)));
                let k4 = f(t + h, &(&y + &k3 * re(h)));
                y += (k1 + (k2 + k3) * re(two) + k4) * re(h / six);
                t += h;
                stats.accepted += 1;
                stats.rhs_evals += 4;
            }
        }
        t = target;
        out.push(y.clone());
    }
    Ok((out, stats))
}

#[allow(clippy::too_many_arguments)]
fn integrate_dopri<T, F>(
    f: &mut F,
    t0: T,
    y0: &CMatrix<T>,
    t_out: &[T],
    atol: T,
    rtol: T,
    h_min: T,
    max_steps: usize,
) -> Result<(Vec<CMatrix<T>>, OdeStats)>
where
    T: Real,
    F: FnMut(T, &CMatrix<T>) -> CMatrix<T>,
{
    let mut stats = OdeStats::default();
    let mut out = Vec::with_capacity(t_out.len());
    let mut t = t0;
    let mut y = y0.clone();
    let mut k_first = f(t, &y);
    stats.rhs_evals += 1;

    // Initial step from the derivative scale.
    let scale0 = y.iter().fold(T::zero(), |a, z| a.max(z.modulus()));
    let dscale = k_first.iter().fold(T::zero(), |a, z| a.max(z.modulus()));
    let tol0 = atol + rtol * scale0;
    let mut h = if dscale > T::zero() {
        (lit::<T>(0.01) * (tol0 / dscale).powf(lit(0.2))).max(h_min * lit(10.0))
    } else {
        lit(1e-3)
    };
    let mut err_prev = lit::<T>(1e-4);

    for &target in t_out {
        while t < target {
            if stats.accepted + stats.rejected >= max_steps {
                return Err(Error::TooManySteps(max_steps));
            }
            let last = h >= target - t;
            let h_step = if last { target - t } else { h };
            let mut ks: Vec<CMatrix<T>> = Vec::with_capacity(7);
            ks.push(k_first.clone());
            for s in 1..7 {
                let ys = axpy_sum(&y, h_step, &A[s][..s], &ks);
                ks.push(f(t + lit::<T>(C[s]) * h_step, &ys));
            }
            stats.rhs_evals += 6;
            let y_new = axpy_sum(&y, h_step, &A[6][..6], &ks);
            let err_vec = axpy_sum(&CMatrix::zeros(y.nrows(), y.ncols()), h_step, &E, &ks);
            let mut err = T::zero();
            for ((e, a), b) in err_vec.iter().zip(y.iter()).zip(y_new.iter()) {
                let sc = atol + rtol * a.modulus().max(b.modulus());
                err = err.max(e.modulus() / sc);
            }
            if err <= T::one() || h_step <= h_min {
                if err > T::one() && h_step <= h_min {
                    return Err(Error::StepUnderflow { t: to_f64(t), h: to_f64(h_step) });
                }
                t = if last { target } else { t + h_step };
                y = y_new;
                k_first = ks.pop().expect("seven stages");
                stats.accepted += 1;
                let err_c = err.max(lit(1e-10));
                // PI controller (Hairer & Wanner, beta = 0.04)
                let fac = lit::<T>(0.9) * err_c.powf(lit(-0.7 / 5.0)) * err_prev.powf(lit(0.04));
                let fac = fac.min(lit(5.0)).max(lit(0.2));
                if !last {
                    h = h_step * fac;
                } else {
                    h = h.max(h_step * fac.min(T::one()));
                }
                err_prev = err_c;
            } else {
                stats.rejected += 1;
                let fac = (lit::<T>(0.9) * err.powf(lit(-0.2))).max(lit(0.1));
                h = h_step * fac;
                if h < h_min {
                    return Err(Error::StepUnderflow { t: to_f64(t), h: to_f64(h) });
                }
            }
        }
        out.push(y.clone());
    }
    Ok((out, stats))
}
