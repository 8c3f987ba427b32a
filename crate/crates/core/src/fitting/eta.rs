//! Grating efficiency from measured Stark shifts versus incident power.

use crate::error::{Error, Result};
use crate::params::{photon_energy, DeviceParams};
use crate::scalar::{lit, Real};
use crate::spectra::cavity_population;
use crate::switching::{damped_stark_kernel, stark_shift_vs_power, StarkOptions};

use super::{levenberg_marquardt, FitParam, FitResult, LmOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaOptions<T> {
    pub stark: StarkOptions<T>,
    pub lm: LmOptions<T>,
}

impl<T: Real> Default for EtaOptions<T> {
    fn default() -> Self {
        Self { stark: StarkOptions::default(), lm: LmOptions::default() }
    }
}

/// η whose simulated Stark curve best matches `measured` (incident power W,
/// red shift GHz) in least squares. `p.eta` is ignored.
pub fn estimate_eta<T: Real>(
    measured: &[(T, T)],
    p: &DeviceParams<T>,
    opts: &EtaOptions<T>,
) -> Result<FitResult<T>> {
    if measured.len() < 3 {
        return Err(Error::InvalidParameter("η estimation needs at least 3 power points".into()));
    }
    if measured.iter().any(|(pi, s)| !(*pi >= T::zero()) || !s.is_finite()) {
        return Err(Error::InvalidParameter("powers must be non-negative and shifts finite".into()));
    }
    let scale = measured.iter().fold(T::zero(), |a, (_, s)| a.max(s.abs()));
    if !(scale > lit(1e-9)) {
        return Err(Error::NotIdentifiable("all Stark shifts vanish, η → 0".into()));
    }

    // weak-drive dispersive slope: shift ≈ K·|χ|²·η·P/(ħω)
    let per_watt = damped_stark_kernel(p, -p.qd_detuning()) * cavity_population(p, T::zero())
        / (photon_energy(p.omega_cav) * lit(1e9));
    let (num, den) = measured
        .iter()
        .fold((T::zero(), T::zero()), |(n, d), (pi, s)| (n + *s * *pi, d + *pi * *pi));
    let seed = num / (den * per_watt);
    if !(seed > T::zero() && seed.is_finite()) {
        return Err(Error::NotIdentifiable("shifts carry no red Stark signal".into()));
    }

    let powers: Vec<T> = measured.iter().map(|(pi, _)| *pi).collect();
    let resid = |x: &[T]| -> Result<Vec<T>> {
        let eta = x[0] * seed;
        if !(eta > T::zero() && eta <= T::one()) {
            return Err(Error::InvalidParameter("η left (0, 1]".into()));
        }
        let mut q = *p;
        q.eta = eta;
        let curve = stark_shift_vs_power(&q, &powers, &opts.stark)?;
        Ok(curve.points.iter().zip(measured).map(|(pt, (_, s))| (pt.shift - *s) / scale).collect())
    };
    let out = levenberg_marquardt(resid, &[T::one()], &opts.lm)?;
    let mut fit = FitResult::from_outcome("eta", &["eta"], &out);
    fit.params[0] = FitParam { name: "eta".into(), value: out.params[0] * seed, variance: fit.params[0].variance * seed * seed };
    Ok(fit)
}
