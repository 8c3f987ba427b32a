//! Stark shift of the QD line versus CW drive power from the full master
//! equation: steady state, cavity covariance spectrum, Lorentzian line fit.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::fitting::fit_lorentzian;
use crate::lindblad::{fock_convergence, StateDefects};
use crate::params::{Carrier, DeviceParams, DrivePower, DriveSpec};
use crate::scalar::{lit, Real};
use crate::spectra::peaks::global_peak;
use crate::spectra::{
    cavity_population, polariton_modes, power_spectrum, CorrelationKind, CorrelationOptions, StationaryProblem,
};

use super::damped_stark_kernel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarkOptions<T> {
    pub n_fock: usize,
    /// Intracavity population of the weak reference drive.
    pub reference_photons: T,
    /// Compare ⟨b†b⟩ against n_fock + 4 levels at every power.
    pub check_truncation: bool,
}

impl<T: Real> Default for StarkOptions<T> {
    fn default() -> Self {
        Self { n_fock: crate::lindblad::DEFAULT_N_FOCK_CW, reference_photons: lit(1e-4), check_truncation: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarkPoint<T> {
    /// Incident power, W.
    pub p_inc: T,
    /// Waveguide power, W.
    pub p_wg: T,
    /// Steady-state ⟨b†b⟩.
    pub n_cav: T,
    /// Fitted QD line centre relative to the cavity, GHz.
    pub center: T,
    /// Red shift relative to the weak-drive line, GHz.
    pub shift: T,
    /// Defects of the steady state behind this point.
    pub defects: StateDefects<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarkCurve<T> {
    pub points: Vec<StarkPoint<T>>,
    /// Weak-drive QD line centre relative to the cavity, GHz.
    pub reference_center: T,
}

impl<T: Real> StarkCurve<T> {
    pub fn shifts(&self) -> Vec<T> {
        self.points.iter().map(|p| p.shift).collect()
    }
}

/// QD-like dressed mode: the eigenmode closest to the bare QD.
fn qd_like_mode<T: Real>(p: &DeviceParams<T>) -> (T, T) {
    let d = p.qd_detuning();
    let m = polariton_modes(p, d);
    let k = if (m[0].center - d).abs() <= (m[1].center - d).abs() { 0 } else { 1 };
    (m[k].center, m[k].linewidth)
}

/// Steady-state ⟨b†b⟩, fitted QD line centre (GHz from the cavity) and
/// state defects under a CW drive on the cavity resonance with amplitude
/// `eps`.
fn qd_line<T: Real>(p: &DeviceParams<T>, eps: T, guess: T, opts: &StarkOptions<T>) -> Result<(T, T, StateDefects<T>)> {
    let drive = DriveSpec::cw_amplitude(Carrier::CavityDetuning(T::zero()), eps, p);
    if opts.check_truncation {
        fock_convergence(p, &drive, opts.n_fock)?;
    }
    let prob = StationaryProblem::new(p, &drive, opts.n_fock)?;
    let n = prob.rho.expect(&prob.ops.n_cav)?.re;
    let copts = CorrelationOptions::auto(p, T::zero(), opts.n_fock);
    let spec = power_spectrum(&prob.cavity_correlation(CorrelationKind::Covariance, &copts)?)?;
    let (_, width) = qd_like_mode(p);
    // drive sits on the cavity, so the spectrum axis is already cavity-relative
    let coarse = spec.window(guess - lit::<T>(2.0) * width, guess + lit::<T>(2.0) * width);
    let top = coarse.axis[global_peak(&coarse.values).expect("window is non-empty")];
    let fine = spec.window(top - width, top + width);
    let fit = fit_lorentzian(&fine.axis, &fine.values)?;
    Ok((n, fit.get("center").expect("fitted centre"), prob.rho.defects()))
}

/// QD line shift for each incident power, with the drive on the cavity
/// resonance. Powers are converted to the waveguide with `p.eta`.
pub fn stark_shift_vs_power<T: Real>(p: &DeviceParams<T>, p_inc_grid: &[T], opts: &StarkOptions<T>) -> Result<StarkCurve<T>> {
    p.validate()?;
    let (mode_center, _) = qd_like_mode(p);
    let flux_per_photon = cavity_population(p, T::zero());
    let eps_ref = (opts.reference_photons / flux_per_photon).sqrt();
    let (_, reference_center, reference_defects) = qd_line(p, eps_ref, mode_center, opts)?;
    let kernel = damped_stark_kernel(p, -p.qd_detuning());

    let points = p_inc_grid
        .par_iter()
        .map(|&p_inc| {
            let drive = DriveSpec::cw(Carrier::CavityDetuning(T::zero()), DrivePower::Incident(p_inc));
            drive.validate()?;
            let p_wg = drive.waveguide_power(p)?;
            if p_inc == T::zero() {
                return Ok(StarkPoint {
                    p_inc,
                    p_wg,
                    n_cav: T::zero(),
                    center: reference_center,
                    shift: T::zero(),
                    defects: reference_defects,
                });
            }
            let eps = drive.peak_amplitude(p)?;
            let n_guess = flux_per_photon * eps * eps;
            let guess = reference_center - kernel * n_guess;
            let (n_cav, center, defects) = qd_line(p, eps, guess, opts)?;
            Ok(StarkPoint { p_inc, p_wg, n_cav, center, shift: reference_center - center, defects })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StarkCurve { points, reference_center })
}
