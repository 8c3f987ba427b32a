//! Optical-Stark switching: dispersive shift, the switching-contrast curve,
//! switching energy and its detuning dependence, pump-probe delay scans and
//! the dissipation bound.
//!
//! Shifts are reported with red (towards lower frequency) positive.

mod pump_probe;
mod semiclassical;
mod stark;

use std::io::Write;

use serde::Serialize;

pub use pump_probe::{
    adiabatic_switching_curve, paper_pump_probe_drives, peak_amplitude_of, pump_probe_scan, DelayScan, PumpProbeMode, PumpProbeOptions,
};
pub use semiclassical::{
    damped_stark_kernel, semiclassical_e0, switching_energy_vs_detuning, SemiclassicalModel, CALIBRATION_DETUNING_GHZ,
    CALIBRATION_E0_AJ, write_detuning_csv,
};
pub use stark::{stark_shift_vs_power, StarkCurve, StarkOptions, StarkPoint};

use crate::error::{Error, Result};
use crate::params::DeviceParams;
use crate::scalar::{lit, to_f64, Real};
use crate::spectra::format_num;

/// Dispersive Stark shift 2g²n/Δ of the QD transition in GHz, where Δ is the
/// drive frequency minus the QD frequency (GHz). Valid for |Δ| ≫ g; see
/// [`is_dispersive`].
pub fn stark_shift_dispersive<T: Real>(n_cav: T, p: &DeviceParams<T>, delta_qd: T) -> Result<T> {
    if delta_qd == T::zero() || !delta_qd.is_finite() {
        return Err(Error::InvalidParameter("Stark detuning must be finite and non-zero".into()));
    }
    Ok(lit::<T>(2.0) * p.g * p.g * n_cav / delta_qd)
}

/// Whether the dispersive formula applies (|Δ| > g).
pub fn is_dispersive<T: Real>(p: &DeviceParams<T>, delta_qd: T) -> bool {
    delta_qd.abs() > p.g
}

/// Contrast versus control pulse energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchingCurve<T> {
    /// Control pulse energy in the waveguide, aJ.
    pub energies: Vec<T>,
    pub rho: Vec<T>,
}

impl<T: Real> SwitchingCurve<T> {
    /// CSV with header `energy_aj,rho`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["energy_aj", "rho"])?;
        for (e, r) in self.energies.iter().zip(&self.rho) {
            wr.write_record([format_num(to_f64(*e)), format_num(to_f64(*r))])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// ρ(E) = 1/(1 + E/E₀)².
pub fn switching_curve_model<T: Real>(e_grid: &[T], e0: T) -> Result<SwitchingCurve<T>> {
    if !(e0 > T::zero() && e0.is_finite()) {
        return Err(Error::InvalidParameter("E0 must be positive".into()));
    }
    let rho = e_grid
        .iter()
        .map(|e| {
            let u = T::one() + *e / e0;
            T::one() / (u * u)
        })
        .collect();
    Ok(SwitchingCurve { energies: e_grid.to_vec(), rho })
}

/// Energy of the 10 dB point, (√10 − 1)·E₀.
pub fn switching_energy_from_e0<T: Real>(e0: T) -> T {
    (lit::<T>(10.0).sqrt() - T::one()) * e0
}

/// (I_max − I_min)/I_max.
pub fn contrast<T: Real>(i_max: T, i_min: T) -> Result<T> {
    if !(i_max > T::zero()) {
        return Err(Error::InvalidParameter("maximum intensity must be positive".into()));
    }
    if !(i_min >= T::zero() && i_min <= i_max) {
        return Err(Error::InvalidParameter("minimum intensity must lie in [0, i_max]".into()));
    }
    Ok((i_max - i_min) / i_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DissipationBound<T> {
    /// 1 − (1 − 2κ‖/κ)², the fraction of waveguide light the cavity removes.
    pub coupled_fraction: T,
    /// coupled_fraction · E_switch, aJ.
    pub e_dis: T,
}

/// Upper bound on the control energy dissipated per switching event.
pub fn dissipation_bound<T: Real>(e_switch: T, p: &DeviceParams<T>) -> Result<DissipationBound<T>> {
    if !(p.kappa > T::zero() && p.kappa_par >= T::zero()) || lit::<T>(2.0) * p.kappa_par > p.kappa {
        return Err(Error::InvalidParameter("need 0 ≤ 2κ‖ ≤ κ".into()));
    }
    if !(e_switch >= T::zero()) {
        return Err(Error::InvalidParameter("switching energy must be non-negative".into()));
    }
    let t = T::one() - lit::<T>(2.0) * p.kappa_par / p.kappa;
    let coupled_fraction = T::one() - t * t;
    Ok(DissipationBound { coupled_fraction, e_dis: coupled_fraction * e_switch })
}
