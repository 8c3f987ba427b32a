//! Physical parameters, unit conventions and drive descriptions.
//!
//! Rates (`g`, `kappa`, `kappa_par`, `gamma`, `gamma_d`) are stored as
//! ordinary frequencies in GHz, i.e. the quoted rate divided by 2π. The
//! equations of motion work in angular units (rad/ns); use
//! [`DeviceParams::angular`] to get those. Optical resonances are absolute
//! ordinary frequencies in THz, drive amplitudes are in sqrt(photons/ns) and
//! times are in ps at the API surface and ns inside the integrators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Default cavity wavelength in nm. Not reported directly; inferred from the
/// quality factor (Q ≈ 11 900 at κ = 28 GHz).
pub const DEFAULT_WAVELENGTH_NM: f64 = 900.0;

/// Converts an ordinary frequency in GHz to an angular rate in rad/ns.
#[inline]
pub fn ordinary_to_angular<T: Real>(f_ghz: T) -> T {
    T::two_pi() * f_ghz
}

/// Optical frequency in THz for a vacuum wavelength in nm.
pub fn wavelength_to_thz<T: Real>(nm: T) -> T {
    lit::<T>(SPEED_OF_LIGHT * 1e-3) / nm
}

/// Waveguide power from the power measured before the grating coupler.
pub fn incident_to_waveguide_power<T: Real>(p_inc: T, eta: T) -> Result<T> {
    if !(eta > T::zero() && eta <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "coupling efficiency must lie in (0, 1], got {}",
            to_f64(eta)
        )));
    }
    if p_inc < T::zero() {
        return Err(Error::InvalidParameter("incident power must be non-negative".into()));
    }
    Ok(p_inc * eta)
}

/// Photon energy ħω in joules for an optical frequency in THz.
pub fn photon_energy<T: Real>(omega_thz: T) -> T {
    lit::<T>(PLANCK * 1e12) * omega_thz
}

/// Drive amplitude ε_in (sqrt(photons/ns)) carried by waveguide power
/// `p_wg` (W), from P = ħω ε². ε² is the photon flux.
pub fn power_to_drive_amplitude<T: Real>(p_wg: T, omega_cav_thz: T) -> T {
    let flux_per_s = p_wg / photon_energy(omega_cav_thz);
    (flux_per_s * lit::<T>(1e-9)).max(T::zero()).sqrt()
}

/// Inverse of [`power_to_drive_amplitude`].
pub fn drive_amplitude_to_power<T: Real>(eps: T, omega_cav_thz: T) -> T {
    eps * eps * lit::<T>(1e9) * photon_energy(omega_cav_thz)
}

/// Physical rates and resonances of the cavity-QD device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceParams<T> {
    /// Cavity-QD coupling strength, GHz.
    pub g: T,
    /// Total cavity energy decay rate, GHz.
    pub kappa: T,
    /// In-plane cavity-waveguide coupling rate, GHz.
    pub kappa_par: T,
    /// QD energy decay rate, GHz.
    pub gamma: T,
    /// QD pure dephasing rate, GHz.
    pub gamma_d: T,
    /// Cavity resonance, THz.
    pub omega_cav: T,
    /// QD resonance, THz.
    pub omega_qd: T,
    /// Grating-to-waveguide coupling efficiency.
    pub eta: T,
}

/// The decay and coupling rates converted to rad/ns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularRates<T> {
    pub g: T,
    pub kappa: T,
    pub kappa_par: T,
    pub gamma: T,
    pub gamma_d: T,
}

impl<T: Real> DeviceParams<T> {
    /// The measured device: g = 13.4, κ = 28.0, κ‖ = 2.9, γ = 5.8 GHz,
    /// η = 1.4×10⁻³, QD resonant with a 900 nm cavity. γ_d is not reported
    /// and defaults to zero.
    pub fn reference_device() -> Self {
        let omega = wavelength_to_thz(lit::<T>(DEFAULT_WAVELENGTH_NM));
        Self {
            g: lit(13.4),
            kappa: lit(28.0),
            kappa_par: lit(2.9),
            gamma: lit(5.8),
            gamma_d: T::zero(),
            omega_cav: omega,
            omega_qd: omega,
            eta: lit(1.4e-3),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("g", self.g),
            ("kappa", self.kappa),
            ("kappa_par", self.kappa_par),
            ("gamma", self.gamma),
            ("gamma_d", self.gamma_d),
            ("omega_cav", self.omega_cav),
            ("omega_qd", self.omega_qd),
            ("eta", self.eta),
        ];
        for (name, v) in named {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} is not finite")));
            }
            if v < T::zero() {
                return Err(Error::InvalidParameter(format!("{name} must be non-negative")));
            }
        }
        if lit::<T>(2.0) * self.kappa_par > self.kappa {
            return Err(Error::InvalidParameter(format!(
                "in-plane coupling 2·kappa_par = {} exceeds total decay kappa = {}",
                to_f64(lit::<T>(2.0) * self.kappa_par),
                to_f64(self.kappa)
            )));
        }
        if !(self.eta > T::zero() && self.eta <= T::one()) {
            return Err(Error::InvalidParameter("eta must lie in (0, 1]".into()));
        }
        Ok(())
    }

    /// g > |κ − γ|/4.
    pub fn is_strongly_coupled(&self) -> bool {
        self.g > (self.kappa - self.gamma).abs() / lit(4.0)
    }

    pub fn angular(&self) -> AngularRates<T> {
        AngularRates {
            g: ordinary_to_angular(self.g),
            kappa: ordinary_to_angular(self.kappa),
            kappa_par: ordinary_to_angular(self.kappa_par),
            gamma: ordinary_to_angular(self.gamma),
            gamma_d: ordinary_to_angular(self.gamma_d),
        }
    }

    /// ω_qd − ω_cav in GHz.
    pub fn qd_detuning(&self) -> T {
        (self.omega_qd - self.omega_cav) * lit(1e3)
    }

    /// Copy with the QD placed `detuning_ghz` away from the cavity.
    pub fn with_qd_detuning(mut self, detuning_ghz: T) -> Self {
        self.omega_qd = self.omega_cav + detuning_ghz * lit(1e-3);
        self
    }

    /// Quality factor ν/κ.
    pub fn quality_factor(&self) -> T {
        self.omega_cav * lit(1e3) / self.kappa
    }
}

/// Drive carrier frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Carrier<T> {
    /// ω_drive − ω_cav, GHz.
    CavityDetuning(T),
    /// ω_drive − ω_qd, GHz.
    QdDetuning(T),
    /// Absolute optical frequency, THz.
    Absolute(T),
}

/// Which port the drive power refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DrivePower<T> {
    /// Watts measured before the input grating.
    Incident(T),
    /// Watts propagating in the waveguide.
    Waveguide(T),
}

/// Temporal shape of a drive. Gaussian FWHM refers to intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Envelope<T> {
    Constant,
    Gaussian { fwhm_ps: T, center_ps: T },
}

/// A classical drive tone or pulse train.
///
/// For a Gaussian envelope with a repetition rate the power is the
/// time-averaged power of the pulse train and the pulse energy is
/// `P_wg / R`; without a repetition rate it is the peak power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec<T> {
    pub carrier: Carrier<T>,
    pub power: DrivePower<T>,
    pub envelope: Envelope<T>,
    /// Pulse repetition rate, MHz.
    #[serde(default)]
    pub repetition_rate_mhz: Option<T>,
}

impl<T: Real> DriveSpec<T> {
    /// Continuous-wave drive with the given waveguide power.
    pub fn cw(carrier: Carrier<T>, power: DrivePower<T>) -> Self {
        Self { carrier, power, envelope: Envelope::Constant, repetition_rate_mhz: None }
    }

    /// CW drive specified directly by its amplitude ε_in.
    pub fn cw_amplitude(carrier: Carrier<T>, eps: T, p: &DeviceParams<T>) -> Self {
        Self::cw(carrier, DrivePower::Waveguide(drive_amplitude_to_power(eps, p.omega_cav)))
    }

    pub fn validate(&self) -> Result<()> {
        let pw = match self.power {
            DrivePower::Incident(v) | DrivePower::Waveguide(v) => v,
        };
        if !(pw >= T::zero() && pw.is_finite()) {
            return Err(Error::InvalidParameter("drive power must be finite and non-negative".into()));
        }
        if let Envelope::Gaussian { fwhm_ps, center_ps } = self.envelope {
            if !(fwhm_ps > T::zero() && fwhm_ps.is_finite() && center_ps.is_finite()) {
                return Err(Error::InvalidParameter("gaussian fwhm must be positive".into()));
            }
        }
        if let Some(r) = self.repetition_rate_mhz {
            if !(r > T::zero()) {
                return Err(Error::InvalidParameter("repetition rate must be positive".into()));
            }
        }
        Ok(())
    }

    /// Drive frequency in THz.
    pub fn frequency_thz(&self, p: &DeviceParams<T>) -> T {
        match self.carrier {
            Carrier::CavityDetuning(d) => p.omega_cav + d * lit(1e-3),
            Carrier::QdDetuning(d) => p.omega_qd + d * lit(1e-3),
            Carrier::Absolute(f) => f,
        }
    }

    /// ω_drive − ω_cav in GHz.
    pub fn cavity_detuning(&self, p: &DeviceParams<T>) -> T {
        (self.frequency_thz(p) - p.omega_cav) * lit(1e3)
    }

    /// Waveguide power as specified (average for pulse trains).
    pub fn waveguide_power(&self, p: &DeviceParams<T>) -> Result<T> {
        match self.power {
            DrivePower::Waveguide(w) => Ok(w),
            DrivePower::Incident(w) => incident_to_waveguide_power(w, p.eta),
        }
    }

    /// Energy per pulse in the waveguide, aJ: `P_wg / R`.
    pub fn pulse_energy_aj(&self, p: &DeviceParams<T>) -> Result<Option<T>> {
        match (self.envelope, self.repetition_rate_mhz) {
            (Envelope::Gaussian { .. }, Some(r)) => {
                let e_joule = self.waveguide_power(p)? / (r * lit(1e6));
                Ok(Some(e_joule * lit(1e18)))
            }
            _ => Ok(None),
        }
    }

    /// Peak waveguide power of the envelope, W.
    pub fn peak_waveguide_power(&self, p: &DeviceParams<T>) -> Result<T> {
        let pw = self.waveguide_power(p)?;
        match (self.envelope, self.repetition_rate_mhz) {
            (Envelope::Gaussian { fwhm_ps, .. }, Some(r)) => {
                let energy = pw / (r * lit(1e6));
                Ok(energy / (gaussian_area_factor::<T>() * fwhm_ps * lit(1e-12)))
            }
            _ => Ok(pw),
        }
    }

    /// Peak amplitude ε_in in sqrt(photons/ns).
    pub fn peak_amplitude(&self, p: &DeviceParams<T>) -> Result<T> {
        Ok(power_to_drive_amplitude(self.peak_waveguide_power(p)?, p.omega_cav))
    }

    /// Envelope of the field amplitude at `t_ns`, normalised to 1 at the peak.
    pub fn amplitude_shape(&self, t_ns: T) -> T {
        match self.envelope {
            Envelope::Constant => T::one(),
            Envelope::Gaussian { fwhm_ps, center_ps } => {
                let dt = t_ns * lit(1e3) - center_ps;
                // intensity exp(-4 ln2 x²/w²) -> amplitude exp(-2 ln2 x²/w²)
                (-(lit::<T>(2.0) * T::ln_2()) * dt * dt / (fwhm_ps * fwhm_ps)).exp()
            }
        }
    }

    /// Copy with a different envelope centre (ps); constant envelopes are unchanged.
    pub fn shifted(mut self, center_ps: T) -> Self {
        if let Envelope::Gaussian { fwhm_ps, .. } = self.envelope {
            self.envelope = Envelope::Gaussian { fwhm_ps, center_ps };
        }
        self
    }

    /// Copy with the power scaled by `factor`.
    pub fn scaled(mut self, factor: T) -> Self {
        self.power = match self.power {
            DrivePower::Incident(w) => DrivePower::Incident(w * factor),
            DrivePower::Waveguide(w) => DrivePower::Waveguide(w * factor),
        };
        self
    }
}

/// ∫ exp(-4 ln2 t²/w²) dt / w = sqrt(π / (4 ln 2)).
pub fn gaussian_area_factor<T: Real>() -> T {
    (T::pi() / (lit::<T>(4.0) * T::ln_2())).sqrt()
}

/// Affine temperature tuning of the QD and cavity resonances.
///
/// Both lines red-shift linearly with temperature. At `t_resonance` the QD
/// sits exactly on the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningModel<T> {
    /// Temperature of QD-cavity resonance, K.
    pub t_resonance: T,
    /// QD red-shift rate, GHz/K.
    pub qd_slope: T,
    /// Cavity red-shift rate, GHz/K.
    pub cav_slope: T,
    /// Lower end of the validity range, K.
    pub t_min: T,
    /// Upper end of the validity range, K.
    pub t_max: T,
}

impl<T: Real> TuningModel<T> {
    /// Slopes chosen so that at `t_ref` the QD sits `detuning_ref` GHz from
    /// the cavity (negative = red of the cavity).
    pub fn calibrated(t_resonance: T, t_ref: T, detuning_ref: T, cav_slope: T) -> Result<Self> {
        if t_ref == t_resonance {
            return Err(Error::InvalidParameter(
                "calibration temperature must differ from the resonance temperature".into(),
            ));
        }
        let qd_slope = cav_slope - detuning_ref / (t_ref - t_resonance);
        Ok(Self { t_resonance, qd_slope, cav_slope, t_min: lit(4.0), t_max: lit(80.0) })
    }

    /// Resonance at 39 K; QD 55 GHz red of the cavity at 45 K.
    pub fn reference_device() -> Self {
        Self::calibrated(lit(39.0), lit(45.0), lit(-55.0), lit(3.7)).expect("distinct temperatures")
    }

    /// ω_qd − ω_cav at temperature `t`, GHz.
    pub fn detuning_at(&self, t: T) -> T {
        -(self.qd_slope - self.cav_slope) * (t - self.t_resonance)
    }
}

/// Device parameters at temperature `t`. `base.omega_cav` is the cavity
/// resonance at `m.t_resonance`; `base.omega_qd` is ignored.
pub fn temperature_to_detunings<T: Real>(
    t: T,
    m: &TuningModel<T>,
    base: &DeviceParams<T>,
) -> Result<DeviceParams<T>> {
    if !(t >= m.t_min && t <= m.t_max) {
        return Err(Error::TemperatureOutOfRange {
            t: to_f64(t),
            min: to_f64(m.t_min),
            max: to_f64(m.t_max),
        });
    }
    let dt = t - m.t_resonance;
    let mut out = *base;
    out.omega_cav = base.omega_cav - m.cav_slope * dt * lit(1e-3);
    out.omega_qd = base.omega_cav - m.qd_slope * dt * lit(1e-3);
    Ok(out)
}
