//! Signal scatter versus signal-control delay.
//!
//! Delay is the signal pulse centre minus the control pulse centre.

use std::io::Write;

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{evolve, DensityMatrix, EvolveOptions, StateDefects, Stepper, DEFAULT_N_FOCK_PULSED};
use crate::operators::{HilbertDims, SystemOperators};
use crate::params::{
    gaussian_area_factor, photon_energy, power_to_drive_amplitude, Carrier, DeviceParams, DrivePower, DriveSpec, Envelope,
};
use crate::scalar::{lit, to_f64, Cplx, Real};
use crate::spectra::{cavity_population, format_num, polariton_modes, scatter_fraction};

use super::{damped_stark_kernel, SwitchingCurve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PumpProbeMode {
    /// Two-tone master equation per delay.
    #[serde(rename = "full_mastereq")]
    FullMasterEq,
    /// Instantaneous linear response with a Stark-shifted QD.
    Adiabatic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpProbeOptions<T> {
    pub mode: PumpProbeMode,
    pub n_fock: usize,
    /// Sampling interval of the time grid, ps.
    pub dt_ps: T,
    pub stepper: Stepper<T>,
}

impl<T: Real> PumpProbeOptions<T> {
    pub fn new(mode: PumpProbeMode) -> Self {
        Self {
            mode,
            n_fock: DEFAULT_N_FOCK_PULSED,
            dt_ps: lit(1.0),
            stepper: Stepper::adaptive(lit(1e-10), lit(1e-8)),
        }
    }
}

/// Time-integrated signal scatter (photons per pulse) versus delay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayScan<T: Real> {
    pub delays: Vec<T>,
    pub intensity: Vec<T>,
    /// Signal-band scatter of the control alone; its field is subtracted
    /// before the signal scatter is integrated.
    pub baseline: T,
    /// Worst state defects over every master-equation trajectory.
    #[serde(skip)]
    pub worst_defects: Option<StateDefects<T>>,
}

impl<T: Real> DelayScan<T> {
    /// CSV with header `delay_ps,intensity`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["delay_ps", "intensity"])?;
        for (d, i) in self.delays.iter().zip(&self.intensity) {
            wr.write_record([format_num(to_f64(*d)), format_num(to_f64(*i))])?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn gaussian_params<T: Real>(d: &DriveSpec<T>) -> Result<(T, T)> {
    match d.envelope {
        Envelope::Gaussian { fwhm_ps, center_ps } => Ok((fwhm_ps, center_ps)),
        Envelope::Constant => Err(Error::InvalidParameter("pump-probe pulses need Gaussian envelopes".into())),
    }
}

/// Signal resonant with the QD (60 ps) and control on the lower polariton
/// (80 ps), both at `rep_rate_mhz`. The control carries `control_energy_aj`
/// per pulse; the signal peak drives `signal_photons` intracavity photons.
pub fn paper_pump_probe_drives<T: Real>(
    p: &DeviceParams<T>,
    control_energy_aj: T,
    signal_photons: T,
    rep_rate_mhz: T,
) -> (DriveSpec<T>, DriveSpec<T>) {
    let lower = polariton_modes(p, p.qd_detuning())[0].center;
    let rep = rep_rate_mhz * lit(1e6);
    let control = DriveSpec {
        carrier: Carrier::QdDetuning(lower - p.qd_detuning()),
        power: DrivePower::Waveguide(control_energy_aj * lit(1e-18) * rep),
        envelope: Envelope::Gaussian { fwhm_ps: lit(80.0), center_ps: T::zero() },
        repetition_rate_mhz: Some(rep_rate_mhz),
    };
    let flux = signal_photons / cavity_population(p, p.qd_detuning());
    let peak_w = flux * lit(1e9) * photon_energy(p.omega_cav);
    let fwhm_s = lit::<T>(60.0);
    let signal = DriveSpec {
        carrier: Carrier::QdDetuning(T::zero()),
        power: DrivePower::Waveguide(peak_w * gaussian_area_factor::<T>() * fwhm_s * lit(1e-12) * rep),
        envelope: Envelope::Gaussian { fwhm_ps: fwhm_s, center_ps: T::zero() },
        repetition_rate_mhz: Some(rep_rate_mhz),
    };
    (signal, control)
}

/// Uniform grid covering both pulses for every delay, ps.
fn time_grid<T: Real>(signal: &DriveSpec<T>, control: &DriveSpec<T>, delays: &[T], dt: T) -> Result<Vec<T>> {
    let (ws, _) = gaussian_params(signal)?;
    let (wc, cc) = gaussian_params(control)?;
    let pad = lit::<T>(3.0) * ws.max(wc);
    let dmin = delays.iter().fold(T::zero(), |a, d| a.min(*d));
    let dmax = delays.iter().fold(T::zero(), |a, d| a.max(*d));
    let lo = cc + dmin - pad;
    let hi = cc + dmax + pad;
    let n = to_f64((hi - lo) / dt).ceil() as usize + 1;
    Ok((0..n).map(|k| lo + dt * lit(k as f64)).collect())
}

/// Peak photon flux (photons/ns) and intensity shape of a pulse.
fn flux<T: Real>(d: &DriveSpec<T>, p: &DeviceParams<T>, t_ps: T) -> Result<T> {
    let eps = d.peak_amplitude(p)?;
    let a = d.amplitude_shape(t_ps * lit(1e-3));
    Ok(eps * eps * a * a)
}

/// Adiabatic signal scatter for one signal placement; `coupled` = false
/// removes the QD.
fn adiabatic_intensity<T: Real>(
    p: &DeviceParams<T>,
    signal: &DriveSpec<T>,
    control: &DriveSpec<T>,
    grid: &[T],
    coupled: bool,
) -> Result<T> {
    let mut q = *p;
    if !coupled {
        q.g = T::zero();
    }
    let omega_s = signal.cavity_detuning(p);
    let omega_c = control.cavity_detuning(p);
    let chi_c = cavity_population(p, omega_c);
    let kernel = damped_stark_kernel(p, omega_c - p.qd_detuning());
    let dt_ns = (grid[1] - grid[0]) * lit(1e-3);
    let mut total = T::zero();
    for t in grid {
        let phi_s = flux(signal, p, *t)?;
        if phi_s == T::zero() {
            continue;
        }
        let shift = kernel * chi_c * flux(control, p, *t)?;
        let mut qt = q;
        qt.omega_qd = p.omega_qd - shift * lit(1e-3);
        total += phi_s * scatter_fraction(&qt, omega_s) * dt_ns;
    }
    Ok(total)
}

/// Signal-band coherent scatter of a trajectory: the part of ⟨b⟩(t) within
/// ±`half_band` GHz of the frame, time-integrated and weighted by the
/// out-of-waveguide loss rate.
fn band_scatter<T: Real>(b: &[Cplx<T>], dt_ns: T, half_band: T, p: &DeviceParams<T>) -> T {
    let n = b.len();
    let mut buf = b.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let df = T::one() / (lit::<T>(n as f64) * dt_ns);
    let energy = buf.iter().enumerate().fold(T::zero(), |acc, (k, z)| {
        let f = if k <= n / 2 { lit::<T>(k as f64) } else { lit::<T>(k as f64 - n as f64) } * df;
        if f.abs() < half_band {
            acc + z.norm_sqr()
        } else {
            acc
        }
    });
    // Parseval: Σ|b|²dt = Σ|B|² dt / n
    let r = p.angular();
    (r.kappa - lit::<T>(2.0) * r.kappa_par) * energy * dt_ns / lit(n as f64)
}

fn worse<T: Real>(a: Option<StateDefects<T>>, b: StateDefects<T>) -> Option<StateDefects<T>> {
    Some(match a {
        None => b,
        Some(a) => StateDefects {
            trace_error: a.trace_error.max(b.trace_error),
            hermiticity_error: a.hermiticity_error.max(b.hermiticity_error),
            min_eigenvalue: a.min_eigenvalue.min(b.min_eigenvalue),
        },
    })
}

/// ⟨b⟩(t) on `grid` with both drives (signal first, so the frame follows
/// the signal carrier) and the worst state defects along the way.
fn master_equation_field<T: Real>(
    p: &DeviceParams<T>,
    signal: &DriveSpec<T>,
    control: &DriveSpec<T>,
    grid: &[T],
    opts: &PumpProbeOptions<T>,
) -> Result<(Vec<Cplx<T>>, StateDefects<T>)> {
    let dims = HilbertDims::new(opts.n_fock)?;
    let ops = SystemOperators::<T>::new(dims);
    let eo = EvolveOptions::new(opts.n_fock).with_stepper(opts.stepper);
    let traj = evolve(&DensityMatrix::ground(dims), p, &[*signal, *control], grid, &eo)?;
    let mut defects = None;
    for s in &traj.states {
        defects = worse(defects, s.defects());
    }
    Ok((traj.expect(&ops.b)?, defects.expect("non-empty trajectory")))
}

/// Signal scatter versus delay. The control stays at its configured centre;
/// the signal is placed `delay` ps after it.
pub fn pump_probe_scan<T: Real>(
    p: &DeviceParams<T>,
    signal: &DriveSpec<T>,
    control: &DriveSpec<T>,
    delay_grid: &[T],
    opts: &PumpProbeOptions<T>,
) -> Result<DelayScan<T>> {
    p.validate()?;
    signal.validate()?;
    control.validate()?;
    if delay_grid.is_empty() {
        return Err(Error::InvalidParameter("empty delay grid".into()));
    }
    if !(opts.dt_ps > T::zero()) {
        return Err(Error::InvalidParameter("time step must be positive".into()));
    }
    let (_, cc) = gaussian_params(control)?;
    let grid = time_grid(signal, control, delay_grid, opts.dt_ps)?;
    let silent = signal.scaled(T::zero());

    match opts.mode {
        PumpProbeMode::Adiabatic => {
            let intensity = delay_grid
                .par_iter()
                .map(|d| adiabatic_intensity(p, &signal.shifted(cc + *d), control, &grid, true))
                .collect::<Result<Vec<_>>>()?;
            Ok(DelayScan { delays: delay_grid.to_vec(), intensity, baseline: T::zero(), worst_defects: None })
        }
        PumpProbeMode::FullMasterEq => {
            // the control-only field is removed at the amplitude level, which
            // leaves the signal's own scatter free of signal-control beating
            let half_band = (control.cavity_detuning(p) - signal.cavity_detuning(p)).abs() / lit(2.0);
            let dt_ns = opts.dt_ps * lit(1e-3);
            let (b_control, base_defects) = master_equation_field(p, &silent.shifted(cc), control, &grid, opts)?;
            let baseline = band_scatter(&b_control, dt_ns, half_band, p);
            let runs = delay_grid
                .par_iter()
                .map(|d| {
                    let (b, defects) = master_equation_field(p, &signal.shifted(cc + *d), control, &grid, opts)?;
                    let diff: Vec<Cplx<T>> = b.iter().zip(&b_control).map(|(x, y)| *x - *y).collect();
                    Ok((band_scatter(&diff, dt_ns, half_band, p), defects))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut worst = Some(base_defects);
            let intensity = runs
                .into_iter()
                .map(|(i, d)| {
                    worst = worse(worst, d);
                    i
                })
                .collect();
            Ok(DelayScan { delays: delay_grid.to_vec(), intensity, baseline, worst_defects: worst })
        }
    }
}

/// ρ(E) = (I_sat − I(E))/(I_sat − I(0)) at zero delay in the adiabatic
/// model, where I_sat is the scatter with the QD removed.
pub fn adiabatic_switching_curve<T: Real>(
    p: &DeviceParams<T>,
    signal: &DriveSpec<T>,
    control: &DriveSpec<T>,
    energies_aj: &[T],
    dt_ps: T,
) -> Result<SwitchingCurve<T>> {
    let (_, cc) = gaussian_params(control)?;
    let rep = control
        .repetition_rate_mhz
        .ok_or_else(|| Error::InvalidParameter("control needs a repetition rate to define its energy".into()))?;
    let signal = signal.shifted(cc);
    let grid = time_grid(&signal, control, &[T::zero()], dt_ps)?;
    let off = adiabatic_intensity(p, &signal, &control.scaled(T::zero()), &grid, true)?;
    let sat = adiabatic_intensity(p, &signal, &control.scaled(T::zero()), &grid, false)?;
    if !(sat > off) {
        return Err(Error::DegenerateData("QD does not suppress the signal scatter".into()));
    }
    let rho = energies_aj
        .par_iter()
        .map(|e| {
            let mut c = *control;
            c.power = DrivePower::Waveguide(*e * lit(1e-18) * rep * lit(1e6));
            let i = adiabatic_intensity(p, &signal, &c, &grid, true)?;
            Ok((sat - i) / (sat - off))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SwitchingCurve { energies: energies_aj.to_vec(), rho })
}

/// Peak ε of a drive, for reporting.
pub fn peak_amplitude_of<T: Real>(d: &DriveSpec<T>, p: &DeviceParams<T>) -> Result<T> {
    Ok(power_to_drive_amplitude(d.peak_waveguide_power(p)?, p.omega_cav))
}
