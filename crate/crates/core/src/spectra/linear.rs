//! Weak-drive (single-excitation) response of the side-coupled cavity.

use std::io::Write;

use nalgebra::{ComplexField, Matrix2};
use rayon::prelude::*;

use super::peaks::doublet;
use super::spectrum::{format_num, Reference, Spectrum};
use crate::error::{Error, Result};
use crate::params::{temperature_to_detunings, DeviceParams, TuningModel};
use crate::scalar::{im, lit, re, to_f64, Cplx, Real};

/// Cavity-field susceptibility denominator
/// `z(ω) = i(ω_c−ω) + κ/2 + g²/(i(ω_qd−ω) + γ/2 + γ_d)`, angular units,
/// with `omega_ghz` measured from the cavity.
fn denominator<T: Real>(p: &DeviceParams<T>, omega_ghz: T) -> Cplx<T> {
    let r = p.angular();
    let w = omega_ghz * T::two_pi();
    let wq = p.qd_detuning() * T::two_pi();
    let qd = im(wq - w) + re(r.gamma / lit(2.0) + r.gamma_d);
    let coupling = if r.g == T::zero() { re(T::zero()) } else { re(r.g * r.g) / qd };
    im(-w) + re(r.kappa / lit(2.0)) + coupling
}

/// Amplitude transmission t(ω) = 1 − κ‖/z(ω).
pub fn transmission_amplitude<T: Real>(p: &DeviceParams<T>, omega_ghz: T) -> Cplx<T> {
    re(T::one()) - re(p.angular().kappa_par) / denominator(p, omega_ghz)
}

/// Steady-state intracavity photons per unit input flux, |⟨b⟩/ε|² = κ‖/|z|² (ns).
pub fn cavity_population<T: Real>(p: &DeviceParams<T>, omega_ghz: T) -> T {
    p.angular().kappa_par / denominator(p, omega_ghz).modulus_squared()
}

/// Fraction of the incident flux scattered out of the waveguide by the
/// cavity, (κ − 2κ‖)|⟨b⟩/ε|².
pub fn scatter_fraction<T: Real>(p: &DeviceParams<T>, omega_ghz: T) -> T {
    let r = p.angular();
    (r.kappa - lit::<T>(2.0) * r.kappa_par) * cavity_population(p, omega_ghz)
}

/// Output of [`linear_response_scan`]; both spectra are relative to the cavity.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearResponse<T> {
    /// Complex amplitude transmission t(ω).
    pub amplitude: Vec<Cplx<T>>,
    /// Power transmission |t(ω)|².
    pub transmission: Spectrum<T>,
    /// Scattered fraction of the incident flux.
    pub cavity_scatter: Spectrum<T>,
}

/// Weak-drive transmission and cavity scatter on a strictly increasing
/// grid of drive frequencies (GHz from the cavity).
pub fn linear_response_scan<T: Real>(p: &DeviceParams<T>, omega_grid: &[T]) -> Result<LinearResponse<T>> {
    p.validate()?;
    if omega_grid.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidParameter("frequency grid must be finite".into()));
    }
    let amplitude: Vec<Cplx<T>> = omega_grid.iter().map(|w| transmission_amplitude(p, *w)).collect();
    let trans = amplitude.iter().map(|t| t.modulus_squared()).collect();
    let scatter = omega_grid.iter().map(|w| scatter_fraction(p, *w).max(T::zero())).collect();
    Ok(LinearResponse {
        amplitude,
        transmission: Spectrum::new(omega_grid.to_vec(), trans, Reference::Cavity)?,
        cavity_scatter: Spectrum::new(omega_grid.to_vec(), scatter, Reference::Cavity)?,
    })
}

/// A dressed mode: centre relative to the bare cavity and intensity FWHM, GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolaritonMode<T> {
    pub center: T,
    pub linewidth: T,
}

impl<T: Real> PolaritonMode<T> {
    /// Complex eigenfrequency center − i·linewidth/2.
    pub fn eigenvalue(&self) -> Cplx<T> {
        Cplx::new(self.center, -self.linewidth / lit(2.0))
    }
}

/// Eigenmodes of `[[−iκ/2, g], [g, δ − i(γ/2+γ_d)]]` for QD detuning δ
/// (GHz, QD minus cavity), ordered lower then upper.
pub fn polariton_modes<T: Real>(p: &DeviceParams<T>, detuning: T) -> [PolaritonMode<T>; 2] {
    let half = lit::<T>(0.5);
    let a = Cplx::new(T::zero(), -p.kappa * half);
    let d = Cplx::new(detuning, -(p.gamma * half + p.gamma_d));
    let m = Matrix2::new(a, re(p.g), re(p.g), d);
    let mean = m.trace() * re(half);
    let diff = (a - d) * re(half);
    let root = (diff * diff + re(p.g * p.g)).sqrt();
    let mut ev = [mean - root, mean + root];
    ev.sort_by(|x, y| x.re.partial_cmp(&y.re).expect("finite eigenvalues"));
    ev.map(|z| PolaritonMode { center: z.re, linewidth: -lit::<T>(2.0) * z.im })
}

/// Scatter intensity versus temperature and frequency.
///
/// Each row is the cavity scatter at that temperature with the frequency
/// axis measured from that row's cavity resonance.
#[derive(Debug, Clone, PartialEq)]
pub struct AnticrossingMap<T> {
    pub temperatures: Vec<T>,
    pub axis: Vec<T>,
    pub rows: Vec<Vec<T>>,
    /// QD minus cavity detuning per row, GHz.
    pub detunings: Vec<T>,
}

impl<T: Real> AnticrossingMap<T> {
    /// Separation of the two strongest peaks per row; `None` for a single peak.
    pub fn mode_separations(&self) -> Vec<Option<T>> {
        self.rows
            .iter()
            .map(|row| doublet(&self.axis, row, lit(1e-3)).map(|(a, b)| b - a))
            .collect()
    }

    /// CSV with a leading temperature column and one column per frequency.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["temperature_k".to_string()];
        header.extend(self.axis.iter().map(|f| format_num(to_f64(*f))));
        wr.write_record(&header)?;
        for (t, row) in self.temperatures.iter().zip(&self.rows) {
            let mut rec = vec![format_num(to_f64(*t))];
            rec.extend(row.iter().map(|v| format_num(to_f64(*v))));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn anticrossing_map<T: Real>(
    p: &DeviceParams<T>,
    m: &TuningModel<T>,
    t_grid: &[T],
    omega_grid: &[T],
) -> Result<AnticrossingMap<T>> {
    if t_grid.is_empty() || omega_grid.len() < 3 {
        return Err(Error::InvalidParameter("temperature and frequency grids must be non-empty".into()));
    }
    let rows = t_grid
        .par_iter()
        .map(|t| {
            let pt = temperature_to_detunings(*t, m, p)?;
            let lr = linear_response_scan(&pt, omega_grid)?;
            Ok((lr.cavity_scatter.values, pt.qd_detuning()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (rows, detunings) = rows.into_iter().unzip();
    Ok(AnticrossingMap { temperatures: t_grid.to_vec(), axis: omega_grid.to_vec(), rows, detunings })
}
