use std::io::Write;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::correlation::CorrelationTrace;
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Cplx, Real};

/// What the zero of a spectrum's frequency axis refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    Cavity,
    Qd,
    Drive,
}

/// Real spectrum sampled on a strictly increasing frequency axis (GHz).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub axis: Vec<T>,
    pub values: Vec<T>,
    pub reference: Reference,
}

impl<T: Real> Spectrum<T> {
    pub fn new(axis: Vec<T>, values: Vec<T>, reference: Reference) -> Result<Self> {
        if axis.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: axis.len(), found: values.len() });
        }
        if axis.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::NonIncreasingGrid);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("spectrum values must be finite".into()));
        }
        Ok(Self { axis, values, reference })
    }

    /// Moves the axis origin: every frequency becomes `f - origin`.
    pub fn rebased(mut self, origin: T, reference: Reference) -> Self {
        for f in &mut self.axis {
            *f -= origin;
        }
        self.reference = reference;
        self
    }

    /// Trapezoidal integral over the axis.
    pub fn area(&self) -> T {
        self.axis
            .windows(2)
            .zip(self.values.windows(2))
            .fold(T::zero(), |acc, (f, v)| acc + (f[1] - f[0]) * (v[0] + v[1]) * lit(0.5))
    }

    /// Restriction to `lo ≤ f ≤ hi`.
    pub fn window(&self, lo: T, hi: T) -> Self {
        let (axis, values) = self
            .axis
            .iter()
            .zip(&self.values)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(f, v)| (*f, *v))
            .unzip();
        Self { axis, values, reference: self.reference }
    }

    /// CSV with header `frequency_ghz,value`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["frequency_ghz", "value"])?;
        for (f, v) in self.axis.iter().zip(&self.values) {
            wr.write_record([format_num(to_f64(*f)), format_num(to_f64(*v))])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Shortest round-trip decimal representation, stable across runs.
pub fn format_num(x: f64) -> String {
    let s = format!("{x:e}");
    if (1e-4..1e6).contains(&x.abs()) || x == 0.0 {
        format!("{x}")
    } else {
        s
    }
}

/// S(f) = ∫ F(τ) e^{−i2πfτ} dτ over the Hermitian extension F(−τ) = F(τ)*.
///
/// The one-sided trace is zero-padded to four times its length; the
/// trapezoid weights make the discrete area Σ S Δf equal F(0) exactly.
/// Small negative values from truncation are clipped to zero. The axis is
/// relative to the correlation's rotating frame.
pub fn power_spectrum<T: Real>(f: &CorrelationTrace<T>) -> Result<Spectrum<T>> {
    let n = f.values.len();
    if n < 2 || f.tau_ns.len() != n {
        return Err(Error::InvalidParameter("correlation trace needs at least two samples".into()));
    }
    let dt = f.tau_ns[1] - f.tau_ns[0];
    if !(dt > T::zero()) {
        return Err(Error::NonIncreasingGrid);
    }
    let tol = dt * lit(1e-9) * lit(n as f64);
    for (k, t) in f.tau_ns.iter().enumerate() {
        if (*t - f.tau_ns[0] - dt * lit(k as f64)).abs() > tol {
            return Err(Error::NonUniformGrid);
        }
    }
    let m = 4 * n;
    let mut buf: Vec<Cplx<T>> = vec![Cplx::new(T::zero(), T::zero()); m];
    buf[..n].copy_from_slice(&f.values);
    buf[0] *= lit::<T>(0.5);
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);

    let df = T::one() / (lit::<T>(m as f64) * dt);
    let half = m / 2;
    let mut axis = Vec::with_capacity(m);
    let mut values = Vec::with_capacity(m);
    // FFT bin j holds frequency j·df for j < m/2 and (j − m)·df above
    for j in (half..m).chain(0..half) {
        let k = j as f64 - if j >= half { m as f64 } else { 0.0 };
        axis.push(df * lit(k));
        values.push((lit::<T>(2.0) * dt * buf[j].re).max(T::zero()));
    }
    Spectrum::new(axis, values, Reference::Drive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::peaks::{fwhm_around, global_peak};
    use approx::assert_relative_eq;

    fn exponential_trace(rate: f64, center_ghz: f64, tau_max: f64, n: usize) -> CorrelationTrace<f64> {
        let dt = tau_max / (n - 1) as f64;
        let tau: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let values = tau
            .iter()
            .map(|t| Cplx::from_polar((-rate * t).exp(), 2.0 * std::f64::consts::PI * center_ghz * t))
            .collect();
        CorrelationTrace { tau_ns: tau, values, frame_detuning: 0.0 }
    }

    #[test]
    fn exponential_gives_lorentzian() {
        let kappa = 2.0 * std::f64::consts::PI * 28.0;
        let f = exponential_trace(kappa / 2.0, 0.0, 15.0 / kappa, 801);
        let s = power_spectrum(&f).unwrap();
        let i = global_peak(&s.values).unwrap();
        assert!(s.axis[i].abs() < 0.02 * 28.0);
        assert_relative_eq!(fwhm_around(&s.axis, &s.values, i).unwrap(), 28.0, max_relative = 0.02);
        assert_relative_eq!(s.values[i], 2.0 / (kappa / 2.0) * (1.0 - (-7.5f64).exp()), max_relative = 1e-2);
    }

    #[test]
    fn area_equals_zero_delay_value() {
        let f = exponential_trace(40.0, 7.0, 0.3, 300);
        let s = power_spectrum(&f).unwrap();
        let df = s.axis[1] - s.axis[0];
        let sum: f64 = s.values.iter().sum::<f64>() * df;
        assert_relative_eq!(sum, 1.0, max_relative = 1e-6);
        assert_relative_eq!(s.area(), 1.0, max_relative = 1e-2);
    }

    #[test]
    fn oscillation_sets_peak_position() {
        let f = exponential_trace(20.0, -12.0, 1.0, 1000);
        let s = power_spectrum(&f).unwrap();
        let i = global_peak(&s.values).unwrap();
        assert!((s.axis[i] + 12.0).abs() < 0.3);
    }

    #[test]
    fn zero_trace_gives_zero_spectrum() {
        let f = CorrelationTrace { tau_ns: vec![0.0, 0.1, 0.2], values: vec![Cplx::new(0.0, 0.0); 3], frame_detuning: 0.0 };
        let s = power_spectrum(&f).unwrap();
        assert!(s.values.iter().all(|v| *v == 0.0));
        assert_eq!(s.axis.len(), 12);
    }

    #[test]
    fn non_uniform_grid_rejected() {
        let mut f = exponential_trace(10.0, 0.0, 1.0, 10);
        f.tau_ns[5] += 0.01;
        assert!(matches!(power_spectrum(&f), Err(Error::NonUniformGrid)));
    }

    #[test]
    fn csv_has_header() {
        let s = Spectrum::new(vec![-1.0, 0.0, 1.5], vec![0.0, 2.0, 0.25], Reference::Cavity).unwrap();
        let mut out = Vec::new();
        s.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "frequency_ghz,value\n-1,0\n0,2\n1.5,0.25\n");
    }

    #[test]
    fn decreasing_axis_rejected() {
        assert!(matches!(
            Spectrum::new(vec![1.0, 0.0], vec![0.0, 0.0], Reference::Qd),
            Err(Error::NonIncreasingGrid)
        ));
    }
}
