//! Least-squares parameter extraction: line shapes, the switching curve,
//! the coupling strength from a vacuum-Rabi doublet and the grating
//! efficiency from Stark-shift data.

mod eta;
mod lm;

use std::io::{Read, Write};

use serde::Serialize;

pub use eta::{estimate_eta, EtaOptions};
pub use lm::{levenberg_marquardt, LmOptions, LmOutcome};

use crate::error::{Error, Result};
use crate::params::DeviceParams;
use crate::spectra::peaks::{fwhm_around, global_peak, local_maxima};
use crate::spectra::{scatter_fraction, Reference, Spectrum};
use crate::scalar::{lit, to_f64, Real};
use crate::switching::{switching_curve_model, switching_energy_from_e0};

/// One fitted parameter and its variance from the linearised covariance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitParam<T> {
    pub name: String,
    pub value: T,
    pub variance: T,
}

/// A quantity computed from the fitted parameters, with an optional
/// two-sided 90% confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Derived<T> {
    pub name: String,
    pub value: T,
    pub ci90: Option<(T, T)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult<T> {
    pub model: String,
    pub params: Vec<FitParam<T>>,
    pub derived: Vec<Derived<T>>,
    pub residual_norm: T,
    pub gradient_norm: T,
    pub converged: bool,
    pub iterations: usize,
}

impl<T: Real> FitResult<T> {
    pub(crate) fn from_outcome(model: &str, names: &[&str], out: &LmOutcome<T>) -> Self {
        let var = out.variances();
        Self {
            model: model.into(),
            params: names
                .iter()
                .zip(out.params.iter().zip(var))
                .map(|(n, (v, s))| FitParam { name: (*n).into(), value: *v, variance: s })
                .collect(),
            derived: Vec::new(),
            residual_norm: out.residual_norm,
            gradient_norm: out.gradient_norm,
            converged: out.converged,
            iterations: out.iterations,
        }
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.params
            .iter()
            .find(|p| p.name == name)
            .map(|p| p.value)
            .or_else(|| self.derived.iter().find(|d| d.name == name).map(|d| d.value))
    }

    pub fn variance(&self, name: &str) -> Option<T> {
        self.params.iter().find(|p| p.name == name).map(|p| p.variance)
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

/// `a / (1 + (2(x − c)/w)²) + o`.
pub fn lorentzian<T: Real>(x: T, center: T, fwhm: T, amplitude: T, offset: T) -> T {
    let u = lit::<T>(2.0) * (x - center) / fwhm;
    amplitude / (T::one() + u * u) + offset
}

/// `a·exp(−4 ln2 (x − c)²/w²) + o`.
pub fn gaussian<T: Real>(x: T, center: T, fwhm: T, amplitude: T, offset: T) -> T {
    let u = (x - center) / fwhm;
    amplitude * (-lit::<T>(4.0) * T::ln_2() * u * u).exp() + offset
}

fn check_xy<T: Real>(x: &[T], y: &[T], min_points: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    if x.len() < min_points {
        return Err(Error::InvalidParameter(format!("need at least {min_points} points, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("data must be finite".into()));
    }
    Ok(())
}

fn fit_peak<T: Real>(
    model_name: &str,
    shape: fn(T, T, T, T, T) -> T,
    x: &[T],
    y: &[T],
) -> Result<FitResult<T>> {
    check_xy(x, y, 5)?;
    let lo = y.iter().fold(y[0], |a, b| a.min(*b));
    let hi = y.iter().fold(y[0], |a, b| a.max(*b));
    if !(hi - lo > lit::<T>(1e-12) * hi.abs().max(lo.abs()).max(lit(1e-300))) {
        return Err(Error::DegenerateData("data are constant".into()));
    }
    let shifted: Vec<T> = y.iter().map(|v| *v - lo).collect();
    let i = global_peak(&shifted).expect("non-empty");
    let span = x.iter().fold(T::zero(), |a, b| a.max((*b - x[0]).abs()));
    let width = fwhm_around(x, &shifted, i).unwrap_or(span / lit(4.0));
    let p0 = [x[i], width, hi - lo, lo];
    let scale = hi - lo;
    let resid = |p: &[T]| -> Result<Vec<T>> {
        if !(p[1].abs() > T::zero()) {
            return Err(Error::InvalidParameter("zero width".into()));
        }
        Ok(x.iter().zip(y).map(|(xi, yi)| (shape(*xi, p[0], p[1].abs(), p[2], p[3]) - *yi) / scale).collect())
    };
    let mut out = levenberg_marquardt(resid, &p0, &LmOptions::default())?;
    out.params[1] = out.params[1].abs();
    // residuals were scaled by 1/scale; restore data units
    out.residual_norm *= scale;
    out.gradient_norm *= scale;
    out.jacobian *= scale;
    Ok(FitResult::from_outcome(model_name, &["center", "fwhm", "amplitude", "offset"], &out))
}

/// Lorentzian line with constant offset.
pub fn fit_lorentzian<T: Real>(x: &[T], y: &[T]) -> Result<FitResult<T>> {
    fit_peak("lorentzian", lorentzian, x, y)
}

/// Gaussian line with constant offset.
pub fn fit_gaussian<T: Real>(x: &[T], y: &[T]) -> Result<FitResult<T>> {
    fit_peak("gaussian", gaussian, x, y)
}

/// Two-sided 90% Student-t quantile for `dof` degrees of freedom.
pub fn t_quantile_90(dof: usize) -> f64 {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    StudentsT::new(0.0, 1.0, dof.max(1) as f64).expect("positive dof").inverse_cdf(0.95)
}

/// Fits ρ(E) = 1/(1+E/E₀)² and reports E_switch = (√10−1)E₀ with its 90%
/// confidence interval.
pub fn fit_switching_curve<T: Real>(e: &[T], rho: &[T]) -> Result<FitResult<T>> {
    check_xy(e, rho, 4)?;
    let positive: Vec<T> = e.iter().copied().filter(|v| *v > T::zero()).collect();
    let e_min = positive.iter().fold(T::max_value().unwrap_or(lit(f64::MAX)), |a, b| a.min(*b));
    let e_max = positive.iter().fold(T::zero(), |a, b| a.max(*b));
    if positive.len() < 2 || e_max < lit::<T>(10.0) * e_min {
        return Err(Error::InvalidParameter("switching data must span at least a factor of 10 in energy".into()));
    }
    // seed at the quarter-contrast crossing
    let mut order: Vec<usize> = (0..e.len()).collect();
    order.sort_by(|a, b| e[*a].partial_cmp(&e[*b]).expect("finite"));
    let quarter = lit::<T>(0.25);
    let seed = order
        .windows(2)
        .find(|w| rho[w[0]] >= quarter && rho[w[1]] < quarter)
        .map(|w| {
            let (e0, e1, r0, r1) = (e[w[0]], e[w[1]], rho[w[0]], rho[w[1]]);
            e0 + (quarter - r0) * (e1 - e0) / (r1 - r0)
        })
        .filter(|v| *v > T::zero())
        .unwrap_or_else(|| (e_min * e_max).sqrt());
    let resid = |p: &[T]| -> Result<Vec<T>> {
        if !(p[0] > T::zero()) {
            return Err(Error::InvalidParameter("E0 must be positive".into()));
        }
        let model = switching_curve_model(e, p[0])?.rho;
        Ok(model.iter().zip(rho).map(|(m, r)| *m - *r).collect())
    };
    let out = levenberg_marquardt(resid, &[seed], &LmOptions::default())?;
    let mut fit = FitResult::from_outcome("switching_curve", &["e0"], &out);
    let e0 = out.params[0];
    let factor = switching_energy_from_e0(T::one());
    let half_width = lit::<T>(t_quantile_90(e.len() - 1)) * fit.params[0].variance.sqrt() * factor;
    let e_switch = switching_energy_from_e0(e0);
    fit.derived.push(Derived { name: "e_switch".into(), value: e_switch, ci90: Some((e_switch - half_width, e_switch + half_width)) });
    Ok(fit)
}

/// Coupling strength whose dressed-mode splitting at zero detuning is
/// `splitting`: g = √((s/2)² + ((κ − γ − 2γ_d)/4)²), all in GHz.
pub fn g_from_splitting<T: Real>(splitting: T, kappa: T, gamma: T, gamma_d: T) -> T {
    let half = splitting / lit(2.0);
    let loss = (kappa - gamma - lit::<T>(2.0) * gamma_d) / lit(4.0);
    (half * half + loss * loss).sqrt()
}

/// The strongest maximum paired with the strongest other maximum across a
/// valley at least 10% below the weaker of the two. Noise ripples on one
/// peak never form such a valley, so they are skipped.
fn resolved_doublet<T: Real>(x: &[T], y: &[T]) -> Option<(T, T)> {
    let mut peaks = local_maxima(y, lit(0.05));
    peaks.sort_by(|a, b| y[*b].partial_cmp(&y[*a]).expect("finite"));
    let top = *peaks.first()?;
    peaks[1..].iter().find_map(|&other| {
        let (a, b) = if top < other { (top, other) } else { (other, top) };
        let valley = y[a..=b].iter().fold(y[a], |m, v| m.min(*v));
        (valley <= lit::<T>(0.9) * y[a].min(y[b])).then(|| (x[a], x[b]))
    })
}

/// Fits g (and a scale factor) so that the weak-drive cavity scatter of
/// `p_partial` with that g reproduces `spectrum`. All other device
/// parameters stay fixed.
pub fn fit_vacuum_rabi<T: Real>(spectrum: &Spectrum<T>, p_partial: &DeviceParams<T>) -> Result<FitResult<T>> {
    let x: Vec<T> = match spectrum.reference {
        Reference::Cavity => spectrum.axis.clone(),
        Reference::Qd => spectrum.axis.iter().map(|f| *f + p_partial.qd_detuning()).collect(),
        Reference::Drive => {
            return Err(Error::InvalidParameter("vacuum-Rabi fit needs a cavity- or QD-referenced axis".into()))
        }
    };
    let y = &spectrum.values;
    check_xy(&x, y, 5)?;
    let (lo, hi) = resolved_doublet(&x, y).ok_or_else(|| Error::UnresolvedDoublet("fewer than two separated maxima".into()))?;
    let g0 = g_from_splitting(hi - lo, p_partial.kappa, p_partial.gamma, p_partial.gamma_d);
    let model = |g: T| -> Vec<T> {
        let mut q = *p_partial;
        q.g = g;
        x.iter().map(|w| scatter_fraction(&q, *w)).collect()
    };
    let m0 = model(g0);
    let num = m0.iter().zip(y).fold(T::zero(), |s, (m, v)| s + *m * *v);
    let den = m0.iter().fold(T::zero(), |s, m| s + *m * *m);
    let a0 = num / den;
    let scale = y.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let resid = |p: &[T]| -> Result<Vec<T>> {
        Ok(model(p[0]).iter().zip(y).map(|(m, v)| (p[1] * *m - *v) / scale).collect())
    };
    let mut out = levenberg_marquardt(resid, &[g0, a0], &LmOptions::default())?;
    out.params[0] = out.params[0].abs();
    out.residual_norm *= scale;
    out.gradient_norm *= scale;
    out.jacobian *= scale;
    Ok(FitResult::from_outcome("vacuum_rabi", &["g", "amplitude"], &out))
}

/// Two numeric columns with a header row.
pub fn read_xy_csv<R: Read>(r: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 {
        return Err(Error::InvalidParameter("data file needs two columns".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidParameter(format!("row {}: column {} is not a finite number", line + 2, k + 1)))
        };
        xs.push(parse(0)?);
        ys.push(parse(1)?);
    }
    Ok((xs, ys))
}

/// Converts a fitted value to f64 for reporting.
pub fn value_f64<T: Real>(fit: &FitResult<T>, name: &str) -> Option<f64> {
    fit.get(name).map(to_f64)
}
