//! Two-time correlations by the quantum regression theorem.
//!
//! For a stationary state ρ_ss and Liouvillian L,
//! `⟨b†(τ) b(0)⟩ = Tr(b† e^{Lτ}[b ρ_ss])`. The one-step propagator
//! e^{L dτ} is formed once and applied repeatedly.

use crate::error::{Error, Result};
use crate::linalg::expm;
use crate::lindblad::{build_liouvillian, steady_state, unvectorize, vectorize, DensityMatrix, Liouvillian};
use crate::operators::{trace_of_product, HilbertDims, Operator, SystemOperators};
use crate::params::{DeviceParams, DriveSpec};
use crate::scalar::{lit, re, to_f64, CMatrix, Cplx, Real};

/// Sampled F(τ) on a uniform delay grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTrace<T> {
    /// Delays, ns.
    pub tau_ns: Vec<T>,
    pub values: Vec<Cplx<T>>,
    /// Frequency of the rotating frame relative to the cavity, GHz.
    pub frame_detuning: T,
}

/// Delay grid and truncation for the regression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationOptions<T> {
    pub tau_max_ns: T,
    pub n_tau: usize,
    pub n_fock: usize,
}

impl<T: Real> CorrelationOptions<T> {
    /// τ_max = 15 / min(κ, γ) (angular, ignoring zero rates) and a step
    /// whose Nyquist frequency covers every resonance in the drive frame
    /// plus five cavity linewidths.
    pub fn auto(p: &DeviceParams<T>, drive_detuning: T, n_fock: usize) -> Self {
        let r = p.angular();
        let slowest = [r.kappa, r.gamma + lit::<T>(2.0) * r.gamma_d]
            .into_iter()
            .filter(|v| *v > T::zero())
            .fold(T::max_value().unwrap_or(lit(1e30)), |a, b| a.min(b));
        let tau_max = lit::<T>(15.0) / slowest;
        let span = drive_detuning.abs().max((p.qd_detuning() - drive_detuning).abs())
            + lit::<T>(2.0) * p.g
            + lit::<T>(5.0) * p.kappa;
        let dt = T::one() / (lit::<T>(2.0) * span);
        let n_tau = to_f64(tau_max / dt).ceil() as usize + 1;
        Self { tau_max_ns: tau_max, n_tau: n_tau.max(16), n_fock }
    }

    pub fn step(&self) -> T {
        self.tau_max_ns / lit((self.n_tau - 1) as f64)
    }
}

/// The map `X ↦ e^{L dt} X`, stored as the exponential of the superoperator.
#[derive(Debug, Clone)]
pub struct Propagator<T: Real> {
    d: usize,
    matrix: CMatrix<T>,
}

impl<T: Real> Propagator<T> {
    pub fn new(l: &Liouvillian<T>, dt: T) -> Self {
        let sup = l.superoperator() * re(dt);
        Self { d: l.dims().dim(), matrix: expm(&sup) }
    }

    pub fn apply(&self, x: &CMatrix<T>) -> CMatrix<T> {
        unvectorize(&(&self.matrix * vectorize(x)), self.d)
    }
}

/// `Tr(obs · e^{Lτ}[source])` on the uniform grid `k·dτ`, k < n_tau.
pub fn regression_trace<T: Real>(
    l: &Liouvillian<T>,
    source: &CMatrix<T>,
    observable: &Operator<T>,
    tau_max_ns: T,
    n_tau: usize,
) -> Result<Vec<Cplx<T>>> {
    if n_tau < 2 {
        return Err(Error::InvalidParameter("need at least two delay samples".into()));
    }
    let d = l.dims().dim();
    if source.nrows() != d || observable.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: source.nrows() });
    }
    let dt = tau_max_ns / lit((n_tau - 1) as f64);
    let step = Propagator::new(l, dt);
    // Tr(O X) = vec(Oᵀ) · vec(X)
    let obs = vectorize(&observable.matrix().transpose());
    let mut x = vectorize(source);
    let mut out = Vec::with_capacity(n_tau);
    out.push(obs.dot(&x));
    for _ in 1..n_tau {
        x = &step.matrix * x;
        out.push(obs.dot(&x));
    }
    Ok(out)
}

/// Whether the coherent part ⟨b†⟩⟨b⟩ is removed from the correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationKind {
    /// F(τ) = ⟨b†(τ) b⟩, so F(0) = ⟨b†b⟩.
    Full,
    /// F(τ) = ⟨b†(τ) b⟩ − ⟨b†⟩⟨b⟩, the fluctuation (incoherent) part.
    Covariance,
}

/// Steady state, Liouvillian and operators for a CW drive.
pub struct StationaryProblem<T: Real> {
    pub ops: SystemOperators<T>,
    pub liouvillian: Liouvillian<T>,
    pub rho: DensityMatrix<T>,
    pub frame_detuning: T,
}

impl<T: Real> StationaryProblem<T> {
    pub fn new(p: &DeviceParams<T>, drive: &DriveSpec<T>, n_fock: usize) -> Result<Self> {
        let ops = SystemOperators::new(HilbertDims::new(n_fock)?);
        let liouvillian = build_liouvillian(&ops, p, drive)?;
        let (rho, _) = steady_state(&liouvillian)?;
        Ok(Self { ops, liouvillian, rho, frame_detuning: drive.cavity_detuning(p) })
    }

    /// Cavity correlation on the grid of `opts`.
    pub fn cavity_correlation(&self, kind: CorrelationKind, opts: &CorrelationOptions<T>) -> Result<CorrelationTrace<T>> {
        let rho = self.rho.matrix();
        let mean_b = trace_of_product(self.ops.b.matrix(), rho);
        let mut source = self.ops.b.matrix() * rho;
        if kind == CorrelationKind::Covariance {
            // (b − ⟨b⟩)ρ has zero trace, so its image never relaxes onto ρ_ss
            source -= rho * mean_b;
        }
        let values = regression_trace(&self.liouvillian, &source, &self.ops.b.dagger(), opts.tau_max_ns, opts.n_tau)?;
        let dt = opts.step();
        Ok(CorrelationTrace {
            tau_ns: (0..opts.n_tau).map(|k| dt * lit(k as f64)).collect(),
            values,
            frame_detuning: self.frame_detuning,
        })
    }
}

/// F(τ) = Tr(b† e^{Lτ}[b ρ_ss]) for the steady state under `drive`.
pub fn two_time_correlation<T: Real>(
    p: &DeviceParams<T>,
    drive: &DriveSpec<T>,
    opts: &CorrelationOptions<T>,
) -> Result<CorrelationTrace<T>> {
    StationaryProblem::new(p, drive, opts.n_fock)?.cavity_correlation(CorrelationKind::Full, opts)
}

/// Covariance ⟨b†(τ) b⟩ − ⟨b†⟩⟨b⟩ for the steady state under `drive`.
pub fn two_time_covariance<T: Real>(
    p: &DeviceParams<T>,
    drive: &DriveSpec<T>,
    opts: &CorrelationOptions<T>,
) -> Result<CorrelationTrace<T>> {
    StationaryProblem::new(p, drive, opts.n_fock)?.cavity_correlation(CorrelationKind::Covariance, opts)
}

/// Cavity emission correlation `Tr(b† e^{Lτ}[b ρ₀])` of an arbitrary
/// (non-stationary) initial state under the undriven Liouvillian, e.g.
/// the ring-down of a cavity photon.
pub fn emission_correlation<T: Real>(
    p: &DeviceParams<T>,
    rho0: &DensityMatrix<T>,
    tau_max_ns: T,
    n_tau: usize,
) -> Result<CorrelationTrace<T>> {
    let ops = SystemOperators::new(rho0.dims());
    let l = crate::lindblad::liouvillian_for_amplitude(&ops, p, T::zero(), T::zero());
    let source = ops.b.matrix() * rho0.matrix();
    let values = regression_trace(&l, &source, &ops.b.dagger(), tau_max_ns, n_tau)?;
    let dt = tau_max_ns / lit((n_tau - 1) as f64);
    Ok(CorrelationTrace {
        tau_ns: (0..n_tau).map(|k| dt * lit(k as f64)).collect(),
        values,
        frame_detuning: T::zero(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Carrier;
    use nalgebra::ComplexField;
    use approx::assert_relative_eq;

    #[test]
    fn propagate_matches_time_stepping() {
        let p = DeviceParams::<f64>::reference_device().with_qd_detuning(-10.0);
        let ops = SystemOperators::<f64>::new(HilbertDims::new(4).unwrap());
        let l = crate::lindblad::liouvillian_for_amplitude(&ops, &p, 2.0, 3.0);
        let x0 = ops.basis_projector(1, false);
        let via_expm = Propagator::new(&l, 0.05).apply(&x0);
        let (ys, _) = crate::lindblad::ode::integrate(
            |_, y| l.apply(y),
            0.0,
            &x0,
            &[0.05],
            crate::lindblad::Stepper::adaptive(1e-13, 1e-13),
        )
        .unwrap();
        assert!((via_expm - &ys[0]).iter().all(|z| z.modulus() < 1e-10));
    }

    #[test]
    fn undriven_correlation_vanishes() {
        let p = DeviceParams::<f64>::reference_device();
        let drive = DriveSpec::cw_amplitude(Carrier::CavityDetuning(0.0), 0.0, &p);
        let opts = CorrelationOptions { tau_max_ns: 0.2, n_tau: 50, n_fock: 4 };
        let f = two_time_correlation(&p, &drive, &opts).unwrap();
        assert!(f.values.iter().all(|z| z.modulus() < 1e-14));
    }

    #[test]
    fn zero_delay_equals_photon_number() {
        let p = DeviceParams::<f64>::reference_device().with_qd_detuning(-20.0);
        let drive = DriveSpec::cw_amplitude(Carrier::CavityDetuning(0.0), 3.0, &p);
        let opts = CorrelationOptions { tau_max_ns: 0.1, n_tau: 20, n_fock: 8 };
        let prob = StationaryProblem::new(&p, &drive, 8).unwrap();
        let f = prob.cavity_correlation(CorrelationKind::Full, &opts).unwrap();
        let n = prob.rho.expect(&prob.ops.n_cav).unwrap().re;
        assert!((f.values[0] - Cplx::new(n, 0.0)).modulus() < 1e-10);
        let cov = prob.cavity_correlation(CorrelationKind::Covariance, &opts).unwrap();
        let b = prob.rho.expect(&prob.ops.b).unwrap();
        assert!((cov.values[0] - Cplx::new(n - b.modulus_squared(), 0.0)).modulus() < 1e-12);
        for (v, v0) in f.values.iter().zip(std::iter::repeat(f.values[0])) {
            assert!(v.modulus() <= v0.modulus() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn cavity_ring_down_decays_at_half_kappa() {
        let mut p = DeviceParams::<f64>::reference_device();
        p.g = 0.0;
        let rho0 = DensityMatrix::basis(HilbertDims::new(3).unwrap(), 1, false);
        let f = emission_correlation(&p, &rho0, 0.05, 51).unwrap();
        let rate = p.angular().kappa / 2.0;
        for (t, v) in f.tau_ns.iter().zip(&f.values) {
            assert_relative_eq!(v.re, (-rate * t).exp(), max_relative = 1e-9);
        }
        // log-slope fit of |F|
        let n = f.values.len() as f64;
        let (sx, sy, sxx, sxy) = f.tau_ns.iter().zip(&f.values).fold((0.0, 0.0, 0.0, 0.0), |acc, (t, v)| {
            let y = v.modulus().ln();
            (acc.0 + t, acc.1 + y, acc.2 + t * t, acc.3 + t * y)
        });
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert_relative_eq!(-slope, 2.0 * std::f64::consts::PI * 14.0, max_relative = 1e-2);
    }

    #[test]
    fn auto_options_cover_the_spectrum() {
        let p = DeviceParams::<f64>::reference_device().with_qd_detuning(-55.0);
        let o = CorrelationOptions::auto(&p, 0.0, 10);
        assert_relative_eq!(o.tau_max_ns, 15.0 / (2.0 * std::f64::consts::PI * 5.8), max_relative = 1e-12);
        assert!(1.0 / (2.0 * o.step()) >= 55.0 + 2.0 * 13.4 + 5.0 * 28.0 - 1e-9);
    }
}
