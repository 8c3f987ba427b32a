use nalgebra::ComplexField;
use super::ode::{integrate, OdeStats, Stepper};
use super::{collapse_terms, static_hamiltonian, DensityMatrix, Liouvillian};
use crate::error::{Error, Result};
use crate::operators::{HilbertDims, Operator, SystemOperators};
use crate::params::{DeviceParams, DriveSpec};
use crate::scalar::{im, lit, re, CMatrix, Cplx, Real};

/// Options for [`evolve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions<T> {
    pub n_fock: usize,
    pub stepper: Stepper<T>,
}

impl<T: Real> EvolveOptions<T> {
    pub fn new(n_fock: usize) -> Self {
        Self { n_fock, stepper: Stepper::default_adaptive() }
    }

    pub fn with_stepper(mut self, stepper: Stepper<T>) -> Self {
        self.stepper = stepper;
        self
    }
}

/// One drive tone as seen in the integration frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveTerm<T> {
    pub spec: DriveSpec<T>,
    /// Peak amplitude ε_in, sqrt(photons/ns).
    pub peak_amplitude: T,
    /// Carrier offset from the frame frequency, GHz.
    pub offset_ghz: T,
}

impl<T: Real> DriveTerm<T> {
    /// Complex field E_k(t) in the frame, t in ns.
    pub fn field(&self, t_ns: T) -> Cplx<T> {
        let phase = -T::two_pi() * self.offset_ghz * t_ns;
        crate::scalar::polar(self.peak_amplitude * self.spec.amplitude_shape(t_ns), phase)
    }
}

/// Sampled solution of the master equation.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub t_ps: Vec<T>,
    pub states: Vec<DensityMatrix<T>>,
    /// Frame frequency relative to the cavity, GHz.
    pub frame_detuning: T,
    pub drives: Vec<DriveTerm<T>>,
    pub stats: OdeStats,
}

impl<T: Real> Trajectory<T> {
    pub fn expect(&self, op: &Operator<T>) -> Result<Vec<Cplx<T>>> {
        self.states.iter().map(|s| s.expect(op)).collect()
    }

    /// Total field E(t) = Σ E_k(t).
    pub fn total_field(&self, t_ns: T) -> Cplx<T> {
        self.drives.iter().fold(Cplx::new(T::zero(), T::zero()), |acc, d| acc + d.field(t_ns))
    }
}

/// Integrates the master equation over `t_grid_ps` starting from `rho0` at
/// the first grid time.
///
/// The frame rotates at the first drive's carrier (the cavity frequency when
/// there are no drives); every other tone carries `exp(-i 2π δ t)`.
pub fn evolve<T: Real>(
    rho0: &DensityMatrix<T>,
    p: &DeviceParams<T>,
    drives: &[DriveSpec<T>],
    t_grid_ps: &[T],
    opts: &EvolveOptions<T>,
) -> Result<Trajectory<T>> {
    p.validate()?;
    if t_grid_ps.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    if t_grid_ps.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::NonIncreasingGrid);
    }
    let dims = HilbertDims::new(opts.n_fock)?;
    if rho0.dims() != dims {
        return Err(Error::DimensionMismatch { expected: dims.dim(), found: rho0.dims().dim() });
    }
    let ops = SystemOperators::new(dims);
    let frame = drives.first().map(|d| d.cavity_detuning(p)).unwrap_or(T::zero());
    let terms = drives
        .iter()
        .map(|d| {
            d.validate()?;
            Ok(DriveTerm { spec: *d, peak_amplitude: d.peak_amplitude(p)?, offset_ghz: d.cavity_detuning(p) - frame })
        })
        .collect::<Result<Vec<_>>>()?;

    let l0 = Liouvillian::new(dims, static_hamiltonian(&ops, p, frame), collapse_terms(&ops, p));
    let coupling = ops.b.matrix() * re(p.angular().kappa_par.sqrt());
    let coupling_dag = coupling.adjoint();
    let minus_i = im(-T::one());

    let rhs = |t: T, rho: &CMatrix<T>| -> CMatrix<T> {
        let mut out = l0.apply(rho);
        let e = terms.iter().fold(Cplx::new(T::zero(), T::zero()), |acc, d| acc + d.field(t));
        if e.modulus() > T::zero() {
            let hd = &coupling_dag * e + &coupling * e.conj();
            out += (&hd * rho - rho * &hd) * minus_i;
        }
        out
    };

    let ns: Vec<T> = t_grid_ps.iter().map(|t| *t * lit(1e-3)).collect();
    let (ys, stats) = integrate(rhs, ns[0], rho0.matrix(), &ns, opts.stepper)?;
    let states = ys
        .into_iter()
        .map(|m| DensityMatrix::from_matrix(dims, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { t_ps: t_grid_ps.to_vec(), states, frame_detuning: frame, drives: terms, stats })
}

/// Photon bookkeeping along a trajectory (trapezoidal time integrals).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonBalance<T> {
    /// ∫ −2√κ‖ Im(E* ⟨b⟩) dt: photons the drive field delivers.
    pub absorbed: T,
    /// ∫ (κ⟨b†b⟩ + γ⟨σ₊σ₋⟩) dt.
    pub emitted: T,
    /// Excitation number at the end minus at the start.
    pub stored: T,
}

impl<T: Real> PhotonBalance<T> {
    /// |absorbed − emitted − stored| / absorbed.
    pub fn relative_mismatch(&self) -> T {
        ((self.absorbed - self.emitted - self.stored) / self.absorbed).abs()
    }
}

pub fn photon_balance<T: Real>(traj: &Trajectory<T>, p: &DeviceParams<T>) -> Result<PhotonBalance<T>> {
    let dims = traj.states.first().ok_or_else(|| Error::InvalidParameter("empty trajectory".into()))?.dims();
    let ops = SystemOperators::<T>::new(dims);
    let r = p.angular();
    let mut absorbed = T::zero();
    let mut emitted = T::zero();
    let mut prev: Option<(T, T, T)> = None;
    let sqrt_kp = r.kappa_par.sqrt();
    for (t_ps, s) in traj.t_ps.iter().zip(&traj.states) {
        let t = *t_ps * lit(1e-3);
        let b = s.expect(&ops.b)?;
        let work = -lit::<T>(2.0) * sqrt_kp * (traj.total_field(t).conj() * b).im;
        let loss = r.kappa * s.expect(&ops.n_cav)?.re + r.gamma * s.expect(&ops.n_qd)?.re;
        if let Some((t0, w0, l0)) = prev {
            let dt = t - t0;
            absorbed += (w0 + work) * dt * lit(0.5);
            emitted += (l0 + loss) * dt * lit(0.5);
        }
        prev = Some((t, work, loss));
    }
    let number = |s: &DensityMatrix<T>| -> Result<T> {
        Ok(s.expect(&ops.n_cav)?.re + s.expect(&ops.n_qd)?.re)
    };
    let stored = number(traj.states.last().expect("non-empty"))? - number(&traj.states[0])?;
    Ok(PhotonBalance { absorbed, emitted, stored })
}
