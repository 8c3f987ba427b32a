use nalgebra::ComplexField;
use nalgebra::DVector;

use super::{build_liouvillian, vectorize, unvectorize, DensityMatrix, Liouvillian};
use crate::error::{Error, Result};
use crate::operators::{HilbertDims, SystemOperators};
use crate::params::{DeviceParams, DriveSpec};
use crate::scalar::{lit, re, to_f64, Real};

/// Diagnostics from [`steady_state`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateReport<T> {
    /// max |L·vec(ρ)| after normalisation.
    pub residual: T,
    /// Smallest over largest LU pivot modulus of the bordered system.
    pub pivot_ratio: T,
}

/// Null vector of `l` normalised to unit trace.
///
/// One row of the superoperator (the equation for ρ₀₀, which is implied by
/// trace preservation) is replaced by the trace constraint and the bordered
/// system is solved by LU. A second null direction leaves the bordered
/// matrix singular and is reported as [`Error::DegenerateNullSpace`].
pub fn steady_state<T: Real>(l: &Liouvillian<T>) -> Result<(DensityMatrix<T>, SteadyStateReport<T>)> {
    let d = l.dims().dim();
    let sup = l.superoperator();
    let scale = sup.iter().fold(T::zero(), |a, z| a.max(z.modulus())).max(T::one());
    let mut bordered = sup.clone();
    for k in 0..d * d {
        bordered[(0, k)] = re(T::zero());
    }
    for k in 0..d {
        bordered[(0, k + k * d)] = re(T::one());
    }
    let mut rhs = DVector::zeros(d * d);
    rhs[0] = re(T::one());

    let lu = bordered.lu();
    let u_diag = lu.u().diagonal();
    let (min_piv, max_piv) = u_diag
        .iter()
        .fold((T::max_value().unwrap_or(T::one()), T::zero()), |(lo, hi), z| (lo.min(z.modulus()), hi.max(z.modulus())));
    let pivot_ratio = min_piv / max_piv;
    if !(pivot_ratio > lit(1e-13)) {
        return Err(Error::DegenerateNullSpace);
    }
    let x = lu.solve(&rhs).ok_or(Error::DegenerateNullSpace)?;
    let rho = DensityMatrix::from_matrix(l.dims(), unvectorize(&x, d))?.normalized();
    let resid_vec = &sup * vectorize(rho.matrix());
    let residual = resid_vec.iter().fold(T::zero(), |a, z| a.max(z.modulus()));
    if !(residual <= lit::<T>(1e-9) * scale) {
        return Err(Error::SteadyState(format!(
            "residual {:.3e} too large relative to generator scale {:.3e}",
            to_f64(residual),
            to_f64(scale)
        )));
    }
    Ok((rho, SteadyStateReport { residual, pivot_ratio }))
}

/// Relative change of the steady-state ⟨b†b⟩ when the cavity truncation
/// grows from `n_fock` to `n_fock + 4`. Errors when the change exceeds 0.1%.
pub fn fock_convergence<T: Real>(p: &DeviceParams<T>, drive: &DriveSpec<T>, n_fock: usize) -> Result<T> {
    let photons = |n: usize| -> Result<T> {
        let ops = SystemOperators::new(HilbertDims::new(n)?);
        let l = build_liouvillian(&ops, p, drive)?;
        let (rho, _) = steady_state(&l)?;
        Ok(rho.expect(&ops.n_cav)?.re)
    };
    let small = photons(n_fock)?;
    let large = photons(n_fock + 4)?;
    let rel = if large.abs() > T::zero() { ((small - large) / large).abs() } else { small.abs() };
    if rel > lit(1e-3) {
        return Err(Error::TruncationNotConverged {
            n_fock,
            n_fock_next: n_fock + 4,
            relative_change: to_f64(rel),
        });
    }
    Ok(rel)
}
