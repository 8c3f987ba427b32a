use nalgebra::ComplexField;
use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::operators::{expectation, HilbertDims, Operator};
use crate::scalar::{lit, re, CMatrix, Cplx, Real};

/// Joint cavity ⊗ QD density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    dims: HilbertDims,
    data: CMatrix<T>,
}

/// Deviations of a state from a physical density matrix.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StateDefects<T> {
    pub trace_error: T,
    pub hermiticity_error: T,
    pub min_eigenvalue: T,
}

impl<T: Real> StateDefects<T> {
    /// Trace within 1e-9, Hermitian within 1e-12, eigenvalues ≥ −1e-9.
    pub fn is_physical(&self) -> bool {
        self.within(lit(1e-9), lit(1e-12), lit(1e-9))
    }

    pub fn within(&self, trace_tol: T, herm_tol: T, neg_tol: T) -> bool {
        self.trace_error <= trace_tol
            && self.hermiticity_error <= herm_tol
            && self.min_eigenvalue >= -neg_tol
    }
}

impl<T: Real> DensityMatrix<T> {
    pub fn from_matrix(dims: HilbertDims, data: CMatrix<T>) -> Result<Self> {
        if data.nrows() != dims.dim() || data.ncols() != dims.dim() {
            return Err(Error::DimensionMismatch { expected: dims.dim(), found: data.nrows() });
        }
        Ok(Self { dims, data })
    }

    /// Pure basis state |n⟩⟨n| ⊗ |s⟩⟨s|.
    pub fn basis(dims: HilbertDims, n: usize, excited: bool) -> Self {
        let d = dims.dim();
        let mut data = CMatrix::zeros(d, d);
        let k = dims.index(n, excited);
        data[(k, k)] = re(T::one());
        Self { dims, data }
    }

    /// Vacuum cavity and ground-state QD.
    pub fn ground(dims: HilbertDims) -> Self {
        Self::basis(dims, 0, false)
    }

    pub fn maximally_mixed(dims: HilbertDims) -> Self {
        let d = dims.dim();
        let data = CMatrix::identity(d, d) * re(T::one() / lit(d as f64));
        Self { dims, data }
    }

    pub fn dims(&self) -> HilbertDims {
        self.dims
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.data
    }

    pub fn trace(&self) -> Cplx<T> {
        self.data.trace()
    }

    pub fn expect(&self, op: &Operator<T>) -> Result<Cplx<T>> {
        expectation(&self.data, op)
    }

    /// Projects onto the Hermitian part and rescales to unit trace.
    pub fn normalized(mut self) -> Self {
        let h = (&self.data + self.data.adjoint()) * re(lit::<T>(0.5));
        let tr = h.trace().re;
        self.data = h / re(tr);
        self
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        let h = (&self.data + self.data.adjoint()) * re(lit::<T>(0.5));
        SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
    }

    pub fn defects(&self) -> StateDefects<T> {
        let d = self.data.nrows();
        let mut herm = T::zero();
        for i in 0..d {
            for j in 0..d {
                herm = herm.max((self.data[(i, j)] - self.data[(j, i)].conj()).modulus());
            }
        }
        let min_eig = self.eigenvalues().into_iter().fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b));
        StateDefects {
            trace_error: (self.trace() - re(T::one())).modulus(),
            hermiticity_error: herm,
            min_eigenvalue: min_eig,
        }
    }

    /// ½ Σ |λ(ρ − σ)|.
    pub fn trace_distance(&self, other: &Self) -> T {
        let diff = &self.data - &other.data;
        let h = (&diff + diff.adjoint()) * re(lit::<T>(0.5));
        let ev = SymmetricEigen::new(h).eigenvalues;
        ev.iter().fold(T::zero(), |acc, v| acc + v.abs()) * lit(0.5)
    }
}
