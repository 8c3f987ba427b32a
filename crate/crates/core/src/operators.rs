//! Dense operator algebra on the truncated cavity ⊗ QD space.
//!
//! Factor order is fixed as cavity ⊗ qd: the joint basis index of
//! `|n⟩ ⊗ |s⟩` is `2 n + s` with `s = 0` ground and `s = 1` excited.

use nalgebra::ComplexField;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{lit, re, CMatrix, Cplx, Real};

/// Cavity truncation. The QD is always a two-level system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertDims {
    n_fock: usize,
}

impl HilbertDims {
    pub const QD_LEVELS: usize = 2;

    pub fn new(n_fock: usize) -> Result<Self> {
        if n_fock < 2 {
            return Err(Error::InvalidParameter(format!(
                "cavity truncation needs at least 2 Fock levels, got {n_fock}"
            )));
        }
        Ok(Self { n_fock })
    }

    pub fn n_fock(&self) -> usize {
        self.n_fock
    }

    pub fn dim(&self) -> usize {
        Self::QD_LEVELS * self.n_fock
    }

    /// Joint basis index of `|n⟩ ⊗ |s⟩`.
    pub fn index(&self, n: usize, excited: bool) -> usize {
        Self::QD_LEVELS * n + usize::from(excited)
    }
}

/// Tensor factor an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Cavity,
    Qd,
}

/// Square dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator<T: Real>(pub CMatrix<T>);

impl<T: Real> Operator<T> {
    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn from_matrix(m: CMatrix<T>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.0
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self(&self.0 * &rhs.0)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self(&self.0 + &rhs.0)
    }

    pub fn scale(&self, s: Cplx<T>) -> Self {
        Self(&self.0 * s)
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        Self(&self.0 * &rhs.0 - &rhs.0 * &self.0)
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| (self.0[(i, j)] - self.0[(j, i)].conj()).modulus() <= tol))
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        Self(self.0.kronecker(&rhs.0))
    }
}

/// Truncated bosonic annihilation operator: a[m, m+1] = sqrt(m+1).
pub fn fock_annihilation<T: Real>(n_fock: usize) -> Result<Operator<T>> {
    HilbertDims::new(n_fock)?;
    let mut a = CMatrix::zeros(n_fock, n_fock);
    for m in 0..n_fock - 1 {
        a[(m, m + 1)] = re(lit::<T>((m + 1) as f64).sqrt());
    }
    Ok(Operator(a))
}

/// Two-level lowering operator |g⟩⟨e| in the (g, e) basis.
pub fn sigma_minus<T: Real>() -> Operator<T> {
    let mut s = CMatrix::zeros(2, 2);
    s[(0, 1)] = re(T::one());
    Operator(s)
}

/// Lifts a single-factor operator onto the joint space.
pub fn embed<T: Real>(op: &Operator<T>, slot: Slot, dims: HilbertDims) -> Result<Operator<T>> {
    let (expected, other) = match slot {
        Slot::Cavity => (dims.n_fock(), HilbertDims::QD_LEVELS),
        Slot::Qd => (HilbertDims::QD_LEVELS, dims.n_fock()),
    };
    if op.dim() != expected {
        return Err(Error::DimensionMismatch { expected, found: op.dim() });
    }
    let id = Operator::<T>::identity(other);
    Ok(match slot {
        Slot::Cavity => op.kron(&id),
        Slot::Qd => id.kron(op),
    })
}

/// Tr(ρ·op).
pub fn expectation<T: Real>(rho: &CMatrix<T>, op: &Operator<T>) -> Result<Cplx<T>> {
    if rho.nrows() != op.dim() || rho.ncols() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), found: rho.nrows() });
    }
    Ok(trace_of_product(rho, &op.0))
}

/// Tr(A·B) without forming the product.
pub fn trace_of_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Cplx<T> {
    let n = a.nrows();
    let mut acc = Cplx::new(T::zero(), T::zero());
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// The operators the cavity-QD model is built from, embedded on the joint space.
#[derive(Debug, Clone)]
pub struct SystemOperators<T: Real> {
    pub dims: HilbertDims,
    /// Cavity annihilation b ⊗ I.
    pub b: Operator<T>,
    /// QD lowering I ⊗ σ₋.
    pub sm: Operator<T>,
    /// Cavity photon number b†b.
    pub n_cav: Operator<T>,
    /// QD excited-state projector σ₊σ₋.
    pub n_qd: Operator<T>,
}

impl<T: Real> SystemOperators<T> {
    pub fn new(dims: HilbertDims) -> Self {
        let b = embed(&fock_annihilation(dims.n_fock()).expect("validated dims"), Slot::Cavity, dims)
            .expect("matching dims");
        let sm = embed(&sigma_minus(), Slot::Qd, dims).expect("matching dims");
        let n_cav = b.dagger().mul(&b);
        let n_qd = sm.dagger().mul(&sm);
        Self { dims, b, sm, n_cav, n_qd }
    }

    pub fn dim(&self) -> usize {
        self.dims.dim()
    }

    /// |n⟩⟨n| ⊗ |s⟩⟨s| as a density matrix.
    pub fn basis_projector(&self, n: usize, excited: bool) -> CMatrix<T> {
        let d = self.dim();
        let k = self.dims.index(n, excited);
        DMatrix::from_fn(d, d, |i, j| if i == k && j == k { re(T::one()) } else { re(T::zero()) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    type C = Cplx<f64>;

    fn random_matrix(d: usize, seed: &[f64]) -> CMatrix<f64> {
        CMatrix::from_fn(d, d, |i, j| {
            let k = (i * d + j) * 2;
            C::new(seed[k % seed.len()], seed[(k + 1) % seed.len()])
        })
    }

    #[test]
    fn annihilation_matrices() {
        let a2 = fock_annihilation::<f64>(2).unwrap();
        assert_eq!(a2.0[(0, 1)], C::new(1.0, 0.0));
        assert_eq!(a2.0.iter().filter(|z| z.modulus() > 0.0).count(), 1);
        let a3 = fock_annihilation::<f64>(3).unwrap();
        assert_eq!(a3.0[(0, 1)], C::new(1.0, 0.0));
        assert_relative_eq!(a3.0[(1, 2)].re, 2f64.sqrt());
        assert_eq!(a3.0.iter().filter(|z| z.modulus() > 0.0).count(), 2);
        assert!(fock_annihilation::<f64>(1).is_err());
    }

    #[test]
    fn truncated_commutator() {
        for n in 2..8 {
            let a = fock_annihilation::<f64>(n).unwrap();
            let comm = a.commutator(&a.dagger());
            for i in 0..n {
                for j in 0..n {
                    let expected = if i != j {
                        0.0
                    } else if i == n - 1 {
                        1.0 - n as f64
                    } else {
                        1.0
                    };
                    assert!((comm.0[(i, j)] - C::new(expected, 0.0)).modulus() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn embedding_block_structure() {
        let dims = HilbertDims::new(2).unwrap();
        let id = embed(&Operator::<f64>::identity(2), Slot::Cavity, dims).unwrap();
        assert_eq!(id, Operator::identity(4));
        let s = embed(&sigma_minus::<f64>(), Slot::Qd, dims).unwrap();
        assert_eq!(s.0[(dims.index(0, false), dims.index(0, true))], C::new(1.0, 0.0));
        assert_eq!(s.0[(dims.index(1, false), dims.index(1, true))], C::new(1.0, 0.0));
        assert_eq!(s.0.iter().filter(|z| z.modulus() > 0.0).count(), 2);
        assert!(embed(&sigma_minus::<f64>(), Slot::Cavity, HilbertDims::new(3).unwrap()).is_err());
    }

    #[test]
    fn cavity_and_qd_operators_commute() {
        for n in 2..7 {
            let ops = SystemOperators::<f64>::new(HilbertDims::new(n).unwrap());
            let c = ops.b.commutator(&ops.sm);
            assert!(c.0.iter().all(|z| z.modulus() == 0.0));
            let c = ops.b.commutator(&ops.sm.dagger());
            assert!(c.0.iter().all(|z| z.modulus() == 0.0));
        }
    }

    #[test]
    fn expectation_examples() {
        let ops = SystemOperators::<f64>::new(HilbertDims::new(4).unwrap());
        let vac = ops.basis_projector(0, false);
        assert_eq!(expectation(&vac, &ops.n_cav).unwrap(), C::new(0.0, 0.0));
        let one = ops.basis_projector(1, false);
        assert_relative_eq!(expectation(&one, &ops.n_cav).unwrap().re, 1.0);
        let d = ops.dim();
        let mixed = CMatrix::<f64>::identity(d, d) / C::new(d as f64, 0.0);
        assert_relative_eq!(expectation(&mixed, &Operator::identity(d)).unwrap().re, 1.0, epsilon = 1e-15);
        assert!(expectation(&mixed, &Operator::identity(d + 1)).is_err());
    }

    #[test]
    fn embedding_preserves_spectrum() {
        // Hermitian op on the cavity factor: eigenvalues repeat twice.
        let n = 4;
        let a = fock_annihilation::<f64>(n).unwrap();
        let x = a.add(&a.dagger());
        let e_small = nalgebra::SymmetricEigen::new(x.0.clone()).eigenvalues;
        let big = embed(&x, Slot::Cavity, HilbertDims::new(n).unwrap()).unwrap();
        let e_big = nalgebra::SymmetricEigen::new(big.0).eigenvalues;
        let mut s: Vec<f64> = e_small.iter().flat_map(|v| [*v, *v]).collect();
        let mut b: Vec<f64> = e_big.iter().copied().collect();
        s.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (u, v) in s.iter().zip(&b) {
            assert_relative_eq!(u, v, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_precision_ladder() {
        let a = fock_annihilation::<f32>(3).unwrap();
        assert!((a.0[(1, 2)].re - 2f32.sqrt()).abs() < 1e-7);
    }

    proptest! {
        #[test]
        fn dagger_properties(seed in proptest::collection::vec(-1.0..1.0_f64, 32)) {
            let a = Operator(random_matrix(4, &seed));
            let b = Operator(random_matrix(4, &seed[7..]));
            prop_assert_eq!(a.dagger().dagger(), a.clone());
            let lhs = a.mul(&b).dagger();
            let rhs = b.dagger().mul(&a.dagger());
            prop_assert!((lhs.0 - rhs.0).iter().all(|z| z.modulus() < 1e-14));
        }

        #[test]
        fn expectation_is_linear(seed in proptest::collection::vec(-1.0..1.0_f64, 40), s in -3.0..3.0_f64) {
            let r1 = random_matrix(4, &seed);
            let r2 = random_matrix(4, &seed[3..]);
            let op = Operator(random_matrix(4, &seed[11..]));
            let op2 = Operator(random_matrix(4, &seed[5..]));
            let k = C::new(s, 0.5 * s);
            let lhs = expectation(&(&r1 + &r2 * k), &op).unwrap();
            let rhs = expectation(&r1, &op).unwrap() + expectation(&r2, &op).unwrap() * k;
            prop_assert!((lhs - rhs).modulus() < 1e-12);
            let lhs = expectation(&r1, &op.add(&op2.scale(k))).unwrap();
            let rhs = expectation(&r1, &op).unwrap() + expectation(&r1, &op2).unwrap() * k;
            prop_assert!((lhs - rhs).modulus() < 1e-12);
        }
    }
}
