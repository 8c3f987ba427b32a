//! Dense complex matrix exponential.

use nalgebra::ComplexField;

use crate::scalar::{lit, re, CMatrix, Real};

/// Induced 1-norm (largest column sum of moduli).
pub fn one_norm<T: Real>(a: &CMatrix<T>) -> T {
    a.column_iter()
        .map(|c| c.iter().fold(T::zero(), |s, z| s + z.modulus()))
        .fold(T::zero(), |m, v| m.max(v))
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// e^A by scaling and squaring with a degree-13 Padé approximant.
pub fn expm<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let theta13 = 5.371920351148152;
    let norm = crate::scalar::to_f64(one_norm(a));
    let s = if norm > theta13 { (norm / theta13).log2().ceil() as i32 } else { 0 };
    let a = a * re(lit::<T>(0.5f64.powi(s)));
    let b = |k: usize| re(lit::<T>(PADE13[k]));
    let ident = CMatrix::<T>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &ident * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8)) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &ident * b(0);
    let mut x = (&v - &u).lu().solve(&(&v + &u)).expect("Padé denominator is nonsingular after scaling");
    for _ in 0..s {
        x = &x * &x;
    }
    x
}
