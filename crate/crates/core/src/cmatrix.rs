//! Dense complex matrices, the substrate for every operator computation.

use nalgebra::{Complex, DMatrix};

/// Complex scalar.
pub type C64 = Complex<f64>;

/// Dense complex matrix.
pub type CMatrix = DMatrix<C64>;

/// Shorthand complex constructor.
#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Real scalar as a complex number.
#[inline]
pub fn cre(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// `n x n` identity.
pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// `n x n` zero matrix.
pub fn zeros(n: usize) -> CMatrix {
    CMatrix::zeros(n, n)
}

/// Builds a matrix from a row-major slice of `(re, im)` pairs.
pub fn from_rows(n: usize, entries: &[(f64, f64)]) -> CMatrix {
    assert_eq!(entries.len(), n * n, "entry count must be n*n");
    CMatrix::from_fn(n, n, |i, j| {
        let (re, im) = entries[i * n + j];
        Complex::new(re, im)
    })
}

/// Largest entry modulus, a cheap scale estimate (0 for empty matrices).
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}
