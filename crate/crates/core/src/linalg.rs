//! Thin helpers over `nalgebra` complex types.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// One CN(0, variance) sample.
pub fn complex_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Vector of i.i.d. CN(0, variance) entries.
pub fn complex_gaussian_vector<R: Rng + ?Sized>(len: usize, variance: f64, rng: &mut R) -> CVector {
    CVector::from_fn(len, |_, _| complex_gaussian(variance, rng))
}

/// `|h w|^2` where `h` holds the entries of a row channel and `w` is a
/// column beamformer (no conjugation on `h`).
pub fn gain(h: &CVector, w: &CVector) -> f64 {
    h.dot(w).norm_sqr()
}

/// Stack channel rows into a `rows x cols` matrix.
pub fn stack_rows<'a, I>(rows: I, cols: usize) -> CMatrix
where
    I: IntoIterator<Item = &'a CVector>,
{
    let rows: Vec<&CVector> = rows.into_iter().collect();
    CMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}
