//! Dense complex linear algebra helpers shared by the estimator, precoders
//! and the baseline.
//!
//! Large products are split into real GEMMs so they go through the blocked
//! `f64` kernel instead of the generic complex loop.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn split(m: &CMatrix) -> (DMatrix<f64>, DMatrix<f64>) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

fn join(re: &DMatrix<f64>, im: &DMatrix<f64>) -> CMatrix {
    re.zip_map(im, Complex64::new)
}

/// `a * b` computed as four real matrix products.
pub fn cmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    join(&re, &im)
}

/// `a * a^H`. The result is exactly Hermitian: the imaginary diagonal is
/// zero and the lower triangle mirrors the upper.
pub fn outer_gram(a: &CMatrix) -> CMatrix {
    let (ar, ai) = split(a);
    let re = &ar * ar.transpose() + &ai * ai.transpose();
    let im = &ai * ar.transpose() - &ar * ai.transpose();
    let mut g = join(&re, &im);
    hermitize(&mut g);
    g
}

/// Replace `g` by `(g + g^H) / 2` in place.
pub fn hermitize(g: &mut CMatrix) {
    let n = g.nrows();
    for i in 0..n {
        g[(i, i)] = Complex64::new(g[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (g[(i, j)] + g[(j, i)].conj()) * 0.5;
            g[(i, j)] = avg;
            g[(j, i)] = avg.conj();
        }
    }
}

/// Largest `|g_ij - conj(g_ji)|`.
pub fn max_asymmetry(g: &CMatrix) -> f64 {
    let n = g.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((g[(i, j)] - g[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Squared Euclidean norm of a complex vector.
pub fn norm_sqr(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Largest deviation of `m^H m` from the identity.
pub fn orthonormality_error(m: &CMatrix) -> f64 {
    let g = m.adjoint() * m;
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// Squared sines of the principal angles between the column spans of two
/// matrices with orthonormal columns, summed: `k - ‖a^H b‖_F²`.
///
/// Zero iff the spans coincide (for equal column counts).
pub fn principal_angle_energy(a: &CMatrix, b: &CMatrix) -> f64 {
    let cross = a.adjoint() * b;
    let k = a.ncols().min(b.ncols()) as f64;
    (k - frobenius(&cross).powi(2)).max(0.0)
}

/// Orthonormalise the columns of `m` (thin QR, `Q` factor).
pub fn orthonormal_columns(m: &CMatrix) -> CMatrix {
    m.clone().qr().q()
}
