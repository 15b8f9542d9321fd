//! A small dense 2×2 complex matrix.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Condition number above which a 2×2 inversion is refused.
pub const COND_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[Complex64; 2]; 2],
}

impl Mat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2 { m: [[a, b], [c, d]] }
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub const fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Mat2::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn diag(a: Complex64, d: Complex64) -> Self {
        Mat2::new(a, ZERO, ZERO, d)
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = self.m;
        Mat2::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn transpose(&self) -> Self {
        let m = self.m;
        Mat2::new(m[0][0], m[1][0], m[0][1], m[1][1])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let m = self.m;
        Mat2::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.m.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Inverse without any conditioning check; `None` only for an exactly zero determinant.
    pub fn inv_unchecked(&self) -> Option<Self> {
        let d = self.det();
        if d == ZERO {
            return None;
        }
        let m = self.m;
        Some(Mat2::new(m[1][1] / d, -m[0][1] / d, -m[1][0] / d, m[0][0] / d))
    }

    /// Frobenius condition number `‖A‖·‖A⁻¹‖` (infinite for singular matrices).
    pub fn cond(&self) -> f64 {
        let n = self.norm();
        let d = self.det().norm();
        if d == 0.0 || !d.is_finite() {
            return f64::INFINITY;
        }
        // For 2×2 matrices ‖A⁻¹‖_F = ‖A‖_F / |det A|.
        n * n / d
    }

    /// Inverse guarded by [`COND_LIMIT`].
    pub fn inv(&self, context: &str) -> Result<Self> {
        let cond = self.cond();
        if !(cond < COND_LIMIT) {
            return Err(Error::Singular {
                context: context.to_string(),
                cond,
            });
        }
        Ok(self.inv_unchecked().expect("nonzero determinant"))
    }

    /// The Hermitian part of `(M − M*)/(2i)`, the matrix imaginary part.
    pub fn im_part(&self) -> Self {
        let d = *self - self.adjoint();
        d.scale(Complex64::new(0.0, -0.5))
    }

    pub fn re_part(&self) -> Self {
        (*self + self.adjoint()).scale(Complex64::new(0.5, 0.0))
    }

    /// Eigenvalues of the Hermitian part of `self`, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let b = 0.5 * (self.m[0][1] + self.m[1][0].conj());
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - r, mean + r]
    }

    /// Eigenvalues of a general 2×2 matrix.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let t = self.trace() * 0.5;
        let disc = (t * t - self.det()).sqrt();
        [t - disc, t + disc]
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Max-entry distance relative to the larger of the two max-entry norms (floored at 1).
    pub fn rel_dist(&self, other: &Mat2) -> f64 {
        let scale = self.max_abs().max(other.max_abs()).max(1.0);
        (*self - *other).max_abs() / scale
    }
}

impl Index<(usize, usize)> for Mat2 {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.m[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat2 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.m[i][j]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.m, o.m);
        Mat2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.m, o.m);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<Complex64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: Complex64) -> Mat2 {
        self.scale(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inverse_round_trip() {
        let a = Mat2::new(c(1.0, 2.0), c(-0.5, 0.1), c(0.3, -1.0), c(2.0, 0.0));
        let p = a * a.inv("test").unwrap();
        assert!(p.rel_dist(&Mat2::identity()) < 1e-15);
    }

    #[test]
    fn singular_is_rejected() {
        let a = Mat2::real(1.0, 2.0, 2.0, 4.0);
        assert!(matches!(a.inv("x"), Err(Error::Singular { .. })));
    }

    #[test]
    fn hermitian_eigs() {
        let h = Mat2::new(c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0));
        let [l0, l1] = h.hermitian_eigenvalues();
        assert!((l0 - 1.0).abs() < 1e-15 && (l1 - 3.0).abs() < 1e-15);
    }

    #[test]
    fn im_part_of_hermitian_times_i() {
        let h = Mat2::new(c(2.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(-3.0, 0.0));
        let m = h.scale(c(0.0, 1.0));
        assert!(m.im_part().rel_dist(&h) < 1e-15);
    }
}
