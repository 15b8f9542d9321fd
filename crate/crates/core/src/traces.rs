//! Robin trace functionals and the angle bookkeeping around them.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

pub use crate::mat2::Mat2;

const TWO_PI: f64 = 2.0 * PI;

/// Shift `θ` by a multiple of 2π so that `0 ≤ Re θ < 2π`.
pub fn normalize_strip(theta: Complex64) -> Complex64 {
    let mut re = theta.re.rem_euclid(TWO_PI);
    // rem_euclid can round up to exactly 2π for tiny negative inputs.
    if re >= TWO_PI {
        re -= TWO_PI;
    }
    Complex64::new(re, theta.im)
}

/// Boundary angles `(θ0, θR)`, normalized into the strip on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnglePair {
    pub theta0: Complex64,
    pub theta_r: Complex64,
}

impl AnglePair {
    pub fn new(theta0: Complex64, theta_r: Complex64) -> Self {
        AnglePair {
            theta0: normalize_strip(theta0),
            theta_r: normalize_strip(theta_r),
        }
    }

    pub fn real(theta0: f64, theta_r: f64) -> Self {
        AnglePair::new(theta0.into(), theta_r.into())
    }

    pub fn dirichlet() -> Self {
        AnglePair::real(0.0, 0.0)
    }

    pub fn neumann() -> Self {
        AnglePair::real(1.5 * PI, 1.5 * PI)
    }

    /// `(θ0 + π/2, θR + π/2)`: the primed angles of the Robin-to-Robin map.
    pub fn quarter_turn(&self) -> Self {
        AnglePair::new(self.theta0 + FRAC_PI_2, self.theta_r + FRAC_PI_2)
    }

    /// `(θ0 + π, θR + π)`, which defines the same operator.
    pub fn half_turn(&self) -> Self {
        AnglePair::new(self.theta0 + PI, self.theta_r + PI)
    }

    pub fn is_real(&self) -> bool {
        self.theta0.im == 0.0 && self.theta_r.im == 0.0
    }

    pub fn as_array(&self) -> [Complex64; 2] {
        [self.theta0, self.theta_r]
    }
}

/// Base angles `θ` and primed angles `θ'` of a general boundary data map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleQuad {
    pub base: AnglePair,
    pub primed: AnglePair,
}

impl AngleQuad {
    pub fn new(base: AnglePair, primed: AnglePair) -> Self {
        AngleQuad { base, primed }
    }

    /// The quad of the Robin-to-Robin map `Λ_{θ0,θR}`.
    pub fn robin(base: AnglePair) -> Self {
        AngleQuad::new(base, base.quarter_turn())
    }

    pub fn inverse(&self) -> Self {
        AngleQuad::new(self.primed, self.base)
    }

    /// `(θ0' − θ0, θR' − θR)`.
    pub fn differences(&self) -> [Complex64; 2] {
        [
            self.primed.theta0 - self.base.theta0,
            self.primed.theta_r - self.base.theta_r,
        ]
    }

    /// `S_{θ0'−θ0, θR'−θR}`.
    pub fn sin_diff(&self) -> Mat2 {
        let [a, b] = self.differences();
        diag_sin(a, b)
    }

    pub fn is_real(&self) -> bool {
        self.base.is_real() && self.primed.is_real()
    }
}

/// `γ_{θ0,θR}` applied to boundary data `(u(0), u'(0), u(R), u'(R))`.
pub fn trace_gamma(pair: &AnglePair, bdry: [Complex64; 4]) -> [Complex64; 2] {
    let [u0, du0, ur, dur] = bdry;
    [
        pair.theta0.cos() * u0 + pair.theta0.sin() * du0,
        pair.theta_r.cos() * ur - pair.theta_r.sin() * dur,
    ]
}

/// `diag(sin α, sin β)`.
pub fn diag_sin(alpha: Complex64, beta: Complex64) -> Mat2 {
    Mat2::diag(alpha.sin(), beta.sin())
}

/// `diag(cos α, cos β)`.
pub fn diag_cos(alpha: Complex64, beta: Complex64) -> Mat2 {
    Mat2::diag(alpha.cos(), beta.cos())
}

/// `sin θ` with exact zeros at the real multiples of π that the strip produces.
pub(crate) fn sin_exact(t: Complex64) -> Complex64 {
    if t.im == 0.0 && (t.re == 0.0 || t.re == PI) {
        return Complex64::new(0.0, 0.0);
    }
    t.sin()
}

/// `cos θ` with exact zeros at π/2 and 3π/2.
pub(crate) fn cos_exact(t: Complex64) -> Complex64 {
    if t.im == 0.0 && (t.re == FRAC_PI_2 || t.re == 1.5 * PI) {
        return Complex64::new(0.0, 0.0);
    }
    t.cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn dirichlet_and_neumann_traces() {
        let b = [c(1.0), c(2.0), c(3.0), c(4.0)];
        let d = trace_gamma(&AnglePair::dirichlet(), b);
        assert_eq!(d, [c(1.0), c(3.0)]);
        let n = trace_gamma(&AnglePair::neumann(), b);
        assert!((n[0] - c(-2.0)).norm() < 1e-15 && (n[1] - c(4.0)).norm() < 1e-15);
    }

    #[test]
    fn strip_normalization() {
        assert_eq!(normalize_strip(c(2.0 * PI)), c(0.0));
        assert!((normalize_strip(c(-FRAC_PI_2)) - c(1.5 * PI)).norm() < 1e-15);
        let z = Complex64::new(1.0, 1.0);
        assert_eq!(normalize_strip(z), z);
        let tiny = normalize_strip(c(-1e-300));
        assert!(tiny.re >= 0.0 && tiny.re < TWO_PI);
    }

    #[test]
    fn sin_cos_diagonals() {
        assert!(diag_sin(c(FRAC_PI_2), c(FRAC_PI_2)).rel_dist(&Mat2::identity()) < 1e-15);
        assert_eq!(diag_cos(c(0.0), c(0.0)), Mat2::identity());
        let a = Complex64::new(0.3, -0.7);
        let b = Complex64::new(2.0, 0.4);
        let s = diag_sin(a, b);
        let co = diag_cos(a, b);
        assert!((s * s + co * co).rel_dist(&Mat2::identity()) < 1e-14);
    }

    #[test]
    fn half_turn_negates_trace() {
        let p = AnglePair::new(Complex64::new(0.4, 0.2), Complex64::new(5.0, -0.3));
        let b = [Complex64::new(0.1, 1.0), c(-2.0), c(0.7), Complex64::new(0.0, 3.0)];
        let t = trace_gamma(&p, b);
        let s = trace_gamma(&p.half_turn(), b);
        assert!((t[0] + s[0]).norm() < 1e-14 && (t[1] + s[1]).norm() < 1e-14);
    }
}
