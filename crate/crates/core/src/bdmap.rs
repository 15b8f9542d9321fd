//! General boundary data maps `Λ^{θ'}_{θ}(z)`, the Robin-to-Robin maps
//! `Λ_{θ0,θR}(z)`, the scalar `m±` functions, high-energy references,
//! Herglotz imaginary parts and point masses of the spectral measure.

use num_complex::Complex64;

use crate::error::{Error, Operator, Result};
use crate::mat2::Mat2;
use crate::odecore::{check_det, fundamental_scaled, ScaledFundamental};
use crate::potential::{sqrt_branch, PotentialSpec};
use crate::traces::{cos_exact, sin_exact, AnglePair, AngleQuad};

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// `Λ^{θ0',θR'}_{θ0,θR}(z)`: maps the `θ`-trace of a solution to its `θ'`-trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryDataMap {
    pub matrix: Mat2,
    pub z: C,
    pub quad: AngleQuad,
}

/// Assemble `Λ^{θ'}_{θ}` from one fundamental-system evaluation at `x = R`.
pub fn map_from_fundamental(f: &ScaledFundamental, r: f64, quad: &AngleQuad, tol: f64) -> Result<Mat2> {
    let (b, p) = (quad.base, quad.primed);
    let d = check_det(f, r, b.theta0, b.theta_r, Operator::Main, tol)?;
    let [d0, dr] = quad.differences();
    let shrink = (-f.log_scale).exp();
    Ok(Mat2::new(
        f.det(p.theta0, b.theta_r) / d,
        sin_exact(d0) * shrink / d,
        sin_exact(dr) * shrink / d,
        f.det(b.theta0, p.theta_r) / d,
    ))
}

pub fn bdmap_general(v: &PotentialSpec, quad: &AngleQuad, z: C, tol: f64) -> Result<BoundaryDataMap> {
    let f = fundamental_scaled(v, z, v.r, tol)?;
    Ok(BoundaryDataMap {
        matrix: map_from_fundamental(&f, v.r, quad, tol)?,
        z,
        quad: *quad,
    })
}

/// The Robin-to-Robin map `Λ_{θ0,θR} = Λ^{θ0+π/2, θR+π/2}_{θ0,θR}`.
pub fn bdmap_robin(v: &PotentialSpec, pair: &AnglePair, z: C, tol: f64) -> Result<BoundaryDataMap> {
    bdmap_general(v, &AngleQuad::robin(*pair), z, tol)
}

fn is_aux_hit(e: &Error) -> bool {
    matches!(
        e,
        Error::EigenvalueHit {
            operator: Operator::LeftAuxiliary | Operator::RightAuxiliary,
            ..
        }
    )
}

/// `m_{+,θ0}(z,θR) = (−sin θ0 + cos θ0·u₊'(z,0))/(cos θ0 + sin θ0·u₊'(z,0))`.
///
/// At eigenvalues of `H_{0,θR}` the normalization of `u₊` breaks down; there the
/// determinant ratio `Δ(θ0+π/2,θR)/Δ(θ0,θR)` is used instead.
pub fn m_plus(v: &PotentialSpec, theta0: C, theta_r: C, z: C, tol: f64) -> Result<C> {
    let f = fundamental_scaled(v, z, v.r, tol)?;
    let d = check_det(&f, v.r, theta0, theta_r, Operator::Main, tol)?;
    match crate::odecore::basis_from_fundamental(&f, v.r, theta0, theta_r, tol) {
        Ok(b) => {
            let (c0, s0) = (cos_exact(theta0), sin_exact(theta0));
            let du = b.uplus_at_0.du;
            Ok((-s0 + c0 * du) / (c0 + s0 * du))
        }
        Err(e) if is_aux_hit(&e) => Ok(f.det(theta0 + std::f64::consts::FRAC_PI_2, theta_r) / d),
        Err(e) => Err(e),
    }
}

/// `m_{−,θR}(z,θ0) = (sin θR + cos θR·u₋'(z,R))/(cos θR − sin θR·u₋'(z,R))`.
pub fn m_minus(v: &PotentialSpec, theta0: C, theta_r: C, z: C, tol: f64) -> Result<C> {
    let f = fundamental_scaled(v, z, v.r, tol)?;
    let d = check_det(&f, v.r, theta0, theta_r, Operator::Main, tol)?;
    match crate::odecore::basis_from_fundamental(&f, v.r, theta0, theta_r, tol) {
        Ok(b) => {
            let (cr, sr) = (cos_exact(theta_r), sin_exact(theta_r));
            let du = b.uminus_at_r.du;
            Ok((sr + cr * du) / (cr - sr * du))
        }
        Err(e) if is_aux_hit(&e) => Ok(-f.det(theta0, theta_r + std::f64::consts::FRAC_PI_2) / d),
        Err(e) => Err(e),
    }
}

/// Leading term of `Λ_{θ0,θR}(z)` as `|z| → ∞` with `Im √z > 0`.
///
/// The diagonal tends to `cot θ` for `sin θ ≠ 0` and to `i√z` for Dirichlet-type
/// angles; the off-diagonal entries are exponentially small, `∝ e^{i√z R}`.
pub fn asymptotic_reference(pair: &AnglePair, z: C, r: f64) -> Mat2 {
    let k = sqrt_branch(z);
    let e = (I * k * r).exp();
    let (c0, s0) = (cos_exact(pair.theta0), sin_exact(pair.theta0));
    let (cr, sr) = (cos_exact(pair.theta_r), sin_exact(pair.theta_r));
    let zero = C::new(0.0, 0.0);
    let d0 = if s0 == zero { I * k } else { c0 / s0 };
    let dr = if sr == zero { I * k } else { cr / sr };
    let off = match (s0 == zero, sr == zero) {
        (false, false) => 2.0 * I * e / (k * s0 * sr),
        (true, false) => -2.0 * e / (c0 * sr),
        (false, true) => -2.0 * e / (s0 * cr),
        (true, true) => -2.0 * I * k * e / (c0 * cr),
    };
    Mat2::new(d0, off, off, dr)
}

fn require_selfadjoint(v: &PotentialSpec, quad: &AngleQuad) -> Result<()> {
    if !v.is_real() {
        return Err(Error::Domain("the Herglotz property needs a real potential".into()));
    }
    if !quad.is_real() {
        return Err(Error::Domain("the Herglotz property needs real boundary angles".into()));
    }
    for d in quad.differences() {
        if sin_exact(d).norm() < 1e-12 {
            return Err(Error::Domain(
                "θ' − θ must be nonzero modulo π in both components".into(),
            ));
        }
    }
    Ok(())
}

/// `Im(Λ^{θ'}_{θ}(z)·S_{θ'−θ})`, Hermitian; positive definite on the upper half-plane
/// for real `V` and real angles.
pub fn herglotz_imag(v: &PotentialSpec, quad: &AngleQuad, z: C, tol: f64) -> Result<Mat2> {
    require_selfadjoint(v, quad)?;
    if z.im == 0.0 {
        return Err(Error::Domain("z must be off the real axis".into()));
    }
    let l = bdmap_general(v, quad, z, tol)?.matrix;
    Ok((l * quad.sin_diff()).im_part())
}

/// Default `ε` sequence for [`measure_point_mass`].
pub const DEFAULT_EPS: [f64; 3] = [1e-3, 1e-4, 1e-5];

/// Jump `Σ({λ})` of the matrix measure of `Λ^{θ'}_{θ}·S` at an eigenvalue `λ`.
///
/// Near the pole `Λ·S ≈ Σ({λ})/(λ − z) + H(z)` with `H` Hermitian on the real
/// axis, so `ε·Im(Λ·S)(λ+iε) = Σ({λ}) + O(ε²)`; the values over the `ε` sequence
/// are extrapolated to `ε = 0` in the variable `ε²`.
pub fn measure_point_mass(
    v: &PotentialSpec,
    quad: &AngleQuad,
    lambda: f64,
    eps: &[f64],
    tol: f64,
) -> Result<Mat2> {
    require_selfadjoint(v, quad)?;
    if eps.len() < 2 || eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Domain("need at least two positive ε values".into()));
    }
    let s = quad.sin_diff();
    let samples: Vec<(f64, Mat2)> = eps
        .iter()
        .map(|&e| {
            let l = bdmap_general(v, quad, C::new(lambda, e), tol)?.matrix;
            Ok((e * e, (l * s).im_part().scale(C::new(e, 0.0))))
        })
        .collect::<Result<_>>()?;
    let full = neville_at_zero(&samples);
    let partial = neville_at_zero(&samples[..samples.len() - 1]);
    let scale = full.max_abs().max(1e-300);
    let spread = (full - partial).max_abs();
    if spread > 1e-4 * scale.max(1.0) {
        return Err(Error::Accuracy(format!(
            "ε-extrapolation of the point mass at λ = {lambda} does not settle (spread {spread:.2e})"
        )));
    }
    let jump = full.re_part();
    let [lo, _] = jump.hermitian_eigenvalues();
    if lo < -1e-6 * scale.max(1.0) {
        return Err(Error::Accuracy(format!(
            "extrapolated jump at λ = {lambda} is not positive semidefinite (min eigenvalue {lo:.2e})"
        )));
    }
    Ok(jump)
}

/// Polynomial extrapolation of matrix samples `(t_j, M_j)` to `t = 0`.
fn neville_at_zero(samples: &[(f64, Mat2)]) -> Mat2 {
    let n = samples.len();
    let mut p: Vec<Mat2> = samples.iter().map(|s| s.1).collect();
    for m in 1..n {
        for i in 0..n - m {
            let (ti, tj) = (samples[i].0, samples[i + m].0);
            // P(0) = (t_j P_i − t_i P_{i+1}) / (t_j − t_i)
            p[i] = (p[i].scale(C::new(tj, 0.0)) - p[i + 1].scale(C::new(ti, 0.0))).scale(C::new(1.0 / (tj - ti), 0.0));
        }
    }
    p[0]
}
