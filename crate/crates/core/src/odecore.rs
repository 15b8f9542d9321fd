//! Shooting for `−u'' + V u = z u`: an adaptive Dormand–Prince 5(4) integrator
//! on the first-order system `(u, u')`, the fundamental system `θ, φ`, the
//! characteristic determinant `Δ` and the distinguished basis `u₋, u₊`.
//!
//! For large `|Im √z|·R` the solutions grow like `e^{Im √z · x}` and leave the
//! range of `f64`. The integrator therefore carries a common logarithmic scale
//! factor; quantities that are ratios of determinants never see it.

use num_complex::Complex64;

use crate::error::{Error, Operator, Result};
use crate::potential::{det_threshold, PotentialSpec, Segment};
use crate::traces::{cos_exact, sin_exact, AnglePair};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Value and derivative of a solution at `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyData {
    pub u: C,
    pub du: C,
    pub x: f64,
}

impl CauchyData {
    pub fn new(u: C, du: C, x: f64) -> Self {
        CauchyData { u, du, x }
    }
}

/// `θ(z,x), θ'(z,x), φ(z,x), φ'(z,x)` with `θ(0) = φ'(0) = 1`, `θ'(0) = φ(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalEval {
    pub theta: C,
    pub dtheta: C,
    pub phi: C,
    pub dphi: C,
    pub z: C,
    pub x: f64,
}

/// The fundamental system stored as `mantissa · e^{log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledFundamental {
    pub theta: C,
    pub dtheta: C,
    pub phi: C,
    pub dphi: C,
    pub log_scale: f64,
    pub z: C,
    pub x: f64,
}

impl ScaledFundamental {
    /// Mantissa of `Δ(z,x,θ0,θR)`; multiply by `e^{log_scale}` for the value.
    pub fn det(&self, theta0: C, theta_r: C) -> C {
        let (c0, s0) = (cos_exact(theta0), sin_exact(theta0));
        let (cr, sr) = (cos_exact(theta_r), sin_exact(theta_r));
        c0 * cr * self.phi - c0 * sr * self.dphi - s0 * cr * self.theta + s0 * sr * self.dtheta
    }

    /// `log |Δ|`, finite even when `|Δ|` itself overflows.
    pub fn log_abs_det(&self, theta0: C, theta_r: C) -> f64 {
        self.det(theta0, theta_r).norm().ln() + self.log_scale
    }

    /// Mantissas of `(γ_R θ, γ_R φ)` with `γ_R u = cos θR u(x) − sin θR u'(x)`.
    pub fn gamma_r(&self, theta_r: C) -> (C, C) {
        let (cr, sr) = (cos_exact(theta_r), sin_exact(theta_r));
        (cr * self.theta - sr * self.dtheta, cr * self.phi - sr * self.dphi)
    }

    /// `|θφ' − θ'φ − 1|` relative to the size of the products.
    pub fn wronskian_defect(&self) -> f64 {
        let a = self.theta * self.dphi;
        let b = self.dtheta * self.phi;
        let unit = (-2.0 * self.log_scale).exp();
        ((a - b) - unit).norm() / (a.norm() + b.norm()).max(unit)
    }

    pub fn unscaled(&self) -> FundamentalEval {
        let s = self.log_scale.exp();
        FundamentalEval {
            theta: self.theta * s,
            dtheta: self.dtheta * s,
            phi: self.phi * s,
            dphi: self.dphi * s,
            z: self.z,
            x: self.x,
        }
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 20_000_000;
const RESCALE_ABOVE: f64 = 1e100;

/// Right-hand side for `N/2` solutions stacked as `(u, u')` pairs.
#[inline]
fn rhs<const N: usize>(seg: &Segment, z: C, x: f64, y: &[C; N]) -> [C; N] {
    let q = seg.at(x) - z;
    let mut dy = [ZERO; N];
    for j in (0..N).step_by(2) {
        dy[j] = y[j + 1];
        dy[j + 1] = q * y[j];
    }
    dy
}

#[inline]
fn axpy<const N: usize>(y: &[C; N], h: f64, terms: &[(f64, &[C; N])]) -> [C; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = ZERO;
        for (c, k) in terms {
            acc += k[i] * *c;
        }
        out[i] += acc * h;
    }
    out
}

/// Integrate from `x0` to `x1` (either direction). Returns the state mantissa and
/// the accumulated log-scale factor.
pub(crate) fn integrate<const N: usize>(
    v: &PotentialSpec,
    z: C,
    mut y: [C; N],
    x0: f64,
    x1: f64,
    tol: f64,
) -> Result<([C; N], f64)> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    for x in [x0, x1] {
        if !(0.0..=v.r).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, {}]", v.r)));
        }
    }
    let mut log_scale = 0.0;
    if x0 == x1 {
        return Ok((y, log_scale));
    }
    let forward = x1 > x0;
    let (lo, hi) = if forward { (x0, x1) } else { (x1, x0) };
    let mut segs: Vec<Segment> = v.segments().into_iter().filter(|s| s.b > lo && s.a < hi).collect();
    if !forward {
        segs.reverse();
    }
    let dir = if forward { 1.0 } else { -1.0 };

    let vmax = segs
        .iter()
        .map(|s| s.v0.norm().max(s.at(s.b).norm()))
        .fold(0.0, f64::max);
    let mut h_abs = (0.05 / (1.0 + (z.norm() + vmax).sqrt())).min(hi - lo);
    let mut steps = 0usize;

    for seg in &segs {
        let (start, end) = if forward {
            (seg.a.max(lo), seg.b.min(hi))
        } else {
            (seg.b.min(hi), seg.a.max(lo))
        };
        let mut x = start;
        let mut k1 = rhs(seg, z, x, &y);
        while (end - x) * dir > 0.0 {
            let remaining = (end - x).abs();
            let last = h_abs >= remaining;
            let h_try = if last { remaining } else { h_abs };
            let h = h_try * dir;
            let k2 = rhs(seg, z, x + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = rhs(seg, z, x + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(seg, z, x + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = rhs(
                seg,
                z,
                x + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let x_new = if last { end } else { x + h };
            let k6 = rhs(
                seg,
                z,
                x_new,
                &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = rhs(seg, z, x_new, &y_new);
            let mut err = 0.0f64;
            for i in 0..N {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
                let sc = tol + tol * y[i].norm().max(y_new[i].norm());
                err = err.max(e.norm() / sc);
            }
            if !err.is_finite() {
                err = 1e10;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                x = x_new;
                y = y_new;
                k1 = k7;
                if !last {
                    h_abs *= factor;
                }
                let m = y.iter().map(|c| c.norm()).fold(0.0, f64::max);
                if m > RESCALE_ABOVE {
                    let inv = 1.0 / m;
                    y.iter_mut().for_each(|c| *c *= inv);
                    k1.iter_mut().for_each(|c| *c *= inv);
                    log_scale += m.ln();
                }
            } else {
                h_abs = h_try * factor.min(0.9);
            }
            steps += 1;
            if h_abs < 1e-14 * x.abs().max(1.0) {
                return Err(Error::StepUnderflow { x, h: h_abs });
            }
            if steps > MAX_STEPS {
                return Err(Error::StepUnderflow { x, h: h_abs });
            }
        }
    }
    Ok((y, log_scale))
}

/// Propagate Cauchy data to `to_x`, returning the mantissa and log scale.
pub fn propagate_scaled(
    v: &PotentialSpec,
    z: C,
    from: CauchyData,
    to_x: f64,
    tol: f64,
) -> Result<(CauchyData, f64)> {
    let (y, s) = integrate(v, z, [from.u, from.du], from.x, to_x, tol)?;
    Ok((CauchyData::new(y[0], y[1], to_x), s))
}

/// Solution data at `to_x` for the solution with data `from`.
pub fn propagate(v: &PotentialSpec, z: C, from: CauchyData, to_x: f64, tol: f64) -> Result<CauchyData> {
    let (d, s) = propagate_scaled(v, z, from, to_x, tol)?;
    let f = s.exp();
    Ok(CauchyData::new(d.u * f, d.du * f, to_x))
}

/// Fundamental system at `x` in scaled form.
pub fn fundamental_scaled(v: &PotentialSpec, z: C, x: f64, tol: f64) -> Result<ScaledFundamental> {
    let (y, s) = integrate(v, z, [ONE, ZERO, ZERO, ONE], 0.0, x, tol)?;
    Ok(ScaledFundamental {
        theta: y[0],
        dtheta: y[1],
        phi: y[2],
        dphi: y[3],
        log_scale: s,
        z,
        x,
    })
}

pub fn fundamental_system(v: &PotentialSpec, z: C, x: f64, tol: f64) -> Result<FundamentalEval> {
    Ok(fundamental_scaled(v, z, x, tol)?.unscaled())
}

/// Characteristic determinant `Δ(z,R,θ0,θR)`.
pub fn char_det(v: &PotentialSpec, z: C, theta0: C, theta_r: C, tol: f64) -> Result<C> {
    let f = fundamental_scaled(v, z, v.r, tol)?;
    Ok(f.det(theta0, theta_r) * f.log_scale.exp())
}

/// Fail with [`Error::EigenvalueHit`] when `Δ` is below the eigenvalue threshold.
pub(crate) fn check_det(
    f: &ScaledFundamental,
    r: f64,
    theta0: C,
    theta_r: C,
    operator: Operator,
    tol: f64,
) -> Result<C> {
    let d = f.det(theta0, theta_r);
    let log_abs = d.norm().ln() + f.log_scale;
    let thr = det_threshold(f.z, r, tol).ln();
    if !(log_abs >= thr) {
        return Err(Error::EigenvalueHit {
            z: f.z,
            operator,
            det_abs: log_abs.exp(),
        });
    }
    Ok(d)
}

/// Endpoint data of the normalized basis `u₋` (`u₋(R) = 1`) and `u₊` (`u₊(0) = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisEndpoints {
    pub uminus_at_0: CauchyData,
    pub uminus_at_r: CauchyData,
    pub uplus_at_0: CauchyData,
    pub uplus_at_r: CauchyData,
    pub z: C,
    pub angles: AnglePair,
    /// Relative defect of `θφ' − θ'φ = 1` at `x = R`.
    pub fundamental_defect: f64,
}

pub fn basis_endpoints(v: &PotentialSpec, z: C, theta0: C, theta_r: C, tol: f64) -> Result<BasisEndpoints> {
    let f = fundamental_scaled(v, z, v.r, tol)?;
    basis_from_fundamental(&f, v.r, theta0, theta_r, tol)
}

pub(crate) fn basis_from_fundamental(
    f: &ScaledFundamental,
    r: f64,
    theta0: C,
    theta_r: C,
    tol: f64,
) -> Result<BasisEndpoints> {
    let (c0, s0) = (cos_exact(theta0), sin_exact(theta0));
    let (cr, sr) = (cos_exact(theta_r), sin_exact(theta_r));
    let d_left = check_det(f, r, theta0, ZERO, Operator::LeftAuxiliary, tol)?;
    let d_right = check_det(f, r, ZERO, theta_r, Operator::RightAuxiliary, tol)?;
    let shrink = (-f.log_scale).exp();
    let (gr_theta, _) = f.gamma_r(theta_r);

    // u₋ = (−sin θ0·θ + cos θ0·φ)/Δ(θ0,0)
    let uminus_at_0 = CauchyData::new(-s0 * shrink / d_left, c0 * shrink / d_left, 0.0);
    let uminus_at_r = CauchyData::new(ONE, (-s0 * f.dtheta + c0 * f.dphi) / d_left, r);
    // u₊ = θ − (γ_R θ/γ_R φ)·φ; its data at R reduce through θφ' − θ'φ = 1.
    let uplus_at_0 = CauchyData::new(ONE, -gr_theta / d_right, 0.0);
    let uplus_at_r = CauchyData::new(-sr * shrink / d_right, -cr * shrink / d_right, r);
    Ok(BasisEndpoints {
        uminus_at_0,
        uminus_at_r,
        uplus_at_0,
        uplus_at_r,
        z: f.z,
        angles: AnglePair { theta0, theta_r },
        fundamental_defect: f.wronskian_defect(),
    })
}

/// `W(z) = u₊(0)u₋'(0) − u₊'(0)u₋(0)`, cross-checked at `x = R` and against both
/// factorizations through the boundary functionals.
pub fn wronskian(b: &BasisEndpoints) -> Result<C> {
    let w0 = b.uplus_at_0.u * b.uminus_at_0.du - b.uplus_at_0.du * b.uminus_at_0.u;
    let wr = b.uplus_at_r.u * b.uminus_at_r.du - b.uplus_at_r.du * b.uminus_at_r.u;
    let (c0, s0) = (cos_exact(b.angles.theta0), sin_exact(b.angles.theta0));
    let (cr, sr) = (cos_exact(b.angles.theta_r), sin_exact(b.angles.theta_r));
    let left = (-s0 * b.uminus_at_0.u + c0 * b.uminus_at_0.du) * (c0 + s0 * b.uplus_at_0.du);
    let right = (cr - sr * b.uminus_at_r.du) * (-sr * b.uplus_at_r.u - cr * b.uplus_at_r.du);
    let scale = w0.norm().max(wr.norm()).max(f64::MIN_POSITIVE);
    let spread = [wr, left, right].iter().map(|w| (w - w0).norm()).fold(0.0, f64::max) / scale;
    if spread > 1e-7 || b.fundamental_defect > 1e-7 {
        return Err(Error::Accuracy(format!(
            "Wronskian evaluations disagree (relative spread {spread:.2e}, fundamental defect {:.2e})",
            b.fundamental_defect
        )));
    }
    Ok(w0)
}
