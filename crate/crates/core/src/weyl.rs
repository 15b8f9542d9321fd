//! Weyl–Titchmarsh functions: the two-point `m(z; x0, α(ξ); y0, β(η))`, the
//! interior `m±,α(z, x0)`, the 2×2 matrices `M_α(z, x0)`, and the identities
//! tying `Λ_{θ0,θR}` and `M_α` to the Green's function.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::odecore::{integrate, propagate_scaled, CauchyData};
use crate::potential::PotentialSpec;
use crate::resolvent::Solutions;
use crate::traces::{cos_exact, sin_exact, AnglePair, AngleQuad};

type C = Complex64;

/// Reference point `x0` with angle `ξ` (the fundamental matrix is normalized to
/// `[[cos ξ, −sin ξ], [sin ξ, cos ξ]]` there) and end point `y0` with angle `η`
/// (boundary functional `cos η·u(y0) − sin η·u'(y0)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceFrame {
    pub x0: f64,
    pub xi: C,
    pub y0: f64,
    pub eta: C,
}

/// `m(z; x0, α(ξ); y0, β(η))`: `ϑ + m φ` satisfies the `η` condition at `y0`.
pub fn wt_m(v: &PotentialSpec, z: C, frame: &ReferenceFrame, tol: f64) -> Result<C> {
    let (cx, sx) = (cos_exact(frame.xi), sin_exact(frame.xi));
    let (y, _) = integrate(v, z, [cx, sx, -sx, cx], frame.x0, frame.y0, tol)?;
    let (ce, se) = (cos_exact(frame.eta), sin_exact(frame.eta));
    let num = ce * y[0] - se * y[1];
    let den = ce * y[2] - se * y[3];
    let scale = (ce * y[2]).norm() + (se * y[3]).norm();
    if den.norm() <= 1e-13 * scale || den.norm() == 0.0 {
        return Err(Error::Pole(format!(
            "z = {z} is a pole of the Weyl–Titchmarsh function for this frame"
        )));
    }
    Ok(-num / den)
}

/// Side of the reference point an interior `m`-function looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `m₊`, built from `u₊` (right boundary condition).
    Plus,
    /// `m₋`, built from `u₋` (left boundary condition).
    Minus,
}

/// `(−sin α + cos α·m)/(cos α + sin α·m)`.
pub fn rotate_m(m: C, alpha: f64) -> C {
    let (s, c) = alpha.sin_cos();
    (C::new(-s, 0.0) + m * c) / (m * s + c)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..std::f64::consts::PI).contains(&alpha) {
        return Err(Error::Domain(format!("α must lie in [0, π), got {alpha}")));
    }
    Ok(())
}

/// `m±,α(z, x0)`: the `α`-rotation of `u±'(z,x0)/u±(z,x0)`.
pub fn interior_m(
    v: &PotentialSpec,
    z: C,
    x0: f64,
    side: Side,
    pair: &AnglePair,
    alpha: f64,
    tol: f64,
) -> Result<C> {
    check_alpha(alpha)?;
    if !(x0 > 0.0 && x0 < v.r) {
        return Err(Error::Domain(format!("x0 = {x0} must be interior to (0, {})", v.r)));
    }
    let start = match side {
        Side::Plus => CauchyData::new(sin_exact(pair.theta_r), cos_exact(pair.theta_r), v.r),
        Side::Minus => CauchyData::new(-sin_exact(pair.theta0), cos_exact(pair.theta0), 0.0),
    };
    let (d, _) = propagate_scaled(v, z, start, x0, tol)?;
    if d.u.norm() <= 1e-13 * d.du.norm() || d.u.norm() == 0.0 {
        return Err(Error::Pole(format!("x0 = {x0} is a zero of u at z = {z}")));
    }
    let m0 = d.du / d.u;
    Ok(if alpha == 0.0 { m0 } else { rotate_m(m0, alpha) })
}

/// `M_α(z, x0, θ0, θR)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WTMatrix {
    pub matrix: Mat2,
    pub alpha: f64,
    pub x0: f64,
    pub z: C,
}

/// `M_α` from the two scalar functions.
pub fn wt_matrix_from(m_minus: C, m_plus: C) -> Result<Mat2> {
    let gap = m_minus - m_plus;
    if gap.norm() <= 1e-14 * m_minus.norm().max(m_plus.norm()) {
        return Err(Error::Degenerate("m₋ and m₊ coincide; M_α is undefined".into()));
    }
    let mid = 0.5 * (m_minus + m_plus);
    Ok(Mat2::new(C::new(1.0, 0.0), mid, mid, m_minus * m_plus).scale(1.0 / gap))
}

pub fn wt_matrix(
    v: &PotentialSpec,
    z: C,
    x0: f64,
    pair: &AnglePair,
    alpha: f64,
    tol: f64,
) -> Result<WTMatrix> {
    let mm = interior_m(v, z, x0, Side::Minus, pair, alpha, tol)?;
    let mp = interior_m(v, z, x0, Side::Plus, pair, alpha, tol)?;
    Ok(WTMatrix {
        matrix: wt_matrix_from(mm, mp)?,
        alpha,
        x0,
        z,
    })
}

/// One named residual; `None` when the identity does not apply to the angles.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkResidual {
    pub name: &'static str,
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinkReport {
    pub items: Vec<LinkResidual>,
}

impl LinkReport {
    fn push(&mut self, name: &'static str, residual: Option<f64>) {
        self.items.push(LinkResidual { name, residual });
    }

    /// Largest residual over the identities that applied.
    pub fn max(&self) -> f64 {
        self.items.iter().filter_map(|i| i.residual).fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.items.iter().find(|i| i.name == name).and_then(|i| i.residual)
    }
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

fn nonzero(c: C) -> Option<C> {
    if c == C::new(0.0, 0.0) {
        None
    } else {
        Some(c)
    }
}

/// Values of the lower-wedge branch `ψ₋(x)ψ₊(x')/W` near a base point, obtained
/// by short propagations from Cauchy data at the base point so that the values
/// vary smoothly with the offsets.
struct LocalWedge {
    v: PotentialSpec,
    z: C,
    tol: f64,
    left: (CauchyData, f64),
    right: (CauchyData, f64),
    inv_w: (C, f64),
}

impl LocalWedge {
    fn new(s: &Solutions, x: f64, xp: f64) -> Result<Self> {
        let v = s.potential().clone();
        let pair = s.pair();
        let tol = s.potential().r.max(1.0) * 0.0 + TOL_LOCAL;
        let z = s.z();
        let start_l = CauchyData::new(-sin_exact(pair.theta0), cos_exact(pair.theta0), 0.0);
        let start_r = CauchyData::new(sin_exact(pair.theta_r), cos_exact(pair.theta_r), v.r);
        let left = propagate_scaled(&v, z, start_l, x, tol)?;
        let right = propagate_scaled(&v, z, start_r, xp, tol)?;
        let f = s.fundamental();
        let det = f.det(pair.theta0, pair.theta_r);
        Ok(LocalWedge {
            v,
            z,
            tol,
            left,
            right,
            inv_w: (-1.0 / det, -f.log_scale),
        })
    }

    fn at(&self, x: f64, xp: f64) -> Result<C> {
        let (a, la) = propagate_scaled(&self.v, self.z, self.left.0, x, self.tol)?;
        let (b, lb) = propagate_scaled(&self.v, self.z, self.right.0, xp, self.tol)?;
        let log = la + lb + self.left.1 + self.right.1 + self.inv_w.1;
        Ok(a.u * b.u * self.inv_w.0 * log.exp())
    }
}

// Tolerance for the short hops of the finite-difference stencils; each hop is a
// single step whose error is far below this.
const TOL_LOCAL: f64 = 1e-12;

/// Finite-difference step for the Green-kernel derivatives.
pub const FD_STEP: f64 = 1e-4;

/// Derivatives `[F, ∂₁F, ∂₂F, ∂₁∂₂F]` of the wedge branch at `(x, x')` by
/// second-order differences with one Richardson step. `dir1`/`dir2` select the
/// stencil per variable: `0` central, `+1` forward, `−1` backward.
fn wedge_fd(w: &LocalWedge, x: f64, xp: f64, dir1: i32, dir2: i32, h: f64) -> Result<[C; 4]> {
    fn weights(dir: i32) -> Vec<(f64, f64)> {
        match dir {
            0 => vec![(-1.0, -0.5), (1.0, 0.5)],
            1 => vec![(0.0, -1.5), (1.0, 2.0), (2.0, -0.5)],
            _ => vec![(0.0, 1.5), (-1.0, -2.0), (-2.0, 0.5)],
        }
    }
    let once = |h: f64| -> Result<[C; 3]> {
        let (w1, w2) = (weights(dir1), weights(dir2));
        let mut d1 = C::new(0.0, 0.0);
        let mut d2 = C::new(0.0, 0.0);
        let mut d12 = C::new(0.0, 0.0);
        for &(o1, a1) in &w1 {
            d1 += w.at(x + o1 * h, xp)? * a1;
        }
        for &(o2, a2) in &w2 {
            d2 += w.at(x, xp + o2 * h)? * a2;
        }
        for &(o1, a1) in &w1 {
            for &(o2, a2) in &w2 {
                d12 += w.at(x + o1 * h, xp + o2 * h)? * (a1 * a2);
            }
        }
        Ok([d1 / h, d2 / h, d12 / (h * h)])
    };
    let coarse = once(h)?;
    let fine = once(0.5 * h)?;
    let mut out = [w.at(x, xp)?, C::default(), C::default(), C::default()];
    for i in 0..3 {
        out[i + 1] = (4.0 * fine[i] - coarse[i]) / 3.0;
    }
    Ok(out)
}

/// Residuals of the endpoint identities between `Λ_{θ0,θR}(z)` and the Green's
/// function; the Dirichlet derivative limits use one-sided differences.
pub fn green_link_check(v: &PotentialSpec, z: C, pair: &AnglePair, tol: f64) -> Result<LinkReport> {
    let r = v.r;
    let sols = Solutions::new(v, pair, z, tol)?;
    let lam = crate::bdmap::map_from_fundamental(sols.fundamental(), r, &AngleQuad::robin(*pair), tol)?;
    let basis = crate::odecore::basis_from_fundamental(sols.fundamental(), r, pair.theta0, pair.theta_r, tol)?;
    let (c0, s0) = (cos_exact(pair.theta0), sin_exact(pair.theta0));
    let (cr, sr) = (cos_exact(pair.theta_r), sin_exact(pair.theta_r));
    let g00 = sols.green(0.0, 0.0)?.value;
    let grr = sols.green(r, r)?.value;
    let mp = crate::bdmap::m_plus(v, pair.theta0, pair.theta_r, z, tol)?;
    let mm = crate::bdmap::m_minus(v, pair.theta0, pair.theta_r, z, tol)?;
    let mut rep = LinkReport::default();

    rep.push("lambda11_from_g00", nonzero(s0).map(|s| rel(lam[(0, 0)], (g00 + s * c0) / (s * s))));
    rep.push("g00_from_m_plus", nonzero(s0).map(|s| rel(g00, s * (-c0 + s * mp))));
    rep.push("lambda22_from_grr", nonzero(sr).map(|s| rel(lam[(1, 1)], (grr + s * cr) / (s * s))));
    rep.push("grr_from_m_minus", nonzero(sr).map(|s| rel(grr, s * (-cr - s * mm))));
    rep.push(
        "lambda12_from_grr",
        nonzero(sr).map(|s| {
            let forms = [
                nonzero(c0).map(|c| -basis.uminus_at_0.du / c),
                nonzero(s0).map(|s| basis.uminus_at_0.u / s),
            ];
            forms
                .iter()
                .flatten()
                .map(|f| rel(lam[(0, 1)], grr / s * f))
                .fold(0.0, f64::max)
        }),
    );
    rep.push(
        "lambda21_from_g00",
        nonzero(s0).map(|s| {
            let forms = [
                nonzero(cr).map(|c| basis.uplus_at_r.du / c),
                nonzero(sr).map(|s| basis.uplus_at_r.u / s),
            ];
            forms
                .iter()
                .flatten()
                .map(|f| rel(lam[(1, 0)], g00 / s * f))
                .fold(0.0, f64::max)
        }),
    );

    let dirichlet0 = s0 == C::new(0.0, 0.0);
    let dirichlet_r = sr == C::new(0.0, 0.0);
    let corner = |x: f64, dir: i32| -> Result<C> {
        let w = LocalWedge::new(&sols, x, x)?;
        Ok(wedge_fd(&w, x, x, dir, dir, FD_STEP)?[3])
    };
    // Only the Dirichlet-Dirichlet realization has the pure derivative limits.
    if dirichlet0 && dirichlet_r {
        let d2 = corner(0.0, 1)?;
        rep.push("lambda11_corner_limit", Some(rel(lam[(0, 0)], d2)));
        let d5 = corner(r, -1)?;
        rep.push("lambda22_corner_limit", Some(rel(lam[(1, 1)], d5)));
    } else {
        rep.push("lambda11_corner_limit", None);
        rep.push("lambda22_corner_limit", None);
    }
    Ok(rep)
}

/// Residuals of `M_α(z,x0)` against finite-difference derivatives of the Green's
/// function at the interior point `x0`.
pub fn wt_green_check(
    v: &PotentialSpec,
    z: C,
    x0: f64,
    pair: &AnglePair,
    alpha: f64,
    tol: f64,
) -> Result<LinkReport> {
    let sols = Solutions::new(v, pair, z, tol)?;
    let w = LocalWedge::new(&sols, x0, x0)?;
    let [g, d1, d2, d12] = wedge_fd(&w, x0, x0, 0, 0, FD_STEP)?;
    let m0 = wt_matrix(v, z, x0, pair, 0.0, tol)?.matrix;
    let ma = wt_matrix(v, z, x0, pair, alpha, tol)?.matrix;
    let (s, c) = alpha.sin_cos();
    // Products of first-order operators (a + b∂₁)(c + d∂₂) applied to G.
    let op = |a: f64, b: f64, cc: f64, d: f64| g * (a * cc) + d1 * (b * cc) + d2 * (a * d) + d12 * (b * d);
    let mut rep = LinkReport::default();
    rep.push("m0_11", Some(rel(m0[(0, 0)], g)));
    rep.push("m0_12", Some(rel(m0[(0, 1)], 0.5 * (d1 + d2))));
    rep.push("m0_22", Some(rel(m0[(1, 1)], d12)));
    rep.push("m_alpha_11", Some(rel(ma[(0, 0)], op(c, s, c, s))));
    rep.push(
        "m_alpha_12",
        Some(rel(ma[(0, 1)], 0.5 * (op(c, s, -s, c) + op(-s, c, c, s)))),
    );
    rep.push("m_alpha_22", Some(rel(ma[(1, 1)], op(-s, c, -s, c))));
    Ok(rep)
}
