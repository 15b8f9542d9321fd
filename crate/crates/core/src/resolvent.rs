//! Green's function of `H_{θ0,θR}`, the trace-of-resolvent row kernels, the
//! adjoint trace kernels and Krein's rank-two resolvent corrections.
//!
//! Internally everything is expressed through two unnormalized solutions:
//! `ψ₋` with data `(−sin θ0, cos θ0)` at `x = 0` (it satisfies the left boundary
//! condition) and `ψ₊` with data `(sin θR, cos θR)` at `x = R`. Their Wronskian is
//! `W(ψ₊,ψ₋) = −Δ(θ0,θR)`, so nothing here depends on the auxiliary
//! operators `H_{θ0,0}`, `H_{0,θR}` being invertible. Interior values are
//! obtained by shooting `ψ₋` rightwards and `ψ₊` leftwards, the directions in
//! which they grow.

use num_complex::Complex64;

use crate::error::{Error, Operator, Result};
use crate::mat2::Mat2;
use crate::odecore::{
    basis_from_fundamental, check_det, fundamental_scaled, propagate_scaled, CauchyData, ScaledFundamental,
};
use crate::potential::PotentialSpec;
use crate::quadrature::gauss_legendre_on;
use crate::traces::{cos_exact, sin_exact, trace_gamma, AnglePair, AngleQuad};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

/// Which branch of the kernel a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wedge {
    /// `x ≤ x'`: `G = u₋(x)·u₊(x')/W`.
    Lower,
    /// `x > x'`.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenEval {
    pub value: C,
    pub z: C,
    pub x: f64,
    pub xp: f64,
    pub wedge: Wedge,
}

/// A solution value stored as `mantissa · e^{log}`.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    u: C,
    du: C,
    log: f64,
}

/// The solution pair `ψ₋`, `ψ₊` of `H_{θ0,θR}` at a fixed `z`.
#[derive(Debug, Clone)]
pub struct Solutions {
    v: PotentialSpec,
    pair: AnglePair,
    z: C,
    tol: f64,
    fundamental: ScaledFundamental,
    det: C,
}

impl Solutions {
    pub fn new(v: &PotentialSpec, pair: &AnglePair, z: C, tol: f64) -> Result<Self> {
        let f = fundamental_scaled(v, z, v.r, tol)?;
        let det = check_det(&f, v.r, pair.theta0, pair.theta_r, Operator::Main, tol)?;
        Ok(Solutions {
            v: v.clone(),
            pair: *pair,
            z,
            tol,
            fundamental: f,
            det,
        })
    }

    pub fn z(&self) -> C {
        self.z
    }

    pub fn pair(&self) -> AnglePair {
        self.pair
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.v
    }

    pub fn fundamental(&self) -> &ScaledFundamental {
        &self.fundamental
    }

    /// `Δ(z,R,θ0,θR)`, possibly overflowing for very large `Im √z · R`.
    pub fn char_det(&self) -> C {
        self.det * self.fundamental.log_scale.exp()
    }

    fn psi_minus(&self, x: f64) -> Result<Scaled> {
        let start = CauchyData::new(-sin_exact(self.pair.theta0), cos_exact(self.pair.theta0), 0.0);
        let (d, log) = propagate_scaled(&self.v, self.z, start, x, self.tol)?;
        Ok(Scaled { u: d.u, du: d.du, log })
    }

    fn psi_plus(&self, x: f64) -> Result<Scaled> {
        let start = CauchyData::new(sin_exact(self.pair.theta_r), cos_exact(self.pair.theta_r), self.v.r);
        let (d, log) = propagate_scaled(&self.v, self.z, start, x, self.tol)?;
        Ok(Scaled { u: d.u, du: d.du, log })
    }

    /// `1/W(ψ₊,ψ₋) = −1/Δ` as (mantissa, log scale).
    fn inv_wronskian(&self) -> (C, f64) {
        (-1.0 / self.det, -self.fundamental.log_scale)
    }

    /// `ψ₋(x)` and `ψ₋'(x)` (unscaled).
    pub fn left_solution(&self, x: f64) -> Result<CauchyData> {
        let s = self.psi_minus(x)?;
        let f = s.log.exp();
        Ok(CauchyData::new(s.u * f, s.du * f, x))
    }

    /// `ψ₊(x)` and `ψ₊'(x)` (unscaled).
    pub fn right_solution(&self, x: f64) -> Result<CauchyData> {
        let s = self.psi_plus(x)?;
        let f = s.log.exp();
        Ok(CauchyData::new(s.u * f, s.du * f, x))
    }

    /// Lower-wedge branch `ψ₋(x)ψ₊(x')/W` and its partial derivatives
    /// `(G, ∂ₓG, ∂ₓ'G, ∂ₓ∂ₓ'G)`, valid for any `x, x'` as an analytic function.
    pub fn wedge_derivatives(&self, x: f64, xp: f64) -> Result<[C; 4]> {
        let a = self.psi_minus(x)?;
        let b = self.psi_plus(xp)?;
        let (iw, lw) = self.inv_wronskian();
        let f = iw * (a.log + b.log + lw).exp();
        Ok([a.u * b.u * f, a.du * b.u * f, a.u * b.du * f, a.du * b.du * f])
    }

    pub fn green(&self, x: f64, xp: f64) -> Result<GreenEval> {
        for p in [x, xp] {
            if !(0.0..=self.v.r).contains(&p) {
                return Err(Error::Domain(format!("x = {p} outside [0, {}]", self.v.r)));
            }
        }
        let (lo, hi, wedge) = if x <= xp { (x, xp, Wedge::Lower) } else { (xp, x, Wedge::Upper) };
        let value = self.wedge_derivatives(lo, hi)?[0];
        Ok(GreenEval { value, z: self.z, x, xp, wedge })
    }

    /// `x ↦ (G(x,x'), ∂ₓG(x,x'))` for fixed `x'`.
    pub fn green_dx(&self, x: f64, xp: f64) -> Result<(C, C)> {
        if x <= xp {
            let d = self.wedge_derivatives(x, xp)?;
            Ok((d[0], d[1]))
        } else {
            let d = self.wedge_derivatives(xp, x)?;
            Ok((d[0], d[2]))
        }
    }

    fn combination(&self, plus: C, minus: C) -> SolutionCombination {
        SolutionCombination { sols: self.clone(), plus, minus }
    }
}

/// `x ↦ (plus·ψ₊(x) + minus·ψ₋(x))/W(ψ₊,ψ₋)`.
#[derive(Debug, Clone)]
pub struct SolutionCombination {
    sols: Solutions,
    plus: C,
    minus: C,
}

impl SolutionCombination {
    /// Value and derivative at `x`.
    pub fn eval(&self, x: f64) -> Result<(C, C)> {
        let (iw, lw) = self.sols.inv_wronskian();
        let mut val = ZERO;
        let mut der = ZERO;
        if self.plus != ZERO {
            let p = self.sols.psi_plus(x)?;
            let f = self.plus * iw * (p.log + lw).exp();
            val += p.u * f;
            der += p.du * f;
        }
        if self.minus != ZERO {
            let m = self.sols.psi_minus(x)?;
            let f = self.minus * iw * (m.log + lw).exp();
            val += m.u * f;
            der += m.du * f;
        }
        Ok((val, der))
    }

    pub fn value(&self, x: f64) -> Result<C> {
        Ok(self.eval(x)?.0)
    }

    pub fn is_zero(&self) -> bool {
        self.plus == ZERO && self.minus == ZERO
    }
}

pub fn green(v: &PotentialSpec, pair: &AnglePair, z: C, x: f64, xp: f64, tol: f64) -> Result<GreenEval> {
    Solutions::new(v, pair, z, tol)?.green(x, xp)
}

/// Row kernels `k1, k2` of `γ_{θ'}(H_{θ} − z)⁻¹`.
#[derive(Debug, Clone)]
pub struct ResolventRows {
    pub k1: SolutionCombination,
    pub k2: SolutionCombination,
}

impl ResolventRows {
    /// Apply both rows to `f` with an `n`-point Gauss–Legendre rule on `[0, R]`.
    pub fn apply<F: Fn(f64) -> Result<C>>(&self, f: F, n: usize) -> Result<[C; 2]> {
        let r = self.k1.sols.v.r;
        let mut out = [ZERO; 2];
        for (x, w) in gauss_legendre_on(n, 0.0, r) {
            let fx = f(x)?;
            out[0] += self.k1.value(x)? * fx * w;
            out[1] += self.k2.value(x)? * fx * w;
        }
        Ok(out)
    }
}

/// `k1(x') = [sin(θ0'−θ0)/W]·c₀·u₊(x')`, `k2(x') = [sin(θR'−θR)/W]·c_R·u₋(x')`.
///
/// `c₀` is `−u₋(0)/sin θ0` or `u₋'(0)/cos θ0` and `c_R` is `−u₊(R)/sin θR` or
/// `−u₊'(R)/cos θR`; where both forms exist they are required to agree.
pub fn gamma_resolvent_rows(
    v: &PotentialSpec,
    pair: &AnglePair,
    primed: &AnglePair,
    z: C,
    tol: f64,
) -> Result<ResolventRows> {
    let sols = Solutions::new(v, pair, z, tol)?;
    let b = basis_from_fundamental(&sols.fundamental, v.r, pair.theta0, pair.theta_r, tol)?;
    let (c0, s0) = (cos_exact(pair.theta0), sin_exact(pair.theta0));
    let (cr, sr) = (cos_exact(pair.theta_r), sin_exact(pair.theta_r));
    let pick = |a: Option<C>, b: Option<C>| -> Result<C> {
        match (a, b) {
            (Some(x), Some(y)) => {
                if (x - y).norm() > 1e-8 * x.norm().max(y.norm()) {
                    return Err(Error::Accuracy(format!("row-kernel constants disagree: {x} vs {y}")));
                }
                Ok(x)
            }
            (Some(x), None) | (None, Some(x)) => Ok(x),
            (None, None) => unreachable!("sin and cos cannot vanish together"),
        }
    };
    let nz = |c: C| if c == ZERO { None } else { Some(c) };
    let const0 = pick(nz(s0).map(|s| -b.uminus_at_0.u / s), nz(c0).map(|c| b.uminus_at_0.du / c))?;
    let const_r = pick(nz(sr).map(|s| -b.uplus_at_r.u / s), nz(cr).map(|c| -b.uplus_at_r.du / c))?;
    // Express through ψ±: u₊ = ψ₊/ψ₊(0), u₋ = ψ₋/ψ₋(R), W(u) = W(ψ)/(ψ₊(0)ψ₋(R)).
    // ψ₊(0) = −Δ(0,θR), ψ₋(R) = Δ(θ0,0), as mantissas sharing one log scale.
    let f = &sols.fundamental;
    let psi_plus_0 = -f.det(C::new(0.0, 0.0), pair.theta_r);
    let psi_minus_r = f.det(pair.theta0, C::new(0.0, 0.0));
    let [d0, dr] = AngleQuad::new(*pair, *primed).differences();
    let scale = f.log_scale.exp();
    let k1 = sin_exact(d0) * const0 * psi_minus_r * scale;
    let k2 = sin_exact(dr) * const_r * psi_plus_0 * scale;
    Ok(ResolventRows {
        k1: sols.combination(k1, ZERO),
        k2: sols.combination(ZERO, k2),
    })
}

/// `x ↦ [γ_{θ̄'}((H_θ)* − z̄)⁻¹]* v`, i.e.
/// `(1/W)·(γ'_0(u₋)·v₁·u₊(x) + γ'_R(u₊)·v₂·u₋(x))`.
pub fn adjoint_trace_kernel(
    v: &PotentialSpec,
    pair: &AnglePair,
    primed: &AnglePair,
    z: C,
    vec: [C; 2],
    tol: f64,
) -> Result<SolutionCombination> {
    let sols = Solutions::new(v, pair, z, tol)?;
    Ok(adjoint_kernel_from(&sols, primed, vec))
}

fn adjoint_kernel_from(sols: &Solutions, primed: &AnglePair, vec: [C; 2]) -> SolutionCombination {
    // γ'_0(ψ₋) and γ'_R(ψ₊) from the initial data of ψ± (exact).
    let pair = sols.pair;
    let left = trace_gamma(
        primed,
        [-sin_exact(pair.theta0), cos_exact(pair.theta0), ZERO, ZERO],
    )[0];
    let right = trace_gamma(
        primed,
        [ZERO, ZERO, sin_exact(pair.theta_r), cos_exact(pair.theta_r)],
    )[1];
    sols.combination(left * vec[0], right * vec[1])
}

/// `γ_{θ'}` applied to the adjoint trace kernels for `v = e₁, e₂`, as the columns
/// of a matrix. Equals `Λ^{θ'}_{θ}(z)·S_{θ'−θ}`.
pub fn adjoint_trace_matrix(sols: &Solutions, primed: &AnglePair) -> Result<Mat2> {
    let r = sols.v.r;
    let mut cols = [[ZERO; 2]; 2];
    for (j, e) in [[C::new(1.0, 0.0), ZERO], [ZERO, C::new(1.0, 0.0)]].iter().enumerate() {
        let k = adjoint_kernel_from(sols, primed, *e);
        let (u0, du0) = k.eval(0.0)?;
        let (ur, dur) = k.eval(r)?;
        cols[j] = trace_gamma(primed, [u0, du0, ur, dur]);
    }
    Ok(Mat2::new(cols[0][0], cols[1][0], cols[0][1], cols[1][1]))
}

/// Which of Krein's formulas applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KreinCase {
    /// Both angles changed: coupling `S_{θ'−θ}⁻¹ (Λ^{θ'}_{θ})⁻¹`.
    Both,
    /// Only `θR` changed: coupling `P₂ (Λ^{θ'}_{θ})⁻¹ P₂ / sin(θR'−θR)`.
    RightOnly,
    /// Only `θ0` changed: coupling `P₁ (Λ^{θ'}_{θ})⁻¹ P₁ / sin(θ0'−θ0)`.
    LeftOnly,
    /// `θ' = θ` (modulo π in each angle): no correction.
    Identity,
}

/// `Σ_{j,k} left_j(x)·coupling_{jk}·right_k(x')`.
#[derive(Debug, Clone)]
pub struct RankTwoKernel {
    pub left: [SolutionCombination; 2],
    pub coupling: Mat2,
    pub right: [SolutionCombination; 2],
    pub case: KreinCase,
}

impl RankTwoKernel {
    pub fn eval(&self, x: f64, xp: f64) -> Result<C> {
        if self.case == KreinCase::Identity {
            return Ok(ZERO);
        }
        let mut a = [ZERO; 2];
        let mut b = [ZERO; 2];
        for j in 0..2 {
            if !self.left[j].is_zero() {
                a[j] = self.left[j].value(x)?;
            }
            if !self.right[j].is_zero() {
                b[j] = self.right[j].value(xp)?;
            }
        }
        let mut s = ZERO;
        for j in 0..2 {
            for k in 0..2 {
                s += a[j] * self.coupling[(j, k)] * b[k];
            }
        }
        Ok(s)
    }
}

/// Krein's correction with `G_{θ'}(z,x,x') = G_θ(z,x,x') − K(x,x')`.
pub fn krein_kernel(v: &PotentialSpec, pair: &AnglePair, primed: &AnglePair, z: C, tol: f64) -> Result<RankTwoKernel> {
    let sols = Solutions::new(v, pair, z, tol)?;
    check_det(&sols.fundamental, v.r, primed.theta0, primed.theta_r, Operator::Primed, tol)?;
    let quad = AngleQuad::new(*pair, *primed);
    let [d0, dr] = quad.differences();
    let (s0, sr) = (sin_exact(d0), sin_exact(dr));
    let zero = C::new(0.0, 0.0);
    let case = match (s0 == zero, sr == zero) {
        (false, false) => KreinCase::Both,
        (true, false) => KreinCase::RightOnly,
        (false, true) => KreinCase::LeftOnly,
        (true, true) => KreinCase::Identity,
    };
    let one = C::new(1.0, 0.0);
    let a1 = adjoint_kernel_from(&sols, primed, [one, zero]);
    let a2 = adjoint_kernel_from(&sols, primed, [zero, one]);
    let coupling = if case == KreinCase::Identity {
        Mat2::zero()
    } else {
        let lam = crate::bdmap::map_from_fundamental(&sols.fundamental, v.r, &quad, tol)?;
        let lam_inv = lam.inv("inverse boundary data map in Krein's formula")?;
        match case {
            KreinCase::Both => quad.sin_diff().inv("S_{θ'−θ} in Krein's formula")? * lam_inv,
            KreinCase::RightOnly => Mat2::diag(zero, lam_inv[(1, 1)] / sr),
            KreinCase::LeftOnly => Mat2::diag(lam_inv[(0, 0)] / s0, zero),
            KreinCase::Identity => unreachable!(),
        }
    };
    Ok(RankTwoKernel {
        left: [a1.clone(), a2.clone()],
        coupling,
        right: [a1, a2],
        case,
    })
}

/// Value of Krein's correction at one point, with the formula that was used.
pub fn krein_correction(
    v: &PotentialSpec,
    pair: &AnglePair,
    primed: &AnglePair,
    z: C,
    x: f64,
    xp: f64,
    tol: f64,
) -> Result<(C, KreinCase)> {
    let k = krein_kernel(v, pair, primed, z, tol)?;
    Ok((k.eval(x, xp)?, k.case))
}

/// Residual of the Gauss–Legendre spot check of the row kernels: applying
/// `(k1, k2)` to `f = u₊(z,·)` against `γ_{θ'}` of `x ↦ ∫G(z,x,x')f(x')dx'`.
pub fn rows_quadrature_residual(
    v: &PotentialSpec,
    pair: &AnglePair,
    primed: &AnglePair,
    z: C,
    tol: f64,
) -> Result<f64> {
    let rows = gamma_resolvent_rows(v, pair, primed, z, tol)?;
    let sols = &rows.k1.sols;
    let b = basis_from_fundamental(&sols.fundamental, v.r, pair.theta0, pair.theta_r, tol)?;
    let norm = b.uplus_at_0.u; // = 1
    let u_plus = |x: f64| -> Result<C> {
        let d = propagate_scaled(v, z, b.uplus_at_r, x, tol)?;
        Ok(d.0.u * d.1.exp() / norm)
    };
    let lhs = rows.apply(u_plus, 64)?;
    let r = v.r;
    let mut w = [ZERO; 4];
    for (xp, wt) in gauss_legendre_on(64, 0.0, r) {
        let f = u_plus(xp)?;
        let (g0, dg0) = sols.green_dx(0.0, xp)?;
        let (gr, dgr) = sols.green_dx(r, xp)?;
        w[0] += g0 * f * wt;
        w[1] += dg0 * f * wt;
        w[2] += gr * f * wt;
        w[3] += dgr * f * wt;
    }
    let rhs = trace_gamma(primed, w);
    let scale = rhs[0].norm().max(rhs[1].norm()).max(1e-300);
    Ok(((lhs[0] - rhs[0]).norm()).max((lhs[1] - rhs[1]).norm()) / scale.max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::oracle_green_zero;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn free_dirichlet_green() {
        let v = PotentialSpec::zero(PI).unwrap();
        let g = green(&v, &AnglePair::dirichlet(), c(-1.0, 0.0), PI / 2.0, PI / 4.0, 1e-10).unwrap();
        let exact = (PI / 4.0).sinh() * (PI / 2.0).sinh() / PI.sinh();
        assert!((g.value - c(exact, 0.0)).norm() < 1e-9);
        assert_eq!(g.wedge, Wedge::Upper);
    }

    #[test]
    fn green_matches_free_oracle_robin() {
        let v = PotentialSpec::zero(2.0).unwrap();
        let pair = AnglePair::new(c(0.4, 0.1), c(2.0, -0.2));
        let z = c(3.0, 1.5);
        let s = Solutions::new(&v, &pair, z, 1e-11).unwrap();
        for (x, xp) in [(0.0, 0.5), (1.2, 0.3), (2.0, 2.0), (0.7, 1.9)] {
            let g = s.green(x, xp).unwrap().value;
            let o = oracle_green_zero(z, 2.0, pair.theta0, pair.theta_r, x, xp).unwrap();
            assert!((g - o).norm() < 1e-8 * o.norm().max(1.0), "{x} {xp}: {g} vs {o}");
        }
    }

    #[test]
    fn identity_rows_vanish() {
        let v = PotentialSpec::zero(1.0).unwrap();
        let p = AnglePair::real(0.3, 1.0);
        let rows = gamma_resolvent_rows(&v, &p, &p, c(0.0, 1.0), 1e-10).unwrap();
        assert!(rows.k1.value(0.4).unwrap().norm() == 0.0);
        assert!(rows.k2.value(0.4).unwrap().norm() == 0.0);
    }

    #[test]
    fn krein_free_both_angles() {
        let v = PotentialSpec::zero(PI).unwrap();
        let (p, q) = (AnglePair::dirichlet(), AnglePair::real(FRAC_PI_2, FRAC_PI_2));
        let z = c(0.0, 1.0);
        let k = krein_kernel(&v, &p, &q, z, 1e-11).unwrap();
        assert_eq!(k.case, KreinCase::Both);
        for i in 0..5 {
            for j in 0..5 {
                let (x, xp) = (PI * i as f64 / 4.0, PI * j as f64 / 4.0);
                let g = oracle_green_zero(z, PI, p.theta0, p.theta_r, x, xp).unwrap();
                let gp = oracle_green_zero(z, PI, q.theta0, q.theta_r, x, xp).unwrap();
                let corr = k.eval(x, xp).unwrap();
                assert!((gp - g + corr).norm() < 1e-8, "({x},{xp}): {}", (gp - g + corr).norm());
            }
        }
    }

    #[test]
    fn theorem_three_five_free() {
        let v = PotentialSpec::zero(1.5).unwrap();
        let p = AnglePair::real(0.4, 2.2);
        let q = AnglePair::real(1.9, 5.0);
        let z = c(1.0, 2.0);
        let s = Solutions::new(&v, &p, z, 1e-11).unwrap();
        let m = adjoint_trace_matrix(&s, &q).unwrap();
        let quad = AngleQuad::new(p, q);
        let lam = crate::bdmap::bdmap_general(&v, &quad, z, 1e-11).unwrap().matrix;
        assert!(m.rel_dist(&(lam * quad.sin_diff())) < 1e-8);
    }

    #[test]
    fn quadrature_spot_check() {
        let v = PotentialSpec::sampled(1.0, vec![0.0, 0.5, 1.0], vec![c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 0.0)]).unwrap();
        let r = rows_quadrature_residual(&v, &AnglePair::real(0.3, 1.0), &AnglePair::real(2.0, 0.5), c(0.5, 1.0), 1e-11)
            .unwrap();
        assert!(r < 1e-6, "{r}");
    }
}
