//! Eigenvalues of `H_{θ0,θR}` as zeros of the characteristic determinant `Δ`.
//!
//! The self-adjoint search counts eigenvalues below `λ` with a modified Prüfer
//! angle, so every bracket is known to hold exactly one eigenvalue before `Δ` is
//! polished. The rectangle search counts zeros with the argument principle,
//! following the phase of `Δ` along the boundary with adaptive refinement, and
//! quadrisects until each cell holds at most one zero.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::odecore::{fundamental_scaled, integrate};
use crate::potential::{det_threshold, PotentialSpec};
use crate::traces::{cos_exact, sin_exact, AnglePair};

type C = Complex64;

/// Region that was searched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// The lowest `n` eigenvalues on the real line.
    Lowest { n: usize },
    /// The closed rectangle `[re_min, re_max] × [im_min, im_max]`.
    Rectangle(Rect),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_min < re_max && im_min < im_max) || ![re_min, re_max, im_min, im_max].iter().all(|x| x.is_finite()) {
            return Err(Error::Domain("rectangle must have positive finite extent".into()));
        }
        Ok(Rect { re_min, re_max, im_min, im_max })
    }

    pub fn contains(&self, z: C) -> bool {
        (self.re_min..=self.re_max).contains(&z.re) && (self.im_min..=self.im_max).contains(&z.im)
    }

    fn corners(&self) -> [C; 4] {
        [
            C::new(self.re_min, self.im_min),
            C::new(self.re_max, self.im_min),
            C::new(self.re_max, self.im_max),
            C::new(self.re_min, self.im_max),
        ]
    }

    fn diameter(&self) -> f64 {
        (self.re_max - self.re_min).hypot(self.im_max - self.im_min)
    }

    fn split(&self, fr: f64, fi: f64) -> [Rect; 4] {
        let xm = self.re_min + fr * (self.re_max - self.re_min);
        let ym = self.im_min + fi * (self.im_max - self.im_min);
        [
            Rect { re_min: self.re_min, re_max: xm, im_min: self.im_min, im_max: ym },
            Rect { re_min: xm, re_max: self.re_max, im_min: self.im_min, im_max: ym },
            Rect { re_min: self.re_min, re_max: xm, im_min: ym, im_max: self.im_max },
            Rect { re_min: xm, re_max: self.re_max, im_min: ym, im_max: self.im_max },
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<C>,
    /// `|Δ(λ)|` at each reported eigenvalue.
    pub residuals: Vec<f64>,
    /// Number of zeros represented by each entry (greater than one only for
    /// clusters the search could not separate).
    pub multiplicities: Vec<usize>,
    pub window: Window,
}

impl SpectrumResult {
    /// Total number of zeros, counted with multiplicity.
    pub fn count(&self) -> usize {
        self.multiplicities.iter().sum()
    }
}

/// Two eigenvalues closer than this are treated as one.
pub fn cluster_tol(lambda: C) -> f64 {
    1e-8 * lambda.norm().max(1.0)
}

/// Acceptance scale for `|Δ|` at a computed eigenvalue.
pub fn residual_scale(z: C, r: f64, tol: f64) -> f64 {
    det_threshold(z, r, tol)
}

/// `Δ(z)` as mantissa and log scale.
fn delta_scaled(v: &PotentialSpec, pair: &AnglePair, z: C, tol: f64) -> Result<(C, f64)> {
    let f = fundamental_scaled(v, z, v.r, tol)?;
    Ok((f.det(pair.theta0, pair.theta_r), f.log_scale))
}

fn delta(v: &PotentialSpec, pair: &AnglePair, z: C, tol: f64) -> Result<C> {
    let (m, l) = delta_scaled(v, pair, z, tol)?;
    Ok(m * l.exp())
}

/// Newton step `Δ/Δ'` with a central difference for `Δ'`.
fn newton_step(v: &PotentialSpec, pair: &AnglePair, z: C, tol: f64) -> Result<(C, C)> {
    let h = 1e-6 * z.norm().max(1.0);
    let (m0, l0) = delta_scaled(v, pair, z, tol)?;
    let (mp, lp) = delta_scaled(v, pair, z + h, tol)?;
    let (mm, lm) = delta_scaled(v, pair, z - h, tol)?;
    let d = (mp * (lp - l0).exp() - mm * (lm - l0).exp()) / (2.0 * h);
    if d == C::new(0.0, 0.0) {
        return Err(Error::SearchFailure(format!("Δ' vanishes numerically at {z}")));
    }
    Ok((m0 / d, m0 * l0.exp()))
}

fn polish(v: &PotentialSpec, pair: &AnglePair, mut z: C, tol: f64) -> Result<C> {
    for _ in 0..60 {
        let (step, _) = newton_step(v, pair, z, tol)?;
        z -= step;
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::SearchFailure("Newton iteration diverged".into()));
        }
        if step.norm() <= 1e-14 * z.norm().max(1.0) {
            return Ok(z);
        }
    }
    Ok(z)
}

fn max_abs_potential(v: &PotentialSpec) -> f64 {
    v.segments()
        .iter()
        .map(|s| s.v0.norm().max(s.at(s.b).norm()))
        .fold(0.0, f64::max)
}

/// Prüfer data for the real self-adjoint problem.
struct Prufer<'a> {
    v: &'a PotentialSpec,
    pair: AnglePair,
    vmax: f64,
    tol: f64,
}

impl Prufer<'_> {
    /// Number of eigenvalues strictly below `lambda`.
    fn count_below(&self, lambda: f64) -> Result<usize> {
        let k = lambda.abs().max(1.0).sqrt();
        let (s0, c0) = (sin_exact(self.pair.theta0).re, cos_exact(self.pair.theta0).re);
        let (sr, cr) = (sin_exact(self.pair.theta_r).re, cos_exact(self.pair.theta_r).re);
        // Modified angle: tan ϑ = k u/u'. Left condition gives (u, u') ∝ (−s0, c0),
        // right condition (u, u') ∝ (sR, cR).
        let alpha = (k * -s0).atan2(c0).rem_euclid(PI);
        let mut beta = (k * sr).atan2(cr).rem_euclid(PI);
        if beta == 0.0 {
            beta = PI;
        }
        let rate = k + (lambda.abs() + self.vmax) / k;
        let n = ((self.v.r * rate / (0.45 * PI)).ceil() as usize).max(1);
        let dx = self.v.r / n as f64;
        let z = C::new(lambda, 0.0);
        let mut y = [C::new(-s0, 0.0), C::new(c0, 0.0)];
        let mut raw = (k * y[0].re).atan2(y[1].re);
        let mut angle = alpha;
        for i in 0..n {
            let x1 = if i + 1 == n { self.v.r } else { (i + 1) as f64 * dx };
            let (yn, _) = integrate(self.v, z, y, i as f64 * dx, x1, self.tol)?;
            let norm = yn[0].norm().hypot(yn[1].norm());
            y = [yn[0] / norm, yn[1] / norm];
            let r = (k * y[0].re).atan2(y[1].re);
            angle += (r - raw + PI).rem_euclid(2.0 * PI) - PI;
            raw = r;
        }
        let x = (angle - beta) / PI;
        Ok(if x <= 0.0 { 0 } else { x.ceil() as usize })
    }
}

/// Initial upper guess for the `n`-th (from zero) eigenvalue, from the free
/// problem's zero pattern.
fn asymptotic_guess(pair: &AnglePair, r: f64, n: usize, vmax: f64) -> f64 {
    let d0 = sin_exact(pair.theta0) == C::new(0.0, 0.0);
    let dr = sin_exact(pair.theta_r) == C::new(0.0, 0.0);
    let sigma = match (d0, dr) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.5,
        (false, false) => 0.0,
    };
    // Half a gap above the free eigenvalue, so the guess never sits on a zero.
    ((n as f64 + sigma + 0.5) * PI / r).powi(2) + vmax
}

/// Bisection on the real line between points with `Δ` of opposite signs, with
/// Newton acceleration where the step stays inside the bracket.
fn refine_real(v: &PotentialSpec, pair: &AnglePair, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let fa = delta(v, pair, C::new(a, 0.0), tol)?.re;
    let fb = delta(v, pair, C::new(b, 0.0), tol)?.re;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::SearchFailure(format!("Δ has no sign change on [{a}, {b}]")));
    }
    let sa = fa.signum();
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let (step, val) = newton_step(v, pair, C::new(x, 0.0), tol)?;
        if val.re == 0.0 {
            return Ok(x);
        }
        if val.re.signum() == sa {
            a = x;
        } else {
            b = x;
        }
        let cand = x - step.re;
        x = if cand >= a && cand <= b { cand } else { 0.5 * (a + b) };
        if step.re.abs() <= 1e-14 * x.abs().max(1.0) || (b - a) <= 1e-15 * x.abs().max(1.0) {
            return Ok(x);
        }
    }
    Ok(x)
}

fn check_real(v: &PotentialSpec, pair: &AnglePair) -> Result<()> {
    if !v.is_real() {
        return Err(Error::Domain("the real-line search needs a real potential".into()));
    }
    if !pair.is_real() {
        return Err(Error::Domain("the real-line search needs real boundary angles".into()));
    }
    Ok(())
}

/// Number of eigenvalues of the self-adjoint problem strictly below `lambda`.
pub fn count_below(v: &PotentialSpec, pair: &AnglePair, lambda: f64, tol: f64) -> Result<usize> {
    check_real(v, pair)?;
    Prufer { v, pair: *pair, vmax: max_abs_potential(v), tol }.count_below(lambda)
}

/// The lowest `n_max` eigenvalues of the self-adjoint problem.
pub fn eig_selfadjoint(v: &PotentialSpec, pair: &AnglePair, n_max: usize, tol: f64) -> Result<SpectrumResult> {
    check_real(v, pair)?;
    let vmax = max_abs_potential(v);
    let pr = Prufer { v, pair: *pair, vmax, tol };
    // Lower bound below the whole spectrum.
    let mut lo = -(vmax + 1.0);
    while pr.count_below(lo)? > 0 {
        lo *= 4.0;
        if lo < -1e12 {
            return Err(Error::SearchFailure("no lower bound for the spectrum".into()));
        }
    }
    let mut eigenvalues = Vec::with_capacity(n_max);
    let mut residuals = Vec::with_capacity(n_max);
    for n in 0..n_max {
        // Invariant: count_below(a) ≤ n < count_below(b).
        let mut a = lo;
        let mut b = asymptotic_guess(pair, v.r, n, vmax).max(a + 1.0);
        let mut nb = pr.count_below(b)?;
        while nb <= n {
            a = b;
            b += (b - lo).max(1.0);
            nb = pr.count_below(b)?;
            if b > 1e14 {
                return Err(Error::SearchFailure(format!("eigenvalue {n} not bracketed")));
            }
        }
        let mut na = pr.count_below(a)?;
        while !(na == n && nb == n + 1) {
            let m = 0.5 * (a + b);
            if (b - a) <= 1e-13 * m.abs().max(1.0) {
                return Err(Error::SearchFailure(format!(
                    "eigenvalues {na}..{nb} could not be separated near {m}"
                )));
            }
            let nm = pr.count_below(m)?;
            if nm <= n {
                a = m;
                na = nm;
            } else {
                b = m;
                nb = nm;
            }
        }
        // The bracket holds exactly one eigenvalue by the oscillation count, so a
        // missing sign change of Δ means the two counts disagree.
        let lambda = refine_real(v, pair, a, b, tol)?;
        let res = delta(v, pair, C::new(lambda, 0.0), tol)?.norm();
        eigenvalues.push(C::new(lambda, 0.0));
        residuals.push(res);
        lo = b;
    }
    Ok(SpectrumResult {
        multiplicities: vec![1; eigenvalues.len()],
        eigenvalues,
        residuals,
        window: Window::Lowest { n: n_max },
    })
}

/// Phase tracker for `Δ` along straight segments.
struct Contour<'a> {
    v: &'a PotentialSpec,
    pair: AnglePair,
    tol: f64,
    scale: f64,
}

const MAX_PHASE_STEP: f64 = PI / 4.0;

impl Contour<'_> {
    fn arg_at(&self, z: C) -> Result<(f64, f64)> {
        let (m, l) = delta_scaled(self.v, &self.pair, z, self.tol)?;
        let abs = m.norm() * l.exp();
        if abs < det_threshold(z, self.v.r, self.tol) {
            return Err(Error::ZeroOnContour { suggested_inflation: self.scale * 1e-3 });
        }
        Ok((m.arg(), abs))
    }

    /// Phase change of `Δ` from `a` to `b`.
    fn edge_phase(&self, a: C, b: C) -> Result<f64> {
        const START: usize = 8;
        let mut total = 0.0;
        let mut pa = self.arg_at(a)?;
        for i in 1..=START {
            let zb = a + (b - a) * (i as f64 / START as f64);
            let za = a + (b - a) * ((i - 1) as f64 / START as f64);
            let pb = self.arg_at(zb)?;
            total += self.refine(za, pa, zb, pb, 0)?;
            pa = pb;
        }
        Ok(total)
    }

    fn refine(&self, a: C, pa: (f64, f64), b: C, pb: (f64, f64), depth: u32) -> Result<f64> {
        let step = wrap(pb.0 - pa.0);
        let ratio = pa.1.max(pb.1) / pa.1.min(pb.1);
        if step.abs() < MAX_PHASE_STEP && ratio < 4.0 {
            return Ok(step);
        }
        if depth > 40 || (b - a).norm() < 1e-12 * self.scale {
            return Err(Error::ZeroOnContour { suggested_inflation: self.scale * 1e-3 });
        }
        let m = 0.5 * (a + b);
        let pm = self.arg_at(m)?;
        Ok(self.refine(a, pa, m, pm, depth + 1)? + self.refine(m, pm, b, pb, depth + 1)?)
    }

    /// Winding number of `Δ` around the rectangle.
    fn count(&self, rect: &Rect) -> Result<usize> {
        let c = rect.corners();
        let mut total = 0.0;
        for i in 0..4 {
            total += self.edge_phase(c[i], c[(i + 1) % 4])?;
        }
        let w = total / (2.0 * PI);
        let n = w.round();
        if (w - n).abs() > 0.1 || n < 0.0 {
            return Err(Error::ZeroOnContour { suggested_inflation: self.scale * 1e-3 });
        }
        Ok(n as usize)
    }
}

fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

/// Number of zeros of `Δ` inside the rectangle, by the argument principle.
pub fn count_in_rectangle(v: &PotentialSpec, pair: &AnglePair, rect: &Rect, tol: f64) -> Result<usize> {
    let c = Contour { v, pair: *pair, tol, scale: rect.diameter() };
    c.count(rect)
}

/// All eigenvalues inside a rectangle of the complex plane.
pub fn eig_rectangle(v: &PotentialSpec, pair: &AnglePair, rect: &Rect, tol: f64) -> Result<SpectrumResult> {
    let contour = Contour { v, pair: *pair, tol, scale: rect.diameter() };
    let total = contour.count(rect)?;
    let mut found: Vec<(C, usize)> = Vec::new();
    if total > 0 {
        search_cell(&contour, rect, total, &mut found)?;
    }
    found.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    let mut merged: Vec<(C, usize)> = Vec::new();
    for (z, k) in found {
        match merged.last_mut() {
            Some((w, m)) if (*w - z).norm() <= cluster_tol(z) => *m += k,
            _ => merged.push((z, k)),
        }
    }
    let mut residuals = Vec::with_capacity(merged.len());
    for (z, _) in &merged {
        residuals.push(delta(v, pair, *z, tol)?.norm());
    }
    Ok(SpectrumResult {
        eigenvalues: merged.iter().map(|p| p.0).collect(),
        multiplicities: merged.iter().map(|p| p.1).collect(),
        residuals,
        window: Window::Rectangle(*rect),
    })
}

fn search_cell(c: &Contour, rect: &Rect, count: usize, out: &mut Vec<(C, usize)>) -> Result<()> {
    let center = C::new(0.5 * (rect.re_min + rect.re_max), 0.5 * (rect.im_min + rect.im_max));
    if count == 1 {
        if let Ok(z) = polish(c.v, &c.pair, center, c.tol) {
            if rect.contains(z) {
                out.push((z, 1));
                return Ok(());
            }
        }
    }
    if rect.diameter() <= cluster_tol(center) {
        let z = polish(c.v, &c.pair, center, c.tol).unwrap_or(center);
        out.push((z, count));
        return Ok(());
    }
    // Split near the middle; shift the cut if a zero sits on it.
    let mut last_err = None;
    for shift in [0.0, 0.0371, -0.0529, 0.0813, -0.1127] {
        let cells = rect.split(0.5 + shift, 0.5 - 0.7 * shift);
        let counts: Result<Vec<usize>> = cells.iter().map(|r| c.count(r)).collect();
        match counts {
            Ok(counts) if counts.iter().sum::<usize>() == count => {
                for (cell, k) in cells.iter().zip(counts) {
                    if k > 0 {
                        search_cell(c, cell, k, out)?;
                    }
                }
                return Ok(());
            }
            Ok(counts) => {
                last_err = Some(Error::SearchFailure(format!(
                    "sub-cell counts {counts:?} do not add up to {count}"
                )))
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::SearchFailure("cell search failed".into())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn free_dirichlet() {
        let v = PotentialSpec::zero(PI).unwrap();
        let s = eig_selfadjoint(&v, &AnglePair::dirichlet(), 5, 1e-12).unwrap();
        for (n, e) in s.eigenvalues.iter().enumerate() {
            let want = ((n + 1) * (n + 1)) as f64;
            assert!((e.re - want).abs() < 1e-9 * want, "{e} vs {want}");
        }
    }

    #[test]
    fn free_mixed() {
        let v = PotentialSpec::zero(PI).unwrap();
        let s = eig_selfadjoint(&v, &AnglePair::real(0.0, FRAC_PI_2), 4, 1e-12).unwrap();
        for (n, e) in s.eigenvalues.iter().enumerate() {
            let want = (n as f64 + 0.5).powi(2);
            assert!((e.re - want).abs() < 1e-9 * want.max(1.0), "{e} vs {want}");
        }
    }

    #[test]
    fn constant_shift() {
        let v = PotentialSpec::constant(PI, c(3.0, 0.0)).unwrap();
        let s = eig_selfadjoint(&v, &AnglePair::dirichlet(), 3, 1e-12).unwrap();
        for (n, e) in s.eigenvalues.iter().enumerate() {
            let want = ((n + 1) * (n + 1)) as f64 + 3.0;
            assert!((e.re - want).abs() < 1e-9 * want, "{e} vs {want}");
        }
    }

    #[test]
    fn negative_robin_eigenvalue() {
        // u'(0) = −2u(0) and Neumann at R: one negative eigenvalue.
        let v = PotentialSpec::zero(3.0).unwrap();
        let theta0 = 0.5f64.atan();
        let s = eig_selfadjoint(&v, &AnglePair::real(theta0, FRAC_PI_2), 2, 1e-12).unwrap();
        assert!(s.eigenvalues[0].re < 0.0);
        assert!(s.eigenvalues[1].re > 0.0);
    }

    #[test]
    fn rectangle_free() {
        let v = PotentialSpec::zero(PI).unwrap();
        let rect = Rect::new(0.5, 4.5, -1.0, 1.0).unwrap();
        let s = eig_rectangle(&v, &AnglePair::dirichlet(), &rect, 1e-11).unwrap();
        assert_eq!(s.eigenvalues.len(), 2);
        assert!((s.eigenvalues[0] - c(1.0, 0.0)).norm() < 1e-9);
        assert!((s.eigenvalues[1] - c(4.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn rectangle_complex_shift() {
        let v = PotentialSpec::constant(PI, c(0.0, 1.0)).unwrap();
        let rect = Rect::new(0.0, 10.0, 0.0, 2.0).unwrap();
        let s = eig_rectangle(&v, &AnglePair::dirichlet(), &rect, 1e-11).unwrap();
        assert_eq!(s.eigenvalues.len(), 3);
        for (n, e) in s.eigenvalues.iter().enumerate() {
            let want = c(((n + 1) * (n + 1)) as f64, 1.0);
            assert!((e - want).norm() < 1e-9, "{e}");
        }
    }

    #[test]
    fn empty_rectangle() {
        let v = PotentialSpec::zero(PI).unwrap();
        let rect = Rect::new(-5.0, 0.5, -1.0, 1.0).unwrap();
        assert_eq!(count_in_rectangle(&v, &AnglePair::dirichlet(), &rect, 1e-10).unwrap(), 0);
    }

    #[test]
    fn zero_on_contour() {
        let v = PotentialSpec::zero(PI).unwrap();
        let rect = Rect::new(1.0, 3.0, -1.0, 1.0).unwrap();
        let e = eig_rectangle(&v, &AnglePair::dirichlet(), &rect, 1e-10);
        assert!(matches!(e, Err(Error::ZeroOnContour { .. })), "{e:?}");
    }

    #[test]
    fn complex_angles_rejected_on_real_line() {
        let v = PotentialSpec::zero(PI).unwrap();
        let pair = AnglePair::new(c(0.3, 0.1), c(0.0, 0.0));
        assert!(matches!(eig_selfadjoint(&v, &pair, 2, 1e-10), Err(Error::Domain(_))));
    }
}
