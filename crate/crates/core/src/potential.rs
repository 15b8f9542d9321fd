//! Potentials and the two exact oracles: the `V = 0` closed forms and the
//! transfer matrices of piecewise constant potentials.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat2::Mat2;

/// `√z` on the branch `Im √z ≥ 0` (nonnegative root for real `z ≥ 0`).
pub fn sqrt_branch(z: Complex64) -> Complex64 {
    let w = z.sqrt();
    if w.im < 0.0 || (w.im == 0.0 && w.re < 0.0) {
        -w
    } else {
        w
    }
}

/// `sin(k s)/k` with `k² = z`, using the Taylor series near `z = 0`.
pub fn sinc_k(z: Complex64, k: Complex64, s: f64) -> Complex64 {
    let zs2 = z * s * s;
    if zs2.norm() < 1e-4 {
        // s · Σ (−z s²)^n / (2n+1)!
        let mut term = Complex64::new(s, 0.0);
        let mut sum = term;
        for n in 1..6 {
            term *= -zs2 / ((2 * n) as f64 * (2 * n + 1) as f64);
            sum += term;
        }
        sum
    } else {
        (k * s).sin() / k
    }
}

/// Representation of `V ∈ L¹((0,R))`.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Zero,
    /// Constant on each piece; `values.len() == breakpoints.len() + 1`.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<Complex64>,
    },
    /// Piecewise linear interpolation of `values` on `grid` (`grid[0] = 0`, last = R).
    Sampled {
        grid: Vec<f64>,
        values: Vec<Complex64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub r: f64,
    pub kind: PotentialKind,
}

/// A maximal interval on which `V` is affine: `V(x) = v0 + slope·(x − a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: f64,
    pub b: f64,
    pub v0: Complex64,
    pub slope: Complex64,
}

impl Segment {
    #[inline]
    pub fn at(&self, x: f64) -> Complex64 {
        self.v0 + self.slope * (x - self.a)
    }
}

fn check_length(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidPotential(format!("interval length must be positive, got {r}")));
    }
    Ok(())
}

fn check_values(values: &[Complex64]) -> Result<()> {
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::InvalidPotential("non-finite potential value".into()));
    }
    Ok(())
}

impl PotentialSpec {
    pub fn zero(r: f64) -> Result<Self> {
        check_length(r)?;
        Ok(PotentialSpec { r, kind: PotentialKind::Zero })
    }

    pub fn constant(r: f64, v: Complex64) -> Result<Self> {
        PotentialSpec::piecewise_constant(r, vec![], vec![v])
    }

    pub fn piecewise_constant(r: f64, breakpoints: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        check_length(r)?;
        check_values(&values)?;
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidPotential(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        let mut prev = 0.0;
        for &b in &breakpoints {
            if !(b > prev && b < r) {
                return Err(Error::InvalidPotential(format!(
                    "breakpoints must be strictly increasing inside (0, {r}); offending value {b}"
                )));
            }
            prev = b;
        }
        Ok(PotentialSpec {
            r,
            kind: PotentialKind::PiecewiseConstant { breakpoints, values },
        })
    }

    pub fn sampled(r: f64, grid: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        check_length(r)?;
        check_values(&values)?;
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::InvalidPotential(
                "sampled potential needs at least two grid points and one value per point".into(),
            ));
        }
        if grid[0] != 0.0 || grid[grid.len() - 1] != r {
            return Err(Error::InvalidPotential(format!("grid must start at 0 and end at {r}")));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPotential("grid must be strictly increasing".into()));
        }
        Ok(PotentialSpec {
            r,
            kind: PotentialKind::Sampled { grid, values },
        })
    }

    /// Whether every value is real (the self-adjoint setting).
    pub fn is_real(&self) -> bool {
        match &self.kind {
            PotentialKind::Zero => true,
            PotentialKind::PiecewiseConstant { values, .. } | PotentialKind::Sampled { values, .. } => {
                values.iter().all(|v| v.im == 0.0)
            }
        }
    }

    /// The potential with conjugated values.
    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        match &mut out.kind {
            PotentialKind::Zero => {}
            PotentialKind::PiecewiseConstant { values, .. } | PotentialKind::Sampled { values, .. } => {
                values.iter_mut().for_each(|v| *v = v.conj());
            }
        }
        out
    }

    /// `∫₀ᴿ |V|`.
    pub fn l1_norm(&self) -> f64 {
        self.segments()
            .iter()
            .map(|s| {
                let (va, vb) = (s.v0.norm(), s.at(s.b).norm());
                if s.slope == Complex64::new(0.0, 0.0) {
                    va * (s.b - s.a)
                } else {
                    // |V| is not affine for complex slopes; Simpson on each linear piece is plenty
                    let vm = s.at(0.5 * (s.a + s.b)).norm();
                    (s.b - s.a) * (va + 4.0 * vm + vb) / 6.0
                }
            })
            .sum()
    }

    /// Pieces on which `V` is affine, covering `[0, R]` left to right.
    pub fn segments(&self) -> Vec<Segment> {
        let zero = Complex64::new(0.0, 0.0);
        match &self.kind {
            PotentialKind::Zero => vec![Segment { a: 0.0, b: self.r, v0: zero, slope: zero }],
            PotentialKind::PiecewiseConstant { breakpoints, values } => {
                let mut edges = Vec::with_capacity(breakpoints.len() + 2);
                edges.push(0.0);
                edges.extend_from_slice(breakpoints);
                edges.push(self.r);
                edges
                    .windows(2)
                    .zip(values)
                    .map(|(w, &v)| Segment { a: w[0], b: w[1], v0: v, slope: zero })
                    .collect()
            }
            PotentialKind::Sampled { grid, values } => grid
                .windows(2)
                .zip(values.windows(2))
                .map(|(g, v)| Segment {
                    a: g[0],
                    b: g[1],
                    v0: v[0],
                    slope: (v[1] - v[0]) / (g[1] - g[0]),
                })
                .collect(),
        }
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if !(0.0..=self.r).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, {}]", self.r)));
        }
        Ok(())
    }

    /// Value of the fixed representative at `x`; right limit at breakpoints.
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        self.check_x(x)?;
        Ok(match &self.kind {
            PotentialKind::Zero => Complex64::new(0.0, 0.0),
            PotentialKind::PiecewiseConstant { breakpoints, values } => {
                let idx = breakpoints.partition_point(|&b| b <= x);
                values[idx]
            }
            PotentialKind::Sampled { grid, values } => {
                let i = grid.partition_point(|&g| g <= x).clamp(1, grid.len() - 1) - 1;
                let t = (x - grid[i]) / (grid[i + 1] - grid[i]);
                values[i] + (values[i + 1] - values[i]) * t
            }
        })
    }
}

/// Free-space `f(z,s,α,β)`.
pub fn closed_form_f(z: Complex64, s: f64, alpha: Complex64, beta: Complex64) -> Complex64 {
    sqrt_branch(z) * f_reduced(z, s, alpha, beta)
}

/// Free-space `g(z,s,α,β) = f(z,s,α+π/2,β)`.
pub fn closed_form_g(z: Complex64, s: f64, alpha: Complex64, beta: Complex64) -> Complex64 {
    sqrt_branch(z) * g_reduced(z, s, alpha, beta)
}

/// `f/√z`, entire in `z`.
fn f_reduced(z: Complex64, s: f64, alpha: Complex64, beta: Complex64) -> Complex64 {
    let k = sqrt_branch(z);
    let sn = sinc_k(z, k, s);
    z * alpha.sin() * beta.sin() * sn + (alpha + beta).sin() * (k * s).cos() - alpha.cos() * beta.cos() * sn
}

/// `g/√z`, entire in `z`.
fn g_reduced(z: Complex64, s: f64, alpha: Complex64, beta: Complex64) -> Complex64 {
    let k = sqrt_branch(z);
    let sn = sinc_k(z, k, s);
    z * alpha.cos() * beta.sin() * sn + (alpha + beta).cos() * (k * s).cos() + alpha.sin() * beta.cos() * sn
}

/// Scale below which a characteristic determinant counts as zero. Below
/// `rel = max(1e-12, tol)` the computed value is dominated by integration error.
pub(crate) fn det_threshold(z: Complex64, r: f64, tol: f64) -> f64 {
    tol.max(1e-12) * z.norm().max(1.0).sqrt() * (sqrt_branch(z).im * r).exp()
}

fn free_det(z: Complex64, r: f64, theta0: Complex64, theta_r: Complex64) -> Result<Complex64> {
    // For V = 0 the characteristic determinant is −f/√z.
    let d = -f_reduced(z, r, theta0, theta_r);
    if d.norm() < det_threshold(z, r, 0.0) {
        return Err(Error::EigenvalueHit {
            z,
            operator: crate::error::Operator::Main,
            det_abs: d.norm(),
        });
    }
    Ok(d)
}

/// Robin-to-Robin map `Λ_{θ0,θR}(z)` for `V = 0` on `[0, R]`.
pub fn oracle_bdmap_zero(z: Complex64, r: f64, theta0: Complex64, theta_r: Complex64) -> Result<Mat2> {
    let d = free_det(z, r, theta0, theta_r)?;
    let off = Complex64::new(1.0, 0.0) / d;
    // g/f = g_red/f_red = −g_red/Δ
    Ok(Mat2::new(
        -g_reduced(z, r, theta0, theta_r) / d,
        off,
        off,
        -g_reduced(z, r, theta_r, theta0) / d,
    ))
}

/// Green's function of `H_{θ0,θR}` for `V = 0`.
pub fn oracle_green_zero(
    z: Complex64,
    r: f64,
    theta0: Complex64,
    theta_r: Complex64,
    x: f64,
    xp: f64,
) -> Result<Complex64> {
    if !(0.0..=r).contains(&x) || !(0.0..=r).contains(&xp) {
        return Err(Error::Domain(format!("points ({x}, {xp}) outside [0, {r}]")));
    }
    let d = free_det(z, r, theta0, theta_r)?;
    let zero = Complex64::new(0.0, 0.0);
    let lo = x.min(xp);
    let hi = x.max(xp);
    // f·f/(−√z f) with every f = √z·f_red collapses to f_red·f_red/Δ.
    Ok(f_reduced(z, lo, theta0, zero) * f_reduced(z, r - hi, zero, theta_r) / d)
}

/// Propagator of `−u'' + v u = z u` over a distance `d` with constant `v`.
pub(crate) fn constant_propagator(z: Complex64, v: Complex64, d: f64) -> Mat2 {
    let w = z - v;
    let k = sqrt_branch(w);
    let c = (k * d).cos();
    let s = sinc_k(w, k, d);
    Mat2::new(c, s, -w * s, c)
}

/// Transfer matrix `T` with `(u(b), u'(b)) = T (u(a), u'(a))` for piecewise constant `V`.
pub fn transfer_matrix_piecewise(v: &PotentialSpec, z: Complex64, a: f64, b: f64) -> Result<Mat2> {
    let zero_pot = matches!(v.kind, PotentialKind::Zero);
    if !zero_pot && !matches!(v.kind, PotentialKind::PiecewiseConstant { .. }) {
        return Err(Error::Unsupported("transfer matrices need a piecewise constant potential".into()));
    }
    if !(0.0 <= a && a <= b && b <= v.r) {
        return Err(Error::Domain(format!("need 0 ≤ a ≤ b ≤ R, got a = {a}, b = {b}")));
    }
    let mut t = Mat2::identity();
    for seg in v.segments() {
        let lo = seg.a.max(a);
        let hi = seg.b.min(b);
        if hi > lo {
            t = constant_propagator(z, seg.v0, hi - lo) * t;
        }
    }
    Ok(t)
}
