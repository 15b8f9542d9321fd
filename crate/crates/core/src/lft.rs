//! Linear fractional transformations of 2×2 matrices by 4×4 block matrices,
//! the class `𝒜₄ = {A : A*J₄A = J₄}`, and the connector matrices relating
//! boundary data maps with different angle quads.

use num_complex::Complex64;

use crate::bdmap::bdmap_general;
use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::potential::PotentialSpec;
use crate::traces::{diag_cos, diag_sin, AnglePair, AngleQuad};

type C = Complex64;

/// `A = [[A₁₁, A₁₂], [A₂₁, A₂₂]]` with 2×2 blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block4 {
    pub a11: Mat2,
    pub a12: Mat2,
    pub a21: Mat2,
    pub a22: Mat2,
}

impl Block4 {
    pub fn new(a11: Mat2, a12: Mat2, a21: Mat2, a22: Mat2) -> Self {
        Block4 { a11, a12, a21, a22 }
    }

    pub fn identity() -> Self {
        Block4::new(Mat2::identity(), Mat2::zero(), Mat2::zero(), Mat2::identity())
    }

    /// `J₄ = [[0, −I], [I, 0]]`.
    pub fn j4() -> Self {
        Block4::new(Mat2::zero(), -Mat2::identity(), Mat2::identity(), Mat2::zero())
    }

    pub fn to_array(&self) -> [[C; 4]; 4] {
        let mut out = [[C::default(); 4]; 4];
        for (bi, row) in [[&self.a11, &self.a12], [&self.a21, &self.a22]].iter().enumerate() {
            for (bj, blk) in row.iter().enumerate() {
                for i in 0..2 {
                    for j in 0..2 {
                        out[2 * bi + i][2 * bj + j] = blk[(i, j)];
                    }
                }
            }
        }
        out
    }

    pub fn from_array(a: &[[C; 4]; 4]) -> Self {
        let blk = |bi: usize, bj: usize| {
            Mat2::new(
                a[2 * bi][2 * bj],
                a[2 * bi][2 * bj + 1],
                a[2 * bi + 1][2 * bj],
                a[2 * bi + 1][2 * bj + 1],
            )
        };
        Block4::new(blk(0, 0), blk(0, 1), blk(1, 0), blk(1, 1))
    }

    pub fn adjoint(&self) -> Self {
        Block4::new(self.a11.adjoint(), self.a21.adjoint(), self.a12.adjoint(), self.a22.adjoint())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        [self.a11, self.a12, self.a21, self.a22]
            .iter()
            .map(Mat2::max_abs)
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        [self.a11, self.a12, self.a21, self.a22].iter().all(Mat2::is_finite)
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    pub fn inv(&self) -> Result<Self> {
        let mut a = self.to_array();
        let mut b = Block4::identity().to_array();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..4 {
            let piv = (col..4)
                .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
                .unwrap_or(col);
            if a[piv][col].norm() <= 1e-14 * scale {
                return Err(Error::Singular {
                    context: "4×4 block matrix".into(),
                    cond: f64::INFINITY,
                });
            }
            a.swap(col, piv);
            b.swap(col, piv);
            let p = a[col][col];
            for k in 0..4 {
                a[col][k] /= p;
                b[col][k] /= p;
            }
            for r in 0..4 {
                if r != col {
                    let f = a[r][col];
                    for k in 0..4 {
                        let (ack, bck) = (a[col][k], b[col][k]);
                        a[r][k] -= f * ack;
                        b[r][k] -= f * bck;
                    }
                }
            }
        }
        Ok(Block4::from_array(&b))
    }
}

impl std::ops::Mul for Block4 {
    type Output = Block4;
    fn mul(self, o: Block4) -> Block4 {
        Block4::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

impl std::ops::Sub for Block4 {
    type Output = Block4;
    fn sub(self, o: Block4) -> Block4 {
        Block4::new(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)
    }
}

/// `M_A(L) = (A₂₁ + A₂₂L)(A₁₁ + A₁₂L)⁻¹`.
pub fn moebius(a: &Block4, l: &Mat2) -> Result<Mat2> {
    let den = (a.a11 + a.a12 * *l).inv("Möbius denominator A₁₁ + A₁₂L")?;
    Ok((a.a21 + a.a22 * *l) * den)
}

/// Membership in `𝒜₄`: returns whether `‖A*J₄A − J₄‖ < tol` and the residual.
pub fn in_class_a4(a: &Block4, tol: f64) -> (bool, f64) {
    let j = Block4::j4();
    let res = (a.adjoint() * j * *a - j).max_abs();
    (res < tol, res)
}

/// `S_{a−b}` for angle pairs.
fn s_diff(a: &AnglePair, b: &AnglePair) -> Mat2 {
    diag_sin(a.theta0 - b.theta0, a.theta_r - b.theta_r)
}

fn check_difference(q: &AngleQuad, what: &str) -> Result<()> {
    for d in q.differences() {
        if d.sin().norm() < 1e-12 {
            return Err(Error::Degenerate(format!(
                "{what}: primed and base angles coincide mod π"
            )));
        }
    }
    Ok(())
}

/// The connector `A(θ, δ)` with `Λ^{θ'}_{θ}S_{θ'−θ} = M_{A(θ,δ)}(Λ^{δ'}_{δ}S_{δ'−δ})`.
pub fn connector(quad: &AngleQuad, reference: &AngleQuad) -> Result<Block4> {
    if !quad.is_real() || !reference.is_real() {
        return Err(Error::Domain("the connector is defined for real angles only".into()));
    }
    check_difference(quad, "θ")?;
    check_difference(reference, "δ")?;
    let (t, tp) = (&quad.base, &quad.primed);
    let (d, dp) = (&reference.base, &reference.primed);
    let s_t = s_diff(tp, t).inv("S_{θ'−θ}")?;
    let s_d = s_diff(dp, d).inv("S_{δ'−δ}")?;
    Ok(Block4::new(
        s_t * s_diff(dp, t),
        s_t * s_d * s_diff(t, d),
        s_diff(dp, tp),
        s_d * s_diff(tp, d),
    ))
}

/// `Im M_A(L) − P⁻*·Im L·P⁻¹` with `P = A₁₁ + A₁₂L`, relative to `‖Im M_A(L)‖`.
pub fn congruence_residual(a: &Block4, l: &Mat2) -> Result<f64> {
    let m = moebius(a, l)?;
    let p_inv = (a.a11 + a.a12 * *l).inv("Möbius denominator A₁₁ + A₁₂L")?;
    let rhs = p_inv.adjoint() * l.im_part() * p_inv;
    Ok(m.im_part().rel_dist(&rhs))
}

/// Residuals of the relations between `Λ^{quadA}` and `Λ^{quadB}`; entries that
/// do not apply to the given quads are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct LftResiduals {
    /// General sandwich relation through `Λ^{δ'}_{δ}`.
    pub sandwich: f64,
    /// The `S`-multiplied Möbius form with the connector matrix.
    pub connector_form: Option<f64>,
    /// Robin-to-Robin form, when both quads are Robin quads.
    pub robin_form: Option<f64>,
    /// Representation through the Dirichlet-to-Neumann map `Λ_{0,0}`.
    pub dirichlet_reference: Option<f64>,
}

impl LftResiduals {
    pub fn max(&self) -> f64 {
        [Some(self.sandwich), self.connector_form, self.robin_form, self.dirichlet_reference]
            .iter()
            .flatten()
            .fold(0.0, |a, &b| f64::max(a, b))
    }
}

/// Check `Λ^{quadA}(z)` against the transformations of `Λ^{quadB}(z)`.
pub fn verify_lft_relation(
    v: &PotentialSpec,
    quad_a: &AngleQuad,
    quad_b: &AngleQuad,
    z: C,
    tol: f64,
) -> Result<LftResiduals> {
    check_difference(quad_b, "δ")?;
    let la = bdmap_general(v, quad_a, z, tol)?.matrix;
    let lb = bdmap_general(v, quad_b, z, tol)?.matrix;
    let (t, tp) = (&quad_a.base, &quad_a.primed);
    let (d, dp) = (&quad_b.base, &quad_b.primed);
    let sd = s_diff(dp, d);
    let sd_inv = sd.inv("S_{δ'−δ}")?;
    let num = s_diff(dp, tp) + s_diff(tp, d) * lb;
    let den = (s_diff(dp, t) + s_diff(t, d) * lb).inv("inner factor S_{δ'−θ} + S_{θ−δ}Λ^{δ'}_{δ}")?;
    let sandwich = la.rel_dist(&(sd_inv * num * den * sd));

    let connector_form = if quad_a.is_real() && quad_b.is_real() && check_difference(quad_a, "θ").is_ok() {
        let a = connector(quad_a, quad_b)?;
        let lhs = la * quad_a.sin_diff();
        Some(lhs.rel_dist(&moebius(&a, &(lb * sd))?))
    } else {
        None
    };

    let robin_form = if *quad_a == AngleQuad::robin(*t) && *quad_b == AngleQuad::robin(*d) {
        let (dt0, dtr) = (t.theta0 - d.theta0, t.theta_r - d.theta_r);
        let (s, c) = (diag_sin(dt0, dtr), diag_cos(dt0, dtr));
        let inner = (c + s * lb).inv("C_{θ−δ} + S_{θ−δ}Λ_δ")?;
        Some(la.rel_dist(&((c * lb - s) * inner)))
    } else {
        None
    };

    let dirichlet_reference = match bdmap_general(v, &AngleQuad::robin(AnglePair::dirichlet()), z, tol) {
        Ok(l00) => {
            let l00 = l00.matrix;
            let num = diag_cos(tp.theta0, tp.theta_r) + diag_sin(tp.theta0, tp.theta_r) * l00;
            let den = (diag_cos(t.theta0, t.theta_r) + diag_sin(t.theta0, t.theta_r) * l00)
                .inv("C_θ + S_θΛ_{0,0}")?;
            Some(la.rel_dist(&(num * den)))
        }
        Err(Error::EigenvalueHit { .. }) => None,
        Err(e) => return Err(e),
    };

    Ok(LftResiduals {
        sandwich,
        connector_form,
        robin_form,
        dirichlet_reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn sample_block() -> Block4 {
        Block4::new(
            Mat2::new(c(1.0, 0.2), c(0.3, 0.0), c(-0.4, 0.1), c(0.9, 0.0)),
            Mat2::new(c(0.2, 0.0), c(0.0, 0.5), c(0.1, 0.0), c(-0.3, 0.2)),
            Mat2::new(c(0.0, 0.1), c(0.7, 0.0), c(0.2, 0.0), c(0.1, -0.1)),
            Mat2::new(c(1.1, 0.0), c(0.0, 0.0), c(0.3, 0.3), c(0.8, 0.0)),
        )
    }

    #[test]
    fn identity_and_inverse_round_trip() {
        let l = Mat2::new(c(0.3, 1.0), c(0.2, 0.0), c(0.2, 0.0), c(-0.5, 2.0));
        assert!(moebius(&Block4::identity(), &l).unwrap().rel_dist(&l) < 1e-15);
        let a = sample_block();
        let back = moebius(&a.inv().unwrap(), &moebius(&a, &l).unwrap()).unwrap();
        assert!(back.rel_dist(&l) < 1e-12);
        let prod = (a * a.inv().unwrap() - Block4::identity()).max_abs();
        assert!(prod < 1e-14);
    }

    #[test]
    fn connector_collapses_to_identity() {
        let q = AngleQuad::new(AnglePair::real(0.0, 0.0), AnglePair::real(FRAC_PI_2, FRAC_PI_2));
        let a = connector(&q, &q).unwrap();
        assert!((a - Block4::identity()).max_abs() < 1e-15);
    }

    #[test]
    fn connector_lies_in_class() {
        let q = AngleQuad::new(AnglePair::real(0.3, 2.0), AnglePair::real(1.4, 5.5));
        let r = AngleQuad::new(AnglePair::real(4.0, 0.1), AnglePair::real(0.7, 1.0));
        let a = connector(&q, &r).unwrap();
        assert!(in_class_a4(&a, 1e-12).0);
        assert!(in_class_a4(&a.inv().unwrap(), 1e-12).0);
    }

    #[test]
    fn connector_rejects_degenerate_quads() {
        let q = AngleQuad::new(AnglePair::real(0.3, 2.0), AnglePair::real(0.3 + PI, 1.0));
        let r = AngleQuad::robin(AnglePair::dirichlet());
        assert!(matches!(connector(&q, &r), Err(Error::Degenerate(_))));
    }

    #[test]
    fn free_relations() {
        let v = PotentialSpec::zero(PI).unwrap();
        let qa = AngleQuad::robin(AnglePair::real(0.4, 1.2));
        let qb = AngleQuad::robin(AnglePair::real(2.0, 0.3));
        let r = verify_lft_relation(&v, &qa, &qb, c(0.0, 1.0), 1e-11).unwrap();
        assert!(r.robin_form.is_some() && r.connector_form.is_some());
        assert!(r.max() < 1e-9, "{r:?}");
        let same = verify_lft_relation(&v, &qb, &qb, c(0.0, 1.0), 1e-11).unwrap();
        assert!(same.sandwich < 1e-13);
    }

    #[test]
    fn congruence_of_imaginary_parts() {
        let q = AngleQuad::new(AnglePair::real(0.3, 2.0), AnglePair::real(1.4, 5.5));
        let a = connector(&q, &AngleQuad::robin(AnglePair::dirichlet())).unwrap();
        let l = Mat2::new(c(0.1, 2.0), c(0.3, 0.2), c(0.3, -0.2), c(1.0, 1.0));
        assert!(congruence_residual(&a, &l).unwrap() < 1e-12);
        assert!(moebius(&a, &l).unwrap().im_part().hermitian_eigenvalues()[0] > 0.0);
    }
}
