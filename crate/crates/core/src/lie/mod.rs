//! Matrix Lie groups and their Lie algebras.
//!
//! Every group is stored as complex `n x n` matrices so that SU(2), SO(3),
//! U(1) and the vector group share one element type. Algebra elements are
//! coefficient vectors in the basis carried by the group.
//!
//! Shipped groups and their algebra bases:
//!
//! * SU(2): `e_k = -i sigma_k / 2`, so `[e_1, e_2] = e_3` and `exp(t e_3)` covers
//!   the rotation by `t` about the third axis.
//! * SO(3): the standard skew generators `L_k` with `[L_1, L_2] = L_3`.
//! * U(1): the single generator `i`.
//! * the vector group `(R^k, +)`, embedded as positive diagonal matrices with
//!   basis `E_jj`.

pub mod crossed;
pub mod expm;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use expm::expm;

/// Complex matrix used for every group element.
pub type Mat = DMatrix<Complex64>;

/// Coefficient vector of a Lie algebra element in the basis of its group.
pub type AlgebraVec = DVector<f64>;

/// Default Frobenius tolerance for equality of Lie group elements.
pub const LIE_TOL: f64 = 1e-9;

/// Distance to the cut locus below which `log` refuses to answer.
const CUT_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Su2,
    So3,
    U1,
    Vector { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Real,
    Complex,
}

/// A matrix Lie group together with a basis of its Lie algebra.
pub struct MatrixLieGroup {
    kind: GroupKind,
    name: String,
    n: usize,
    field: Field,
    basis: Vec<Mat>,
    gram_inv: DMatrix<f64>,
    /// `structure[i]` is the matrix of `ad(e_i)` in the basis.
    structure: Vec<DMatrix<f64>>,
}

impl fmt::Debug for MatrixLieGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixLieGroup")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("dim", &self.basis.len())
            .finish()
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn real_inner(a: &Mat, b: &Mat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Pauli matrices.
pub fn pauli() -> [Mat; 3] {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        Mat::from_row_slice(2, 2, &[z, one, one, z]),
        Mat::from_row_slice(2, 2, &[z, -i, i, z]),
        Mat::from_row_slice(2, 2, &[one, z, z, -one]),
    ]
}

impl MatrixLieGroup {
    fn build(kind: GroupKind, name: &str, n: usize, field: Field, basis: Vec<Mat>) -> Arc<Self> {
        let dim = basis.len();
        let gram = DMatrix::from_fn(dim, dim, |i, j| real_inner(&basis[i], &basis[j]));
        let gram_inv = gram
            .try_inverse()
            .expect("algebra basis must be linearly independent");
        let mut group = MatrixLieGroup {
            kind,
            name: name.to_string(),
            n,
            field,
            basis,
            gram_inv,
            structure: Vec::new(),
        };
        let structure = (0..dim)
            .map(|i| {
                let mut ad = DMatrix::zeros(dim, dim);
                for j in 0..dim {
                    let bracket =
                        &group.basis[i] * &group.basis[j] - &group.basis[j] * &group.basis[i];
                    ad.set_column(j, &group.vee(&bracket));
                }
                ad
            })
            .collect();
        group.structure = structure;
        Arc::new(group)
    }

    pub fn su2() -> Arc<Self> {
        let basis = pauli().iter().map(|s| s * c(0.0, -0.5)).collect::<Vec<_>>();
        Self::build(GroupKind::Su2, "SU(2)", 2, Field::Complex, basis)
    }

    pub fn so3() -> Arc<Self> {
        let r = |v: [f64; 9]| Mat::from_row_slice(3, 3, &v.map(|x| c(x, 0.0)));
        let basis = vec![
            r([0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]),
            r([0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0]),
            r([0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        ];
        Self::build(GroupKind::So3, "SO(3)", 3, Field::Real, basis)
    }

    pub fn u1() -> Arc<Self> {
        let basis = vec![Mat::from_element(1, 1, c(0.0, 1.0))];
        Self::build(GroupKind::U1, "U(1)", 1, Field::Complex, basis)
    }

    pub fn vector(k: usize) -> Arc<Self> {
        assert!(k >= 1, "vector group needs k >= 1");
        let basis = (0..k)
            .map(|j| {
                let mut m = Mat::zeros(k, k);
                m[(j, j)] = c(1.0, 0.0);
                m
            })
            .collect();
        Self::build(
            GroupKind::Vector { k },
            &format!("R^{k}"),
            k,
            Field::Real,
            basis,
        )
    }

    /// Looks a shipped group up by name (`su2`, `so3`, `u1`, `r<k>`).
    pub fn by_name(name: &str) -> Result<Arc<Self>> {
        match name.to_ascii_lowercase().as_str() {
            "su2" | "su(2)" => Ok(Self::su2()),
            "so3" | "so(3)" => Ok(Self::so3()),
            "u1" | "u(1)" => Ok(Self::u1()),
            other => other
                .strip_prefix('r')
                .and_then(|k| k.trim_start_matches('^').parse::<usize>().ok())
                .filter(|k| *k >= 1)
                .map(Self::vector)
                .ok_or_else(|| Error::Fixture(format!("unknown group '{name}'"))),
        }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Matrix size `n`.
    pub fn matrix_dim(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Dimension of the Lie algebra.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Mat] {
        &self.basis
    }

    /// Matrix of the algebra element with coefficients `x`.
    pub fn hat(&self, x: &AlgebraVec) -> Mat {
        debug_assert_eq!(x.len(), self.dim());
        let mut m = Mat::zeros(self.n, self.n);
        for (coef, b) in x.iter().zip(&self.basis) {
            m += b * c(*coef, 0.0);
        }
        m
    }

    /// Coefficients of the orthogonal projection of `m` onto the algebra.
    pub fn vee(&self, m: &Mat) -> AlgebraVec {
        let rhs = DVector::from_iterator(self.dim(), self.basis.iter().map(|b| real_inner(b, m)));
        &self.gram_inv * rhs
    }

    /// Lie bracket in coordinates.
    pub fn bracket(&self, x: &AlgebraVec, y: &AlgebraVec) -> AlgebraVec {
        self.ad_matrix(x) * y
    }

    /// Matrix of `ad(x)` acting on coefficient vectors.
    pub fn ad_matrix(&self, x: &AlgebraVec) -> DMatrix<f64> {
        let dim = self.dim();
        let mut ad = DMatrix::zeros(dim, dim);
        for (coef, s) in x.iter().zip(&self.structure) {
            ad += s * *coef;
        }
        ad
    }

    /// Right-trivialized differential of `exp`: for a curve `Y(s)` with
    /// `Y(0) = y` and `Y'(0) = z`, returns `(d/ds exp(Y(s))) exp(-y)` at `s = 0`.
    pub fn dexp_right(&self, y: &AlgebraVec, z: &AlgebraVec) -> AlgebraVec {
        let ad = self.ad_matrix(y);
        let mut term = z.clone();
        let mut sum = z.clone();
        for k in 1..80 {
            term = &ad * term / (k as f64 + 1.0);
            sum += &term;
            if term.norm() <= 1e-18 * (1.0 + sum.norm()) {
                break;
            }
        }
        sum
    }

    pub fn identity(self: &Arc<Self>) -> GroupElement {
        GroupElement::new_unchecked(self.clone(), Mat::identity(self.n, self.n))
    }

    /// Wraps a matrix as an element without projecting it.
    pub fn element(self: &Arc<Self>, mat: Mat) -> GroupElement {
        assert_eq!(mat.shape(), (self.n, self.n), "matrix has the wrong size");
        GroupElement::new_unchecked(self.clone(), mat)
    }

    /// Wraps a matrix as an element after projecting it onto the group.
    pub fn element_projected(self: &Arc<Self>, mat: Mat) -> GroupElement {
        let p = self.project(&mat);
        GroupElement::new_unchecked(self.clone(), p)
    }

    /// Closed-form exponential.
    pub fn exp(self: &Arc<Self>, x: &AlgebraVec) -> GroupElement {
        GroupElement::new_unchecked(self.clone(), self.exp_matrix(x))
    }

    fn exp_matrix(&self, x: &AlgebraVec) -> Mat {
        assert_eq!(x.len(), self.dim(), "algebra vector has the wrong length");
        match self.kind {
            GroupKind::Su2 => {
                let theta = x.norm();
                let half = 0.5 * theta;
                let sinc = if half > 1e-6 {
                    half.sin() / half
                } else {
                    1.0 - half * half / 6.0
                };
                Mat::identity(2, 2) * c(half.cos(), 0.0) + self.hat(x) * c(sinc, 0.0)
            }
            GroupKind::So3 => {
                let theta = x.norm();
                let (a, b) = if theta > 1e-6 {
                    (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
                } else {
                    (1.0 - theta * theta / 6.0, 0.5 - theta * theta / 24.0)
                };
                let k = self.hat(x);
                Mat::identity(3, 3) + &k * c(a, 0.0) + &k * &k * c(b, 0.0)
            }
            GroupKind::U1 => Mat::from_element(1, 1, c(0.0, x[0]).exp()),
            GroupKind::Vector { k } => Mat::from_diagonal(&DVector::from_iterator(
                k,
                x.iter().map(|v| c(v.exp(), 0.0)),
            )),
        }
    }

    /// Closed-form principal logarithm.
    pub fn log(&self, g: &GroupElement) -> Result<AlgebraVec> {
        self.log_matrix(&g.mat)
    }

    fn log_matrix(&self, m: &Mat) -> Result<AlgebraVec> {
        match self.kind {
            GroupKind::Su2 => {
                let cos_half = 0.5 * (m[(0, 0)] + m[(1, 1)]).re;
                let w = self.vee(&((m - m.adjoint()) * c(0.5, 0.0)));
                let sin_half = 0.5 * w.norm();
                let half = sin_half.atan2(cos_half);
                if std::f64::consts::PI - half < CUT_MARGIN {
                    return Err(self.branch_error(2.0 * half));
                }
                let factor = if sin_half > 1e-12 {
                    half / sin_half
                } else {
                    1.0 / cos_half
                };
                Ok(w * factor)
            }
            GroupKind::So3 => {
                let cos_t = 0.5 * ((m[(0, 0)] + m[(1, 1)] + m[(2, 2)]).re - 1.0);
                let w = self.vee(&((m - m.transpose()) * c(0.5, 0.0)));
                let sin_t = w.norm();
                let theta = sin_t.atan2(cos_t);
                if std::f64::consts::PI - theta < CUT_MARGIN {
                    return Err(self.branch_error(theta));
                }
                let factor = if sin_t > 1e-12 {
                    theta / sin_t
                } else {
                    1.0 / cos_t
                };
                Ok(w * factor)
            }
            GroupKind::U1 => {
                let angle = m[(0, 0)].arg();
                if std::f64::consts::PI - angle.abs() < CUT_MARGIN {
                    return Err(self.branch_error(angle));
                }
                Ok(DVector::from_element(1, angle))
            }
            GroupKind::Vector { k } => {
                let mut out = DVector::zeros(k);
                for j in 0..k {
                    let d = m[(j, j)].re;
                    if d <= 0.0 {
                        return Err(self.branch_error(d));
                    }
                    out[j] = d.ln();
                }
                Ok(out)
            }
        }
    }

    fn branch_error(&self, angle: f64) -> Error {
        Error::LogBranch {
            group: self.name.clone(),
            angle,
        }
    }

    /// Adjoint action `Ad(g) x`, the coordinates of `g X g^-1`.
    pub fn adjoint(&self, g: &GroupElement, x: &AlgebraVec) -> AlgebraVec {
        let ginv = self.inverse_matrix(&g.mat);
        self.vee(&(&g.mat * self.hat(x) * ginv))
    }

    fn inverse_matrix(&self, m: &Mat) -> Mat {
        match self.kind {
            GroupKind::Su2 | GroupKind::So3 | GroupKind::U1 => m.adjoint(),
            GroupKind::Vector { .. } => Mat::from_diagonal(&m.diagonal().map(|d| d.inv())),
        }
    }

    /// Nearest-point projection onto the group: quaternion normalization for
    /// SU(2), phase normalization for U(1), Gram-Schmidt for SO(3), and the
    /// positive real diagonal part for the vector group.
    pub fn project(&self, m: &Mat) -> Mat {
        match self.kind {
            GroupKind::Su2 => {
                let a = (m[(0, 0)] + m[(1, 1)].conj()) * 0.5;
                let b = (m[(0, 1)] - m[(1, 0)].conj()) * 0.5;
                let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
                let (a, b) = (a / norm, b / norm);
                Mat::from_row_slice(2, 2, &[a, b, -b.conj(), a.conj()])
            }
            GroupKind::U1 => {
                let z = m[(0, 0)];
                Mat::from_element(1, 1, z / z.norm())
            }
            GroupKind::So3 => {
                let r = m.map(|z| z.re);
                let c0 = r.column(0).normalize();
                let v1 = r.column(1) - &c0 * c0.dot(&r.column(1));
                let c1 = v1.normalize();
                let c2 = c0.cross(&c1);
                let mut out = Mat::zeros(3, 3);
                for i in 0..3 {
                    out[(i, 0)] = c(c0[i], 0.0);
                    out[(i, 1)] = c(c1[i], 0.0);
                    out[(i, 2)] = c(c2[i], 0.0);
                }
                out
            }
            GroupKind::Vector { k } => Mat::from_diagonal(&DVector::from_iterator(
                k,
                (0..k).map(|j| c(m[(j, j)].re.abs(), 0.0)),
            )),
        }
    }

    /// Size of the violation of the defining equations of the group.
    pub fn membership_residual(&self, m: &Mat) -> f64 {
        let n = self.n;
        match self.kind {
            GroupKind::Su2 => {
                (m.adjoint() * m - Mat::identity(n, n)).norm()
                    + (m.determinant() - c(1.0, 0.0)).norm()
            }
            GroupKind::U1 => (m[(0, 0)].norm() - 1.0).abs(),
            GroupKind::So3 => {
                let imag: f64 = m.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
                (m.transpose() * m - Mat::identity(n, n)).norm()
                    + (m.determinant() - c(1.0, 0.0)).norm()
                    + imag
            }
            GroupKind::Vector { .. } => {
                let mut off = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let z = m[(i, j)];
                        if i == j {
                            off += z.im * z.im + if z.re > 0.0 { 0.0 } else { 1.0 };
                        } else {
                            off += z.norm_sqr();
                        }
                    }
                }
                off.sqrt()
            }
        }
    }

    /// Draws `exp(x)` with `x` uniform in the coordinate box `[-scale, scale]^dim`.
    pub fn sample<R: Rng + ?Sized>(self: &Arc<Self>, rng: &mut R, scale: f64) -> GroupElement {
        let x = self.sample_algebra(rng, scale);
        self.exp(&x)
    }

    /// Uniform draw from the coordinate box `[-scale, scale]^dim`.
    pub fn sample_algebra<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> AlgebraVec {
        DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|_| rng.gen_range(-scale..=scale)),
        )
    }
}

/// An element of a matrix Lie group, carrying a handle to its group.
#[derive(Clone)]
pub struct GroupElement {
    mat: Mat,
    group: Arc<MatrixLieGroup>,
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.group.name, self.mat)
    }
}

impl GroupElement {
    fn new_unchecked(group: Arc<MatrixLieGroup>, mat: Mat) -> Self {
        GroupElement { mat, group }
    }

    pub fn matrix(&self) -> &Mat {
        &self.mat
    }

    pub fn group(&self) -> &Arc<MatrixLieGroup> {
        &self.group
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        debug_assert!(
            Arc::ptr_eq(&self.group, &other.group) || self.group.kind == other.group.kind,
            "multiplying elements of different groups"
        );
        GroupElement::new_unchecked(self.group.clone(), &self.mat * &other.mat)
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement::new_unchecked(self.group.clone(), self.group.inverse_matrix(&self.mat))
    }

    /// `self^-1 * other`.
    pub fn left_div(&self, other: &GroupElement) -> GroupElement {
        self.inverse().mul(other)
    }

    /// `self * other^-1`.
    pub fn right_div(&self, other: &GroupElement) -> GroupElement {
        self.mul(&other.inverse())
    }

    pub fn log(&self) -> Result<AlgebraVec> {
        self.group.log(self)
    }

    /// `Ad(self) x`.
    pub fn adjoint(&self, x: &AlgebraVec) -> AlgebraVec {
        self.group.adjoint(self, x)
    }

    /// Frobenius distance between the matrices.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        (&self.mat - &other.mat).norm()
    }

    pub fn membership_residual(&self) -> f64 {
        self.group.membership_residual(&self.mat)
    }

    pub fn project(&self) -> GroupElement {
        GroupElement::new_unchecked(self.group.clone(), self.group.project(&self.mat))
    }

    /// Point `self * exp(s * log(self^-1 other))` on the one-parameter
    /// subgroup joining the two elements; falls back to projected linear
    /// interpolation when the relative element is at the cut locus.
    pub fn interpolate(&self, other: &GroupElement, s: f64) -> GroupElement {
        if s == 0.0 {
            return self.clone();
        }
        if s == 1.0 {
            return other.clone();
        }
        match self.left_div(other).log() {
            Ok(x) => self.mul(&self.group.exp(&(x * s))),
            Err(_) => {
                let m = &self.mat * c(1.0 - s, 0.0) + &other.mat * c(s, 0.0);
                self.group.element_projected(m)
            }
        }
    }
}

impl std::ops::Mul for &GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: &GroupElement) -> GroupElement {
        GroupElement::mul(self, rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn v(xs: &[f64]) -> AlgebraVec {
        DVector::from_column_slice(xs)
    }

    fn all_groups() -> Vec<Arc<MatrixLieGroup>> {
        vec![
            MatrixLieGroup::su2(),
            MatrixLieGroup::so3(),
            MatrixLieGroup::u1(),
            MatrixLieGroup::vector(3),
        ]
    }

    #[test]
    fn exp_of_zero_is_identity() {
        for g in all_groups() {
            let e = g.exp(&DVector::zeros(g.dim()));
            assert!(e.distance(&g.identity()) < 1e-15, "{}", g.name());
        }
    }

    #[test]
    fn structure_constants_follow_the_cross_product() {
        for g in [MatrixLieGroup::su2(), MatrixLieGroup::so3()] {
            let b = g.bracket(&v(&[1.0, 0.0, 0.0]), &v(&[0.0, 1.0, 0.0]));
            assert!((b - v(&[0.0, 0.0, 1.0])).norm() < 1e-15, "{}", g.name());
        }
    }

    #[test]
    fn su2_exp_matches_euler_formula() {
        let g = MatrixLieGroup::su2();
        let theta = PI / 2.0;
        let u = g.exp(&v(&[0.0, 0.0, theta]));
        let expected = Mat::from_row_slice(
            2,
            2,
            &[
                c((theta / 2.0).cos(), -(theta / 2.0).sin()),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c((theta / 2.0).cos(), (theta / 2.0).sin()),
            ],
        );
        assert!((u.matrix() - expected).norm() <= 1e-12);
    }

    #[test]
    fn closed_forms_agree_with_pade_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for g in all_groups() {
            for _ in 0..50 {
                let x = g.sample_algebra(&mut rng, 2.0);
                let closed = g.exp(&x);
                let pade = expm(&g.hat(&x));
                assert!((closed.matrix() - pade).norm() < 1e-12, "{}", g.name());
            }
        }
    }

    #[test]
    fn log_inverts_exp_on_the_unit_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for g in all_groups() {
            let mut worst: f64 = 0.0;
            for _ in 0..1000 {
                let mut x = g.sample_algebra(&mut rng, 1.0);
                if x.norm() > 1.0 {
                    x /= x.norm();
                }
                let back = g.exp(&x).log().unwrap();
                worst = worst.max((back - &x).norm());
            }
            assert!(worst <= 1e-9, "{} worst {worst:e}", g.name());
        }
    }

    #[test]
    fn log_rejects_the_cut_locus() {
        let su2 = MatrixLieGroup::su2();
        let minus_one = su2.element(Mat::identity(2, 2) * c(-1.0, 0.0));
        assert!(matches!(minus_one.log(), Err(Error::LogBranch { .. })));
        let so3 = MatrixLieGroup::so3();
        assert!(matches!(
            so3.exp(&v(&[PI, 0.0, 0.0])).log(),
            Err(Error::LogBranch { .. })
        ));
        let u1 = MatrixLieGroup::u1();
        assert!(matches!(
            u1.exp(&v(&[PI])).log(),
            Err(Error::LogBranch { .. })
        ));
    }

    #[test]
    fn adjoint_by_identity_is_trivial_and_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for g in all_groups() {
            for _ in 0..100 {
                let x = g.sample_algebra(&mut rng, 1.0);
                assert!((g.identity().adjoint(&x) - &x).norm() < 1e-15);
                let a = g.sample(&mut rng, 1.0);
                let b = g.sample(&mut rng, 1.0);
                let lhs = a.mul(&b).adjoint(&x);
                let rhs = a.adjoint(&b.adjoint(&x));
                assert!((lhs - rhs).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn adjoint_linearizes_to_the_bracket_at_second_order() {
        let g = MatrixLieGroup::su2();
        let x = v(&[0.3, -0.7, 0.4]);
        let y = v(&[0.5, 0.2, -0.9]);
        let err = |eps: f64| {
            let ye = &y * eps;
            let lhs = g.exp(&ye).adjoint(&x);
            (lhs - &x - g.bracket(&ye, &x)).norm()
        };
        let slope = (err(1e-2) / err(5e-3)).log2();
        assert!((slope - 2.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn projection_is_idempotent_and_repairs_drift() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for g in all_groups() {
            for _ in 0..50 {
                let a = g.sample(&mut rng, 1.5);
                let noise = Mat::from_fn(g.matrix_dim(), g.matrix_dim(), |_, _| {
                    c(rng.gen_range(-1e-3..1e-3), 0.0)
                });
                let p = g.project(&(a.matrix() + noise));
                assert!(g.membership_residual(&p) < 1e-12, "{}", g.name());
                assert!((g.project(&p) - &p).norm() < 1e-14, "{}", g.name());
                assert!((g.project(a.matrix()) - a.matrix()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dexp_right_matches_finite_differences() {
        let g = MatrixLieGroup::su2();
        let y = v(&[0.8, -1.1, 0.5]);
        let z = v(&[0.2, 0.4, -0.3]);
        let h = 1e-6;
        let plus = g.exp(&(&y + &z * h));
        let minus = g.exp(&(&y - &z * h));
        let fd = plus.right_div(&minus).log().unwrap() / (2.0 * h);
        assert!((g.dexp_right(&y, &z) - fd).norm() < 1e-8);
    }

    #[test]
    fn interpolation_hits_endpoints_and_midpoint() {
        let g = MatrixLieGroup::so3();
        let a = g.exp(&v(&[0.1, 0.2, 0.3]));
        let x = v(&[0.0, 0.4, 0.0]);
        let b = a.mul(&g.exp(&x));
        let mid = a.interpolate(&b, 0.5);
        assert!(mid.distance(&a.mul(&g.exp(&(x * 0.5)))) < 1e-14);
    }

    #[test]
    fn group_lookup_by_name() {
        assert_eq!(
            MatrixLieGroup::by_name("su2").unwrap().kind(),
            GroupKind::Su2
        );
        assert_eq!(
            MatrixLieGroup::by_name("r4").unwrap().kind(),
            GroupKind::Vector { k: 4 }
        );
        assert!(MatrixLieGroup::by_name("sl2").is_err());
    }
}
