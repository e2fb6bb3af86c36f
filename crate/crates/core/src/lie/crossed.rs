//! Lie crossed modules `(G, H, alpha, tau)` with their algebra-level maps.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{pauli, AlgebraVec, GroupElement, GroupKind, Mat, MatrixLieGroup};

pub type TauFn = Arc<dyn Fn(&GroupElement) -> GroupElement + Send + Sync>;
pub type AlphaFn = Arc<dyn Fn(&GroupElement, &GroupElement) -> GroupElement + Send + Sync>;
pub type AlphaStarFn = Arc<dyn Fn(&GroupElement, &AlgebraVec) -> AlgebraVec + Send + Sync>;

/// A Lie crossed module. `tau_star` is the differential of `tau` at the
/// identity and `alpha_star(g, .)` the differential of `alpha_g`.
#[derive(Clone)]
pub struct LieCrossedModule {
    name: String,
    g: Arc<MatrixLieGroup>,
    h: Arc<MatrixLieGroup>,
    tau: TauFn,
    alpha: AlphaFn,
    tau_star: DMatrix<f64>,
    alpha_star: AlphaStarFn,
}

impl fmt::Debug for LieCrossedModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LieCrossedModule")
            .field("name", &self.name)
            .field("g", &self.g.name())
            .field("h", &self.h.name())
            .finish()
    }
}

impl LieCrossedModule {
    pub fn new(
        name: &str,
        g: Arc<MatrixLieGroup>,
        h: Arc<MatrixLieGroup>,
        tau: TauFn,
        alpha: AlphaFn,
        tau_star: DMatrix<f64>,
        alpha_star: AlphaStarFn,
    ) -> Self {
        assert_eq!(
            tau_star.shape(),
            (g.dim(), h.dim()),
            "tau_star has the wrong shape"
        );
        LieCrossedModule {
            name: name.to_string(),
            g,
            h,
            tau,
            alpha,
            tau_star,
            alpha_star,
        }
    }

    /// The inner-automorphism crossed module `(G, G, id, conjugation)`.
    pub fn inner(group: Arc<MatrixLieGroup>) -> Self {
        let dim = group.dim();
        let name = format!("inner {}", group.name());
        LieCrossedModule::new(
            &name,
            group.clone(),
            group,
            Arc::new(|h: &GroupElement| h.clone()),
            Arc::new(|g: &GroupElement, h: &GroupElement| g.mul(h).mul(&g.inverse())),
            DMatrix::identity(dim, dim),
            Arc::new(|g: &GroupElement, x: &AlgebraVec| g.adjoint(x)),
        )
    }

    /// `(SU(2), SU(2), id, conjugation)`.
    pub fn su2_inner() -> Self {
        Self::inner(MatrixLieGroup::su2())
    }

    /// `(SO(3), SU(2), double cover, lifted conjugation)`.
    pub fn so3_su2() -> Self {
        let so3 = MatrixLieGroup::so3();
        let su2 = MatrixLieGroup::su2();
        let so3_for_tau = so3.clone();
        let su2_for_alpha = su2.clone();
        LieCrossedModule::new(
            "SO(3) over SU(2)",
            so3,
            su2,
            Arc::new(move |u: &GroupElement| double_cover(&so3_for_tau, u)),
            Arc::new(move |r: &GroupElement, h: &GroupElement| {
                let lift = su2_lift(&su2_for_alpha, r);
                lift.mul(h).mul(&lift.inverse())
            }),
            DMatrix::identity(3, 3),
            Arc::new(|r: &GroupElement, x: &AlgebraVec| {
                let real = r.matrix().map(|z| z.re);
                real * x
            }),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn g(&self) -> &Arc<MatrixLieGroup> {
        &self.g
    }

    pub fn h(&self) -> &Arc<MatrixLieGroup> {
        &self.h
    }

    pub fn tau(&self, h: &GroupElement) -> GroupElement {
        (self.tau)(h)
    }

    pub fn alpha(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        (self.alpha)(g, h)
    }

    pub fn tau_star(&self, x: &AlgebraVec) -> AlgebraVec {
        &self.tau_star * x
    }

    pub fn tau_star_matrix(&self) -> &DMatrix<f64> {
        &self.tau_star
    }

    pub fn alpha_star(&self, g: &GroupElement, x: &AlgebraVec) -> AlgebraVec {
        (self.alpha_star)(g, x)
    }
}

/// The covering map SU(2) -> SO(3), `R_ij = Re tr(sigma_i U sigma_j U^H) / 2`.
pub fn double_cover(so3: &Arc<MatrixLieGroup>, u: &GroupElement) -> GroupElement {
    assert_eq!(so3.kind(), GroupKind::So3);
    let s = pauli();
    let um = u.matrix();
    let uh = um.adjoint();
    let r = Mat::from_fn(3, 3, |i, j| {
        let t = (&s[i] * um * &s[j] * &uh).trace();
        Complex64::new(0.5 * t.re, 0.0)
    });
    so3.element(r)
}

/// One of the two SU(2) preimages of a rotation, via the quaternion of `R`.
pub fn su2_lift(su2: &Arc<MatrixLieGroup>, r: &GroupElement) -> GroupElement {
    assert_eq!(su2.kind(), GroupKind::Su2);
    let m = r.matrix().map(|z| z.re);
    let tr = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    let (w, x, y, z) = if tr > 0.0 {
        let s = (tr + 1.0).sqrt() * 2.0;
        (
            0.25 * s,
            (m[(2, 1)] - m[(1, 2)]) / s,
            (m[(0, 2)] - m[(2, 0)]) / s,
            (m[(1, 0)] - m[(0, 1)]) / s,
        )
    } else if m[(0, 0)] > m[(1, 1)] && m[(0, 0)] > m[(2, 2)] {
        let s = (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt() * 2.0;
        (
            (m[(2, 1)] - m[(1, 2)]) / s,
            0.25 * s,
            (m[(0, 1)] + m[(1, 0)]) / s,
            (m[(0, 2)] + m[(2, 0)]) / s,
        )
    } else if m[(1, 1)] > m[(2, 2)] {
        let s = (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt() * 2.0;
        (
            (m[(0, 2)] - m[(2, 0)]) / s,
            (m[(0, 1)] + m[(1, 0)]) / s,
            0.25 * s,
            (m[(1, 2)] + m[(2, 1)]) / s,
        )
    } else {
        let s = (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt() * 2.0;
        (
            (m[(1, 0)] - m[(0, 1)]) / s,
            (m[(0, 2)] + m[(2, 0)]) / s,
            (m[(1, 2)] + m[(2, 1)]) / s,
            0.25 * s,
        )
    };
    let cx = |re: f64, im: f64| Complex64::new(re, im);
    su2.element_projected(Mat::from_row_slice(
        2,
        2,
        &[cx(w, -z), cx(-y, -x), cx(y, -x), cx(w, z)],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fd_tau_star(cm: &LieCrossedModule, x: &AlgebraVec) -> AlgebraVec {
        let step = 1e-6;
        let plus = cm.tau(&cm.h().exp(&(x * step)));
        let minus = cm.tau(&cm.h().exp(&(x * -step)));
        plus.right_div(&minus).log().unwrap() / (2.0 * step)
    }

    fn fd_alpha_star(cm: &LieCrossedModule, g: &GroupElement, x: &AlgebraVec) -> AlgebraVec {
        let step = 1e-6;
        let plus = cm.alpha(g, &cm.h().exp(&(x * step)));
        let minus = cm.alpha(g, &cm.h().exp(&(x * -step)));
        plus.right_div(&minus).log().unwrap() / (2.0 * step)
    }

    #[test]
    fn inner_tau_star_is_the_identity() {
        let cm = LieCrossedModule::su2_inner();
        let x = DVector::from_column_slice(&[0.3, -0.2, 0.9]);
        assert_eq!(cm.tau_star(&x), x);
    }

    #[test]
    fn double_cover_lift_round_trips() {
        let cm = LieCrossedModule::so3_su2();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let r = cm.g().sample(&mut rng, 3.0);
            let lift = su2_lift(cm.h(), &r);
            assert!(cm.tau(&lift).distance(&r) < 1e-12);
        }
    }

    #[test]
    fn double_cover_sends_generators_to_rotations() {
        let cm = LieCrossedModule::so3_su2();
        for k in 0..3 {
            let mut x = DVector::zeros(3);
            x[k] = 0.7;
            let lhs = cm.tau(&cm.h().exp(&x));
            assert!(lhs.distance(&cm.g().exp(&x)) < 1e-13);
        }
    }

    #[test]
    fn tau_star_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for cm in [LieCrossedModule::su2_inner(), LieCrossedModule::so3_su2()] {
            for _ in 0..50 {
                let x = cm.h().sample_algebra(&mut rng, 1.0);
                assert!((cm.tau_star(&x) - fd_tau_star(&cm, &x)).norm() <= 1e-6);
            }
        }
    }

    #[test]
    fn alpha_star_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for cm in [LieCrossedModule::su2_inner(), LieCrossedModule::so3_su2()] {
            for _ in 0..50 {
                let g = cm.g().sample(&mut rng, 1.0);
                let x = cm.h().sample_algebra(&mut rng, 1.0);
                let analytic = cm.alpha_star(&g, &x);
                assert!((analytic - fd_alpha_star(&cm, &g, &x)).norm() <= 1e-6);
            }
        }
    }

    #[test]
    fn alpha_star_at_identity_is_trivial_and_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for cm in [LieCrossedModule::su2_inner(), LieCrossedModule::so3_su2()] {
            let e = cm.g().identity();
            let g = cm.g().sample(&mut rng, 1.0);
            let x = cm.h().sample_algebra(&mut rng, 1.0);
            let y = cm.h().sample_algebra(&mut rng, 1.0);
            assert!((cm.alpha_star(&e, &x) - &x).norm() < 1e-14);
            let lin = cm.alpha_star(&g, &(&x * 2.0 + &y))
                - cm.alpha_star(&g, &x) * 2.0
                - cm.alpha_star(&g, &y);
            assert!(lin.norm() < 1e-13);
        }
    }

    #[test]
    fn algebra_level_peiffer_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for cm in [LieCrossedModule::su2_inner(), LieCrossedModule::so3_su2()] {
            for _ in 0..200 {
                let g = cm.g().sample(&mut rng, 1.0);
                let x = cm.h().sample_algebra(&mut rng, 1.0);
                let lhs = cm.tau_star(&cm.alpha_star(&g, &x));
                let rhs = g.adjoint(&cm.tau_star(&x));
                assert!((lhs - rhs).norm() <= 1e-8);
            }
        }
    }

    #[test]
    fn tau_star_intertwines_brackets() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for cm in [LieCrossedModule::su2_inner(), LieCrossedModule::so3_su2()] {
            let x = cm.h().sample_algebra(&mut rng, 1.0);
            let y = cm.h().sample_algebra(&mut rng, 1.0);
            let lhs = cm.tau_star(&cm.h().bracket(&x, &y));
            let rhs = cm.g().bracket(&cm.tau_star(&x), &cm.tau_star(&y));
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }
}
