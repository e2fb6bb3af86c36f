//! Categorical gauge transformations of the decorated bundle.
//!
//! A transformation is built from a map `θ̄: M -> G` and an `L(H)`-valued
//! form `λ` on the base. They extend to the total space by
//! `θ_(x,g) = g^-1 θ̄(x) g` and `Λ_(x,g)(v) = α_*(g^-1) λ_x(v_x)`, so the
//! equivariance conditions hold by construction. The decoration of an
//! `A`-horizontal path solves `h' h^-1 = -Λ(γ̃')`, and a morphism `(γ̃; h)`
//! with source `p` is sent to `(γ̃; e)(h_ōγ, θ_p)` with
//! `h_ōγ = h_γ̃ θ_p h θ_p^-1`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::CatGroupMorphism;
use crate::bundle::{
    horizontal_lift, parallel_transport, step_residual, tangent_residual, translate_path,
    BundlePath, BundlePoint, CoefficientField, CoefficientSpec, ConnectionForm, GroupPath,
    TangentVector,
};
use crate::catbundle::{
    dec_act, dec_compose, dec_target, functor_sdec, pp_distance, CCCase, DecMorphism, PPMorphism,
};
use crate::error::{Error, Result};
use crate::lie::crossed::LieCrossedModule;
use crate::lie::{AlgebraVec, GroupElement, MatrixLieGroup};
use crate::paths::{BasePath, BasePoint, PathPoint};

/// Relative step of the finite-difference fallback for `dθ̄`.
pub const FD_STEP: f64 = 1e-6;

/// JSON descriptor of `θ̄: M -> G`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ThetaSpec {
    Identity,
    /// `θ̄(x) = exp(constant + sum_mu x_mu slopes[mu])`.
    ExpLinear {
        constant: Vec<f64>,
        slopes: Vec<Vec<f64>>,
    },
    /// `θ̄(x) = left(x) right(x)`.
    Product {
        left: Box<ThetaSpec>,
        right: Box<ThetaSpec>,
    },
}

type ThetaFn = Arc<dyn Fn(&BasePoint) -> GroupElement + Send + Sync>;
type DThetaFn = Arc<dyn Fn(&BasePoint) -> DMatrix<f64> + Send + Sync>;

/// The map `θ̄` with its right-trivialized derivative.
#[derive(Clone)]
pub struct GaugeMap {
    group: Arc<MatrixLieGroup>,
    base: usize,
    label: String,
    f: ThetaFn,
    df: Option<DThetaFn>,
    equivariant: bool,
}

impl fmt::Debug for GaugeMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "GaugeMap({}, equivariant: {})",
            self.label, self.equivariant
        )
    }
}

impl GaugeMap {
    pub fn identity(group: Arc<MatrixLieGroup>, base: usize) -> Self {
        let e = group.identity();
        let alg = group.dim();
        GaugeMap {
            group,
            base,
            label: "identity".into(),
            f: Arc::new(move |_| e.clone()),
            df: Some(Arc::new(move |_| DMatrix::zeros(alg, base))),
            equivariant: true,
        }
    }

    /// A map without an analytic derivative; `dθ̄` falls back to central
    /// differences.
    pub fn from_fn(
        group: Arc<MatrixLieGroup>,
        base: usize,
        label: impl Into<String>,
        f: impl Fn(&BasePoint) -> GroupElement + Send + Sync + 'static,
    ) -> Self {
        GaugeMap {
            group,
            base,
            label: label.into(),
            f: Arc::new(f),
            df: None,
            equivariant: true,
        }
    }

    pub fn from_spec(spec: &ThetaSpec, group: Arc<MatrixLieGroup>, base: usize) -> Result<Self> {
        let alg = group.dim();
        match spec {
            ThetaSpec::Identity => Ok(Self::identity(group, base)),
            ThetaSpec::ExpLinear { constant, slopes } => {
                if constant.len() != alg
                    || slopes.len() != base
                    || slopes.iter().any(|s| s.len() != alg)
                {
                    return Err(Error::Fixture(format!(
                        "exp_linear needs a constant of length {alg} and {base} slopes of length {alg}"
                    )));
                }
                let c = DVector::from_column_slice(constant);
                let s: Vec<AlgebraVec> = slopes
                    .iter()
                    .map(|v| DVector::from_column_slice(v))
                    .collect();
                let y = {
                    let (c, s) = (c.clone(), s.clone());
                    move |x: &BasePoint| {
                        s.iter()
                            .zip(x.iter())
                            .fold(c.clone(), |acc, (sm, xm)| acc + sm * *xm)
                    }
                };
                let y2 = y.clone();
                let g1 = group.clone();
                let g2 = group.clone();
                Ok(GaugeMap {
                    group,
                    base,
                    label: "exp_linear".into(),
                    f: Arc::new(move |x| g1.exp(&y(x))),
                    df: Some(Arc::new(move |x| {
                        let yx = y2(x);
                        let mut m = DMatrix::zeros(alg, base);
                        for (mu, sm) in s.iter().enumerate() {
                            m.set_column(mu, &g2.dexp_right(&yx, sm));
                        }
                        m
                    })),
                    equivariant: true,
                })
            }
            ThetaSpec::Product { left, right } => {
                let l = Self::from_spec(left, group.clone(), base)?;
                let r = Self::from_spec(right, group, base)?;
                Ok(l.product(&r))
            }
        }
    }

    /// `x |-> self(x) other(x)` with the product rule
    /// `d(θ₂θ₁)(θ₂θ₁)^-1 = dθ₂θ₂^-1 + Ad(θ₂)(dθ₁θ₁^-1)`.
    pub fn product(&self, other: &GaugeMap) -> GaugeMap {
        let (a, b) = (self.clone(), other.clone());
        let (a2, b2) = (self.clone(), other.clone());
        GaugeMap {
            group: self.group.clone(),
            base: self.base,
            label: format!("{}*{}", self.label, other.label),
            f: Arc::new(move |x| a.theta_bar(x).mul(&b.theta_bar(x))),
            df: Some(Arc::new(move |x| {
                let t2 = a2.theta_bar(x);
                let d2 = a2.dtheta(x);
                let d1 = b2.dtheta(x);
                let mut m = d2;
                for mu in 0..m.ncols() {
                    let col: AlgebraVec = d1.column(mu).into();
                    let shifted = t2.adjoint(&col);
                    let mut c = m.column_mut(mu);
                    c += shifted;
                }
                m
            })),
            equivariant: self.equivariant && other.equivariant,
        }
    }

    /// The same `θ̄` extended without conjugation, `θ_(x,g) = θ̄(x)`. This
    /// breaks equivariance and serves as a negative control.
    pub fn naive(&self) -> GaugeMap {
        GaugeMap {
            equivariant: false,
            label: format!("naive({})", self.label),
            ..self.clone()
        }
    }

    /// Drops the analytic derivative so `dθ̄` uses finite differences.
    pub fn finite_difference(&self) -> GaugeMap {
        GaugeMap {
            df: None,
            ..self.clone()
        }
    }

    pub fn group(&self) -> &Arc<MatrixLieGroup> {
        &self.group
    }

    pub fn base_dim(&self) -> usize {
        self.base
    }

    pub fn is_equivariant(&self) -> bool {
        self.equivariant
    }

    pub fn theta_bar(&self, x: &BasePoint) -> GroupElement {
        (self.f)(x)
    }

    /// Column `mu` holds `(∂_mu θ̄) θ̄^-1`.
    pub fn dtheta(&self, x: &BasePoint) -> DMatrix<f64> {
        match &self.df {
            Some(df) => df(x),
            None => self.dtheta_fd(x),
        }
    }

    /// Central differences `log(θ̄(x+h e_mu) θ̄(x-h e_mu)^-1) / 2h`.
    pub fn dtheta_fd(&self, x: &BasePoint) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.group.dim(), self.base);
        for mu in 0..self.base {
            let h = FD_STEP * x[mu].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[mu] += h;
            xm[mu] -= h;
            let d = self
                .theta_bar(&xp)
                .right_div(&self.theta_bar(&xm))
                .log()
                .map(|l| l / (2.0 * h))
                .unwrap_or_else(|_| DVector::from_element(self.group.dim(), f64::NAN));
            m.set_column(mu, &d);
        }
        m
    }

    /// `θ_(x,g) = g^-1 θ̄(x) g`, or `θ̄(x)` for the naive extension.
    pub fn theta(&self, p: &BundlePoint) -> GroupElement {
        let t = self.theta_bar(&p.x);
        if self.equivariant {
            p.g.inverse().mul(&t).mul(&p.g)
        } else {
            t
        }
    }
}

/// The `L(H)`-valued form `Λ_(x,g)(v) = α_*(g^-1) λ_x(v_x)`.
#[derive(Debug, Clone)]
pub struct DecorationForm {
    cm: LieCrossedModule,
    coeffs: CoefficientField,
}

impl DecorationForm {
    pub fn new(cm: LieCrossedModule, coeffs: CoefficientField) -> Result<Self> {
        if coeffs.alg_dim() != cm.h().dim() {
            return Err(Error::Fixture(format!(
                "decoration has {} algebra components but L(H) has dimension {}",
                coeffs.alg_dim(),
                cm.h().dim()
            )));
        }
        Ok(DecorationForm { cm, coeffs })
    }

    pub fn from_spec(cm: LieCrossedModule, spec: &CoefficientSpec, base: usize) -> Result<Self> {
        let coeffs = CoefficientField::from_spec(spec, cm.h().dim(), base)?;
        Self::new(cm, coeffs)
    }

    pub fn zero(cm: LieCrossedModule, base: usize) -> Self {
        let coeffs = CoefficientField::zero(cm.h().dim(), base);
        DecorationForm { cm, coeffs }
    }

    pub fn crossed_module(&self) -> &LieCrossedModule {
        &self.cm
    }

    pub fn coefficients(&self) -> &CoefficientField {
        &self.coeffs
    }

    pub fn eval(&self, p: &BundlePoint, v: &TangentVector) -> AlgebraVec {
        self.cm
            .alpha_star(&p.g.inverse(), &self.coeffs.apply(&p.x, &v.vx))
    }
}

/// Solves `h' h^-1 = -Λ(γ̃')` with `h(t0) = e` along a horizontal path. Each
/// step uses the endpoint average of `α_*(g^-1)` applied to the midpoint
/// value of `λ` on the chord.
pub fn decoration_ode(lambda: &DecorationForm, lift: &BundlePath) -> Result<GroupPath> {
    let cm = lambda.crossed_module();
    let h = cm.h();
    let inc: Vec<AlgebraVec> = lift
        .samples()
        .windows(2)
        .map(|w| {
            let dx = &w[1].x - &w[0].x;
            if dx.iter().all(|v| *v == 0.0) {
                return DVector::zeros(h.dim());
            }
            let l = lambda
                .coefficients()
                .apply(&((&w[0].x + &w[1].x) * 0.5), &dx);
            (cm.alpha_star(&w[0].g.inverse(), &l) + cm.alpha_star(&w[1].g.inverse(), &l)) * 0.5
        })
        .collect();
    if inc.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::OutOfDomain {
            point: lift.start().x.iter().copied().collect(),
        });
    }
    lift.with_samples(crate::bundle::solve_right_ode(h, &h.identity(), &inc))
}

/// The categorical gauge transformation generated by `(θ, Λ)`.
#[derive(Debug, Clone)]
pub struct CatGaugeTransform {
    theta: GaugeMap,
    lambda: DecorationForm,
}

impl CatGaugeTransform {
    pub fn new(theta: GaugeMap, lambda: DecorationForm) -> Result<Self> {
        if theta.group().kind() != lambda.crossed_module().g().kind() {
            return Err(Error::Fixture(
                "θ takes values outside the crossed module's G".into(),
            ));
        }
        Ok(CatGaugeTransform { theta, lambda })
    }

    pub fn identity(cm: LieCrossedModule, base: usize) -> Self {
        CatGaugeTransform {
            theta: GaugeMap::identity(cm.g().clone(), base),
            lambda: DecorationForm::zero(cm, base),
        }
    }

    pub fn theta(&self) -> &GaugeMap {
        &self.theta
    }

    pub fn lambda(&self) -> &DecorationForm {
        &self.lambda
    }

    pub fn crossed_module(&self) -> &LieCrossedModule {
        self.lambda.crossed_module()
    }

    /// The same data with the naive, non-equivariant extension of `θ̄`.
    pub fn naive(&self) -> Self {
        CatGaugeTransform {
            theta: self.theta.naive(),
            lambda: self.lambda.clone(),
        }
    }

    /// `Θ(p) = p θ_p`.
    pub fn apply_object(&self, p: &BundlePoint) -> BundlePoint {
        p.act(&self.theta.theta(p))
    }

    /// `h_γ̃`, the endpoint of the decoration ODE.
    pub fn h_path(&self, lift: &BundlePath) -> Result<GroupElement> {
        Ok(decoration_ode(&self.lambda, lift)?.end().clone())
    }

    /// `h_ōγ = h_γ̃ θ_p h θ_p^-1` for `ōγ = (γ̃; h)` with source `p`.
    pub fn h_morphism(&self, m: &DecMorphism) -> Result<GroupElement> {
        let theta_p = self.theta.theta(m.path.start());
        Ok(self
            .h_path(&m.path)?
            .mul(&self.crossed_module().alpha(&theta_p, &m.h)))
    }

    /// The element `k` with `Θ(ōγ) = ōγ (k, θ_p)`, that is `h^-1 h_ōγ`.
    pub fn h_relative(&self, m: &DecMorphism) -> Result<GroupElement> {
        Ok(m.h.inverse().mul(&self.h_morphism(m)?))
    }

    /// `Θ(ōγ) = (γ̃; e)(h_ōγ, θ_p) = (γ̃ θ_p; α_{θ_p^-1}(h_γ̃) h)`.
    pub fn apply_morphism(&self, m: &DecMorphism) -> Result<DecMorphism> {
        let cm = self.crossed_module();
        let theta_p = self.theta.theta(m.path.start());
        let plain = DecMorphism::new(m.path.clone(), cm.h().identity());
        let phi = CatGroupMorphism::new(self.h_morphism(m)?, theta_p);
        Ok(dec_act(cm, &plain, &phi))
    }

    /// Composite data `θ̄ = θ̄₂ θ̄₁` and `λ = α_*(θ̄₂) λ₁ + λ₂`, which
    /// transforms connections under [`TransformLaw::Literal`] like applying
    /// `first` and then `second`.
    pub fn compose(second: &CatGaugeTransform, first: &CatGaugeTransform) -> CatGaugeTransform {
        let cm = second.crossed_module().clone();
        let t2 = second.theta.clone();
        let l1 = first.lambda.coefficients().clone();
        let l2 = second.lambda.coefficients().clone();
        let cm2 = cm.clone();
        let coeffs =
            CoefficientField::from_fn(l1.alg_dim(), l1.base_dim(), "composite", move |x| {
                let t = t2.theta_bar(x);
                let mut m = l1.eval(x);
                for mu in 0..m.ncols() {
                    let col: AlgebraVec = m.column(mu).into();
                    m.set_column(mu, &cm2.alpha_star(&t, &col));
                }
                m + l2.eval(x)
            });
        CatGaugeTransform {
            theta: second.theta.product(&first.theta),
            lambda: DecorationForm { cm, coeffs },
        }
    }
}

/// How `τ_*λ` enters the transformed connection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformLaw {
    /// `a' = Ad(θ̄) a - dθ̄ θ̄^-1 + τ_* λ`.
    #[default]
    Literal,
    /// `a' = Ad(θ̄)(a + τ_* λ) - dθ̄ θ̄^-1`.
    ShiftFirst,
}

fn adjoint_columns(t: &GroupElement, m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for mu in 0..m.ncols() {
        let col: AlgebraVec = m.column(mu).into();
        out.set_column(mu, &t.adjoint(&col));
    }
    out
}

/// `Ad(θ) A - (dθ) θ^-1 + τ_* Λ` in base coefficients at the identity
/// section, extended equivariantly.
pub fn transformed_connection(
    conn: &ConnectionForm,
    gauge: &CatGaugeTransform,
) -> Result<ConnectionForm> {
    transformed_connection_with(conn, gauge, TransformLaw::Literal)
}

pub fn transformed_connection_with(
    conn: &ConnectionForm,
    gauge: &CatGaugeTransform,
    law: TransformLaw,
) -> Result<ConnectionForm> {
    let a = conn.coefficients().clone();
    let theta = gauge.theta().clone();
    let tau = gauge.crossed_module().tau_star_matrix().clone();
    let lambda = gauge.lambda().coefficients().clone();
    let coeffs =
        CoefficientField::from_fn(a.alg_dim(), a.base_dim(), format!("{law:?}"), move |x| {
            let t = theta.theta_bar(x);
            let shift = &tau * lambda.eval(x);
            match law {
                TransformLaw::Literal => adjoint_columns(&t, &a.eval(x)) - theta.dtheta(x) + shift,
                TransformLaw::ShiftFirst => {
                    adjoint_columns(&t, &(a.eval(x) + shift)) - theta.dtheta(x)
                }
            }
        });
    conn.with_coefficients(coeffs)
}

/// `t |-> γ̃(t) θ_{γ̃(t)} τ(h(t)) θ_p^-1` for the `A`-horizontal lift `γ̃`
/// of `gamma` through `p0`.
pub fn gengauge_candidate(
    conn: &ConnectionForm,
    gauge: &CatGaugeTransform,
    gamma: &BasePath,
    p0: &BundlePoint,
) -> Result<BundlePath> {
    let lift = horizontal_lift(conn, gamma, p0)?;
    let hs = decoration_ode(gauge.lambda(), &lift)?;
    let cm = gauge.crossed_module();
    let theta_p_inv = gauge.theta().theta(p0).inverse();
    let samples = lift
        .samples()
        .iter()
        .zip(hs.samples())
        .map(|(p, h)| {
            p.act(&gauge.theta().theta(p))
                .act(&cm.tau(h))
                .act(&theta_p_inv)
        })
        .collect();
    lift.with_samples(samples)
}

/// Residuals of the generalized transformation law along one path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GengaugeReport {
    pub n_steps: usize,
    pub law: TransformLaw,
    /// `‖candidate(t0) - p0‖`.
    pub initial_point: f64,
    /// Largest one-step horizontality residual against `A'`.
    pub horizontality: f64,
    /// Largest tangent residual against `A'`.
    pub tangent_horizontality: f64,
    /// Distance between the candidate endpoint and the `A'`-transport of `p0`.
    pub endpoint: f64,
    /// Largest `‖Ad(k^-1)(τ_*λ - Ad(θ̄) τ_*λ)(x')‖` along the candidate `k`,
    /// the exact horizontality defect of the candidate under the literal law.
    pub literal_law_defect: f64,
}

/// Builds the candidate path and checks it against the transformed
/// connection of the requested law.
pub fn gengauge_transport_check(
    conn: &ConnectionForm,
    gauge: &CatGaugeTransform,
    gamma: &BasePath,
    p0: &BundlePoint,
    law: TransformLaw,
) -> Result<GengaugeReport> {
    let candidate = gengauge_candidate(conn, gauge, gamma, p0)?;
    let transformed = transformed_connection_with(conn, gauge, law)?;
    let direct = parallel_transport(&transformed, gamma, p0)?;
    let tau = gauge.crossed_module().tau_star_matrix();
    let dt = candidate.dt();
    let mut defect: f64 = 0.0;
    if dt > 0.0 {
        for w in candidate.samples().windows(2) {
            let mid = (&w[0].x + &w[1].x) * 0.5;
            let dx = &w[1].x - &w[0].x;
            let shift: AlgebraVec = tau * gauge.lambda().coefficients().apply(&mid, &dx);
            let t = gauge.theta().theta_bar(&mid);
            let d = w[0].g.inverse().adjoint(&(&shift - t.adjoint(&shift)));
            defect = defect.max(d.norm() / dt);
        }
    }
    Ok(GengaugeReport {
        n_steps: candidate.n_steps(),
        law,
        initial_point: candidate.start().distance(p0),
        horizontality: step_residual(&transformed, &candidate)?,
        tangent_horizontality: tangent_residual(&transformed, &candidate)?,
        endpoint: candidate.end().distance(&direct),
        literal_law_defect: defect,
    })
}

/// The image in `P••` of the gauge-transformed plain lift, next to the form
/// `(q θ_q τ(h_γ̃), p θ_p; γ)` it is expected to take.
#[derive(Debug, Clone)]
pub struct InducedMorphism {
    pub computed: PPMorphism,
    pub stated: PPMorphism,
    /// `pp_distance(computed, stated)`.
    pub defect: f64,
    /// `q θ_q τ(h_γ̃) θ_p^-1`.
    pub conjugated_endpoint: BundlePoint,
}

pub fn induced_pushforward_morphism(
    conn: &ConnectionForm,
    gauge: &CatGaugeTransform,
    gamma: &BasePath,
    p0: &BundlePoint,
) -> Result<InducedMorphism> {
    let cm = gauge.crossed_module();
    let lift = horizontal_lift(conn, gamma, p0)?;
    let h = gauge.h_path(&lift)?;
    let m = DecMorphism::new(lift.clone(), cm.h().identity());
    let computed = functor_sdec(cm, &gauge.apply_morphism(&m)?);
    let q = lift.end();
    let theta_p = gauge.theta().theta(p0);
    let q_new = q.act(&gauge.theta().theta(q)).act(&cm.tau(&h));
    let stated = PPMorphism::new(q_new.clone(), p0.act(&theta_p), gamma.clone())?;
    Ok(InducedMorphism {
        defect: pp_distance(&computed, &stated),
        computed,
        stated,
        conjugated_endpoint: q_new.act(&theta_p.inverse()),
    })
}

/// Whether an identity holds exactly or only up to ODE discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxiomClass {
    Algebraic,
    Ode,
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeAxiomEntry {
    pub axiom: String,
    pub class: AxiomClass,
    pub residual: f64,
    pub worst_case_input_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeAxiomReport {
    pub n_steps: usize,
    pub entries: Vec<GaugeAxiomEntry>,
}

impl GaugeAxiomReport {
    pub fn residual(&self, axiom: &str) -> f64 {
        self.entries
            .iter()
            .find(|e| e.axiom == axiom)
            .map(|e| e.residual)
            .unwrap_or(f64::NAN)
    }
}

const GAUGE_AXIOMS: [(&str, AxiomClass); 8] = [
    ("theta_equivariance", AxiomClass::Algebraic),
    ("h_right_action", AxiomClass::Algebraic),
    ("h_path_equivariance", AxiomClass::Ode),
    ("h_morphism_equivariance", AxiomClass::Ode),
    ("decoration_multiplicativity", AxiomClass::Ode),
    ("composition_rule", AxiomClass::Ode),
    ("target_defect", AxiomClass::Info),
    ("composition_rule_decorated", AxiomClass::Info),
];

fn gauge_case_residuals(
    conn: &ConnectionForm,
    gauge: &CatGaugeTransform,
    case: &CCCase,
    index: usize,
    n: usize,
    seed: u64,
) -> Result<[f64; 8]> {
    let cm = gauge.crossed_module();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
    let h = cm.h().sample(&mut rng, 1.0);
    let b = cm.h().sample(&mut rng, 1.0);
    let p = &case.point;
    let a = &case.g;

    let theta_eq = gauge
        .theta()
        .theta(&p.act(a))
        .distance(&a.inverse().mul(&gauge.theta().theta(p)).mul(a));

    let gamma = case.first.sample(n)?;
    let lift = horizontal_lift(conn, &gamma, p)?;
    let m = DecMorphism::new(lift.clone(), h.clone());
    let theta_p = gauge.theta().theta(p);
    let mb = DecMorphism::new(lift.clone(), h.mul(&b));
    let right_action = gauge
        .h_morphism(&mb)?
        .distance(&gauge.h_morphism(&m)?.mul(&cm.alpha(&theta_p, &b)));

    let h_gamma = gauge.h_path(&lift)?;
    let h_path_eq = gauge
        .h_path(&translate_path(&lift, a))?
        .distance(&cm.alpha(&a.inverse(), &h_gamma));

    let ma = dec_act(cm, &m, &CatGroupMorphism::new(cm.h().identity(), a.clone()));
    let h_mor_eq = gauge
        .h_morphism(&ma)?
        .distance(&cm.alpha(&a.inverse(), &gauge.h_morphism(&m)?));

    let delta = case.second.sample(n)?;
    let lift_delta = horizontal_lift(conn, &delta, lift.end())?;
    let whole = horizontal_lift(conn, &case.whole().sample(n)?, p)?;
    let h_delta = gauge.h_path(&lift_delta)?;
    let multiplicativity = gauge.h_path(&whole)?.distance(&h_delta.mul(&h_gamma));

    let e = cm.h().identity();
    let og = DecMorphism::new(lift.clone(), e.clone());
    let od = DecMorphism::new(lift_delta, e);
    let composite = dec_compose(cm, &od, &og)?;
    let composition = gauge
        .h_morphism(&composite)?
        .distance(&gauge.h_morphism(&od)?.mul(&gauge.h_morphism(&og)?));

    let target_defect = dec_target(cm, &gauge.apply_morphism(&m)?)
        .distance(&gauge.apply_object(&dec_target(cm, &m)));

    let h2 = cm.h().sample(&mut rng, 1.0);
    let od2 = DecMorphism::new(horizontal_lift(conn, &delta, &dec_target(cm, &m))?, h2);
    let composite2 = dec_compose(cm, &od2, &m)?;
    let decorated = gauge
        .h_relative(&composite2)?
        .distance(&gauge.h_relative(&od2)?.mul(&gauge.h_relative(&m)?));

    Ok([
        theta_eq,
        right_action,
        h_path_eq,
        h_mor_eq,
        multiplicativity,
        composition,
        target_defect,
        decorated,
    ])
}

/// Checks the identities a categorical gauge transformation must satisfy
/// over a battery. Decorations `h, b ∈ H` are drawn per case from `seed`.
pub fn gauge_check_axioms(
    conn: &ConnectionForm,
    gauge: &CatGaugeTransform,
    battery: &[CCCase],
    n: usize,
    seed: u64,
) -> Result<GaugeAxiomReport> {
    if battery.is_empty() {
        return Err(Error::InvalidPath("empty battery".into()));
    }
    let rows: Vec<[f64; 8]> = battery
        .par_iter()
        .enumerate()
        .map(|(i, case)| gauge_case_residuals(conn, gauge, case, i, n, seed))
        .collect::<Result<_>>()?;
    let entries = GAUGE_AXIOMS
        .iter()
        .enumerate()
        .map(|(k, (axiom, class))| {
            let (idx, residual) = rows.iter().enumerate().map(|(i, r)| (i, r[k])).fold(
                (0, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
            GaugeAxiomEntry {
                axiom: axiom.to_string(),
                class: *class,
                residual,
                worst_case_input_id: battery[idx].id.clone(),
            }
        })
        .collect();
    Ok(GaugeAxiomReport {
        n_steps: n,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catbundle::{dec_distance, dec_source};
    use crate::fixtures;
    use crate::lie::expm::expm;
    use crate::paths::{PathSpec, SampledPath};

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn analytic_dtheta_matches_finite_differences() {
        let g = fixtures::testbed_gauge();
        let fd = g.theta().finite_difference();
        let prod = GaugeMap::from_spec(
            &ThetaSpec::Product {
                left: Box::new(fixtures::theta_spec()),
                right: Box::new(ThetaSpec::ExpLinear {
                    constant: vec![0.1, 0.0, -0.4],
                    slopes: vec![vec![0.0, 0.9, 0.2], vec![0.5, 0.0, 0.3]],
                }),
            },
            MatrixLieGroup::su2(),
            2,
        )
        .unwrap();
        for x in [v(&[0.1, 0.2]), v(&[0.5, 0.9]), v(&[0.8, 0.3])] {
            assert!((g.theta().dtheta(&x) - fd.dtheta(&x)).norm() <= 1e-8);
            assert!((prod.dtheta(&x) - prod.dtheta_fd(&x)).norm() <= 1e-8);
        }
    }

    #[test]
    fn theta_bar_uses_the_closed_form_exponential() {
        let g = fixtures::testbed_gauge();
        let x = v(&[0.3, 0.7]);
        let ThetaSpec::ExpLinear { constant, slopes } = fixtures::theta_spec() else {
            panic!("fixture changed")
        };
        let y: Vec<f64> = (0..3)
            .map(|i| constant[i] + 0.3 * slopes[0][i] + 0.7 * slopes[1][i])
            .collect();
        let group = MatrixLieGroup::su2();
        let oracle = expm(&group.hat(&v(&y)));
        assert!((g.theta().theta_bar(&x).matrix() - oracle).norm() <= 1e-12);
    }

    #[test]
    fn zero_decoration_stays_at_identity() {
        let conn = fixtures::testbed_connection();
        let zero = DecorationForm::zero(fixtures::testbed_crossed_module(), 2);
        let path = PathSpec::line(&[0.1, 0.2], &[0.8, 0.6], 1.0)
            .sample(200)
            .unwrap();
        let lift = horizontal_lift(
            &conn,
            &path,
            &BundlePoint::new(path.start().clone(), conn.group().identity()),
        )
        .unwrap();
        let hs = decoration_ode(&zero, &lift).unwrap();
        assert!(hs
            .samples()
            .iter()
            .all(|h| h.matrix() == conn.group().identity().matrix()));
    }

    #[test]
    fn constant_decoration_on_a_flat_lift_is_exponential() {
        let cm = fixtures::testbed_crossed_module();
        let flat = ConnectionForm::flat(fixtures::testbed_bundle());
        let lambda = DecorationForm::new(
            cm.clone(),
            CoefficientField::constant(DMatrix::from_column_slice(
                3,
                2,
                &[0.7, -0.1, 0.4, 0.0, 0.0, 0.0],
            )),
        )
        .unwrap();
        let path = SampledPath::from_fn(0.0, 1.0, 2000, 1, |t| v(&[0.1 + 0.8 * t, 0.5])).unwrap();
        let lift = horizontal_lift(
            &flat,
            &path,
            &BundlePoint::new(path.start().clone(), cm.g().identity()),
        )
        .unwrap();
        let h = decoration_ode(&lambda, &lift).unwrap();
        let oracle = expm(&cm.h().hat(&v(&[-0.56, 0.08, -0.32])));
        assert!((h.end().matrix() - oracle).norm() <= 1e-8);
    }

    #[test]
    fn decoration_is_multiplicative_at_second_order() {
        let conn = fixtures::testbed_connection();
        let gauge = fixtures::testbed_gauge();
        let first = PathSpec::line(&[0.1, 0.1], &[0.7, 0.2], 1.0);
        let second = PathSpec::line(&[0.7, 0.2], &[0.6, 0.9], 1.0);
        let res: Vec<f64> = [500, 1000, 2000]
            .iter()
            .map(|&n| {
                let p = BundlePoint::new(v(&[0.1, 0.1]), conn.group().identity());
                let a = horizontal_lift(&conn, &first.sample(n).unwrap(), &p).unwrap();
                let b = horizontal_lift(&conn, &second.sample(n).unwrap(), a.end()).unwrap();
                let w =
                    horizontal_lift(&conn, &first.then(&second).sample(n).unwrap(), &p).unwrap();
                let ha = gauge.h_path(&a).unwrap();
                let hb = gauge.h_path(&b).unwrap();
                gauge.h_path(&w).unwrap().distance(&hb.mul(&ha))
            })
            .collect();
        assert!(res[2] <= 1e-7, "{res:?}");
        let slope = (res[0] / res[2]).log2() / 2.0;
        assert!((slope - 2.0).abs() < 0.3, "{res:?}");
    }

    #[test]
    fn objects_transform_equivariantly() {
        let gauge = fixtures::testbed_gauge();
        let group = MatrixLieGroup::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let p = BundlePoint::new(v(&[0.4, 0.6]), group.sample(&mut rng, 1.0));
            let a = group.sample(&mut rng, 1.0);
            let lhs = gauge.apply_object(&p.act(&a));
            let rhs = gauge.apply_object(&p).act(&a);
            assert!(lhs.distance(&rhs) <= 1e-10);
        }
        let id = CatGaugeTransform::identity(fixtures::testbed_crossed_module(), 2);
        let p = BundlePoint::new(v(&[0.4, 0.6]), group.sample(&mut rng, 1.0));
        assert!(id.apply_object(&p).distance(&p) <= 1e-15);
    }

    #[test]
    fn identity_gauge_fixes_morphisms() {
        let cm = fixtures::testbed_crossed_module();
        let conn = fixtures::testbed_connection();
        let id = CatGaugeTransform::identity(cm.clone(), 2);
        let path = PathSpec::arc(&[0.5, 0.5], 0.3, 0.0, 2.0, 1.0)
            .sample(300)
            .unwrap();
        let lift = horizontal_lift(
            &conn,
            &path,
            &BundlePoint::new(path.start().clone(), cm.g().exp(&v(&[0.2, 0.1, 0.0]))),
        )
        .unwrap();
        let m = DecMorphism::new(lift, cm.h().exp(&v(&[0.5, -0.4, 0.9])));
        assert!(dec_distance(&id.apply_morphism(&m).unwrap(), &m) <= 1e-14);
    }

    #[test]
    fn classical_gauge_moves_the_source_like_phi() {
        let conn = fixtures::testbed_connection();
        let gauge = fixtures::classical_gauge();
        let path = PathSpec::line(&[0.2, 0.2], &[0.7, 0.8], 1.0)
            .sample(300)
            .unwrap();
        let p = BundlePoint::new(path.start().clone(), conn.group().exp(&v(&[0.2, 0.1, 0.0])));
        let lift = horizontal_lift(&conn, &path, &p).unwrap();
        let m = DecMorphism::new(lift, gauge.crossed_module().h().identity());
        let out = gauge.apply_morphism(&m).unwrap();
        let phi_p = p.act(&gauge.theta().theta(&p));
        assert!(dec_source(&out).distance(&phi_p) <= 1e-14);
        assert!(out.h.distance(&gauge.crossed_module().h().identity()) <= 1e-14);
    }

    #[test]
    fn gauge_action_commutes_with_the_categorical_group() {
        let conn = fixtures::testbed_connection();
        let gauge = fixtures::testbed_gauge();
        let cm = gauge.crossed_module().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let path = PathSpec::line(&[0.2, 0.2], &[0.7, 0.8], 1.0)
            .sample(400)
            .unwrap();
        for _ in 0..5 {
            let p = BundlePoint::new(path.start().clone(), cm.g().sample(&mut rng, 1.0));
            let m = DecMorphism::new(
                horizontal_lift(&conn, &path, &p).unwrap(),
                cm.h().sample(&mut rng, 1.0),
            );
            let phi =
                CatGroupMorphism::new(cm.h().sample(&mut rng, 1.0), cm.g().sample(&mut rng, 1.0));
            let lhs = gauge.apply_morphism(&dec_act(&cm, &m, &phi)).unwrap();
            let rhs = dec_act(&cm, &gauge.apply_morphism(&m).unwrap(), &phi);
            assert!(
                dec_distance(&lhs, &rhs) <= 1e-7,
                "{}",
                dec_distance(&lhs, &rhs)
            );
        }
    }

    #[test]
    fn axioms_hold_and_the_naive_extension_fails() {
        let conn = fixtures::testbed_connection();
        let gauge = fixtures::testbed_gauge();
        let battery = fixtures::cc_battery(conn.group(), 42);
        let report = gauge_check_axioms(&conn, &gauge, &battery[..6], 1000, 42).unwrap();
        for e in &report.entries {
            match e.class {
                AxiomClass::Algebraic => assert!(e.residual <= 1e-10, "{e:?}"),
                AxiomClass::Ode => assert!(e.residual <= 5e-6, "{e:?}"),
                AxiomClass::Info => {}
            }
        }
        let naive = gauge_check_axioms(&conn, &gauge.naive(), &battery[..6], 200, 42).unwrap();
        assert!(naive.residual("theta_equivariance") >= 1e-2);
        let id = CatGaugeTransform::identity(gauge.crossed_module().clone(), 2);
        let trivial = gauge_check_axioms(&conn, &id, &battery[..3], 200, 42).unwrap();
        assert!(
            trivial.entries.iter().all(|e| e.residual <= 1e-13),
            "{trivial:?}"
        );
    }

    #[test]
    fn compatible_decoration_preserves_targets() {
        let conn = fixtures::testbed_connection();
        let gauge = fixtures::compatible_gauge();
        let battery = fixtures::cc_battery(conn.group(), 42);
        let r1 = gauge_check_axioms(&conn, &gauge, &battery[..4], 500, 42).unwrap();
        let r2 = gauge_check_axioms(&conn, &gauge, &battery[..4], 1000, 42).unwrap();
        let (d1, d2) = (r1.residual("target_defect"), r2.residual("target_defect"));
        assert!(d2 <= 1e-5 && d1 / d2 > 3.0, "{d1} {d2}");
        let generic =
            gauge_check_axioms(&conn, &fixtures::testbed_gauge(), &battery[..4], 500, 42).unwrap();
        assert!(generic.residual("target_defect") > 1e-2);
    }

    #[test]
    fn identity_transformation_leaves_the_connection_unchanged() {
        let conn = fixtures::testbed_connection();
        let id = CatGaugeTransform::identity(fixtures::testbed_crossed_module(), 2);
        let t = transformed_connection(&conn, &id).unwrap();
        for i in 0..=10 {
            for j in 0..=10 {
                let x = v(&[i as f64 / 10.0, j as f64 / 10.0]);
                assert!((t.coefficients().eval(&x) - conn.coefficients().eval(&x)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn pure_shift_adds_tau_lambda() {
        let conn = fixtures::testbed_connection();
        let gauge = fixtures::shift_gauge();
        let t = transformed_connection(&conn, &gauge).unwrap();
        let x = v(&[0.3, 0.6]);
        let expected = conn.coefficients().eval(&x) + gauge.lambda().coefficients().eval(&x);
        assert!((t.coefficients().eval(&x) - expected).norm() <= 1e-14);
    }

    #[test]
    fn identity_gauge_candidate_is_the_lift() {
        let conn = fixtures::testbed_connection();
        let id = CatGaugeTransform::identity(fixtures::testbed_crossed_module(), 2);
        let path = fixtures::gauge_path().sample(2000).unwrap();
        let p0 = BundlePoint::new(path.start().clone(), conn.group().exp(&v(&[0.3, 0.2, 0.1])));
        let r = gengauge_transport_check(&conn, &id, &path, &p0, TransformLaw::Literal).unwrap();
        assert!(
            r.initial_point <= 1e-12 && r.horizontality <= 1e-12 && r.endpoint <= 1e-12,
            "{r:?}"
        );
    }

    #[test]
    fn classical_and_pure_shift_cases_follow_the_law() {
        let conn = fixtures::testbed_connection();
        let path = fixtures::gauge_path().sample(2000).unwrap();
        let p0 = BundlePoint::new(path.start().clone(), conn.group().exp(&v(&[0.3, 0.2, 0.1])));
        for gauge in [fixtures::classical_gauge(), fixtures::shift_gauge()] {
            let r =
                gengauge_transport_check(&conn, &gauge, &path, &p0, TransformLaw::Literal).unwrap();
            assert!(r.horizontality <= 1e-6 && r.endpoint <= 1e-6, "{r:?}");
            assert!(r.literal_law_defect <= 1e-12);
        }
    }

    #[test]
    fn full_fixture_follows_the_shift_first_law() {
        let conn = fixtures::testbed_connection();
        let gauge = fixtures::testbed_gauge();
        let path = fixtures::gauge_path().sample(2000).unwrap();
        let p0 = BundlePoint::new(path.start().clone(), conn.group().exp(&v(&[0.3, 0.2, 0.1])));
        let shift_first =
            gengauge_transport_check(&conn, &gauge, &path, &p0, TransformLaw::ShiftFirst).unwrap();
        assert!(
            shift_first.horizontality <= 1e-5 && shift_first.endpoint <= 1e-5,
            "{shift_first:?}"
        );
        let literal =
            gengauge_transport_check(&conn, &gauge, &path, &p0, TransformLaw::Literal).unwrap();
        assert!(
            (literal.horizontality - literal.literal_law_defect).abs()
                <= 1e-4 * literal.literal_law_defect.max(1.0),
            "{literal:?}"
        );
        assert!(literal.literal_law_defect > 1e-2);
    }

    #[test]
    fn induced_morphism_for_the_identity_gauge() {
        let conn = fixtures::testbed_connection();
        let id = CatGaugeTransform::identity(fixtures::testbed_crossed_module(), 2);
        let path = fixtures::gauge_path().sample(500).unwrap();
        let p0 = BundlePoint::new(path.start().clone(), conn.group().identity());
        let r = induced_pushforward_morphism(&conn, &id, &path, &p0).unwrap();
        assert!(r.defect <= 1e-14);
        let q = parallel_transport(&conn, &path, &p0).unwrap();
        assert!(r.computed.p1.distance(&q) <= 1e-14);
    }

    #[test]
    fn conjugated_endpoint_matches_the_candidate() {
        let conn = fixtures::testbed_connection();
        let gauge = fixtures::testbed_gauge();
        let path = fixtures::gauge_path().sample(1000).unwrap();
        let p0 = BundlePoint::new(path.start().clone(), conn.group().exp(&v(&[0.3, 0.2, 0.1])));
        let r = induced_pushforward_morphism(&conn, &gauge, &path, &p0).unwrap();
        let cand = gengauge_candidate(&conn, &gauge, &path, &p0).unwrap();
        assert!(r.conjugated_endpoint.distance(cand.end()) <= 1e-12);
    }

    #[test]
    fn composite_data_matches_sequential_transformation() {
        let conn = fixtures::testbed_connection();
        let g1 = fixtures::testbed_gauge();
        let g2 = fixtures::second_gauge();
        let sequential =
            transformed_connection(&transformed_connection(&conn, &g1).unwrap(), &g2).unwrap();
        let single = transformed_connection(&conn, &CatGaugeTransform::compose(&g2, &g1)).unwrap();
        let path = fixtures::gauge_path().sample(1000).unwrap();
        let p0 = BundlePoint::new(path.start().clone(), conn.group().identity());
        let a = parallel_transport(&sequential, &path, &p0).unwrap();
        let b = parallel_transport(&single, &path, &p0).unwrap();
        assert!(a.distance(&b) <= 1e-5);
    }
}
