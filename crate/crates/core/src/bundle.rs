//! Connections on trivial principal bundles `P = M x G`.
//!
//! A point of `P` is a pair `(x, g)` with `x` in an axis-aligned box of ℝᵈ.
//! A connection is given by base coefficients `a: M -> L(G)^d` and evaluates
//! on a tangent vector `(v_x, v_g)`, with `v_g` the right-translated fiber
//! velocity `g' g^-1`, as `A(v) = Ad(g^-1)(a_x(v_x) + v_g)`. Horizontal lifts
//! solve `g' = -a(γ') g` with a Lie group integrator that stays on the group.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{AlgebraVec, GroupElement, MatrixLieGroup};
use crate::paths::{BasePath, BasePoint, PathPoint, SampledPath, JOIN_TOL};

/// Slack allowed when testing membership of the base box.
const DOMAIN_SLACK: f64 = 1e-12;

/// Largest tangent residual accepted for a path declared horizontal.
pub const HORIZONTAL_INPUT_TOL: f64 = 1e-2;

/// A point `(x, g)` of a trivial bundle.
#[derive(Debug, Clone)]
pub struct BundlePoint {
    pub x: BasePoint,
    pub g: GroupElement,
}

impl BundlePoint {
    pub fn new(x: BasePoint, g: GroupElement) -> Self {
        BundlePoint { x, g }
    }

    /// Right action `(x, g) a = (x, g a)`.
    pub fn act(&self, a: &GroupElement) -> BundlePoint {
        BundlePoint {
            x: self.x.clone(),
            g: self.g.mul(a),
        }
    }
}

impl PathPoint for BundlePoint {
    fn distance(&self, other: &Self) -> f64 {
        (&self.x - &other.x).norm() + self.g.distance(&other.g)
    }

    fn interpolate(&self, other: &Self, s: f64) -> Self {
        BundlePoint {
            x: self.x.interpolate(&other.x, s),
            g: self.g.interpolate(&other.g, s),
        }
    }

    fn is_finite(&self) -> bool {
        PathPoint::is_finite(&self.x) && PathPoint::is_finite(&self.g)
    }

    fn csv_header(&self) -> Vec<String> {
        let mut h = self.x.csv_header();
        h.extend(self.g.csv_header());
        h
    }

    fn csv_fields(&self) -> Vec<f64> {
        let mut f = self.x.csv_fields();
        f.extend(self.g.csv_fields());
        f
    }
}

/// A path in the total space.
pub type BundlePath = SampledPath<BundlePoint>;

/// A path in a structure group.
pub type GroupPath = SampledPath<GroupElement>;

/// Right-translates every fiber coordinate of `path` by `a`.
pub fn translate_path(path: &BundlePath, a: &GroupElement) -> BundlePath {
    path.map(|p| p.act(a))
}

/// Projection of a bundle path to the base.
pub fn project_path(path: &BundlePath) -> BasePath {
    path.map(|p| p.x.clone())
}

/// The product bundle over a box in ℝᵈ.
#[derive(Debug, Clone)]
pub struct TrivialBundle {
    lo: Vec<f64>,
    hi: Vec<f64>,
    group: Arc<MatrixLieGroup>,
}

impl TrivialBundle {
    /// Bundle over the unit box `[0, 1]^d`.
    pub fn new(dim: usize, group: Arc<MatrixLieGroup>) -> Self {
        TrivialBundle {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
            group,
        }
    }

    pub fn with_box(lo: Vec<f64>, hi: Vec<f64>, group: Arc<MatrixLieGroup>) -> Result<Self> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::Fixture("base box bounds are inconsistent".into()));
        }
        Ok(TrivialBundle { lo, hi, group })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn group(&self) -> &Arc<MatrixLieGroup> {
        &self.group
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    pub fn contains(&self, x: &BasePoint) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *v >= a - DOMAIN_SLACK && *v <= b + DOMAIN_SLACK)
    }

    pub fn check_point(&self, x: &BasePoint) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                point: x.iter().copied().collect(),
            })
        }
    }

    pub fn check_path(&self, path: &BasePath) -> Result<()> {
        path.samples().iter().try_for_each(|x| self.check_point(x))
    }

    pub fn point(&self, x: &[f64], g: GroupElement) -> Result<BundlePoint> {
        let x = DVector::from_column_slice(x);
        self.check_point(&x)?;
        Ok(BundlePoint::new(x, g))
    }

    pub fn projection(&self, p: &BundlePoint) -> BasePoint {
        p.x.clone()
    }
}

/// JSON descriptor of base coefficients `x |-> (a_1(x), ..., a_d(x))`, each
/// `a_mu(x)` an algebra coordinate vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CoefficientSpec {
    Zero,
    /// `a_mu(x) = values[mu]`.
    Constant {
        values: Vec<Vec<f64>>,
    },
    /// `a_mu(x) = constant[mu] + sum_nu x_nu gradient[nu][mu]`.
    Linear {
        constant: Vec<Vec<f64>>,
        gradient: Vec<Vec<Vec<f64>>>,
    },
    /// `a_mu(x) = sin(k.x) sin[mu] + cos(k.x) cos[mu]`.
    Trigonometric {
        wavevector: Vec<f64>,
        sin: Vec<Vec<f64>>,
        cos: Vec<Vec<f64>>,
    },
    Sum {
        terms: Vec<CoefficientSpec>,
    },
}

fn check_rows(rows: &[Vec<f64>], alg: usize, base: usize, what: &str) -> Result<()> {
    if rows.len() != base || rows.iter().any(|r| r.len() != alg) {
        return Err(Error::Fixture(format!(
            "{what} must be {base} vectors of length {alg}"
        )));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Fixture(format!("{what} has non-finite entries")));
    }
    Ok(())
}

fn rows_matrix(rows: &[Vec<f64>], alg: usize) -> DMatrix<f64> {
    DMatrix::from_fn(alg, rows.len(), |i, mu| rows[mu][i])
}

impl CoefficientSpec {
    /// Checks that the descriptor has the shape `alg x base`.
    pub fn validate(&self, alg: usize, base: usize) -> Result<()> {
        match self {
            CoefficientSpec::Zero => Ok(()),
            CoefficientSpec::Constant { values } => {
                check_rows(values, alg, base, "constant values")
            }
            CoefficientSpec::Linear { constant, gradient } => {
                check_rows(constant, alg, base, "linear constant")?;
                if gradient.len() != base {
                    return Err(Error::Fixture(format!(
                        "linear gradient needs {base} blocks"
                    )));
                }
                gradient
                    .iter()
                    .try_for_each(|block| check_rows(block, alg, base, "linear gradient block"))
            }
            CoefficientSpec::Trigonometric {
                wavevector,
                sin,
                cos,
            } => {
                if wavevector.len() != base {
                    return Err(Error::Fixture(format!(
                        "wavevector must have length {base}"
                    )));
                }
                check_rows(sin, alg, base, "sine amplitudes")?;
                check_rows(cos, alg, base, "cosine amplitudes")
            }
            CoefficientSpec::Sum { terms } => terms.iter().try_for_each(|t| t.validate(alg, base)),
        }
    }

    /// The coefficient matrix at `x`: column `mu` holds `a_mu(x)`.
    pub fn eval(&self, x: &BasePoint, alg: usize) -> DMatrix<f64> {
        let base = x.len();
        match self {
            CoefficientSpec::Zero => DMatrix::zeros(alg, base),
            CoefficientSpec::Constant { values } => rows_matrix(values, alg),
            CoefficientSpec::Linear { constant, gradient } => {
                let mut m = rows_matrix(constant, alg);
                for (nu, block) in gradient.iter().enumerate() {
                    m += rows_matrix(block, alg) * x[nu];
                }
                m
            }
            CoefficientSpec::Trigonometric {
                wavevector,
                sin,
                cos,
            } => {
                let phase: f64 = wavevector.iter().zip(x.iter()).map(|(k, v)| k * v).sum();
                rows_matrix(sin, alg) * phase.sin() + rows_matrix(cos, alg) * phase.cos()
            }
            CoefficientSpec::Sum { terms } => terms
                .iter()
                .fold(DMatrix::zeros(alg, base), |acc, t| acc + t.eval(x, alg)),
        }
    }
}

type CoeffFn = Arc<dyn Fn(&BasePoint) -> DMatrix<f64> + Send + Sync>;

/// A Lie-algebra valued 1-form on the base, `x |-> M(x)` with
/// `a_x(v) = M(x) v`.
#[derive(Clone)]
pub struct CoefficientField {
    alg: usize,
    base: usize,
    label: String,
    f: CoeffFn,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CoefficientField({}, {}x{})",
            self.label, self.alg, self.base
        )
    }
}

impl CoefficientField {
    pub fn from_spec(spec: &CoefficientSpec, alg: usize, base: usize) -> Result<Self> {
        spec.validate(alg, base)?;
        let spec = spec.clone();
        Ok(CoefficientField {
            alg,
            base,
            label: "spec".into(),
            f: Arc::new(move |x| spec.eval(x, alg)),
        })
    }

    pub fn from_fn(
        alg: usize,
        base: usize,
        label: impl Into<String>,
        f: impl Fn(&BasePoint) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        CoefficientField {
            alg,
            base,
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn zero(alg: usize, base: usize) -> Self {
        Self::from_fn(alg, base, "zero", move |_| DMatrix::zeros(alg, base))
    }

    /// Constant coefficients, column `mu` of `m` being `a_mu`.
    pub fn constant(m: DMatrix<f64>) -> Self {
        let (alg, base) = m.shape();
        Self::from_fn(alg, base, "constant", move |_| m.clone())
    }

    pub fn alg_dim(&self) -> usize {
        self.alg
    }

    pub fn base_dim(&self) -> usize {
        self.base
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: &BasePoint) -> DMatrix<f64> {
        (self.f)(x)
    }

    /// `a_x(v)`.
    pub fn apply(&self, x: &BasePoint, v: &BasePoint) -> AlgebraVec {
        (self.f)(x) * v
    }

    /// Pointwise sum.
    pub fn add(&self, other: &CoefficientField) -> CoefficientField {
        let (a, b) = (self.f.clone(), other.f.clone());
        CoefficientField {
            alg: self.alg,
            base: self.base,
            label: format!("{}+{}", self.label, other.label),
            f: Arc::new(move |x| a(x) + b(x)),
        }
    }

    /// Pointwise linear map `x |-> L M(x)` on algebra coordinates.
    pub fn map_algebra(&self, l: DMatrix<f64>) -> CoefficientField {
        let a = self.f.clone();
        CoefficientField {
            alg: l.nrows(),
            base: self.base,
            label: format!("L({})", self.label),
            f: Arc::new(move |x| &l * a(x)),
        }
    }
}

/// Choice of Lie group integrator for horizontal lifts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Exponential midpoint rule, order 2.
    #[default]
    ExpMidpoint,
    /// Fourth-order Magnus expansion with two Gauss points; the base path is
    /// reconstructed by cubic interpolation of the samples.
    Magnus4,
}

/// A tangent vector `(v_x, v_g)` at `(x, g)` with `v_g = g' g^-1`.
#[derive(Debug, Clone)]
pub struct TangentVector {
    pub vx: BasePoint,
    pub vg: AlgebraVec,
}

/// A connection form on a trivial bundle.
#[derive(Debug, Clone)]
pub struct ConnectionForm {
    bundle: TrivialBundle,
    coeffs: CoefficientField,
    integrator: Integrator,
}

impl ConnectionForm {
    pub fn new(bundle: TrivialBundle, coeffs: CoefficientField) -> Result<Self> {
        if coeffs.alg_dim() != bundle.group().dim() || coeffs.base_dim() != bundle.dim() {
            return Err(Error::Fixture(format!(
                "coefficients are {}x{} but the bundle needs {}x{}",
                coeffs.alg_dim(),
                coeffs.base_dim(),
                bundle.group().dim(),
                bundle.dim()
            )));
        }
        Ok(ConnectionForm {
            bundle,
            coeffs,
            integrator: Integrator::default(),
        })
    }

    pub fn from_spec(bundle: TrivialBundle, spec: &CoefficientSpec) -> Result<Self> {
        let coeffs = CoefficientField::from_spec(spec, bundle.group().dim(), bundle.dim())?;
        Self::new(bundle, coeffs)
    }

    /// The product connection `a = 0`.
    pub fn flat(bundle: TrivialBundle) -> Self {
        let coeffs = CoefficientField::zero(bundle.group().dim(), bundle.dim());
        ConnectionForm {
            bundle,
            coeffs,
            integrator: Integrator::default(),
        }
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    /// The same bundle with other base coefficients.
    pub fn with_coefficients(&self, coeffs: CoefficientField) -> Result<Self> {
        Ok(Self::new(self.bundle.clone(), coeffs)?.with_integrator(self.integrator))
    }

    pub fn bundle(&self) -> &TrivialBundle {
        &self.bundle
    }

    pub fn group(&self) -> &Arc<MatrixLieGroup> {
        self.bundle.group()
    }

    pub fn coefficients(&self) -> &CoefficientField {
        &self.coeffs
    }

    pub fn integrator(&self) -> Integrator {
        self.integrator
    }

    /// `a_x(v)`.
    pub fn base_value(&self, x: &BasePoint, v: &BasePoint) -> AlgebraVec {
        self.coeffs.apply(x, v)
    }

    /// `A_p(v) = Ad(g^-1)(a_x(v_x) + v_g)`.
    pub fn eval(&self, p: &BundlePoint, v: &TangentVector) -> Result<AlgebraVec> {
        self.bundle.check_point(&p.x)?;
        let inner = self.coeffs.apply(&p.x, &v.vx) + &v.vg;
        Ok(p.g.inverse().adjoint(&inner))
    }

    /// The connection `A + C`.
    pub fn shifted(&self, c: &ShiftForm) -> Result<Self> {
        self.with_coefficients(self.coeffs.add(c.coefficients()))
    }
}

/// An Ad-equivariant horizontal 1-form `C_(x,g)(v) = Ad(g^-1) c_x(v_x)`.
#[derive(Debug, Clone)]
pub struct ShiftForm {
    coeffs: CoefficientField,
}

impl ShiftForm {
    pub fn new(coeffs: CoefficientField) -> Self {
        ShiftForm { coeffs }
    }

    pub fn coefficients(&self) -> &CoefficientField {
        &self.coeffs
    }

    pub fn eval(&self, p: &BundlePoint, v: &TangentVector) -> AlgebraVec {
        p.g.inverse().adjoint(&self.coeffs.apply(&p.x, &v.vx))
    }
}

/// Solves `y_{n+1} = exp(-Ω_n) y_n` on the group, projecting after every
/// step. A vanishing increment leaves the sample bitwise unchanged.
pub fn solve_right_ode(
    group: &Arc<MatrixLieGroup>,
    y0: &GroupElement,
    increments: &[AlgebraVec],
) -> Vec<GroupElement> {
    let mut out = Vec::with_capacity(increments.len() + 1);
    out.push(y0.clone());
    for omega in increments {
        let prev = out.last().expect("nonempty");
        let next = if omega.iter().all(|v| *v == 0.0) {
            prev.clone()
        } else {
            group.exp(&(-omega)).mul(prev).project()
        };
        out.push(next);
    }
    out
}

/// Lagrange cubic through samples `b..b+3` evaluated at fractional index `s`,
/// returning the value and its derivative in index units.
fn cubic(samples: &[BasePoint], b: usize, s: f64) -> (BasePoint, BasePoint) {
    let nodes = [b as f64, (b + 1) as f64, (b + 2) as f64, (b + 3) as f64];
    let dim = samples[b].len();
    let mut val = DVector::zeros(dim);
    let mut der = DVector::zeros(dim);
    for j in 0..4 {
        let mut lj = 1.0;
        let mut dlj = 0.0;
        for m in 0..4 {
            if m == j {
                continue;
            }
            let denom = nodes[j] - nodes[m];
            let mut term = 1.0 / denom;
            for k in 0..4 {
                if k != j && k != m {
                    term *= (s - nodes[k]) / (nodes[j] - nodes[k]);
                }
            }
            dlj += term;
            lj *= (s - nodes[m]) / denom;
        }
        val += &samples[b + j] * lj;
        der += &samples[b + j] * dlj;
    }
    (val, der)
}

/// Per-step generator integrals `Ω_n` of `-(d/dt) g g^-1 = a(γ')` along a
/// sampled base path.
pub fn lift_increments(
    coeffs: &CoefficientField,
    group: &MatrixLieGroup,
    path: &BasePath,
    integrator: Integrator,
) -> Vec<AlgebraVec> {
    let xs = path.samples();
    let n = path.n_steps();
    match integrator {
        Integrator::Magnus4 if n >= 3 => {
            let r = 3f64.sqrt() / 6.0;
            let dt = path.dt();
            (0..n)
                .map(|i| {
                    if xs[i] == xs[i + 1]
                        && xs[i.saturating_sub(1)] == xs[i]
                        && xs[(i + 2).min(n)] == xs[i]
                    {
                        return DVector::zeros(group.dim());
                    }
                    let b = i.saturating_sub(1).min(n - 3);
                    let gen = |c: f64| {
                        let (x, dx) = cubic(xs, b, i as f64 + c);
                        coeffs.apply(&x, &(dx / dt))
                    };
                    let b1 = gen(0.5 - r);
                    let b2 = gen(0.5 + r);
                    (&b1 + &b2) * (0.5 * dt)
                        + group.bracket(&b1, &b2) * (dt * dt * 3f64.sqrt() / 12.0)
                })
                .collect()
        }
        _ => xs
            .windows(2)
            .map(|w| {
                let dx = &w[1] - &w[0];
                if dx.iter().all(|v| *v == 0.0) {
                    DVector::zeros(group.dim())
                } else {
                    coeffs.apply(&((&w[0] + &w[1]) * 0.5), &dx)
                }
            })
            .collect(),
    }
}

/// The horizontal lift of `path` through `p0`. Base samples are copied, so
/// the lift projects onto `path` exactly.
pub fn horizontal_lift(
    conn: &ConnectionForm,
    path: &BasePath,
    p0: &BundlePoint,
) -> Result<BundlePath> {
    let mismatch = (&p0.x - path.start()).norm();
    if mismatch > JOIN_TOL {
        return Err(Error::FiberMismatch { mismatch });
    }
    conn.bundle().check_path(path)?;
    let group = conn.group();
    let inc = lift_increments(conn.coefficients(), group, path, conn.integrator());
    let gs = solve_right_ode(group, &p0.g, &inc);
    let samples = path
        .samples()
        .iter()
        .zip(gs)
        .map(|(x, g)| BundlePoint::new(x.clone(), g))
        .collect();
    path.with_samples(samples)
}

/// Endpoint of the horizontal lift.
pub fn parallel_transport(
    conn: &ConnectionForm,
    path: &BasePath,
    p0: &BundlePoint,
) -> Result<BundlePoint> {
    Ok(horizontal_lift(conn, path, p0)?.end().clone())
}

/// The holonomy `g(t1) g(t0)^-1` of a closed base path.
pub fn holonomy(conn: &ConnectionForm, lp: &BasePath) -> Result<GroupElement> {
    let mismatch = (lp.start() - lp.end()).norm();
    if mismatch > JOIN_TOL {
        return Err(Error::EndpointMismatch { mismatch });
    }
    let p0 = BundlePoint::new(lp.start().clone(), conn.group().identity());
    Ok(parallel_transport(conn, lp, &p0)?.g)
}

/// Tangent of a bundle path at sample `i`. Interior samples use the
/// five-point stencil on `x` and on `ℓ_k = log(g_{i+k} g_i^-1)`, which is
/// fourth-order accurate; the samples next to the ends fall back to central
/// and then one-sided differences.
pub fn path_tangent(path: &BundlePath, i: usize) -> Result<TangentVector> {
    let n = path.n_steps();
    path.sample(i)?;
    let s = path.samples();
    let dt = path.dt();
    if n == 0 || dt == 0.0 {
        return Ok(TangentVector {
            vx: DVector::zeros(s[0].x.len()),
            vg: DVector::zeros(s[0].g.group().dim()),
        });
    }
    let rel = |k: usize| s[k].g.right_div(&s[i].g).log();
    if i >= 2 && i + 2 <= n {
        let vx = (&s[i - 2].x - &s[i + 2].x + (&s[i + 1].x - &s[i - 1].x) * 8.0) / (12.0 * dt);
        let vg = (rel(i - 2)? - rel(i + 2)? + (rel(i + 1)? - rel(i - 1)?) * 8.0) / (12.0 * dt);
        return Ok(TangentVector { vx, vg });
    }
    let (a, b, span) = if i == 0 {
        (1, 0, dt)
    } else if i == n {
        (n, n - 1, dt)
    } else {
        (i + 1, i - 1, 2.0 * dt)
    };
    Ok(TangentVector {
        vx: (&s[a].x - &s[b].x) / span,
        vg: s[a].g.right_div(&s[b].g).log()? / span,
    })
}

/// `‖A(path'(t_i))‖` at every sample, with central-difference tangents.
pub fn tangent_residuals(conn: &ConnectionForm, path: &BundlePath) -> Result<Vec<f64>> {
    (0..=path.n_steps())
        .map(|i| {
            Ok(conn
                .eval(&path.samples()[i], &path_tangent(path, i)?)?
                .norm())
        })
        .collect()
}

/// Largest tangent residual along the path; zero means horizontal.
pub fn tangent_residual(conn: &ConnectionForm, path: &BundlePath) -> Result<f64> {
    Ok(tangent_residuals(conn, path)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// Largest one-step residual `‖Ad(g_n^-1)(log(g_{n+1} g_n^-1) + a(x_mid) Δx)‖ / Δt`.
/// Lifts produced by the exponential midpoint rule satisfy it to rounding.
pub fn step_residual(conn: &ConnectionForm, path: &BundlePath) -> Result<f64> {
    let dt = path.dt();
    if dt == 0.0 {
        return Ok(0.0);
    }
    let mut worst: f64 = 0.0;
    for w in path.samples().windows(2) {
        let dx = &w[1].x - &w[0].x;
        let mid = (&w[0].x + &w[1].x) * 0.5;
        let r = w[1].g.right_div(&w[0].g).log()? + conn.base_value(&mid, &dx);
        worst = worst.max(w[0].g.inverse().adjoint(&r).norm() / dt);
    }
    Ok(worst)
}

/// The path `ξ` in `G` with `ξ(t0) = e` and `ξ' ξ^-1 = -C(γ̃')`, so that
/// `γ̃ ξ` is horizontal for `A + C` whenever `γ̃` is horizontal for `A`.
/// Each step uses the endpoint average of `Ad(g^-1)` on the midpoint value
/// of `c`.
pub fn shifted_transport(
    conn: &ConnectionForm,
    c: &ShiftForm,
    lift: &BundlePath,
) -> Result<GroupPath> {
    let residual = tangent_residual(conn, lift)?;
    if residual > HORIZONTAL_INPUT_TOL {
        return Err(Error::NotHorizontalInput {
            residual,
            tolerance: HORIZONTAL_INPUT_TOL,
        });
    }
    let group = conn.group();
    let inc: Vec<AlgebraVec> = lift
        .samples()
        .windows(2)
        .map(|w| {
            let dx = &w[1].x - &w[0].x;
            if dx.iter().all(|v| *v == 0.0) {
                return DVector::zeros(group.dim());
            }
            let cv = c.coefficients().apply(&((&w[0].x + &w[1].x) * 0.5), &dx);
            (w[0].g.inverse().adjoint(&cv) + w[1].g.inverse().adjoint(&cv)) * 0.5
        })
        .collect();
    let xi = solve_right_ode(group, &group.identity(), &inc);
    lift.with_samples(xi)
}

/// Sample-wise product `γ̃(t) ξ(t)`.
pub fn multiply_path(lift: &BundlePath, xi: &GroupPath) -> Result<BundlePath> {
    if lift.n_steps() != xi.n_steps() {
        return Err(Error::InvalidPath("paths live on different grids".into()));
    }
    let samples = lift
        .samples()
        .iter()
        .zip(xi.samples())
        .map(|(p, k)| p.act(k))
        .collect();
    lift.with_samples(samples)
}
