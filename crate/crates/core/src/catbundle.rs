//! Categorical principal bundles over a trivial bundle and their
//! categorical connections.
//!
//! Two categorical bundles are modelled. The pair bundle `P••` has morphisms
//! `(p1, p0; γ)` for a base path `γ`. The decorated bundle `P^{A,dec}` has
//! morphisms `(γ̃; h)` with `γ̃` an `A`-horizontal path and `h ∈ H`. The
//! functor `𝕊` maps the second to the first. A categorical connection assigns
//! to a base path and an initial point a morphism over that path; its axioms
//! CC1 to CC3 are checked numerically by [`check_cc`].

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{CatGroupMorphism, GddMorphism};
use crate::bundle::{
    horizontal_lift, parallel_transport, project_path, tangent_residual, translate_path,
    BundlePath, BundlePoint, ConnectionForm, TrivialBundle,
};
use crate::error::{Error, Result};
use crate::gauge::{decoration_ode, DecorationForm};
use crate::lie::crossed::LieCrossedModule;
use crate::lie::GroupElement;
use crate::paths::{
    path_compose, path_distance, BasePath, PathPoint, PathSpec, SampledPath, JOIN_TOL,
};

/// A morphism `(p1, p0; γ)` of the pair bundle.
#[derive(Debug, Clone)]
pub struct PPMorphism {
    pub p1: BundlePoint,
    pub p0: BundlePoint,
    pub gamma: BasePath,
}

impl PPMorphism {
    /// Checks that `p0` and `p1` lie over the ends of `gamma`.
    pub fn new(p1: BundlePoint, p0: BundlePoint, gamma: BasePath) -> Result<Self> {
        let mismatch = (&p0.x - gamma.start())
            .norm()
            .max((&p1.x - gamma.end()).norm());
        if mismatch > JOIN_TOL {
            return Err(Error::FiberMismatch { mismatch });
        }
        Ok(PPMorphism { p1, p0, gamma })
    }
}

pub fn pp_source(m: &PPMorphism) -> BundlePoint {
    m.p0.clone()
}

pub fn pp_target(m: &PPMorphism) -> BundlePoint {
    m.p1.clone()
}

/// `(p, p; 1_{π(p)})`.
pub fn pp_identity(p: &BundlePoint, duration: f64, n: usize) -> PPMorphism {
    PPMorphism {
        p1: p.clone(),
        p0: p.clone(),
        gamma: SampledPath::point_path(p.x.clone(), duration, n),
    }
}

/// `(p2, p1; δ) o (p1, p0; γ) = (p2, p0; δ o γ)`.
pub fn pp_compose(m2: &PPMorphism, m1: &PPMorphism) -> Result<PPMorphism> {
    let mismatch = m2.p0.distance(&m1.p1);
    if mismatch > JOIN_TOL {
        return Err(Error::NotComposable { mismatch });
    }
    let gamma = path_compose(&m2.gamma, &m1.gamma).map_err(|e| match e {
        Error::EndpointMismatch { mismatch } => Error::NotComposable { mismatch },
        other => other,
    })?;
    Ok(PPMorphism {
        p1: m2.p1.clone(),
        p0: m1.p0.clone(),
        gamma,
    })
}

/// Action of the morphism `g1 <- g0` of `G••`: `(p1 g1, p0 g0; γ)`.
pub fn pp_act(m: &PPMorphism, phi: &GddMorphism<GroupElement>) -> PPMorphism {
    PPMorphism {
        p1: m.p1.act(&phi.g1),
        p0: m.p0.act(&phi.g0),
        gamma: m.gamma.clone(),
    }
}

pub fn pp_distance(a: &PPMorphism, b: &PPMorphism) -> f64 {
    a.p1.distance(&b.p1)
        .max(a.p0.distance(&b.p0))
        .max(path_distance(&a.gamma, &b.gamma))
}

/// A morphism `(γ̃; h)` of the decorated bundle.
#[derive(Debug, Clone)]
pub struct DecMorphism {
    pub path: BundlePath,
    pub h: GroupElement,
}

impl DecMorphism {
    pub fn new(path: BundlePath, h: GroupElement) -> Self {
        DecMorphism { path, h }
    }
}

/// `s(γ̃; h) = γ̃_0`.
pub fn dec_source(m: &DecMorphism) -> BundlePoint {
    m.path.start().clone()
}

/// `t(γ̃; h) = γ̃_1 τ(h)`.
pub fn dec_target(cm: &LieCrossedModule, m: &DecMorphism) -> BundlePoint {
    m.path.end().act(&cm.tau(&m.h))
}

/// `(1_p; e)`.
pub fn dec_identity(
    cm: &LieCrossedModule,
    p: &BundlePoint,
    duration: f64,
    n: usize,
) -> DecMorphism {
    DecMorphism {
        path: SampledPath::point_path(p.clone(), duration, n),
        h: cm.h().identity(),
    }
}

/// `(γ̃; h)(h', g') = (γ̃ g'; α_{g'^-1}(h h'))`.
pub fn dec_act(
    cm: &LieCrossedModule,
    m: &DecMorphism,
    phi: &CatGroupMorphism<GroupElement, GroupElement>,
) -> DecMorphism {
    DecMorphism {
        path: translate_path(&m.path, &phi.g),
        h: cm.alpha(&phi.g.inverse(), &m.h.mul(&phi.h)),
    }
}

/// `(δ̃; h2) o (γ̃; h1) = (δ̃ τ(h1)^-1 o γ̃; h1 h2)`, defined when
/// `δ̃_0 = γ̃_1 τ(h1)`.
pub fn dec_compose(
    cm: &LieCrossedModule,
    m2: &DecMorphism,
    m1: &DecMorphism,
) -> Result<DecMorphism> {
    let mismatch = m2.path.start().distance(&dec_target(cm, m1));
    if mismatch > JOIN_TOL {
        return Err(Error::NotComposable { mismatch });
    }
    let shifted = translate_path(&m2.path, &cm.tau(&m1.h).inverse());
    let path = path_compose(&shifted, &m1.path).map_err(|e| match e {
        Error::EndpointMismatch { mismatch } => Error::NotComposable { mismatch },
        other => other,
    })?;
    Ok(DecMorphism {
        path,
        h: m1.h.mul(&m2.h),
    })
}

pub fn dec_distance(a: &DecMorphism, b: &DecMorphism) -> f64 {
    path_distance(&a.path, &b.path).max(a.h.distance(&b.h))
}

/// The functor `𝕊(γ̃; h) = (γ̃_1 τ(h), γ̃_0; π o γ̃)`.
pub fn functor_sdec(cm: &LieCrossedModule, m: &DecMorphism) -> PPMorphism {
    PPMorphism {
        p1: dec_target(cm, m),
        p0: dec_source(m),
        gamma: project_path(&m.path),
    }
}

/// Operations shared by the categorical bundles over a trivial bundle.
pub trait CategoricalBundle: Send + Sync {
    type Morphism: Clone + Send + Sync + fmt::Debug;

    fn name(&self) -> &str;
    fn source(&self, m: &Self::Morphism) -> BundlePoint;
    fn target(&self, m: &Self::Morphism) -> BundlePoint;
    /// The base path under a morphism.
    fn projection(&self, m: &Self::Morphism) -> BasePath;
    fn identity(&self, p: &BundlePoint, duration: f64, n: usize) -> Self::Morphism;
    fn compose(&self, m2: &Self::Morphism, m1: &Self::Morphism) -> Result<Self::Morphism>;
    /// Action of the identity morphism `1_g` of the structure categorical group.
    fn act_identity(&self, m: &Self::Morphism, g: &GroupElement) -> Self::Morphism;
    fn distance(&self, a: &Self::Morphism, b: &Self::Morphism) -> f64;
}

/// The pair bundle `P••`.
#[derive(Debug, Clone)]
pub struct PairBundle {
    bundle: TrivialBundle,
}

impl PairBundle {
    pub fn new(bundle: TrivialBundle) -> Self {
        PairBundle { bundle }
    }

    pub fn bundle(&self) -> &TrivialBundle {
        &self.bundle
    }
}

impl CategoricalBundle for PairBundle {
    type Morphism = PPMorphism;

    fn name(&self) -> &str {
        "pair"
    }

    fn source(&self, m: &PPMorphism) -> BundlePoint {
        pp_source(m)
    }

    fn target(&self, m: &PPMorphism) -> BundlePoint {
        pp_target(m)
    }

    fn projection(&self, m: &PPMorphism) -> BasePath {
        m.gamma.clone()
    }

    fn identity(&self, p: &BundlePoint, duration: f64, n: usize) -> PPMorphism {
        pp_identity(p, duration, n)
    }

    fn compose(&self, m2: &PPMorphism, m1: &PPMorphism) -> Result<PPMorphism> {
        pp_compose(m2, m1)
    }

    fn act_identity(&self, m: &PPMorphism, g: &GroupElement) -> PPMorphism {
        pp_act(
            m,
            &GddMorphism {
                g1: g.clone(),
                g0: g.clone(),
            },
        )
    }

    fn distance(&self, a: &PPMorphism, b: &PPMorphism) -> f64 {
        pp_distance(a, b)
    }
}

/// The decorated bundle `P^{A,dec}` of a connection and a crossed module
/// whose `G` is the structure group.
#[derive(Debug, Clone)]
pub struct DecoratedBundle {
    conn: ConnectionForm,
    cm: LieCrossedModule,
}

impl DecoratedBundle {
    pub fn new(conn: ConnectionForm, cm: LieCrossedModule) -> Result<Self> {
        if cm.g().kind() != conn.group().kind() {
            return Err(Error::Fixture(format!(
                "crossed module acts by {} but the bundle has group {}",
                cm.g().name(),
                conn.group().name()
            )));
        }
        Ok(DecoratedBundle { conn, cm })
    }

    pub fn connection(&self) -> &ConnectionForm {
        &self.conn
    }

    pub fn crossed_module(&self) -> &LieCrossedModule {
        &self.cm
    }

    /// Horizontality residual of the path of a morphism.
    pub fn horizontality(&self, m: &DecMorphism) -> Result<f64> {
        tangent_residual(&self.conn, &m.path)
    }

    pub fn act(
        &self,
        m: &DecMorphism,
        phi: &CatGroupMorphism<GroupElement, GroupElement>,
    ) -> DecMorphism {
        dec_act(&self.cm, m, phi)
    }
}

impl CategoricalBundle for DecoratedBundle {
    type Morphism = DecMorphism;

    fn name(&self) -> &str {
        "decorated"
    }

    fn source(&self, m: &DecMorphism) -> BundlePoint {
        dec_source(m)
    }

    fn target(&self, m: &DecMorphism) -> BundlePoint {
        dec_target(&self.cm, m)
    }

    fn projection(&self, m: &DecMorphism) -> BasePath {
        project_path(&m.path)
    }

    fn identity(&self, p: &BundlePoint, duration: f64, n: usize) -> DecMorphism {
        dec_identity(&self.cm, p, duration, n)
    }

    fn compose(&self, m2: &DecMorphism, m1: &DecMorphism) -> Result<DecMorphism> {
        dec_compose(&self.cm, m2, m1)
    }

    fn act_identity(&self, m: &DecMorphism, g: &GroupElement) -> DecMorphism {
        dec_act(
            &self.cm,
            m,
            &CatGroupMorphism::new(self.cm.h().identity(), g.clone()),
        )
    }

    fn distance(&self, a: &DecMorphism, b: &DecMorphism) -> f64 {
        dec_distance(a, b)
    }
}

/// How a categorical connection was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    StandardPp,
    LiftedDec,
    PushforwardDec,
    PushforwardGeneral,
    CustomDec,
}

type LiftFn<M> = Arc<dyn Fn(&BasePath, &BundlePoint) -> Result<M> + Send + Sync>;

/// A categorical connection: a horizontal-lift rule `τ(γ; p)`.
pub struct CatConnection<M> {
    flavor: Flavor,
    lift: LiftFn<M>,
}

impl<M> Clone for CatConnection<M> {
    fn clone(&self) -> Self {
        CatConnection {
            flavor: self.flavor,
            lift: self.lift.clone(),
        }
    }
}

impl<M> fmt::Debug for CatConnection<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CatConnection({:?})", self.flavor)
    }
}

impl<M> CatConnection<M> {
    pub fn new(
        flavor: Flavor,
        lift: impl Fn(&BasePath, &BundlePoint) -> Result<M> + Send + Sync + 'static,
    ) -> Self {
        CatConnection {
            flavor,
            lift: Arc::new(lift),
        }
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// `τ(γ; p)`; requires `π(p) = γ(t0)`.
    pub fn lift(&self, gamma: &BasePath, p: &BundlePoint) -> Result<M> {
        (self.lift)(gamma, p)
    }
}

/// `τ(γ; p) = (q, p; γ)` with `q` the parallel transport of `p` along `γ`.
pub fn conn_standard(conn: &ConnectionForm) -> CatConnection<PPMorphism> {
    let conn = conn.clone();
    CatConnection::new(Flavor::StandardPp, move |gamma, p| {
        let q = parallel_transport(&conn, gamma, p)?;
        PPMorphism::new(q, p.clone(), gamma.clone())
    })
}

/// `τ(γ; p) = (γ̃_p; e)` with `γ̃_p` the horizontal lift.
pub fn conn_lift_dec(bundle: &DecoratedBundle) -> CatConnection<DecMorphism> {
    let conn = bundle.connection().clone();
    let e = bundle.crossed_module().h().identity();
    CatConnection::new(Flavor::LiftedDec, move |gamma, p| {
        Ok(DecMorphism::new(
            horizontal_lift(&conn, gamma, p)?,
            e.clone(),
        ))
    })
}

/// `τ(γ; p) = (γ̃_p; h_{γ̃_p})` with the decoration transported by `λ`.
pub fn conn_custom_dec(
    bundle: &DecoratedBundle,
    lambda: &DecorationForm,
) -> CatConnection<DecMorphism> {
    let conn = bundle.connection().clone();
    let lambda = lambda.clone();
    CatConnection::new(Flavor::CustomDec, move |gamma, p| {
        let lift = horizontal_lift(&conn, gamma, p)?;
        let h = decoration_ode(&lambda, &lift)?.end().clone();
        Ok(DecMorphism::new(lift, h))
    })
}

/// `τ(γ; p) = (q τ(h), p; γ)` where `(γ̃; h) = τ_1(γ; p)` and `q = γ̃_1`.
pub fn conn_pushforward_dec(
    bundle: &DecoratedBundle,
    a1: &CatConnection<DecMorphism>,
) -> CatConnection<PPMorphism> {
    let cm = bundle.crossed_module().clone();
    let a1 = a1.clone();
    CatConnection::new(Flavor::PushforwardDec, move |gamma, p| {
        Ok(functor_sdec(&cm, &a1.lift(gamma, p)?))
    })
}

/// Which point `p` over `π(q)` the general pushforward lifts from.
#[derive(Debug, Clone)]
pub enum FiberChoice {
    /// `p = (π(q), e)`.
    IdentitySection,
    /// `p = (π(q), a)`.
    Shifted(GroupElement),
}

type ObjMap = Arc<dyn Fn(&BundlePoint) -> BundlePoint + Send + Sync>;
type MorMap<MP, MQ> = Arc<dyn Fn(&MP) -> Result<MQ> + Send + Sync>;
type GroupMap = Arc<dyn Fn(&GroupElement) -> GroupElement + Send + Sync>;

/// A morphism of categorical bundles `𝕊: 𝐏 -> 𝐐` over a functor
/// `S: 𝐆 -> 𝐊`, with `S` recorded on objects, and the fiber choice used by
/// the general pushforward.
pub struct BundleMorphismPair<MP, MQ> {
    pub obj_map: ObjMap,
    pub mor_map: MorMap<MP, MQ>,
    pub group_map: GroupMap,
    pub fiber: FiberChoice,
    /// The identity element of the structure group of `𝐏`.
    pub p_identity: GroupElement,
}

impl<MP, MQ> Clone for BundleMorphismPair<MP, MQ> {
    fn clone(&self) -> Self {
        BundleMorphismPair {
            obj_map: self.obj_map.clone(),
            mor_map: self.mor_map.clone(),
            group_map: self.group_map.clone(),
            fiber: self.fiber.clone(),
            p_identity: self.p_identity.clone(),
        }
    }
}

impl<MP, MQ> BundleMorphismPair<MP, MQ> {
    pub fn with_fiber(&self, fiber: FiberChoice) -> Self {
        BundleMorphismPair {
            fiber,
            ..self.clone()
        }
    }

    /// The point `p` over `π(q)` prescribed by the fiber choice.
    pub fn fiber_point(&self, q: &BundlePoint) -> BundlePoint {
        match &self.fiber {
            FiberChoice::IdentitySection => BundlePoint::new(q.x.clone(), self.p_identity.clone()),
            FiberChoice::Shifted(a) => BundlePoint::new(q.x.clone(), a.clone()),
        }
    }

    /// Largest residual of `𝕊(p g) = 𝕊(p) S(g)` over the given samples.
    pub fn object_equivariance(&self, samples: &[(BundlePoint, GroupElement)]) -> f64 {
        samples
            .iter()
            .map(|(p, g)| {
                (self.obj_map)(&p.act(g)).distance(&(self.obj_map)(p).act(&(self.group_map)(g)))
            })
            .fold(0.0, f64::max)
    }
}

/// The identity pair `𝐏 = 𝐐`.
pub fn identity_pair<M: Clone + Send + Sync + 'static>(
    identity: GroupElement,
) -> BundleMorphismPair<M, M> {
    BundleMorphismPair {
        obj_map: Arc::new(|p| p.clone()),
        mor_map: Arc::new(|m: &M| Ok(m.clone())),
        group_map: Arc::new(|g| g.clone()),
        fiber: FiberChoice::IdentitySection,
        p_identity: identity,
    }
}

/// The pair `(𝕊, S)` from the decorated bundle to the pair bundle.
pub fn sdec_pair(bundle: &DecoratedBundle) -> BundleMorphismPair<DecMorphism, PPMorphism> {
    let cm = bundle.crossed_module().clone();
    BundleMorphismPair {
        obj_map: Arc::new(|p| p.clone()),
        mor_map: Arc::new(move |m| Ok(functor_sdec(&cm, m))),
        group_map: Arc::new(|g| g.clone()),
        fiber: FiberChoice::IdentitySection,
        p_identity: bundle.connection().group().identity(),
    }
}

/// `τ_𝐐(γ; q) = 𝕊(τ_𝐏(γ; p)) k` with `p` given by the fiber choice and `k`
/// solving `q = 𝕊(p) k`.
pub fn conn_pushforward_general<BQ, MP>(
    tau_p: &CatConnection<MP>,
    pair: &BundleMorphismPair<MP, BQ::Morphism>,
    q_bundle: Arc<BQ>,
) -> CatConnection<BQ::Morphism>
where
    BQ: CategoricalBundle + 'static,
    MP: 'static,
{
    let tau_p = tau_p.clone();
    let pair = pair.clone();
    CatConnection::new(Flavor::PushforwardGeneral, move |gamma, q| {
        let p = pair.fiber_point(q);
        let sp = (pair.obj_map)(&p);
        let k = sp.g.inverse().mul(&q.g);
        let mismatch = sp.act(&k).distance(q);
        if mismatch > JOIN_TOL {
            return Err(Error::FiberSolveFailed { mismatch });
        }
        let m = (pair.mor_map)(&tau_p.lift(gamma, &p)?)?;
        Ok(q_bundle.act_identity(&m, &k))
    })
}

/// Worst residuals of the two functor equations of `𝕊` over random
/// decorated morphisms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdecReport {
    pub draws: usize,
    /// `𝕊(ōδ o ōγ)` against `𝕊(ōδ) o 𝕊(ōγ)`.
    pub composition: f64,
    /// `𝕊(ōγ φ)` against `𝕊(ōγ) S(φ)`.
    pub intertwining: f64,
}

fn random_base_point<R: rand::Rng>(rng: &mut R) -> Vec<f64> {
    vec![rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9)]
}

/// Draws `draws` decorated morphisms over straight lines in the unit square,
/// each sampled with `n` steps, and evaluates both functor equations.
pub fn check_sdec_functor(
    bundle: &DecoratedBundle,
    draws: usize,
    n: usize,
    seed: u64,
) -> Result<SdecReport> {
    use rand::SeedableRng;
    let cm = bundle.crossed_module();
    let rows: Vec<(f64, f64)> = (0..draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let a = random_base_point(&mut rng);
            let b = random_base_point(&mut rng);
            let c = random_base_point(&mut rng);
            let p = BundlePoint::new(
                nalgebra::DVector::from_vec(a.clone()),
                cm.g().sample(&mut rng, 1.0),
            );
            let first = horizontal_lift(
                bundle.connection(),
                &PathSpec::line(&a, &b, 1.0).sample(n)?,
                &p,
            )?;
            let m1 = DecMorphism::new(first, cm.h().sample(&mut rng, 1.0));
            let mid = dec_target(cm, &m1);
            let second = horizontal_lift(
                bundle.connection(),
                &PathSpec::line(&b, &c, 1.0).sample(n)?,
                &mid,
            )?;
            let m2 = DecMorphism::new(second, cm.h().sample(&mut rng, 1.0));
            let lhs = functor_sdec(cm, &dec_compose(cm, &m2, &m1)?);
            let rhs = pp_compose(&functor_sdec(cm, &m2), &functor_sdec(cm, &m1))?;
            let composition = pp_distance(&lhs, &rhs);
            let phi =
                CatGroupMorphism::new(cm.h().sample(&mut rng, 1.0), cm.g().sample(&mut rng, 1.0));
            let lhs = functor_sdec(cm, &dec_act(cm, &m1, &phi));
            let rhs = pp_act(&functor_sdec(cm, &m1), &crate::algebra::functor_s(cm, &phi));
            Ok((composition, pp_distance(&lhs, &rhs)))
        })
        .collect::<Result<_>>()?;
    Ok(SdecReport {
        draws,
        composition: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        intertwining: rows.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}

/// A test path split as `second o first`, a starting point and a group
/// element for the equivariance check.
#[derive(Debug, Clone)]
pub struct CCCase {
    pub id: String,
    pub first: PathSpec,
    pub second: PathSpec,
    pub point: BundlePoint,
    pub g: GroupElement,
}

impl CCCase {
    pub fn whole(&self) -> PathSpec {
        self.first.then(&self.second)
    }
}

/// Worst residual of one axiom over a battery.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CCEntry {
    pub axiom: String,
    pub residual: f64,
    pub worst_case_input_id: String,
}

/// Residuals of CC1 to CC3 for one connection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CCReport {
    pub flavor: Flavor,
    pub n_steps: usize,
    pub entries: Vec<CCEntry>,
}

impl CCReport {
    pub fn residual(&self, axiom: &str) -> f64 {
        self.entries
            .iter()
            .find(|e| e.axiom == axiom)
            .map(|e| e.residual)
            .unwrap_or(f64::NAN)
    }
}

/// Residuals of the three axioms on one case. CC1 compares the lift of a
/// point path with the identity; CC2 compares `τ(γ; pg)` with `τ(γ; p) 1_g`;
/// CC3 compares the lift of the whole path sampled with `n` steps against
/// the composite of the lifts of its two pieces sampled with `n` steps each.
pub fn cc_case_residuals<B: CategoricalBundle>(
    bundle: &B,
    conn: &CatConnection<B::Morphism>,
    case: &CCCase,
    n: usize,
) -> Result<[f64; 3]> {
    let p = &case.point;
    let point_path = SampledPath::point_path(p.x.clone(), 1.0, n);
    let cc1 = bundle.distance(&conn.lift(&point_path, p)?, &bundle.identity(p, 1.0, n));

    let gamma = case.first.sample(n)?;
    let base = conn.lift(&gamma, p)?;
    let cc2 = bundle.distance(
        &conn.lift(&gamma, &p.act(&case.g))?,
        &bundle.act_identity(&base, &case.g),
    );

    let delta = case.second.sample(n)?;
    let mid = bundle.target(&base);
    let sequential = bundle.compose(&conn.lift(&delta, &mid)?, &base)?;
    let whole = conn.lift(&case.whole().sample(n)?, p)?;
    let cc3 = bundle.distance(&whole, &sequential);
    Ok([cc1, cc2, cc3])
}

/// Runs the CC1 to CC3 checks over a battery in parallel.
pub fn check_cc<B: CategoricalBundle>(
    bundle: &B,
    conn: &CatConnection<B::Morphism>,
    battery: &[CCCase],
    n: usize,
) -> Result<CCReport> {
    if battery.is_empty() {
        return Err(Error::InvalidPath("empty battery".into()));
    }
    let rows: Vec<[f64; 3]> = battery
        .par_iter()
        .map(|case| cc_case_residuals(bundle, conn, case, n))
        .collect::<Result<_>>()?;
    let entries = ["CC1", "CC2", "CC3"]
        .iter()
        .enumerate()
        .map(|(k, axiom)| {
            let (idx, residual) = rows.iter().enumerate().map(|(i, r)| (i, r[k])).fold(
                (0, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
            CCEntry {
                axiom: axiom.to_string(),
                residual,
                worst_case_input_id: battery[idx].id.clone(),
            }
        })
        .collect();
    Ok(CCReport {
        flavor: conn.flavor(),
        n_steps: n,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::lie::MatrixLieGroup;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn dec() -> DecoratedBundle {
        DecoratedBundle::new(
            fixtures::testbed_connection(),
            fixtures::testbed_crossed_module(),
        )
        .unwrap()
    }

    fn lift_at(
        bundle: &DecoratedBundle,
        spec: &PathSpec,
        g: &GroupElement,
        n: usize,
    ) -> BundlePath {
        let path = spec.sample(n).unwrap();
        horizontal_lift(
            bundle.connection(),
            &path,
            &BundlePoint::new(path.start().clone(), g.clone()),
        )
        .unwrap()
    }

    fn random_dec(bundle: &DecoratedBundle, rng: &mut ChaCha8Rng) -> DecMorphism {
        let cm = bundle.crossed_module();
        let a = v(&[rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9)]);
        let b = v(&[rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9)]);
        let spec = PathSpec::line(a.as_slice(), b.as_slice(), 1.0);
        DecMorphism::new(
            lift_at(bundle, &spec, &cm.g().sample(rng, 1.0), 100),
            cm.h().sample(rng, 1.0),
        )
    }

    fn random_phi(
        cm: &LieCrossedModule,
        rng: &mut ChaCha8Rng,
    ) -> CatGroupMorphism<GroupElement, GroupElement> {
        CatGroupMorphism::new(cm.h().sample(rng, 1.0), cm.g().sample(rng, 1.0))
    }

    #[test]
    fn sdec_functor_check_over_random_draws() {
        let r = check_sdec_functor(&dec(), 64, 60, 42).unwrap();
        assert!(r.composition <= 1e-10 && r.intertwining <= 1e-10, "{r:?}");
    }

    #[test]
    fn pp_identity_and_composition() {
        let g = MatrixLieGroup::su2();
        let conn = fixtures::testbed_connection();
        let std = conn_standard(&conn);
        let a = PathSpec::line(&[0.1, 0.1], &[0.6, 0.2], 1.0)
            .sample(100)
            .unwrap();
        let b = PathSpec::line(&[0.6, 0.2], &[0.7, 0.8], 1.0)
            .sample(100)
            .unwrap();
        let p0 = BundlePoint::new(a.start().clone(), g.identity());
        let m1 = std.lift(&a, &p0).unwrap();
        let m2 = std.lift(&b, &m1.p1).unwrap();
        let c = pp_compose(&m2, &m1).unwrap();
        assert_eq!(c.p0.distance(&p0), 0.0);
        assert_eq!(c.p1.distance(&m2.p1), 0.0);
        assert_eq!(c.gamma.n_steps(), 200);
        let id = pp_identity(&m1.p1, 1.0, 100);
        let left = pp_compose(&id, &m1).unwrap();
        assert_eq!(left.p1.distance(&m1.p1), 0.0);
        assert_eq!(&left.gamma.samples()[..=100], m1.gamma.samples());
        assert!(matches!(
            pp_compose(&m1, &m1),
            Err(Error::NotComposable { .. })
        ));
    }

    #[test]
    fn pp_action_commutes_with_composition() {
        let conn = fixtures::testbed_connection();
        let group = conn.group().clone();
        let std = conn_standard(&conn);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a = PathSpec::line(&[0.1, 0.1], &[0.6, 0.2], 1.0)
            .sample(100)
            .unwrap();
        let b = PathSpec::arc(&[0.6, 0.5], 0.3, -std::f64::consts::FRAC_PI_2, 0.5, 1.0)
            .sample(100)
            .unwrap();
        let m1 = std
            .lift(
                &a,
                &BundlePoint::new(a.start().clone(), group.sample(&mut rng, 1.0)),
            )
            .unwrap();
        let m2 = std.lift(&b, &m1.p1).unwrap();
        let (g0, g1, g2) = (
            group.sample(&mut rng, 1.0),
            group.sample(&mut rng, 1.0),
            group.sample(&mut rng, 1.0),
        );
        let phi1 = GddMorphism { g1: g1.clone(), g0 };
        let phi2 = GddMorphism { g1: g2, g0: g1 };
        let phi = GddMorphism {
            g1: phi2.g1.clone(),
            g0: phi1.g0.clone(),
        };
        let lhs = pp_compose(&pp_act(&m2, &phi2), &pp_act(&m1, &phi1)).unwrap();
        let rhs = pp_act(&pp_compose(&m2, &m1).unwrap(), &phi);
        assert!(pp_distance(&lhs, &rhs) <= 1e-10);
    }

    #[test]
    fn dec_source_and_target() {
        let bundle = dec();
        let cm = bundle.crossed_module();
        let lift = lift_at(
            &bundle,
            &PathSpec::line(&[0.2, 0.2], &[0.8, 0.4], 1.0),
            &cm.g().identity(),
            100,
        );
        let plain = DecMorphism::new(lift.clone(), cm.h().identity());
        assert_eq!(dec_target(cm, &plain).distance(lift.end()), 0.0);
        let h = cm.h().exp(&v(&[1.0, 0.0, 0.0]));
        let m = DecMorphism::new(lift.clone(), h.clone());
        let direct = lift.end().g.matrix() * h.matrix();
        assert!((dec_target(cm, &m).g.matrix() - direct).norm() <= 1e-15);
        assert_eq!(dec_source(&m).distance(lift.start()), 0.0);
    }

    #[test]
    fn dec_action_is_a_right_action_and_respects_composition() {
        let bundle = dec();
        let cm = bundle.crossed_module();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let m = random_dec(&bundle, &mut rng);
        let trivial = CatGroupMorphism::new(cm.h().identity(), cm.g().identity());
        assert!(dec_distance(&dec_act(cm, &m, &trivial), &m) <= 1e-15);
        for _ in 0..20 {
            let m = random_dec(&bundle, &mut rng);
            let (phi, psi) = (random_phi(cm, &mut rng), random_phi(cm, &mut rng));
            let lhs = dec_act(cm, &dec_act(cm, &m, &phi), &psi);
            let rhs = dec_act(cm, &m, &crate::algebra::cg_mul(cm, &phi, &psi));
            assert!(dec_distance(&lhs, &rhs) <= 1e-10);
        }
        let h1 = cm.h().sample(&mut rng, 1.0);
        let gamma = DecMorphism::new(
            lift_at(
                &bundle,
                &PathSpec::line(&[0.1, 0.1], &[0.5, 0.2], 1.0),
                &cm.g().sample(&mut rng, 1.0),
                100,
            ),
            h1,
        );
        let start = dec_target(cm, &gamma);
        let delta_path = horizontal_lift(
            bundle.connection(),
            &PathSpec::line(&[0.5, 0.2], &[0.4, 0.9], 1.0)
                .sample(100)
                .unwrap(),
            &start,
        )
        .unwrap();
        let delta = DecMorphism::new(delta_path, cm.h().sample(&mut rng, 1.0));
        let phi1 = random_phi(cm, &mut rng);
        let phi2 = CatGroupMorphism::new(
            cm.h().sample(&mut rng, 1.0),
            crate::algebra::cg_target(cm, &phi1),
        );
        let lhs =
            dec_compose(cm, &dec_act(cm, &delta, &phi2), &dec_act(cm, &gamma, &phi1)).unwrap();
        let phi = crate::algebra::cg_compose(cm, &phi2, &phi1).unwrap();
        let rhs = dec_act(cm, &dec_compose(cm, &delta, &gamma).unwrap(), &phi);
        assert!(dec_distance(&lhs, &rhs) <= 1e-10);
    }

    #[test]
    fn dec_composition_identity_and_associativity() {
        let bundle = dec();
        let cm = bundle.crossed_module();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lift = |spec: PathSpec, p: &BundlePoint| {
            horizontal_lift(bundle.connection(), &spec.sample(100).unwrap(), p).unwrap()
        };
        let p = BundlePoint::new(v(&[0.1, 0.1]), cm.g().sample(&mut rng, 1.0));
        let m1 = DecMorphism::new(
            lift(PathSpec::line(&[0.1, 0.1], &[0.5, 0.2], 1.0), &p),
            cm.h().sample(&mut rng, 1.0),
        );
        let m2 = DecMorphism::new(
            lift(
                PathSpec::line(&[0.5, 0.2], &[0.6, 0.7], 1.0),
                &dec_target(cm, &m1),
            ),
            cm.h().sample(&mut rng, 1.0),
        );
        let m3 = DecMorphism::new(
            lift(
                PathSpec::line(&[0.6, 0.7], &[0.2, 0.8], 1.0),
                &dec_target(cm, &m2),
            ),
            cm.h().sample(&mut rng, 1.0),
        );
        let c = dec_compose(cm, &m2, &m1).unwrap();
        assert!(dec_source(&c).distance(&dec_source(&m1)) <= 1e-15);
        assert!(dec_target(cm, &c).distance(&dec_target(cm, &m2)) <= 1e-12);
        let left = dec_compose(cm, &m3, &c).unwrap();
        let right = dec_compose(cm, &dec_compose(cm, &m3, &m2).unwrap(), &m1).unwrap();
        assert!(dec_distance(&left, &right) <= 1e-9);
        let id = dec_identity(cm, &dec_target(cm, &m1), 1.0, 100);
        let padded = dec_compose(cm, &id, &m1).unwrap();
        assert!(padded.h.distance(&m1.h) <= 1e-15);
        assert!(padded.path.samples()[..=100]
            .iter()
            .zip(m1.path.samples())
            .all(|(a, b)| a.distance(b) <= 1e-12));
        assert!(matches!(
            dec_compose(cm, &m1, &m1),
            Err(Error::NotComposable { .. })
        ));
        assert!(bundle.horizontality(&c).unwrap() <= 1e-4);
    }

    #[test]
    fn sdec_is_a_functor_intertwining_the_actions() {
        let bundle = dec();
        let cm = bundle.crossed_module();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let p = BundlePoint::new(v(&[0.3, 0.3]), cm.g().sample(&mut rng, 1.0));
        let id = functor_sdec(cm, &dec_identity(cm, &p, 1.0, 50));
        assert_eq!(id.p0.distance(&p), 0.0);
        assert_eq!(id.p1.distance(&p), 0.0);
        for _ in 0..50 {
            let m = random_dec(&bundle, &mut rng);
            let phi = random_phi(cm, &mut rng);
            let lhs = functor_sdec(cm, &dec_act(cm, &m, &phi));
            let rhs = pp_act(&functor_sdec(cm, &m), &crate::algebra::functor_s(cm, &phi));
            assert!(pp_distance(&lhs, &rhs) <= 1e-10);
        }
        let m1 = random_dec(&bundle, &mut rng);
        let start = dec_target(cm, &m1);
        let d = horizontal_lift(
            bundle.connection(),
            &PathSpec::line(start.x.as_slice(), &[0.5, 0.5], 1.0)
                .sample(100)
                .unwrap(),
            &start,
        )
        .unwrap();
        let m2 = DecMorphism::new(d, cm.h().sample(&mut rng, 1.0));
        let lhs = functor_sdec(cm, &dec_compose(cm, &m2, &m1).unwrap());
        let rhs = pp_compose(&functor_sdec(cm, &m2), &functor_sdec(cm, &m1)).unwrap();
        assert!(pp_distance(&lhs, &rhs) <= 1e-10);
    }

    fn flat_battery() -> Vec<CCCase> {
        fixtures::cc_battery(&MatrixLieGroup::su2(), 42)
    }

    #[test]
    fn flat_standard_connection_passes_exactly() {
        let conn = ConnectionForm::flat(fixtures::testbed_bundle());
        let report = check_cc(
            &PairBundle::new(conn.bundle().clone()),
            &conn_standard(&conn),
            &flat_battery(),
            200,
        )
        .unwrap();
        for e in &report.entries {
            assert!(e.residual <= 1e-12, "{e:?}");
        }
        let gamma = PathSpec::line(&[0.2, 0.2], &[0.8, 0.5], 1.0)
            .sample(100)
            .unwrap();
        let g0 = conn.group().exp(&v(&[0.1, 0.2, 0.3]));
        let m = conn_standard(&conn)
            .lift(&gamma, &BundlePoint::new(gamma.start().clone(), g0.clone()))
            .unwrap();
        assert_eq!(m.p1.g.matrix(), g0.matrix());
        assert_eq!(m.p1.x, *gamma.end());
    }

    #[test]
    fn curved_connections_satisfy_the_axioms() {
        let bundle = dec();
        let pair = PairBundle::new(bundle.connection().bundle().clone());
        let battery = fixtures::cc_battery(bundle.connection().group(), 42);
        let std = check_cc(&pair, &conn_standard(bundle.connection()), &battery, 1000).unwrap();
        let lifted = conn_lift_dec(&bundle);
        let dec_report = check_cc(&bundle, &lifted, &battery, 1000).unwrap();
        let custom = conn_custom_dec(&bundle, &fixtures::testbed_decoration());
        let custom_report = check_cc(&bundle, &custom, &battery, 1000).unwrap();
        let push = check_cc(
            &pair,
            &conn_pushforward_dec(&bundle, &custom),
            &battery,
            1000,
        )
        .unwrap();
        for r in [&std, &dec_report, &custom_report, &push] {
            assert!(r.residual("CC1") <= 1e-10, "{r:?}");
            assert!(r.residual("CC2") <= 1e-10, "{r:?}");
            assert!(r.residual("CC3") <= 5e-6, "{r:?}");
        }
    }

    #[test]
    fn broken_connection_fails_cc3() {
        let conn = fixtures::testbed_connection();
        let good = conn_standard(&conn);
        let bump = conn.group().exp(&v(&[0.5, 0.0, 0.0]));
        let broken = CatConnection::new(
            Flavor::StandardPp,
            move |gamma: &BasePath, p: &BundlePoint| {
                let mut m = good.lift(gamma, p)?;
                if (gamma.end() - gamma.start()).norm() > 0.0 {
                    m.p1 = m.p1.act(&bump);
                }
                Ok(m)
            },
        );
        let pair = PairBundle::new(conn.bundle().clone());
        let report =
            check_cc(&pair, &broken, &fixtures::cc_battery(conn.group(), 42), 200).unwrap();
        assert!(report.residual("CC3") > 0.1);
        assert!(report.residual("CC1") <= 1e-12);
    }

    #[test]
    fn pushforward_of_the_plain_lift_is_the_standard_connection() {
        let bundle = dec();
        let pair = Arc::new(PairBundle::new(bundle.connection().bundle().clone()));
        let lifted = conn_lift_dec(&bundle);
        let via_dec = conn_pushforward_dec(&bundle, &lifted);
        let general = conn_pushforward_general(&lifted, &sdec_pair(&bundle), pair.clone());
        let std = conn_standard(bundle.connection());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gamma = PathSpec::arc(&[0.5, 0.5], 0.3, 0.0, 2.0, 1.0)
            .sample(300)
            .unwrap();
        for _ in 0..5 {
            let q = BundlePoint::new(
                gamma.start().clone(),
                bundle.connection().group().sample(&mut rng, 1.0),
            );
            let a = std.lift(&gamma, &q).unwrap();
            assert!(pp_distance(&a, &via_dec.lift(&gamma, &q).unwrap()) <= 1e-12);
            assert!(pp_distance(&a, &general.lift(&gamma, &q).unwrap()) <= 1e-9);
        }
    }

    #[test]
    fn general_pushforward_is_independent_of_the_fiber_point() {
        let bundle = dec();
        let group = bundle.connection().group().clone();
        let pair_bundle = Arc::new(PairBundle::new(bundle.connection().bundle().clone()));
        let custom = conn_custom_dec(&bundle, &fixtures::testbed_decoration());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = group.sample(&mut rng, 1.0);
        let s = sdec_pair(&bundle);
        let c1 = conn_pushforward_general(&custom, &s, pair_bundle.clone());
        let c2 =
            conn_pushforward_general(&custom, &s.with_fiber(FiberChoice::Shifted(a)), pair_bundle);
        let specialized = conn_pushforward_dec(&bundle, &custom);
        let gamma = PathSpec::line(&[0.2, 0.3], &[0.7, 0.8], 1.0)
            .sample(400)
            .unwrap();
        let q = BundlePoint::new(gamma.start().clone(), group.sample(&mut rng, 1.0));
        let m1 = c1.lift(&gamma, &q).unwrap();
        assert!(pp_distance(&m1, &c2.lift(&gamma, &q).unwrap()) <= 1e-9);
        assert!(pp_distance(&m1, &specialized.lift(&gamma, &q).unwrap()) <= 1e-10);
        let samples: Vec<_> = (0..10)
            .map(|_| {
                (
                    BundlePoint::new(v(&[0.5, 0.5]), group.sample(&mut rng, 1.0)),
                    group.sample(&mut rng, 1.0),
                )
            })
            .collect();
        assert!(s.object_equivariance(&samples) <= 1e-12);
    }

    #[test]
    fn identity_pair_reproduces_the_connection() {
        let bundle = dec();
        let lifted = conn_lift_dec(&bundle);
        let same = conn_pushforward_general(
            &lifted,
            &identity_pair(bundle.connection().group().identity()),
            Arc::new(bundle.clone()),
        );
        let gamma = PathSpec::line(&[0.2, 0.3], &[0.7, 0.8], 1.0)
            .sample(200)
            .unwrap();
        let q = BundlePoint::new(
            gamma.start().clone(),
            bundle.connection().group().exp(&v(&[0.3, 0.3, 0.3])),
        );
        let d = dec_distance(
            &lifted.lift(&gamma, &q).unwrap(),
            &same.lift(&gamma, &q).unwrap(),
        );
        assert!(d <= 1e-12);
    }

    #[test]
    fn fiber_solver_reports_base_mismatch() {
        let bundle = dec();
        let mut s = sdec_pair(&bundle);
        s.obj_map = Arc::new(|p: &BundlePoint| BundlePoint::new(&p.x * 0.5, p.g.clone()));
        let pair_bundle = Arc::new(PairBundle::new(bundle.connection().bundle().clone()));
        let c = conn_pushforward_general(&conn_lift_dec(&bundle), &s, pair_bundle);
        let gamma = PathSpec::line(&[0.2, 0.3], &[0.7, 0.8], 1.0)
            .sample(50)
            .unwrap();
        let q = BundlePoint::new(
            gamma.start().clone(),
            bundle.connection().group().identity(),
        );
        assert!(matches!(
            c.lift(&gamma, &q),
            Err(Error::FiberSolveFailed { .. })
        ));
    }

    #[test]
    fn lift_dec_equivariance_under_one_g() {
        let bundle = dec();
        let lifted = conn_lift_dec(&bundle);
        let group = bundle.connection().group().clone();
        let gamma = PathSpec::line(&[0.2, 0.3], &[0.7, 0.8], 1.0)
            .sample(200)
            .unwrap();
        let p = BundlePoint::new(gamma.start().clone(), group.identity());
        let g = group.exp(&v(&[0.4, -0.3, 1.1]));
        let lhs = lifted.lift(&gamma, &p.act(&g)).unwrap();
        let rhs = bundle.act_identity(&lifted.lift(&gamma, &p).unwrap(), &g);
        assert!(dec_distance(&lhs, &rhs) <= 1e-12);
        let id = lifted
            .lift(&SampledPath::point_path(p.x.clone(), 1.0, 50), &p)
            .unwrap();
        assert!(dec_distance(&id, &bundle.identity(&p, 1.0, 50)) == 0.0);
    }
}
