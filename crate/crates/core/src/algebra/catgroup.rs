use serde::Serialize;

use super::{CrossedModule, GElem, Group, HElem, Mor};
use crate::error::{Error, Result};

/// A morphism `(h, g)` of the categorical group of a crossed module.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatGroupMorphism<H, G> {
    pub h: H,
    pub g: G,
}

impl<H, G> CatGroupMorphism<H, G> {
    pub fn new(h: H, g: G) -> Self {
        CatGroupMorphism { h, g }
    }
}

/// The identity morphism `(e, g)`.
pub fn cg_identity<C: CrossedModule + ?Sized>(cm: &C, g: &GElem<C>) -> Mor<C> {
    CatGroupMorphism::new(cm.h_group().identity(), g.clone())
}

/// Source `g` of `(h, g)`.
pub fn cg_source<C: CrossedModule + ?Sized>(_cm: &C, m: &Mor<C>) -> GElem<C> {
    m.g.clone()
}

/// Target `tau(h) g` of `(h, g)`.
pub fn cg_target<C: CrossedModule + ?Sized>(cm: &C, m: &Mor<C>) -> GElem<C> {
    cm.g_group().op(&cm.tau(&m.h), &m.g)
}

/// Categorical composition `(h2, g2) o (h1, g1) = (h2 h1, g1)`, defined when
/// `g2 = tau(h1) g1`.
pub fn cg_compose<C: CrossedModule + ?Sized>(cm: &C, m2: &Mor<C>, m1: &Mor<C>) -> Result<Mor<C>> {
    let g = cm.g_group();
    let mismatch = g.dist(&m2.g, &cg_target(cm, m1));
    if mismatch > g.tolerance() {
        return Err(Error::NotComposable { mismatch });
    }
    Ok(CatGroupMorphism::new(
        cm.h_group().op(&m2.h, &m1.h),
        m1.g.clone(),
    ))
}

/// Semidirect product `(h2, g2)(h1, g1) = (h2 alpha_{g2}(h1), g2 g1)`.
pub fn cg_mul<C: CrossedModule + ?Sized>(cm: &C, m2: &Mor<C>, m1: &Mor<C>) -> Mor<C> {
    let h = cm.h_group().op(&m2.h, &cm.alpha(&m2.g, &m1.h));
    CatGroupMorphism::new(h, cm.g_group().op(&m2.g, &m1.g))
}

/// Inverse in the semidirect product: `(alpha_{g^-1}(h^-1), g^-1)`.
pub fn cg_inverse<C: CrossedModule + ?Sized>(cm: &C, m: &Mor<C>) -> Mor<C> {
    let ginv = cm.g_group().inv(&m.g);
    let h = cm.alpha(&ginv, &cm.h_group().inv(&m.h));
    CatGroupMorphism::new(h, ginv)
}

/// Largest of the component distances.
pub fn cg_distance<C: CrossedModule + ?Sized>(cm: &C, a: &Mor<C>, b: &Mor<C>) -> f64 {
    cm.h_group()
        .dist(&a.h, &b.h)
        .max(cm.g_group().dist(&a.g, &b.g))
}

/// The unique morphism `g1 <- g0` of the pair categorical group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GddMorphism<G> {
    pub g1: G,
    pub g0: G,
}

pub fn gdd_from_endpoints<G: Clone>(g1: &G, g0: &G) -> GddMorphism<G> {
    GddMorphism {
        g1: g1.clone(),
        g0: g0.clone(),
    }
}

/// The pair `(g1 g0^-1, g0)` in the inner crossed module `(G, G, id, conj)`.
pub fn gdd_as_pair<Gr: Group>(
    group: &Gr,
    m: &GddMorphism<Gr::Elem>,
) -> CatGroupMorphism<Gr::Elem, Gr::Elem> {
    CatGroupMorphism::new(group.op(&m.g1, &group.inv(&m.g0)), m.g0.clone())
}

/// Inverse of [`gdd_as_pair`]: the endpoints `(k g, g)` of the pair `(k, g)`.
pub fn gdd_from_pair<Gr: Group>(
    group: &Gr,
    m: &CatGroupMorphism<Gr::Elem, Gr::Elem>,
) -> GddMorphism<Gr::Elem> {
    GddMorphism {
        g1: group.op(&m.h, &m.g),
        g0: m.g.clone(),
    }
}

/// `(g2 <- g1) o (g1 <- g0) = (g2 <- g0)`.
pub fn gdd_compose<Gr: Group>(
    group: &Gr,
    m2: &GddMorphism<Gr::Elem>,
    m1: &GddMorphism<Gr::Elem>,
) -> Result<GddMorphism<Gr::Elem>> {
    let mismatch = group.dist(&m2.g0, &m1.g1);
    if mismatch > group.tolerance() {
        return Err(Error::NotComposable { mismatch });
    }
    Ok(GddMorphism {
        g1: m2.g1.clone(),
        g0: m1.g0.clone(),
    })
}

/// Morphism-level product of the pair categorical group, componentwise on
/// endpoints.
pub fn gdd_mul<Gr: Group>(
    group: &Gr,
    m2: &GddMorphism<Gr::Elem>,
    m1: &GddMorphism<Gr::Elem>,
) -> GddMorphism<Gr::Elem> {
    GddMorphism {
        g1: group.op(&m2.g1, &m1.g1),
        g0: group.op(&m2.g0, &m1.g0),
    }
}

pub fn gdd_distance<Gr: Group>(
    group: &Gr,
    a: &GddMorphism<Gr::Elem>,
    b: &GddMorphism<Gr::Elem>,
) -> f64 {
    group.dist(&a.g1, &b.g1).max(group.dist(&a.g0, &b.g0))
}

/// The functor `S` to the pair categorical group: `phi |-> t(phi) <- s(phi)`.
pub fn functor_s<C: CrossedModule + ?Sized>(cm: &C, m: &Mor<C>) -> GddMorphism<GElem<C>> {
    GddMorphism {
        g1: cg_target(cm, m),
        g0: cg_source(cm, m),
    }
}

/// Convenience accessor for the `H` identity.
pub fn h_identity<C: CrossedModule + ?Sized>(cm: &C) -> HElem<C> {
    cm.h_group().identity()
}
