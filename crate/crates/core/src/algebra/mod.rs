//! Groups, crossed modules and categorical-group arithmetic.
//!
//! A crossed module `(G, H, alpha, tau)` determines a categorical group whose
//! objects are the elements of `G` and whose morphisms are pairs `(h, g)` in
//! the semidirect product `H x_alpha G`. The product is
//! `(h2, g2)(h1, g1) = (h2 alpha_{g2}(h1), g2 g1)`, the source of `(h, g)` is
//! `g` and its target is `tau(h) g`.
//!
//! The same code runs over finite groups (exact equality, exhaustive checks)
//! and matrix Lie groups (Frobenius tolerance, sampled checks) through the
//! [`Group`] and [`CrossedModule`] traits.

mod catgroup;
pub mod finite;
mod validate;

use std::fmt::Debug;
use std::sync::Arc;

use rand::RngCore;

use crate::lie::crossed::LieCrossedModule;
use crate::lie::{GroupElement, MatrixLieGroup, LIE_TOL};

pub use catgroup::*;
pub use finite::{FiniteCrossedModule, FiniteGroup};
pub use validate::*;

/// A group with a notion of approximate equality.
pub trait Group: Send + Sync {
    type Elem: Clone + Debug + Send + Sync;

    fn identity(&self) -> Self::Elem;
    fn op(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    /// Distance between elements; the discrete metric for finite groups.
    fn dist(&self, a: &Self::Elem, b: &Self::Elem) -> f64;
    /// Largest distance still counted as equality.
    fn tolerance(&self) -> f64;
    /// All elements, when the group is finite.
    fn enumerate(&self) -> Option<Vec<Self::Elem>>;
    /// A random element.
    fn draw(&self, rng: &mut dyn RngCore) -> Self::Elem;
    fn label(&self, a: &Self::Elem) -> String;

    fn equal(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.dist(a, b) <= self.tolerance()
    }
}

impl Group for Arc<MatrixLieGroup> {
    type Elem = GroupElement;

    fn identity(&self) -> GroupElement {
        MatrixLieGroup::identity(self)
    }

    fn op(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        a.mul(b)
    }

    fn inv(&self, a: &GroupElement) -> GroupElement {
        a.inverse()
    }

    fn dist(&self, a: &GroupElement, b: &GroupElement) -> f64 {
        a.distance(b)
    }

    fn tolerance(&self) -> f64 {
        LIE_TOL
    }

    fn enumerate(&self) -> Option<Vec<GroupElement>> {
        None
    }

    fn draw(&self, rng: &mut dyn RngCore) -> GroupElement {
        self.sample(rng, 1.0)
    }

    fn label(&self, a: &GroupElement) -> String {
        match a.log() {
            Ok(x) => format!("exp{:?}", x.as_slice()),
            Err(_) => format!("{a:?}"),
        }
    }
}

/// The data `(G, H, alpha, tau)` of a crossed module.
pub trait CrossedModule: Send + Sync {
    type G: Group;
    type H: Group;

    fn name(&self) -> String;
    fn g_group(&self) -> &Self::G;
    fn h_group(&self) -> &Self::H;
    fn tau(&self, h: &HElem<Self>) -> GElem<Self>;
    fn alpha(&self, g: &GElem<Self>, h: &HElem<Self>) -> HElem<Self>;
}

/// Element type of the object group `G`.
pub type GElem<C> = <<C as CrossedModule>::G as Group>::Elem;
/// Element type of the group `H`.
pub type HElem<C> = <<C as CrossedModule>::H as Group>::Elem;
/// Morphism type of the categorical group of a crossed module.
pub type Mor<C> = CatGroupMorphism<HElem<C>, GElem<C>>;

impl CrossedModule for LieCrossedModule {
    type G = Arc<MatrixLieGroup>;
    type H = Arc<MatrixLieGroup>;

    fn name(&self) -> String {
        LieCrossedModule::name(self).to_string()
    }

    fn g_group(&self) -> &Arc<MatrixLieGroup> {
        self.g()
    }

    fn h_group(&self) -> &Arc<MatrixLieGroup> {
        self.h()
    }

    fn tau(&self, h: &GroupElement) -> GroupElement {
        LieCrossedModule::tau(self, h)
    }

    fn alpha(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        LieCrossedModule::alpha(self, g, h)
    }
}
