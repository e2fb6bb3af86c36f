//! Numerical companion for categorical principal bundles.
//!
//! The crate implements crossed modules and their categorical groups,
//! matrix Lie groups, sampled paths, connections on trivial bundles
//! `M x G`, categorical connections on the pair bundle and the decorated
//! bundle, and categorical gauge transformations. Every construction comes
//! with residual checks so that its defining identities can be verified
//! numerically under grid refinement.

pub mod algebra;
pub mod bundle;
pub mod catbundle;
pub mod error;
pub mod fixtures;
pub mod gauge;
pub mod lie;
pub mod paths;
pub mod report;

pub use error::{Error, Result};
