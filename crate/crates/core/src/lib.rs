//! Numerical toolkit for fourth-order (biharmonic-type) heat semigroups.
//!
//! The crate is organized around one pipeline: evaluate the self-similar
//! profile of the fourth-order heat kernel and its envelope bounds
//! ([`specfun`], [`kernel`]), evolve sampled fields under the semigroups
//! generated by the bilaplacian and its Schrödinger-type perturbations
//! ([`engine`]), measure path regularity of the resulting time ladders
//! ([`variation`]), and size the output in Lebesgue/Morrey norms weighted by
//! a potential's critical radius ([`potential`], [`norms`]).

pub mod engine;
pub mod error;
pub mod field;
pub mod kernel;
pub mod norms;
pub mod potential;
pub mod quad;
pub mod report;
pub mod rng;
pub mod specfun;
pub mod variation;

pub use error::{Error, Result};
pub use field::{GridSpec, SampledField};
