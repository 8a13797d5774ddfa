//! Discrete oriented varifolds and their curvature coefficients.
//!
//! Surfaces are sampled into atom measures on `Ω × Sⁿ`, then checked against
//! weak integral identities (first variation, the oriented curvature identity,
//! prescribed mean curvature, and a version inside the round sphere `S²`).
//! The [`recovery`] module fits curvature coefficients `W_ia` to atom data by
//! regularized least squares, and [`scenarios`] runs reproducible experiments.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod identities;
pub mod numeric;
pub mod recovery;
pub mod scenarios;
pub mod varifold;

pub use error::{Error, Result};

pub type Vector<const D: usize> = nalgebra::SVector<f64, D>;
pub type Matrix<const D: usize> = nalgebra::SMatrix<f64, D, D>;

// The guide's snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/varifolds.md")]
    mod varifolds {}
    #[doc = include_str!("../../../book/src/identities.md")]
    mod identities {}
    #[doc = include_str!("../../../book/src/recovery.md")]
    mod recovery {}
    #[doc = include_str!("../../../book/src/distance.md")]
    mod distance {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
}
