//! Finite-difference numerics for Hölder and Zygmund regularity.
//!
//! Exact difference calculus over rationals and binary64, Vandermonde
//! stencils, grid seminorms with exponent estimates and class verdicts,
//! smooth curves for Boman-type tests, and superposition experiments. The
//! guide in `book/` walks through each layer; its code blocks are compiled
//! as doc-tests of this crate.

// `!(a < b)` is used on purpose so that NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod curvelab;
pub mod error;
pub mod faa_di_bruno;
pub mod finitediff;
pub mod fit;
pub mod function;
pub mod identities;
pub mod jet;
pub mod output;
pub mod quadrature;
pub mod scalar;
pub mod seminorm;
pub mod stencil;
pub mod superposition;

pub use error::{Error, Result};

/// The guide's code blocks, compiled and run as doc-tests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../README.md")]
    pub mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/differences.md")]
    pub mod differences {}
    #[doc = include_str!("../../../book/src/stencils.md")]
    pub mod stencils {}
    #[doc = include_str!("../../../book/src/functions.md")]
    pub mod functions {}
    #[doc = include_str!("../../../book/src/seminorms.md")]
    pub mod seminorms {}
    #[doc = include_str!("../../../book/src/curves.md")]
    pub mod curves {}
    #[doc = include_str!("../../../book/src/superposition.md")]
    pub mod superposition {}
    #[doc = include_str!("../../../book/src/reports.md")]
    pub mod reports {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
