//! Operator algebras over a space of test functions: the free *-algebra,
//! quantization maps, canonical relations, states, GNS truncations and
//! lattice continuum limits.
//!
//! The guide in `book/` walks through each module; its snippets run as
//! doctests of this crate.

pub mod algebra;
pub mod catalog;
pub mod expr;
pub mod gns;
pub mod lattice;
pub mod qmap;
pub mod rewrite;
pub mod states;

#[cfg(any(test, feature = "test-util"))]
pub mod testing;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/algebra.md")]
    mod algebra {}
    #[doc = include_str!("../../../book/src/qmap.md")]
    mod qmap {}
    #[doc = include_str!("../../../book/src/rewrite.md")]
    mod rewrite {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/gns.md")]
    mod gns {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
