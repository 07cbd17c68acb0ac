//! Numerics for ring-shaped multi-bubble solutions of the prescribed scalar
//! and boundary mean curvature problem on the half-space.
//!
//! The crate evaluates explicit boundary bubbles and the `k`-bubble ring
//! ansatz, computes every constant of the reduced energy expansion by
//! dimension-reduced quadrature, and locates the critical point of the
//! reduced functional.

pub mod bubble;
pub mod config;
pub mod coeffs;
pub mod energy;
pub mod error;
pub mod model;
pub mod quad;
pub mod solver;
pub mod special;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/bubbles.md")]
    mod bubbles {}
    #[doc = include_str!("../../../book/src/constants.md")]
    mod constants {}
    #[doc = include_str!("../../../book/src/reduced.md")]
    mod reduced {}
    #[doc = include_str!("../../../book/src/energy.md")]
    mod energy {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
