//! Exact vacuum expectation values of products of parabose and parafermi
//! fields of order `p`.
//!
//! Two symbolic routes compute the same thing: [`correlator`] pairs insertions
//! Wick-style and weights each pairing by a Green-index sum, while [`genfun`]
//! differentiates the free generating functional with Green-graded sources.
//! [`fock`] builds explicit Green-ansatz operator matrices at small `p` as a
//! numerical cross-check, and [`perturb`] adds a single interaction vertex.

pub mod algebra;
pub mod cli;
pub mod correlator;
pub mod fock;
pub mod genfun;
pub(crate) mod partition;
pub mod perturb;

pub use algebra::{exchange_sign, falling_factorial, ppoly_eval, GreenIndex, PPoly, Statistics};
