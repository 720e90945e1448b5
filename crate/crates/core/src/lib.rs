//! Achieved information gain (AIG) of imperfect belief updates, with cognitive
//! fidelity and cognitive efficiency.
//!
//! All measures are computed in nits; see [`units`] for conversion to bits.

// NaN-rejecting guards are written `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distributions;
pub mod error;
pub mod gaussian_lab;
pub mod geometry;
pub mod linalg;
pub mod measures;
pub mod monte_carlo;
pub mod quadrature;
pub mod sequential;
pub mod special;
pub mod sustainability;
pub mod table;
pub mod units;

pub use distributions::{KnowledgeState, Outcome};
pub use error::{AigError, Result};
pub use units::{InfoQuantity, Unit};
