//! Weak-noise error cost versus outage exponent for nonlinear parameter
//! modulation over the AWGN channel.
//!
//! The crate has two halves:
//!
//! * closed-form exponents ([`exponents`], [`cost`]): the converse rate and
//!   exponent built on `w(λ)`, the lattice-code achievable rate built on the
//!   inverse Poltyrev exponent, and the tail-probability oracles they rest on;
//! * a concrete quantize-and-lattice-code scheme ([`lattice`], [`scheme`])
//!   with a seeded Monte Carlo harness ([`sim`]) that measures outage
//!   probabilities and conditional weak-noise costs.
//!
//! The numerical core is generic over [`Real`] (`f32`/`f64`); the aliases
//! below fix the scalar for common use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cost;
pub mod error;
pub mod exponents;
pub mod lattice;
mod linalg;
pub mod roots;
pub mod scalar;
pub mod scheme;
pub mod sim;
pub mod special;

pub use error::{Error, Result};
pub use scalar::Real;

pub type TradeoffParamsF64 = exponents::TradeoffParams<f64>;
pub type TradeoffParamsF32 = exponents::TradeoffParams<f32>;
pub type ExponentCurvePointF64 = exponents::ExponentCurvePoint<f64>;
pub type PowerCostF64 = cost::PowerCost<f64>;
pub type PowerCostF32 = cost::PowerCost<f32>;
pub type LatticeF64 = lattice::LatticeDef<f64>;
pub type LatticeF32 = lattice::LatticeDef<f32>;
pub type CodebookF64 = lattice::Codebook<f64>;
pub type ModSchemeF64 = scheme::ModScheme<f64>;
pub type OutageKindF64 = scheme::OutageKind<f64>;
