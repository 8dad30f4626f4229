//! Numerical toolkit for compatibility-like functions between quantum states.
//!
//! The crate works at finite dimension with dense complex matrices and covers:
//!
//! - [`linalg`]: density operators, effects, pure states, supports and subspace
//!   intersections.
//! - [`strength`]: the strength of an effect along a ray, with an independent
//!   bisection oracle.
//! - [`measure`]: compatibility detection and the decomposition-based
//!   compatibility measure, returned together with a checkable certificate.
//! - [`preserver`]: symmetry operators, Wigner-style reconstruction of the
//!   unitary or antiunitary operator behind a pure-state map, and sampled
//!   verification that a state transform acts as `A -> U A U*`.
//!
//! Batch work (optimizer restarts, verification samples, sweeps) goes through
//! [`exec::map_indexed`], which uses rayon when the `parallel` feature is on
//! and falls back to a plain loop otherwise. Results never depend on the
//! execution mode.

pub mod acceptance;
pub mod error;
pub mod exec;
pub mod io;
pub mod linalg;
pub mod measure;
pub mod preserver;
pub mod sample;
pub mod strength;

pub use error::{Error, Result};
pub use exec::Execution;
pub use linalg::{
    ComplexMatrix, ComplexVector, DensityOperator, Effect, Operator, PureState, Spectrum,
    Subspace, C64,
};
pub use measure::{Decomposition, MeasureConfig, MeasureResult};
pub use preserver::{PureStateMap, StateTransform, SymmetryOp};
pub use strength::StrengthResult;
