//! Numerical fluctuation theory for spectrally negative Lévy processes.
//!
//! [`model::LevyModel`] carries the Laplace exponent and its inverse,
//! [`scale::ScaleEngine`] evaluates scale functions, and the `fluctuation`,
//! `excursion` and `montecarlo` modules build on those.

pub mod error;
pub mod excursion;
pub mod extended;
pub mod fluctuation;
pub mod laplace;
pub mod model;
pub mod montecarlo;
pub mod quad;
pub mod scale;
pub mod special;
pub mod tolerances;
pub mod validate;

pub use error::{LevyError, Result};
pub use extended::Extended;
pub use model::{Compensation, Drift, DriftRegime, JumpFamily, LevyModel};
