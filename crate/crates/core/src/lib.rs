//! Multinomial cascades on dyadic cubes, the sparse-sampling and dilation
//! operators that act on them, empirical multifractal estimators, and the
//! closed-form predictions for the transformed spectra.

pub mod cascade;
pub mod dyadic;
pub mod error;
pub mod operators;
pub mod roots;
pub mod sampling;
pub mod spectra;
pub mod theory;

pub use cascade::CascadeModel;
pub use dyadic::DyadicIndex;
pub use error::{Error, Result};
pub use sampling::{SamplingConfig, SurvivorSet};
