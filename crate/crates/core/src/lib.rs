//! Subgradient Langevin sampling for non-smooth, non-convex potentials.
//!
//! The crate provides a catalog of potentials with minimum-norm subgradients, the
//! SG-ULA and MYULA samplers, closed-form non-asymptotic error constants, sample
//! quality metrics, and numerical checks of the regularity assumptions.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the `*64` aliases
//! below fix the common double-precision instantiations.

pub mod assumptions;
pub mod constants;
pub mod error;
pub mod metrics;
pub mod potentials;
pub mod sampler;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type SamplerConfig64 = sampler::SamplerConfig<f64>;
pub type SampleSet64 = sampler::SampleSet<f64>;
pub type ProblemParams64 = constants::ProblemParams<f64>;
pub type ConstantsReport64 = constants::ConstantsReport<f64>;
pub type ModelSpec64 = potentials::ModelSpec<f64>;
pub type DynPotential64 = potentials::DynPotential<f64>;

pub type SamplerConfig32 = sampler::SamplerConfig<f32>;
pub type SampleSet32 = sampler::SampleSet<f32>;
pub type ModelSpec32 = potentials::ModelSpec<f32>;
