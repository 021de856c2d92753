//! Sample-quality diagnostics: Wasserstein distances, moments, kernel density
//! estimates, rate fits and regression model errors.

mod kde;
mod stats;
pub mod target;
mod wasserstein;

pub use kde::{
    kde_silverman, linspace, mode_detect, mode_detect_with_floor, silverman_bandwidth, DensityEstimate, KdeGrid,
};
pub use stats::{empirical_moment2, loglog_slope, median, relative_model_error, RateFit};
pub use target::{adaptive_simpson, Target1d};
pub use wasserstein::{random_directions, sliced_w2, wasserstein_1d, wasserstein_to_quantiles};
