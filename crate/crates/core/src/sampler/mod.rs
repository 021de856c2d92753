//! SG-ULA and MYULA iterations and the multi-chain driver.

mod config;
mod run;
mod samples;
mod step;

pub use config::{InitLaw, SamplerConfig, Scheme, DIVERGENCE_THRESHOLD};
pub use run::{chain_rng, run_chain, run_chain_observed, run_parallel_chains};
pub use samples::{posterior_summary, ChainTrace, SampleSet, SummaryMode};
pub use step::{myula_step, sgula_step};
