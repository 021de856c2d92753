//! Experiment runners for subgradient Langevin sampling: mixture sampling
//! comparisons, step-size and temperature sweeps, sparse robust regression with
//! SCAD and LASSO penalties, a discretization-rate study and the constants
//! calculator, plus report emission.

pub mod config;
pub mod constants;
pub mod mog;
pub mod plot;
pub mod rate;
pub mod report;
pub mod scad;

use anyhow::Result;

pub use config::{preset, ExperimentKind, ExperimentSpec, ScadStudySpec};
pub use mog::{run_mog_experiment, run_sweep, SweepAxis};
pub use rate::run_rate_study;
pub use report::{emit_report, Manifest, StudyReport};
pub use scad::{cv_select_gamma, run_scad_regression};

/// Stream-independent child seed: SplitMix64 of `master` offset by `tag`.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    let mut z = master.wrapping_add(tag.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Dispatches on `spec.experiment.kind`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<StudyReport> {
    spec.validate()?;
    match spec.experiment.kind {
        ExperimentKind::MogSample => run_mog_experiment(spec),
        ExperimentKind::SweepLambda => run_sweep(spec, SweepAxis::Lambda),
        ExperimentKind::SweepBeta => run_sweep(spec, SweepAxis::Beta),
        ExperimentKind::ScadRegression => run_scad_regression(spec),
        ExperimentKind::RateStudy => run_rate_study(spec),
        ExperimentKind::Constants => constants::run_constants(spec, None),
    }
}
