//! Constants calculator runner.

use anyhow::Result;
use serde_json::json;
use sgula_core::constants::{constants_report, iterations_for_accuracy, BoundKind};

use crate::config::ExperimentSpec;
use crate::report::StudyReport;

/// Every bound constant as a flat label to value map.
pub fn constants_json(spec: &ExperimentSpec) -> Result<serde_json::Map<String, serde_json::Value>> {
    let c = constants_report(&spec.constants.params())?;
    Ok(c.entries().into_iter().map(|(k, v, _)| (k.to_string(), json!(v))).collect())
}

/// Constants report plus, for each bound, the step size and iteration count that bring
/// the bound below `target_accuracy` from an initial distance `1 + E|theta_0|^2`.
pub fn run_constants(spec: &ExperimentSpec, target_accuracy: Option<f64>) -> Result<StudyReport> {
    let p = spec.constants.params();
    let c = constants_report(&p)?;
    let mut report = StudyReport::new(spec);
    for (k, v, growth) in c.entries() {
        report.summary.insert(k.to_string(), json!(v));
        report.summary.insert(format!("{k}.growth"), json!(growth));
    }
    if let Some(eps) = target_accuracy {
        let delta0 = 1.0 + p.e_theta0_sq;
        for which in BoundKind::ALL {
            let key = format!("{which:?}").to_lowercase();
            match iterations_for_accuracy(&p, eps, which, delta0) {
                Ok((lam, n)) => {
                    report.summary.insert(format!("{key}.lambda"), json!(lam));
                    report.summary.insert(format!("{key}.iterations"), json!(n));
                }
                Err(e) => {
                    report.summary.insert(format!("{key}.error"), json!(e.to_string()));
                }
            }
        }
    }
    Ok(report)
}
