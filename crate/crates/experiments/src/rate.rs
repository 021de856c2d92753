//! Stationary bias of SG-ULA against exact one-dimensional targets, as a function of the step size.

use std::time::Instant;

use anyhow::{bail, Result};
use serde_json::json;
use sgula_core::metrics::{loglog_slope, wasserstein_to_quantiles, RateFit, Target1d};
use sgula_core::potentials::{AbsQuadratic, L1Norm, Potential, Quadratic};
use sgula_core::sampler::{run_parallel_chains, InitLaw, SamplerConfig};

use crate::config::{ExperimentSpec, RateModel, RateStudySpec};
use crate::derive_seed;
use crate::plot;
use crate::report::{Artifact, RunRecord, StudyReport};

impl RateModel {
    pub fn potential(self) -> Box<dyn Potential<f64>> {
        match self {
            RateModel::AbsQuadratic => Box::new(AbsQuadratic::new(1).expect("d = 1")),
            RateModel::Quadratic => Box::new(Quadratic::new(1, 1.0).expect("d = 1")),
            RateModel::Abs => Box::new(L1Norm::new(1, 1.0).expect("d = 1")),
        }
    }

    pub fn u(self, x: f64) -> f64 {
        match self {
            RateModel::AbsQuadratic => x.abs() + 0.5 * x * x,
            RateModel::Quadratic => 0.5 * x * x,
            RateModel::Abs => x.abs(),
        }
    }
}

/// Bias per step size, in the order given, plus the log-log fit when at least three
/// step sizes were run.
#[derive(Debug, Clone)]
pub struct RateOutcome {
    pub lambdas: Vec<f64>,
    pub bias: Vec<f64>,
    pub fit: Option<RateFit>,
}

impl RateOutcome {
    /// Bias strictly decreases as the step size decreases.
    pub fn monotone(&self) -> bool {
        let mut pairs: Vec<(f64, f64)> = self.lambdas.iter().copied().zip(self.bias.iter().copied()).collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        pairs.windows(2).all(|w| w[1].1 < w[0].1)
    }
}

/// Wasserstein distance of the pooled retained iterates to the target for one step size.
pub fn stationary_bias(s: &RateStudySpec, target: &Target1d, lambda: f64, seed: u64) -> Result<f64> {
    let model = s.model.potential();
    let burn = (s.burn_in_time / lambda).ceil() as usize;
    let per_chain = s.steps.div_ceil(s.chains);
    let cfg = SamplerConfig::new(1, lambda, s.beta, burn + per_chain)
        .with_burn_in(burn)
        .with_chains(s.chains)
        .with_seed(seed)
        .with_init(InitLaw::standard_gaussian(1, 1.0));
    let set = run_parallel_chains(model.as_ref(), &cfg)?;
    Ok(wasserstein_to_quantiles(&set.coordinate(0), |q| target.quantile(q), s.order)?)
}

pub fn rate_outcome(s: &RateStudySpec, seed: u64) -> Result<RateOutcome> {
    if s.lambdas.is_empty() {
        bail!("rate.lambdas must not be empty");
    }
    let model = s.model;
    let target = Target1d::new(move |x| model.u(x), s.beta, s.lo, s.hi, s.cells)?;
    let bias = s
        .lambdas
        .iter()
        .enumerate()
        .map(|(i, &l)| stationary_bias(s, &target, l, derive_seed(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let fit = if s.lambdas.len() >= 3 {
        Some(loglog_slope(&s.lambdas, &bias)?)
    } else {
        None
    };
    Ok(RateOutcome {
        lambdas: s.lambdas.clone(),
        bias,
        fit,
    })
}

pub fn run_rate_study(spec: &ExperimentSpec) -> Result<StudyReport> {
    let start = Instant::now();
    let s = &spec.rate;
    let seed = spec.experiment.seed;
    let out = rate_outcome(s, seed)?;
    let mut report = StudyReport::new(spec);
    for (i, (l, b)) in out.lambdas.iter().zip(&out.bias).enumerate() {
        let mut r = RunRecord::new(i, format!("lambda={l:e}"), derive_seed(seed, i as u64));
        r.set("lambda", *l);
        r.set("bias", *b);
        report.runs.push(r);
    }
    report.summary.insert("bias".into(), json!(out.bias));
    if out.lambdas.len() > 1 {
        report.thresholds.insert("bias_monotone".into(), out.monotone());
    }
    if let Some(fit) = &out.fit {
        report.summary.insert("slope".into(), json!(fit.slope));
        report.summary.insert("intercept".into(), json!(fit.intercept));
        report.summary.insert("r_squared".into(), json!(fit.r_squared));
        report.thresholds.insert("slope_at_least_min".into(), fit.slope >= s.min_slope);
    }
    report.artifacts.push(Artifact::Table {
        name: "bias".into(),
        header: vec!["lambda".into(), "bias".into()],
        rows: out.lambdas.iter().zip(&out.bias).map(|(l, b)| vec![*l, *b]).collect(),
    });
    let pts: Vec<(f64, f64)> = out.lambdas.iter().copied().zip(out.bias.iter().copied()).collect();
    report.artifacts.push(Artifact::Plot {
        name: "rate".into(),
        svg: plot::line_chart(
            "stationary bias",
            &[(&format!("W{}", s.order), pts)],
            true,
            true,
            "step size",
            "distance to target",
        ),
    });
    report.timing.insert("total".into(), start.elapsed().as_secs_f64());
    Ok(report)
}
