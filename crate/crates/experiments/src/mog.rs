//! Mixture-of-Gaussians sampling comparisons and the step-size / temperature sweeps.

use std::time::Instant;

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;
use sgula_core::metrics::{kde_silverman, linspace, mode_detect_with_floor, sliced_w2, DensityEstimate, KdeGrid};
use sgula_core::potentials::{MogLaplace, MogLaplaceSpec, Potential};
use sgula_core::sampler::{run_parallel_chains, InitLaw, SamplerConfig, Scheme};
use sgula_core::SampleSet64;

use crate::config::{ExperimentKind, ExperimentSpec, SchemeName};
use crate::derive_seed;
use crate::plot;
use crate::report::{Artifact, RunRecord, StudyReport};

/// Grid resolution of the reference sampler, per axis.
const REFERENCE_CELLS: usize = 400;

/// Result of one sampler on one mixture configuration.
#[derive(Debug, Clone)]
pub struct MogOutcome {
    pub scheme: SchemeName,
    pub samples: SampleSet64,
    pub kde: DensityEstimate<f64>,
    pub modes: Vec<Vec<f64>>,
    /// For each component mean, the distance to the nearest detected mode.
    pub mode_distances: Vec<f64>,
    pub mean_abs_dev: f64,
    pub max_abs_dev: f64,
    pub sliced_w2: f64,
    pub wall_time: f64,
}

impl MogOutcome {
    pub fn modes_recovered(&self, tolerance: f64) -> bool {
        self.mode_distances.iter().all(|&d| d <= tolerance)
    }
}

/// All samplers of one configuration plus the analytic density on the shared grid.
#[derive(Debug, Clone)]
pub struct MogComparison {
    pub analytic: DensityEstimate<f64>,
    pub outcomes: Vec<MogOutcome>,
}

impl MogComparison {
    pub fn outcome(&self, scheme: SchemeName) -> Option<&MogOutcome> {
        self.outcomes.iter().find(|o| o.scheme == scheme)
    }
}

fn max_variance(spec: &MogLaplaceSpec<f64>) -> f64 {
    spec.variances.iter().copied().fold(0.0, f64::max)
}

fn mean_range(spec: &MogLaplaceSpec<f64>) -> (f64, f64) {
    spec.means
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
}

/// Uniform law on `[min mu - pad * max var, max mu + pad * max var]^d`.
pub fn mog_init(spec: &MogLaplaceSpec<f64>, pad: f64) -> InitLaw<f64> {
    let (lo, hi) = mean_range(spec);
    let v = max_variance(spec);
    InitLaw::cube(spec.dim(), lo - pad * v, hi + pad * v)
}

/// Shared evaluation grid: the initial box, widened to five tempered standard
/// deviations beyond the extreme means.
pub fn mog_grid(spec: &MogLaplaceSpec<f64>, pad: f64, beta: f64, points: usize) -> Vec<Vec<f64>> {
    let (lo, hi) = mean_range(spec);
    let v = max_variance(spec);
    let sd = 5.0 * (v / beta).sqrt();
    let (a, b) = ((lo - pad * v).min(lo - sd), (hi + pad * v).max(hi + sd));
    vec![linspace(a, b, points); spec.dim()]
}

fn grid_points(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts = vec![Vec::new()];
    for axis in axes {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    pts
}

/// `exp(-beta u)` on the grid, normalized so that its Riemann sum is one.
pub fn analytic_density(model: &dyn Potential<f64>, beta: f64, axes: &[Vec<f64>]) -> DensityEstimate<f64> {
    let pts = grid_points(axes);
    let u: Vec<f64> = pts.par_iter().map(|p| model.value(p)).collect();
    let u_min = u.iter().copied().fold(f64::INFINITY, f64::min);
    let mut values: Vec<f64> = u.iter().map(|v| (-beta * (v - u_min)).exp()).collect();
    let mut est = DensityEstimate {
        axes: axes.to_vec(),
        values: Vec::new(),
        bandwidth: vec![0.0; axes.len()],
    };
    let vol = est.cell_volume();
    let total: f64 = values.iter().sum::<f64>() * vol;
    values.iter_mut().for_each(|v| *v /= total);
    est.values = values;
    est
}

/// Independent draws from `exp(-beta u)` restricted to `[lo, hi]^d`: a cell is chosen
/// with probability proportional to the density at its centre, then a point uniformly
/// inside it.
pub fn reference_draws(model: &dyn Potential<f64>, beta: f64, lo: f64, hi: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let d = model.dim();
    let w = (hi - lo) / REFERENCE_CELLS as f64;
    let centres: Vec<f64> = (0..REFERENCE_CELLS).map(|i| lo + (i as f64 + 0.5) * w).collect();
    let cells = grid_points(&vec![centres; d]);
    let u: Vec<f64> = cells.par_iter().map(|p| model.value(p)).collect();
    let u_min = u.iter().copied().fold(f64::INFINITY, f64::min);
    let mut cdf = Vec::with_capacity(u.len());
    let mut acc = 0.0;
    for v in &u {
        acc += (-beta * (v - u_min)).exp();
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let t = rng.random::<f64>() * acc;
            let i = cdf.partition_point(|&c| c <= t).min(cells.len() - 1);
            cells[i].iter().map(|c| c + w * (rng.random::<f64>() - 0.5)).collect()
        })
        .collect()
}

fn sampler_config(spec: &ExperimentSpec, model: &MogLaplaceSpec<f64>, scheme: SchemeName, seed: u64) -> SamplerConfig<f64> {
    let s = &spec.sampler;
    let scheme = match scheme {
        SchemeName::Sgula => Scheme::SgUla,
        SchemeName::Myula => Scheme::Myula {
            gamma: s.myula_gamma.unwrap_or(s.lambda),
        },
    };
    SamplerConfig::new(model.dim(), s.lambda, s.beta, s.n_iters)
        .with_burn_in(s.burn_in)
        .with_chains(s.n_chains)
        .with_thin(s.thin)
        .with_seed(seed)
        .with_init(mog_init(model, spec.mog.init_pad))
        .with_scheme(scheme)
}

/// Runs every configured sampler on the mixture and scores it against the analytic density.
pub fn compare_samplers(spec: &ExperimentSpec) -> Result<MogComparison> {
    let mspec = spec.mog.model_spec()?;
    let model = MogLaplace::new(mspec.clone())?;
    let seed = spec.experiment.seed;
    let beta = spec.sampler.beta;
    let m = &spec.metrics;
    let axes = mog_grid(&mspec, spec.mog.init_pad, beta, m.grid_points);
    let analytic = analytic_density(&model, beta, &axes);
    let (lo, hi) = (axes[0][0], *axes[0].last().unwrap());
    let reference = reference_draws(&model, beta, lo, hi, m.reference_samples, derive_seed(seed, 2));

    let mut outcomes = Vec::new();
    for &scheme in &spec.sampler.schemes {
        let start = Instant::now();
        let cfg = sampler_config(spec, &mspec, scheme, derive_seed(seed, 1));
        let samples = run_parallel_chains(&model, &cfg)?;
        let rows = samples.to_rows();
        let kde = kde_silverman(&rows, &KdeGrid::Axes(axes.clone()))?;
        let modes = mode_detect_with_floor(&kde, m.mode_separation, m.mode_floor)?;
        let mode_distances = mspec
            .means
            .iter()
            .map(|mu| {
                modes
                    .iter()
                    .map(|p| p.iter().zip(mu).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let diffs: Vec<f64> = kde.values.iter().zip(&analytic.values).map(|(a, b)| (a - b).abs()).collect();
        let mean_abs_dev = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let max_abs_dev = diffs.iter().copied().fold(0.0, f64::max);
        let sliced = sliced_w2(&rows, &reference, m.sliced_projections, derive_seed(seed, 3))?;
        outcomes.push(MogOutcome {
            scheme,
            samples,
            kde,
            modes,
            mode_distances,
            mean_abs_dev,
            max_abs_dev,
            sliced_w2: sliced,
            wall_time: start.elapsed().as_secs_f64(),
        });
    }
    Ok(MogComparison { analytic, outcomes })
}

fn record(index: usize, label: String, seed: u64, o: &MogOutcome, tolerance: f64) -> RunRecord {
    let mut r = RunRecord::new(index, label, seed);
    r.set("scheme", o.scheme.as_str());
    r.set("n_modes", o.modes.len());
    r.set("modes", json!(o.modes));
    r.set("mode_distances", json!(o.mode_distances));
    r.set("modes_recovered", o.modes_recovered(tolerance));
    r.set("mean_abs_dev", o.mean_abs_dev);
    r.set("max_abs_dev", o.max_abs_dev);
    r.set("sliced_w2", o.sliced_w2);
    r.set("bandwidth", json!(o.kde.bandwidth));
    r.set("retained", o.samples.len());
    r
}

/// SG-ULA against MYULA on one mixture: KDE against the analytic density, detected
/// modes and sliced W2 to independent reference draws.
pub fn run_mog_experiment(spec: &ExperimentSpec) -> Result<StudyReport> {
    let start = Instant::now();
    let cmp = compare_samplers(spec)?;
    let m = &spec.metrics;
    let seed = derive_seed(spec.experiment.seed, 1);
    let mut report = StudyReport::new(spec);
    for (i, o) in cmp.outcomes.iter().enumerate() {
        let name = o.scheme.as_str();
        report.runs.push(record(i, name.to_string(), seed, o, m.mode_tolerance));
        report.summary.insert(format!("{name}.mean_abs_dev"), json!(o.mean_abs_dev));
        report.summary.insert(format!("{name}.n_modes"), json!(o.modes.len()));
        report.summary.insert(format!("{name}.sliced_w2"), json!(o.sliced_w2));
        report.thresholds.insert(format!("{name}.modes_recovered"), o.modes_recovered(m.mode_tolerance));
        report
            .thresholds
            .insert(format!("{name}.deviation_below_threshold"), o.mean_abs_dev < m.deviation_threshold);
        report.timing.insert(name.to_string(), o.wall_time);
        report.artifacts.push(Artifact::Samples {
            name: name.to_string(),
            set: o.samples.clone(),
        });
        report.artifacts.push(Artifact::Density {
            name: name.to_string(),
            est: o.kde.clone(),
        });
        report.artifacts.push(Artifact::Plot {
            name: format!("density_{name}"),
            svg: plot::density_heatmap(&o.kde, &format!("{name} KDE"), &o.modes),
        });
    }
    if let (Some(s), Some(y)) = (cmp.outcome(SchemeName::Sgula), cmp.outcome(SchemeName::Myula)) {
        let ratio = s.mean_abs_dev / y.mean_abs_dev;
        report.summary.insert("sgula_over_myula_deviation".into(), json!(ratio));
        report.thresholds.insert("sgula_vs_myula".into(), ratio <= m.sgula_myula_ratio);
    }
    report.artifacts.push(Artifact::Density {
        name: "analytic".into(),
        est: cmp.analytic.clone(),
    });
    report.artifacts.push(Artifact::Plot {
        name: "density_analytic".into(),
        svg: plot::density_heatmap(&cmp.analytic, "target density", &[]),
    });
    report.timing.insert("total".into(), start.elapsed().as_secs_f64());
    Ok(report)
}

/// Which sampler parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Lambda,
    Beta,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Lambda => "lambda",
            SweepAxis::Beta => "beta",
        }
    }
}

/// One mixture comparison per swept value, in the order given, all with the master seed.
pub fn run_sweep(spec: &ExperimentSpec, axis: SweepAxis) -> Result<StudyReport> {
    if spec.sweep.values.is_empty() {
        bail!("sweep.values must not be empty");
    }
    let start = Instant::now();
    let m = &spec.metrics;
    let seed = derive_seed(spec.experiment.seed, 1);
    let mut report = StudyReport::new(spec);
    report.kind = match axis {
        SweepAxis::Lambda => ExperimentKind::SweepLambda,
        SweepAxis::Beta => ExperimentKind::SweepBeta,
    };
    let mut dev_series: Vec<(SchemeName, Vec<(f64, f64)>)> = Vec::new();
    let mut mode_series: Vec<(SchemeName, Vec<(f64, f64)>)> = Vec::new();
    for &v in &spec.sweep.values {
        let mut s = spec.clone();
        match axis {
            SweepAxis::Lambda => s.sampler.lambda = v,
            SweepAxis::Beta => s.sampler.beta = v,
        }
        let cmp = compare_samplers(&s)?;
        for o in &cmp.outcomes {
            let label = format!("{}={v:e}/{}", axis.name(), o.scheme.as_str());
            let mut r = record(report.runs.len(), label.clone(), seed, o, m.mode_tolerance);
            r.set(axis.name(), v);
            report.runs.push(r);
            report.timing.insert(label, o.wall_time);
            let tag = format!("{}_{v:e}_{}", axis.name(), o.scheme.as_str());
            report.artifacts.push(Artifact::Density {
                name: tag.clone(),
                est: o.kde.clone(),
            });
            report.artifacts.push(Artifact::Plot {
                name: format!("density_{tag}"),
                svg: plot::density_heatmap(&o.kde, &format!("{} = {v:e}, {}", axis.name(), o.scheme.as_str()), &o.modes),
            });
            let push = |series: &mut Vec<(SchemeName, Vec<(f64, f64)>)>, y: f64| match series.iter_mut().find(|e| e.0 == o.scheme) {
                Some(e) => e.1.push((v, y)),
                None => series.push((o.scheme, vec![(v, y)])),
            };
            push(&mut dev_series, o.mean_abs_dev);
            push(&mut mode_series, o.modes.len() as f64);
        }
    }
    for (scheme, pts) in &dev_series {
        let best = pts.iter().min_by(|a, b| a.1.total_cmp(&b.1)).map(|p| p.0).unwrap();
        report
            .summary
            .insert(format!("{}.best_{}", scheme.as_str(), axis.name()), json!(best));
        report
            .summary
            .insert(format!("{}.mean_abs_dev", scheme.as_str()), json!(pts.iter().map(|p| p.1).collect::<Vec<_>>()));
    }
    for (scheme, pts) in &mode_series {
        report
            .summary
            .insert(format!("{}.n_modes", scheme.as_str()), json!(pts.iter().map(|p| p.1).collect::<Vec<_>>()));
    }
    report.summary.insert("values".into(), json!(spec.sweep.values));
    let named = |series: &[(SchemeName, Vec<(f64, f64)>)]| -> Vec<(&'static str, Vec<(f64, f64)>)> {
        series.iter().map(|(s, p)| (s.as_str(), p.clone())).collect()
    };
    report.artifacts.push(Artifact::Plot {
        name: format!("sweep_{}_deviation", axis.name()),
        svg: plot::line_chart(
            "mean absolute density deviation",
            &named(&dev_series),
            true,
            false,
            axis.name(),
            "mean |KDE - target|",
        ),
    });
    report.artifacts.push(Artifact::Plot {
        name: format!("sweep_{}_modes", axis.name()),
        svg: plot::line_chart("detected modes", &named(&mode_series), true, false, axis.name(), "modes"),
    });
    report.timing.insert("total".into(), start.elapsed().as_secs_f64());
    Ok(report)
}
