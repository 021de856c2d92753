//! Sparse regression under heavy-tailed noise: SCAD and LASSO posteriors sampled
//! with SG-ULA, penalty level chosen by cross-validation, scored by relative model error.

use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use log::{info, warn};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal};
use rayon::prelude::*;
use serde_json::json;
use sgula_core::metrics::{median, relative_model_error};
use sgula_core::potentials::{build_regression_potential, Penalty, RegressionData, ScadSpec};
use sgula_core::sampler::{posterior_summary, run_chain, SampleSet, SamplerConfig, SummaryMode};

use crate::config::{EstimatorMode, ExperimentSpec, ScadStudySpec};
use crate::derive_seed;
use crate::plot;
use crate::report::{Artifact, RunRecord, StudyReport};

/// Attempts at drawing a design with an invertible Gram matrix before giving up.
const MAX_REDRAWS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyKind {
    Scad,
    Lasso,
}

impl PenaltyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PenaltyKind::Scad => "scad",
            PenaltyKind::Lasso => "lasso",
        }
    }
}

/// Chain settings for one penalized fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSettings {
    pub lambda: f64,
    pub beta: f64,
    pub iters: usize,
    pub burn_in: usize,
    pub estimator: EstimatorMode,
    /// Multiplier of the penalty sum; `None` uses twice the number of fitted rows.
    pub penalty_weight: Option<f64>,
    /// SCAD shape parameter.
    pub a: f64,
}

impl FitSettings {
    pub fn final_fit(s: &ScadStudySpec) -> Self {
        Self {
            lambda: s.lambda,
            beta: s.beta,
            iters: s.chain_iters,
            burn_in: s.burn_in,
            estimator: s.estimator,
            penalty_weight: s.penalty_weight,
            a: s.a,
        }
    }

    pub fn cv_fit(s: &ScadStudySpec) -> Self {
        Self {
            iters: s.cv_chain_iters,
            burn_in: s.cv_burn_in,
            ..Self::final_fit(s)
        }
    }
}

/// Toeplitz covariance `rho^|i-j|`, row-major.
pub fn toeplitz(d: usize, rho: f64) -> Vec<f64> {
    (0..d * d).map(|k| rho.powi((k / d).abs_diff(k % d) as i32)).collect()
}

/// Draws `y = X beta* + eps` with rows of `X` from `N(0, Sigma)` and `eps` from the
/// normal/Cauchy mixture. Redraws (with the next sub-seed) while `X'X` is singular.
pub fn generate_data(s: &ScadStudySpec, seed: u64) -> Result<RegressionData<f64>> {
    let (n, d) = (s.n_obs, s.d);
    let sigma = toeplitz(d, s.rho);
    let chol = DMatrix::from_row_slice(d, d, &sigma)
        .cholesky()
        .context("design covariance is not positive definite")?
        .l();
    let cauchy = Cauchy::new(0.0, 1.0)?;
    for attempt in 0..MAX_REDRAWS {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, attempt));
        let mut x = Vec::with_capacity(n * d);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let row: Vec<f64> = (0..d).map(|i| (0..=i).map(|j| chol[(i, j)] * z[j]).sum()).collect();
            let eps = if rng.random::<f64>() < s.normal_weight {
                rng.sample::<f64, _>(StandardNormal)
            } else {
                cauchy.sample(&mut rng)
            };
            let mean: f64 = row.iter().zip(&s.beta_star).map(|(a, b)| a * b).sum();
            y.push(mean + s.noise_scale * eps);
            x.extend(row);
        }
        let data = RegressionData::new(n, d, x, y, Some(s.beta_star.clone()), sigma.clone())?;
        if data.least_squares(None).is_ok() {
            return Ok(data);
        }
        warn!("singular design for seed {seed} (attempt {attempt}); redrawing");
    }
    bail!("no full-rank design after {MAX_REDRAWS} draws")
}

/// Point estimate of the penalized posterior at inverse temperature `fit.beta`:
/// one SG-ULA chain from the origin, summarized by the configured estimator.
pub fn fit_penalized(data: &RegressionData<f64>, kind: PenaltyKind, gamma: f64, fit: &FitSettings, seed: u64) -> Result<Vec<f64>> {
    let penalty = match kind {
        PenaltyKind::Scad => Penalty::Scad(ScadSpec::new(fit.a, gamma)?),
        PenaltyKind::Lasso => Penalty::Lasso { gamma },
    };
    let weight = fit.penalty_weight.unwrap_or(2.0 * data.n() as f64);
    let model = build_regression_potential(data.clone(), penalty, weight)?;
    let cfg = SamplerConfig::new(data.d(), fit.lambda, fit.beta, fit.iters)
        .with_burn_in(fit.burn_in)
        .with_seed(seed);
    let trace = run_chain(&model, &cfg, 0)?;
    let set = SampleSet::new(data.d(), vec![trace], cfg, Duration::ZERO);
    let mode = match fit.estimator {
        EstimatorMode::ErgodicMean => SummaryMode::ErgodicMean,
        EstimatorMode::LastIterate => SummaryMode::LastIterate,
    };
    Ok(posterior_summary(&set, mode)?)
}

fn dedup_grid(grid: &[f64]) -> Vec<f64> {
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Held-out residual sum of squares per grid value, summed over folds. Row `i` belongs
/// to fold `i % folds`; every grid value sees the same chain noise within a fold.
pub fn cv_errors(data: &RegressionData<f64>, kind: PenaltyKind, grid: &[f64], folds: usize, fit: &FitSettings, seed: u64) -> Result<Vec<f64>> {
    if folds < 2 || folds > data.n() {
        bail!("folds must be in [2, n], got {folds}");
    }
    let mut errors = vec![0.0; grid.len()];
    for f in 0..folds {
        let train: Vec<usize> = (0..data.n()).filter(|i| i % folds != f).collect();
        let test: Vec<usize> = (0..data.n()).filter(|i| i % folds == f).collect();
        if train.len() < data.d() {
            warn!("training fold has {} rows for {} coefficients", train.len(), data.d());
        }
        let tr = data.subset_rows(&train)?;
        let te = data.subset_rows(&test)?;
        let fold_seed = derive_seed(seed, f as u64);
        let rss = grid
            .par_iter()
            .map(|&g| Ok(te.rss(&fit_penalized(&tr, kind, g, fit, fold_seed)?)))
            .collect::<Result<Vec<f64>>>()?;
        for (e, r) in errors.iter_mut().zip(rss) {
            *e += r;
        }
    }
    Ok(errors)
}

/// Grid value with the smallest cross-validated error; duplicates are removed and
/// ties go to the smaller value.
pub fn cv_select_gamma(data: &RegressionData<f64>, kind: PenaltyKind, grid: &[f64], folds: usize, fit: &FitSettings, seed: u64) -> Result<f64> {
    let grid = dedup_grid(grid);
    if grid.is_empty() {
        bail!("gamma grid is empty");
    }
    if grid.len() == 1 {
        return Ok(grid[0]);
    }
    let errors = cv_errors(data, kind, &grid, folds, fit, seed)?;
    let mut best = 0;
    for (i, e) in errors.iter().enumerate() {
        if *e < errors[best] {
            best = i;
        }
    }
    Ok(grid[best])
}

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub index: usize,
    pub seed: u64,
    pub gamma_scad: f64,
    pub gamma_lasso: f64,
    pub me_ols: f64,
    pub me_scad: f64,
    pub me_lasso: f64,
    pub me_oracle: f64,
    pub rme_scad: f64,
    pub rme_lasso: f64,
    pub rme_oracle: f64,
    pub beta_scad: Vec<f64>,
    pub beta_lasso: Vec<f64>,
}

pub fn run_replication(s: &ScadStudySpec, index: usize, seed: u64) -> Result<Replication> {
    let data = generate_data(s, derive_seed(seed, 0))?;
    let beta_star = data.beta_star().expect("generated with beta*").to_vec();
    let ols = data.least_squares(None)?;
    let support: Vec<usize> = (0..s.d).filter(|&j| beta_star[j] != 0.0).collect();
    let oracle = data.least_squares(Some(&support))?;
    let cv = FitSettings::cv_fit(s);
    let full = FitSettings::final_fit(s);
    let mut fits = Vec::new();
    for (k, kind) in [PenaltyKind::Scad, PenaltyKind::Lasso].into_iter().enumerate() {
        let gamma = cv_select_gamma(&data, kind, &s.gamma_grid, s.cv_folds, &cv, derive_seed(seed, 10 + k as u64))?;
        let beta = fit_penalized(&data, kind, gamma, &full, derive_seed(seed, 20 + k as u64))?;
        fits.push((gamma, beta));
    }
    let sigma = data.sigma();
    let (me_scad, rme_scad) = relative_model_error(&fits[0].1, &beta_star, sigma, &ols)?;
    let (me_lasso, rme_lasso) = relative_model_error(&fits[1].1, &beta_star, sigma, &ols)?;
    let (me_oracle, rme_oracle) = relative_model_error(&oracle, &beta_star, sigma, &ols)?;
    Ok(Replication {
        index,
        seed,
        gamma_scad: fits[0].0,
        gamma_lasso: fits[1].0,
        me_ols: data.model_error(&ols)?,
        me_scad,
        me_lasso,
        me_oracle,
        rme_scad,
        rme_lasso,
        rme_oracle,
        beta_scad: fits[0].1.clone(),
        beta_lasso: fits[1].1.clone(),
    })
}

/// Median relative model errors of SCAD, LASSO and the oracle over `reps`.
pub fn mrme(reps: &[Replication]) -> Result<(f64, f64, f64)> {
    let col = |f: fn(&Replication) -> f64| reps.iter().map(f).collect::<Vec<_>>();
    Ok((median(&col(|r| r.rme_scad))?, median(&col(|r| r.rme_lasso))?, median(&col(|r| r.rme_oracle))?))
}

/// Column names of the per-replication table.
pub const TABLE_HEADER: [&str; 11] = [
    "rep", "gamma_scad", "gamma_lasso", "me_ols", "me_scad", "me_lasso", "me_oracle", "rme_scad", "rme_lasso",
    "rme_oracle", "seed_low32",
];

/// Replications in parallel; MRME per method with the per-replication table and a box plot.
pub fn run_scad_regression(spec: &ExperimentSpec) -> Result<StudyReport> {
    let start = Instant::now();
    let s = &spec.scad;
    let master = spec.experiment.seed;
    let reps = (0..s.n_reps)
        .into_par_iter()
        .map(|i| run_replication(s, i, derive_seed(master, 1000 + i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let (m_scad, m_lasso, m_oracle) = mrme(&reps)?;
    info!("MRME scad {m_scad:.3}, lasso {m_lasso:.3}, oracle {m_oracle:.3}");

    let mut report = StudyReport::new(spec);
    for r in &reps {
        let mut rec = RunRecord::new(r.index, format!("rep{}", r.index), r.seed);
        rec.set("gamma_scad", r.gamma_scad);
        rec.set("gamma_lasso", r.gamma_lasso);
        rec.set("me_ols", r.me_ols);
        rec.set("rme_scad", r.rme_scad);
        rec.set("rme_lasso", r.rme_lasso);
        rec.set("rme_oracle", r.rme_oracle);
        rec.set("beta_scad", json!(r.beta_scad));
        rec.set("beta_lasso", json!(r.beta_lasso));
        report.runs.push(rec);
    }
    report.summary.insert("mrme_scad".into(), json!(m_scad));
    report.summary.insert("mrme_lasso".into(), json!(m_lasso));
    report.summary.insert("mrme_oracle".into(), json!(m_oracle));
    let gammas = |f: fn(&Replication) -> f64| median(&reps.iter().map(f).collect::<Vec<_>>());
    report.summary.insert("median_gamma_scad".into(), json!(gammas(|r| r.gamma_scad)?));
    report.summary.insert("median_gamma_lasso".into(), json!(gammas(|r| r.gamma_lasso)?));
    report.thresholds.insert("scad_below_lasso".into(), m_scad < m_lasso);
    report.artifacts.push(Artifact::Table {
        name: "replications".into(),
        header: TABLE_HEADER.iter().map(|h| h.to_string()).collect(),
        rows: reps
            .iter()
            .map(|r| {
                vec![
                    r.index as f64,
                    r.gamma_scad,
                    r.gamma_lasso,
                    r.me_ols,
                    r.me_scad,
                    r.me_lasso,
                    r.me_oracle,
                    r.rme_scad,
                    r.rme_lasso,
                    r.rme_oracle,
                    (r.seed & 0xffff_ffff) as f64,
                ]
            })
            .collect(),
    });
    report.artifacts.push(Artifact::Plot {
        name: "rme_boxplot".into(),
        svg: plot::box_plot(
            "relative model error",
            &[
                ("SCAD", reps.iter().map(|r| r.rme_scad).collect()),
                ("LASSO", reps.iter().map(|r| r.rme_lasso).collect()),
                ("oracle", reps.iter().map(|r| r.rme_oracle).collect()),
            ],
            "ME / ME(OLS)",
        ),
    });
    report.timing.insert("total".into(), start.elapsed().as_secs_f64());
    Ok(report)
}
