//! Declarative experiment descriptions.
//!
//! A spec is a TOML document made of `[section]` tables with `key = value` entries.
//! Every field has a default, so a file only needs the keys it changes:
//!
//! ```toml
//! [experiment]
//! kind = "mog_sample"      # mog_sample | sweep_lambda | sweep_beta | scad_regression | rate_study | constants
//! seed = 0
//!
//! [mog]
//! preset = "k3"            # k3 | k5 | custom (custom reads weights, means, variances)
//! alpha = 0.15
//!
//! [sampler]
//! lambda = 1e-3
//! beta = 1.0
//! n_iters = 52000
//! burn_in = 12000
//! n_chains = 12
//! schemes = ["sgula", "myula"]
//!
//! [sweep]
//! values = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5]
//! ```
//!
//! The remaining sections are `[metrics]`, `[scad]`, `[rate]` and `[constants]`; see the
//! field documentation of the corresponding structs. Overrides use dotted paths,
//! e.g. `sampler.lambda=0.01` or `scad.n_reps=10`.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sgula_core::constants::ProblemParams;
use sgula_core::potentials::MogLaplaceSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    MogSample,
    SweepLambda,
    SweepBeta,
    ScadRegression,
    RateStudy,
    Constants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment: Header,
    pub mog: MogSection,
    pub sampler: SamplerSection,
    pub metrics: MetricsSection,
    pub sweep: SweepSection,
    pub scad: ScadStudySpec,
    pub rate: RateStudySpec,
    pub constants: ConstantsSection,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            experiment: Header::default(),
            mog: MogSection::default(),
            sampler: SamplerSection::default(),
            metrics: MetricsSection::default(),
            sweep: SweepSection::default(),
            scad: ScadStudySpec::default(),
            rate: RateStudySpec::default(),
            constants: ConstantsSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Header {
    pub kind: ExperimentKind,
    /// Master seed; every chain and replication seed is derived from it.
    pub seed: u64,
}

impl Default for Header {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::MogSample,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MogPreset {
    K3,
    K5,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MogSection {
    pub preset: MogPreset,
    /// Laplace prior rate: the prior density is proportional to `exp(-alpha |x|_1)`.
    pub alpha: f64,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<f64>,
    /// Chains start uniformly on `[min mu - pad * max var, max mu + pad * max var]^d`.
    pub init_pad: f64,
}

impl Default for MogSection {
    fn default() -> Self {
        Self {
            preset: MogPreset::K3,
            alpha: 0.15,
            weights: Vec::new(),
            means: Vec::new(),
            variances: Vec::new(),
            init_pad: 2.0,
        }
    }
}

impl MogSection {
    pub fn model_spec(&self) -> Result<MogLaplaceSpec<f64>> {
        let spec = match self.preset {
            MogPreset::K3 => MogLaplaceSpec::k3(self.alpha),
            MogPreset::K5 => MogLaplaceSpec::k5(self.alpha),
            MogPreset::Custom => MogLaplaceSpec {
                weights: self.weights.clone(),
                means: self.means.clone(),
                variances: self.variances.clone(),
                laplace_scale: self.alpha,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Sgula,
    Myula,
}

impl SchemeName {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeName::Sgula => "sgula",
            SchemeName::Myula => "myula",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSection {
    pub lambda: f64,
    pub beta: f64,
    pub n_iters: usize,
    pub burn_in: usize,
    pub n_chains: usize,
    pub thin: usize,
    pub schemes: Vec<SchemeName>,
    /// MYULA smoothing parameter; defaults to `lambda`.
    pub myula_gamma: Option<f64>,
}

impl Default for SamplerSection {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            beta: 1.0,
            n_iters: 52_000,
            burn_in: 12_000,
            n_chains: 12,
            thin: 1,
            schemes: vec![SchemeName::Sgula, SchemeName::Myula],
            myula_gamma: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSection {
    /// KDE grid points per axis.
    pub grid_points: usize,
    /// Detected modes closer than this are merged.
    pub mode_separation: f64,
    /// Local maxima below this fraction of the peak density are ignored.
    pub mode_floor: f64,
    /// A component mean counts as recovered when a detected mode lies within this distance.
    pub mode_tolerance: f64,
    /// Pass threshold for the mean absolute KDE deviation (density units).
    pub deviation_threshold: f64,
    /// Pass threshold for `dev(sgula) / dev(myula)`.
    pub sgula_myula_ratio: f64,
    pub sliced_projections: usize,
    /// Number of reference draws from the gridded target for the sliced W2 comparison.
    pub reference_samples: usize,
}

impl Default for MetricsSection {
    fn default() -> Self {
        Self {
            grid_points: 200,
            mode_separation: 1.0,
            mode_floor: 0.05,
            mode_tolerance: 0.5,
            deviation_threshold: 0.02,
            sgula_myula_ratio: 1.25,
            sliced_projections: 100,
            reference_samples: 50_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Swept step sizes or inverse temperatures, processed in the given order.
    pub values: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            values: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    ErgodicMean,
    LastIterate,
}

/// Sparse robust regression study: SCAD against LASSO under the same sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScadStudySpec {
    pub n_obs: usize,
    pub d: usize,
    /// Toeplitz correlation: `Sigma_ij = rho^|i-j|`.
    pub rho: f64,
    pub beta_star: Vec<f64>,
    /// Weight of the standard normal in the noise mixture; the rest is standard Cauchy.
    pub normal_weight: f64,
    /// Multiplies the noise; 0 gives noise-free responses.
    pub noise_scale: f64,
    pub a: f64,
    pub n_reps: usize,
    pub lambda: f64,
    /// Inverse temperature of the optimizing chains.
    pub beta: f64,
    pub chain_iters: usize,
    pub burn_in: usize,
    pub cv_folds: usize,
    pub cv_chain_iters: usize,
    pub cv_burn_in: usize,
    pub gamma_grid: Vec<f64>,
    pub estimator: EstimatorMode,
    /// Weight of the penalty sum in `RSS + w P`; defaults to `2 n_obs` (or the training size in CV).
    pub penalty_weight: Option<f64>,
}

impl Default for ScadStudySpec {
    fn default() -> Self {
        Self {
            n_obs: 60,
            d: 8,
            rho: 0.5,
            beta_star: vec![3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0],
            normal_weight: 0.9,
            noise_scale: 1.0,
            a: 3.7,
            n_reps: 100,
            lambda: 1e-3,
            beta: 100.0,
            chain_iters: 7500,
            burn_in: 2500,
            cv_folds: 5,
            cv_chain_iters: 1250,
            cv_burn_in: 250,
            gamma_grid: log_grid(1e-3, 10.0, 20),
            estimator: EstimatorMode::ErgodicMean,
            penalty_weight: None,
        }
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    /// `u(x) = |x| + x^2 / 2`.
    AbsQuadratic,
    /// `u(x) = x^2 / 2`.
    Quadratic,
    /// `u(x) = |x|`.
    Abs,
}

/// Stationary bias of SG-ULA against exact target quantiles, as a function of the step size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateStudySpec {
    pub model: RateModel,
    pub beta: f64,
    pub lambdas: Vec<f64>,
    /// Retained steps per step size, split evenly over the chains.
    pub steps: usize,
    pub chains: usize,
    /// Burn-in in continuous time; each chain discards `ceil(burn_in_time / lambda)` steps.
    pub burn_in_time: f64,
    /// Wasserstein order (1 or 2).
    pub order: u32,
    /// Quadrature cells for the target CDF on `[lo, hi]`.
    pub cells: usize,
    pub lo: f64,
    pub hi: f64,
    /// Pass threshold for the fitted log-log slope.
    pub min_slope: f64,
}

impl Default for RateStudySpec {
    fn default() -> Self {
        Self {
            model: RateModel::AbsQuadratic,
            beta: 1.0,
            lambdas: vec![0.2, 0.1, 0.05, 0.025],
            steps: 1_000_000,
            chains: 8,
            burn_in_time: 20.0,
            order: 2,
            cells: 65_536,
            lo: -14.0,
            hi: 14.0,
            min_slope: 0.2,
        }
    }
}

/// Problem parameters for the constants calculator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsSection {
    pub m: f64,
    pub l: f64,
    pub k: f64,
    pub mu: f64,
    pub r: f64,
    pub h0_norm: f64,
    pub beta: f64,
    pub d: usize,
    pub e_theta0_sq: f64,
    pub lambda: f64,
    pub epsilon_w2: Option<f64>,
}

impl Default for ConstantsSection {
    fn default() -> Self {
        // the max-quadratic example in two dimensions
        Self {
            m: 1.0,
            l: 1.0,
            k: 1.0,
            mu: 0.5,
            r: 2.0 * std::f64::consts::SQRT_2,
            h0_norm: 0.0,
            beta: 1.0,
            d: 2,
            e_theta0_sq: 1.0,
            lambda: 0.01,
            epsilon_w2: None,
        }
    }
}

impl ConstantsSection {
    pub fn params(&self) -> ProblemParams<f64> {
        ProblemParams {
            m: self.m,
            l: self.l,
            k: self.k,
            mu: self.mu,
            r: self.r,
            h0_norm: self.h0_norm,
            beta: self.beta,
            d: self.d,
            e_theta0_sq: self.e_theta0_sq,
            lambda: self.lambda,
            epsilon_w2: self.epsilon_w2,
        }
    }
}

pub const PRESETS: [&str; 7] = [
    "mog_k3",
    "mog_k5",
    "scad_fan",
    "lambda_sweep",
    "beta_sweep",
    "rate_study",
    "constants",
];

/// Named presets with the published protocol values.
pub fn preset(name: &str) -> Result<ExperimentSpec> {
    let mut s = ExperimentSpec::default();
    match name {
        "mog_k3" => {}
        "mog_k5" => s.mog.preset = MogPreset::K5,
        "scad_fan" => s.experiment.kind = ExperimentKind::ScadRegression,
        "lambda_sweep" => {
            s.experiment.kind = ExperimentKind::SweepLambda;
            s.sampler.schemes = vec![SchemeName::Sgula];
        }
        "beta_sweep" => {
            s.experiment.kind = ExperimentKind::SweepBeta;
            s.mog.preset = MogPreset::K5;
            s.sampler.schemes = vec![SchemeName::Sgula];
            s.sweep.values = vec![100.0, 10.0, 5.0, 2.0, 1.0];
        }
        "rate_study" => s.experiment.kind = ExperimentKind::RateStudy,
        "constants" => s.experiment.kind = ExperimentKind::Constants,
        other => bail!("unknown preset `{other}` (known: {})", PRESETS.join(", ")),
    }
    Ok(s)
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).context("parsing experiment spec")?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Applies `section.key=value`. The value is read as a TOML value, falling back to
    /// a bare string.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (path, raw) = assignment
            .split_once('=')
            .ok_or_else(|| anyhow!("override `{assignment}` is not of the form section.key=value"))?;
        let (section, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| anyhow!("override path `{path}` must be section.key"))?;
        let value = parse_value(raw.trim());
        let mut root = toml::Table::try_from(&*self)?;
        let table = root
            .entry(section.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| anyhow!("`{section}` is not a section"))?;
        table.insert(key.to_string(), value);
        let updated: Self = root
            .try_into()
            .with_context(|| format!("applying override `{assignment}`"))?;
        *self = updated;
        Ok(())
    }

    /// Applies the assignments in order and validates the result once, so that
    /// coupled fields (e.g. `n_iters` and `burn_in`) can be changed together.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, assignments: &[S]) -> Result<()> {
        for a in assignments {
            self.apply_override(a.as_ref())?;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sampler;
        if !(s.lambda > 0.0 && s.beta > 0.0) {
            bail!("sampler.lambda and sampler.beta must be positive");
        }
        if s.n_chains == 0 || s.thin == 0 || s.burn_in >= s.n_iters {
            bail!("sampler needs n_chains >= 1, thin >= 1 and burn_in < n_iters");
        }
        if s.schemes.is_empty() {
            bail!("sampler.schemes must not be empty");
        }
        if matches!(self.experiment.kind, ExperimentKind::SweepLambda | ExperimentKind::SweepBeta) {
            if self.sweep.values.is_empty() {
                bail!("sweep.values must not be empty for sweep experiments");
            }
            if self.sweep.values.iter().any(|v| !(*v > 0.0)) {
                bail!("sweep.values must be positive");
            }
        }
        let c = &self.scad;
        if c.beta_star.len() != c.d || c.d == 0 || c.n_obs <= c.d {
            bail!("scad needs beta_star of length d and n_obs > d");
        }
        if c.cv_folds < 2 || c.gamma_grid.is_empty() || c.gamma_grid.iter().any(|g| !(*g >= 0.0)) {
            bail!("scad needs cv_folds >= 2 and a nonempty nonnegative gamma_grid");
        }
        if c.burn_in >= c.chain_iters || c.cv_burn_in >= c.cv_chain_iters {
            bail!("scad burn-in must be shorter than the chains");
        }
        if !(c.rho.abs() < 1.0 && (0.0..=1.0).contains(&c.normal_weight) && c.a > 2.0) {
            bail!("scad needs |rho| < 1, normal_weight in [0, 1] and a > 2");
        }
        let r = &self.rate;
        if r.lambdas.is_empty() || r.lambdas.iter().any(|l| !(*l > 0.0)) || r.chains == 0 || r.steps < r.chains {
            bail!("rate needs positive lambdas, chains >= 1 and steps >= chains");
        }
        if !(r.lo < r.hi) || r.cells < 2 || !matches!(r.order, 1 | 2) {
            bail!("rate needs lo < hi, cells >= 2 and order 1 or 2");
        }
        Ok(())
    }
}

fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in PRESETS {
            let spec = preset(name).unwrap();
            spec.validate().unwrap();
            let text = spec.to_toml_string().unwrap();
            assert_eq!(ExperimentSpec::from_toml_str(&text).unwrap(), spec, "{name}");
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn partial_file_uses_defaults() {
        let spec = ExperimentSpec::from_toml_str("[experiment]\nkind = \"sweep_beta\"\n[sweep]\nvalues = [2.0]\n").unwrap();
        assert_eq!(spec.experiment.kind, ExperimentKind::SweepBeta);
        assert_eq!(spec.sweep.values, vec![2.0]);
        assert_eq!(spec.sampler.n_chains, 12);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentSpec::from_toml_str("[sampler]\nlamda = 0.1\n").is_err());
    }

    #[test]
    fn overrides() {
        let mut s = preset("mog_k3").unwrap();
        s.apply_override("sampler.lambda=0.01").unwrap();
        s.apply_override("mog.preset=k5").unwrap();
        s.apply_override("scad.n_reps = 3").unwrap();
        s.apply_override("sampler.schemes=[\"sgula\"]").unwrap();
        assert_eq!(s.sampler.lambda, 0.01);
        assert_eq!(s.mog.preset, MogPreset::K5);
        assert_eq!(s.scad.n_reps, 3);
        assert_eq!(s.sampler.schemes, vec![SchemeName::Sgula]);
        assert!(s.apply_overrides(&["sampler.lambda=-1"]).is_err());
        assert!(s.apply_override("nodot=1").is_err());
        assert!(s.apply_override("sampler.nope=1").is_err());
        let mut t = preset("mog_k3").unwrap();
        t.apply_overrides(&["sampler.n_iters=600", "sampler.burn_in=100"]).unwrap();
        assert_eq!((t.sampler.n_iters, t.sampler.burn_in), (600, 100));
    }

    #[test]
    fn default_gamma_grid() {
        let g = ScadStudySpec::default().gamma_grid;
        assert_eq!(g.len(), 20);
        assert!((g[0] - 1e-3).abs() < 1e-15 && (g[19] - 10.0).abs() < 1e-12);
    }
}
