use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;
use sgula_core::assumptions::{
    check_convexity_at_infinity, check_dissipativity, check_finite_difference, check_linear_growth,
    check_semi_convexity, estimate_regularity, CheckReport, InfinityVariant, ProbePlan,
};
use sgula_core::constants::dissipativity_b;
use sgula_core::potentials::{make_model, ModelSpec, MogLaplaceSpec, RegularityParams};
use sgula_experiments::config::ConstantsSection;
use sgula_experiments::{emit_report, preset, run_experiment, ExperimentSpec, StudyReport};

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "SGULA_THREADS";

#[derive(Parser)]
#[command(name = "sgula", version, about = "Subgradient Langevin sampling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a preset or a TOML file and write its report.
    Run {
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        preset: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Print every bound constant as a flat JSON object.
    Constants {
        /// TOML file with the problem parameters (m, l, k, mu, r, h0_norm, beta, d, ...).
        #[arg(long)]
        params: Option<PathBuf>,
        /// Also report step size and iteration count reaching this accuracy.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Check the regularity assumptions of a catalog model at declared or given constants.
    Check {
        /// quadratic, l1, abs_quadratic, max_quadratic, one_d_composite, mog_k3 or mog_k5.
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// TOML file overriding any of m, l, k, mu, r, b.
        #[arg(long)]
        constants: Option<PathBuf>,
        #[arg(long, default_value_t = 5.0)]
        half_width: f64,
        #[arg(long, default_value_t = 20_000)]
        points: usize,
        #[arg(long, default_value_t = 20_000)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the step-size rate study.
    Rate(Common),
    /// Run the sparse regression study.
    Scad(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// `section.key=value`, applied in order.
    #[arg(long = "override")]
    overrides: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantOverrides {
    m: Option<f64>,
    l: Option<f64>,
    k: Option<f64>,
    mu: Option<f64>,
    r: Option<f64>,
    b: Option<f64>,
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v.parse().with_context(|| format!("{THREADS_VAR}={v} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn run_and_emit(mut spec: ExperimentSpec, common: &Common) -> Result<bool> {
    spec.apply_overrides(&common.overrides)?;
    if let Some(seed) = common.seed {
        spec.experiment.seed = seed;
    }
    let report = run_experiment(&spec)?;
    let manifest = emit_report(&report, &common.out)?;
    print_summary(&report);
    eprintln!("wrote {} files to {}", manifest.files.len() + 2, common.out.display());
    Ok(report.all_thresholds_pass())
}

fn print_summary(report: &StudyReport) {
    for (k, v) in &report.summary {
        println!("{k} = {v}");
    }
    for (k, pass) in &report.thresholds {
        println!("{} {k}", if *pass { "PASS" } else { "FAIL" });
    }
}

fn check_model(name: &str, dim: usize) -> Result<ModelSpec<f64>> {
    Ok(match name {
        "quadratic" => ModelSpec::Quadratic { dim, curvature: 1.0 },
        "l1" => ModelSpec::L1 { dim, scale: 1.0 },
        "abs_quadratic" => ModelSpec::AbsQuadratic { dim },
        "max_quadratic" => ModelSpec::MaxQuadratic { dim },
        "one_d_composite" => ModelSpec::OneDComposite,
        "mog_k3" => ModelSpec::MogLaplace(MogLaplaceSpec::k3(0.15)),
        "mog_k5" => ModelSpec::MogLaplace(MogLaplaceSpec::k5(0.15)),
        other => bail!("unknown model `{other}`"),
    })
}

fn report_json(r: &CheckReport) -> serde_json::Value {
    json!({
        "name": r.name,
        "pass": r.pass,
        "margin": if r.margin.is_finite() { json!(r.margin) } else { json!(r.margin.to_string()) },
        "witness": r.witness,
        "probes": r.probes,
        "note": r.note,
    })
}

fn run_checks(
    model: &str,
    dim: usize,
    constants: Option<&Path>,
    probe: (f64, usize, usize, u64),
) -> Result<(Vec<CheckReport>, RegularityParams<f64>)> {
    let model = make_model(check_model(model, dim)?)?;
    let (half_width, points, pairs, seed) = probe;
    let plan = ProbePlan::cube(model.dim(), half_width, points, pairs, seed);
    let over: ConstantOverrides = match constants {
        Some(p) => read_toml(p)?,
        None => ConstantOverrides::default(),
    };
    let mut reg = model.regularity();
    reg.m = over.m.or(reg.m);
    reg.l = over.l.or(reg.l);
    reg.k = over.k.or(reg.k);
    reg.mu = over.mu.or(reg.mu);
    reg.r = over.r.or(reg.r);
    if !reg.is_complete() {
        reg = estimate_regularity(model.as_ref(), &plan)?;
    }
    let (m, l, k, mu, r) = (reg.m.unwrap(), reg.l.unwrap(), reg.k.unwrap(), reg.mu.unwrap(), reg.r.unwrap());
    let b = match over.b {
        Some(b) => b,
        None => dissipativity_b(m, l, mu, r, reg.h0_norm)?,
    };
    let reports = vec![
        check_linear_growth(model.as_ref(), m, l, &plan)?,
        check_semi_convexity(model.as_ref(), k, &plan)?,
        check_convexity_at_infinity(model.as_ref(), mu, r, &plan, InfinityVariant::Pairwise)?,
        check_dissipativity(model.as_ref(), mu, b, &plan)?,
        check_finite_difference(model.as_ref(), &plan, 1e-6, 1e-5)?,
    ];
    Ok((reports, reg))
}

fn main_inner() -> Result<bool> {
    let cli = Cli::parse();
    init_threads()?;
    match cli.command {
        Command::Run { preset: p, config, common } => {
            let spec = match (p, config) {
                (Some(name), _) => preset(&name)?,
                (None, Some(path)) => ExperimentSpec::from_file(&path)?,
                (None, None) => bail!("one of --preset or --config is required"),
            };
            run_and_emit(spec, &common)
        }
        Command::Constants { params, epsilon } => {
            let mut spec = preset("constants")?;
            if let Some(p) = params {
                spec.constants = read_toml::<ConstantsSection>(&p)?;
            }
            let report = sgula_experiments::constants::run_constants(&spec, epsilon)?;
            println!("{}", serde_json::to_string_pretty(&report.summary)?);
            Ok(true)
        }
        Command::Check {
            model,
            dim,
            constants,
            half_width,
            points,
            pairs,
            seed,
        } => {
            let probe = (half_width, points, pairs, seed);
            let (reports, reg) = run_checks(&model, dim, constants.as_deref(), probe)?;
            let out = json!({
                "model": model,
                "constants": {"m": reg.m, "l": reg.l, "k": reg.k, "mu": reg.mu, "r": reg.r, "h0_norm": reg.h0_norm},
                "checks": reports.iter().map(report_json).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(reports.iter().all(|r| r.pass))
        }
        Command::Rate(common) => run_and_emit(preset("rate_study")?, &common),
        Command::Scad(common) => run_and_emit(preset("scad_fan")?, &common),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match main_inner() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
