use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::step::{myula_drift, sgula_update};
use super::{ChainTrace, SampleSet, SamplerConfig, Scheme, DIVERGENCE_THRESHOLD};
use crate::error::{invalid, Error, Result};
use crate::potentials::Potential;
use crate::scalar::{norm_sq, Scalar};

/// Generator for chain `chain_id`: ChaCha8 keyed by `seed`, one stream per chain.
pub fn chain_rng(seed: u64, chain_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain_id);
    rng
}

/// Runs one chain and calls `observe(n, theta_n)` for every iterate, `n = 0..=n_iters`.
/// Retained iterates are returned as in [`run_chain`].
pub fn run_chain_observed<F: Scalar>(
    model: &dyn Potential<F>,
    config: &SamplerConfig<F>,
    chain_id: u64,
    mut observe: impl FnMut(usize, &[F]),
) -> Result<ChainTrace<F>> {
    let d = model.dim();
    config.validate(d)?;
    let split = match config.scheme {
        Scheme::SgUla => None,
        Scheme::Myula { gamma } => Some((
            model
                .smooth_split()
                .ok_or_else(|| invalid("scheme", format!("{} has no smooth/prox split", model.name())))?,
            gamma,
        )),
    };

    let mut rng = chain_rng(config.seed, chain_id);
    let mut theta = config.init.sample(&mut rng);
    let mut drift = vec![F::zero(); d];
    let mut prox = vec![F::zero(); d];
    let mut xi = vec![F::zero(); d];
    let noise_scale = if config.noise {
        (F::lit(2.0) * config.lambda / config.beta).sqrt()
    } else {
        F::zero()
    };
    let threshold = F::lit(DIVERGENCE_THRESHOLD * DIVERGENCE_THRESHOLD);

    let rows = config.retained_per_chain();
    let mut data = Vec::with_capacity(rows * d);
    let mut iters = Vec::with_capacity(rows);
    observe(0, &theta);
    for n in 1..=config.n_iters {
        match split {
            None => model.subgradient_into(&theta, &mut drift),
            Some((s, gamma)) => {
                s.grad_smooth_into(&theta, &mut drift);
                s.prox_nonsmooth_into(&theta, gamma, &mut prox);
                myula_drift(&mut drift, &theta, &prox, gamma);
            }
        }
        if config.noise {
            for z in xi.iter_mut() {
                let v: f64 = StandardNormal.sample(&mut rng);
                *z = F::lit(v);
            }
        }
        sgula_update(&mut theta, &drift, config.lambda, noise_scale, &xi);
        let r2 = norm_sq(&theta);
        if !(r2 <= threshold) {
            return Err(Error::Divergence {
                chain: chain_id,
                iteration: n,
                norm: r2.as_f64().sqrt(),
            });
        }
        observe(n, &theta);
        if config.is_retained(n) {
            data.extend_from_slice(&theta);
            iters.push(n);
        }
    }
    Ok(ChainTrace {
        chain_id,
        dim: d,
        data,
        iters,
    })
}

/// Runs one chain. Bit-identical for identical `(config, chain_id)`.
pub fn run_chain<F: Scalar>(
    model: &dyn Potential<F>,
    config: &SamplerConfig<F>,
    chain_id: u64,
) -> Result<ChainTrace<F>> {
    run_chain_observed(model, config, chain_id, |_, _| {})
}

/// Runs `config.n_chains` independent chains in parallel and pools them in chain order.
pub fn run_parallel_chains<F: Scalar>(
    model: &dyn Potential<F>,
    config: &SamplerConfig<F>,
) -> Result<SampleSet<F>> {
    config.validate(model.dim())?;
    config.warn_if_outside_theory(&model.regularity());
    let start = Instant::now();
    let chains = (0..config.n_chains as u64)
        .into_par_iter()
        .map(|id| run_chain(model, config, id))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleSet::new(model.dim(), chains, config.clone(), start.elapsed()))
}
