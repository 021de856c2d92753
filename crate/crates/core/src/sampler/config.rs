use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::constants::lambda_max;
use crate::error::{check_dim, invalid, Result};
use crate::potentials::RegularityParams;
use crate::scalar::Scalar;

/// Distribution of the initial iterate `theta_0`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitLaw<F> {
    Point(Vec<F>),
    /// Independent uniform coordinates on `[lo_i, hi_i]`.
    UniformBox { lo: Vec<F>, hi: Vec<F> },
    /// `center + scale * N(0, I)`.
    Gaussian { center: Vec<F>, scale: F },
}

impl<F: Scalar> InitLaw<F> {
    /// The same interval `[lo, hi]` on every coordinate.
    pub fn cube(dim: usize, lo: F, hi: F) -> Self {
        InitLaw::UniformBox {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
        }
    }

    pub fn standard_gaussian(dim: usize, scale: F) -> Self {
        InitLaw::Gaussian {
            center: vec![F::zero(); dim],
            scale,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            InitLaw::Point(p) => p.len(),
            InitLaw::UniformBox { lo, .. } => lo.len(),
            InitLaw::Gaussian { center, .. } => center.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            InitLaw::Point(p) if p.iter().any(|v| !v.is_finite()) => {
                Err(invalid("init", "point must be finite"))
            }
            InitLaw::UniformBox { lo, hi } => {
                check_dim(lo.len(), hi.len())?;
                if lo.iter().zip(hi).any(|(&l, &h)| !(l <= h && l.is_finite() && h.is_finite())) {
                    return Err(invalid("init", "box needs finite lo <= hi"));
                }
                Ok(())
            }
            InitLaw::Gaussian { center, scale } => {
                if !(*scale >= F::zero() && scale.is_finite()) || center.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("init", "gaussian needs finite center and scale >= 0"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<F> {
        match self {
            InitLaw::Point(p) => p.clone(),
            InitLaw::UniformBox { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(&l, &h)| l + (h - l) * F::lit(rng.random::<f64>()))
                .collect(),
            InitLaw::Gaussian { center, scale } => center
                .iter()
                .map(|&c| {
                    let z: f64 = StandardNormal.sample(rng);
                    c + *scale * F::lit(z)
                })
                .collect(),
        }
    }

    /// `E|theta_0|^2` in closed form.
    pub fn second_moment(&self) -> F {
        let three = F::lit(3.0);
        match self {
            InitLaw::Point(p) => p.iter().map(|&v| v * v).sum(),
            InitLaw::UniformBox { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(&l, &h)| (l * l + l * h + h * h) / three)
                .sum(),
            InitLaw::Gaussian { center, scale } => center
                .iter()
                .map(|&c| c * c + *scale * *scale)
                .sum(),
        }
    }
}

/// Update rule used by the chain driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme<F> {
    SgUla,
    /// Moreau-Yosida regularized ULA with smoothing parameter `gamma`.
    Myula { gamma: F },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig<F> {
    pub lambda: F,
    pub beta: F,
    pub n_iters: usize,
    pub burn_in: usize,
    pub n_chains: usize,
    pub thin: usize,
    pub seed: u64,
    pub init: InitLaw<F>,
    pub scheme: Scheme<F>,
    /// When false the Gaussian increment is dropped and the chain is plain subgradient descent.
    pub noise: bool,
}

/// Iterates with norm above this abort the chain.
pub const DIVERGENCE_THRESHOLD: f64 = 1e8;

impl<F: Scalar> SamplerConfig<F> {
    /// Single SG-ULA chain from the origin with no burn-in or thinning.
    pub fn new(dim: usize, lambda: F, beta: F, n_iters: usize) -> Self {
        Self {
            lambda,
            beta,
            n_iters,
            burn_in: 0,
            n_chains: 1,
            thin: 1,
            seed: 0,
            init: InitLaw::Point(vec![F::zero(); dim]),
            scheme: Scheme::SgUla,
            noise: true,
        }
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }
    pub fn with_chains(mut self, n_chains: usize) -> Self {
        self.n_chains = n_chains;
        self
    }
    pub fn with_thin(mut self, thin: usize) -> Self {
        self.thin = thin;
        self
    }
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
    pub fn with_init(mut self, init: InitLaw<F>) -> Self {
        self.init = init;
        self
    }
    pub fn with_scheme(mut self, scheme: Scheme<F>) -> Self {
        self.scheme = scheme;
        self
    }
    pub fn without_noise(mut self) -> Self {
        self.noise = false;
        self
    }

    /// Retained iterates per chain: `ceil((n_iters - burn_in) / thin)`.
    pub fn retained_per_chain(&self) -> usize {
        (self.n_iters - self.burn_in).div_ceil(self.thin)
    }

    /// Whether iterate `n` (1-based, `theta_n`) is kept.
    #[inline]
    pub fn is_retained(&self, n: usize) -> bool {
        n > self.burn_in && (n - self.burn_in - 1) % self.thin == 0
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.lambda > F::zero() && self.lambda.is_finite()) {
            return Err(invalid("lambda", format!("must be positive, got {}", self.lambda)));
        }
        if !(self.beta > F::zero() && self.beta.is_finite()) {
            return Err(invalid("beta", format!("must be positive, got {}", self.beta)));
        }
        if self.n_iters == 0 {
            return Err(invalid("n_iters", "must be positive"));
        }
        if self.burn_in >= self.n_iters {
            return Err(invalid("burn_in", "must be smaller than n_iters"));
        }
        if self.n_chains == 0 {
            return Err(invalid("n_chains", "must be positive"));
        }
        if self.thin == 0 {
            return Err(invalid("thin", "must be positive"));
        }
        if let Scheme::Myula { gamma } = self.scheme {
            if !(gamma > F::zero() && gamma.is_finite()) {
                return Err(invalid("gamma", "MYULA smoothing must be positive"));
            }
        }
        check_dim(dim, self.init.dim())?;
        self.init.validate()
    }

    /// Logs a warning when `lambda` is outside the range covered by the error bounds.
    pub fn warn_if_outside_theory(&self, reg: &RegularityParams<F>) {
        if let (Some(mu), Some(l)) = (reg.mu, reg.l) {
            if let Ok(l0) = lambda_max(mu, l) {
                if self.lambda >= l0 {
                    log::warn!(
                        "stepsize {} is not below lambda_0 = {}; error bounds do not apply",
                        self.lambda,
                        l0
                    );
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn retained_count() {
        let c = SamplerConfig::<f64>::new(1, 0.1, 1.0, 10).with_burn_in(3).with_thin(3);
        assert_eq!(c.retained_per_chain(), 3);
        let kept: Vec<usize> = (1..=10).filter(|&n| c.is_retained(n)).collect();
        assert_eq!(kept, vec![4, 7, 10]);
    }

    #[test]
    fn validation() {
        let c = SamplerConfig::<f64>::new(2, 0.1, 1.0, 10);
        assert!(c.validate(2).is_ok());
        assert!(c.validate(3).is_err());
        assert!(c.clone().with_burn_in(10).validate(2).is_err());
        assert!(c.clone().with_thin(0).validate(2).is_err());
        assert!(c
            .clone()
            .with_init(InitLaw::UniformBox { lo: vec![1.0, 0.0], hi: vec![0.0, 1.0] })
            .validate(2)
            .is_err());
    }

    #[test]
    fn init_second_moments() {
        let b = InitLaw::cube(2, -1.0_f64, 1.0);
        assert!((b.second_moment() - 2.0 / 3.0).abs() < 1e-15);
        let g = InitLaw::Gaussian { center: vec![1.0], scale: 2.0 };
        assert_eq!(g.second_moment(), 5.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = b.sample(&mut rng);
        assert!(x.iter().all(|v| (-1.0..=1.0).contains(v)));
    }
}
