use super::{prox_l1_scalar, Potential, RegularityParams, SmoothSplit, KINK_TOL};
use crate::error::{invalid, Result};
use crate::scalar::{dist_sq, log_sum_exp, sign0, Scalar};

/// Isotropic Gaussian mixture likelihood with a Laplace prior `exp(-alpha |x|_1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MogLaplaceSpec<F> {
    pub weights: Vec<F>,
    pub means: Vec<Vec<F>>,
    /// Per-component isotropic variances `sigma_j^2`.
    pub variances: Vec<F>,
    pub laplace_scale: F,
}

impl<F: Scalar> MogLaplaceSpec<F> {
    /// Three-component 2-D mixture used in the sampling comparisons.
    pub fn k3(laplace_scale: F) -> Self {
        Self::from_f64(
            &[0.3, 0.4, 0.3],
            &[[-2.6, 2.8], [0.0, 0.0], [2.2, -2.2]],
            &[0.60, 0.80, 0.70],
            laplace_scale,
        )
    }

    /// Five-component 2-D mixture used in the sampling comparisons.
    pub fn k5(laplace_scale: F) -> Self {
        Self::from_f64(
            &[0.18, 0.22, 0.20, 0.22, 0.18],
            &[[-3.0, 2.8], [-1.2, 0.8], [0.8, -0.4], [2.2, -2.0], [3.2, 2.4]],
            &[0.55, 0.65, 0.50, 0.70, 0.60],
            laplace_scale,
        )
    }

    fn from_f64(w: &[f64], mu: &[[f64; 2]], var: &[f64], laplace_scale: F) -> Self {
        Self {
            weights: w.iter().map(|&v| F::lit(v)).collect(),
            means: mu.iter().map(|m| m.iter().map(|&v| F::lit(v)).collect()).collect(),
            variances: var.iter().map(|&v| F::lit(v)).collect(),
            laplace_scale,
        }
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.weights.len();
        if k == 0 {
            return Err(invalid("weights", "mixture needs at least one component"));
        }
        if self.means.len() != k || self.variances.len() != k {
            return Err(invalid(
                "means",
                format!(
                    "{} weights, {} means, {} variances",
                    k,
                    self.means.len(),
                    self.variances.len()
                ),
            ));
        }
        let d = self.dim();
        if d == 0 || self.means.iter().any(|m| m.len() != d) {
            return Err(invalid("means", "all means must share one positive dimension"));
        }
        if self.weights.iter().any(|&w| !(w >= F::zero() && w <= F::one())) {
            return Err(invalid("weights", "each weight must lie in [0, 1]"));
        }
        let total: f64 = self.weights.iter().map(|w| w.as_f64()).sum();
        // single precision cannot resolve 1e-12
        let tol = 1e-12_f64.max(16.0 * F::epsilon().as_f64());
        if (total - 1.0).abs() > tol {
            return Err(invalid("weights", format!("sum to {total}, expected 1")));
        }
        if self.variances.iter().any(|&s| !(s > F::zero() && s.is_finite())) {
            return Err(invalid("variances", "must be positive and finite"));
        }
        if !(self.laplace_scale >= F::zero() && self.laplace_scale.is_finite()) {
            return Err(invalid("laplace_scale", "must be nonnegative and finite"));
        }
        Ok(())
    }
}

/// `u(x) = -log sum_j w_j N(x; mu_j, sigma_j^2 I) + alpha |x|_1`.
#[derive(Debug, Clone)]
pub struct MogLaplace<F> {
    spec: MogLaplaceSpec<F>,
    /// `log w_j - (d/2) log(2 pi sigma_j^2)`.
    log_norm: Vec<F>,
    h0_norm: F,
}

impl<F: Scalar> MogLaplace<F> {
    pub fn new(spec: MogLaplaceSpec<F>) -> Result<Self> {
        spec.validate()?;
        let half_d = F::from_usize_lossy(spec.dim()) / F::lit(2.0);
        let log_norm = spec
            .weights
            .iter()
            .zip(&spec.variances)
            .map(|(&w, &s2)| w.ln() - half_d * (F::TAU() * s2).ln())
            .collect();
        let mut m = Self {
            spec,
            log_norm,
            h0_norm: F::zero(),
        };
        m.h0_norm = super::h0_norm(&m);
        Ok(m)
    }

    pub fn spec(&self) -> &MogLaplaceSpec<F> {
        &self.spec
    }

    fn component_logs(&self, x: &[F], buf: &mut [F]) {
        for (j, b) in buf.iter_mut().enumerate() {
            *b = self.log_norm[j]
                - dist_sq(x, &self.spec.means[j]) / (F::lit(2.0) * self.spec.variances[j]);
        }
    }

    /// `-log` of the mixture likelihood, without the prior.
    pub fn neg_log_likelihood(&self, x: &[F]) -> F {
        let mut buf = vec![F::zero(); self.spec.weights.len()];
        self.component_logs(x, &mut buf);
        -log_sum_exp(&buf)
    }

    /// Normalized target density for `beta = 1`, up to the unknown prior normalizer.
    pub fn unnormalized_density(&self, x: &[F]) -> F {
        (-self.value(x)).exp()
    }

    fn likelihood_grad(&self, x: &[F], out: &mut [F]) {
        let k = self.spec.weights.len();
        let mut buf = vec![F::zero(); k];
        self.component_logs(x, &mut buf);
        let lse = log_sum_exp(&buf);
        out.iter_mut().for_each(|o| *o = F::zero());
        for j in 0..k {
            let r = (buf[j] - lse).exp() / self.spec.variances[j];
            for (o, (&xi, &mi)) in out.iter_mut().zip(x.iter().zip(&self.spec.means[j])) {
                *o += r * (xi - mi);
            }
        }
    }
}

impl<F: Scalar> Potential<F> for MogLaplace<F> {
    fn name(&self) -> &str {
        "mog_laplace"
    }
    fn dim(&self) -> usize {
        self.spec.dim()
    }
    fn value(&self, x: &[F]) -> F {
        self.neg_log_likelihood(x) + self.spec.laplace_scale * x.iter().map(|v| v.abs()).sum::<F>()
    }
    fn subgradient_into(&self, x: &[F], out: &mut [F]) {
        self.likelihood_grad(x, out);
        let a = self.spec.laplace_scale;
        for (o, &v) in out.iter_mut().zip(x) {
            // the prior contributes its own minimum-norm element, 0, on a zero coordinate
            if v.abs() > F::lit(KINK_TOL) {
                *o += a * sign0(v);
            }
        }
    }
    fn regularity(&self) -> RegularityParams<F> {
        RegularityParams {
            h0_norm: self.h0_norm,
            ..Default::default()
        }
    }
    fn kink_distance(&self, x: &[F]) -> F {
        if self.spec.laplace_scale > F::zero() {
            x.iter().fold(F::infinity(), |m, v| m.min(v.abs()))
        } else {
            F::infinity()
        }
    }
    fn kink_point(&self, x: &[F], selector: u64) -> Option<Vec<F>> {
        if self.spec.laplace_scale == F::zero() {
            return None;
        }
        let mut p = x.to_vec();
        let i = (selector % p.len() as u64) as usize;
        p[i] = F::zero();
        Some(p)
    }
    fn smooth_split(&self) -> Option<&dyn SmoothSplit<F>> {
        Some(self)
    }
}

impl<F: Scalar> SmoothSplit<F> for MogLaplace<F> {
    fn grad_smooth_into(&self, x: &[F], out: &mut [F]) {
        self.likelihood_grad(x, out);
    }
    fn prox_nonsmooth_into(&self, x: &[F], gamma: F, out: &mut [F]) {
        let tau = gamma * self.spec.laplace_scale;
        for (o, &v) in out.iter_mut().zip(x) {
            *o = prox_l1_scalar(v, tau);
        }
    }
}
