use super::{check_positive_dim, prox_l1_scalar, Potential, RegularityParams, SmoothSplit, KINK_TOL};
use crate::error::{invalid, Result};
use crate::scalar::{norm_sq, sign0, Scalar};

fn l1_sub<F: Scalar>(x: F) -> F {
    if x.abs() <= F::lit(KINK_TOL) {
        F::zero()
    } else {
        sign0(x)
    }
}

fn min_abs<F: Scalar>(x: &[F]) -> F {
    x.iter().fold(F::infinity(), |m, v| m.min(v.abs()))
}

fn zero_coordinate<F: Scalar>(x: &[F], selector: u64) -> Vec<F> {
    let mut p = x.to_vec();
    if !p.is_empty() {
        let i = (selector % p.len() as u64) as usize;
        p[i] = F::zero();
    }
    p
}

/// `u(x) = c |x|^2 / 2`, the Gaussian `N(0, 1/(c beta))` potential.
#[derive(Debug, Clone)]
pub struct Quadratic<F> {
    dim: usize,
    curvature: F,
}

impl<F: Scalar> Quadratic<F> {
    pub fn new(dim: usize, curvature: F) -> Result<Self> {
        check_positive_dim(dim)?;
        if !(curvature > F::zero() && curvature.is_finite()) {
            return Err(invalid("curvature", "must be positive and finite"));
        }
        Ok(Self { dim, curvature })
    }
}

impl<F: Scalar> Potential<F> for Quadratic<F> {
    fn name(&self) -> &str {
        "quadratic"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[F]) -> F {
        self.curvature * norm_sq(x) / F::lit(2.0)
    }
    fn subgradient_into(&self, x: &[F], out: &mut [F]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = self.curvature * v;
        }
    }
    // Strongly convex everywhere, so any positive radius works; R = 1 keeps the
    // constants formulas well defined.
    fn regularity(&self) -> RegularityParams<F> {
        RegularityParams {
            m: Some(F::zero()),
            l: Some(self.curvature),
            k: Some(F::zero()),
            mu: Some(self.curvature),
            r: Some(F::one()),
            h0_norm: F::zero(),
        }
    }
}

/// `u(x) = alpha |x|_1`, the Laplace potential.
#[derive(Debug, Clone)]
pub struct L1Norm<F> {
    dim: usize,
    scale: F,
}

impl<F: Scalar> L1Norm<F> {
    pub fn new(dim: usize, scale: F) -> Result<Self> {
        check_positive_dim(dim)?;
        if !(scale > F::zero() && scale.is_finite()) {
            return Err(invalid("scale", "must be positive and finite"));
        }
        Ok(Self { dim, scale })
    }
}

impl<F: Scalar> Potential<F> for L1Norm<F> {
    fn name(&self) -> &str {
        "l1"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[F]) -> F {
        self.scale * x.iter().map(|v| v.abs()).sum::<F>()
    }
    fn subgradient_into(&self, x: &[F], out: &mut [F]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = self.scale * l1_sub(v);
        }
    }
    fn regularity(&self) -> RegularityParams<F> {
        RegularityParams {
            m: Some(self.scale * F::from_usize_lossy(self.dim).sqrt()),
            l: Some(F::zero()),
            k: Some(F::zero()),
            mu: None,
            r: None,
            h0_norm: F::zero(),
        }
    }
    fn kink_distance(&self, x: &[F]) -> F {
        min_abs(x)
    }
    fn kink_point(&self, x: &[F], selector: u64) -> Option<Vec<F>> {
        Some(zero_coordinate(x, selector))
    }
    fn smooth_split(&self) -> Option<&dyn SmoothSplit<F>> {
        Some(self)
    }
}

impl<F: Scalar> SmoothSplit<F> for L1Norm<F> {
    fn grad_smooth_into(&self, _x: &[F], out: &mut [F]) {
        out.iter_mut().for_each(|o| *o = F::zero());
    }
    fn prox_nonsmooth_into(&self, x: &[F], gamma: F, out: &mut [F]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = prox_l1_scalar(v, gamma * self.scale);
        }
    }
}

/// `u(x) = |x|_1 + |x|^2 / 2`.
#[derive(Debug, Clone)]
pub struct AbsQuadratic {
    dim: usize,
}

impl AbsQuadratic {
    pub fn new(dim: usize) -> Result<Self> {
        check_positive_dim(dim)?;
        Ok(Self { dim })
    }
}

impl<F: Scalar> Potential<F> for AbsQuadratic {
    fn name(&self) -> &str {
        "abs_quadratic"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[F]) -> F {
        x.iter().map(|v| v.abs()).sum::<F>() + norm_sq(x) / F::lit(2.0)
    }
    fn subgradient_into(&self, x: &[F], out: &mut [F]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = l1_sub(v) + v;
        }
    }
    fn regularity(&self) -> RegularityParams<F> {
        RegularityParams {
            m: Some(F::from_usize_lossy(self.dim).sqrt()),
            l: Some(F::one()),
            k: Some(F::zero()),
            mu: Some(F::one()),
            r: Some(F::one()),
            h0_norm: F::zero(),
        }
    }
    fn kink_distance(&self, x: &[F]) -> F {
        min_abs(x)
    }
    fn kink_point(&self, x: &[F], selector: u64) -> Option<Vec<F>> {
        Some(zero_coordinate(x, selector))
    }
    fn smooth_split(&self) -> Option<&dyn SmoothSplit<F>> {
        Some(self)
    }
}

impl<F: Scalar> SmoothSplit<F> for AbsQuadratic {
    fn grad_smooth_into(&self, x: &[F], out: &mut [F]) {
        out.copy_from_slice(x);
    }
    fn prox_nonsmooth_into(&self, x: &[F], gamma: F, out: &mut [F]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = prox_l1_scalar(v, gamma);
        }
    }
}

type ValueFn<F> = dyn Fn(&[F]) -> F + Send + Sync;
type GradFn<F> = dyn Fn(&[F], &mut [F]) + Send + Sync;

/// A potential assembled from closures. Handy for tests and ad hoc targets.
pub struct FnPotential<F> {
    name: String,
    dim: usize,
    value: Box<ValueFn<F>>,
    grad: Box<GradFn<F>>,
    regularity: RegularityParams<F>,
}

impl<F: Scalar> FnPotential<F> {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        value: impl Fn(&[F]) -> F + Send + Sync + 'static,
        grad: impl Fn(&[F], &mut [F]) + Send + Sync + 'static,
    ) -> Self {
        let mut p = Self {
            name: name.into(),
            dim,
            value: Box::new(value),
            grad: Box::new(grad),
            regularity: RegularityParams::default(),
        };
        p.regularity.h0_norm = super::h0_norm(&p);
        p
    }

    pub fn with_regularity(mut self, mut reg: RegularityParams<F>) -> Self {
        reg.h0_norm = self.regularity.h0_norm;
        self.regularity = reg;
        self
    }
}

impl<F: Scalar> Potential<F> for FnPotential<F> {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[F]) -> F {
        (self.value)(x)
    }
    fn subgradient_into(&self, x: &[F], out: &mut [F]) {
        (self.grad)(x, out)
    }
    fn regularity(&self) -> RegularityParams<F> {
        self.regularity
    }
}
