//! Catalog of potentials `u` with exact evaluation and minimum-norm subgradients.
//!
//! Every model implements [`Potential`]. At points where `u` is differentiable the
//! subgradient is the gradient; on a kink manifold (within [`KINK_TOL`]) the model
//! returns the minimum-norm element of the relevant subdifferential.

mod composite;
mod max_quadratic;
mod mog;
mod regression;
mod scad;
mod simple;

pub use composite::OneDComposite;
pub use max_quadratic::MaxQuadratic;
pub use mog::{MogLaplace, MogLaplaceSpec};
pub use regression::{build_regression_potential, Penalty, RegressionData, RegressionPotential};
pub use scad::{prox_l1, prox_l1_scalar, ScadSpec};
pub use simple::{AbsQuadratic, FnPotential, L1Norm, Quadratic};

use crate::error::{check_dim, Result};
use crate::scalar::{norm, Scalar};

/// Points closer than this to a kink manifold are treated as lying on it.
pub const KINK_TOL: f64 = 1e-12;

/// Declared regularity constants. Unset fields are unknown and must be
/// estimated or supplied by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegularityParams<F> {
    /// Growth offset: `|h(x)| <= m + L|x|`.
    pub m: Option<F>,
    /// Growth slope.
    pub l: Option<F>,
    /// Semi-convexity modulus.
    pub k: Option<F>,
    /// Convexity-at-infinity modulus.
    pub mu: Option<F>,
    /// Convexity-at-infinity radius.
    pub r: Option<F>,
    /// `|h(0)|`.
    pub h0_norm: F,
}

impl<F: Scalar> RegularityParams<F> {
    pub fn is_complete(&self) -> bool {
        self.m.is_some() && self.l.is_some() && self.k.is_some() && self.mu.is_some() && self.r.is_some()
    }
}

/// The nonsmooth split `u = f + g` used by the Moreau-Yosida baseline:
/// `f` differentiable, `g` convex with an explicit proximal map.
pub trait SmoothSplit<F: Scalar>: Send + Sync {
    fn grad_smooth_into(&self, x: &[F], out: &mut [F]);
    /// `argmin_z g(z) + |z - x|^2 / (2 gamma)`.
    fn prox_nonsmooth_into(&self, x: &[F], gamma: F, out: &mut [F]);
}

/// A potential `u: R^d -> R` with a subgradient oracle.
///
/// The `*_into` and `value` methods do not validate lengths; use [`eval_u`] and
/// [`subgrad_min_norm`] for checked access.
pub trait Potential<F: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn value(&self, x: &[F]) -> F;

    /// Writes the selected (minimum-norm at kinks) subgradient into `out`.
    fn subgradient_into(&self, x: &[F], out: &mut [F]);

    fn regularity(&self) -> RegularityParams<F>;

    /// Distance from `x` to the nearest non-differentiability set. Smooth models return infinity.
    fn kink_distance(&self, _x: &[F]) -> F {
        F::infinity()
    }

    /// A point on a kink manifold derived from `x`, used to place probes next to kinks.
    /// `selector` picks among several manifolds when there are more than one.
    fn kink_point(&self, _x: &[F], _selector: u64) -> Option<Vec<F>> {
        None
    }

    fn smooth_split(&self) -> Option<&dyn SmoothSplit<F>> {
        None
    }
}

/// Boxed catalog model.
pub type DynPotential<F> = Box<dyn Potential<F>>;

pub fn eval_u<F: Scalar>(model: &dyn Potential<F>, x: &[F]) -> Result<F> {
    check_dim(model.dim(), x.len())?;
    Ok(model.value(x))
}

pub fn subgrad_min_norm<F: Scalar>(model: &dyn Potential<F>, x: &[F]) -> Result<Vec<F>> {
    check_dim(model.dim(), x.len())?;
    let mut out = vec![F::zero(); x.len()];
    model.subgradient_into(x, &mut out);
    Ok(out)
}

pub(crate) fn h0_norm<F: Scalar>(model: &dyn Potential<F>) -> F {
    let zero = vec![F::zero(); model.dim()];
    let mut h = vec![F::zero(); model.dim()];
    model.subgradient_into(&zero, &mut h);
    norm(&h)
}

/// Declarative model description, the input of [`make_model`].
#[derive(Debug, Clone)]
pub enum ModelSpec<F: Scalar> {
    /// `u(x) = c |x|^2 / 2`.
    Quadratic { dim: usize, curvature: F },
    /// `u(x) = alpha |x|_1`.
    L1 { dim: usize, scale: F },
    /// `u(x) = |x|_1 + |x|^2 / 2`.
    AbsQuadratic { dim: usize },
    /// Gaussian mixture likelihood with an isotropic Laplace prior.
    MogLaplace(MogLaplaceSpec<F>),
    /// The one-dimensional strongly convex + smooth + monotone-jump composite.
    OneDComposite,
    /// `u(x) = max(|x|, |x|^2) - |x|^2 / 2`.
    MaxQuadratic { dim: usize },
    /// Residual sum of squares plus the separable SCAD penalty.
    ScadRegression {
        data: RegressionData<F>,
        scad: ScadSpec<F>,
        penalty_weight: F,
    },
    /// Residual sum of squares plus `gamma |beta|_1`.
    LassoRegression {
        data: RegressionData<F>,
        gamma: F,
        penalty_weight: F,
    },
}

impl<F: Scalar> ModelSpec<F> {
    pub fn tag(&self) -> &'static str {
        match self {
            ModelSpec::Quadratic { .. } => "quadratic",
            ModelSpec::L1 { .. } => "l1",
            ModelSpec::AbsQuadratic { .. } => "abs_quadratic",
            ModelSpec::MogLaplace(_) => "mog_laplace",
            ModelSpec::OneDComposite => "one_d_composite",
            ModelSpec::MaxQuadratic { .. } => "max_quadratic",
            ModelSpec::ScadRegression { .. } => "scad_regression",
            ModelSpec::LassoRegression { .. } => "lasso_regression",
        }
    }
}

/// Builds a catalog model, validating its parameters.
pub fn make_model<F: Scalar>(spec: ModelSpec<F>) -> Result<DynPotential<F>> {
    Ok(match spec {
        ModelSpec::Quadratic { dim, curvature } => Box::new(Quadratic::new(dim, curvature)?),
        ModelSpec::L1 { dim, scale } => Box::new(L1Norm::new(dim, scale)?),
        ModelSpec::AbsQuadratic { dim } => Box::new(AbsQuadratic::new(dim)?),
        ModelSpec::MogLaplace(s) => Box::new(MogLaplace::new(s)?),
        ModelSpec::OneDComposite => Box::new(OneDComposite),
        ModelSpec::MaxQuadratic { dim } => Box::new(MaxQuadratic::new(dim)?),
        ModelSpec::ScadRegression {
            data,
            scad,
            penalty_weight,
        } => Box::new(build_regression_potential(
            data,
            Penalty::Scad(scad),
            penalty_weight,
        )?),
        ModelSpec::LassoRegression {
            data,
            gamma,
            penalty_weight,
        } => Box::new(build_regression_potential(
            data,
            Penalty::Lasso { gamma },
            penalty_weight,
        )?),
    })
}

pub(crate) fn check_positive_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(crate::error::invalid("dim", "must be positive"))
    } else {
        Ok(())
    }
}
