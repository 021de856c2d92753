use crate::error::{check_dim, invalid, Error, Result};
use crate::scalar::{all_finite, Scalar};

fn check_step_inputs<F: Scalar>(lambda: F, beta: F) -> Result<()> {
    if !(lambda > F::zero() && lambda.is_finite()) {
        return Err(invalid("lambda", format!("must be positive, got {lambda}")));
    }
    if !(beta > F::zero() && beta.is_finite()) {
        return Err(invalid("beta", format!("must be positive, got {beta}")));
    }
    Ok(())
}

/// One SG-ULA update `theta - lambda h + sqrt(2 lambda / beta) xi`.
pub fn sgula_step<F: Scalar>(theta: &[F], h_val: &[F], lambda: F, beta: F, xi: &[F]) -> Result<Vec<F>> {
    check_step_inputs(lambda, beta)?;
    check_dim(theta.len(), h_val.len())?;
    check_dim(theta.len(), xi.len())?;
    if !(all_finite(theta) && all_finite(h_val) && all_finite(xi)) {
        return Err(Error::NonFinite("sgula_step input"));
    }
    let mut out = theta.to_vec();
    sgula_update(&mut out, h_val, lambda, (F::lit(2.0) * lambda / beta).sqrt(), xi);
    Ok(out)
}

/// One MYULA update
/// `theta - lambda grad_f - (lambda / gamma)(theta - prox_g(theta, gamma)) + sqrt(2 lambda / beta) xi`.
pub fn myula_step<F: Scalar>(
    theta: &[F],
    grad_f_val: &[F],
    prox_g: impl Fn(&[F], F) -> Vec<F>,
    lambda: F,
    gamma: F,
    beta: F,
    xi: &[F],
) -> Result<Vec<F>> {
    check_step_inputs(lambda, beta)?;
    if !(gamma > F::zero() && gamma.is_finite()) {
        return Err(invalid("gamma", format!("must be positive, got {gamma}")));
    }
    check_dim(theta.len(), grad_f_val.len())?;
    check_dim(theta.len(), xi.len())?;
    if !(all_finite(theta) && all_finite(grad_f_val) && all_finite(xi)) {
        return Err(Error::NonFinite("myula_step input"));
    }
    let prox = prox_g(theta, gamma);
    check_dim(theta.len(), prox.len())?;
    let mut drift = grad_f_val.to_vec();
    myula_drift(&mut drift, theta, &prox, gamma);
    let mut out = theta.to_vec();
    sgula_update(&mut out, &drift, lambda, (F::lit(2.0) * lambda / beta).sqrt(), xi);
    Ok(out)
}

/// `theta <- theta - lambda h + noise_scale xi`.
#[inline]
pub(crate) fn sgula_update<F: Scalar>(theta: &mut [F], h: &[F], lambda: F, noise_scale: F, xi: &[F]) {
    for ((t, &g), &z) in theta.iter_mut().zip(h).zip(xi) {
        *t = *t - lambda * g + noise_scale * z;
    }
}

/// `grad_f <- grad_f + (theta - prox) / gamma`, the MYULA drift.
#[inline]
pub(crate) fn myula_drift<F: Scalar>(grad_f: &mut [F], theta: &[F], prox: &[F], gamma: F) {
    for ((g, &t), &p) in grad_f.iter_mut().zip(theta).zip(prox) {
        *g += (t - p) / gamma;
    }
}
