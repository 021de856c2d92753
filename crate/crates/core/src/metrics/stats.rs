use crate::error::{check_dim, invalid, Error, Result};
use crate::scalar::Scalar;

/// Mean squared Euclidean norm of the points.
pub fn empirical_moment2<F: Scalar>(points: &[Vec<F>]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Empty("empirical_moment2 sample"));
    }
    let total: f64 = points
        .iter()
        .map(|p| p.iter().map(|v| v.as_f64().powi(2)).sum::<f64>())
        .sum();
    Ok(total / points.len() as f64)
}

/// Least-squares fit of `log error = intercept + slope * log lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub lambdas: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn loglog_slope(lambdas: &[f64], errors: &[f64]) -> Result<RateFit> {
    check_dim(lambdas.len(), errors.len())?;
    if lambdas.len() < 3 {
        return Err(invalid("lambdas", "need at least three points"));
    }
    if lambdas.iter().chain(errors).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(invalid("errors", "stepsizes and errors must be positive and finite"));
    }
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("lambdas", "must be distinct"));
    }
    let x: Vec<f64> = lambdas.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit {
        lambdas: lambdas.to_vec(),
        errors: errors.to_vec(),
        slope,
        intercept,
        r_squared,
    })
}

/// Model error `(b - b*)' Sigma (b - b*)` and its ratio to the model error of the OLS fit.
pub fn relative_model_error<F: Scalar>(
    beta_hat: &[F],
    beta_star: &[F],
    sigma: &[F],
    beta_ols: &[F],
) -> Result<(f64, f64)> {
    let d = beta_star.len();
    check_dim(d, beta_hat.len())?;
    check_dim(d, beta_ols.len())?;
    check_dim(d * d, sigma.len())?;
    let me = |b: &[F]| -> f64 {
        let e: Vec<f64> = b.iter().zip(beta_star).map(|(x, s)| x.as_f64() - s.as_f64()).collect();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += e[i] * sigma[i * d + j].as_f64() * e[j];
            }
        }
        acc
    };
    let me_hat = me(beta_hat);
    let me_ols = me(beta_ols);
    if me_ols == 0.0 {
        if me_hat == 0.0 {
            return Ok((0.0, 1.0));
        }
        return Err(Error::Numerical("OLS model error is zero".into()));
    }
    Ok((me_hat, me_hat / me_ols))
}

/// Median of a non-empty slice (mean of the two central values for even lengths).
pub fn median(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::Empty("median input"));
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Ok(if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_examples() {
        assert_eq!(empirical_moment2(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(), 1.0);
        assert_eq!(empirical_moment2(&vec![vec![0.0_f64; 3]; 4]).unwrap(), 0.0);
        assert!(empirical_moment2::<f64>(&[]).is_err());
    }

    #[test]
    fn exact_power_laws() {
        let l = [0.2, 0.1, 0.05, 0.025];
        for (c, r) in [(3.0, 0.5), (0.7, 0.25), (2.0, 0.0)] {
            let e: Vec<f64> = l.iter().map(|x: &f64| c * x.powf(r)).collect();
            let fit = loglog_slope(&l, &e).unwrap();
            assert!((fit.slope - r).abs() < 1e-12);
            assert!((fit.r_squared - 1.0).abs() < 1e-12);
            assert!((fit.intercept - c.ln()).abs() < 1e-12);
        }
        assert!(loglog_slope(&[0.1, 0.1, 0.2], &[1.0, 1.0, 1.0]).is_err());
        assert!(loglog_slope(&[0.1, 0.2], &[1.0, 1.0]).is_err());
        assert!(loglog_slope(&[0.1, 0.2, 0.3], &[1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn model_error_examples() {
        let id = [1.0, 0.0, 0.0, 1.0];
        let star = [1.0, 2.0];
        let (me, _) = relative_model_error(&star, &star, &id, &[2.0, 2.0]).unwrap();
        assert_eq!(me, 0.0);
        let (_, rme) = relative_model_error(&[1.5, 2.5], &star, &id, &[1.5, 2.5]).unwrap();
        assert_eq!(rme, 1.0);
        let (me, _) = relative_model_error(&[2.0, 3.0], &star, &id, &[0.0, 0.0]).unwrap();
        assert_eq!(me, 2.0);
        assert!(relative_model_error(&[2.0, 3.0], &star, &id, &star).is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]).unwrap(), 2.5);
    }
}
