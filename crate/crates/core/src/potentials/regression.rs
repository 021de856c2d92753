use nalgebra::{DMatrix, DVector};

use super::{Potential, RegularityParams, ScadSpec, KINK_TOL};
use crate::error::{check_dim, invalid, Error, Result};
use crate::scalar::{sign0, Scalar};

/// Linear regression data `y = X beta + noise` with the covariance of the design rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData<F> {
    n: usize,
    d: usize,
    /// Row-major `n x d` design.
    x: Vec<F>,
    y: Vec<F>,
    beta_star: Option<Vec<F>>,
    /// Row-major `d x d` covariance.
    sigma: Vec<F>,
}

fn to_matrix<F: Scalar>(rows: usize, cols: usize, v: &[F]) -> DMatrix<f64> {
    DMatrix::from_row_iterator(rows, cols, v.iter().map(|x| x.as_f64()))
}

impl<F: Scalar> RegressionData<F> {
    pub fn new(
        n: usize,
        d: usize,
        x: Vec<F>,
        y: Vec<F>,
        beta_star: Option<Vec<F>>,
        sigma: Vec<F>,
    ) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(invalid("X", "design must have at least one row and column"));
        }
        check_dim(n * d, x.len())?;
        check_dim(n, y.len())?;
        if let Some(b) = &beta_star {
            check_dim(d, b.len())?;
        }
        check_dim(d * d, sigma.len())?;
        if !x.iter().chain(&y).chain(&sigma).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("regression data"));
        }
        let s = to_matrix(d, d, &sigma);
        let scale = s.amax().max(1.0);
        if (&s - s.transpose()).amax() > 1e-10 * scale {
            return Err(invalid("sigma", "must be symmetric"));
        }
        if s.cholesky().is_none() {
            return Err(invalid("sigma", "must be positive definite"));
        }
        Ok(Self {
            n,
            d,
            x,
            y,
            beta_star,
            sigma,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn x(&self) -> &[F] {
        &self.x
    }
    pub fn y(&self) -> &[F] {
        &self.y
    }
    pub fn beta_star(&self) -> Option<&[F]> {
        self.beta_star.as_deref()
    }
    pub fn sigma(&self) -> &[F] {
        &self.sigma
    }

    /// Keeps only the listed rows, e.g. a cross-validation training fold.
    pub fn subset_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut x = Vec::with_capacity(rows.len() * self.d);
        let mut y = Vec::with_capacity(rows.len());
        for &r in rows {
            if r >= self.n {
                return Err(invalid("rows", format!("row {r} out of range")));
            }
            x.extend_from_slice(&self.x[r * self.d..(r + 1) * self.d]);
            y.push(self.y[r]);
        }
        Self::new(rows.len(), self.d, x, y, self.beta_star.clone(), self.sigma.clone())
    }

    /// Sum of squared residuals `|y - X beta|^2`.
    pub fn rss(&self, beta: &[F]) -> F {
        self.x
            .chunks_exact(self.d)
            .zip(&self.y)
            .map(|(row, &yi)| {
                let r = yi - crate::scalar::dot(row, beta);
                r * r
            })
            .sum()
    }

    /// Least squares fit restricted to the columns in `support` (all columns when `None`).
    /// Coefficients outside the support are zero.
    pub fn least_squares(&self, support: Option<&[usize]>) -> Result<Vec<F>> {
        let cols: Vec<usize> = support.map_or_else(|| (0..self.d).collect(), <[usize]>::to_vec);
        if cols.iter().any(|&c| c >= self.d) {
            return Err(invalid("support", "column index out of range"));
        }
        let xs = DMatrix::from_fn(self.n, cols.len(), |i, j| self.x[i * self.d + cols[j]].as_f64());
        let y = DVector::from_iterator(self.n, self.y.iter().map(|v| v.as_f64()));
        let gram = xs.transpose() * &xs;
        let rhs = xs.transpose() * y;
        let sol = gram
            .cholesky()
            .ok_or_else(|| Error::Numerical("design restricted to support is rank deficient".into()))?
            .solve(&rhs);
        let mut beta = vec![F::zero(); self.d];
        for (k, &c) in cols.iter().enumerate() {
            beta[c] = F::lit(sol[k]);
        }
        Ok(beta)
    }

    /// Model error `(b - beta*)' Sigma (b - beta*)`.
    pub fn model_error(&self, beta: &[F]) -> Result<F> {
        let star = self
            .beta_star
            .as_ref()
            .ok_or_else(|| invalid("beta_star", "true coefficients are required"))?;
        check_dim(self.d, beta.len())?;
        let e: Vec<F> = beta.iter().zip(star).map(|(&b, &s)| b - s).collect();
        let mut me = F::zero();
        for i in 0..self.d {
            for j in 0..self.d {
                me += e[i] * self.sigma[i * self.d + j] * e[j];
            }
        }
        Ok(me)
    }
}

/// Separable penalty attached to the residual sum of squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty<F> {
    Scad(ScadSpec<F>),
    Lasso { gamma: F },
}

impl<F: Scalar> Penalty<F> {
    pub fn value(&self, b: F) -> F {
        match self {
            Penalty::Scad(s) => s.penalty(b),
            Penalty::Lasso { gamma } => *gamma * b.abs(),
        }
    }

    /// Minimum-norm subgradient of the scalar penalty.
    pub fn subgradient(&self, b: F) -> F {
        match self {
            Penalty::Scad(s) => s.subgradient(b),
            Penalty::Lasso { gamma } => {
                if b.abs() <= F::lit(KINK_TOL) {
                    F::zero()
                } else {
                    *gamma * sign0(b)
                }
            }
        }
    }

    fn level(&self) -> F {
        match self {
            Penalty::Scad(s) => s.gamma(),
            Penalty::Lasso { gamma } => *gamma,
        }
    }
}

/// `U(beta) = |y - X beta|^2 + w sum_i p(beta_i)`.
#[derive(Debug, Clone)]
pub struct RegressionPotential<F> {
    d: usize,
    gram: Vec<F>,
    xty: Vec<F>,
    yty: F,
    penalty: Penalty<F>,
    weight: F,
    regularity: RegularityParams<F>,
}

/// Builds the penalized least-squares potential. `penalty_weight` multiplies the
/// penalty sum; 1 gives the plain `RSS + P` objective.
pub fn build_regression_potential<F: Scalar>(
    data: RegressionData<F>,
    penalty: Penalty<F>,
    penalty_weight: F,
) -> Result<RegressionPotential<F>> {
    if !(penalty_weight >= F::zero() && penalty_weight.is_finite()) {
        return Err(invalid("penalty_weight", "must be nonnegative and finite"));
    }
    if let Penalty::Lasso { gamma } = penalty {
        if !(gamma >= F::zero() && gamma.is_finite()) {
            return Err(invalid("gamma", "must be nonnegative and finite"));
        }
    }
    let (n, d) = (data.n, data.d);
    let x = to_matrix(n, d, &data.x);
    let y = DVector::from_iterator(n, data.y.iter().map(|v| v.as_f64()));
    let gram = x.transpose() * &x;
    let xty = x.transpose() * &y;
    let eig = gram.clone().symmetric_eigen().eigenvalues;
    let lmin = eig.min().max(0.0);
    let lmax = eig.max().max(0.0);

    let w = penalty_weight.as_f64();
    let level = penalty.level().as_f64();
    let sqrt_d = (d as f64).sqrt();
    // |p'| <= gamma per coordinate for both penalties
    let m = 2.0 * xty.norm() + w * level * sqrt_d;
    let (k, mu, r) = match penalty {
        Penalty::Lasso { .. } => (0.0, (lmin > 0.0).then_some(2.0 * lmin), 1.0),
        // <dh, dx> >= 2 lmin |dx|^2 - 2 w gamma sqrt(d) |dx| >= lmin |dx|^2 beyond R
        Penalty::Scad(s) => (
            (w * s.semi_convexity().as_f64() - 2.0 * lmin).max(0.0),
            (lmin > 0.0).then_some(lmin),
            if lmin > 0.0 { 2.0 * w * level * sqrt_d / lmin } else { 0.0 },
        ),
    };
    let regularity = RegularityParams {
        m: Some(F::lit(m)),
        l: Some(F::lit(2.0 * lmax)),
        k: Some(F::lit(k)),
        mu: mu.map(F::lit),
        r: mu.map(|_| F::lit(r)),
        h0_norm: F::lit(2.0 * xty.norm()),
    };
    Ok(RegressionPotential {
        d,
        gram: gram.transpose().iter().map(|&v| F::lit(v)).collect(),
        xty: xty.iter().map(|&v| F::lit(v)).collect(),
        yty: F::lit(y.norm_squared()),
        penalty,
        weight: penalty_weight,
        regularity,
    })
}

impl<F: Scalar> RegressionPotential<F> {
    pub fn penalty(&self) -> Penalty<F> {
        self.penalty
    }
    pub fn penalty_weight(&self) -> F {
        self.weight
    }

    fn gram_times(&self, b: &[F], i: usize) -> F {
        crate::scalar::dot(&self.gram[i * self.d..(i + 1) * self.d], b)
    }
}

impl<F: Scalar> Potential<F> for RegressionPotential<F> {
    fn name(&self) -> &str {
        match self.penalty {
            Penalty::Scad(_) => "scad_regression",
            Penalty::Lasso { .. } => "lasso_regression",
        }
    }
    fn dim(&self) -> usize {
        self.d
    }
    fn value(&self, b: &[F]) -> F {
        let mut quad = F::zero();
        for i in 0..self.d {
            quad += b[i] * (self.gram_times(b, i) - F::lit(2.0) * self.xty[i]);
        }
        let rss = (quad + self.yty).max(F::zero());
        rss + self.weight * b.iter().map(|&v| self.penalty.value(v)).sum::<F>()
    }
    fn subgradient_into(&self, b: &[F], out: &mut [F]) {
        for i in 0..self.d {
            out[i] = F::lit(2.0) * (self.gram_times(b, i) - self.xty[i])
                + self.weight * self.penalty.subgradient(b[i]);
        }
    }
    fn regularity(&self) -> RegularityParams<F> {
        self.regularity
    }
    fn kink_distance(&self, b: &[F]) -> F {
        b.iter().fold(F::infinity(), |m, v| m.min(v.abs()))
    }
    fn kink_point(&self, b: &[F], selector: u64) -> Option<Vec<F>> {
        let mut p = b.to_vec();
        p[(selector % self.d as u64) as usize] = F::zero();
        Some(p)
    }
}
