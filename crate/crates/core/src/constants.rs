//! Closed-form constants of the non-asymptotic SG-ULA error bounds, the resulting
//! Wasserstein bounds, iteration budgets, and the excess-risk bound.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::potentials::{Potential, RegularityParams};
use crate::scalar::{dot, Scalar};

/// `lambda_0 = min(mu / (2 L^2), 1)`, the largest stepsize covered by the bounds.
pub fn lambda_max<F: Scalar>(mu: F, l: F) -> Result<F> {
    if !(mu > F::zero() && mu.is_finite()) {
        return Err(invalid("mu", format!("must be positive, got {mu}")));
    }
    if !(l > F::zero() && l.is_finite()) {
        return Err(invalid("L", format!("must be positive, got {l}")));
    }
    Ok((mu / (F::lit(2.0) * l * l)).min(F::one()))
}

/// Dissipativity constant `b = max(|h(0)|/(2 mu), m R + (L + mu/2) R^2)`.
pub fn dissipativity_b<F: Scalar>(m: F, l: F, mu: F, r: F, h0_norm: F) -> Result<F> {
    if !(mu > F::zero()) {
        return Err(invalid("mu", format!("must be positive, got {mu}")));
    }
    for (name, v) in [("m", m), ("L", l), ("R", r), ("h0_norm", h0_norm)] {
        if !(v >= F::zero() && v.is_finite()) {
            return Err(invalid(name, format!("must be nonnegative, got {v}")));
        }
    }
    let two = F::lit(2.0);
    Ok((h0_norm / (two * mu)).max(m * r + (l + mu / two) * r * r))
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `ln S_d` with `S_d = 2 pi^{d/2} / Gamma(d/2)`, the surface area of the unit sphere in `R^d`.
pub fn ln_sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    std::f64::consts::LN_2 + h * std::f64::consts::PI.ln() - ln_gamma(h)
}

/// Inputs of the bound constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams<F> {
    pub m: F,
    pub l: F,
    pub k: F,
    pub mu: F,
    pub r: F,
    pub h0_norm: F,
    pub beta: F,
    pub d: usize,
    /// `E|theta_0|^2`.
    pub e_theta0_sq: F,
    pub lambda: F,
    /// Free parameter in `(0, sqrt(beta/8) mu)`; `None` selects the midpoint.
    pub epsilon_w2: Option<F>,
}

impl<F: Scalar> ProblemParams<F> {
    /// Builds parameters from fully declared regularity constants.
    pub fn from_regularity(reg: &RegularityParams<F>, beta: F, d: usize, e_theta0_sq: F, lambda: F) -> Result<Self> {
        let need = |v: Option<F>, name: &'static str| v.ok_or_else(|| invalid(name, "regularity constant not declared"));
        Ok(Self {
            m: need(reg.m, "m")?,
            l: need(reg.l, "L")?,
            k: need(reg.k, "K")?,
            mu: need(reg.mu, "mu")?,
            r: need(reg.r, "R")?,
            h0_norm: reg.h0_norm,
            beta,
            d,
            e_theta0_sq,
            lambda,
            epsilon_w2: None,
        })
    }

    pub fn with_lambda(mut self, lambda: F) -> Self {
        self.lambda = lambda;
        self
    }

    /// Upper end `sqrt(beta/8) mu` of the admissible interval for `epsilon_w2`.
    pub fn epsilon_upper(&self) -> F {
        (self.beta / F::lit(8.0)).sqrt() * self.mu
    }

    pub fn epsilon(&self) -> F {
        self.epsilon_w2.unwrap_or_else(|| F::lit(0.5) * self.epsilon_upper())
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("m", self.m),
            ("K", self.k),
            ("R", self.r),
            ("h0_norm", self.h0_norm),
            ("e_theta0_sq", self.e_theta0_sq),
        ] {
            if !(v >= F::zero() && v.is_finite()) {
                return Err(invalid(name, format!("must be nonnegative and finite, got {v}")));
            }
        }
        for (name, v) in [("mu", self.mu), ("L", self.l), ("beta", self.beta), ("lambda", self.lambda)] {
            if !(v > F::zero() && v.is_finite()) {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        if self.d == 0 {
            return Err(invalid("d", "must be positive"));
        }
        let l0 = lambda_max(self.mu, self.l)?;
        if self.lambda >= l0 {
            return Err(invalid("lambda", format!("{} is not below lambda_0 = {}", self.lambda, l0)));
        }
        let eps = self.epsilon();
        if !(eps > F::zero() && eps < self.epsilon_upper()) {
            return Err(invalid(
                "epsilon_w2",
                format!("{} outside (0, {})", eps, self.epsilon_upper()),
            ));
        }
        Ok(())
    }
}

/// All bound constants for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsReport<F> {
    pub b: F,
    pub lambda0: F,
    pub c1: F,
    pub c2: F,
    pub c3: F,
    pub c4: F,
    pub c5: F,
    pub c6: F,
    pub c7: F,
    pub c8: F,
    pub c9: F,
    pub c_w1: F,
    pub c_r1: F,
    pub c0_prime: F,
    pub c_w2: F,
    pub c_r2: F,
    pub c0_doubleprime: F,
    pub c_w2_star: F,
    pub c_r3: F,
    pub c_t1: F,
    pub c_t2: F,
    pub c_t3: F,
    pub c_script_t1: F,
    pub m_cap: F,
    pub s_d: F,
    pub epsilon_w2: F,
}

impl<F: Scalar> ConstantsReport<F> {
    /// `(label, value, growth in d)` for every constant.
    pub fn entries(&self) -> Vec<(&'static str, F, &'static str)> {
        vec![
            ("b", self.b, "O(1)"),
            ("lambda0", self.lambda0, "O(1)"),
            ("C1", self.c1, "O(d)"),
            ("C2", self.c2, "O(d)"),
            ("C3", self.c3, "O(d)"),
            ("C4", self.c4, "O(d)"),
            ("C5", self.c5, "O(d)"),
            ("C6", self.c6, "O(d)"),
            ("C7", self.c7, "O(d)"),
            ("C8", self.c8, "O(d)"),
            ("C9", self.c9, "O(d)"),
            ("C_W1", self.c_w1, "O(1)"),
            ("C_r1", self.c_r1, "O(1)"),
            ("C0_prime", self.c0_prime, "O(1)"),
            ("C_W2", self.c_w2, "O(1)"),
            ("C_r2", self.c_r2, "O(1)"),
            ("C0_doubleprime", self.c0_doubleprime, "O(1)"),
            ("C_W2_star", self.c_w2_star, "O(1/d)"),
            ("C_r3", self.c_r3, "O(1)"),
            ("C_T1", self.c_t1, "O(d)"),
            ("C_T2", self.c_t2, "O(d)"),
            ("C_T3", self.c_t3, "O(d)"),
            ("C_script_T1", self.c_script_t1, "O(d^1/2)"),
            ("M", self.m_cap, "O(1)"),
            ("S_d", self.s_d, "-"),
            ("epsilon_w2", self.epsilon_w2, "-"),
        ]
    }
}

/// The two branches of `C0'`, split at `beta K R^2 = 8` (the first branch wins a tie).
pub fn c0_prime_branches<F: Scalar>(mu: F, k: F, r: F, beta: F) -> (F, F) {
    let two = F::lit(2.0);
    let e = F::E();
    let first = two / (F::lit(3.0) * e) * (F::one() / (r * r)).min(mu * beta / F::lit(8.0));
    let bk = beta * k;
    let second = F::one()
        / (F::lit(8.0) * (two * F::PI()).sqrt() / r / bk.sqrt()
            * (F::one() / bk + F::one() / (beta * mu))
            * (bk * r * r / F::lit(8.0)).exp()
            + F::lit(32.0) / (beta * mu * r).powi(2));
    (first, second)
}

fn c0_doubleprime<F: Scalar>(mu: F, beta: F, eps: F) -> F {
    let two = F::lit(2.0);
    let e2 = F::E() * F::E();
    let gap = (beta / F::lit(8.0)).sqrt() * mu - eps;
    let first = two * e2 / eps * (F::one() + two / eps.sqrt()) * (two / gap).sqrt();
    let second = (two + eps.sqrt()) / (eps * (F::one() - (-two).exp()))
        * (two * F::SQRT_2() * e2 / (eps * gap).sqrt() + F::one() / gap);
    first.max(second)
}

/// Evaluates every bound constant.
pub fn constants_report<F: Scalar>(p: &ProblemParams<F>) -> Result<ConstantsReport<F>> {
    p.validate()?;
    let (m, l, k, mu, r, beta) = (p.m, p.l, p.k, p.mu, p.r, p.beta);
    let one = F::one();
    let two = F::lit(2.0);
    let four = F::lit(4.0);
    let d = F::from_usize_lossy(p.d);
    let dob = d / beta;
    let l2 = l * l;
    let e1 = one + p.e_theta0_sq;

    let b = dissipativity_b(m, l, mu, r, p.h0_norm)?;
    let lambda0 = lambda_max(mu, l)?;
    let c1 = four / mu * (b + dob);
    let c2 = (two * b + two * dob + mu * m * m / l2) / (mu - two * p.lambda * l2);
    let c3 = (two * mu * mu / l2 + two) * c2 + (two * mu / l2) * (mu * m * m / l2 + two * dob);
    let c4 = two * mu * c3 + two * mu * m * m / l2 + four * dob;
    let c5 = c3 + two * (dob + b);
    let (s4, s5, s2) = ((c4 * e1).sqrt(), (c5 * e1).sqrt(), (c2 * e1).sqrt());
    let c6 = F::SQRT_2() * (two * k).exp() * s4.sqrt() * (s4 + two * l * (one + s5 + s2)).sqrt();

    let c_w1 = two * (beta * k * r * r / F::lit(8.0)).exp();
    let (br1, br2) = c0_prime_branches(mu, k, r, beta);
    let c0_prime = if beta * k * r * r <= F::lit(8.0) { br1 } else { br2 };
    let c_r1 = two / beta * c0_prime;

    let eps = p.epsilon();
    let c0pp = c0_doubleprime(mu, beta, eps);
    let c_w2 = two
        * one.max(one / r.sqrt())
        * c0pp
        * (((beta / F::lit(32.0)).sqrt() * (mu + k) + eps / two) * beta * r * r / two).exp()
        * ((two / beta) * (four / eps + two).max(F::lit(8.0) / (F::E() * eps * eps))
            / ((beta / two).sqrt() * r + one))
            .sqrt();
    let c_r2 = two * one.min(one / eps) * (-(F::lit(0.25)) * (beta / two).powi(3).sqrt() * (mu + k) * r * r).exp()
        / c0pp;
    let c_w2_star = (one + beta * (two * k + mu) * (two + two * k / mu).powf(two / d) / (two * d)).sqrt();
    let c_r3 = mu / four;

    let g1 = one - (-c_r1 / two).exp();
    let g2 = one - (-c_r2 / two).exp();
    let g3 = one - (-c_r3 / two).exp();
    let c7 = c6 * c_w1 / g1;
    let c8 = c6.max(c6.sqrt()) * c_w2 / g2;
    let c9 = c6 * c_w2_star / g3;
    let c_t1 = c6 * (one + c_w1 / g1);
    let c_t2 = c6 + c6.max(c6.sqrt()) * c_w2 / g2;
    let c_t3 = c6 * (one + c_w2_star / g3);
    let (_, m_cap, c_script_t1) = risk_constants(p)?;
    let s_d = F::lit(ln_sphere_area(p.d).exp());

    let report = ConstantsReport {
        b,
        lambda0,
        c1,
        c2,
        c3,
        c4,
        c5,
        c6,
        c7,
        c8,
        c9,
        c_w1,
        c_r1,
        c0_prime,
        c_w2,
        c_r2,
        c0_doubleprime: c0pp,
        c_w2_star,
        c_r3,
        c_t1,
        c_t2,
        c_t3,
        c_script_t1,
        m_cap,
        s_d,
        epsilon_w2: eps,
    };
    for (name, v, _) in report.entries() {
        if !v.is_finite() || (v <= F::zero() && name != "b") {
            return Err(Error::Numerical(format!(
                "constant {name} evaluates to {v}; parameters are outside the representable range"
            )));
        }
    }
    Ok(report)
}

/// Which error bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// `W_1` bound with rate `lambda^{1/4}`.
    Thm1W1,
    /// `W_2` bound with rate `lambda^{1/8}`.
    Thm1W2,
    /// Improved `W_2` bound under the strengthened convexity condition, rate `lambda^{1/4}`.
    Thm2W2,
}

impl BoundKind {
    pub const ALL: [BoundKind; 3] = [BoundKind::Thm1W1, BoundKind::Thm1W2, BoundKind::Thm2W2];

    pub fn rate(self) -> f64 {
        match self {
            BoundKind::Thm1W2 => 0.125,
            _ => 0.25,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "thm1_w1" | "w1" => Ok(BoundKind::Thm1W1),
            "thm1_w2" | "w2" => Ok(BoundKind::Thm1W2),
            "thm2_w2" | "w2_improved" => Ok(BoundKind::Thm2W2),
            other => Err(invalid("which", format!("unknown bound `{other}`"))),
        }
    }

    /// `(C_W, C_r, C_T)` of this bound.
    pub fn coefficients<F: Scalar>(self, c: &ConstantsReport<F>) -> (F, F, F) {
        match self {
            BoundKind::Thm1W1 => (c.c_w1, c.c_r1, c.c_t1),
            BoundKind::Thm1W2 => (c.c_w2, c.c_r2, c.c_t2),
            BoundKind::Thm2W2 => (c.c_w2_star, c.c_r3, c.c_t3),
        }
    }
}

/// `C_W exp(-C_r lambda N) delta0 + C_T lambda^r`.
///
/// `n` is a real iteration count: the budgets these bounds produce routinely exceed
/// every integer type.
pub fn theorem_bound<F: Scalar>(p: &ProblemParams<F>, n: f64, which: BoundKind, delta0: F) -> Result<F> {
    if !(delta0 >= F::zero()) {
        return Err(invalid("delta0", "must be nonnegative"));
    }
    if !(n >= 0.0) {
        return Err(invalid("n", "iteration count must be nonnegative"));
    }
    let c = constants_report(p)?;
    let (cw, cr, ct) = which.coefficients(&c);
    let decay = (-cr * p.lambda * F::lit(n)).exp();
    Ok(cw * decay * delta0 + ct * p.lambda.powf(F::lit(which.rate())))
}

/// Stepsize and iteration count sufficient for `theorem_bound <= eps`.
///
/// The stepsize halves the error budget on the discretization term,
/// `C_T lambda^r <= eps/2`, capped at `p.lambda`; the iteration count then brings
/// the initialization term below `eps/2`.
pub fn iterations_for_accuracy<F: Scalar>(
    p: &ProblemParams<F>,
    eps: F,
    which: BoundKind,
    delta0: F,
) -> Result<(F, f64)> {
    if !(eps > F::zero() && eps.is_finite()) {
        return Err(invalid("eps", "must be positive"));
    }
    if !(delta0 >= F::zero()) {
        return Err(invalid("delta0", "must be nonnegative"));
    }
    // C_T grows with lambda, so constants at p.lambda bound those at any smaller stepsize.
    let c = constants_report(p)?;
    let (cw, cr, ct) = which.coefficients(&c);
    let lam = p.lambda.min((eps / (F::lit(2.0) * ct)).powf(F::one() / F::lit(which.rate())));
    if !(lam > F::zero()) || !lam.is_normal() {
        return Err(Error::Numerical(format!("stepsize underflows for eps = {eps}")));
    }
    let ratio = F::lit(2.0) * cw * delta0 / eps;
    let n = if ratio <= F::one() {
        1.0
    } else {
        (ratio.ln() / (cr * lam)).ceil().as_f64().max(1.0)
    };
    if !n.is_finite() {
        return Err(Error::Numerical(format!("iteration count overflows for eps = {eps}")));
    }
    Ok((lam, n))
}

/// Upper bound on `E u(theta_n) - min u` given the `W_2` distance of `theta_n` to the target.
pub fn excess_risk_bound<F: Scalar>(p: &ProblemParams<F>, w2_to_target: F) -> Result<F> {
    if !(w2_to_target >= F::zero()) {
        return Err(invalid("w2_to_target", "must be nonnegative"));
    }
    p.validate()?;
    let (b, m_cap, c_script) = risk_constants(p)?;
    let threshold = (F::lit(4.0) / p.mu).max(F::one() / m_cap);
    if p.beta < threshold {
        return Err(invalid(
            "beta",
            format!("{} is below max(4/mu, 1/M) = {}", p.beta, threshold),
        ));
    }
    Ok(c_script * w2_to_target + temperature_terms(p, b, m_cap))
}

/// `(b, M, C_script_T1)`, the constants entering the excess-risk bound.
fn risk_constants<F: Scalar>(p: &ProblemParams<F>) -> Result<(F, F, F)> {
    let two = F::lit(2.0);
    let b = dissipativity_b(p.m, p.l, p.mu, p.r, p.h0_norm)?;
    let dob = F::from_usize_lossy(p.d) / p.beta;
    let m_cap = p.m + F::lit(1.5) * p.l + p.l * (b / (two * p.mu)).sqrt();
    let c_script = p.m
        + p.l / two * p.e_theta0_sq.sqrt()
        + p.l / two * ((p.mu + two * b + two * dob) / p.mu).sqrt();
    Ok((b, m_cap, c_script))
}

/// The `beta`-dependent terms of the excess-risk bound.
pub fn excess_risk_temperature_terms<F: Scalar>(p: &ProblemParams<F>) -> Result<F> {
    let (b, m_cap, _) = risk_constants(p)?;
    Ok(temperature_terms(p, b, m_cap))
}

fn temperature_terms<F: Scalar>(p: &ProblemParams<F>, b: F, m_cap: F) -> F {
    let beta = p.beta.as_f64();
    let d = p.d as f64;
    let (b, mc, mu) = (b.as_f64(), m_cap.as_f64(), p.mu.as_f64());
    let v = d / (2.0 * beta) * (2.0 * std::f64::consts::E * (b + d / beta) * beta * beta * mc * mc / (mu * d)).ln()
        + d / beta * (beta * mc).ln()
        - (ln_sphere_area(p.d) - d.ln()) / beta
        + 2.0 / beta;
    F::lit(v)
}

/// Largest inverse temperature allowed by the strengthened convexity condition:
///
/// `mu d / (2K + mu) / ((K + mu/4) R*^2 + 2 sup_{|x| <= R*} -<x, h(x)>)` with
/// `R* = R (2 + 2K/mu)^{1/d}`. The supremum is estimated on 64 radial shells times
/// 256 seeded random directions.
pub fn beta_cap_a5<F: Scalar>(mu: F, k: F, r: F, model: &dyn Potential<F>) -> Result<F> {
    if !(mu > F::zero()) {
        return Err(invalid("mu", "must be positive"));
    }
    if !(k >= F::zero() && r >= F::zero()) {
        return Err(invalid("K", "K and R must be nonnegative"));
    }
    let d = model.dim();
    let two = F::lit(2.0);
    let r_star = r * (two + two * k / mu).powf(F::one() / F::from_usize_lossy(d));
    let sup = sup_neg_inner(model, r_star, 64, 256, 0x005e_eda5);
    let denom = (k + mu / F::lit(4.0)) * r_star * r_star + two * sup;
    if !(denom > F::zero()) {
        return Err(invalid(
            "R",
            format!("restriction denominator is {denom}; the cap is undefined"),
        ));
    }
    Ok(mu * F::from_usize_lossy(d) / (two * k + mu) / denom)
}

/// Estimates `sup_{|x| <= radius} -<x, h(x)>` (at least 0, attained at the origin).
pub fn sup_neg_inner<F: Scalar>(
    model: &dyn Potential<F>,
    radius: F,
    shells: usize,
    directions: usize,
    seed: u64,
) -> F {
    let d = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = vec![F::zero(); d];
    let mut x = vec![F::zero(); d];
    let mut best = F::zero();
    for _ in 0..directions {
        let mut u: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n == 0.0 {
            continue;
        }
        u.iter_mut().for_each(|v| *v /= n);
        for s in 1..shells {
            let t = radius * F::lit(s as f64 / (shells - 1) as f64);
            for (xi, ui) in x.iter_mut().zip(&u) {
                *xi = t * F::lit(*ui);
            }
            model.subgradient_into(&x, &mut h);
            best = best.max(-dot(&x, &h));
        }
    }
    best
}
