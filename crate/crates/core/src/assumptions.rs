//! Randomized checks of the growth, semi-convexity, convexity-at-infinity and
//! dissipativity inequalities on a potential's subgradient.
//!
//! Every check is a falsification test: a pass certifies the inequality only on the
//! probe set drawn from a [`ProbePlan`]. Slack values are compared after adding an
//! allowance of a few ulps of the magnitudes involved, so exact equalities (such as
//! `|h(x)| = L|x|` for a quadratic) are not reported as violations due to rounding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::potentials::{Potential, RegularityParams};
use crate::scalar::Scalar;

/// Rounding allowance, relative to the magnitude of the terms in each inequality.
const ROUND_TOL: f64 = 64.0 * f64::EPSILON;

/// Kink-adjacent probes are placed within this distance of a kink manifold.
const KINK_OFFSET: f64 = 1e-6;
/// Enlargements of the estimated radius before giving up on self-consistency.
const RADIUS_ROUNDS: usize = 20;

/// Where and how many probes to draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbePlan {
    pub n_points: usize,
    pub n_pairs: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub seed: u64,
    /// Fraction of probes drawn heavy-tailed around the box centre instead of uniformly in it.
    pub tail_fraction: f64,
    /// Fraction of probes moved next to a kink of the model (when it reports any).
    pub kink_fraction: f64,
}

impl ProbePlan {
    /// The cube `[-half_width, half_width]^d`, half the probes heavy-tailed and 10% kink-adjacent.
    pub fn cube(d: usize, half_width: f64, n_points: usize, n_pairs: usize, seed: u64) -> Self {
        Self {
            n_points,
            n_pairs,
            lo: vec![-half_width; d],
            hi: vec![half_width; d],
            seed,
            tail_fraction: 0.5,
            kink_fraction: 0.1,
        }
    }

    pub fn with_tail_fraction(mut self, f: f64) -> Self {
        self.tail_fraction = f;
        self
    }

    pub fn with_kink_fraction(mut self, f: f64) -> Self {
        self.kink_fraction = f;
        self
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.n_points == 0 || self.n_pairs == 0 {
            return Err(invalid("plan", "n_points and n_pairs must be at least 1"));
        }
        if self.lo.len() != d || self.hi.len() != d {
            return Err(invalid("plan", format!("box has dimension {}, model has {d}", self.lo.len())));
        }
        if self.lo.iter().zip(&self.hi).any(|(l, h)| !(l < h && l.is_finite() && h.is_finite())) {
            return Err(invalid("plan", "box is degenerate"));
        }
        if !(0.0..=1.0).contains(&self.kink_fraction) || !(0.0..=1.0).contains(&self.tail_fraction) {
            return Err(invalid("plan", "kink_fraction and tail_fraction must lie in [0, 1]"));
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (h - l))
            .fold(0.0, f64::max)
    }

    fn rng(&self, stream: u64, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng.set_word_pos(index as u128 * 64);
        rng
    }

    /// One probe: uniform in the box, or with probability `tail_fraction` heavy-tailed
    /// around its centre with radius `scale * exp(U(-4, 4))`.
    fn point<F: Scalar>(&self, model: &dyn Potential<F>, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let d = self.dim();
        let mut x: Vec<f64> = if rng.random::<f64>() >= self.tail_fraction {
            self.lo.iter().zip(&self.hi).map(|(l, h)| rng.random_range(*l..*h)).collect()
        } else {
            let u = unit(d, rng);
            let r = self.scale() * rng.random_range(-4.0f64..4.0).exp();
            self.lo
                .iter()
                .zip(&self.hi)
                .zip(&u)
                .map(|((l, h), ui)| 0.5 * (l + h) + r * ui)
                .collect()
        };
        if self.kink_fraction > 0.0 && rng.random::<f64>() < self.kink_fraction {
            let xf = to_f(&x);
            if let Some(k) = model.kink_point(&xf, rng.random()) {
                x = to_f64(&k);
                // half exactly on the manifold, half just off it
                if rng.random::<bool>() {
                    let u = unit(d, rng);
                    let t = KINK_OFFSET * rng.random::<f64>();
                    x.iter_mut().zip(&u).for_each(|(xi, ui)| *xi += t * ui);
                }
            }
        }
        x
    }

    /// A partner for `x` at a mix of distances: small, box-scale and heavy-tailed.
    fn partner<F: Scalar>(&self, model: &dyn Potential<F>, rng: &mut ChaCha8Rng, x: &[f64], j: usize) -> Vec<f64> {
        let d = x.len();
        match j % 3 {
            0 => self.point(model, rng),
            1 => {
                let u = unit(d, rng);
                let t = self.scale() * 10f64.powf(rng.random_range(-7.0..0.0));
                x.iter().zip(&u).map(|(a, b)| a + t * b).collect()
            }
            _ => {
                let u = unit(d, rng);
                let t = self.scale() * rng.random_range(-3.0f64..3.0).exp();
                x.iter().zip(&u).map(|(a, b)| a + t * b).collect()
            }
        }
    }
}

/// Outcome of one check. `margin` is the smallest slack found (after the rounding
/// allowance); `witness` holds the probe(s) attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    pub margin: f64,
    pub witness: Vec<Vec<f64>>,
    pub probes: usize,
    pub note: String,
}

impl CheckReport {
    fn from_worst(name: &str, worst: Option<(f64, Vec<Vec<f64>>)>, probes: usize, note: String) -> Self {
        let (margin, witness) = worst.unwrap_or((f64::INFINITY, Vec::new()));
        Self {
            name: name.to_string(),
            pass: margin >= 0.0,
            margin,
            witness,
            probes,
            note,
        }
    }
}

/// Which convexity-at-infinity inequality to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfinityVariant {
    /// Pairs with `|x - y| >= R`.
    Pairwise,
    /// Pairs with `|x| >= R` and arbitrary `y`.
    Anchored,
}

fn unit(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn to_f<F: Scalar>(x: &[f64]) -> Vec<F> {
    x.iter().map(|&v| F::lit(v)).collect()
}

fn to_f64<F: Scalar>(x: &[F]) -> Vec<f64> {
    x.iter().map(|v| v.as_f64()).collect()
}

fn h_at<F: Scalar>(model: &dyn Potential<F>, x: &[f64]) -> Vec<f64> {
    let xf = to_f::<F>(x);
    let mut h = vec![F::zero(); x.len()];
    model.subgradient_into(&xf, &mut h);
    to_f64(&h)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn nrm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Rounding allowance for an inequality whose terms have the given magnitudes.
fn allowance(terms: &[f64]) -> f64 {
    ROUND_TOL * terms.iter().map(|t| t.abs()).sum::<f64>()
}

/// Minimum over items of `eval`, ties broken by index, so the result does not depend
/// on the rayon schedule.
fn worst_of(
    n: usize,
    eval: impl Fn(usize) -> Option<(f64, Vec<Vec<f64>>)> + Sync,
) -> (Option<(f64, Vec<Vec<f64>>)>, usize) {
    let found: Vec<(usize, f64, Vec<Vec<f64>>)> = (0..n)
        .into_par_iter()
        .filter_map(|i| eval(i).map(|(m, w)| (i, m, w)))
        .collect();
    let count = found.len();
    let worst = found
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(_, m, w)| (m, w));
    (worst, count)
}

fn pair<F: Scalar>(plan: &ProbePlan, model: &dyn Potential<F>, j: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = plan.rng(1, j);
    let x = plan.point(model, &mut rng);
    let y = plan.partner(model, &mut rng, &x, j);
    (x, y)
}

const FALSIFICATION_NOTE: &str = "randomized probe test; a pass certifies only the probe set";

/// `|h(x)| <= m + L|x|` on `plan.n_points` probes.
pub fn check_linear_growth<F: Scalar>(model: &dyn Potential<F>, m: f64, l: f64, plan: &ProbePlan) -> Result<CheckReport> {
    if !(m >= 0.0 && l >= 0.0) {
        return Err(invalid("m, L", "must be nonnegative"));
    }
    plan.validate(model.dim())?;
    let (worst, n) = worst_of(plan.n_points, |i| {
        let mut rng = plan.rng(0, i);
        let x = plan.point(model, &mut rng);
        let hn = nrm(&h_at(model, &x));
        let bound = m + l * nrm(&x);
        let slack = bound - hn + allowance(&[bound, hn]);
        Some((slack, vec![x]))
    });
    Ok(CheckReport::from_worst("linear_growth", worst, n, FALSIFICATION_NOTE.into()))
}

/// `<h(x) - h(y), x - y> >= -K|x - y|^2` on `plan.n_pairs` pairs.
pub fn check_semi_convexity<F: Scalar>(model: &dyn Potential<F>, k: f64, plan: &ProbePlan) -> Result<CheckReport> {
    if !(k >= 0.0) {
        return Err(invalid("K", "must be nonnegative"));
    }
    plan.validate(model.dim())?;
    let (worst, n) = worst_of(plan.n_pairs, |j| {
        let (x, y) = pair(plan, model, j);
        let dx = sub(&x, &y);
        let dh = sub(&h_at(model, &x), &h_at(model, &y));
        let inner = dot(&dh, &dx);
        let quad = k * dot(&dx, &dx);
        let slack = inner + quad + allowance(&[nrm(&dh) * nrm(&dx), quad]);
        Some((slack, vec![x, y]))
    });
    Ok(CheckReport::from_worst("semi_convexity", worst, n, FALSIFICATION_NOTE.into()))
}

/// `<h(x) - h(y), x - y> >= mu |x - y|^2` for pairs outside the radius `R` in the
/// sense of `variant`. Pairs are pushed out to the required separation (or radius).
pub fn check_convexity_at_infinity<F: Scalar>(
    model: &dyn Potential<F>,
    mu: f64,
    r: f64,
    plan: &ProbePlan,
    variant: InfinityVariant,
) -> Result<CheckReport> {
    if !(mu > 0.0) {
        return Err(invalid("mu", "must be positive"));
    }
    if !(r >= 0.0) {
        return Err(invalid("R", "must be nonnegative"));
    }
    plan.validate(model.dim())?;
    let d = model.dim();
    let (worst, n) = worst_of(plan.n_pairs, |j| {
        let (mut x, mut y) = pair(plan, model, j);
        let mut rng = plan.rng(2, j);
        match variant {
            InfinityVariant::Pairwise => {
                let dx = sub(&y, &x);
                let sep = nrm(&dx);
                if sep < r || sep == 0.0 {
                    let u = if sep > 0.0 { dx.iter().map(|v| v / sep).collect() } else { unit(d, &mut rng) };
                    let t = r + plan.scale() * rng.random_range(-6.0f64..2.0).exp();
                    y = x.iter().zip(&u).map(|(a, b)| a + t * b).collect();
                }
            }
            InfinityVariant::Anchored => {
                let nx = nrm(&x);
                if nx < r {
                    let u = if nx > 0.0 { x.iter().map(|v| v / nx).collect() } else { unit(d, &mut rng) };
                    let t = r + plan.scale() * rng.random_range(-6.0f64..2.0).exp();
                    x = u.iter().map(|v| t * v).collect();
                }
                if x == y {
                    return None;
                }
            }
        }
        let dx = sub(&x, &y);
        let dh = sub(&h_at(model, &x), &h_at(model, &y));
        let inner = dot(&dh, &dx);
        let quad = mu * dot(&dx, &dx);
        let slack = inner - quad + allowance(&[nrm(&dh) * nrm(&dx), quad]);
        Some((slack, vec![x, y]))
    });
    let name = match variant {
        InfinityVariant::Pairwise => "convexity_at_infinity_pairwise",
        InfinityVariant::Anchored => "convexity_at_infinity_anchored",
    };
    Ok(CheckReport::from_worst(name, worst, n, FALSIFICATION_NOTE.into()))
}

/// `<x, h(x)> >= (mu/2)|x|^2 - b` on `plan.n_points` probes.
pub fn check_dissipativity<F: Scalar>(model: &dyn Potential<F>, mu: f64, b: f64, plan: &ProbePlan) -> Result<CheckReport> {
    if !(mu > 0.0 && b > 0.0) {
        return Err(invalid("mu, b", "must be positive"));
    }
    plan.validate(model.dim())?;
    let (worst, n) = worst_of(plan.n_points, |i| {
        let mut rng = plan.rng(0, i);
        let x = plan.point(model, &mut rng);
        let h = h_at(model, &x);
        let inner = dot(&x, &h);
        let quad = 0.5 * mu * dot(&x, &x);
        let slack = inner - quad + b + allowance(&[nrm(&x) * nrm(&h), quad, b]);
        Some((slack, vec![x]))
    });
    Ok(CheckReport::from_worst("dissipativity", worst, n, FALSIFICATION_NOTE.into()))
}

/// Compares the subgradient with central finite differences at probes farther than
/// `100 * step` from any kink. The step is scaled by `max(1, |x|)`; the error is
/// `max_i |fd_i - h_i| / max(1, |h|_inf)` and the margin is `tol` minus the worst error.
pub fn check_finite_difference<F: Scalar>(
    model: &dyn Potential<F>,
    plan: &ProbePlan,
    step: f64,
    tol: f64,
) -> Result<CheckReport> {
    if !(step > 0.0 && tol > 0.0) {
        return Err(invalid("step, tol", "must be positive"));
    }
    plan.validate(model.dim())?;
    let (worst, n) = worst_of(plan.n_points, |i| {
        let mut rng = plan.rng(0, i);
        let x = plan.point(model, &mut rng);
        let hs = step * nrm(&x).max(1.0);
        if model.kink_distance(&to_f::<F>(&x)).as_f64() <= 100.0 * hs {
            return None;
        }
        let h = h_at(model, &x);
        let mut xp = to_f::<F>(&x);
        let mut err = 0.0f64;
        for k in 0..x.len() {
            xp[k] = F::lit(x[k] + hs);
            let up = model.value(&xp).as_f64();
            xp[k] = F::lit(x[k] - hs);
            let dn = model.value(&xp).as_f64();
            xp[k] = F::lit(x[k]);
            err = err.max(((up - dn) / (2.0 * hs) - h[k]).abs());
        }
        let scale = h.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        Some((tol - err / scale, vec![x]))
    });
    Ok(CheckReport::from_worst(
        "finite_difference",
        worst,
        n,
        format!("{FALSIFICATION_NOTE}; {n} differentiable probes"),
    ))
}

/// Radius outside which a potential that switches from `u1` inside a ball to a
/// `mu_outer`-strongly convex `u2` outside is `mu_outer/2`-strongly convex at infinity
/// (pairwise). `h_12_r` bounds both gradients on the inner ball. The paired modulus
/// is `mu_outer / 2`.
pub fn piecewise_radius<F: Scalar>(mu_outer: F, h_12_r: F) -> Result<F> {
    if !(mu_outer > F::zero()) {
        return Err(invalid("mu_outer", format!("must be positive, got {mu_outer}")));
    }
    if !(h_12_r >= F::zero()) {
        return Err(invalid("h_12_R", format!("must be nonnegative, got {h_12_r}")));
    }
    Ok(F::lit(2.0 * std::f64::consts::SQRT_2) / mu_outer * h_12_r)
}

/// Probe-set estimates for the regularity fields the model leaves unset. Declared
/// fields are kept as they are. The estimates are the loosest values consistent with
/// the probes, not certified constants.
///
/// * `L` is the largest `|h(x)| / |x|` over probes with `|x| >= 1`, and `m` the largest
///   `|h(x)| - L|x|`.
/// * `K` is the largest `-<dh, dx>/|dx|^2` over the pairs.
/// * `mu` is half the median of `<dh, dx>/|dx|^2` over the most separated tenth of the
///   pairs, and `R` the largest separation of a pair violating `mu`. Both stay unset
///   when that median is not positive.
pub fn estimate_regularity<F: Scalar>(model: &dyn Potential<F>, plan: &ProbePlan) -> Result<RegularityParams<F>> {
    plan.validate(model.dim())?;
    let mut reg = model.regularity();
    let growth: Vec<(f64, f64)> = (0..plan.n_points)
        .into_par_iter()
        .map(|i| {
            let mut rng = plan.rng(0, i);
            let x = plan.point(model, &mut rng);
            (nrm(&x), nrm(&h_at(model, &x)))
        })
        .collect();
    let pairs: Vec<(f64, f64)> = (0..plan.n_pairs)
        .into_par_iter()
        .filter_map(|j| {
            let (x, y) = pair(plan, model, j);
            let dx = sub(&x, &y);
            let s2 = dot(&dx, &dx);
            (s2 > 0.0).then(|| {
                let dh = sub(&h_at(model, &x), &h_at(model, &y));
                (s2.sqrt(), dot(&dh, &dx) / s2)
            })
        })
        .collect();

    if reg.l.is_none() || reg.m.is_none() {
        let l = reg.l.map(|v| v.as_f64()).unwrap_or_else(|| {
            growth
                .iter()
                .filter(|(r, _)| *r >= 1.0)
                .map(|(r, h)| h / r)
                .fold(0.0, f64::max)
        });
        let m = growth.iter().map(|(r, h)| h - l * r).fold(0.0, f64::max);
        reg.l.get_or_insert(F::lit(l));
        reg.m.get_or_insert(F::lit(m));
    }
    if reg.k.is_none() {
        let k = pairs.iter().map(|(_, c)| -c).fold(0.0, f64::max);
        reg.k = Some(F::lit(k));
    }
    if reg.mu.is_none() && !pairs.is_empty() {
        let mut far = pairs.clone();
        far.sort_by(|a, b| b.0.total_cmp(&a.0));
        far.truncate((far.len() / 10).max(1));
        let mut c: Vec<f64> = far.iter().map(|p| p.1).collect();
        c.sort_by(f64::total_cmp);
        let med = c[c.len() / 2];
        if med > 0.0 {
            let mu = 0.5 * med;
            let mut r = pairs.iter().filter(|(_, c)| *c < mu).map(|(s, _)| *s).fold(0.0, f64::max);
            // the check pushes pairs out to separation r, reaching pairs the sample above
            // never saw; grow r past each failing witness
            for _ in 0..RADIUS_ROUNDS {
                let rep = check_convexity_at_infinity(model, mu, r, plan, InfinityVariant::Pairwise)?;
                if rep.pass {
                    break;
                }
                let sep = match rep.witness.as_slice() {
                    [x, y] => nrm(&sub(x, y)),
                    _ => r,
                };
                r = 1.25 * sep.max(r).max(1e-3);
            }
            reg.mu = Some(F::lit(mu));
            reg.r = Some(F::lit(r));
        }
    }
    Ok(reg)
}
