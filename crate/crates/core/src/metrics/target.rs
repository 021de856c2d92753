//! One-dimensional Gibbs targets `pi(x) ∝ exp(-beta u(x))` tabulated by adaptive quadrature.

use crate::error::{invalid, Error, Result};

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Tabulated CDF of `exp(-beta u)` restricted to `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct Target1d {
    edges: Vec<f64>,
    /// Unnormalized density at each edge, relative to the peak.
    dens: Vec<f64>,
    /// Cumulative mass at each edge, normalized to end at 1.
    cdf: Vec<f64>,
}

impl Target1d {
    /// `cells` equal cells on `[lo, hi]`; the mass outside the interval is ignored,
    /// so the interval should contain all but a negligible fraction of it.
    pub fn new(u: impl Fn(f64) -> f64, beta: f64, lo: f64, hi: f64, cells: usize) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(invalid("interval", "need finite lo < hi"));
        }
        if cells < 2 {
            return Err(invalid("cells", "need at least two cells"));
        }
        if !(beta > 0.0) {
            return Err(invalid("beta", "must be positive"));
        }
        let edges: Vec<f64> = (0..=cells)
            .map(|i| lo + (hi - lo) * i as f64 / cells as f64)
            .collect();
        let u_min = edges.iter().map(|&x| u(x)).fold(f64::INFINITY, f64::min);
        if !u_min.is_finite() {
            return Err(Error::NonFinite("potential on the tabulation grid"));
        }
        let p = |x: f64| (-beta * (u(x) - u_min)).exp();
        let dens: Vec<f64> = edges.iter().map(|&x| p(x)).collect();
        let h = (hi - lo) / cells as f64;
        let mut cdf = Vec::with_capacity(cells + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for w in edges.windows(2) {
            acc += adaptive_simpson(&p, w[0], w[1], 1e-14 * h);
            cdf.push(acc);
        }
        if !(acc > 0.0 && acc.is_finite()) {
            return Err(Error::Numerical("target has no mass on the interval".into()));
        }
        cdf.iter_mut().for_each(|c| *c /= acc);
        Ok(Self { edges, dens, cdf })
    }

    /// Quantile at level `q` in `[0, 1]`: exact cell masses, with the density taken
    /// linear inside the cell.
    pub fn quantile(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        let n = self.edges.len() - 1;
        let i = (self.cdf.partition_point(|&c| c <= q)).clamp(1, n) - 1;
        let mass = self.cdf[i + 1] - self.cdf[i];
        let (x0, x1) = (self.edges[i], self.edges[i + 1]);
        if mass <= 0.0 {
            return x0;
        }
        let r = ((q - self.cdf[i]) / mass).clamp(0.0, 1.0);
        let (p0, p1) = (self.dens[i], self.dens[i + 1]);
        // solve p0 t + (p1 - p0) t^2 / 2 = r (p0 + p1) / 2 for t in [0, 1]
        let a = 0.5 * (p1 - p0);
        let c = -0.5 * r * (p0 + p1);
        let t = if a.abs() <= 1e-12 * (p0 + p1) || p0 + p1 == 0.0 {
            r
        } else {
            let disc = (p0 * p0 - 4.0 * a * c).max(0.0);
            // numerically stable root of a t^2 + p0 t + c = 0
            2.0 * (-c) / (p0 + disc.sqrt())
        };
        x0 + t.clamp(0.0, 1.0) * (x1 - x0)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.edges[0] {
            return 0.0;
        }
        let n = self.edges.len() - 1;
        if x >= self.edges[n] {
            return 1.0;
        }
        let i = self.edges.partition_point(|&e| e <= x) - 1;
        let t = (x - self.edges[i]) / (self.edges[i + 1] - self.edges[i]);
        self.cdf[i] + t * (self.cdf[i + 1] - self.cdf[i])
    }
}
