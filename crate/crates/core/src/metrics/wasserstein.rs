use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

fn sorted_f64<F: Scalar>(v: &[F]) -> Vec<f64> {
    let mut s: Vec<f64> = v.iter().map(|x| x.as_f64()).collect();
    s.sort_unstable_by(f64::total_cmp);
    s
}

/// Empirical quantile of sorted data at level `q` with linear interpolation
/// between order statistics placed at `(i + 1/2)/n`.
fn interpolated_quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let pos = (q * n as f64 - 0.5).clamp(0.0, (n - 1) as f64);
    let i = pos.floor() as usize;
    let t = pos - i as f64;
    if i + 1 < n {
        sorted[i] * (1.0 - t) + sorted[i + 1] * t
    } else {
        sorted[i]
    }
}

/// Shrinks sorted data to `m` points by reading off its quantiles at `(j + 1/2)/m`.
fn resample_sorted(sorted: &[f64], m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| interpolated_quantile(sorted, (j as f64 + 0.5) / m as f64))
        .collect()
}

fn check_order(order: u32) -> Result<()> {
    if order == 1 || order == 2 {
        Ok(())
    } else {
        Err(invalid("order", format!("must be 1 or 2, got {order}")))
    }
}

fn coupling_cost(a: &[f64], b: &[f64], order: u32) -> f64 {
    let n = a.len() as f64;
    if order == 1 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / n
    } else {
        (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n).sqrt()
    }
}

/// Order-`p` Wasserstein distance between two 1-D empirical laws via the sorted
/// coupling. When sizes differ the larger sample is quantile-resampled to the smaller size.
pub fn wasserstein_1d<F: Scalar>(a: &[F], b: &[F], order: u32) -> Result<f64> {
    check_order(order)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("wasserstein_1d sample"));
    }
    let (mut sa, mut sb) = (sorted_f64(a), sorted_f64(b));
    if sa.len() > sb.len() {
        sa = resample_sorted(&sa, sb.len());
    } else if sb.len() > sa.len() {
        sb = resample_sorted(&sb, sa.len());
    }
    Ok(coupling_cost(&sa, &sb, order))
}

/// Order-`p` distance between samples and a law given by its quantile function,
/// coupling the `i`-th order statistic with the quantile at `(i + 1/2)/n`.
pub fn wasserstein_to_quantiles<F: Scalar>(
    samples: &[F],
    quantile: impl Fn(f64) -> f64 + Sync,
    order: u32,
) -> Result<f64> {
    check_order(order)?;
    if samples.is_empty() {
        return Err(Error::Empty("wasserstein_to_quantiles sample"));
    }
    let s = sorted_f64(samples);
    let n = s.len();
    let q: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| quantile((i as f64 + 0.5) / n as f64))
        .collect();
    Ok(coupling_cost(&s, &q, order))
}

/// Uniformly random unit vectors in `R^d`, deterministic given `seed`.
pub fn random_directions(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            out.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    out
}

/// Sliced 2-Wasserstein distance: root-mean over `n_proj` random directions of the
/// squared 1-D `W_2` between projected samples.
pub fn sliced_w2<F: Scalar>(a: &[Vec<F>], b: &[Vec<F>], n_proj: usize, seed: u64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("sliced_w2 sample"));
    }
    if n_proj == 0 {
        return Err(invalid("n_proj", "must be positive"));
    }
    let d = a[0].len();
    if let Some(p) = a.iter().chain(b).find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: p.len(),
        });
    }
    let project = |pts: &[Vec<F>], u: &[f64]| -> Vec<f64> {
        pts.iter()
            .map(|p| p.iter().zip(u).map(|(x, w)| x.as_f64() * w).sum())
            .collect()
    };
    let dirs = random_directions(d, n_proj, seed);
    let squares = dirs
        .par_iter()
        .map(|u| wasserstein_1d(&project(a, u), &project(b, u), 2).map(|w| w * w))
        .collect::<Result<Vec<f64>>>()?;
    Ok((squares.iter().sum::<f64>() / n_proj as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_examples() {
        assert_eq!(wasserstein_1d(&[1.0, 3.0, 2.0], &[2.0, 1.0, 3.0], 1).unwrap(), 0.0);
        assert_eq!(wasserstein_1d(&[0.0], &[1.0], 1).unwrap(), 1.0);
        assert_eq!(wasserstein_1d(&[0.0, 2.0], &[1.0, 3.0], 2).unwrap(), 1.0);
        assert!(wasserstein_1d::<f64>(&[], &[1.0], 1).is_err());
        assert!(wasserstein_1d(&[0.0], &[1.0], 3).is_err());
    }

    #[test]
    fn unequal_sizes_resample() {
        // {0, 1, 2, 3} resampled to 2 points gives quantiles at 1/4 and 3/4: 0.5 and 2.5
        let w = wasserstein_1d(&[0.0, 1.0, 2.0, 3.0], &[0.5, 2.5], 1).unwrap();
        assert!(w.abs() < 1e-15);
    }

    #[test]
    fn quantile_coupling() {
        let w = wasserstein_to_quantiles(&[0.25, 0.75], |q| q, 1).unwrap();
        assert!(w.abs() < 1e-15);
    }

    #[test]
    fn sliced_identical_and_point_masses() {
        let a = vec![vec![0.0, 1.0], vec![2.0, -1.0]];
        assert_eq!(sliced_w2(&a, &a, 16, 1).unwrap(), 0.0);
        let v = [3.0, 4.0];
        let s = sliced_w2(&[vec![0.0, 0.0]], &[v.to_vec()], 64, 2).unwrap();
        assert!(s <= 5.0);
        // E<u, v>^2 = |v|^2 / d for uniform directions
        assert!((s - 5.0 / 2f64.sqrt()).abs() < 0.5);
        assert!(sliced_w2(&a, &[vec![0.0]], 4, 0).is_err());
    }
}
