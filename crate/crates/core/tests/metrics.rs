use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sgula_core::metrics::{
    empirical_moment2, kde_silverman, linspace, loglog_slope, mode_detect, sliced_w2, wasserstein_1d,
    wasserstein_to_quantiles, DensityEstimate, KdeGrid, Target1d,
};
use sgula_core::potentials::{MogLaplace, MogLaplaceSpec};

fn normals(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect()
}

/// Exact W2 between equal-size uniform point clouds by enumerating all assignments.
fn brute_force_w2(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    fn permute(k: usize, perm: &mut Vec<usize>, cost: &dyn Fn(&[usize]) -> f64, best: &mut f64) {
        if k == perm.len() {
            *best = best.min(cost(perm));
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            permute(k + 1, perm, cost, best);
            perm.swap(k, i);
        }
    }
    let n = a.len();
    let cost = |p: &[usize]| -> f64 {
        (0..n)
            .map(|i| a[i].iter().zip(&b[p[i]]).map(|(x, y)| (x - y).powi(2)).sum::<f64>())
            .sum::<f64>()
            / n as f64
    };
    let mut best = f64::INFINITY;
    permute(0, &mut (0..n).collect(), &cost, &mut best);
    best.sqrt()
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[test]
fn w1_between_shifted_samples_is_the_shift() {
    let a: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
    let b: Vec<f64> = a.iter().map(|x| x + 0.7).collect();
    assert!((wasserstein_1d(&a, &b, 1).unwrap() - 0.7).abs() < 1e-12);
    assert!((wasserstein_1d(&a, &b, 2).unwrap() - 0.7).abs() < 1e-12);
}

#[test]
fn unequal_sizes_are_supported() {
    let a = vec![0.0, 1.0];
    let b = vec![0.0, 0.0, 1.0, 1.0];
    assert!(wasserstein_1d(&a, &b, 1).unwrap() < 1e-12);
}

#[test]
fn invalid_orders_and_empty_inputs() {
    assert!(wasserstein_1d(&[1.0], &[2.0], 3).is_err());
    assert!(wasserstein_1d::<f64>(&[], &[2.0], 1).is_err());
    assert!(wasserstein_to_quantiles::<f64>(&[], |q| q, 1).is_err());
}

#[test]
fn normal_samples_against_tabulated_normal_quantiles() {
    let target = Target1d::new(|x| 0.5 * x * x, 1.0, -12.0, 12.0, 20_000).unwrap();
    let xs: Vec<f64> = normals(200_000, 1, 3).into_iter().map(|p| p[0]).collect();
    let w1 = wasserstein_to_quantiles(&xs, |q| target.quantile(q), 1).unwrap();
    assert!(w1 < 0.01, "w1 = {w1}");
    let shifted: Vec<f64> = xs.iter().map(|x| x + 0.25).collect();
    let w1s = wasserstein_to_quantiles(&shifted, |q| target.quantile(q), 1).unwrap();
    assert!((w1s - 0.25).abs() < 0.01, "w1 = {w1s}");
}

#[test]
fn sliced_w2_is_below_exact_w2() {
    for seed in 0..5 {
        let a = normals(7, 3, 10 + seed);
        let b: Vec<Vec<f64>> = normals(7, 3, 100 + seed)
            .into_iter()
            .map(|p| p.into_iter().map(|x| 0.5 * x + 1.0).collect())
            .collect();
        let exact = brute_force_w2(&a, &b);
        let sliced = sliced_w2(&a, &b, 200, seed).unwrap();
        assert!(sliced <= exact + 1e-12, "sliced {sliced} > exact {exact}");
        assert!(sliced > 0.0);
    }
}

#[test]
fn sliced_w2_of_shifted_gaussian_clouds() {
    // a shift by s in R^d has sliced W2 equal to |s| / sqrt(d)
    let a = normals(20_000, 2, 1);
    let b: Vec<Vec<f64>> = a.iter().map(|p| vec![p[0] + 1.0, p[1]]).collect();
    let s = sliced_w2(&a, &b, 500, 9).unwrap();
    assert!((s - 0.5f64.sqrt()).abs() < 0.03, "sliced = {s}");
}

#[test]
fn second_moment_of_standard_normals() {
    let pts = normals(1_000_000, 3, 42);
    let m2 = empirical_moment2(&pts).unwrap();
    assert!((m2 - 3.0).abs() < 0.02, "m2 = {m2}");
}

#[test]
fn kde_tracks_normal_density() {
    let pts = normals(100_000, 1, 5);
    let est = kde_silverman(&pts, &KdeGrid::default()).unwrap();
    assert!((est.integral() - 1.0).abs() < 0.05);
    let dev = (0..est.values.len())
        .map(|i| (est.values[i] - std_normal_pdf(est.point(i)[0])).abs())
        .fold(0.0, f64::max);
    assert!(dev < 0.02, "sup deviation {dev}");
}

#[test]
fn kde_in_two_dimensions_integrates_to_one() {
    let pts = normals(20_000, 2, 6);
    let est = kde_silverman(&pts, &KdeGrid::default()).unwrap();
    assert_eq!(est.shape(), vec![200, 200]);
    assert!((est.integral() - 1.0).abs() < 0.05);
}

#[test]
fn mixture_density_has_three_modes() {
    let model = MogLaplace::new(MogLaplaceSpec::<f64>::k3(0.0)).unwrap();
    let axes: Vec<Vec<f64>> = vec![linspace(-6.0, 6.0, 241), linspace(-6.0, 6.0, 241)];
    let mut values = Vec::with_capacity(241 * 241);
    for &x in &axes[0] {
        for &y in &axes[1] {
            values.push(model.unnormalized_density(&[x, y]));
        }
    }
    let est = DensityEstimate {
        axes,
        values,
        bandwidth: vec![0.0, 0.0],
    };
    let modes = mode_detect(&est, 0.5).unwrap();
    assert_eq!(modes.len(), 3, "{modes:?}");
}

#[test]
fn loglog_slope_of_power_law() {
    let l = [0.1, 0.05, 0.02, 0.01];
    let e: Vec<f64> = l.iter().map(|x: &f64| 3.0 * x.powf(0.5)).collect();
    let fit = loglog_slope(&l, &e).unwrap();
    assert!((fit.slope - 0.5).abs() < 1e-12);
    assert!(fit.r_squared > 1.0 - 1e-12);
}

proptest! {
    #[test]
    fn w_distances_are_metrics(
        a in prop::collection::vec(-50.0f64..50.0, 12),
        b in prop::collection::vec(-50.0f64..50.0, 12),
        c in prop::collection::vec(-50.0f64..50.0, 12),
        order in 1u32..=2,
    ) {
        let ab = wasserstein_1d(&a, &b, order).unwrap();
        let ba = wasserstein_1d(&b, &a, order).unwrap();
        let bc = wasserstein_1d(&b, &c, order).unwrap();
        let ac = wasserstein_1d(&a, &c, order).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-9);
        prop_assert!(ac <= ab + bc + 1e-9);
        prop_assert!(wasserstein_1d(&a, &a, order).unwrap() == 0.0);
    }

    #[test]
    fn w_distances_scale_linearly(
        a in prop::collection::vec(-50.0f64..50.0, 10),
        b in prop::collection::vec(-50.0f64..50.0, 10),
        s in 0.01f64..10.0,
    ) {
        let w = wasserstein_1d(&a, &b, 2).unwrap();
        let sa: Vec<f64> = a.iter().map(|x| s * x).collect();
        let sb: Vec<f64> = b.iter().map(|x| s * x).collect();
        prop_assert!((wasserstein_1d(&sa, &sb, 2).unwrap() - s * w).abs() <= 1e-9 * (1.0 + s * w));
    }

    #[test]
    fn w1_never_exceeds_w2(
        a in prop::collection::vec(-50.0f64..50.0, 10),
        b in prop::collection::vec(-50.0f64..50.0, 10),
    ) {
        prop_assert!(wasserstein_1d(&a, &b, 1).unwrap() <= wasserstein_1d(&a, &b, 2).unwrap() + 1e-9);
    }
}
