//! SCAD penalty pieces and the L1 proximal map.

use super::KINK_TOL;
use crate::error::{invalid, Result};
use crate::scalar::{sign0, Scalar};

/// Parameters of the SCAD penalty `p(x) = q(|x|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScadSpec<F> {
    a: F,
    gamma: F,
}

impl<F: Scalar> ScadSpec<F> {
    pub fn new(a: F, gamma: F) -> Result<Self> {
        if !(a > F::lit(2.0) && a.is_finite()) {
            return Err(invalid("a", format!("must exceed 2, got {a}")));
        }
        if !(gamma > F::zero() && gamma.is_finite()) {
            return Err(invalid("gamma", format!("must be positive, got {gamma}")));
        }
        Ok(Self { a, gamma })
    }

    pub fn a(&self) -> F {
        self.a
    }

    pub fn gamma(&self) -> F {
        self.gamma
    }

    /// Semi-convexity modulus: `p + K x^2 / 2` is convex for `K = 1/(a-1)`.
    pub fn semi_convexity(&self) -> F {
        F::one() / (self.a - F::one())
    }

    /// `q(x)` for `x >= 0`.
    pub fn q(&self, x: F) -> Result<F> {
        check_nonneg(x)?;
        Ok(self.q_unchecked(x))
    }

    /// `q'(x)` for `x >= 0`.
    pub fn q_prime(&self, x: F) -> Result<F> {
        check_nonneg(x)?;
        Ok(self.q_prime_unchecked(x))
    }

    pub(crate) fn q_unchecked(&self, x: F) -> F {
        let (a, g) = (self.a, self.gamma);
        if x <= g {
            g * x
        } else if x <= a * g {
            (-x * x + F::lit(2.0) * a * g * x - g * g) / (F::lit(2.0) * (a - F::one()))
        } else {
            (a + F::one()) * g * g / F::lit(2.0)
        }
    }

    pub(crate) fn q_prime_unchecked(&self, x: F) -> F {
        let (a, g) = (self.a, self.gamma);
        if x <= g {
            g
        } else if x <= a * g {
            (a * g - x) / (a - F::one())
        } else {
            F::zero()
        }
    }

    /// `p(x) = q(|x|)`.
    pub fn penalty(&self, x: F) -> F {
        self.q_unchecked(x.abs())
    }

    /// Minimum-norm subgradient of `p`: `sign(x) q'(|x|)`, and 0 at the origin.
    pub fn subgradient(&self, x: F) -> F {
        if x.abs() <= F::lit(KINK_TOL) {
            F::zero()
        } else {
            sign0(x) * self.q_prime_unchecked(x.abs())
        }
    }

    /// Minimum-norm subgradient of the convex regularization `p(x) + x^2 / (2(a-1))`.
    pub fn regularized_subgradient(&self, x: F) -> F {
        self.subgradient(x) + x / (self.a - F::one())
    }
}

fn check_nonneg<F: Scalar>(x: F) -> Result<()> {
    if x >= F::zero() {
        Ok(())
    } else {
        Err(invalid("x", format!("must be nonnegative, got {x}")))
    }
}

/// Soft thresholding: `argmin_z (z - x)^2 / 2 + tau |z|`.
#[inline]
pub fn prox_l1_scalar<F: Scalar>(x: F, tau: F) -> F {
    sign0(x) * (x.abs() - tau).max(F::zero())
}

/// Componentwise soft thresholding.
pub fn prox_l1<F: Scalar>(x: &[F], tau: F) -> Result<Vec<F>> {
    if !(tau >= F::zero()) {
        return Err(invalid("tau", format!("must be nonnegative, got {tau}")));
    }
    Ok(x.iter().map(|&v| prox_l1_scalar(v, tau)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec() -> ScadSpec<f64> {
        ScadSpec::new(3.7, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ScadSpec::new(2.0, 1.0).is_err());
        assert!(ScadSpec::new(3.7, 0.0).is_err());
        assert!(spec().q(-1.0).is_err());
        assert!(spec().q_prime(-0.1).is_err());
    }

    #[test]
    fn branch_values() {
        let s = spec();
        assert_eq!(s.q(0.5).unwrap(), 0.5);
        assert!((s.q(5.0).unwrap() - 2.35).abs() < 1e-14);
        assert!((s.q_prime(2.0).unwrap() - 1.7 / 2.7).abs() < 1e-14);
        assert!((s.q_prime(2.0).unwrap() - 0.62963).abs() < 1e-5);
        assert_eq!(s.q_prime(4.0).unwrap(), 0.0);
    }

    #[test]
    fn q_is_continuous_at_breakpoints() {
        let s = spec();
        for b in [1.0, 3.7] {
            let l = s.q(b - 1e-9).unwrap();
            let r = s.q(b + 1e-9).unwrap();
            assert!((l - r).abs() < 1e-8);
        }
    }

    #[test]
    fn q_prime_matches_finite_differences() {
        let s = spec();
        for x in [0.3, 1.5, 2.9, 4.5, 10.0] {
            let h = 1e-6;
            let fd = (s.q(x + h).unwrap() - s.q(x - h).unwrap()) / (2.0 * h);
            assert!((fd - s.q_prime(x).unwrap()).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn regularized_middle_branch() {
        let s = ScadSpec::new(3.7, 0.8).unwrap();
        for x in [1.0, -2.0, 2.96] {
            let expected = 3.7 * 0.8 * x / (2.7 * f64::abs(x));
            assert!((s.regularized_subgradient(x) - expected).abs() < 1e-12);
        }
        assert_eq!(s.subgradient(0.0), 0.0);
    }

    #[test]
    fn prox_examples() {
        assert_eq!(prox_l1(&[1.5, -2.0], 0.0).unwrap(), vec![1.5, -2.0]);
        assert!(prox_l1(&[1.0], -0.1).is_err());
        // brute-force grid minimization of (z - x)^2 / 2 + 0.3 |z|
        for (x, expected) in [(1.0, 0.7), (-1.0, -0.7), (0.2, 0.0)] {
            let best = (-20000..=20000)
                .map(|k| k as f64 * 1e-4)
                .min_by(|a, b| {
                    let fa = 0.5 * (a - x) * (a - x) + 0.3 * a.abs();
                    let fb = 0.5 * (b - x) * (b - x) + 0.3 * b.abs();
                    fa.partial_cmp(&fb).unwrap()
                })
                .unwrap();
            assert!((best - expected).abs() < 1e-4);
            assert!((prox_l1(&[x], 0.3).unwrap()[0] - best).abs() < 1e-4);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn regularized_subgradient_is_monotone(
            a in 2.05f64..10.0, g in 0.01f64..5.0, x in -20.0f64..20.0, y in -20.0f64..20.0
        ) {
            let s = ScadSpec::new(a, g).unwrap();
            let gap = (s.regularized_subgradient(x) - s.regularized_subgradient(y)) * (x - y);
            prop_assert!(gap >= -1e-12 * (1.0 + (x - y).abs()));
        }

        #[test]
        fn prox_satisfies_optimality(x in -10.0f64..10.0, tau in 0.0f64..5.0) {
            let z = prox_l1_scalar(x, tau);
            let r = x - z;
            if z != 0.0 {
                prop_assert!((r - tau * z.signum()).abs() < 1e-12);
            } else {
                prop_assert!(r.abs() <= tau + 1e-12);
            }
        }
    }
}
