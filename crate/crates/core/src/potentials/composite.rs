use super::{Potential, RegularityParams, KINK_TOL};
use crate::scalar::Scalar;

/// One-dimensional potential `u = u1 + u2 + u3` with
///
/// * `u1(x) = 2(x+3)^2 - 1/2` (strongly convex, modulus 4),
/// * `u2(x) = -8x^2 1{0<x<2} - 8x - 32(x-1) 1{x>=2}` (derivative 16-Lipschitz),
/// * `u3(x) = 10(x-1)^8 1{1<x<2} + x + 90(x-17/9) 1{x>=2}` (convex, derivative jumps at 2).
///
/// The only non-differentiable point is `x = 2`, where `du = [61, 71]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct OneDComposite;

impl OneDComposite {
    /// Strong convexity modulus of `u1`.
    pub const MU1: f64 = 4.0;
    /// Lipschitz constant of `u2'`.
    pub const K2: f64 = 16.0;

    fn u1<F: Scalar>(x: F) -> F {
        F::lit(2.0) * (x + F::lit(3.0)).powi(2) - F::lit(0.5)
    }

    fn u2<F: Scalar>(x: F) -> F {
        let mut v = -F::lit(8.0) * x;
        if x > F::zero() && x < F::lit(2.0) {
            v -= F::lit(8.0) * x * x;
        }
        if x >= F::lit(2.0) {
            v -= F::lit(32.0) * (x - F::one());
        }
        v
    }

    fn u3<F: Scalar>(x: F) -> F {
        let mut v = x;
        if x > F::one() && x < F::lit(2.0) {
            v += F::lit(10.0) * (x - F::one()).powi(8);
        }
        if x >= F::lit(2.0) {
            v += F::lit(90.0) * (x - F::lit(17.0 / 9.0));
        }
        v
    }

    fn h<F: Scalar>(x: F) -> F {
        let two = F::lit(2.0);
        if (x - two).abs() <= F::lit(KINK_TOL) {
            // left limit 61, right limit 71
            return F::lit(61.0);
        }
        if x <= F::zero() {
            F::lit(4.0) * x + F::lit(5.0)
        } else if x <= F::one() {
            F::lit(-12.0) * x + F::lit(5.0)
        } else if x < two {
            F::lit(-12.0) * x + F::lit(5.0) + F::lit(80.0) * (x - F::one()).powi(7)
        } else {
            F::lit(4.0) * x + F::lit(63.0)
        }
    }
}

impl<F: Scalar> Potential<F> for OneDComposite {
    fn name(&self) -> &str {
        "one_d_composite"
    }
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: &[F]) -> F {
        let x = x[0];
        Self::u1(x) + Self::u2(x) + Self::u3(x)
    }
    fn subgradient_into(&self, x: &[F], out: &mut [F]) {
        out[0] = Self::h(x[0]);
    }
    // h(x) = 4x + c(x) with c bounded: c ranges over about [-18.6, 63], so
    // <h(x)-h(y), x-y> >= 2|x-y|^2 once |x-y| >= 81.6/2.
    fn regularity(&self) -> RegularityParams<F> {
        RegularityParams {
            m: Some(F::lit(63.0)),
            l: Some(F::lit(4.0)),
            k: Some(F::lit(Self::K2)),
            mu: Some(F::lit(2.0)),
            r: Some(F::lit(41.0)),
            h0_norm: F::lit(5.0),
        }
    }
    fn kink_distance(&self, x: &[F]) -> F {
        (x[0] - F::lit(2.0)).abs()
    }
    fn kink_point(&self, _x: &[F], _selector: u64) -> Option<Vec<F>> {
        Some(vec![F::lit(2.0)])
    }
}
