use super::{check_positive_dim, Potential, RegularityParams, KINK_TOL};
use crate::error::Result;
use crate::scalar::{norm, Scalar};

/// `u(x) = max(|x|, |x|^2) - |x|^2 / 2`.
///
/// Inside the unit ball `u = |x| - |x|^2/2`; outside `u = |x|^2/2`. The kinks are
/// the origin and the unit sphere, where the minimum-norm subgradient is 0.
#[derive(Debug, Clone)]
pub struct MaxQuadratic {
    dim: usize,
}

impl MaxQuadratic {
    pub fn new(dim: usize) -> Result<Self> {
        check_positive_dim(dim)?;
        Ok(Self { dim })
    }
}

impl<F: Scalar> Potential<F> for MaxQuadratic {
    fn name(&self) -> &str {
        "max_quadratic"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[F]) -> F {
        let r = norm(x);
        r.max(r * r) - r * r / F::lit(2.0)
    }
    fn subgradient_into(&self, x: &[F], out: &mut [F]) {
        let r = norm(x);
        let tol = F::lit(KINK_TOL);
        if r <= tol || (r - F::one()).abs() <= tol {
            out.iter_mut().for_each(|o| *o = F::zero());
        } else if r < F::one() {
            for (o, &v) in out.iter_mut().zip(x) {
                *o = v / r - v;
            }
        } else {
            out.copy_from_slice(x);
        }
    }
    // u + |x|^2/2 is convex (K = 1). The gradient is x outside the unit ball, so
    // strong convexity holds with modulus 1/2 once |x - y| >= 2 sqrt(2).
    fn regularity(&self) -> RegularityParams<F> {
        RegularityParams {
            m: Some(F::one()),
            l: Some(F::one()),
            k: Some(F::one()),
            mu: Some(F::lit(0.5)),
            r: Some(F::lit(2.0 * std::f64::consts::SQRT_2)),
            h0_norm: F::zero(),
        }
    }
    fn kink_distance(&self, x: &[F]) -> F {
        let r = norm(x);
        r.min((r - F::one()).abs())
    }
    fn kink_point(&self, x: &[F], selector: u64) -> Option<Vec<F>> {
        let r = norm(x);
        if selector % 2 == 1 {
            return Some(vec![F::zero(); x.len()]);
        }
        let mut p = vec![F::zero(); x.len()];
        if r > F::zero() {
            p.iter_mut().zip(x).for_each(|(p, &v)| *p = v / r);
        } else {
            p[0] = F::one();
        }
        Some(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{eval_u, subgrad_min_norm, test_util::fd_grad};
    use crate::scalar::norm_sq;
    use proptest::prelude::*;

    #[test]
    fn closed_form_points() {
        let m = MaxQuadratic::new(2).unwrap();
        assert_eq!(eval_u::<f64>(&m, &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(eval_u::<f64>(&m, &[2.0, 0.0]).unwrap(), 2.0);
        assert_eq!(subgrad_min_norm::<f64>(&m, &[2.0, 0.0]).unwrap(), vec![2.0, 0.0]);
        let g = subgrad_min_norm::<f64>(&m, &[0.5, 0.0]).unwrap();
        let fd = fd_grad(&m, &[0.5, 0.0], 1e-6);
        assert!((g[0] - 0.5).abs() < 1e-12 && g[1] == 0.0);
        assert!((g[0] - fd[0]).abs() < 1e-6 && fd[1].abs() < 1e-6);
    }

    #[test]
    fn kinks_select_zero() {
        let m = MaxQuadratic::new(3).unwrap();
        assert_eq!(subgrad_min_norm::<f64>(&m, &[0.0; 3]).unwrap(), vec![0.0; 3]);
        let s = 1.0 / 3f64.sqrt();
        assert_eq!(subgrad_min_norm::<f64>(&m, &[s, s, s]).unwrap(), vec![0.0; 3]);
    }

    proptest! {
        #[test]
        fn shifted_potential_is_midpoint_convex(
            x in prop::array::uniform2(-3.0f64..3.0), y in prop::array::uniform2(-3.0f64..3.0)
        ) {
            let m = MaxQuadratic::new(2).unwrap();
            let f = |p: &[f64]| Potential::<f64>::value(&m, p) + norm_sq(p) / 2.0;
            let mid = [(x[0] + y[0]) / 2.0, (x[1] + y[1]) / 2.0];
            prop_assert!(f(&mid) <= (f(&x) + f(&y)) / 2.0 + 1e-12);
        }
    }
}
