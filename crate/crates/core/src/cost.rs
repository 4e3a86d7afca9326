//! Power-law error cost `ρ(t) = |t|^α` and its exponent map `ζ(c) = α c`.

use crate::error::{domain, Result};
use crate::scalar::Real;

/// The error cost function `ρ(t) = |t|^α`, `α >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCost<T> {
    alpha: T,
}

impl<T: Real> PowerCost<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if !alpha.is_finite() || alpha < T::one() {
            return Err(domain(format!("cost exponent must be finite and >= 1, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    /// Squared error.
    pub fn squared() -> Self {
        Self { alpha: T::two() }
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// `ρ(t) = |t|^α`.
    #[inline]
    pub fn rho(&self, t: T) -> T {
        t.abs().powf(self.alpha)
    }

    /// Exponent map: `ρ(e^{-nc}) = e^{-n ζ(c)}` with `ζ(c) = α c`.
    #[inline]
    pub fn zeta(&self, c: T) -> T {
        self.alpha * c
    }
}

/// Free-function form of [`PowerCost::rho`].
pub fn rho<T: Real>(c: &PowerCost<T>, t: T) -> T {
    c.rho(t)
}

/// Free-function form of [`PowerCost::zeta`].
pub fn zeta<T: Real>(c: &PowerCost<T>, cexp: T) -> T {
    c.zeta(cexp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rho_examples() {
        assert_eq!(PowerCost::new(2.0_f64).unwrap().rho(0.5), 0.25);
        assert_eq!(PowerCost::new(1.0_f64).unwrap().rho(-0.3), 0.3);
        let r = PowerCost::new(3.0_f64).unwrap().rho(1e-2);
        assert!((r / 1e-6 - 1.0).abs() < 1e-12);
        assert_eq!(PowerCost::<f64>::squared().rho(0.0), 0.0);
    }

    #[test]
    fn zeta_examples() {
        assert_eq!(PowerCost::new(2.0_f64).unwrap().zeta(1.0), 2.0);
        assert_eq!(PowerCost::new(1.0_f64).unwrap().zeta(0.0), 0.0);
        assert_eq!(PowerCost::new(4.0_f64).unwrap().zeta(0.25), 1.0);
    }

    #[test]
    fn rejects_concave_exponent() {
        assert!(PowerCost::new(0.5_f64).is_err());
        assert!(PowerCost::new(f64::NAN).is_err());
        assert!(PowerCost::new(f32::INFINITY).is_err());
    }

    proptest! {
        #[test]
        fn exponent_identity(n in 1usize..=64, c in 1e-3f64..=2.0, alpha in 1.0f64..4.0) {
            let cost = PowerCost::new(alpha).unwrap();
            let nf = n as f64;
            let lhs = cost.rho((-nf * c).exp());
            let rhs = (-nf * cost.zeta(c)).exp();
            prop_assert!((lhs / rhs - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn midpoint_convex(a in -5.0f64..5.0, b in -5.0f64..5.0, alpha in 1.0f64..4.0) {
            let cost = PowerCost::new(alpha).unwrap();
            let mid = cost.rho(0.5 * (a + b));
            prop_assert!(mid <= 0.5 * (cost.rho(a) + cost.rho(b)) * (1.0 + 1e-12) + 1e-300);
            prop_assert_eq!(cost.rho(a), cost.rho(-a));
        }
    }
}
