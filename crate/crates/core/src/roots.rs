//! Root polishing for monotone scalar equations.

use crate::scalar::Real;

/// Finds the root of an increasing function `f` on `[lo, hi]` where
/// `f(lo) <= 0 <= f(hi)`.
///
/// A few bisection halvings shrink the bracket, then Newton steps take over.
/// Any Newton step that leaves the current bracket is replaced by a
/// bisection step, so convergence is guaranteed.
pub fn bisect_newton<T, F, D>(f: F, df: D, mut lo: T, mut hi: T, coarse_halvings: usize) -> T
where
    T: Real,
    F: Fn(T) -> T,
    D: Fn(T) -> T,
{
    for _ in 0..coarse_halvings {
        let mid = T::half() * (lo + hi);
        if f(mid) > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let mut x = T::half() * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == T::zero() {
            return x;
        }
        if fx > T::zero() {
            hi = x;
        } else {
            lo = x;
        }
        let slope = df(x);
        let newton = x - fx / slope;
        let next = if slope > T::zero() && newton > lo && newton < hi {
            newton
        } else {
            T::half() * (lo + hi)
        };
        if (next - x).abs() <= T::epsilon() * x.abs().max(T::min_positive_value()) {
            return next;
        }
        if hi - lo <= T::epsilon() * hi.abs() {
            return next;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root_of_two() {
        let r = bisect_newton(|x: f64| x * x * x - 2.0, |x| 3.0 * x * x, 0.0, 2.0, 4);
        assert!((r - 2.0_f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn bad_slope_falls_back_to_bisection() {
        // derivative lies (always 0); bisection alone must still converge
        let r = bisect_newton(|x: f64| x - 0.3, |_| 0.0, 0.0, 1.0, 0);
        assert!((r - 0.3).abs() < 1e-15);
    }
}
