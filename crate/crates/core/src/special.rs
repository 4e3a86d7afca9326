//! Special functions: log-gamma, regularized upper incomplete gamma, and the
//! Gaussian tail function.

use crate::error::{domain, Result};
use crate::scalar::Real;

const MAX_ITER: usize = 10_000;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> T {
    if x < T::half() {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let pi = T::PI();
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += T::lit(c) / (x + T::from_count(i));
    }
    let t = x + T::lit(LANCZOS_G) + T::half();
    T::half() * (T::two() * T::PI()).ln() + (x + T::half()) * t.ln() - t + acc.ln()
}

/// Natural log of the regularized upper incomplete gamma function
/// `Q(a, x) = Γ(a, x) / Γ(a)`.
///
/// Series for `x < a + 1`, Lentz continued fraction otherwise. The
/// continued-fraction branch stays accurate deep into the tail where
/// `Q` itself underflows.
pub fn ln_gamma_q<T: Real>(a: T, x: T) -> Result<T> {
    if !(a > T::zero()) || !a.is_finite() {
        return Err(domain(format!("incomplete gamma needs a > 0, got {a}")));
    }
    if x.is_nan() || x < T::zero() {
        return Err(domain(format!("incomplete gamma needs x >= 0, got {x}")));
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    if x.is_infinite() {
        return Ok(T::neg_infinity());
    }
    let ln_prefactor = -x + a * x.ln() - ln_gamma(a);
    if x < a + T::one() {
        let p = (ln_prefactor + lower_series(a, x).ln()).exp();
        Ok((-p).ln_1p())
    } else {
        Ok(ln_prefactor + upper_fraction(a, x).ln())
    }
}

/// Regularized upper incomplete gamma function `Q(a, x)`.
pub fn gamma_q<T: Real>(a: T, x: T) -> Result<T> {
    ln_gamma_q(a, x).map(T::exp)
}

// sum_{k>=0} x^k / (a (a+1) ... (a+k)); P(a,x) = prefactor * sum
fn lower_series<T: Real>(a: T, x: T) -> T {
    let mut ap = a;
    let mut term = T::one() / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += T::one();
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * T::epsilon() {
            break;
        }
    }
    sum
}

// modified Lentz evaluation of the continued fraction for Q(a,x) / prefactor
fn upper_fraction<T: Real>(a: T, x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let mut b = x + T::one() - a;
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let fi = T::from_count(i);
        let an = -fi * (fi - a);
        b += T::two();
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let delta = d * c;
        h *= delta;
        if (delta - T::one()).abs() < T::epsilon() {
            break;
        }
    }
    h
}

/// Standard Gaussian upper tail `Q(s) = P(N(0,1) > s)`.
///
/// Evaluated as `Q(s) = Q_Γ(1/2, s²/2) / 2` for `s >= 0` and by symmetry
/// otherwise. NaN propagates.
pub fn q_function<T: Real>(s: T) -> T {
    if s.is_nan() {
        return s;
    }
    if s < T::zero() {
        return T::one() - q_function(-s);
    }
    if s.is_infinite() {
        return T::zero();
    }
    let x = s * s * T::half();
    T::half() * gamma_q(T::half(), x).expect("arguments in domain")
}

/// `ln Q(s)`, accurate where `Q(s)` underflows.
pub fn ln_q_function<T: Real>(s: T) -> T {
    if s.is_nan() {
        return s;
    }
    if s <= T::zero() {
        return q_function(s).ln();
    }
    let x = s * s * T::half();
    T::half().ln() + ln_gamma_q(T::half(), x).expect("arguments in domain")
}
