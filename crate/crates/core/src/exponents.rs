//! Converse and achievable weak-noise error-cost exponents.
//!
//! All rates and exponents are in nats per channel use. The SNR is
//! `γ = P/σ²`, the outage exponent is `λ`, and the cost is `|t|^α`.
//!
//! * `w(λ)` solves `θ - ln(1+θ) = 2λ`.
//! * Converse rate `R(λ,γ) = ½ ln(γ / (1 + w(λ)))`, exponent `E_U = α R`.
//! * Achievable rate `½ ln γ - ½ ln E_P⁻¹(λ)`, exponent `E_L = α R_a`, where
//!   `E_P` is the Poltyrev lattice exponent (max of the random-coding and
//!   expurgated exponents).

use crate::cost::PowerCost;
use crate::error::{domain, Result};
use crate::roots::bisect_newton;
use crate::scalar::Real;
use crate::special;

/// A point in trade-off space: outage exponent, SNR and cost exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffParams<T> {
    pub lambda: T,
    pub gamma: T,
    pub alpha: T,
}

impl<T: Real> TradeoffParams<T> {
    pub fn new(lambda: T, gamma: T, alpha: T) -> Result<Self> {
        let p = Self { lambda, gamma, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda < T::zero() {
            return Err(domain(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if !self.gamma.is_finite() || !(self.gamma > T::zero()) {
            return Err(domain(format!("gamma must be finite and > 0, got {}", self.gamma)));
        }
        PowerCost::new(self.alpha)?;
        Ok(())
    }

    pub fn cost(&self) -> PowerCost<T> {
        PowerCost::new(self.alpha).expect("validated alpha")
    }
}

/// An exponent value, clamped at zero when the underlying rate is not positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlaggedExponent<T> {
    pub value: T,
    /// The rate feeding the exponent was `<= 0`; `value` is then 0.
    pub nonpositive_rate: bool,
}

impl<T: Real> FlaggedExponent<T> {
    fn from_rate(cost: &PowerCost<T>, rate: T) -> Self {
        if rate > T::zero() {
            Self { value: cost.zeta(rate), nonpositive_rate: false }
        } else {
            Self { value: T::zero(), nonpositive_rate: true }
        }
    }
}

/// All exponent quantities at one `(λ, γ, α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentCurvePoint<T> {
    pub lambda: T,
    pub w: T,
    pub rate_converse: T,
    pub e_upper: FlaggedExponent<T>,
    pub rate_achievable: T,
    pub e_lower: FlaggedExponent<T>,
}

impl<T: Real> ExponentCurvePoint<T> {
    /// `E_U - E_L`.
    pub fn gap(&self) -> T {
        self.e_upper.value - self.e_lower.value
    }
}

fn require_finite<T: Real>(x: T, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{what} must be finite, got {x}")))
    }
}

/// `g(θ) = θ - ln(1+θ)`, with a series near zero where the subtraction cancels.
fn excess_log<T: Real>(theta: T) -> T {
    if theta.abs() < T::lit(1e-3) {
        // θ²/2 - θ³/3 + θ⁴/4 - ...
        let mut term = theta;
        let mut sum = T::zero();
        for k in 2..16 {
            term = -term * theta;
            sum -= term / T::from_count(k);
        }
        sum
    } else {
        theta - theta.ln_1p()
    }
}

/// Solves `θ - ln(1+θ) = 2λ` for `θ >= 0`.
///
/// The left side is strictly increasing on `θ > 0`, and
/// `θ₀ = 2λ + 2√λ` always overshoots, so `[0, θ₀]` brackets the root.
pub fn solve_w<T: Real>(lambda: T) -> Result<T> {
    require_finite(lambda, "lambda")?;
    if lambda < T::zero() {
        return Err(domain(format!("lambda must be >= 0, got {lambda}")));
    }
    if lambda == T::zero() {
        return Ok(T::zero());
    }
    let target = T::two() * lambda;
    let hi = target + T::two() * lambda.sqrt();
    Ok(bisect_newton(
        |t| excess_log(t) - target,
        |t| t / (T::one() + t),
        T::zero(),
        hi,
        8,
    ))
}

/// `R(λ,γ) = ½ ln(γ / (1 + w(λ)))`; negative at low SNR.
pub fn rate_converse<T: Real>(p: &TradeoffParams<T>) -> Result<T> {
    p.validate()?;
    let w = solve_w(p.lambda)?;
    Ok(T::half() * (p.gamma / (T::one() + w)).ln())
}

/// Converse exponent `E_U = ζ(R(λ,γ))`.
pub fn exponent_upper<T: Real>(p: &TradeoffParams<T>) -> Result<FlaggedExponent<T>> {
    let rate = rate_converse(p)?;
    Ok(FlaggedExponent::from_rate(&p.cost(), rate))
}

/// Random-coding exponent of lattice codes, as a function of `x = μ / 2πe`.
pub fn random_coding_exp<T: Real>(x: T) -> Result<T> {
    require_finite(x, "x")?;
    Ok(if x <= T::one() {
        T::zero()
    } else if x <= T::two() {
        T::half() * (x - x.ln() - T::one())
    } else {
        T::half() * (T::one() + (x / T::lit(4.0)).ln())
    })
}

/// Expurgated exponent of lattice codes, as a function of `x = μ / 2πe`.
pub fn expurgated_exp<T: Real>(x: T) -> Result<T> {
    require_finite(x, "x")?;
    let four = T::lit(4.0);
    Ok(if x <= four / T::E() {
        T::zero()
    } else if x <= four {
        T::half() * (T::one() + (x / four).ln())
    } else {
        x / T::lit(8.0)
    })
}

/// Poltyrev exponent: pointwise maximum of the random-coding and expurgated
/// exponents. Zero up to `x = 1`, strictly increasing afterwards.
pub fn poltyrev_exp<T: Real>(x: T) -> Result<T> {
    Ok(random_coding_exp(x)?.max(expurgated_exp(x)?))
}

/// Inverse of [`poltyrev_exp`] on its increasing part (`λ > 0`).
///
/// * `λ <= ½(1 - ln 2)`: `x = 1 + w(λ)` (random-coding sphere branch)
/// * `λ <= ½`: `x = 4 e^{2λ - 1}` (shared logarithmic branch)
/// * otherwise: `x = 8λ` (expurgated linear branch)
pub fn poltyrev_inv<T: Real>(lambda: T) -> Result<T> {
    require_finite(lambda, "lambda")?;
    if !(lambda > T::zero()) {
        return Err(domain(format!(
            "Poltyrev inverse needs lambda > 0, got {lambda}"
        )));
    }
    if lambda <= tight_lambda_max() {
        Ok(T::one() + solve_w(lambda)?)
    } else if lambda <= T::half() {
        Ok(T::lit(4.0) * (T::two() * lambda - T::one()).exp())
    } else {
        Ok(T::lit(8.0) * lambda)
    }
}

/// `½ ln(e/2) = ½(1 - ln 2)`: the largest λ with `w(λ) <= 1`, where the
/// achievable and converse exponents coincide.
pub fn tight_lambda_max<T: Real>() -> T {
    T::half() * (T::one() - T::LN_2())
}

/// Achievable rate `½ ln γ - ½ ln E_P⁻¹(λ)`.
pub fn rate_achievable<T: Real>(p: &TradeoffParams<T>) -> Result<T> {
    p.validate()?;
    let x = poltyrev_inv(p.lambda)?;
    Ok(T::half() * p.gamma.ln() - T::half() * x.ln())
}

/// Achievable exponent `E_L = ζ(rate_achievable)`.
pub fn exponent_lower<T: Real>(p: &TradeoffParams<T>) -> Result<FlaggedExponent<T>> {
    let rate = rate_achievable(p)?;
    Ok(FlaggedExponent::from_rate(&p.cost(), rate))
}

/// Every exponent quantity at `p`; needs `λ > 0` for the achievable side.
pub fn curve_point<T: Real>(p: &TradeoffParams<T>) -> Result<ExponentCurvePoint<T>> {
    let w = solve_w(p.lambda)?;
    let rate_converse = rate_converse(p)?;
    let rate_achievable = rate_achievable(p)?;
    let cost = p.cost();
    Ok(ExponentCurvePoint {
        lambda: p.lambda,
        w,
        rate_converse,
        e_upper: FlaggedExponent::from_rate(&cost, rate_converse),
        rate_achievable,
        e_lower: FlaggedExponent::from_rate(&cost, rate_achievable),
    })
}

/// Standard Gaussian upper tail.
pub fn q_function<T: Real>(s: T) -> T {
    special::q_function(s)
}

/// `ln P(‖Z‖² > n σ² (1+θ))` for `Z ~ N(0, σ² I_n)`.
///
/// This is the chi-square(n) upper tail at `n(1+θ)`, i.e. the regularized
/// upper incomplete gamma `Q(n/2, n(1+θ)/2)`. `θ > -1` is accepted; the
/// outage-sphere use case only needs `θ >= 0`.
pub fn ln_sphere_outage_prob<T: Real>(n: usize, theta: T) -> Result<T> {
    if n < 1 {
        return Err(domain("sphere outage needs n >= 1"));
    }
    require_finite(theta, "theta")?;
    if theta < -T::one() {
        return Err(domain(format!("theta must be >= -1, got {theta}")));
    }
    let nf = T::from_count(n);
    special::ln_gamma_q(T::half() * nf, T::half() * nf * (T::one() + theta))
}

/// `P(‖Z‖² > n σ² (1+θ))`, see [`ln_sphere_outage_prob`].
pub fn sphere_outage_prob<T: Real>(n: usize, theta: T) -> Result<T> {
    ln_sphere_outage_prob(n, theta).map(T::exp)
}

/// `ln` of the converse lower bound on the worst-case conditional cost,
///
/// `2 (1/2M)^α (Q(L / 2σM) - e^{-λn})`,
///
/// with `M` and the locus length `L` given by their logarithms. Returns
/// `-∞` when the bracket is not positive (the bound clamps to zero).
pub fn ln_converse_bound<T: Real>(
    ln_m: T,
    ln_locus: T,
    sigma: T,
    lambda: T,
    n: usize,
    alpha: T,
) -> T {
    let q_arg = (ln_locus - ln_m - (T::two() * sigma).ln()).exp();
    let outage = (-lambda * T::from_count(n)).exp();
    let bracket = q_function(q_arg) - outage;
    if !(bracket > T::zero()) {
        return T::neg_infinity();
    }
    T::LN_2() - alpha * (T::LN_2() + ln_m) + bracket.ln()
}

/// `ln M` for `M = ⌈L / (2σ s)⌉`, at least 1, with `L` given as `ln L`.
pub fn ln_codebook_size_for_locus<T: Real>(ln_locus: T, sigma: T, s: T) -> T {
    let ln_ratio = ln_locus - (T::two() * sigma * s).ln();
    // beyond 2^52 the ceiling is below the precision of the ratio itself
    if ln_ratio > T::lit(52.0) * T::LN_2() {
        ln_ratio
    } else {
        let ratio = ln_ratio.exp();
        // exp(ln x) may land one ulp above an integer x
        let nearest = ratio.round();
        let m = if (ratio - nearest).abs() <= T::lit(8.0) * T::epsilon() * nearest {
            nearest
        } else {
            ratio.ceil()
        };
        m.max(T::one()).ln()
    }
}

/// Converse lower bound `max(0, 2 ρ(1/2M) (Q(L/2σM) - e^{-λn}))` for
/// `ρ(t) = |t|^α`.
///
/// When `s_opt` is given, `M = ⌈L / (2σ s)⌉` replaces `m`.
pub fn converse_bound<T: Real>(
    m: u64,
    locus_len: T,
    sigma: T,
    lambda: T,
    n: usize,
    alpha: T,
    s_opt: Option<T>,
) -> T {
    let ln_locus = locus_len.ln();
    let ln_m = match s_opt {
        Some(s) => {
            let ratio = locus_len / (T::two() * sigma * s);
            if ratio.is_finite() {
                ratio.ceil().max(T::one()).ln()
            } else {
                ln_codebook_size_for_locus(ln_locus, sigma, s)
            }
        }
        None => T::from_u64(m.max(1)).expect("u64 representable").ln(),
    };
    ln_converse_bound(ln_m, ln_locus, sigma, lambda, n, alpha).exp()
}

/// `ln L_n*` with `L_n* = σ e^{n R(λ,γ)}`, the locus-length budget.
pub fn ln_locus_length_budget<T: Real>(p: &TradeoffParams<T>, sigma: T, n: usize) -> Result<T> {
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(domain(format!("sigma must be finite and > 0, got {sigma}")));
    }
    Ok(sigma.ln() + T::from_count(n) * rate_converse(p)?)
}

/// `L_n* = σ e^{n R(λ,γ)}`. Overflows to infinity for large `n R`; use
/// [`ln_locus_length_budget`] there.
pub fn locus_length_budget<T: Real>(p: &TradeoffParams<T>, sigma: T, n: usize) -> Result<T> {
    ln_locus_length_budget(p, sigma, n).map(T::exp)
}

/// `-(1/n) ln` of the converse bound evaluated at the budget `L = L_n*`
/// and `M = ⌈L_n* / (2σ s)⌉`. Tends to `α R(λ,γ)` as `n` grows.
pub fn converse_exponent_at_budget<T: Real>(
    p: &TradeoffParams<T>,
    sigma: T,
    n: usize,
    s: T,
) -> Result<T> {
    if !(s > T::zero()) {
        return Err(domain(format!("s must be > 0, got {s}")));
    }
    let ln_locus = ln_locus_length_budget(p, sigma, n)?;
    let ln_m = ln_codebook_size_for_locus(ln_locus, sigma, s);
    let ln_bound = ln_converse_bound(ln_m, ln_locus, sigma, p.lambda, n, p.alpha);
    Ok(-ln_bound / T::from_count(n))
}
