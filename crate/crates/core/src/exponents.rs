//! Scalar exponent calculus.
//!
//! The formulas are written once over [`Exponent`], so the same code runs in
//! `f64` and in exact rational arithmetic (`Ratio<i64>`).

use num_rational::Ratio;
use num_traits::{FromPrimitive, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Ordered field used by the exponent formulas.
pub trait Exponent: Signed + Copy + PartialOrd + FromPrimitive {
    fn int(v: i64) -> Self {
        Self::from_i64(v).expect("small integer")
    }

    fn half() -> Self {
        Self::one() / Self::int(2)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Exponent for f64 {}
impl Exponent for Ratio<i64> {}

/// `s(p) = ((n−1)/2)|1/2 − 1/p|`, parametrized by `1/p`.
pub fn s_p<T: Exponent>(n: usize, inv_p: T) -> T {
    T::int(n as i64 - 1) * T::half() * (T::half() - inv_p).abs()
}

/// `σ = 0` if `2s(p) < r/2`, else `2s(p) − r/2 + ε`.
pub fn sigma<T: Exponent>(n: usize, inv_p: T, r: T, eps: T) -> T {
    let two_s = T::int(2) * s_p(n, inv_p);
    if two_s < r * T::half() {
        T::zero()
    } else {
        two_s - r * T::half() + eps
    }
}

/// `(τ, γ)` from the three-case and two-case tables.
pub fn tau_gamma<T: Exponent>(n: usize, inv_p: T, r: T, eps: T) -> (T, T) {
    let two_s = T::int(2) * s_p(n, inv_p);
    let nm1 = T::int(n as i64 - 1);
    let tau = if r > nm1 {
        T::zero()
    } else if r == nm1 {
        eps
    } else {
        two_s * (T::one() - r / nm1)
    };
    let gamma = if r >= nm1 {
        T::half() + two_s / r
    } else {
        T::half() + two_s / nm1
    };
    (tau, gamma)
}

/// Case-table `ρ`: 0 if `2s(p) < (1−δ)r`, else `2s(p) − (1−δ)r + ε`.
pub fn rho<T: Exponent>(n: usize, inv_p: T, r: T, delta: T, eps: T) -> T {
    let two_s = T::int(2) * s_p(n, inv_p);
    let edge = (T::one() - delta) * r;
    if two_s < edge {
        T::zero()
    } else {
        two_s - edge + eps
    }
}

/// `max(0, σ − (1/2 − δ)r)`.
pub fn rho_max_formula<T: Exponent>(n: usize, inv_p: T, r: T, delta: T, eps: T) -> T {
    T::zero().max_of(sigma(n, inv_p, r, eps) - (T::half() - delta) * r)
}

/// `β = 1/2 + (2s(p) − σ)/r`.
pub fn beta<T: Exponent>(n: usize, inv_p: T, r: T, eps: T) -> T {
    T::half() + (T::int(2) * s_p(n, inv_p) - sigma(n, inv_p, r, eps)) / r
}

/// `τ − σ` as computed from the two definitions.
pub fn tau_minus_sigma<T: Exponent>(n: usize, inv_p: T, r: T, eps: T) -> T {
    tau_gamma(n, inv_p, r, eps).0 - sigma(n, inv_p, r, eps)
}

/// The closed-form comparison values: 0 for `r > n−1`, `ε` for `r = n−1`, and
/// for `r < n−1` either `(n−1−r)|1/2−1/p|` or `r(1/2−|1/2−1/p|) − ε`.
pub fn tau_minus_sigma_display<T: Exponent>(n: usize, inv_p: T, r: T, eps: T) -> T {
    let nm1 = T::int(n as i64 - 1);
    let dev = (T::half() - inv_p).abs();
    if r > nm1 {
        T::zero()
    } else if r == nm1 {
        eps
    } else if T::int(2) * s_p(n, inv_p) < r * T::half() {
        (nm1 - r) * dev
    } else {
        r * (T::half() - dev) - eps
    }
}

fn inv(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(invalid(format!("dimension must be at least 2, got {n}")))
    }
}

fn check_open_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("p must lie in (1, inf), got {p}")))
    }
}

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("r must be positive, got {r}")))
    }
}

fn check_eps(r: f64, eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= r / 2.0 {
        Ok(())
    } else {
        Err(invalid(format!("eps must lie in (0, r/2] = (0, {}], got {eps}", r / 2.0)))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if (0.0..=0.5).contains(&delta) {
        Ok(())
    } else {
        Err(invalid(format!("delta must lie in [0, 1/2], got {delta}")))
    }
}

/// `s(p)` for `p ∈ [1, ∞]`.
pub fn s_of_p(n: usize, p: f64) -> Result<f64> {
    check_dim(n)?;
    if !(p >= 1.0) {
        return Err(invalid(format!("p must be at least 1, got {p}")));
    }
    Ok(s_p(n, inv(p)))
}

pub fn sigma_exponent(n: usize, p: f64, r: f64, eps: f64) -> Result<f64> {
    check_dim(n)?;
    if !(p >= 1.0) {
        return Err(invalid(format!("p must be at least 1, got {p}")));
    }
    check_r(r)?;
    check_eps(r, eps)?;
    Ok(sigma(n, inv(p), r, eps))
}

pub fn tau_gamma_exponents(n: usize, p: f64, r: f64, eps: f64) -> Result<(f64, f64)> {
    check_dim(n)?;
    check_open_p(p)?;
    check_r(r)?;
    if !(eps > 0.0) {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    Ok(tau_gamma(n, inv(p), r, eps))
}

pub fn rho_exponent(n: usize, p: f64, r: f64, delta: f64, eps: f64) -> Result<f64> {
    check_delta(delta)?;
    sigma_exponent(n, p, r, eps)?;
    Ok(rho(n, inv(p), r, delta, eps))
}

/// Parameters of the interpolation between `p₀` and 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpParams {
    pub delta_prime: f64,
    /// `1 + δ′` for `p < 2`, its conjugate `(1 + δ′)/δ′` for `p > 2`.
    pub p0: f64,
    pub theta: f64,
    pub r0: f64,
    pub r1: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub beta: f64,
    /// `γ` evaluated at `(p₀, r₀)`.
    pub gamma0: f64,
    pub strip_valid: bool,
    pub beta_le_gamma: bool,
}

/// Largest admissible `δ′` before the strict constraints bind.
fn delta_prime_cap(p: f64, r: f64) -> f64 {
    let room = if p < 2.0 { p - 1.0 } else { 1.0 / (p - 1.0) };
    r.min(room)
}

fn interp_unchecked(n: usize, p: f64, r: f64, dp: f64, eps: f64) -> InterpParams {
    let p0 = if p < 2.0 { 1.0 + dp } else { (1.0 + dp) / dp };
    let one_minus_theta = (1.0 / p - 0.5) / (1.0 / p0 - 0.5);
    let theta = 1.0 - one_minus_theta;
    let r1 = dp;
    let r0 = (r - theta * dp) / one_minus_theta;
    let kappa = r0 - r1;
    let lambda = r - r0;
    let b = beta(n, 1.0 / p, r, eps);
    let (_, gamma0) = tau_gamma(n, 1.0 / p0, r0, eps);
    let strip_valid = if p < 2.0 { 1.0 + dp < p } else { p < p0 };
    InterpParams {
        delta_prime: dp,
        p0,
        theta,
        r0,
        r1,
        kappa,
        lambda,
        beta: b,
        gamma0,
        strip_valid,
        beta_le_gamma: b <= gamma0,
    }
}

/// `θ, r₀, r₁, κ, λ, β` for `p ≠ 2` and a strip parameter `δ′`.
pub fn interp_params(n: usize, p: f64, r: f64, delta_prime: f64, eps: f64) -> Result<InterpParams> {
    check_dim(n)?;
    check_open_p(p)?;
    check_r(r)?;
    check_eps(r, eps)?;
    if p == 2.0 {
        return Err(Error::Infeasible(
            "p = 2 needs no interpolation (theta would be 1)".into(),
        ));
    }
    if !(delta_prime > 0.0) {
        return Err(Error::Infeasible(format!("delta' > 0 violated: delta' = {delta_prime}")));
    }
    if !(delta_prime < r) {
        return Err(Error::Infeasible(format!(
            "delta' < r violated: delta' = {delta_prime}, r = {r}"
        )));
    }
    if p < 2.0 && !(1.0 + delta_prime < p) {
        return Err(Error::Infeasible(format!(
            "1 + delta' < p violated: delta' = {delta_prime}, p = {p}"
        )));
    }
    if p > 2.0 && !(1.0 + delta_prime < p / (p - 1.0)) {
        return Err(Error::Infeasible(format!(
            "1 + delta' < p' violated: delta' = {delta_prime}, p' = {}",
            p / (p - 1.0)
        )));
    }
    Ok(interp_unchecked(n, p, r, delta_prime, eps))
}

/// Largest `δ′` below the strict caps for which `β ≤ γ(p₀, r₀)` holds on the
/// whole interval `(0, δ′]`, located by bisection.
pub fn beta_gamma_threshold(n: usize, p: f64, r: f64, eps: f64) -> Result<f64> {
    check_dim(n)?;
    check_open_p(p)?;
    check_r(r)?;
    check_eps(r, eps)?;
    if p == 2.0 {
        return Err(Error::Infeasible("p = 2 needs no interpolation".into()));
    }
    let cap = delta_prime_cap(p, r);
    let ok = |dp: f64| interp_unchecked(n, p, r, dp, eps).beta_le_gamma;
    let hi_probe = cap * (1.0 - 1e-12);
    if ok(hi_probe) {
        return Ok(cap);
    }
    let mut lo = cap * 1e-9;
    if !ok(lo) {
        return Err(Error::Infeasible(format!(
            "beta <= gamma fails for every delta' down to {lo:e}"
        )));
    }
    let mut hi = hi_probe;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(lo)
}

/// Default strip parameter `δ′ = ½·min(r, p−1, threshold)` (with `p′` in
/// place of `p` when `p > 2`).
pub fn default_delta_prime(n: usize, p: f64, r: f64, eps: f64) -> Result<f64> {
    let threshold = beta_gamma_threshold(n, p, r, eps)?;
    Ok(0.5 * delta_prime_cap(p, r).min(threshold))
}

/// Admissible Sobolev range with the extra hypotheses that unlock endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevInterval {
    pub lo: f64,
    pub hi: f64,
    pub nonempty: bool,
    /// Upper endpoint `r − s(p)` is attained for symbols in `H^r_∞ S^m_{1,δ}`.
    pub hi_attained_for_hr_inf_symbols: bool,
    /// For `a ∈ H^r_∞(R^n)` (with `m = δ = 0`) the closed range extends down to this value.
    pub lo_for_hr_inf_functions: f64,
}

/// `(−r/2 + s(p) − σ, r − s(p))`.
pub fn sobolev_interval(n: usize, p: f64, r: f64, delta: f64, eps: f64) -> Result<SobolevInterval> {
    check_delta(delta)?;
    let s = s_of_p(n, p)?;
    let sig = sigma_exponent(n, p, r, eps)?;
    let lo = -r / 2.0 + s - sig;
    let hi = r - s;
    Ok(SobolevInterval {
        lo,
        hi,
        nonempty: lo < hi,
        hi_attained_for_hr_inf_symbols: true,
        lo_for_hr_inf_functions: -r / 2.0 - s - sig,
    })
}

/// Whether `4s(p) < r`.
pub fn thm11_applicable(n: usize, p: f64, r: f64) -> Result<bool> {
    Ok(4.0 * s_of_p(n, p)? < r)
}

/// The `p`-interval `{p : 4s(p) < r}` as `(p_lo, p_hi)`; `p_hi` may be infinite.
pub fn thm11_p_range(n: usize, r: f64) -> Result<(f64, f64)> {
    check_dim(n)?;
    check_r(r)?;
    // 2(n−1)|1/2 − 1/p| < r  ⇔  |1/2 − 1/p| < r/(2(n−1)).
    let d = r / (2.0 * (n as f64 - 1.0));
    let lo = 1.0 / (0.5 + d).min(1.0);
    let hi = if d >= 0.5 { f64::INFINITY } else { 1.0 / (0.5 - d) };
    Ok((lo, hi))
}

/// One row of the `τ − σ` comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub p: f64,
    pub sigma: f64,
    pub tau: f64,
    pub tau_minus_sigma: f64,
    pub display_value: f64,
}

pub fn comparison_report(n: usize, ps: &[f64], r: f64, eps: f64) -> Result<Vec<ComparisonRow>> {
    ps.iter()
        .map(|&p| {
            let sig = sigma_exponent(n, p, r, eps)?;
            let (tau, _) = tau_gamma_exponents(n, p, r, eps)?;
            Ok(ComparisonRow {
                p,
                sigma: sig,
                tau,
                tau_minus_sigma: tau - sig,
                display_value: tau_minus_sigma_display(n, 1.0 / p, r, eps),
            })
        })
        .collect()
}

/// Inputs of an exponent sheet; missing `ε` and `δ′` take their defaults.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheetInputs {
    pub n: usize,
    pub p: f64,
    pub r: f64,
    #[serde(default)]
    pub m: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub delta_prime: Option<f64>,
}

fn default_delta() -> f64 {
    0.5
}

/// Every scalar exponent at one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentSheet {
    pub n: usize,
    pub p: f64,
    pub r: f64,
    pub m: f64,
    pub delta: f64,
    pub eps: f64,
    pub s_p: f64,
    pub sigma: f64,
    pub tau: f64,
    pub gamma: f64,
    pub beta: f64,
    pub rho: f64,
    pub rho_max_formula: f64,
    pub tau_minus_sigma: f64,
    pub sobolev_lo: f64,
    pub sobolev_hi: f64,
    pub sobolev: SobolevInterval,
    pub thm11_applicable: bool,
    /// Interpolation data; absent at `p = 2`.
    pub interp: Option<InterpParams>,
    pub strip_valid: Option<bool>,
    pub beta_le_gamma: Option<bool>,
}

impl ExponentSheet {
    pub fn compute(inputs: &SheetInputs) -> Result<Self> {
        let SheetInputs { n, p, r, m, delta, .. } = *inputs;
        check_dim(n)?;
        check_open_p(p)?;
        check_r(r)?;
        check_delta(delta)?;
        let eps = inputs.eps.unwrap_or(0.01 * r);
        check_eps(r, eps)?;
        let (tau, gamma) = tau_gamma_exponents(n, p, r, eps)?;
        let sig = sigma_exponent(n, p, r, eps)?;
        let interval = sobolev_interval(n, p, r, delta, eps)?;
        let interp = if p == 2.0 {
            None
        } else {
            let dp = match inputs.delta_prime {
                Some(dp) => dp,
                None => default_delta_prime(n, p, r, eps)?,
            };
            Some(interp_params(n, p, r, dp, eps)?)
        };
        Ok(Self {
            n,
            p,
            r,
            m,
            delta,
            eps,
            s_p: s_of_p(n, p)?,
            sigma: sig,
            tau,
            gamma,
            beta: beta(n, 1.0 / p, r, eps),
            rho: rho(n, 1.0 / p, r, delta, eps),
            rho_max_formula: rho_max_formula(n, 1.0 / p, r, delta, eps),
            tau_minus_sigma: tau - sig,
            sobolev_lo: interval.lo,
            sobolev_hi: interval.hi,
            sobolev: interval,
            thm11_applicable: thm11_applicable(n, p, r)?,
            strip_valid: interp.map(|i| i.strip_valid),
            beta_le_gamma: interp.map(|i| i.beta_le_gamma),
            interp,
        })
    }
}
