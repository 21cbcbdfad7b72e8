//! Order-`1/n` expansions of the occupancy moments and the two-sided
//! bounds on their remainders.
//!
//! A remainder is always *extracted*: the exact moment minus the expansion,
//! scaled by `n²` (or by `n` for the leading-order mean remainder `R₀`).
//! The bound functions are then checked against those extracted values.
//! Bounds are certified only when `q₁ ≤ 1/4`; outside that region every
//! report carries `applicable = false` and the numbers are informational.

use std::fmt;

use crate::error::{range_err, Error, Result};
use crate::exact::{exact_covariance, exact_mean, exact_variance};
use crate::model::AllocationModel;
use crate::special::{log_factorial, pr, MAX_ORDER};

/// Largest weight for which the remainder bounds hold.
pub const APPLICABILITY_LIMIT: f64 = 0.25;

/// Relative slack used when testing a remainder against its interval.
pub const BOUND_SLACK: f64 = 1e-8;

/// `leading + correction + remainder_scale·R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxExpansion {
    pub leading: f64,
    /// The order-`1/n` term, already divided by `n`.
    pub correction: f64,
    /// `n⁻²`.
    pub remainder_scale: f64,
}

impl ApproxExpansion {
    pub fn value(&self) -> f64 {
        self.leading + self.correction
    }
}

fn check_model_index(model: &AllocationModel, r: usize) -> Result<()> {
    let n = model.ball_count();
    if n == 0 {
        return Err(range_err("expansions need n ≥ 1"));
    }
    if r > MAX_ORDER {
        return Err(Error::FactorialOverflow(r));
    }
    if r > n {
        return Err(range_err(format!("r = {r} exceeds n = {n}")));
    }
    Ok(())
}

fn scale(model: &AllocationModel) -> f64 {
    let n = model.ball_count() as f64;
    1.0 / (n * n)
}

/// `E[q̂_r] ≈ E[p_r(ξ)] + (2n)⁻¹E[p_r(ξ)(r − (ξ−r)²)]`.
pub fn mean_expansion(model: &AllocationModel, r: usize) -> Result<ApproxExpansion> {
    check_model_index(model, r)?;
    let n = model.ball_count() as f64;
    let rf = r as f64;
    let leading = model.e_xi(|x| pr(r, x))?;
    let j = model.e_xi(|x| pr(r, x) * (rf - (x - rf).powi(2)))?;
    Ok(ApproxExpansion { leading, correction: j / (2.0 * n), remainder_scale: scale(model) })
}

/// `E[p_r(ξ)(ξ − r)]`.
fn tilted(model: &AllocationModel, r: usize) -> Result<f64> {
    let rf = r as f64;
    model.e_xi(|x| pr(r, x) * (x - rf))
}

/// `V[q̂_r] ≈ n⁻¹(α E[p_r(ξ)(1 − p_r(ξ))] − E[p_r(ξ)(ξ − r)]²)`.
pub fn variance_expansion(model: &AllocationModel, r: usize) -> Result<ApproxExpansion> {
    check_model_index(model, r)?;
    let n = model.ball_count() as f64;
    let spread = model.e_xi(|x| {
        let p = pr(r, x);
        p * (1.0 - p)
    })?;
    let tilt = tilted(model, r)?;
    Ok(ApproxExpansion {
        leading: 0.0,
        correction: (model.alpha() * spread - tilt * tilt) / n,
        remainder_scale: scale(model),
    })
}

/// `C[q̂_r, q̂_t] ≈ −n⁻¹(α E[p_r(ξ)p_t(ξ)] + E[p_r(ξ)(ξ−r)]·E[p_t(ξ)(ξ−t)])`.
pub fn covariance_expansion(model: &AllocationModel, r: usize, t: usize) -> Result<ApproxExpansion> {
    if r == t {
        return Err(Error::EqualIndices(r));
    }
    check_model_index(model, r)?;
    check_model_index(model, t)?;
    let n = model.ball_count() as f64;
    let joint = model.e_xi(|x| pr(r, x) * pr(t, x))?;
    let cross = tilted(model, r)? * tilted(model, t)?;
    Ok(ApproxExpansion {
        leading: 0.0,
        correction: -(model.alpha() * joint + cross) / n,
        remainder_scale: scale(model),
    })
}

/// `R₁(n,r) = n²(E[q̂_r] − expansion)`.
pub fn residual_r1(model: &AllocationModel, r: usize) -> Result<f64> {
    let e = mean_expansion(model, r)?;
    let n = model.ball_count() as f64;
    Ok(n * n * ((exact_mean(model, r)? - e.leading) - e.correction))
}

/// `R₀(n,r) = n(E[q̂_r] − E[p_r(ξ)])`.
pub fn r0_residual(model: &AllocationModel, r: usize) -> Result<f64> {
    check_model_index(model, r)?;
    let n = model.ball_count() as f64;
    let leading = model.e_xi(|x| pr(r, x))?;
    Ok(n * (exact_mean(model, r)? - leading))
}

/// `R₂(n,r,t) = n²(C[q̂_r,q̂_t] − expansion)` for `r ≠ t`.
pub fn residual_r2_cov(model: &AllocationModel, r: usize, t: usize) -> Result<f64> {
    let e = covariance_expansion(model, r, t)?;
    let n = model.ball_count() as f64;
    Ok(n * n * (exact_covariance(model, r, t)? - e.correction))
}

/// The combined variance remainder `R₂(n,r,r) + α·R₁(n,r)`.
pub fn residual_r2_var(model: &AllocationModel, r: usize) -> Result<f64> {
    let e = variance_expansion(model, r)?;
    let n = model.ball_count() as f64;
    Ok(n * n * (exact_variance(model, r)? - e.correction))
}

fn check_bound_args(orders: &[usize], beta: f64) -> Result<()> {
    if let Some(&r) = orders.iter().find(|&&r| r > MAX_ORDER) {
        return Err(Error::FactorialOverflow(r));
    }
    if !beta.is_finite() || beta <= 0.0 {
        return Err(range_err(format!("beta = {beta} must be positive")));
    }
    Ok(())
}

fn ln_or_skip(k: usize) -> Option<f64> {
    (k > 0).then(|| (k as f64).ln())
}

/// `Σ exp(log_prefactor + term)` over log-domain terms.
fn scaled_sum(log_prefactor: f64, log_terms: &[Option<f64>]) -> f64 {
    log_terms
        .iter()
        .flatten()
        .map(|t| (log_prefactor + t).exp())
        .sum()
}

/// `ln(β^k / (r! t!))`.
fn log_prefactor(k: usize, beta: f64, r: usize, t: usize) -> f64 {
    let pow = if k == 0 { 0.0 } else { k as f64 * beta.ln() };
    pow - log_factorial(r) - log_factorial(t)
}

/// Interval for `R₁(n,r)`:
/// `[−β^r(r³2^{r−1} + 4)/r!, β^r r²(2r² + 4β²)/r!]`.
pub fn r1_bounds(r: usize, beta: f64) -> Result<(f64, f64)> {
    check_bound_args(&[r], beta)?;
    let lp = log_prefactor(r, beta, r, 0);
    let ln2 = std::f64::consts::LN_2;
    let ln_r = ln_or_skip(r);
    let lower = scaled_sum(
        lp,
        &[ln_r.map(|l| 3.0 * l + (r as f64 - 1.0) * ln2), Some(4f64.ln())],
    );
    let upper = scaled_sum(
        lp,
        &[
            ln_r.map(|l| ln2 + 4.0 * l),
            ln_r.map(|l| 4f64.ln() + 2.0 * l + 2.0 * beta.ln()),
        ],
    );
    Ok((-lower, upper))
}

/// Interval for `R₀(n,r)`: `[−β^r(r² + 2)/r!, r(2β)^r/r!]`.
pub fn r0_bounds(r: usize, beta: f64) -> Result<(f64, f64)> {
    check_bound_args(&[r], beta)?;
    let lp = log_prefactor(r, beta, r, 0);
    let ln_r = ln_or_skip(r);
    let lower = scaled_sum(lp, &[ln_r.map(|l| 2.0 * l), Some(2f64.ln())]);
    let upper = scaled_sum(
        lp,
        &[ln_r.map(|l| l + r as f64 * std::f64::consts::LN_2)],
    );
    Ok((-lower, upper))
}

/// `L₂(u, β) = 12 + 2β + 5(u³ + β)2^u + β²(u² + 1)`.
pub fn l2(u: usize, beta: f64) -> f64 {
    let uf = u as f64;
    12.0 + 2.0 * beta + 5.0 * (uf.powi(3) + beta) * 2f64.powf(uf) + beta * beta * (uf * uf + 1.0)
}

/// `K₂(u, β) = 8 + 12u³2^u + 4βu + β²2^{2u+6}u²`.
pub fn k2(u: usize, beta: f64) -> f64 {
    let uf = u as f64;
    8.0 + 12.0 * uf.powi(3) * 2f64.powf(uf) + 4.0 * beta * uf + beta * beta * 2f64.powf(2.0 * uf + 6.0) * uf * uf
}

/// Interval for `R₂(n,r,t)`:
/// `[−β^{2u}L₂(u,β)/(r!t!), β^{2u}K₂(u,β)/(r!t!)]`, `u = max(r,t)`.
///
/// Each polynomial term is folded into the log-domain prefactor, so large
/// `u` neither overflows `2^{2u}` nor underflows `β^{2u}` prematurely.
pub fn r2_bounds(r: usize, t: usize, beta: f64) -> Result<(f64, f64)> {
    check_bound_args(&[r, t], beta)?;
    let u = r.max(t);
    let lp = log_prefactor(2 * u, beta, r, t);
    let ln2 = std::f64::consts::LN_2;
    let lb = beta.ln();
    let uf = u as f64;
    let ln_u = ln_or_skip(u);
    let lower = scaled_sum(
        lp,
        &[
            Some(12f64.ln()),
            Some(2f64.ln() + lb),
            ln_u.map(|l| 5f64.ln() + 3.0 * l + uf * ln2),
            Some(5f64.ln() + lb + uf * ln2),
            ln_u.map(|l| 2.0 * lb + 2.0 * l),
            Some(2.0 * lb),
        ],
    );
    let upper = scaled_sum(
        lp,
        &[
            Some(8f64.ln()),
            ln_u.map(|l| 12f64.ln() + 3.0 * l + uf * ln2),
            ln_u.map(|l| 4f64.ln() + lb + l),
            ln_u.map(|l| 2.0 * lb + (2.0 * uf + 6.0) * ln2 + 2.0 * l),
        ],
    );
    Ok((-lower, upper))
}

/// Interval for `R₂(n,r,r) + α·R₁(n,r)`, by interval addition.
pub fn variance_remainder_bounds(r: usize, alpha: f64, beta: f64) -> Result<(f64, f64)> {
    let (l2, u2) = r2_bounds(r, r, beta)?;
    let (l1, u1) = r1_bounds(r, beta)?;
    Ok((l2 + alpha * l1, u2 + alpha * u1))
}

/// A remainder together with its certified interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub remainder: f64,
    pub lower: f64,
    pub upper: f64,
    /// `q₁ ≤ 1/4`.
    pub applicable: bool,
    /// `lower − slack ≤ remainder ≤ upper + slack`, slack =
    /// `1e-8·max(1, |lower|, |upper|)`.
    pub satisfied: bool,
}

impl BoundReport {
    pub fn new(remainder: f64, (lower, upper): (f64, f64), applicable: bool) -> Self {
        let slack = BOUND_SLACK * 1f64.max(lower.abs()).max(upper.abs());
        let satisfied = remainder >= lower - slack && remainder <= upper + slack;
        Self { remainder, lower, upper, applicable, satisfied }
    }

    /// An applicable bound that does not hold.
    pub fn violated(&self) -> bool {
        self.applicable && !self.satisfied
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// `R₀(n,r)`, the leading-order mean remainder.
    R0,
    /// `R₁(n,r)`, the mean remainder.
    R1,
    /// `R₂(n,r,t)`, the covariance remainder.
    R2Cov,
    /// `R₂(n,r,r) + α R₁(n,r)`, the variance remainder.
    R2Var,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::R0 => "R0",
            BoundKind::R1 => "R1",
            BoundKind::R2Cov => "R2_cov",
            BoundKind::R2Var => "R2_var",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn is_applicable(model: &AllocationModel) -> bool {
    model.largest_weight() <= APPLICABILITY_LIMIT
}

/// Extracts the requested remainder and checks it against its interval.
/// `t` is only read for [`BoundKind::R2Cov`].
pub fn bound_report(model: &AllocationModel, kind: BoundKind, r: usize, t: usize) -> Result<BoundReport> {
    let beta = model.beta();
    let applicable = is_applicable(model);
    let (remainder, interval) = match kind {
        BoundKind::R0 => (r0_residual(model, r)?, r0_bounds(r, beta)?),
        BoundKind::R1 => (residual_r1(model, r)?, r1_bounds(r, beta)?),
        BoundKind::R2Cov => (residual_r2_cov(model, r, t)?, r2_bounds(r, t, beta)?),
        BoundKind::R2Var => (
            residual_r2_var(model, r)?,
            variance_remainder_bounds(r, model.alpha(), beta)?,
        ),
    };
    Ok(BoundReport::new(remainder, interval, applicable))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeTarget {
    Mean,
    Variance,
}

/// Closed-form approximation of `E[q̂₀]` or `V[q̂₀]` for the equiprobable
/// model with the band that `exact − approximation` must lie in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub approximation: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn equiprobable_envelope(n: usize, box_count: usize, which: EnvelopeTarget) -> Result<Envelope> {
    if box_count < 4 {
        return Err(Error::Applicability { q1: 1.0 / box_count as f64, limit: APPLICABILITY_LIMIT });
    }
    if n == 0 {
        return Err(range_err("envelope needs n ≥ 1"));
    }
    let nf = n as f64;
    let a = nf / box_count as f64;
    let e1 = (-a).exp();
    let e2 = (-2.0 * a).exp();
    Ok(match which {
        EnvelopeTarget::Mean => Envelope {
            approximation: e1 - 0.5 * a * a * e1 / nf,
            lower: -4.0 / (nf * nf),
            upper: 0.0,
        },
        EnvelopeTarget::Variance => Envelope {
            approximation: (a * e1 - a * e2 - a * a * e2) / nf,
            lower: -(a * a + 11.0 * a + 12.0) / (nf * nf),
            upper: 8.0 / (nf * nf),
        },
    })
}

/// `n` above which the mean band `4n⁻²` is narrower than the correction
/// `½n⁻¹α²e^{−α}`: `n > 8α⁻²e^{α}`.
pub fn informativeness_threshold(alpha: f64) -> f64 {
    8.0 * alpha.exp() / (alpha * alpha)
}
