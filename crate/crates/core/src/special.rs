//! Poisson weights, falling-factorial and binomial-power remainders, and
//! log-domain combinatorics.
//!
//! Every quantity that is `n` (or `n²`) times a difference of nearly equal
//! numbers is evaluated through `ln_1p`/`exp_m1` factorizations or short
//! series, never by literal subtraction.

use std::sync::OnceLock;

use crate::error::{range_err, Error, Result};

/// Largest occupancy index accepted by the special functions.
pub const MAX_ORDER: usize = 1024;

const TABLE_LEN: usize = 2048;

fn log_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(TABLE_LEN);
        let mut acc = crate::numeric::CompensatedSum::new();
        table.push(0.0);
        for j in 1..TABLE_LEN {
            acc += (j as f64).ln();
            table.push(acc.value());
        }
        table
    })
}

/// `ln k!`. Tabulated below 2048, Stirling series above.
pub fn log_factorial(k: usize) -> f64 {
    if k < TABLE_LEN {
        return log_factorial_table()[k];
    }
    let x = k as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// `ln(n!/(n−r)!)`, accumulated as `r·ln n + Σ_{k<r} ln(1 − k/n)`.
pub fn log_falling(n: usize, r: usize) -> f64 {
    debug_assert!(r <= n);
    if r == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let mut acc = crate::numeric::CompensatedSum::new();
    for k in 1..r {
        acc += (-(k as f64) / nf).ln_1p();
    }
    r as f64 * nf.ln() + acc.value()
}

/// `ln C(n, r)`.
pub fn log_binomial(n: usize, r: usize) -> f64 {
    debug_assert!(r <= n);
    let k = r.min(n - r);
    log_falling(n, k) - log_factorial(k)
}

/// `ln (n! / (r! t! (n−r−t)!))`.
pub fn log_multinomial(n: usize, r: usize, t: usize) -> f64 {
    debug_assert!(r + t <= n);
    log_falling(n, r + t) - log_factorial(r) - log_factorial(t)
}

fn check_order(r: usize) -> Result<()> {
    if r > MAX_ORDER {
        Err(Error::FactorialOverflow(r))
    } else {
        Ok(())
    }
}

fn check_index(n: usize, r: usize) -> Result<()> {
    check_order(r)?;
    if n == 0 {
        return Err(range_err("n must be at least 1"));
    }
    if r > n {
        return Err(range_err(format!("r = {r} exceeds n = {n}")));
    }
    Ok(())
}

/// Poisson probability `p_r(x) = x^r e^{-x} / r!`.
pub fn poisson_weight(r: usize, x: f64) -> Result<f64> {
    check_order(r)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::NegativeInput(x));
    }
    if x == 0.0 {
        return Ok(if r == 0 { 1.0 } else { 0.0 });
    }
    Ok((r as f64 * x.ln() - x - log_factorial(r)).exp())
}

/// Unchecked Poisson weight for callers that already validated `r` and `x`.
pub(crate) fn pr(r: usize, x: f64) -> f64 {
    if x == 0.0 {
        if r == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        (r as f64 * x.ln() - x - log_factorial(r)).exp()
    }
}

/// `1 − Π_{j=1}^{k−1}(1 − j/n)` for `k = 1..r`, each without cancellation.
fn falling_deficits(n: usize, r: usize) -> impl Iterator<Item = (usize, f64)> {
    let nf = n as f64;
    let mut log_prod = 0.0;
    (1..r).map(move |k| {
        if k > 1 {
            log_prod += (-((k - 1) as f64) / nf).ln_1p();
        }
        (k, -log_prod.exp_m1())
    })
}

/// `φ_n(r)` defined by `n!/(n−r)! = n^r (1 − φ_n(r)/n)`.
pub fn varphi(n: usize, r: usize) -> Result<f64> {
    check_index(n, r)?;
    let nf = n as f64;
    let log_prod: f64 = (1..r).map(|k| (-(k as f64) / nf).ln_1p()).sum();
    Ok(-nf * log_prod.exp_m1())
}

/// `φ*_n(r) = n·(C(r,2) − φ_n(r))`.
///
/// Evaluated as `n Σ_{k<r} k·(1 − Π_{j<k}(1 − j/n))`, a sum of non-negative
/// terms.
pub fn varphi_star(n: usize, r: usize) -> Result<f64> {
    check_index(n, r)?;
    let sum: f64 = falling_deficits(n, r).map(|(k, d)| k as f64 * d).sum();
    Ok(n as f64 * sum)
}

/// `ln(1 − y) + y + y²/2`, accurate for small `y`.
fn log1m_tail(y: f64) -> f64 {
    if y < 0.25 {
        // −Σ_{k≥3} y^k / k
        let mut term = y * y * y;
        let mut sum: f64 = 0.0;
        let mut k = 3.0;
        while term > 1e-18 * sum.max(f64::MIN_POSITIVE) {
            sum += term / k;
            term *= y;
            k += 1.0;
        }
        -sum
    } else {
        (-y).ln_1p() + y + 0.5 * y * y
    }
}

/// `e^E − 1 − E`, accurate for small `E`.
fn expm1_tail(e: f64) -> f64 {
    if e.abs() < 0.5 {
        let mut term = 0.5 * e * e;
        let mut sum: f64 = 0.0;
        let mut k = 3.0;
        while term.abs() > 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
            sum += term;
            term *= e / k;
            k += 1.0;
        }
        sum
    } else {
        e.exp_m1() - e
    }
}

fn check_delta_args(n: usize, r: usize, x: f64) -> Result<()> {
    check_index(n, r)?;
    if x.is_nan() || x < 0.0 || x > n as f64 {
        return Err(range_err(format!("x = {x} outside [0, {n}]")));
    }
    Ok(())
}

/// `ln((1 − x/n)^{n−r}) + x`, or `None` when the base is zero.
fn binomial_power_exponent(n: usize, r: usize, x: f64) -> Option<f64> {
    let nf = n as f64;
    let y = x / nf;
    if n == r {
        return Some(x);
    }
    if y >= 1.0 {
        return None;
    }
    Some((n - r) as f64 * (log1m_tail(y) - 0.5 * y * y) + r as f64 * y)
}

/// `δ_n(r, x)` defined by `(1 − x/n)^{n−r} = e^{-x} + δ_n(r,x)/n`.
///
/// Defined for `0 ≤ x ≤ n`; its two-sided bounds are only certified on
/// `x ≤ n/2`.
pub fn delta(n: usize, r: usize, x: f64) -> Result<f64> {
    check_delta_args(n, r, x)?;
    let nf = n as f64;
    Ok(match binomial_power_exponent(n, r, x) {
        Some(e) => nf * (-x).exp() * e.exp_m1(),
        None => -nf * (-x).exp(),
    })
}

/// `δ*_n(r, x)` defined by `δ_n(r,x) = e^{-x}x(r − x/2) + δ*_n(r,x)/n`.
pub fn delta_star(n: usize, r: usize, x: f64) -> Result<f64> {
    check_delta_args(n, r, x)?;
    let nf = n as f64;
    let rf = r as f64;
    let y = x / nf;
    if n != r && y >= 1.0 {
        // zero base: δ = −n e^{-x}
        return Ok(nf * (-nf * (-x).exp() - (-x).exp() * x * (rf - 0.5 * x)));
    }
    let e = binomial_power_exponent(n, r, x).expect("non-zero base");
    // e^E − 1 − x(r − x/2)/n = [(n−r)·tail(y) + r y²/2] + [e^E − 1 − E]
    let head = if n == r {
        // E = x exactly, so E − x(r − x/2)/n = x²/(2n)
        0.5 * x * y
    } else {
        (n - r) as f64 * log1m_tail(y) + 0.5 * rf * y * y
    };
    Ok(nf * nf * (-x).exp() * (head + expm1_tail(e)))
}
