//! Exact finite-`n` moments of the occupancy proportions `q̂_r = N̂_r / N`.
//!
//! Means, variances and covariances are finite sums over boxes (and
//! ordered pairs of distinct boxes) of multinomial cell probabilities,
//! each term evaluated in log space and then compensated-summed.
//! [`brute_force_moments`] enumerates every count vector and serves as
//! an independent oracle on small models.

use std::collections::BTreeMap;

use crate::error::{range_err, Error, Result};
use crate::model::AllocationModel;
use crate::numeric::CompensatedSum;
use crate::special::{self, log_binomial, log_factorial, log_multinomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentKind {
    Exact,
    Approx,
}

/// First and second moments of `q̂_r` for a set of indices.
#[derive(Debug, Clone)]
pub struct MomentSet {
    pub model: AllocationModel,
    pub indices: Vec<usize>,
    pub means: BTreeMap<usize, f64>,
    pub variances: BTreeMap<usize, f64>,
    /// Keyed by `(r, t)` with `r < t`.
    pub covariances: BTreeMap<(usize, usize), f64>,
    pub kind: MomentKind,
}

impl MomentSet {
    pub fn covariance(&self, r: usize, t: usize) -> Option<f64> {
        if r == t {
            return self.variances.get(&r).copied();
        }
        self.covariances.get(&(r.min(t), r.max(t))).copied()
    }
}

/// `k·ln y` with `0·ln 0 = 0`.
fn xlogy(k: usize, y: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * y.ln()
    }
}

/// `m·ln(1 − s)` for `s ≥ 0`, with the positive part applied: `None` when
/// `1 − s ≤ 0` and `m > 0` (the term vanishes), `0⁰ = 1` when `m = 0`.
fn log_positive_part_power(m: usize, s: f64) -> Option<f64> {
    if m == 0 {
        Some(0.0)
    } else if s >= 1.0 {
        None
    } else {
        Some(m as f64 * (-s).ln_1p())
    }
}

fn check_r(model: &AllocationModel, r: usize) -> Result<()> {
    let n = model.ball_count();
    if r > n {
        Err(range_err(format!("r = {r} exceeds n = {n}")))
    } else {
        Ok(())
    }
}

/// `E[q̂_r] = C(n,r)·E[q_X^r (1 − q_X)^{n−r}]`.
pub fn exact_mean(model: &AllocationModel, r: usize) -> Result<f64> {
    check_r(model, r)?;
    let n = model.ball_count();
    let log_c = log_binomial(n, r);
    model.e_weight(|q| match log_positive_part_power(n - r, q) {
        Some(tail) => (log_c + xlogy(r, q) + tail).exp(),
        None => 0.0,
    })
}

/// `C(n; r, t, n−r−t)·N⁻²Σ_{k≠l} q_k^r q_l^t (1 − q_k − q_l)_+^{n−r−t}`,
/// i.e. `E[q̂_r q̂_t]` less the same-box contribution.
fn distinct_pair_term(model: &AllocationModel, r: usize, t: usize) -> Result<f64> {
    let n = model.ball_count();
    debug_assert!(r + t <= n);
    let m = n - r - t;
    let log_c = log_multinomial(n, r, t);
    model.e_weight_pair_distinct(|p, q| match log_positive_part_power(m, p + q) {
        Some(tail) => (log_c + xlogy(r, p) + xlogy(t, q) + tail).exp(),
        None => 0.0,
    })
}

/// `Φ_n(r, t)`; requires `r + t ≤ n`.
pub fn phi(model: &AllocationModel, r: usize, t: usize) -> Result<f64> {
    let n = model.ball_count();
    if r + t > n {
        return Err(range_err(format!("r + t = {} exceeds n = {n}", r + t)));
    }
    let pair = distinct_pair_term(model, r, t)?;
    Ok(pair - exact_mean(model, r)? * exact_mean(model, t)?)
}

/// `V[q̂_r] = Φ_n(r,r) + N⁻¹E[q̂_r]`.
///
/// When `2r > n` no two boxes can both hold `r` balls and the pair term is
/// zero. For `r > n`, `q̂_r ≡ 0` and the variance is zero.
pub fn exact_variance(model: &AllocationModel, r: usize) -> Result<f64> {
    let n = model.ball_count();
    if r > n {
        return Ok(0.0);
    }
    let mean = exact_mean(model, r)?;
    let pair = if 2 * r <= n { distinct_pair_term(model, r, r)? } else { 0.0 };
    Ok(pair + mean / model.box_count() as f64 - mean * mean)
}

/// `C[q̂_r, q̂_t] = Φ_n(r, t)` for `r ≠ t`, with a zero pair term when
/// `r + t > n`.
pub fn exact_covariance(model: &AllocationModel, r: usize, t: usize) -> Result<f64> {
    if r == t {
        return Err(Error::EqualIndices(r));
    }
    check_r(model, r)?;
    check_r(model, t)?;
    let pair = if r + t <= model.ball_count() {
        distinct_pair_term(model, r, t)?
    } else {
        0.0
    };
    Ok(pair - exact_mean(model, r)? * exact_mean(model, t)?)
}

/// Exact moments for the given indices, with covariances for every pair.
pub fn exact_moments(model: &AllocationModel, indices: &[usize]) -> Result<MomentSet> {
    let mut means = BTreeMap::new();
    let mut variances = BTreeMap::new();
    let mut covariances = BTreeMap::new();
    for &r in indices {
        means.insert(r, exact_mean(model, r)?);
        variances.insert(r, exact_variance(model, r)?);
    }
    for (i, &r) in indices.iter().enumerate() {
        for &t in &indices[i + 1..] {
            if r != t {
                covariances.insert((r.min(t), r.max(t)), exact_covariance(model, r, t)?);
            }
        }
    }
    Ok(MomentSet {
        model: model.clone(),
        indices: indices.to_vec(),
        means,
        variances,
        covariances,
        kind: MomentKind::Exact,
    })
}

fn check_q_functional(model: &AllocationModel, r: usize, t: usize) -> Result<()> {
    let n = model.ball_count();
    if r + t > n {
        return Err(range_err(format!("r + t = {} exceeds n = {n}", r + t)));
    }
    if r + t > special::MAX_ORDER {
        return Err(Error::FactorialOverflow(r + t));
    }
    let q1 = model.largest_weight();
    if q1 > 0.5 {
        return Err(Error::Applicability { q1, limit: 0.5 });
    }
    Ok(())
}

/// `Q_n(r,t) = (r!t!)⁻¹ E[ξ^r η^t (1 − q_X − q_Y)^{n−r−t}]`, `q₁ ≤ 1/2`.
pub fn q_functional(model: &AllocationModel, r: usize, t: usize) -> Result<f64> {
    check_q_functional(model, r, t)?;
    let n = model.ball_count();
    let nf = n as f64;
    let m = n - r - t;
    let log_norm = log_factorial(r) + log_factorial(t);
    model.e_weight_pair(|p, q| match log_positive_part_power(m, p + q) {
        Some(tail) => (xlogy(r, nf * p) + xlogy(t, nf * q) + tail - log_norm).exp(),
        None => 0.0,
    })
}

/// The other side of the `Q_n` identity:
/// `E[p_r(ξ)]E[p_t(ξ)] + n⁻¹(r!t!)⁻¹E[ξ^r η^t δ_n(r+t, ξ+η)]`.
pub fn q_functional_via_delta(model: &AllocationModel, r: usize, t: usize) -> Result<f64> {
    check_q_functional(model, r, t)?;
    let n = model.ball_count();
    if n == 0 {
        return Err(range_err("n must be at least 1"));
    }
    let leading = model.e_xi(|x| special::pr(r, x))? * model.e_xi(|x| special::pr(t, x))?;
    let log_norm = log_factorial(r) + log_factorial(t);
    let failure = std::cell::RefCell::new(None);
    let correction = model.e_xi_pair(|x, y| {
        let s = (x + y).min(n as f64);
        match special::delta(n, r + t, s) {
            Ok(d) => (xlogy(r, x) + xlogy(t, y) - log_norm).exp() * d,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                0.0
            }
        }
    });
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(leading + correction? / n as f64)
}

/// Enumeration limit for [`brute_force_moments`].
pub const ENUMERATION_LIMIT: f64 = 2e6;

/// Raw occupancy moments accumulated by full enumeration.
#[derive(Debug, Clone)]
pub struct RawOccupancyMoments {
    pub ball_count: usize,
    /// Σ of multinomial probabilities over all count vectors.
    pub total_probability: f64,
    /// `powers[k][r] = E[q̂_r^{k+1}]`, `k = 0..4`.
    pub powers: [Vec<f64>; 4],
    /// `cross[r][t] = E[q̂_r q̂_t]`.
    pub cross: Vec<Vec<f64>>,
}

impl RawOccupancyMoments {
    /// `E[(q̂_r − E q̂_r)⁴]`.
    pub fn fourth_central(&self, r: usize) -> f64 {
        let m1 = self.powers[0][r];
        let (m2, m3, m4) = (self.powers[1][r], self.powers[2][r], self.powers[3][r]);
        m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4)
    }
}

/// Enumerates all `C(n+N−1, N−1)` count vectors.
pub fn brute_force_raw_moments(model: &AllocationModel) -> Result<RawOccupancyMoments> {
    let n = model.ball_count();
    let big_n = model.box_count();
    let count = log_binomial(n + big_n - 1, big_n - 1).exp();
    if count > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { count, limit: ENUMERATION_LIMIT });
    }
    let matrix = ((n + 1) * (n + 1)) as f64;
    if matrix > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { count: matrix, limit: ENUMERATION_LIMIT });
    }

    let log_q: Vec<f64> = model.profile().weights().iter().map(|q| q.ln()).collect();
    let mut state = Enumeration {
        n,
        big_n,
        log_q,
        counts: vec![0; big_n],
        total: CompensatedSum::new(),
        powers: std::array::from_fn(|_| vec![CompensatedSum::new(); n + 1]),
        cross: vec![vec![CompensatedSum::new(); n + 1]; n + 1],
        occupancy: vec![0; n + 1],
    };
    state.visit(0, n, log_factorial(n));

    let value = |v: &Vec<CompensatedSum>| v.iter().map(|s| s.value()).collect::<Vec<_>>();
    Ok(RawOccupancyMoments {
        ball_count: n,
        total_probability: state.total.value(),
        powers: std::array::from_fn(|k| value(&state.powers[k])),
        cross: state.cross.iter().map(value).collect(),
    })
}

struct Enumeration {
    n: usize,
    big_n: usize,
    log_q: Vec<f64>,
    counts: Vec<usize>,
    total: CompensatedSum,
    powers: [Vec<CompensatedSum>; 4],
    cross: Vec<Vec<CompensatedSum>>,
    occupancy: Vec<usize>,
}

impl Enumeration {
    fn visit(&mut self, k: usize, remaining: usize, log_p: f64) {
        let last = k + 1 == self.big_n;
        let range = if last { remaining..=remaining } else { 0..=remaining };
        for c in range {
            self.counts[k] = c;
            let log_p = log_p + c as f64 * self.log_q[k] - log_factorial(c);
            if last {
                self.leaf(log_p.exp());
            } else {
                self.visit(k + 1, remaining - c, log_p);
            }
        }
    }

    fn leaf(&mut self, p: f64) {
        debug_assert_eq!(self.counts.iter().sum::<usize>(), self.n);
        self.total += p;
        for &c in &self.counts {
            self.occupancy[c] += 1;
        }
        let big_n = self.big_n as f64;
        let present: Vec<(usize, f64)> = {
            let mut seen: Vec<usize> = self.counts.clone();
            seen.sort_unstable();
            seen.dedup();
            seen.into_iter().map(|r| (r, self.occupancy[r] as f64 / big_n)).collect()
        };
        for &(r, x) in &present {
            let mut xp = x;
            for k in 0..4 {
                self.powers[k][r] += p * xp;
                xp *= x;
            }
            for &(t, y) in &present {
                self.cross[r][t] += p * x * y;
            }
        }
        for &c in &self.counts {
            self.occupancy[c] = 0;
        }
    }
}

/// Exact moments of every `q̂_r`, `r = 0..=n`, by enumeration.
pub fn brute_force_moments(model: &AllocationModel) -> Result<MomentSet> {
    let raw = brute_force_raw_moments(model)?;
    let n = model.ball_count();
    let mean = &raw.powers[0];
    let mut means = BTreeMap::new();
    let mut variances = BTreeMap::new();
    let mut covariances = BTreeMap::new();
    for r in 0..=n {
        means.insert(r, mean[r]);
        variances.insert(r, raw.cross[r][r] - mean[r] * mean[r]);
        for t in r + 1..=n {
            covariances.insert((r, t), raw.cross[r][t] - mean[r] * mean[t]);
        }
    }
    Ok(MomentSet {
        model: model.clone(),
        indices: (0..=n).collect(),
        means,
        variances,
        covariances,
        kind: MomentKind::Exact,
    })
}
