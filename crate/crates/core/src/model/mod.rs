//! Allocation model parameters and expectations over the random box load.
//!
//! A box `X` is drawn uniformly from `1..=N`; its weight is `q_X` and its
//! load is `ξ = n·q_X`. Every expectation here is a finite average over the
//! boxes, evaluated once per *distinct* weight with the weight's
//! multiplicity, so an equiprobable profile costs O(1) and a pair
//! expectation costs O(D²) for D distinct weights.

mod parse;

pub use parse::{parse_profile_spec, parse_profile_text, ProfileSpec};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Tolerance on `|Σq − 1|` accepted at construction.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A run of boxes sharing one bit-identical weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightGroup {
    pub weight: f64,
    pub multiplicity: usize,
}

/// Box probabilities `q₁ ≥ q₂ ≥ … ≥ q_N > 0` summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    weights: Vec<f64>,
    groups: Vec<WeightGroup>,
    uniform: bool,
}

impl WeightProfile {
    /// Validates and sorts (stable, non-increasing) a weight vector.
    ///
    /// Weights are never renormalized: a sum off by more than
    /// [`SUM_TOLERANCE`] is rejected.
    pub fn new(mut weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyList);
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w <= 0.0)
        {
            return Err(Error::NonPositiveWeight { index, value });
        }
        let sum: f64 = weights.iter().copied().collect::<CompensatedSum>().value();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::SumNotOne { sum });
        }
        weights.sort_by(|a, b| b.partial_cmp(a).expect("finite weights"));
        Ok(Self::from_sorted(weights, false))
    }

    /// All `N` weights exactly `1/N`.
    pub fn equiprobable(box_count: usize) -> Result<Self> {
        if box_count == 0 {
            return Err(Error::ZeroBoxes);
        }
        let w = 1.0 / box_count as f64;
        Ok(Self::from_sorted(vec![w; box_count], true))
    }

    /// `q_k ∝ k^{-s}` for `k = 1..=N`, normalized with a compensated sum and
    /// then validated like any other profile.
    pub fn power_law(box_count: usize, exponent: f64) -> Result<Self> {
        if box_count == 0 {
            return Err(Error::ZeroBoxes);
        }
        if !exponent.is_finite() {
            return Err(Error::Range(format!("power-law exponent {exponent}")));
        }
        if exponent == 0.0 {
            return Self::equiprobable(box_count);
        }
        let raw: Vec<f64> = (1..=box_count).map(|k| (k as f64).powf(-exponent)).collect();
        let total: f64 = raw.iter().copied().collect::<CompensatedSum>().value();
        Self::new(raw.into_iter().map(|w| w / total).collect())
    }

    fn from_sorted(weights: Vec<f64>, uniform: bool) -> Self {
        let mut groups: Vec<WeightGroup> = Vec::new();
        for &w in &weights {
            match groups.last_mut() {
                Some(g) if g.weight.to_bits() == w.to_bits() => g.multiplicity += 1,
                _ => groups.push(WeightGroup { weight: w, multiplicity: 1 }),
            }
        }
        let uniform = uniform || groups.len() == 1;
        Self { weights, groups, uniform }
    }

    pub fn box_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The largest weight `q₁`.
    pub fn largest(&self) -> f64 {
        self.weights[0]
    }

    pub fn groups(&self) -> &[WeightGroup] {
        &self.groups
    }

    pub fn is_equiprobable(&self) -> bool {
        self.uniform
    }
}

/// `n` balls thrown into the boxes of a [`WeightProfile`].
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationModel {
    ball_count: usize,
    profile: WeightProfile,
    alpha: f64,
    beta: f64,
    /// `ξ` value for each weight group.
    loads: Vec<f64>,
    /// `m_d / N` for each weight group.
    fractions: Vec<f64>,
}

impl AllocationModel {
    pub fn new(ball_count: usize, profile: WeightProfile) -> Self {
        let n = ball_count as f64;
        let big_n = profile.box_count() as f64;
        let alpha = n / big_n;
        // ξ ≡ α exactly for the equiprobable model.
        let (beta, loads) = if profile.is_equiprobable() {
            (alpha, vec![alpha])
        } else {
            (
                n * profile.largest(),
                profile.groups().iter().map(|g| n * g.weight).collect(),
            )
        };
        let fractions = profile
            .groups()
            .iter()
            .map(|g| g.multiplicity as f64 / big_n)
            .collect();
        Self { ball_count, profile, alpha, beta, loads, fractions }
    }

    pub fn ball_count(&self) -> usize {
        self.ball_count
    }

    pub fn box_count(&self) -> usize {
        self.profile.box_count()
    }

    pub fn profile(&self) -> &WeightProfile {
        &self.profile
    }

    /// Average load `α = n/N`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Maximal load `β = n·q₁`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn largest_weight(&self) -> f64 {
        self.profile.largest()
    }

    /// `E[f(ξ)] = N⁻¹ Σ_k f(n·q_k)`.
    pub fn e_xi<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        self.average(|i| {
            let x = self.loads[i];
            (x, f(x))
        })
    }

    /// `E[g(ξ, η)]` with `η` an independent copy of `ξ`; includes the
    /// diagonal `k = l`.
    pub fn e_xi_pair<G: Fn(f64, f64) -> f64>(&self, g: G) -> Result<f64> {
        self.pair_average(false, |i, j| {
            let (x, y) = (self.loads[i], self.loads[j]);
            (x, g(x, y))
        })
    }

    /// `E[f(q_X)]`.
    pub fn e_weight<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        let groups = self.profile.groups();
        self.average(|i| {
            let q = groups[i].weight;
            (q, f(q))
        })
    }

    /// `N⁻² Σ_{k,l} g(q_k, q_l)` over all ordered pairs.
    pub fn e_weight_pair<G: Fn(f64, f64) -> f64>(&self, g: G) -> Result<f64> {
        let groups = self.profile.groups();
        self.pair_average(false, |i, j| {
            let (p, q) = (groups[i].weight, groups[j].weight);
            (p, g(p, q))
        })
    }

    /// `N⁻² Σ_{k≠l} g(q_k, q_l)`: ordered pairs of distinct boxes.
    ///
    /// Equal to `E[g(q_X,q_Y)] − N⁻¹E[g(q_X,q_X)]` but summed directly, so
    /// no cancellation between the two expectations.
    pub fn e_weight_pair_distinct<G: Fn(f64, f64) -> f64>(&self, g: G) -> Result<f64> {
        let groups = self.profile.groups();
        self.pair_average(true, |i, j| {
            let (p, q) = (groups[i].weight, groups[j].weight);
            (p, g(p, q))
        })
    }

    fn average(&self, term: impl Fn(usize) -> (f64, f64)) -> Result<f64> {
        let mut acc = CompensatedSum::new();
        for (i, &frac) in self.fractions.iter().enumerate() {
            let (at, value) = term(i);
            check_finite(at, value)?;
            acc += frac * value;
        }
        Ok(acc.value())
    }

    fn pair_average(&self, distinct: bool, term: impl Fn(usize, usize) -> (f64, f64)) -> Result<f64> {
        let big_n = self.box_count() as f64;
        let groups = self.profile.groups();
        let mut acc = CompensatedSum::new();
        for (i, &fi) in self.fractions.iter().enumerate() {
            for (j, &fj) in self.fractions.iter().enumerate() {
                let weight = if distinct && i == j {
                    let m = groups[i].multiplicity as f64;
                    if m < 2.0 {
                        continue;
                    }
                    fi * ((m - 1.0) / big_n)
                } else {
                    fi * fj
                };
                let (at, value) = term(i, j);
                check_finite(at, value)?;
                acc += weight * value;
            }
        }
        Ok(acc.value())
    }
}

fn check_finite(at: f64, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteFunctional { at, value })
    }
}
