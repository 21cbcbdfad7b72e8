//! Reproducible Monte Carlo simulation of the allocation model.
//!
//! Replicates are grouped into fixed-size chunks. Each chunk is
//! accumulated sequentially and chunks are merged in index order, so the
//! summary is bit-identical for any worker count.

mod accum;
mod alias;
mod rng;

pub use accum::MomentAccumulator;
pub use alias::AliasTable;
pub use rng::{replicate_stream, StreamRng};

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::approx::{
    equiprobable_envelope, is_applicable, mean_expansion, r1_bounds, variance_expansion,
    variance_remainder_bounds, EnvelopeTarget,
};
use crate::error::{range_err, Error, Result};
use crate::exact::{exact_mean, exact_variance};
use crate::model::{AllocationModel, WeightProfile};
use crate::numeric::CompensatedSum;

/// Replicates per deterministic work item.
pub const CHUNK_SIZE: u64 = 1024;

/// Default replicate count, matching the 50,000-run figure protocol.
pub const DEFAULT_REPLICATES: u64 = 50_000;

/// Draws one multinomial count vector.
///
/// With at least as many balls as boxes, box `k` receives
/// `Binomial(remaining, q_k / Σ_{j≥k} q_j)` in turn. With fewer balls than
/// boxes, each ball picks its box from an alias table. Either way the cost
/// is `O(min(n, N))` draws per replicate on top of `O(N)` setup.
#[derive(Debug, Clone)]
pub enum Sampler {
    ConditionalBinomial { conditional: Vec<f64> },
    PerBall(AliasTable),
}

impl Sampler {
    pub fn for_model(model: &AllocationModel) -> Self {
        let weights = model.profile().weights();
        if model.box_count() <= model.ball_count() {
            let mut suffix = vec![0.0; weights.len()];
            let mut acc = CompensatedSum::new();
            for k in (0..weights.len()).rev() {
                acc += weights[k];
                suffix[k] = acc.value();
            }
            let conditional = weights
                .iter()
                .zip(&suffix)
                .map(|(q, s)| (q / s).clamp(0.0, 1.0))
                .collect();
            Sampler::ConditionalBinomial { conditional }
        } else {
            Sampler::PerBall(AliasTable::new(weights))
        }
    }

    /// Fills `counts` (length `N`) with one allocation of `n` balls.
    pub fn sample_into<R: Rng + ?Sized>(&self, n: usize, rng: &mut R, counts: &mut [u64]) {
        counts.fill(0);
        match self {
            Sampler::ConditionalBinomial { conditional } => {
                let last = counts.len() - 1;
                let mut remaining = n as u64;
                for (k, &p) in conditional[..last].iter().enumerate() {
                    if remaining == 0 {
                        break;
                    }
                    let c = Binomial::new(remaining, p)
                        .expect("conditional probability in [0, 1]")
                        .sample(rng);
                    counts[k] = c;
                    remaining -= c;
                }
                counts[last] += remaining;
            }
            Sampler::PerBall(table) => {
                for _ in 0..n {
                    counts[table.sample(rng)] += 1;
                }
            }
        }
        debug_assert_eq!(counts.iter().sum::<u64>(), n as u64);
    }
}

/// One multinomial allocation of the model's balls.
pub fn sample_allocation<R: Rng + ?Sized>(model: &AllocationModel, rng: &mut R) -> Vec<u64> {
    let mut counts = vec![0; model.box_count()];
    Sampler::for_model(model).sample_into(model.ball_count(), rng, &mut counts);
    counts
}

/// The allocation drawn for replicate `replicate` of a run seeded `seed`.
pub fn replicate_allocation(model: &AllocationModel, sampler: &Sampler, seed: u64, replicate: u64) -> Vec<u64> {
    let mut counts = vec![0; model.box_count()];
    let mut rng = replicate_stream(seed, replicate);
    sampler.sample_into(model.ball_count(), &mut rng, &mut counts);
    counts
}

/// `N̂_r` for `r = 0..=n`: how many boxes hold exactly `r` balls.
pub fn occupancy_counts(counts: &[u64], n: usize) -> Vec<u64> {
    let mut occ = vec![0; n + 1];
    for &c in counts {
        occ[c as usize] += 1;
    }
    debug_assert_eq!(occ.iter().sum::<u64>(), counts.len() as u64);
    debug_assert_eq!(
        occ.iter().enumerate().map(|(r, &k)| r as u64 * k).sum::<u64>(),
        n as u64
    );
    occ
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub replicates: u64,
    pub seed: u64,
    /// Worker threads; `0` uses the rayon default.
    pub workers: usize,
    /// Tracked occupancy indices; `None` tracks `0..=min(n, 10)`.
    pub indices: Option<Vec<usize>>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { replicates: DEFAULT_REPLICATES, seed: 42, workers: 0, indices: None }
    }
}

/// Empirical moments of `q̂_r` over independent replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSummary {
    pub model: AllocationModel,
    pub replicates: u64,
    pub seed: u64,
    pub indices: Vec<usize>,
    pub means: BTreeMap<usize, f64>,
    pub variances: BTreeMap<usize, f64>,
    /// Keyed by `(r, t)` with `r < t`.
    pub covariances: BTreeMap<(usize, usize), f64>,
    /// Standard error of each mean.
    pub std_errors: BTreeMap<usize, f64>,
    /// Standard error of each sample variance.
    pub variance_std_errors: BTreeMap<usize, f64>,
}

pub fn simulate(model: &AllocationModel, replicates: u64, seed: u64) -> Result<SimulationSummary> {
    simulate_with(model, &SimConfig { replicates, seed, ..SimConfig::default() })
}

pub fn simulate_with(model: &AllocationModel, config: &SimConfig) -> Result<SimulationSummary> {
    if config.replicates < 2 {
        return Err(range_err("at least two replicates are required"));
    }
    let n = model.ball_count();
    let mut indices = config
        .indices
        .clone()
        .unwrap_or_else(|| (0..=n.min(10)).collect());
    indices.sort_unstable();
    indices.dedup();

    let sampler = Sampler::for_model(model);
    let chunks = config.replicates.div_ceil(CHUNK_SIZE);
    let run_chunk = |chunk: u64| -> MomentAccumulator {
        let start = chunk * CHUNK_SIZE;
        let end = (start + CHUNK_SIZE).min(config.replicates);
        let big_n = model.box_count() as f64;
        let mut acc = MomentAccumulator::new(indices.len());
        let mut counts = vec![0u64; model.box_count()];
        let mut values = vec![0.0; indices.len()];
        for i in start..end {
            let mut rng = replicate_stream(config.seed, i);
            sampler.sample_into(n, &mut rng, &mut counts);
            let occ = occupancy_counts(&counts, n);
            for (v, &r) in values.iter_mut().zip(&indices) {
                *v = occ.get(r).map_or(0.0, |&k| k as f64 / big_n);
            }
            acc.push(&values);
        }
        acc
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| range_err(format!("cannot start worker pool: {e}")))?;
    let parts: Vec<MomentAccumulator> =
        pool.install(|| (0..chunks).into_par_iter().map(run_chunk).collect());
    let mut total = MomentAccumulator::new(indices.len());
    for part in &parts {
        total.merge(part);
    }

    let mut summary = SimulationSummary {
        model: model.clone(),
        replicates: config.replicates,
        seed: config.seed,
        indices: indices.clone(),
        means: BTreeMap::new(),
        variances: BTreeMap::new(),
        covariances: BTreeMap::new(),
        std_errors: BTreeMap::new(),
        variance_std_errors: BTreeMap::new(),
    };
    for (i, &r) in indices.iter().enumerate() {
        summary.means.insert(r, total.mean(i));
        summary.variances.insert(r, total.variance(i));
        summary.std_errors.insert(r, total.std_error_of_mean(i));
        summary.variance_std_errors.insert(r, total.std_error_of_variance(i));
        for (j, &t) in indices.iter().enumerate().skip(i + 1) {
            summary.covariances.insert((r, t), total.covariance(i, j));
        }
    }
    Ok(summary)
}

/// Simulated, exact and approximate moments of one `q̂_r`, with the
/// certified bands on `exact − approximation` (absent when the bounds do
/// not apply).
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyRow {
    pub n: usize,
    pub box_count: usize,
    pub replicates: u64,
    pub seed: u64,
    pub r: usize,
    pub sim_mean: f64,
    pub sim_var: f64,
    pub se_mean: f64,
    pub exact_mean: f64,
    pub approx_mean: f64,
    pub diff_mean: f64,
    pub bound_lo_mean: Option<f64>,
    pub bound_hi_mean: Option<f64>,
    pub se_var: f64,
    pub exact_var: f64,
    pub approx_var: f64,
    pub diff_var: f64,
    pub bound_lo_var: Option<f64>,
    pub bound_hi_var: Option<f64>,
}

/// One row per tracked index, using the general expansions.
pub fn summary_rows(summary: &SimulationSummary) -> Result<Vec<OccupancyRow>> {
    let model = &summary.model;
    let n = model.ball_count();
    let nf = n as f64;
    let certified = n >= 1 && is_applicable(model);
    summary
        .indices
        .iter()
        .map(|&r| {
            let (exact_m, exact_v) = if r <= n {
                (exact_mean(model, r)?, exact_variance(model, r)?)
            } else {
                (0.0, 0.0)
            };
            let (approx_m, approx_v) = if n >= 1 && r <= n {
                (mean_expansion(model, r)?.value(), variance_expansion(model, r)?.correction)
            } else {
                (exact_m, exact_v)
            };
            let (mean_band, var_band) = if certified && r <= n {
                let s = 1.0 / (nf * nf);
                let (l1, u1) = r1_bounds(r, model.beta())?;
                let (lv, uv) = variance_remainder_bounds(r, model.alpha(), model.beta())?;
                ((Some(l1 * s), Some(u1 * s)), (Some(lv * s), Some(uv * s)))
            } else {
                ((None, None), (None, None))
            };
            Ok(OccupancyRow {
                n,
                box_count: model.box_count(),
                replicates: summary.replicates,
                seed: summary.seed,
                r,
                sim_mean: summary.means[&r],
                sim_var: summary.variances[&r],
                se_mean: summary.std_errors[&r],
                exact_mean: exact_m,
                approx_mean: approx_m,
                diff_mean: summary.means[&r] - approx_m,
                bound_lo_mean: mean_band.0,
                bound_hi_mean: mean_band.1,
                se_var: summary.variance_std_errors[&r],
                exact_var: exact_v,
                approx_var: approx_v,
                diff_var: summary.variances[&r] - approx_v,
                bound_lo_var: var_band.0,
                bound_hi_var: var_band.1,
            })
        })
        .collect()
}

/// `n = 10, 15, …, 100`.
pub fn default_figure1_grid() -> Vec<usize> {
    (10..=100).step_by(5).collect()
}

/// Empty-box proportion `q̂₀` of the equiprobable model: simulated mean and
/// variance against their closed-form approximations and `n⁻²` bands, one
/// row per `n`. Every grid point uses the same seed.
pub fn figure1_data(
    box_count: usize,
    n_values: &[usize],
    replicates: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<OccupancyRow>> {
    if box_count < 4 {
        return Err(Error::Applicability { q1: 1.0 / box_count.max(1) as f64, limit: 0.25 });
    }
    let profile = WeightProfile::equiprobable(box_count)?;
    n_values
        .iter()
        .map(|&n| {
            let model = AllocationModel::new(n, profile.clone());
            let mean_env = equiprobable_envelope(n, box_count, EnvelopeTarget::Mean)?;
            let var_env = equiprobable_envelope(n, box_count, EnvelopeTarget::Variance)?;
            let config = SimConfig { replicates, seed, workers, indices: Some(vec![0]) };
            let s = simulate_with(&model, &config)?;
            Ok(OccupancyRow {
                n,
                box_count,
                replicates,
                seed,
                r: 0,
                sim_mean: s.means[&0],
                sim_var: s.variances[&0],
                se_mean: s.std_errors[&0],
                exact_mean: exact_mean(&model, 0)?,
                approx_mean: mean_env.approximation,
                diff_mean: s.means[&0] - mean_env.approximation,
                bound_lo_mean: Some(mean_env.lower),
                bound_hi_mean: Some(mean_env.upper),
                se_var: s.variance_std_errors[&0],
                exact_var: exact_variance(&model, 0)?,
                approx_var: var_env.approximation,
                diff_var: s.variances[&0] - var_env.approximation,
                bound_lo_var: Some(var_env.lower),
                bound_hi_var: Some(var_env.upper),
            })
        })
        .collect()
}
