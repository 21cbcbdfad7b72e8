//! Model corpora for oracle checks and bound certification.

use rayon::prelude::*;

use crate::approx::{bound_report, BoundKind, BoundReport};
use crate::error::Result;
use crate::model::{AllocationModel, WeightProfile};

/// Largest occupancy index swept during certification.
pub const MAX_CERTIFIED_INDEX: usize = 8;

/// Ball counts swept for every verification profile.
pub const VERIFICATION_BALL_COUNTS: [usize; 10] = [1, 2, 3, 5, 8, 10, 20, 50, 100, 200];

/// Fixed non-uniform profiles with at most four boxes.
const TINY_PROFILES: [&[f64]; 10] = [
    &[0.5, 0.5],
    &[0.7, 0.3],
    &[0.9, 0.1],
    &[0.5, 0.3, 0.2],
    &[0.45, 0.45, 0.1],
    &[0.6, 0.25, 0.15],
    &[0.4, 0.3, 0.2, 0.1],
    &[0.25, 0.25, 0.3, 0.2],
    &[0.7, 0.1, 0.1, 0.1],
    &[0.35, 0.35, 0.15, 0.15],
];

/// A profile label and its weights.
#[derive(Debug, Clone)]
pub struct NamedProfile {
    pub id: String,
    pub profile: WeightProfile,
}

/// Equiprobable profiles with `N = 1..=4` and ten fixed weight vectors.
pub fn tiny_profiles() -> Vec<NamedProfile> {
    let mut out: Vec<NamedProfile> = (1..=4)
        .map(|n| NamedProfile {
            id: format!("equi:{n}"),
            profile: WeightProfile::equiprobable(n).expect("N ≥ 1"),
        })
        .collect();
    for (i, w) in TINY_PROFILES.iter().enumerate() {
        out.push(NamedProfile {
            id: format!("tiny{i}"),
            profile: WeightProfile::new(w.to_vec()).expect("valid fixed profile"),
        });
    }
    out
}

/// Profiles used for certification: equiprobable `N ∈ {4, 10, 100}` and
/// power laws with exponents `0.5` and `1` (all with `q₁ ≤ 1/4`).
pub fn verification_profiles() -> Vec<NamedProfile> {
    let mut out = Vec::new();
    for n in [4, 10, 100] {
        out.push(NamedProfile {
            id: format!("equi:{n}"),
            profile: WeightProfile::equiprobable(n).expect("N ≥ 1"),
        });
    }
    for (n, s) in [(20, 0.5), (100, 0.5), (40, 1.0), (100, 1.0)] {
        out.push(NamedProfile {
            id: format!("powerlaw:{n}:{s}"),
            profile: WeightProfile::power_law(n, s).expect("valid power law"),
        });
    }
    out
}

/// A labelled model in a sweep.
#[derive(Debug, Clone)]
pub struct CorpusModel {
    pub id: String,
    pub model: AllocationModel,
}

pub fn verification_corpus() -> Vec<CorpusModel> {
    let mut out = Vec::new();
    for p in verification_profiles() {
        for &n in &VERIFICATION_BALL_COUNTS {
            out.push(CorpusModel { id: p.id.clone(), model: AllocationModel::new(n, p.profile.clone()) });
        }
    }
    out
}

/// One certified remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub model_id: String,
    pub n: usize,
    pub box_count: usize,
    pub r: usize,
    /// Second index; present for the covariance and variance remainders.
    pub t: Option<usize>,
    pub kind: BoundKind,
    pub report: BoundReport,
}

/// Every remainder with `r, t ≤ min(8, n)`: `R₀`, `R₁` and the variance
/// remainder per `r`, and the covariance remainder for `r < t`,
/// `r + t ≤ n`.
pub fn certify_model(id: &str, model: &AllocationModel) -> Result<Vec<BoundRow>> {
    let n = model.ball_count();
    let top = n.min(MAX_CERTIFIED_INDEX);
    let row = |kind, r, t: Option<usize>| -> Result<BoundRow> {
        Ok(BoundRow {
            model_id: id.to_string(),
            n,
            box_count: model.box_count(),
            r,
            t,
            kind,
            report: bound_report(model, kind, r, t.unwrap_or(r))?,
        })
    };
    let mut rows = Vec::new();
    for r in 0..=top {
        rows.push(row(BoundKind::R0, r, None)?);
        rows.push(row(BoundKind::R1, r, None)?);
        rows.push(row(BoundKind::R2Var, r, Some(r))?);
        for t in r + 1..=top {
            if r + t <= n {
                rows.push(row(BoundKind::R2Cov, r, Some(t))?);
            }
        }
    }
    Ok(rows)
}

/// Certifies every model in parallel on at most `workers` threads (`0`
/// uses the rayon default), keeping corpus order.
pub fn certify_corpus(corpus: &[CorpusModel], workers: usize) -> Result<Vec<BoundRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| crate::error::range_err(format!("cannot start worker pool: {e}")))?;
    let parts: Vec<Result<Vec<BoundRow>>> =
        pool.install(|| corpus.par_iter().map(|m| certify_model(&m.id, &m.model)).collect());
    let mut rows = Vec::new();
    for part in parts {
        rows.extend(part?);
    }
    Ok(rows)
}
