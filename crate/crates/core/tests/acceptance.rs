//! Acceptance gates. Each test prints one `PASS`/`FAIL` line and then
//! asserts it, so `cargo test -- --nocapture` shows the full table.

use std::time::Instant;

use occupancy::approx::{equiprobable_envelope, EnvelopeTarget};
use occupancy::corpus::{certify_corpus, tiny_profiles, verification_corpus};
use occupancy::exact::{
    brute_force_moments, brute_force_raw_moments, exact_covariance, exact_mean, exact_variance,
    q_functional, q_functional_via_delta,
};
use occupancy::sim::{
    default_figure1_grid, figure1_data, occupancy_counts, replicate_allocation, simulate_with, Sampler,
};
use occupancy::special::{delta, delta_star, poisson_weight, varphi, varphi_star};
use occupancy::{AllocationModel, SimConfig, WeightProfile};

fn gate(name: &str, started: Instant, failures: &[String], checked: usize) {
    let secs = started.elapsed().as_secs_f64();
    if failures.is_empty() {
        println!("PASS {name}: {checked} checks in {secs:.2}s");
    } else {
        println!("FAIL {name}: {} of {checked} checks failed in {secs:.2}s", failures.len());
        for f in failures.iter().take(40) {
            println!("    {f}");
        }
    }
    assert!(failures.is_empty(), "{name}: {} failures, first: {}", failures.len(), failures[0]);
}

#[test]
fn exact_moments_agree_with_enumeration() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    for p in tiny_profiles() {
        for n in 1..=10 {
            let model = AllocationModel::new(n, p.profile.clone());
            let oracle = brute_force_moments(&model).unwrap();
            for r in 0..=n {
                for t in r..=n {
                    let (got, want) = if r == t {
                        (exact_variance(&model, r).unwrap(), oracle.variances[&r])
                    } else {
                        (exact_covariance(&model, r, t).unwrap(), oracle.covariance(r, t).unwrap())
                    };
                    checked += 1;
                    if (got - want).abs() > 1e-11 {
                        failures.push(format!("{} n={n} ({r},{t}): {got} vs {want}", p.id));
                    }
                }
                let got = exact_mean(&model, r).unwrap();
                let want = oracle.means[&r];
                checked += 1;
                if (got - want).abs() > 1e-11 {
                    failures.push(format!("{} n={n} mean r={r}: {got} vs {want}", p.id));
                }
            }
        }
    }
    assert!(t0.elapsed().as_secs_f64() < 10.0);
    gate("exact moments agree with enumeration", t0, &failures, checked);
}

#[test]
fn occupancy_proportions_sum_and_balance() {
    let t0 = Instant::now();
    let profiles = [
        ("equi:10", WeightProfile::equiprobable(10).unwrap()),
        ("equi:4", WeightProfile::equiprobable(4).unwrap()),
        ("powerlaw:20:1", WeightProfile::power_law(20, 1.0).unwrap()),
        ("powerlaw:40:0.5", WeightProfile::power_law(40, 0.5).unwrap()),
        ("0.5/0.3/0.2", WeightProfile::new(vec![0.5, 0.3, 0.2]).unwrap()),
    ];
    let mut failures = Vec::new();
    let mut checked = 0;
    for (id, profile) in &profiles {
        for n in [1usize, 5, 20, 60, 100, 200] {
            let model = AllocationModel::new(n, profile.clone());
            let means: Vec<f64> = (0..=n).map(|r| exact_mean(&model, r).unwrap()).collect();
            let total: f64 = means.iter().sum();
            let load: f64 = means.iter().enumerate().map(|(r, m)| r as f64 * m).sum();
            checked += 2;
            if (total - 1.0).abs() > 1e-9 {
                failures.push(format!("{id} n={n}: Σ E q̂_r = {total}"));
            }
            if (load - model.alpha()).abs() > 1e-9 {
                failures.push(format!("{id} n={n}: Σ r E q̂_r = {load}, α = {}", model.alpha()));
            }
            if n > 60 {
                continue;
            }
            for r in 0..=n {
                let row: f64 = (0..=n)
                    .map(|t| {
                        if t == r {
                            exact_variance(&model, r).unwrap()
                        } else {
                            exact_covariance(&model, r, t).unwrap()
                        }
                    })
                    .sum();
                checked += 1;
                if row.abs() > 1e-9 {
                    failures.push(format!("{id} n={n}: covariance row {r} sums to {row}"));
                }
            }
        }
    }
    assert!(t0.elapsed().as_secs_f64() < 30.0);
    gate("occupancy proportions sum to one and balance the load", t0, &failures, checked);
}

const SPECIAL_GRID_N: [usize; 6] = [2, 5, 10, 50, 200, 10_000];

#[test]
fn falling_factorial_and_binomial_power_inequalities() {
    let t0 = Instant::now();
    let slack = |b: f64| 1e-12 * b.abs().max(1.0);
    let mut failures = Vec::new();
    let mut checked = 0;
    for &n in &SPECIAL_GRID_N {
        for r in 0..=n.min(30) {
            let rf = r as f64;
            let phi = varphi(n, r).unwrap();
            let phi_star = varphi_star(n, r).unwrap();
            checked += 2;
            if phi < -slack(0.0) || phi > rf * (rf - 1.0) / 2.0 + slack(rf * rf) {
                failures.push(format!("varphi({n},{r}) = {phi}"));
            }
            if phi_star < -slack(0.0) || phi_star > rf.powi(4) + slack(rf.powi(4)) {
                failures.push(format!("varphi_star({n},{r}) = {phi_star}"));
            }
        }
        let half = n as f64 / 2.0;
        for r in 0..=n.min(25) {
            let rf = r as f64;
            for i in 0..50 {
                let x = half * i as f64 / 49.0;
                let d = delta(n, r, x).unwrap();
                let ds = delta_star(n, r, x).unwrap();
                let d_hi = rf * 2f64.powf(rf - 1.0);
                let ds_hi = x * x * rf * (rf + 1.0) * 2f64.powf(rf + 1.0);
                let ds_lo = -4.0 - rf;
                checked += 2;
                if d < -2.0 - slack(2.0) || d > d_hi + slack(d_hi) {
                    failures.push(format!("delta({n},{r},{x}) = {d} outside [-2, {d_hi}]"));
                }
                if ds < ds_lo - slack(ds_lo) || ds > ds_hi + slack(ds_hi) {
                    failures.push(format!("delta_star({n},{r},{x}) = {ds} outside [{ds_lo}, {ds_hi}]"));
                }
            }
        }
    }
    assert!(t0.elapsed().as_secs_f64() < 5.0);
    gate("falling-factorial and binomial-power remainder inequalities", t0, &failures, checked);
}

#[test]
fn pair_functional_identity() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    for p in tiny_profiles().into_iter().filter(|p| p.profile.largest() <= 0.5) {
        for n in 1..=10 {
            let model = AllocationModel::new(n, p.profile.clone());
            for r in 0..=n {
                for t in 0..=n - r {
                    let a = q_functional(&model, r, t).unwrap();
                    let b = q_functional_via_delta(&model, r, t).unwrap();
                    // the right side is a leading product plus a correction;
                    // measure against that product when the value itself is 0
                    let leading = model.e_xi(|x| poisson_weight(r, x).unwrap()).unwrap()
                        * model.e_xi(|x| poisson_weight(t, x).unwrap()).unwrap();
                    let scale = a.abs().max(b.abs()).max(leading);
                    checked += 1;
                    if (a - b).abs() > 1e-10 * scale {
                        failures.push(format!("{} n={n} ({r},{t}): {a} vs {b}", p.id));
                    }
                }
            }
        }
    }
    assert!(t0.elapsed().as_secs_f64() < 5.0);
    gate("pair functional identity", t0, &failures, checked);
}

#[test]
fn remainders_lie_within_certified_bounds() {
    let t0 = Instant::now();
    let rows = certify_corpus(&verification_corpus(), 0).unwrap();
    let applicable = rows.iter().filter(|r| r.report.applicable).count();
    let failures: Vec<String> = rows
        .iter()
        .filter(|r| r.report.violated())
        .map(|r| {
            format!(
                "{} n={} {} r={} t={:?}: {:.6e} outside [{:.6e}, {:.6e}]",
                r.model_id, r.n, r.kind, r.r, r.t, r.report.remainder, r.report.lower, r.report.upper
            )
        })
        .collect();
    assert!(t0.elapsed().as_secs_f64() < 120.0);
    gate("remainders lie within certified bounds", t0, &failures, applicable);
}

#[test]
fn empty_box_envelopes_hold_exactly() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    let profile = WeightProfile::equiprobable(100).unwrap();
    for n in default_figure1_grid() {
        let model = AllocationModel::new(n, profile.clone());
        for (which, exact) in [
            (EnvelopeTarget::Mean, exact_mean(&model, 0).unwrap()),
            (EnvelopeTarget::Variance, exact_variance(&model, 0).unwrap()),
        ] {
            let env = equiprobable_envelope(n, 100, which).unwrap();
            let diff = exact - env.approximation;
            checked += 1;
            if diff < env.lower - 1e-12 || diff > env.upper + 1e-12 {
                failures.push(format!("{which:?} n={n}: {diff:e} outside [{:e}, {:e}]", env.lower, env.upper));
            }
        }
    }
    assert!(t0.elapsed().as_secs_f64() < 10.0);
    gate("empty-box mean and variance envelopes hold exactly", t0, &failures, checked);
}

#[test]
fn simulated_empty_box_curves_stay_in_bands() {
    let t0 = Instant::now();
    let grid = default_figure1_grid();
    let rows = figure1_data(100, &grid, 50_000, 20_240_601, 4).unwrap();
    let mut failures = Vec::new();
    for row in &rows {
        let (lo, hi) = (row.bound_lo_mean.unwrap(), row.bound_hi_mean.unwrap());
        let w = 4.0 * row.se_mean;
        if row.diff_mean < lo - w || row.diff_mean > hi + w {
            failures.push(format!("mean n={}: {:e} outside [{lo:e}, {hi:e}] ± {w:e}", row.n, row.diff_mean));
        }
        let (lo, hi) = (row.bound_lo_var.unwrap(), row.bound_hi_var.unwrap());
        let w = 4.0 * row.se_var;
        if row.diff_var < lo - w || row.diff_var > hi + w {
            failures.push(format!("variance n={}: {:e} outside [{lo:e}, {hi:e}] ± {w:e}", row.n, row.diff_var));
        }
    }
    let again = figure1_data(100, &grid, 50_000, 20_240_601, 4).unwrap();
    if again != rows {
        failures.push("re-run with the same seed is not bit-identical".into());
    }
    assert!(t0.elapsed().as_secs_f64() < 120.0);
    gate("simulated empty-box curves stay within bands", t0, &failures, 2 * rows.len() + 1);
}

#[test]
fn simulator_conserves_and_matches_enumeration() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;

    let model = AllocationModel::new(7, WeightProfile::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap());
    let sampler = Sampler::for_model(&model);
    for i in 0..10_000 {
        let counts = replicate_allocation(&model, &sampler, 99, i);
        let occ = occupancy_counts(&counts, 7);
        let balls: u64 = counts.iter().sum();
        let boxes: u64 = occ.iter().sum();
        let load: u64 = occ.iter().enumerate().map(|(r, &k)| r as u64 * k).sum();
        checked += 1;
        if balls != 7 || boxes != 4 || load != 7 {
            failures.push(format!("replicate {i}: balls {balls}, boxes {boxes}, load {load}"));
        }
    }

    let replicates = 200_000u64;
    let m = replicates as f64;
    for p in tiny_profiles() {
        for n in [2usize, 5, 10] {
            let model = AllocationModel::new(n, p.profile.clone());
            let raw = brute_force_raw_moments(&model).unwrap();
            let config = SimConfig { replicates, seed: 7, workers: 0, indices: Some((0..=n).collect()) };
            let s = simulate_with(&model, &config).unwrap();
            for r in 0..=n {
                let mean = raw.powers[0][r];
                let var = raw.cross[r][r] - mean * mean;
                let se_mean = (var.max(0.0) / m).sqrt();
                // exact sampling variance of the unbiased sample variance
                let mu4 = raw.fourth_central(r);
                let se_var = (mu4 / m - var * var * (m - 3.0) / (m * (m - 1.0))).max(0.0).sqrt();
                checked += 2;
                if (s.means[&r] - mean).abs() > 5.0 * se_mean + 1e-12 {
                    failures.push(format!("{} n={n} mean r={r}: {} vs {mean} (se {se_mean:e})", p.id, s.means[&r]));
                }
                if (s.variances[&r] - var).abs() > 5.0 * se_var + 1e-12 {
                    failures.push(format!("{} n={n} var r={r}: {} vs {var} (se {se_var:e})", p.id, s.variances[&r]));
                }
            }
        }
    }
    assert!(t0.elapsed().as_secs_f64() < 60.0);
    gate("simulator conserves balls and matches enumeration", t0, &failures, checked);
}
