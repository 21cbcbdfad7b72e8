//! Independent high-precision oracles for the exact moments and the
//! special functions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use occupancy::exact::{exact_covariance, exact_mean, exact_variance};
use occupancy::special::{delta, delta_star, varphi, varphi_star};
use occupancy::{AllocationModel, WeightProfile};

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().expect("finite")
}

/// Exact occupancy moments by enumerating every count vector.
struct RationalMoments {
    mean: Vec<BigRational>,
    second: Vec<Vec<BigRational>>,
    box_count: i64,
}

fn rational_moments(n: usize, weights: &[BigRational]) -> RationalMoments {
    let big_n = weights.len();
    let mut mean = vec![BigRational::zero(); n + 1];
    let mut second = vec![vec![BigRational::zero(); n + 1]; n + 1];
    let mut fact = vec![BigInt::one()];
    for k in 1..=n {
        let next = &fact[k - 1] * BigInt::from(k);
        fact.push(next);
    }
    let mut counts = vec![0usize; big_n];
    #[allow(clippy::too_many_arguments)]
    fn walk(
        k: usize,
        left: usize,
        counts: &mut [usize],
        weights: &[BigRational],
        fact: &[BigInt],
        n: usize,
        mean: &mut [BigRational],
        second: &mut [Vec<BigRational>],
    ) {
        if k + 1 == counts.len() {
            counts[k] = left;
            let mut p = BigRational::from_integer(fact[n].clone());
            for (c, w) in counts.iter().zip(weights) {
                p = p * num_traits::pow(w.clone(), *c) / BigRational::from_integer(fact[*c].clone());
            }
            let mut occ = vec![0i64; n + 1];
            for &c in counts.iter() {
                occ[c] += 1;
            }
            for r in 0..=n {
                if occ[r] == 0 {
                    continue;
                }
                mean[r] += &p * BigRational::from_integer(occ[r].into());
                for t in 0..=n {
                    if occ[t] != 0 {
                        second[r][t] += &p * BigRational::from_integer((occ[r] * occ[t]).into());
                    }
                }
            }
            return;
        }
        for c in 0..=left {
            counts[k] = c;
            walk(k + 1, left - c, counts, weights, fact, n, mean, second);
        }
    }
    walk(0, n, &mut counts, weights, &fact, n, &mut mean, &mut second);
    RationalMoments { mean, second, box_count: big_n as i64 }
}

impl RationalMoments {
    fn q_mean(&self, r: usize) -> BigRational {
        &self.mean[r] / BigRational::from_integer(self.box_count.into())
    }

    fn q_cov(&self, r: usize, t: usize) -> BigRational {
        let nn = BigRational::from_integer((self.box_count * self.box_count).into());
        &self.second[r][t] / nn - self.q_mean(r) * self.q_mean(t)
    }
}

fn rational_profiles() -> Vec<Vec<BigRational>> {
    vec![
        vec![rat(1, 1)],
        vec![rat(1, 2), rat(1, 2)],
        vec![rat(3, 4), rat(1, 4)],
        vec![rat(1, 2), rat(1, 3), rat(1, 6)],
        vec![rat(3, 5), rat(1, 5), rat(1, 5)],
        vec![rat(1, 4), rat(1, 4), rat(1, 4), rat(1, 4)],
        vec![rat(2, 5), rat(3, 10), rat(1, 5), rat(1, 10)],
        vec![rat(7, 10), rat(1, 10), rat(1, 10), rat(1, 10)],
    ]
}

fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= rel * b.abs() + abs
}

#[test]
fn exact_moments_match_rational_enumeration() {
    for weights in rational_profiles() {
        let profile = WeightProfile::new(weights.iter().map(to_f64).collect()).unwrap();
        for n in [1usize, 2, 3, 5, 8] {
            let model = AllocationModel::new(n, profile.clone());
            let oracle = rational_moments(n, &weights);
            for r in 0..=n {
                let m = exact_mean(&model, r).unwrap();
                let mo = to_f64(&oracle.q_mean(r));
                assert!(close(m, mo, 1e-12, 1e-15), "mean {weights:?} n={n} r={r}: {m} vs {mo}");
                let v = exact_variance(&model, r).unwrap();
                let vo = to_f64(&oracle.q_cov(r, r));
                assert!(close(v, vo, 1e-11, 1e-15), "var {weights:?} n={n} r={r}: {v} vs {vo}");
                for t in r + 1..=n {
                    let c = exact_covariance(&model, r, t).unwrap();
                    let co = to_f64(&oracle.q_cov(r, t));
                    assert!(close(c, co, 1e-11, 1e-15), "cov {weights:?} n={n} ({r},{t}): {c} vs {co}");
                }
            }
        }
    }
}

/// `(n!/(n−r)!)/n^r` exactly.
fn falling_ratio(n: usize, r: usize) -> BigRational {
    (0..r).fold(BigRational::one(), |acc, k| acc * rat((n - k) as i64, n as i64))
}

#[test]
fn varphi_matches_rational_definition() {
    for n in 1..=30usize {
        for r in 0..=n {
            let nn = BigRational::from_integer(BigInt::from(n));
            let phi = &nn * (BigRational::one() - falling_ratio(n, r));
            let pairs = rat((r * r.saturating_sub(1) / 2) as i64, 1);
            let phi_star = &nn * (pairs - &phi);
            let (a, b) = (varphi(n, r).unwrap(), to_f64(&phi));
            assert!(close(a, b, 1e-13, 0.0), "varphi({n},{r}): {a} vs {b}");
            let (a, b) = (varphi_star(n, r).unwrap(), to_f64(&phi_star));
            assert!(close(a, b, 1e-12, 0.0), "varphi_star({n},{r}): {a} vs {b}");
        }
    }
}

/// Fixed-point reals with 1024 fractional bits.
const BITS: u32 = 1024;

fn fixed(x: &BigRational) -> BigInt {
    (x.numer() << BITS) / x.denom()
}

fn fixed_to_f64(v: &BigInt) -> f64 {
    to_f64(&BigRational::new(v.clone(), BigInt::one() << BITS))
}

/// `e^{-x}` in fixed point for rational `x ≥ 0`.
fn fixed_exp_neg(x: &BigRational) -> BigInt {
    let one = BigInt::one() << BITS;
    let mut term = one.clone();
    let mut sum = one.clone();
    let mut k = 1i64;
    while !term.is_zero() {
        term = (term * x.numer()) / (x.denom() * BigInt::from(k));
        sum += &term;
        k += 1;
    }
    (&one << BITS) / sum
}

/// `(δ, δ*)` from their defining expressions, exact up to 2^-1024.
fn delta_oracle(n: usize, r: usize, x: &BigRational) -> (f64, f64) {
    let nn = BigRational::from_integer(BigInt::from(n));
    let base = BigRational::one() - x / &nn;
    let power = num_traits::pow(base, n - r);
    let e = fixed_exp_neg(x);
    let d = BigInt::from(n) * (fixed(&power) - &e);
    let lead = x * (rat(r as i64, 1) - x / rat(2, 1));
    let lead_fixed = (&e * lead.numer()) / lead.denom();
    let ds = BigInt::from(n) * (&d - lead_fixed);
    (fixed_to_f64(&d), fixed_to_f64(&ds))
}

#[test]
fn delta_matches_high_precision_definition() {
    for n in [1usize, 2, 5, 10, 50, 200] {
        let mut xs: Vec<BigRational> = [0, 1, 4, 8, 20, 40].iter().map(|&k| rat(k, 8)).collect();
        xs.extend([rat(n as i64, 4), rat(n as i64, 2), rat(3 * n as i64, 4), rat(n as i64, 1)]);
        for r in [0usize, 1, 2, 3, 5, 8, 20].into_iter().filter(|&r| r <= n) {
            for x in xs.iter().filter(|x| **x <= rat(n as i64, 1)) {
                let xf = to_f64(x);
                let (d, ds) = delta_oracle(n, r, x);
                let a = delta(n, r, xf).unwrap();
                assert!(close(a, d, 1e-12, 1e-300), "delta({n},{r},{xf}): {a} vs {d}");
                let b = delta_star(n, r, xf).unwrap();
                assert!(close(b, ds, 1e-10, 1e-300), "delta_star({n},{r},{xf}): {b} vs {ds}");
            }
        }
    }
}

#[test]
fn delta_star_reference_values() {
    // δ*₁₀₀(0,1) and δ*₅₀(2,1), frozen from the fixed-point oracle
    let (_, a) = delta_oracle(100, 0, &rat(1, 1));
    let (_, b) = delta_oracle(50, 2, &rat(1, 1));
    assert!((a - -0.077_026_923_556_050_6).abs() < 1e-15, "{a}");
    assert!((b - 0.673_996_061_620_844).abs() < 1e-14, "{b}");
    assert!(close(delta_star(100, 0, 1.0).unwrap(), a, 1e-12, 0.0));
    assert!(close(delta_star(50, 2, 1.0).unwrap(), b, 1e-12, 0.0));
}
